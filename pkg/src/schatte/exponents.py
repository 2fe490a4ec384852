"""Exponent constraints and the supremum of the attainable rate exponent.

The admissible tuples ``(alpha, beta, gamma, epsilon)`` satisfy the strict
system

    1/2 - gamma > 5 epsilon / 2 + alpha      (coupling)
    alpha > beta,  alpha - beta > 2 gamma    (gap)
    1/2 > alpha + gamma,  gamma < epsilon/2  (fluctuation)
    epsilon > alpha                          (covariance)
    alpha, beta, gamma, epsilon > 0

Letting ``epsilon -> alpha+`` and ``beta -> 0+`` gives
``gamma < min(alpha / 2, (1 - 7 alpha) / 2)``, maximised where the two lines
cross.
"""
from dataclasses import dataclass
from fractions import Fraction
import math

import numpy as np

from .errors import ConfigurationError

__all__ = [
    "ExponentTuple",
    "CONSTRAINTS",
    "check_feasible",
    "envelope",
    "analytic_sup",
    "grid_search",
    "optimize_gamma",
    "GammaOptimum",
    "FLOAT_MARGIN",
]

FLOAT_MARGIN = 1e-12
HALF = Fraction(1, 2)

# (name, lhs, rhs): the constraint reads lhs > rhs
CONSTRAINTS = (
    ("coupling", lambda a, b, g, e: HALF - g, lambda a, b, g, e: Fraction(5, 2) * e + a),
    ("alpha_gt_beta", lambda a, b, g, e: a, lambda a, b, g, e: b),
    ("gap", lambda a, b, g, e: a - b, lambda a, b, g, e: 2 * g),
    ("fluct_alpha_gamma", lambda a, b, g, e: HALF, lambda a, b, g, e: a + g),
    ("fluct_gamma_eps", lambda a, b, g, e: e / 2, lambda a, b, g, e: g),
    ("eps_gt_alpha", lambda a, b, g, e: e, lambda a, b, g, e: a),
    ("alpha_pos", lambda a, b, g, e: a, lambda a, b, g, e: 0),
    ("beta_pos", lambda a, b, g, e: b, lambda a, b, g, e: 0),
    ("gamma_pos", lambda a, b, g, e: g, lambda a, b, g, e: 0),
    ("epsilon_pos", lambda a, b, g, e: e, lambda a, b, g, e: 0),
)


@dataclass(frozen=True)
class ExponentTuple:
    alpha: "Fraction | float"
    beta: "Fraction | float"
    gamma: "Fraction | float"
    epsilon: "Fraction | float"

    def as_float(self):
        return ExponentTuple(float(self.alpha), float(self.beta),
                             float(self.gamma), float(self.epsilon))

    def to_dict(self):
        return {k: float(getattr(self, k)) for k in ("alpha", "beta", "gamma", "epsilon")}


def _exact(v):
    return isinstance(v, (int, Fraction)) and not isinstance(v, bool)


def check_feasible(t, margin=None):
    """Evaluate every strict inequality; return ``(ok, violated_names)``.

    Exact (``int``/``Fraction``) tuples are compared exactly.  Otherwise a
    constraint holds only if ``lhs - rhs > margin`` (default ``1e-12``).
    """
    vals = (t.alpha, t.beta, t.gamma, t.epsilon)
    exact = all(_exact(v) for v in vals)
    if margin is None:
        margin = 0 if exact else FLOAT_MARGIN
    if not exact:
        vals = tuple(float(v) for v in vals)
    violated = []
    for name, lhs, rhs in CONSTRAINTS:
        diff = lhs(*vals) - rhs(*vals)
        if not diff > margin:
            violated.append(name)
    return not violated, violated


def envelope(alpha):
    """``min(alpha / 2, (1 - 7 alpha) / 2)``: the bound on gamma at a given alpha."""
    return min(alpha / 2, (1 - 7 * alpha) / 2)


def analytic_sup():
    """Exact supremum of gamma and its maximiser in alpha.

    ``alpha / 2`` increases and ``(1 - 7 alpha) / 2`` decreases, so the
    envelope peaks where they are equal: ``alpha = 1/8``, ``gamma = 1/16``.
    """
    # alpha/2 = (1 - 7 alpha)/2  <=>  8 alpha = 1
    alpha = Fraction(1, 8)
    return envelope(alpha), alpha


def _axes(resolution):
    # a-priori box: eps > alpha and the coupling bound give alpha < 1/7,
    # eps < 1/5, and the gap gives gamma < alpha / 2 < 1/14
    i = np.arange(1, resolution + 1)
    return (i * (1 / 7 / resolution), i * (1 / 7 / resolution),
            i * (1 / 14 / resolution), i * (1 / 5 / resolution))


def grid_search(resolution):
    """Best gamma over a ``resolution**4`` grid of strictly feasible tuples.

    For each ``(alpha, beta, epsilon)`` the largest feasible gamma on the grid
    is found from the binding upper bounds, which equals scanning the gamma
    axis.  Grids at resolutions ``R`` and ``2R`` are nested.

    Returns
    -------
    best : float
        0.0 if no grid tuple is feasible.
    argmax : ExponentTuple or None
    """
    if resolution < 10:
        raise ConfigurationError("resolution must be >= 10")
    A, B, G, E = _axes(resolution)
    hg = G[0]
    best, arg = 0.0, None
    for a in A:
        b = B[a - B > FLOAT_MARGIN]
        e = E[E - a > FLOAT_MARGIN]
        if b.size == 0 or e.size == 0:
            continue
        bound = np.minimum.outer((a - b) / 2,
                                 np.minimum(e / 2, 0.5 - a - 2.5 * e))
        bound = np.minimum(bound, 0.5 - a) - FLOAT_MARGIN
        # index of the largest grid gamma strictly below the bound
        k = np.ceil(bound / hg).astype(np.int64) - 1
        k = np.clip(k, 0, resolution)
        # guard the ceil against roundoff at exact multiples
        k = np.where(k * hg >= bound, k - 1, k)
        k = np.clip(k, 0, resolution)
        flat = int(np.argmax(k))
        kmax = int(k.flat[flat])
        if kmax > 0 and G[kmax - 1] > best:
            ib, ie = np.unravel_index(flat, k.shape)
            best = float(G[kmax - 1])
            arg = ExponentTuple(float(a), float(b[ib]), best, float(e[ie]))
    return best, arg


@dataclass(frozen=True)
class GammaOptimum:
    gamma_sup: Fraction
    alpha_star: Fraction
    grid_best: float
    grid_argmax: "ExponentTuple | None"
    resolution: int

    def to_dict(self):
        demo = ExponentTuple(Fraction(1, 8), Fraction(1, 64), Fraction(1, 16), Fraction(1, 7))
        return {
            "gamma_sup": float(self.gamma_sup),
            "gamma_sup_exact": str(self.gamma_sup),
            "alpha_star": float(self.alpha_star),
            "alpha_star_exact": str(self.alpha_star),
            "grid_best": self.grid_best,
            "grid_argmax": None if self.grid_argmax is None else self.grid_argmax.to_dict(),
            "resolution": self.resolution,
            "violated_demo": {"tuple": demo.to_dict(), "violated": check_feasible(demo)[1]},
        }


def optimize_gamma(resolution=200):
    """Supremum of gamma: exact from the envelope, approximate from the grid."""
    sup, alpha = analytic_sup()
    best, arg = grid_search(resolution)
    return GammaOptimum(sup, alpha, best, arg, int(resolution))
