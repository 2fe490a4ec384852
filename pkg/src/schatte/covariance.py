"""Limiting covariance of the empirical process of ``{S_j x}``.

For levels ``s, t`` in ``[0, 1]`` and ``U`` uniform and independent of the
walk,

    c_rho(s, t) = E f_s(U) f_t(U + S_rho x)
    Gamma(s, t) = min(s, t) - s t + sum_{rho >= 1} [c_rho(s, t) + c_rho(t, s)]
    A(a)        = a (1 - a) + 2 sum_{rho >= 1} c_rho(a, a)

with ``f_a(v) = I{{v} <= a} - a``.  Conditioning on the shift
``y = {S_rho x}`` gives ``c_rho(s, t) = int overlap(s, t, y) g_rho(y) dy - s t``
where ``g_rho`` is the wrapped density and ``overlap`` is piecewise linear in
``y``.

Error control
-------------
``|c_rho(s, t)| <= exp(-lambda rho) sqrt(s(1-s) t(1-t)) <= exp(-lambda rho) / 4``
(Cauchy-Schwarz on the Fourier side), so the rho-series is cut at the first
``R`` whose geometric tail is below ``tol / 2``.  Every retained term gets an
error budget of ``tol / (4 R)``, spent on truncating the density's Fourier
series.
"""
from dataclasses import dataclass, field
from functools import cached_property
import math

import numpy as np

from .errors import DomainError
from .spectrum import WrappedSpectrum, fourier_sum

__all__ = [
    "CovarianceModel",
    "overlap",
    "c_rho",
    "gamma",
    "gamma_matrix",
    "a_functional",
    "lemma3_check",
]

_TWO_PI_I = 2j * np.pi


def _check_level(name, v):
    if not 0.0 <= v <= 1.0:
        raise DomainError(f"{name} must lie in [0, 1], got {v}")


def _overlap(s, t, y):
    # |[y, y+s] ∩ [0, t]| + |[y, y+s] ∩ [1, 1+t]|, valid for y in [0, 1]
    y = np.asarray(y, dtype=float)
    first = np.maximum(0.0, np.minimum(y + s, t) - y)
    second = np.maximum(0.0, np.minimum(y + s, 1.0 + t) - np.maximum(y, 1.0))
    return first + second


def overlap(s, t, y):
    """Lebesgue measure of ``{u in [0, s] : {u + y} <= t}``.

    Examples
    --------
    >>> float(overlap(0.3, 0.6, 0.5))
    0.1
    """
    _check_level("s", s)
    _check_level("t", t)
    ya = np.asarray(y, dtype=float)
    if np.any((ya < 0.0) | (ya >= 1.0)):
        raise DomainError("shift y must lie in [0, 1)")
    out = _overlap(s, t, ya)
    return out if out.ndim else float(out)


def _kinks(s, t):
    return {0.0, t % 1.0, (1.0 - s) % 1.0, (t - s) % 1.0}


@dataclass(frozen=True, eq=False)
class CovarianceModel:
    """Evaluator for ``c_rho``, ``Gamma`` and ``A`` of one walk model.

    Parameters
    ----------
    spec : WrappedSpectrum
    tol : float
        Absolute error target for ``gamma`` and ``a_functional``.
    quad_nodes : int
        Number of uniform nodes of the product-trapezoid rule over the shift.
    """

    spec: WrappedSpectrum
    tol: float = 1e-10
    quad_nodes: int = 1024
    _cache: dict = field(default_factory=dict, init=False, repr=False)

    def __post_init__(self):
        if not self.tol > 0:
            raise DomainError("tol must be positive")
        if int(self.quad_nodes) != self.quad_nodes or self.quad_nodes < 2:
            raise DomainError("quad_nodes must be an integer >= 2")

    @classmethod
    def from_dist(cls, dist, x, **kwargs):
        return cls(WrappedSpectrum(dist, x), **kwargs)

    @property
    def decay_rate(self):
        return self.spec.decay_rate

    @cached_property
    def series_length(self):
        """Number ``R`` of retained rho-terms."""
        lam = self.decay_rate
        if math.isinf(lam):
            return 0
        q = math.exp(-lam)
        # 0.5 * q^(R+1) / (1 - q) < tol / 2
        R = math.ceil(math.log(self.tol * (1.0 - q)) / math.log(q)) - 1
        R = max(R, 1)
        while 0.5 * q ** (R + 1) / (1.0 - q) >= self.tol / 2:
            R += 1
        return R

    def series_tail_bound(self):
        lam = self.decay_rate
        if math.isinf(lam):
            return 0.0
        q = math.exp(-lam)
        return 0.5 * q ** (self.series_length + 1) / (1.0 - q)

    @cached_property
    def term_tol(self):
        return self.tol / (4.0 * max(self.series_length, 1))

    def term_bound(self, s, t, rho):
        """``exp(-lambda rho) sqrt(s(1-s) t(1-t))``, a bound on ``|c_rho(s, t)|``."""
        return math.exp(-self.decay_rate * rho) * math.sqrt(s * (1 - s) * t * (1 - t))

    def kmax(self, rho):
        """Fourier truncation for step ``rho`` (error of ``c_rho`` below ``term_tol``)."""
        return self.spec.kmax(self.term_tol, rho, q=2, factor=2.0 / np.pi**2)

    def _primitive_coefs(self, rho):
        key = ("coef", rho)
        if key not in self._cache:
            k = np.arange(1, self.kmax(rho) + 1)
            ghat = np.conj(self.spec.coeff(k, rho))
            a = ghat / (_TWO_PI_I * k)
            self._cache[key] = (a, a / (_TWO_PI_I * k))
        return self._cache[key]

    def _primitives(self, rho, y):
        # periodic parts A (first primitive of g - 1) and B (second primitive)
        a, b = self._primitive_coefs(rho)
        return 2.0 * fourier_sum(a, y).real, 2.0 * fourier_sum(b, y).real

    def _uniform_table(self, rho):
        key = ("table", rho)
        if key not in self._cache:
            N = self.quad_nodes
            self._cache[key] = self._primitives(rho, np.arange(N) / N)
        return self._cache[key]

    def _primitives_at(self, rho, pts):
        out_a = np.empty(len(pts))
        out_b = np.empty(len(pts))
        todo = []
        for i, y in enumerate(pts):
            hit = self._cache.get(("pt", rho, y))
            if hit is None:
                todo.append(i)
            else:
                out_a[i], out_b[i] = hit
        if todo:
            ya = np.array([pts[i] for i in todo])
            A, B = self._primitives(rho, ya)
            for j, i in enumerate(todo):
                out_a[i], out_b[i] = A[j], B[j]
                self._cache[("pt", rho, pts[i])] = (A[j], B[j])
        return out_a, out_b

    def c_rho(self, s, t, rho):
        """``E f_s(U) f_t(U + S_rho x)`` by product-trapezoid quadrature.

        The nodes are ``j / quad_nodes`` together with the kinks of
        ``overlap(s, t, .)``.  Between consecutive nodes the overlap is
        linear and is integrated exactly against the truncated density
        through its first and second primitives, so the rule carries no
        discretisation error beyond the Fourier truncation.
        """
        _check_level("s", s)
        _check_level("t", t)
        if rho < 1 or int(rho) != rho:
            raise DomainError("rho must be a positive integer")
        rho = int(rho)
        if s in (0.0, 1.0) or t in (0.0, 1.0) or self.spec.is_uniform:
            return 0.0
        if self.term_bound(s, t, rho) < self.term_tol:
            return 0.0
        N = self.quad_nodes
        Au, Bu = self._uniform_table(rho)
        extra = sorted(y for y in _kinks(s, t) if y * N != math.floor(y * N))
        Ae, Be = self._primitives_at(rho, extra)
        y = np.concatenate([np.arange(N) / N, extra, [1.0]])
        A = np.concatenate([Au, Ae, Au[:1]])
        B = np.concatenate([Bu, Be, Bu[:1]])
        order = np.argsort(y, kind="stable")
        y, A, B = y[order], A[order], B[order]
        A0, B0 = Au[0], Bu[0]
        P = y + (A - A0)
        Q = 0.5 * y * y + (B - B0) - A0 * y
        o = _overlap(s, t, y)
        h = np.diff(y)
        slope = np.diff(o) / h
        panels = o[:-1] * np.diff(P) + slope * (h * P[1:] - np.diff(Q))
        return math.fsum(panels) - s * t

    def gamma(self, s, t):
        _check_level("s", s)
        _check_level("t", t)
        terms = []
        for rho in range(1, self.series_length + 1):
            terms.append(self.c_rho(s, t, rho))
            terms.append(self.c_rho(t, s, rho))
        return min(s, t) - s * t + math.fsum(terms)

    def a_functional(self, a):
        _check_level("a", a)
        terms = [self.c_rho(a, a, rho) for rho in range(1, self.series_length + 1)]
        return a * (1.0 - a) + 2.0 * math.fsum(terms)

    def gamma_matrix(self, points):
        """``Gamma`` on all pairs of ``points`` in one vectorised pass.

        Uses the Fourier form of the same truncated integral,
        ``c_rho(s, t) = 2 Re sum_{k=1}^{K_rho} conj(h_s(k)) h_t(k) psi_k``
        with ``h_a(k) = (1 - exp(-2 pi i k a)) / (2 pi i k)``, and the same
        truncation and short-circuit rules as :meth:`c_rho`.
        """
        z = np.asarray(points, dtype=float)
        if z.ndim != 1:
            raise DomainError("points must be one-dimensional")
        if np.any((z < 0.0) | (z > 1.0)):
            raise DomainError("points must lie in [0, 1]")
        m = z.shape[0]
        base = np.minimum.outer(z, z) - np.multiply.outer(z, z)
        R = self.series_length
        if R == 0 or m == 0:
            return base
        Ks = [self.kmax(rho) for rho in range(1, R + 1)]
        C = np.zeros((R, m, m))
        chunk = max(1024, (1 << 22) // max(m, 1))
        for start in range(0, max(Ks), chunk):
            k = np.arange(start + 1, min(max(Ks), start + chunk) + 1)
            H = (1.0 - np.exp(-_TWO_PI_I * np.mod(np.multiply.outer(k, z), 1.0))) \
                / (_TWO_PI_I * k)[:, None]
            phi = self.spec.coeff(k)
            psi = np.ones_like(phi)
            for r in range(R):
                psi = psi * phi
                n_k = Ks[r] - start
                if n_k <= 0:
                    continue
                Hk = H[:n_k]
                C[r] += 2.0 * (np.conj(Hk).T @ (psi[:n_k, None] * Hk)).real
        sq = np.sqrt(z * (1.0 - z))
        scale = np.multiply.outer(sq, sq)
        edge = (z == 0.0) | (z == 1.0)
        for r in range(R):
            skip = math.exp(-self.decay_rate * (r + 1)) * scale < self.term_tol
            C[r][skip] = 0.0
            C[r][edge, :] = 0.0
            C[r][:, edge] = 0.0
        total = C.sum(axis=0)
        G = base + total + total.T
        return 0.5 * (G + G.T)

    def lemma3_check(self, a):
        """Return ``(A(a), a log(1/a), A(a) / (a log(1/a)))`` for ``0 < a < 1/e``."""
        if not 0.0 < a < math.exp(-1.0):
            raise DomainError("a must lie in (0, 1/e)")
        value = self.a_functional(a)
        bound = a * math.log(1.0 / a)
        return value, bound, value / bound


def c_rho(model, s, t, rho):
    return model.c_rho(s, t, rho)


def gamma(model, s, t):
    """Limiting covariance ``Gamma(s, t)``; symmetric, zero when a level is 0 or 1."""
    return model.gamma(s, t)


def gamma_matrix(model, points):
    return model.gamma_matrix(points)


def a_functional(model, a):
    """Long-run variance ``A`` of the kernel ``f_a``; equals ``gamma(a, a)``."""
    return model.a_functional(a)


def lemma3_check(model, a):
    return model.lemma3_check(a)
