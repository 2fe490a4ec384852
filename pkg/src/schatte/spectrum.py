"""Fourier description of the wrapped walk ``{S_rho x}``.

With ``phi`` the characteristic function of one increment, the ``k``-th
Fourier coefficient of the law of ``{S_rho x}`` on the circle is
``psi_k = E exp(2 pi i k S_rho x) = phi(2 pi k x) ** rho``.  The largest
nonzero-frequency modulus ``max_k |phi(2 pi k x)|`` is the one-step
contraction factor; ``lambda = -log`` of it is the exponential rate at which
the wrapped law approaches the uniform one.
"""
from dataclasses import dataclass
from functools import cached_property
import math
import warnings

import numpy as np

from .errors import ConfigurationError, DomainError, NonMixingConfiguration
from .walk import IncrementDistribution

__all__ = [
    "WrappedSpectrum",
    "char_fn",
    "decay_rate",
    "wrapped_density",
    "fourier_sum",
    "KMAX_CAP",
]

KMAX_CAP = 10**6
SCAN = 10**4
ADMISSIBILITY_GAP = 1e-12
_CHUNK = 1 << 15


def char_fn(dist, theta):
    """Characteristic function ``E exp(i theta X)`` of an increment law."""
    return dist.char_fn(theta)


def fourier_sum(coefs, u):
    """Evaluate ``sum_{k=1}^{K} coefs[k-1] * exp(2 pi i k u)``.

    When ``u`` is exactly the uniform grid ``j / N`` the coefficients are
    folded modulo ``N`` and summed with one inverse FFT, otherwise the series
    is summed directly in chunks.
    """
    coefs = np.asarray(coefs, dtype=complex)
    u = np.asarray(u, dtype=float)
    shape = u.shape
    u = u.ravel()
    K = coefs.shape[0]
    if K == 0:
        return np.zeros(shape, dtype=complex)
    N = u.shape[0]
    if N > 1 and np.array_equal(u, np.arange(N) / N):
        k = np.arange(1, K + 1)
        folded = (np.bincount(k % N, weights=coefs.real, minlength=N)
                  + 1j * np.bincount(k % N, weights=coefs.imag, minlength=N))
        return (N * np.fft.ifft(folded)).reshape(shape)
    out = np.zeros(N, dtype=complex)
    step = max(1, _CHUNK * 64 // max(N, 1))
    for start in range(0, K, step):
        k = np.arange(start + 1, min(K, start + step) + 1)
        # k*u reduced mod 1 before the exponential keeps the phase accurate
        ph = np.mod(np.multiply.outer(u, k), 1.0)
        out += np.exp(2j * np.pi * ph) @ coefs[start:start + k.shape[0]]
    return out.reshape(shape)


@dataclass(frozen=True, eq=False)
class WrappedSpectrum:
    """Spectrum of ``{S_rho x}`` for an increment law and multiplier ``x``.

    Construction rejects configurations without a spectral gap: if any
    ``|phi(2 pi k x)|`` with ``1 <= k <= 10**4`` reaches ``1 - 1e-12`` a
    :class:`NonMixingConfiguration` is raised.
    """

    dist: IncrementDistribution
    x: float

    def __post_init__(self):
        x = float(self.x)
        if x == 0.0 or not math.isfinite(x):
            raise ConfigurationError("the multiplier x must be finite and nonzero")
        object.__setattr__(self, "x", x)
        mods = np.abs(self.coeff(np.arange(1, SCAN + 1)))
        k = int(np.argmax(mods))
        if mods[k] >= 1.0 - ADMISSIBILITY_GAP:
            raise NonMixingConfiguration(
                f"|phi(2 pi k x)| = {mods[k]!r} at k = {k + 1}: no spectral gap "
                f"for {self.dist} with x = {x!r}")
        object.__setattr__(self, "_scan_max", float(mods[k]))

    def coeff(self, k, rho=1):
        """``phi(2 pi k x) ** rho`` for integer ``k`` (array friendly)."""
        k = np.asarray(k)
        c = self.dist.cf_cycles(k * self.x)
        return c if rho == 1 else c**rho

    def envelope(self, k):
        """Upper bound on ``|coeff(k, 1)|``, valid for ``k >= self.envelope_start``."""
        C, p, _ = self.dist.envelope()
        return C * (np.abs(np.asarray(k, dtype=float)) * abs(self.x)) ** (-p)

    @cached_property
    def envelope_start(self):
        _, _, nu0 = self.dist.envelope()
        return max(1, math.ceil(nu0 / abs(self.x)))

    @cached_property
    def sup_modulus(self):
        """``max_{k != 0} |coeff(k, 1)|``, certified by the decay envelope."""
        best = self._scan_max
        end = SCAN
        while end < KMAX_CAP and (end < self.envelope_start or self.envelope(end) > best):
            nxt = min(KMAX_CAP, 2 * end)
            best = max(best, float(np.max(np.abs(self.coeff(np.arange(end + 1, nxt + 1))))))
            end = nxt
        if best >= 1.0 - ADMISSIBILITY_GAP:
            raise NonMixingConfiguration("no spectral gap")
        return best

    @cached_property
    def decay_rate(self):
        s = self.sup_modulus
        return math.inf if s == 0.0 else -math.log(s)

    @property
    def is_uniform(self):
        """True when every nonzero coefficient vanishes (``{S_rho x}`` exactly uniform)."""
        return self.sup_modulus == 0.0

    def tail_bound(self, K, rho=1, q=0):
        """Bound on ``sum_{k > K} |coeff(k, 1)|**rho * k**-q`` (``inf`` if divergent)."""
        if self.is_uniform:
            return 0.0
        if K < self.envelope_start:
            return math.inf
        C, p, _ = self.dist.envelope()
        e = p * rho + q
        if e <= 1:
            return math.inf
        return C**rho * abs(self.x) ** (-p * rho) * K ** (1.0 - e) / (e - 1.0)

    def kmax(self, tol, rho=1, q=0, factor=2.0):
        """Smallest ``K`` with ``factor * tail_bound(K, rho, q) < tol``, capped at ``10**6``."""
        if tol <= 0:
            raise DomainError("tol must be positive")
        if self.is_uniform:
            return 0
        C, p, _ = self.dist.envelope()
        e = p * rho + q
        if e <= 1:
            return KMAX_CAP
        # closed-form solve of factor * C^rho |x|^-p rho K^(1-e) / (e-1) = tol
        log_k = (math.log(factor) + rho * math.log(C) - p * rho * math.log(abs(self.x))
                 - math.log(e - 1.0) - math.log(tol)) / (e - 1.0)
        K = self.envelope_start if log_k < 0 else math.ceil(math.exp(min(log_k, 50.0)))
        K = max(K, self.envelope_start)
        while K < KMAX_CAP and factor * self.tail_bound(K, rho, q) >= tol:
            K = math.ceil(K * 1.1) + 1
        return min(K, KMAX_CAP)

    def coefficient_l1(self, rho, tol=1e-12):
        """``sum_{k != 0} |coeff(k, rho)|``, with a certified tail (``inf`` if divergent)."""
        if self.is_uniform:
            return 0.0
        K = self.kmax(tol, rho)
        tail = self.tail_bound(K, rho)
        if not math.isfinite(tail):
            return math.inf
        head = math.fsum(np.abs(self.coeff(np.arange(1, K + 1), rho)))
        return 2.0 * (head + tail)


def decay_rate(spec):
    """Exponential mixing rate ``lambda = -log max_{k != 0} |phi(2 pi k x)|``.

    Returns ``math.inf`` when every nonzero coefficient vanishes.
    """
    return spec.decay_rate


def wrapped_density(spec, rho, u, tol=1e-10, full_output=False):
    """Density of ``{S_rho x}`` from its truncated Fourier series.

    Parameters
    ----------
    spec : WrappedSpectrum
    rho : int
        Number of steps, ``rho >= 1``.
    u : float or array_like
        Points in ``[0, 1)``.
    tol : float
        Target for the discarded tail ``2 sum_{k > K} |coeff(k, 1)|**rho``.
        For laws whose coefficients are not summable at this ``rho`` the
        truncation stops at ``K = 10**6``.
    full_output : bool
        If true also return a dict with ``kmax``, ``tail_bound``, ``clip``
        (largest negative excursion removed by clipping at zero) and
        ``clipped_mass`` (only for the full grid ``u = j / N``; the values are
        renormalised when it exceeds ``tol``).

    Returns
    -------
    values : float or ndarray
    info : dict, only if ``full_output``
    """
    if rho < 1 or int(rho) != rho:
        raise DomainError("rho must be a positive integer")
    rho = int(rho)
    scalar = np.ndim(u) == 0
    u = np.atleast_1d(np.asarray(u, dtype=float))
    K = spec.kmax(tol, rho)
    tail = 2.0 * spec.tail_bound(K, rho)
    # density coefficient of exp(2 pi i k u) is E exp(-2 pi i k Y) = conj(psi_k)
    c = np.conj(spec.coeff(np.arange(1, K + 1), rho))
    g = 1.0 + 2.0 * fourier_sum(c, u).real
    clip = float(max(0.0, -g.min())) if g.size else 0.0
    if clip > tol and math.isfinite(tail):
        warnings.warn(f"truncated density dips to {-clip:.3g} below zero "
                      f"(rho={rho}, K={K})", RuntimeWarning, stacklevel=2)
    clipped = np.maximum(g, 0.0)
    clipped_mass = None
    N = u.shape[0]
    if N > 1 and np.array_equal(u, np.arange(N) / N):
        # full periodic grid: the trapezoid mass of the clipped part is known
        clipped_mass = float(np.mean(clipped - g))
        if clipped_mass > tol:
            clipped = clipped / np.mean(clipped)
    g = clipped
    out = float(g[0]) if scalar else g
    if full_output:
        return out, {"kmax": K, "tail_bound": tail, "clip": clip,
                     "clipped_mass": clipped_mass}
    return out
