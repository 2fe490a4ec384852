"""Increment laws, walks modulo one and their empirical process.

The walk is ``S_j = X_1 + ... + X_j`` with i.i.d. increments drawn from a
bounded law with bounded density, observed through the fractional parts
``{S_j x}``.  Fractional parts are accumulated in 53-bit fixed point so that
the reduction modulo one is exact and long walks do not drift.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
import math

import numpy as np
from scipy import stats

from .errors import ConfigurationError, DomainError
from .rng import WALK, check_seed, make_stream

__all__ = [
    "IncrementDistribution",
    "WalkConfig",
    "FracSample",
    "density_bound",
    "simulate_walk",
    "map_replicas",
    "kernel",
    "empirical_cdf",
    "empirical_process",
    "sup_statistic",
    "write_sample_csv",
]

KINDS = ("uniform", "triangular", "raised_cosine")

_FIX_BITS = 53
_FIX_SCALE = float(2**_FIX_BITS)
_FIX_MASK = np.uint64(2**_FIX_BITS - 1)


def sinpi(x):
    """``sin(pi x)`` with exact zeros at the integers."""
    x = np.asarray(x, dtype=float)
    k = np.rint(x)
    r = x - k
    sign = np.where(np.fmod(k, 2.0) == 0.0, 1.0, -1.0)
    return sign * np.sin(np.pi * r)


def sincpi(x):
    """Normalised sinc ``sin(pi x) / (pi x)`` with exact zeros at nonzero integers."""
    x = np.asarray(x, dtype=float)
    out = np.ones_like(x)
    nz = x != 0.0
    out[nz] = sinpi(x[nz]) / (np.pi * x[nz])
    return out


def cispi(x):
    """``exp(i pi x)`` after reducing ``x`` modulo 2."""
    x = np.asarray(x, dtype=float)
    r = x - 2.0 * np.rint(0.5 * x)
    return np.exp(1j * np.pi * r)


@dataclass(frozen=True)
class IncrementDistribution:
    """A bounded, absolutely continuous law on ``[a, b]``.

    Parameters
    ----------
    kind : {'uniform', 'triangular', 'raised_cosine'}
        ``triangular`` is the symmetric triangle with its mode at the
        midpoint; ``raised_cosine`` has density
        ``(1 + cos(pi (y - mu) / s)) / (2 s)`` with ``mu`` the midpoint and
        ``s = (b - a) / 2``.
    a, b : float
        Finite support endpoints, ``a < b``.
    """

    kind: str
    a: float
    b: float

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigurationError(
                f"unknown increment law {self.kind!r}; expected one of {KINDS}")
        a, b = float(self.a), float(self.b)
        if not (math.isfinite(a) and math.isfinite(b)) or not a < b:
            raise ConfigurationError(f"need finite a < b, got a={a}, b={b}")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @classmethod
    def uniform(cls, a=0.0, b=1.0):
        return cls("uniform", a, b)

    @classmethod
    def triangular(cls, a=-1.0, b=1.0):
        return cls("triangular", a, b)

    @classmethod
    def raised_cosine(cls, a=-1.0, b=1.0):
        return cls("raised_cosine", a, b)

    @classmethod
    def from_dict(cls, d):
        try:
            return cls(d["kind"], d["a"], d["b"])
        except (KeyError, TypeError) as exc:
            raise ConfigurationError(f"bad distribution spec {d!r}") from exc

    @classmethod
    def parse(cls, text):
        """Parse ``'uniform(0,0.5)'`` or ``'uniform:0:0.5'``."""
        s = text.strip().replace(" ", "")
        try:
            if "(" in s:
                kind, rest = s.split("(", 1)
                a, b = rest.rstrip(")").split(",")
            else:
                kind, a, b = s.split(":")
            return cls(kind, float(a), float(b))
        except ValueError as exc:
            if isinstance(exc, ConfigurationError):
                raise
            raise ConfigurationError(f"cannot parse distribution {text!r}") from exc

    def to_dict(self):
        return {"kind": self.kind, "a": self.a, "b": self.b}

    def __str__(self):
        return f"{self.kind}({self.a!r},{self.b!r})"

    @property
    def width(self):
        return self.b - self.a

    @property
    def mid(self):
        return 0.5 * (self.a + self.b)

    @property
    def density_bound(self):
        if self.kind == "uniform":
            return 1.0 / self.width
        return 2.0 / self.width

    def pdf(self, y):
        y = np.asarray(y, dtype=float)
        s = 0.5 * self.width
        z = (y - self.mid) / s
        inside = np.abs(z) <= 1.0
        if self.kind == "uniform":
            val = np.full_like(z, 1.0 / self.width)
        elif self.kind == "triangular":
            val = (1.0 - np.abs(z)) / s
        else:
            val = (1.0 + np.cos(np.pi * z)) / (2.0 * s)
        return np.where(inside, val, 0.0)

    def cf_cycles(self, nu):
        """Characteristic function at ``theta = 2 pi nu``."""
        nu = np.asarray(nu, dtype=float)
        w = nu * self.width
        phase = cispi(2.0 * self.mid * nu)
        if self.kind == "uniform":
            mod = sincpi(w)
        elif self.kind == "triangular":
            mod = sincpi(0.5 * w) ** 2
        else:
            # near |w| = 1 both sinpi and 1 - w^2 are computed from the exact
            # difference |w| - 1, so only the point itself needs the limit
            mod = np.full_like(w, 0.5)
            ok = np.abs(w) != 1.0
            ww = w[ok]
            mod[ok] = sincpi(ww) / ((1.0 - ww) * (1.0 + ww))
        return phase * mod

    def char_fn(self, theta):
        """``E exp(i theta X)`` in closed form."""
        return self.cf_cycles(np.asarray(theta, dtype=float) / (2.0 * np.pi))

    def envelope(self):
        """Constants ``(C, p, nu0)`` with ``|cf_cycles(nu)| <= C |nu|^-p`` for ``|nu| >= nu0``."""
        w = self.width
        if self.kind == "uniform":
            return 1.0 / (np.pi * w), 1, 0.0
        if self.kind == "triangular":
            return (2.0 / (np.pi * w)) ** 2, 2, 0.0
        return 4.0 / (3.0 * np.pi * w**3), 3, 2.0 / w

    def ppf(self, u):
        u = np.asarray(u, dtype=float)
        if self.kind == "uniform":
            return self.a + self.width * u
        if self.kind == "triangular":
            lo = self.a + self.width * np.sqrt(0.5 * u)
            hi = self.b - self.width * np.sqrt(0.5 * (1.0 - u))
            return np.where(u < 0.5, lo, hi)
        # scipy's cosine law is the raised cosine on [-pi, pi]
        return self.mid + 0.5 * self.width * stats.cosine.ppf(u) / np.pi

    def sample(self, rng, size):
        return self.ppf(rng.random(size))


def density_bound(dist):
    """Supremum of the increment density."""
    return dist.density_bound


@dataclass(frozen=True)
class WalkConfig:
    dist: IncrementDistribution
    x: float
    n: int
    seed: int = 0

    def __post_init__(self):
        if not isinstance(self.dist, IncrementDistribution):
            raise ConfigurationError("dist must be an IncrementDistribution")
        x = float(self.x)
        if x == 0.0 or not math.isfinite(x):
            raise ConfigurationError("the multiplier x must be finite and nonzero")
        if isinstance(self.n, bool) or int(self.n) != self.n or self.n < 1:
            raise ConfigurationError(f"n must be a positive integer, got {self.n!r}")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "seed", check_seed(self.seed))

    def replace(self, **changes):
        fields = {"dist": self.dist, "x": self.x, "n": self.n, "seed": self.seed}
        fields.update(changes)
        return WalkConfig(**fields)


@dataclass(frozen=True, eq=False)
class FracSample:
    """Realised fractional parts ``{S_1 x}, ..., {S_n x}``."""

    values: np.ndarray
    config: WalkConfig
    replica: "int | None" = None

    def __len__(self):
        return self.values.shape[0]

    @property
    def n(self):
        return self.values.shape[0]


def _frac_walk(dist, x, n, rng):
    inc = np.mod(dist.sample(rng, n) * x, 1.0)
    # floor(1.0 * 2^53) & mask == 0 handles the mod(-tiny, 1) == 1.0 case
    q = np.floor(inc * _FIX_SCALE).astype(np.uint64) & _FIX_MASK
    acc = np.cumsum(q, dtype=np.uint64) & _FIX_MASK
    return acc.astype(np.float64) / _FIX_SCALE


def simulate_walk(config, replica=None):
    """Simulate ``{S_j x}`` for ``j = 1..n``.

    Parameters
    ----------
    config : WalkConfig
    replica : int, optional
        Replica index.  ``None`` draws from the stream keyed by the seed
        alone; an integer ``r`` draws from the independent substream
        ``(seed, WALK, r)``.

    Returns
    -------
    FracSample
        Values in ``[0, 1)``.  Each increment ``{X_i x}`` is rounded once to
        53-bit fixed point and the partial sums are then exact modulo one, so
        the absolute error after ``j`` steps is at most ``j * 2**-53``.
    """
    if replica is None:
        rng = make_stream(config.seed)
    else:
        rng = make_stream(config.seed, WALK, replica)
    values = _frac_walk(config.dist, config.x, config.n, rng)
    return FracSample(values, config, replica)


def map_replicas(config, replicas, func, threads=1):
    """Apply ``func(sample)`` to replicas ``0..replicas-1``; results in replica order."""
    def job(r):
        return func(simulate_walk(config, replica=r))

    if threads is None or threads <= 1:
        return [job(r) for r in range(replicas)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(job, range(replicas)))


def kernel(v, a):
    """Centered indicator ``f_a(v) = I{v <= a} - a`` on fractional parts."""
    v = np.asarray(v, dtype=float)
    return (v <= a).astype(float) - a


def _values(sample):
    if isinstance(sample, FracSample):
        return sample.values
    return np.asarray(sample, dtype=float)


def empirical_cdf(sample, s):
    """Fraction of sample values ``<= s``."""
    if not 0.0 <= s <= 1.0:
        raise DomainError(f"s must lie in [0, 1], got {s}")
    v = _values(sample)
    return np.count_nonzero(v <= s) / v.shape[0]


def empirical_process(sample, grid):
    """``sqrt(n) (F_n(z) - z)`` at each point of a sorted grid.

    One sort of the sample plus a binary search per grid point.
    """
    z = np.asarray(grid, dtype=float)
    if z.ndim != 1:
        raise DomainError("grid must be one-dimensional")
    if z.size and (z[0] < 0.0 or z[-1] > 1.0):
        raise DomainError("grid points must lie in [0, 1]")
    if np.any(np.diff(z) < 0):
        raise DomainError("grid must be sorted")
    v = np.sort(_values(sample))
    n = v.shape[0]
    counts = np.searchsorted(v, z, side="right")
    return math.sqrt(n) * (counts / n - z)


def sup_statistic(values):
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        raise DomainError("sup_statistic needs a nonempty vector")
    return float(np.max(np.abs(values)))


def write_sample_csv(sample, fh):
    """Write ``index,frac_value`` rows with 17 significant digits."""
    fh.write("index,frac_value\n")
    for j, v in enumerate(_values(sample), start=1):
        fh.write(f"{j},{v:.17g}\n")
