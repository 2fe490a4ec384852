"""Long/short block partition of ``{1, ..., n}`` and block sums of ``f_t``.

Indices are laid out ``I_1, J_1, I_2, J_2, ..., I_l, J_l, tail`` with
``|I_k| = floor(n**alpha)`` and ``|J_k| = floor(n**beta)``.  Block sums are
taken without small decoupling shifts between blocks: those would be
bounded by ``C exp(-lambda |J_k|)``, far below double precision for the
sizes used here, so independence of the long blocks is checked statistically
instead (:func:`block_correlation`).
"""
from dataclasses import dataclass
import math

import numpy as np

from .errors import ConfigurationError, DomainError
from .walk import FracSample, map_replicas

__all__ = [
    "BlockingPlan",
    "VarianceProfile",
    "build_plan",
    "block_sums",
    "block_sums_streaming",
    "variance_profile",
    "block_correlation",
    "jackknife_se",
]


def _floor_pow(n, e):
    v = n**e
    k = math.floor(v)
    # guard against n**e landing just below an exact integer
    if k + 1 - v < 1e-9 * v:
        k += 1
    return int(k)


@dataclass(frozen=True)
class BlockingPlan:
    n: int
    alpha: float
    beta: float
    long_len: int
    short_len: int
    ell: int

    @property
    def pair_len(self):
        return self.long_len + self.short_len

    def m(self, k):
        """``m_k = k (|I| + |J|)``: number of indices before ``I_{k+1}``."""
        return k * self.pair_len

    def long_block(self, k):
        """``I_k`` as a 1-based ``range`` (``1 <= k <= ell``)."""
        start = self.m(k - 1) + 1
        return range(start, start + self.long_len)

    def short_block(self, k):
        start = self.m(k - 1) + self.long_len + 1
        return range(start, start + self.short_len)

    @property
    def tail(self):
        return range(self.m(self.ell) + 1, self.n + 1)

    def blocks(self):
        """All ranges in layout order, the tail last."""
        out = []
        for k in range(1, self.ell + 1):
            out.append(self.long_block(k))
            out.append(self.short_block(k))
        out.append(self.tail)
        return out


def build_plan(n, alpha, beta):
    """Partition ``{1..n}`` into ``l = floor(n / (|I| + |J|))`` long/short pairs.

    ``beta == alpha`` is accepted (equal block lengths); ``beta > alpha`` is
    not.
    """
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise ConfigurationError("n must be a positive integer")
    n = int(n)
    if not (0.0 < beta <= alpha < 1.0):
        raise ConfigurationError(f"need 0 < beta <= alpha < 1, got alpha={alpha}, beta={beta}")
    L = _floor_pow(n, alpha)
    S = _floor_pow(n, beta)
    if n < L + S:
        raise ConfigurationError(f"n={n} is too small for one block pair ({L}+{S})")
    return BlockingPlan(n, float(alpha), float(beta), L, S, n // (L + S))


def _vals(sample):
    return sample.values if isinstance(sample, FracSample) else np.asarray(sample, float)


def block_sums(sample, plan, t):
    """Sums of ``f_t`` over each long and each short block.

    Returns
    -------
    long, short : ndarray of shape (ell,)
        ``long[k-1] = sum_{j in I_k} (I{v_j <= t} - t)``, computed as the
        integer count minus ``t |I_k|``.
    """
    v = _vals(sample)
    if v.shape[0] != plan.n:
        raise DomainError(f"sample has length {v.shape[0]}, plan expects {plan.n}")
    if not 0.0 <= t <= 1.0:
        raise DomainError("t must lie in [0, 1]")
    L, S, ell = plan.long_len, plan.short_len, plan.ell
    hits = (v[:ell * (L + S)] <= t).reshape(ell, L + S)
    long = np.count_nonzero(hits[:, :L], axis=1) - t * L
    short = np.count_nonzero(hits[:, L:], axis=1) - t * S
    return long, short


def block_sums_streaming(sample, plan, t):
    """Single pass over the sample, walking the block layout index by index."""
    v = _vals(sample)
    if v.shape[0] != plan.n:
        raise DomainError(f"sample has length {v.shape[0]}, plan expects {plan.n}")
    long = np.zeros(plan.ell)
    short = np.zeros(plan.ell)
    L, P = plan.long_len, plan.pair_len
    counts_l = [0] * plan.ell
    counts_s = [0] * plan.ell
    for j in range(plan.ell * P):
        k, pos = divmod(j, P)
        if v[j] <= t:
            if pos < L:
                counts_l[k] += 1
            else:
                counts_s[k] += 1
    for k in range(plan.ell):
        long[k] = counts_l[k] - t * plan.long_len
        short[k] = counts_s[k] - t * plan.short_len
    return long, short


def jackknife_se(x, stat):
    """Delete-one jackknife standard error of ``stat`` over the rows of ``x``.

    ``stat`` maps an array of shape (R-1, ...) to a scalar.
    """
    x = np.asarray(x)
    R = x.shape[0]
    loo = np.array([stat(np.delete(x, i, axis=0)) for i in range(R)])
    return math.sqrt((R - 1) / R * np.sum((loo - loo.mean()) ** 2))


def _loo_sum_of_variances(x):
    # leave-one-out values of sum_k Var(x[:, k]) in O(R * l)
    R = x.shape[0]
    s1 = x.sum(axis=0)
    s2 = (x * x).sum(axis=0)
    s1_i = s1 - x
    s2_i = s2 - x * x
    var_i = (s2_i - s1_i**2 / (R - 1)) / (R - 2)
    return var_i.sum(axis=1)


def _sum_var_and_se(x):
    R = x.shape[0]
    total = float(np.var(x, axis=0, ddof=1).sum())
    if R < 3:
        return total, math.inf
    loo = _loo_sum_of_variances(x)
    se = math.sqrt((R - 1) / R * np.sum((loo - loo.mean()) ** 2))
    return total, float(se)


@dataclass(frozen=True)
class VarianceProfile:
    sum_var_long: float
    sum_var_short: float
    se: float
    se_short: float
    replicas: int

    def __iter__(self):
        return iter((self.sum_var_long, self.sum_var_short, self.se))


def _replica_sums(config, plan, t, replicas, threads):
    if config.n != plan.n:
        raise DomainError(f"plan is for n={plan.n}, walk has n={config.n}")
    res = map_replicas(config, replicas, lambda smp: block_sums(smp, plan, t), threads)
    long = np.array([r[0] for r in res]).reshape(replicas, plan.ell)
    short = np.array([r[1] for r in res]).reshape(replicas, plan.ell)
    return long, short


def variance_profile(config, plan, t, replicas, threads=1):
    """Monte Carlo ``sum_k Var(T_k)`` and ``sum_k Var(T*_k)`` over walk replicas.

    Variances are unbiased sample variances across independent replicas;
    standard errors are delete-one jackknife.
    """
    if replicas < 2:
        raise ConfigurationError("variance_profile needs at least 2 replicas")
    long, short = _replica_sums(config, plan, t, replicas, threads)
    svl, se_l = _sum_var_and_se(long)
    svs, se_s = _sum_var_and_se(short)
    return VarianceProfile(svl, svs, se_l, se_s, replicas)


def block_correlation(config, plan, t, replicas, threads=1):
    """Lag-one correlations ``corr(T_k, T_{k+1})`` of successive long-block sums.

    Entries are ``nan`` where a block sum has zero variance.
    """
    if replicas < 2:
        raise ConfigurationError("block_correlation needs at least 2 replicas")
    long, _ = _replica_sums(config, plan, t, replicas, threads)
    out = np.empty(plan.ell - 1)
    for k in range(plan.ell - 1):
        a, b = long[:, k], long[:, k + 1]
        sa, sb = a.std(), b.std()
        if sa == 0.0 or sb == 0.0:
            out[k] = np.nan
        else:
            out[k] = float(np.mean((a - a.mean()) * (b - b.mean())) / (sa * sb))
    return out
