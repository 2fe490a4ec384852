"""Independent reference implementations used as test oracles.

Each one is deliberately naive or uses a different formula from the
package code it checks.
"""
import math

import numpy as np


def brute_ecdf(values, s):
    return sum(1 for v in values if v <= s) / len(values)


def riemann_overlap(s, t, y, points=10**6):
    # midpoint rule for |{u in [0, s] : {u + y} <= t}|
    u = (np.arange(points) + 0.5) / points * s
    return s * np.mean(np.mod(u + y, 1.0) <= t)


def mc_c_rho(dist, x, s, t, rho, draws, seed=12345, chunk=10**6):
    """Monte Carlo ``E f_s(U) f_t({U + S_rho x})``; returns ``(mean, se)``."""
    rng = np.random.default_rng(seed)
    total, total2, done = 0.0, 0.0, 0
    while done < draws:
        m = min(chunk, draws - done)
        u = rng.random(m)
        steps = dist.ppf(rng.random((rho, m))).sum(axis=0)
        y = np.mod(u + steps * x, 1.0)
        prod = ((u <= s) - s) * ((y <= t) - t)
        total += prod.sum()
        total2 += (prod * prod).sum()
        done += m
    mean = total / draws
    var = total2 / draws - mean * mean
    return mean, math.sqrt(var / draws)


def _h(a, m):
    return (1.0 - np.exp(-2j * np.pi * m * a)) / (2j * np.pi * m)


def geometric_gamma(dist, x, s, t, K=200000):
    """``Gamma`` from the closed geometric sum ``sum_rho psi^rho = phi / (1 - phi)``.

    No series in rho and no quadrature, only a Fourier sum in ``m``.
    """
    m = np.arange(1, K + 1, dtype=float)
    phi = dist.char_fn(2 * np.pi * m * x)
    w = phi / (1.0 - phi)

    def half(a, b):
        return 2.0 * np.sum((np.conj(_h(a, m)) * _h(b, m) * w).real)

    return min(s, t) - s * t + half(s, t) + half(t, s)


def direct_modulus(dist, theta):
    """``|E exp(i theta X)|`` by adaptive quadrature of the density."""
    from scipy import integrate

    re = integrate.quad(lambda y: dist.pdf(y) * math.cos(theta * y), dist.a, dist.b,
                        limit=200)[0]
    im = integrate.quad(lambda y: dist.pdf(y) * math.sin(theta * y), dist.a, dist.b,
                        limit=200)[0]
    return math.hypot(re, im)


def exhaustive_exponent_scan(resolution):
    """Best gamma over the full 4-D grid, every constraint tested literally."""
    i = np.arange(1, resolution + 1)
    A = i / 7 / resolution
    B = i / 7 / resolution
    G = i / 14 / resolution
    E = i / 5 / resolution
    a, b, g, e = np.meshgrid(A, B, G, E, indexing="ij", sparse=True)
    tol = 1e-12
    ok = ((0.5 - g) - (2.5 * e + a) > tol) & (a - b > tol) & ((a - b) - 2 * g > tol) \
        & (0.5 - (a + g) > tol) & (e / 2 - g > tol) & (e - a > tol)
    ok = np.broadcast_to(ok, (resolution,) * 4)
    gg = np.broadcast_to(g, ok.shape)
    return float(gg[ok].max()) if ok.any() else 0.0


def kolmogorov_sf_series(x, terms=100):
    k = np.arange(1, terms + 1)
    return float(2 * np.sum((-1.0) ** (k - 1) * np.exp(-2 * k * k * x * x)))


def brownian_bridge(points):
    z = np.asarray(points, dtype=float)
    return np.minimum.outer(z, z) - np.multiply.outer(z, z)
