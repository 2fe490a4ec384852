"""Gaussian processes on the discretisation grid ``z_j = j n**-epsilon``."""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import cached_property
import math

import numpy as np
from scipy.linalg import lapack

from .errors import ConfigurationError, DomainError, PSDRepairError
from .rng import GAUSS, make_stream

__all__ = [
    "Grid",
    "GaussianSampler",
    "build_grid",
    "closed_grid",
    "assemble_covariance",
    "psd_repair",
    "pivoted_cholesky",
    "sample_paths",
    "sup_abs",
]

PSD_TOL = 1e-8
ROW_CHUNK = 4096


@dataclass(frozen=True)
class Grid:
    """Points ``j * delta`` for ``0 <= j <= r``, ``r`` the largest with ``r delta <= 1``."""

    delta: float
    r: int
    n: "int | None" = None
    epsilon: "float | None" = None

    @cached_property
    def points(self):
        pts = np.arange(self.r + 1) * self.delta
        pts.setflags(write=False)
        return pts

    def __len__(self):
        return self.r + 1


def build_grid(n, epsilon):
    if isinstance(n, bool) or int(n) != n or n < 2:
        raise ConfigurationError("n must be an integer >= 2")
    if not 0.0 < epsilon < 1.0:
        raise ConfigurationError("epsilon must lie in (0, 1)")
    delta = float(n) ** (-epsilon)
    r = math.floor(1.0 / delta)
    while (r + 1) * delta <= 1.0:
        r += 1
    while r * delta > 1.0:
        r -= 1
    return Grid(delta, r, int(n), float(epsilon))


def closed_grid(step):
    """Grid with spacing ``step`` on ``[0, 1]`` (``1 / step`` should be an integer)."""
    if not 0.0 < step <= 1.0:
        raise ConfigurationError("grid step must lie in (0, 1]")
    r = round(1.0 / step)
    if abs(r * step - 1.0) > 1e-9:
        raise ConfigurationError("1 / step must be an integer")
    return Grid(1.0 / r, r)


def assemble_covariance(model, grid):
    """``Gamma(z_i, z_j)`` on every pair of grid points."""
    pts = grid.points if isinstance(grid, Grid) else np.asarray(grid, dtype=float)
    return model.gamma_matrix(pts)


def psd_repair(matrix, psd_tol=PSD_TOL):
    """Clip negative eigenvalues of a symmetric matrix.

    Eigenvalues within roundoff of zero are left alone, in which case the
    input is returned unchanged.

    Returns
    -------
    repaired : ndarray
    magnitude : float
        Max-norm change made to the matrix.

    Raises
    ------
    PSDRepairError
        If the change exceeds ``psd_tol * trace``.
    """
    a = np.asarray(matrix, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DomainError("expected a square matrix")
    if a.size == 0:
        return a.copy(), 0.0
    a = 0.5 * (a + a.T)
    w, v = np.linalg.eigh(a)
    noise = 64 * np.finfo(float).eps * max(1.0, float(np.max(np.abs(w))))
    if w.min() >= -noise:
        return a, 0.0
    fixed = (v * np.maximum(w, 0.0)) @ v.T
    fixed = 0.5 * (fixed + fixed.T)
    magnitude = float(np.max(np.abs(fixed - a)))
    limit = psd_tol * max(float(np.trace(a)), 0.0)
    if magnitude > limit:
        raise PSDRepairError(f"PSD repair of size {magnitude:.3g} exceeds {limit:.3g} "
                             f"(min eigenvalue {w.min():.3g})")
    return fixed, magnitude


def pivoted_cholesky(matrix, tol=-1.0):
    """Factor ``F`` with ``F @ F.T == matrix`` for a PSD, possibly singular matrix.

    LAPACK ``dpstrf`` with diagonal pivoting; ``F`` is the lower factor with
    its rows restored to the original order, truncated to the numerical rank.
    """
    a = np.array(matrix, dtype=float, order="F")
    m = a.shape[0]
    if m == 0 or not np.any(np.diag(a) > 0):
        return np.zeros((m, 0))
    c, piv, rank, info = lapack.dpstrf(a, tol=tol, lower=1)
    if info < 0:
        raise DomainError(f"dpstrf failed (info={info})")
    L = np.tril(c)[:, :rank]
    F = np.zeros((m, rank))
    F[piv - 1] = L
    # exactly-zero variances keep exactly-zero rows
    F[np.diag(matrix) == 0.0] = 0.0
    return F


@dataclass(frozen=True, eq=False)
class GaussianSampler:
    """Mean-zero Gaussian vector with a (repaired) covariance matrix."""

    points: np.ndarray
    matrix: np.ndarray
    factor: np.ndarray
    repair_magnitude: float

    @classmethod
    def from_matrix(cls, matrix, points=None, psd_tol=PSD_TOL):
        matrix = np.asarray(matrix, dtype=float)
        repaired, mag = psd_repair(matrix, psd_tol)
        if points is None:
            points = np.arange(matrix.shape[0], dtype=float)
        return cls(np.asarray(points, dtype=float), repaired, pivoted_cholesky(repaired), mag)

    @classmethod
    def from_model(cls, model, grid, psd_tol=PSD_TOL, scale=1.0):
        pts = grid.points if isinstance(grid, Grid) else np.asarray(grid, dtype=float)
        return cls.from_matrix(scale * assemble_covariance(model, pts), pts, psd_tol)

    @property
    def rank(self):
        return self.factor.shape[1]


def sample_paths(sampler, count, seed, threads=1):
    """Draw ``count`` paths as rows ``factor @ g`` with ``g`` standard normal.

    Rows are produced in chunks of 4096, chunk ``c`` drawing from the
    substream ``(seed, GAUSS, c)``, so the output does not depend on
    ``threads``.
    """
    if count < 1:
        raise DomainError("count must be >= 1")
    F = sampler.factor
    m, rank = F.shape

    def chunk(c):
        rows = min(ROW_CHUNK, count - c * ROW_CHUNK)
        if rank == 0:
            return np.zeros((rows, m))
        g = make_stream(seed, GAUSS, c).standard_normal((rows, rank))
        return g @ F.T

    n_chunks = -(-count // ROW_CHUNK)
    if threads is None or threads <= 1:
        parts = [chunk(c) for c in range(n_chunks)]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(chunk, range(n_chunks)))
    return np.vstack(parts)


def sup_abs(paths):
    """Per-row ``max |path|``."""
    paths = np.atleast_2d(np.asarray(paths, dtype=float))
    if paths.shape[1] == 0:
        return np.zeros(paths.shape[0])
    return np.max(np.abs(paths), axis=1)
