"""Root finding: polynomial roots, root cancellation, bracketing, Newton."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional

import numpy as np
from scipy.spatial import cKDTree

from ._aberth import aberth_iterate
from .discretize import Signal, eval_monodromy_with_derivative
from .poly import ScaledPolynomial

__all__ = [
    "RootSet",
    "poly_roots",
    "cancel_roots",
    "cluster_points",
    "sign_change_bisect",
    "NewtonResult",
    "newton_refine",
]

GOLDEN_ANGLE = np.pi * (3.0 - np.sqrt(5.0))


@dataclass
class RootSet:
    """Roots with per-root relative backward errors ``|p(z)| / sum|c_k||z|^k``."""

    roots: np.ndarray
    residuals: np.ndarray = None
    converged: np.ndarray = None
    sweeps: int = 0

    def __post_init__(self):
        self.roots = np.asarray(self.roots, dtype=complex).ravel()
        n = self.roots.size
        self.residuals = (np.zeros(n) if self.residuals is None
                          else np.asarray(self.residuals, dtype=float).ravel())
        self.converged = (np.ones(n, bool) if self.converged is None
                          else np.asarray(self.converged, dtype=bool).ravel())

    def __len__(self):
        return self.roots.size

    @property
    def all_converged(self) -> bool:
        return bool(self.converged.all())

    def subset(self, keep) -> "RootSet":
        return RootSet(self.roots[keep], self.residuals[keep], self.converged[keep],
                       self.sweeps)

    def clusters(self, tol: float):
        """Merge roots closer than ``tol``; returns (centroids, multiplicities)."""
        return cluster_points(self.roots, tol)


def cluster_points(points, tol: float):
    """Single-linkage clustering of complex points; returns (centroids, counts)."""
    pts = np.asarray(points, dtype=complex).ravel()
    if pts.size == 0 or tol <= 0:
        return pts.copy(), np.ones(pts.size, dtype=int)
    tree = cKDTree(np.column_stack([pts.real, pts.imag]))
    pairs = tree.query_pairs(tol, output_type="ndarray")
    parent = np.arange(pts.size)

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i, j in pairs:
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[max(ri, rj)] = min(ri, rj)
    labels = np.array([find(i) for i in range(pts.size)])
    uniq, inv, counts = np.unique(labels, return_inverse=True, return_counts=True)
    centroids = np.zeros(uniq.size, dtype=complex)
    np.add.at(centroids, inv, pts)
    return centroids / counts, counts


def _initial_guesses(c: np.ndarray) -> np.ndarray:
    n = c.size - 1
    radius = (abs(c[0]) / abs(c[-1])) ** (1.0 / n)
    if not np.isfinite(radius) or radius == 0:
        radius = 1.0
    k = np.arange(n)
    return radius * np.exp(1j * (2 * np.pi * k + GOLDEN_ANGLE) / n)


def poly_roots(p, tol: float = 1e-12, max_sweeps: int = 200) -> RootSet:
    """All roots of a polynomial by Aberth-Ehrlich iteration, O(deg^2) per sweep.

    ``p`` is a :class:`ScaledPolynomial` or an ascending coefficient array.
    Exact zero low-order coefficients give exact zero roots; leading
    coefficients below ``1e-300`` times the largest one are dropped first.
    Roots that fail to converge within ``max_sweeps`` are still returned,
    flagged in ``converged``.
    """
    c = p.coeffs if isinstance(p, ScaledPolynomial) else np.asarray(p, dtype=complex)
    c = np.asarray(c, dtype=complex).ravel()
    if not np.any(c):
        raise ValueError("the zero polynomial has no isolated roots")
    big = np.abs(c).max()
    nz = np.flatnonzero(np.abs(c) > 1e-300 * big)
    c = c[: nz[-1] + 1]
    if c.size < 2:
        raise ValueError("polynomial must have degree >= 1")
    n_zero = int(np.flatnonzero(c)[0])
    zeros = np.zeros(n_zero, dtype=complex)
    c = c[n_zero:]
    # rescale to unit max: residual bounds are then relative
    c = c / np.abs(c).max()
    n = c.size - 1
    if n == 0:
        return RootSet(zeros)
    if n == 1:
        r = np.array([-c[0] / c[1]])
        return RootSet(np.concatenate([zeros, r]))
    z = _initial_guesses(c)
    done, sweeps, resid = aberth_iterate(c, z, tol, max_sweeps)
    return RootSet(np.concatenate([zeros, z]),
                   np.concatenate([np.zeros(n_zero), resid]),
                   np.concatenate([np.ones(n_zero, bool), done]), int(sweeps))


def cancel_roots(numer, denom, match_tol: Optional[float] = None) -> RootSet:
    """Remove numerator roots cancelled by denominator roots.

    Each denominator root cancels at most one numerator root (the nearest
    unconsumed one within tolerance). The default tolerance for a root ``r``
    is ``1e-6 * (1 + |r|)``.
    """
    if not isinstance(numer, RootSet):
        numer = RootSet(numer)
    den = denom.roots if isinstance(denom, RootSet) else np.asarray(denom, complex).ravel()
    if len(numer) == 0 or den.size == 0:
        return numer.subset(np.ones(len(numer), bool))
    r = numer.roots
    tol = (1e-6 * (1 + np.abs(r))) if match_tol is None else np.full(r.size, float(match_tol))
    tree = cKDTree(np.column_stack([den.real, den.imag]))
    consumed = np.zeros(den.size, bool)
    keep = np.ones(r.size, bool)
    dist, _ = tree.query(np.column_stack([r.real, r.imag]), k=1)
    # closest numerator roots claim denominator roots first
    for i in np.argsort(dist):
        if dist[i] > tol[i]:
            continue
        cand = tree.query_ball_point([r[i].real, r[i].imag], tol[i])
        cand = [j for j in cand if not consumed[j]]
        if not cand:
            continue
        j = min(cand, key=lambda j: abs(den[j] - r[i]))
        consumed[j] = True
        keep[i] = False
    return numer.subset(keep)


def sign_change_bisect(values, grid, refine: Callable[[np.ndarray], np.ndarray],
                       L: int, return_brackets: bool = False):
    """Locate sign changes of sampled real values and refine them by bisection.

    Adjacent samples whose signs differ form a bracket; a sample that is
    exactly zero registers a bracket with its left neighbour only. Every
    bracket then undergoes exactly ``L`` bisection rounds. Each round calls
    ``refine`` once on the array of all current midpoints, so ``refine`` can be
    a batched evaluator.

    Returns the final midpoints (and the final brackets if requested).
    """
    values = np.asarray(values, dtype=float)
    grid = np.asarray(grid, dtype=float)
    if values.shape != grid.shape:
        raise ValueError("values and grid must have the same shape")
    s = np.sign(values)
    j = np.flatnonzero((s[:-1] != s[1:]) & (s[:-1] != 0))
    a, b = grid[j].copy(), grid[j + 1].copy()
    fa = values[j].copy()
    for _ in range(int(L)):
        if a.size == 0:
            break
        mid = 0.5 * (a + b)
        fm = np.asarray(refine(mid), dtype=float)
        same = np.sign(fm) == np.sign(fa)
        a = np.where(same, mid, a)
        fa = np.where(same, fm, fa)
        b = np.where(same, b, mid)
    mids = 0.5 * (a + b)
    if return_brackets:
        return mids, a, b
    return mids


class NewtonResult(NamedTuple):
    z: complex
    converged: bool
    iterations: int


def newton_refine(z0: complex, target: int, signal: Signal, beta: float = 1e-10,
                  max_iter: int = 50) -> NewtonResult:
    """Newton search for a root of ``Delta(z) - target`` (target = +1 or -1).

    Uses the forward-Euler monodromy matrix and its derivative. Stops when
    two consecutive iterates differ by at most ``beta``.
    """
    if target not in (1, -1):
        raise ValueError("target must be +1 or -1")
    z = complex(z0)
    for it in range(1, max_iter + 1):
        M, dM = eval_monodromy_with_derivative(signal, z)
        dtr = dM[0, 0] + dM[1, 1]
        if dtr == 0 or not np.isfinite(dtr):
            return NewtonResult(z, False, it)
        step = (M[0, 0] + M[1, 1] - 2 * target) / dtr
        if not np.isfinite(step):
            return NewtonResult(z, False, it)
        z = z - step
        if abs(step) <= beta:
            return NewtonResult(z, True, it)
    return NewtonResult(z, False, max_iter)
