"""Shared numeric tolerances, point-array helpers, and seed derivation."""

from __future__ import annotations

import numpy as np

from .errors import DomainError

# Max-norm tolerance for merging atoms at construction time.
DEDUP_TOL = 1e-12
# Max-norm tolerance for merging atoms after each convolution step.
CONVOLUTION_MERGE_TOL = 1e-9
# Slack added to closed-ball membership tests; absorbs circumcenter roundoff.
GEOM_TOL = 1e-12
# Slack for closed 1-d window sweeps.  Must dominate GEOM_TOL so that uniform
# window inflation can never break covering inequalities between dimensions.
WINDOW_TOL = 3e-12

_MASK64 = (1 << 64) - 1


def as_points(arr, dim: int | None = None) -> np.ndarray:
    """Coerce input to a (k, d) float array of points.

    A 1-d input is read as k scalars (points on the line).  A single point in
    R^d with d >= 2 must therefore be passed as a nested list.
    """
    a = np.asarray(arr, dtype=float)
    if a.ndim == 0:
        a = a.reshape(1, 1)
    elif a.ndim == 1:
        a = a.reshape(-1, 1)
    elif a.ndim != 2:
        raise DomainError(f"expected a point array, got ndim={a.ndim}")
    if dim is not None and a.shape[1] != dim:
        raise DomainError(f"expected points in R^{dim}, got R^{a.shape[1]}")
    return a


def as_vector(t, dim: int) -> np.ndarray:
    """Coerce a scalar or sequence to a (dim,) float vector."""
    v = np.asarray(t, dtype=float).reshape(-1)
    if v.size == 1 and dim == 1:
        return v
    if v.size != dim:
        raise DomainError(f"expected a vector in R^{dim}, got size {v.size}")
    return v


def dedupe_points(points: np.ndarray, weights: np.ndarray, tol: float):
    """Merge points closer than ``tol`` in max norm along the lexicographic sweep.

    Groups are maximal runs of lex-sorted points whose consecutive gaps stay
    within ``tol``; each group collapses to its weighted mean.  The run rule is
    invariant under negation of the whole point set, which keeps symmetrized
    supports symmetric.
    """
    points = np.asarray(points, dtype=float)
    weights = np.asarray(weights, dtype=float)
    if points.shape[0] <= 1:
        return points.copy(), weights.copy()
    order = np.lexsort(points.T[::-1])
    p = points[order]
    w = weights[order]
    gaps = np.max(np.abs(np.diff(p, axis=0)), axis=1)
    starts = np.concatenate([[True], gaps > tol])
    if starts.all():
        return p, w
    group = np.cumsum(starts) - 1
    k = int(group[-1]) + 1
    wsum = np.bincount(group, weights=w, minlength=k)
    merged = np.empty((k, p.shape[1]))
    for j in range(p.shape[1]):
        merged[:, j] = np.bincount(group, weights=w * p[:, j], minlength=k)
    pos = wsum > 0
    merged[pos] /= wsum[pos, None]
    # zero-weight groups keep their first member verbatim
    if not pos.all():
        merged[~pos] = p[starts][~pos]
    return merged, wsum


def mirror_pair_symmetrize(points: np.ndarray, weights: np.ndarray):
    """Force an almost-symmetric support to be exactly negation-invariant.

    Assumes the deduped input is symmetric up to float noise; pairs each
    lex-sorted point with its mirror (reverse order) and averages.  The result
    satisfies atoms == -atoms[::-1] and weights == weights[::-1] exactly.
    """
    order = np.lexsort(points.T[::-1])
    p = points[order]
    w = weights[order]
    if not np.allclose(p, -p[::-1], atol=1e-9, rtol=0.0):
        raise DomainError("support is not symmetric up to tolerance")
    p_sym = (p - p[::-1]) / 2.0
    w_sym = (w + w[::-1]) / 2.0
    return p_sym, w_sym


def derive_seed(master: int, stream: int = 0) -> int:
    """Deterministic 64-bit child seed for (master, stream)."""
    ss = np.random.SeedSequence([int(master) & _MASK64, int(stream) & _MASK64])
    return int(ss.generate_state(1, np.uint64)[0])


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(int(seed) & _MASK64))
