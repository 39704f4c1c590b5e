"""Classic dynamic time warping and its matrix form.

``dtw_align`` computes the optimal monotone alignment of two sequences in
O(n*m) time and memory; ``path_to_matrix``/``validate_dtw_matrix`` move
between the path and 0/1 correspondence-matrix representations.
"""

from __future__ import annotations

import numpy as np
from scipy.spatial.distance import cdist

from .data import AlignmentPath, TimeSeries

# backtracking direction codes; ties prefer the diagonal, then advancing the
# first sequence, then the second: a deterministic canonical path
_DIAG, _UP, _LEFT = 1, 2, 3


def _samples(x) -> np.ndarray:
    if isinstance(x, TimeSeries):
        return x.samples
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    return arr


def dtw_align(X, Y, dist=None):
    """Optimal monotone alignment of two sequences.

    Parameters
    ----------
    X, Y : TimeSeries or array (rows = samples)
    dist : optional pairwise sample distance ``dist(a, b) -> float >= 0``.
        When omitted, squared Euclidean distance is used (the same squared
        norms that every alignment loss in this package uses), which
        requires equal feature counts.

    Returns
    -------
    (AlignmentPath, float)
        The path minimizing the summed distance over matched pairs, and
        that minimal total cost.
    """
    A, B = _samples(X), _samples(Y)
    if len(A) == 0 or len(B) == 0:
        raise ValueError("cannot align empty sequences")
    if dist is None:
        if A.shape[1] != B.shape[1]:
            raise ValueError(
                f"feature counts differ ({A.shape[1]} vs {B.shape[1]}); "
                "pass an explicit dist for mixed dimensions"
            )
        local = cdist(A, B, "sqeuclidean")
    else:
        local = np.empty((len(A), len(B)))
        for i, a in enumerate(A):
            for j, b in enumerate(B):
                local[i, j] = dist(a, b)
        if np.any(local < 0):
            raise ValueError("dist must be non-negative")
    n, m = local.shape

    cost = np.full((n, m), np.inf)
    parent = np.zeros((n, m), dtype=np.uint8)
    cost[0, 0] = local[0, 0]
    for j in range(1, m):
        cost[0, j] = cost[0, j - 1] + local[0, j]
        parent[0, j] = _LEFT
    for i in range(1, n):
        cost[i, 0] = cost[i - 1, 0] + local[i, 0]
        parent[i, 0] = _UP
        row = cost[i]
        prev = cost[i - 1]
        loc = local[i]
        par = parent[i]
        for j in range(1, m):
            best = prev[j - 1]
            p = _DIAG
            c = prev[j]
            if c < best:
                best, p = c, _UP
            c = row[j - 1]
            if c < best:
                best, p = c, _LEFT
            row[j] = best + loc[j]
            par[j] = p

    pairs = []
    i, j = n - 1, m - 1
    while True:
        pairs.append((i + 1, j + 1))
        p = parent[i, j]
        if p == _DIAG:
            i, j = i - 1, j - 1
        elif p == _UP:
            i -= 1
        elif p == _LEFT:
            j -= 1
        else:
            break
    pairs.reverse()
    return AlignmentPath(np.asarray(pairs)), float(cost[n - 1, m - 1])


def path_to_matrix(p: AlignmentPath, n: int, m: int) -> np.ndarray:
    """0/1 matrix W with W[i-1, j-1] = 1 exactly for pairs (i, j) on the path."""
    if p.n > n or p.m > m:
        raise ValueError(f"path endpoint ({p.n},{p.m}) out of bounds for ({n},{m})")
    W = np.zeros((n, m))
    W[p.pairs[:, 0] - 1, p.pairs[:, 1] - 1] = 1.0
    return W


def validate_dtw_matrix(W) -> bool:
    """True iff W is the 0/1 matrix of some valid alignment path.

    Checks the corner conditions, that no row or column is all zero, and
    that the ones form a monotone staircase with no gaps.  Malformed input
    yields False rather than an error.
    """
    W = np.asarray(W)
    if W.ndim != 2 or W.size == 0:
        return False
    if not np.isin(W, (0, 1)).all():
        return False
    n, m = W.shape
    if W[0, 0] != 1 or W[n - 1, m - 1] != 1:
        return False
    ii, jj = np.nonzero(W)
    # cells of a valid path, sorted lexicographically, are the path order
    order = np.lexsort((jj, ii))
    cells = np.stack([ii[order], jj[order]], axis=1)
    steps = np.diff(cells, axis=0)
    if len(steps) == 0:
        return n == 1 and m == 1
    return bool(np.isin(steps, (0, 1)).all() and (steps.sum(axis=1) >= 1).all())


def matrix_to_path(W) -> AlignmentPath:
    """Inverse of :func:`path_to_matrix`; requires a valid DTW matrix."""
    if not validate_dtw_matrix(W):
        raise ValueError("not a valid DTW matrix")
    ii, jj = np.nonzero(np.asarray(W))
    order = np.lexsort((jj, ii))
    return AlignmentPath(np.stack([ii[order] + 1, jj[order] + 1], axis=1))


def save_path_csv(p: AlignmentPath, path) -> None:
    """Write a path as CSV with columns i,j (1-based)."""
    np.savetxt(path, p.pairs, fmt="%d", delimiter=",")


def load_path_csv(path) -> AlignmentPath:
    pairs = np.loadtxt(path, delimiter=",", dtype=np.int64, ndmin=2)
    return AlignmentPath(pairs)
