"""Independent oracle implementations used to pin expected values.

Each oracle deliberately avoids the code path it checks: warping costs come
from exhaustive path enumeration, areas from polygon geometry, the low-rank
closed form from first-order convex optimization, and operator powers from
dense matrix powering.
"""

import numpy as np
from shapely.geometry import Polygon

from wavewarp.data import AlignmentPath


def enumerate_min_dtw(local_cost) -> float:
    """Minimum total cost over every valid monotone path, by brute force."""
    local = np.asarray(local_cost, dtype=float)
    n, m = local.shape
    best = [np.inf]

    def walk(i, j, acc):
        if i == n - 1 and j == m - 1:
            best[0] = min(best[0], acc)
            return
        if i + 1 < n and j + 1 < m:
            walk(i + 1, j + 1, acc + local[i + 1, j + 1])
        if i + 1 < n:
            walk(i + 1, j, acc + local[i + 1, j])
        if j + 1 < m:
            walk(i, j + 1, acc + local[i, j + 1])

    walk(0, 0, local[0, 0])
    return best[0]


def random_valid_path(n, m, rng) -> AlignmentPath:
    """Uniformly random step choices from (1,1) to (n,m)."""
    i, j = 1, 1
    pairs = [(1, 1)]
    while (i, j) != (n, m):
        if i == n:
            j += 1
        elif j == m:
            i += 1
        else:
            step = rng.integers(3)
            if step == 0:
                i += 1
            elif step == 1:
                j += 1
            else:
                i, j = i + 1, j + 1
        pairs.append((i, j))
    return AlignmentPath(np.asarray(pairs))


def shoelace_area_between(p: AlignmentPath, q: AlignmentPath) -> float:
    """Area between two warping curves via polygon symmetric difference.

    Each curve bounds a region against the x-axis over [1/n, 1]; the area
    between the curves is the area of the symmetric difference of those two
    regions, computed with exact polygon clipping.
    """
    n, m = p.n, p.m

    def under_curve(path):
        pts = [(i / n, j / m) for i, j in path.pairs]
        ring = [(pts[0][0], 0.0)] + pts + [(pts[-1][0], 0.0)]
        return Polygon(ring)

    return under_curve(p).symmetric_difference(under_curve(q)).area


def lrr_objective(X_cols, R, tau) -> float:
    """(tau/2) |X - X R|_F^2 + |R|_* with samples as columns of X."""
    fit = np.linalg.norm(X_cols - X_cols @ R, "fro") ** 2
    nuclear = np.linalg.svd(R, compute_uv=False).sum()
    return 0.5 * tau * fit + nuclear


def prox_gradient_lrr(X_cols, tau, iters=10_000) -> np.ndarray:
    """Proximal-gradient (ISTA) minimizer of the low-rank reconstruction
    objective; converges to the global optimum of this convex problem."""
    n = X_cols.shape[1]
    G = X_cols.T @ X_cols
    step = 1.0 / (tau * np.linalg.norm(G, 2) + 1e-12)
    R = np.zeros((n, n))
    for _ in range(iters):
        grad = tau * (G @ R - G)
        Z = R - step * grad
        U, s, Vt = np.linalg.svd(Z, full_matrices=False)
        s = np.maximum(s - step, 0.0)
        R = (U * s) @ Vt
    return R


def dense_power(T, j) -> np.ndarray:
    """T^(2^j) by dense matrix powering."""
    return np.linalg.matrix_power(np.asarray(T, dtype=float), 2**j)


def random_correspondence_path(n, m, rng) -> np.ndarray:
    """0/1 matrix of a random valid path."""
    path = random_valid_path(n, m, rng)
    C = np.zeros((n, m))
    C[path.pairs[:, 0] - 1, path.pairs[:, 1] - 1] = 1.0
    return C
