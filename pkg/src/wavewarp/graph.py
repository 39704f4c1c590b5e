"""Graph and matrix constructions feeding the spectral machinery.

Similarity graphs (k-nearest-neighbor heat kernels, chain graphs), their
Laplacians and diffusion operators, joint block matrices coupling two
datasets through a correspondence matrix, and closed-form low-rank
reconstructions for mixed-manifold data.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .data import TimeSeries

# relative eigenvalue cutoff used wherever a pseudoinverse or a zero/non-zero
# eigenvalue classification is needed
PINV_RTOL = 1e-10


def _samples(x) -> np.ndarray:
    if isinstance(x, TimeSeries):
        return x.samples
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    return arr


def _sym(A: np.ndarray) -> np.ndarray:
    return 0.5 * (A + A.T)


def check_weight_matrix(W) -> np.ndarray:
    """Validate and return a similarity matrix: square, symmetric, >= 0."""
    W = np.asarray(W, dtype=float)
    if W.ndim != 2 or W.shape[0] != W.shape[1]:
        raise ValueError("weight matrix must be square")
    if not np.allclose(W, W.T, atol=1e-12):
        raise ValueError("weight matrix must be symmetric within 1e-12")
    if (W < 0).any():
        raise ValueError("weight matrix must be non-negative")
    return _sym(W)


@dataclass(frozen=True)
class GraphMatrices:
    """Degree matrix, both Laplacians and the diffusion operator of a graph."""

    degree: np.ndarray      # diagonal degree matrix
    laplacian: np.ndarray   # combinatorial: D - W
    laplacian_norm: np.ndarray  # normalized: I - D^{-1/2} W D^{-1/2}
    diffusion: np.ndarray   # T = I - laplacian_norm


@dataclass(frozen=True)
class JointGraph:
    """Block matrices over two coupled datasets.

    ``weights`` carries the correspondence-tuned joint weight matrix
    (diagonal blocks scaled by 1-mu, coupling blocks by mu).  ``degree`` and
    ``laplacian`` are the unscaled per-set degree blocks and the coupled
    Laplacian with the diagonal correspondence-mass terms, as the joint
    alignment eigenproblem consumes them.
    """

    weights: np.ndarray
    degree: np.ndarray
    laplacian: np.ndarray
    mu: float
    n_x: int
    n_y: int
    Z: np.ndarray | None = None  # (p+q) x (n_x+n_y) block-diagonal data matrix


@dataclass(frozen=True)
class LowRankReconstruction:
    """Symmetric sample-space reconstruction matrix with eigenvalues in [0, 1)."""

    R: np.ndarray
    tau: float


def _self_tuning_sigma(distances: np.ndarray) -> float:
    med = float(np.median(distances)) if distances.size else 0.0
    return med if med > 0 else 1.0


def heat_kernel_knn(X, k: int, sigma: float | None = None) -> np.ndarray:
    """Symmetrized k-nearest-neighbor graph with heat-kernel weights.

    W[i, j] = exp(-|x_i - x_j|^2 / (2 sigma^2)) when j is among the k nearest
    neighbors of i or vice versa (symmetrization by max), else 0.  With
    ``sigma=None`` the bandwidth self-tunes to the median distance over the
    selected neighbor edges.
    """
    A = _samples(X)
    n = len(A)
    if not 1 <= k < n:
        raise ValueError(f"need 1 <= k < n, got k={k} for n={n}")
    if sigma is not None and sigma <= 0:
        raise ValueError("sigma must be positive")
    dist = cdist(A, A)
    np.fill_diagonal(dist, np.inf)
    neighbor = np.zeros((n, n), dtype=bool)
    idx = np.argpartition(dist, k - 1, axis=1)[:, :k]
    neighbor[np.arange(n)[:, None], idx] = True
    neighbor |= neighbor.T
    if sigma is None:
        sigma = _self_tuning_sigma(dist[neighbor])
    W = np.zeros((n, n))
    W[neighbor] = np.exp(-(dist[neighbor] ** 2) / (2.0 * sigma**2))
    return _sym(W)


def chain_weights(X, k0: int, kernel: str = "unit") -> np.ndarray:
    """Banded temporal-adjacency graph: sample i linked to i+1 .. i+k0.

    ``unit`` weights are 1; ``heat`` weights use the heat kernel with a
    self-tuned bandwidth (median distance over the included edges).
    """
    A = _samples(X)
    n = len(A)
    if not 1 <= k0 < n:
        raise ValueError(f"need 1 <= k0 < n, got k0={k0} for n={n}")
    if kernel not in ("unit", "heat"):
        raise ValueError(f"unknown kernel {kernel!r}")
    W = np.zeros((n, n))
    if kernel == "unit":
        for lag in range(1, k0 + 1):
            idx = np.arange(n - lag)
            W[idx, idx + lag] = 1.0
    else:
        dists = [np.linalg.norm(A[lag:] - A[:-lag], axis=1) for lag in range(1, k0 + 1)]
        sigma = _self_tuning_sigma(np.concatenate(dists))
        for lag, d in enumerate(dists, start=1):
            idx = np.arange(n - lag)
            W[idx, idx + lag] = np.exp(-(d**2) / (2.0 * sigma**2))
    return _sym(W + W.T)


def laplacians(W) -> GraphMatrices:
    """Degree, combinatorial and normalized Laplacians, diffusion operator.

    Raises on isolated vertices: a zero degree would silently hide an
    upstream graph-construction bug and makes the normalized form undefined.
    """
    W = check_weight_matrix(W)
    deg = W.sum(axis=1)
    dead = np.nonzero(deg <= 0)[0]
    if len(dead):
        raise ValueError(f"vertex {dead[0]} has zero degree (isolated)")
    D = np.diag(deg)
    L = D - W
    inv_sqrt = 1.0 / np.sqrt(deg)
    Wn = W * inv_sqrt[:, None] * inv_sqrt[None, :]
    Ln = np.eye(len(W)) - Wn
    return GraphMatrices(degree=D, laplacian=_sym(L), laplacian_norm=_sym(Ln), diffusion=_sym(Wn))


def joint_weight(WX, WY, C, mu: float, x=None, y=None) -> JointGraph:
    """Joint block matrices coupling two graphs through a correspondence C.

    The joint weight matrix has diagonal blocks (1-mu) WX, (1-mu) WY and
    coupling blocks mu C, mu C^T.  The joint Laplacian adds the
    correspondence mass on the diagonal: diag blocks L_x + mu diag(C 1) and
    L_y + mu diag(C^T 1), off-diagonal blocks -mu C and -mu C^T, which
    reduces to the identity-correspondence construction and stays PSD for
    arbitrary non-negative C.

    When ``x`` / ``y`` data are supplied the block-diagonal feature-by-sample
    matrix Z is attached.
    """
    WX = check_weight_matrix(WX)
    WY = check_weight_matrix(WY)
    C = np.asarray(C, dtype=float)
    if not 0 <= mu <= 1:
        raise ValueError("mu must lie in [0, 1]")
    nx, ny = len(WX), len(WY)
    if C.shape != (nx, ny):
        raise ValueError(f"correspondence shape {C.shape} does not match ({nx}, {ny})")
    if (C < 0).any():
        raise ValueError("correspondence weights must be non-negative")

    W = np.block([[(1 - mu) * WX, mu * C], [mu * C.T, (1 - mu) * WY]])

    deg_x = WX.sum(axis=1)
    deg_y = WY.sum(axis=1)
    D = np.diag(np.concatenate([deg_x, deg_y]))
    Lx = np.diag(deg_x) - WX
    Ly = np.diag(deg_y) - WY
    omega1 = mu * np.diag(C.sum(axis=1))
    omega4 = mu * np.diag(C.sum(axis=0))
    L = np.block([[Lx + omega1, -mu * C], [-mu * C.T, Ly + omega4]])

    Z = None
    if x is not None and y is not None:
        ax, ay = _samples(x), _samples(y)
        if len(ax) != nx or len(ay) != ny:
            raise ValueError("data sizes do not match the weight matrices")
        p, q = ax.shape[1], ay.shape[1]
        Z = np.zeros((p + q, nx + ny))
        Z[:p, :nx] = ax.T
        Z[p:, nx:] = ay.T
    return JointGraph(weights=_sym(W), degree=D, laplacian=_sym(L), mu=float(mu), n_x=nx, n_y=ny, Z=Z)


def low_rank_reconstruct(X, tau: float) -> LowRankReconstruction:
    """Closed-form minimizer of (tau/2) |X - R X|_F^2 + |R|_* over sample space.

    Singular directions with sigma > 1/sqrt(tau) are kept with shrunk
    coefficients 1 - 1/(tau sigma^2); everything else is dropped, so the
    result is symmetric with eigenvalues in [0, 1).  If no singular value
    clears the threshold the zero matrix is returned.
    """
    if tau <= 0:
        raise ValueError("tau must be positive")
    A = _samples(X)
    if not np.any(A):
        raise ValueError("data matrix is identically zero")
    U, s, _ = np.linalg.svd(A, full_matrices=False)
    keep = s > 1.0 / np.sqrt(tau)
    n = len(A)
    if not keep.any():
        return LowRankReconstruction(R=np.zeros((n, n)), tau=float(tau))
    U1 = U[:, keep]
    coeff = 1.0 - 1.0 / (tau * s[keep] ** 2)
    R = _sym((U1 * coeff) @ U1.T)
    return LowRankReconstruction(R=R, tau=float(tau))


def low_rank_affinity(rec: LowRankReconstruction) -> np.ndarray:
    """Symmetric non-negative affinity from a reconstruction matrix."""
    A = 0.5 * (np.abs(rec.R) + np.abs(rec.R.T))
    np.fill_diagonal(A, 0.0)
    return A


def knn_edges(affinity, k: int) -> np.ndarray:
    """Boolean adjacency keeping each node's k strongest affinities (or-symmetrized)."""
    A = np.asarray(affinity, dtype=float)
    n = len(A)
    if not 1 <= k < n:
        raise ValueError(f"need 1 <= k < n, got k={k} for n={n}")
    A = A.copy()
    np.fill_diagonal(A, -np.inf)
    idx = np.argpartition(-A, k - 1, axis=1)[:, :k]
    adj = np.zeros((n, n), dtype=bool)
    adj[np.arange(n)[:, None], idx] = True
    return adj | adj.T


def top_edges(affinity, count: int) -> np.ndarray:
    """Boolean adjacency keeping the ``count`` strongest off-diagonal affinities.

    A same-budget alternative to per-node selection: nodes with uniformly
    weak affinities receive no edges instead of arbitrary ones, which is the
    fair way to compare edge sets of equal size across graph constructions.
    """
    A = np.asarray(affinity, dtype=float)
    n = len(A)
    iu = np.triu_indices(n, 1)
    vals = A[iu]
    if not 1 <= count <= len(vals):
        raise ValueError(f"need 1 <= count <= {len(vals)}, got {count}")
    thresh = np.partition(vals, -count)[-count]
    adj = np.triu(A, 1) >= max(thresh, 1e-300)
    return adj | adj.T


def block_M(RX: LowRankReconstruction, RY: LowRankReconstruction) -> np.ndarray:
    """M = (I - R)^T (I - R) for the block-diagonal reconstruction R."""
    nx, ny = len(RX.R), len(RY.R)
    R = np.zeros((nx + ny, nx + ny))
    R[:nx, :nx] = RX.R
    R[nx:, nx:] = RY.R
    IR = np.eye(nx + ny) - R
    return _sym(IR.T @ IR)


def correspondence_laplacian(C) -> np.ndarray:
    """Laplacian of the bipartite correspondence graph [[0, C], [C^T, 0]]."""
    C = np.asarray(C, dtype=float)
    nx, ny = C.shape
    B = np.zeros((nx + ny, nx + ny))
    B[:nx, nx:] = C
    B[nx:, :nx] = C.T
    return _sym(np.diag(B.sum(axis=1)) - B)
