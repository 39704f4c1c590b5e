"""Joint-embedding solvers.

The generalized eigenproblem Z L Z^T g = lambda Z D Z^T g is reduced through
a Gram factor F (F F^T = Z D Z^T) to an ordinary symmetric problem, covering
both the positive-definite and the rank-deficient case.  Multiscale manifold
alignment runs a diffusion-wavelet tree on the pseudoinverse of the reduced
operator and reads per-level mapping functions off the extended bases.
Low-rank alignment solves the mixed-manifold eigenproblem built from
closed-form reconstruction matrices.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .graph import (
    PINV_RTOL,
    _samples,
    _sym,
    block_M,
    correspondence_laplacian,
    heat_kernel_knn,
    joint_weight,
    low_rank_reconstruct,
)
from .wavelets import WaveletTree, build_dwt, extended_basis

EIG_ZERO_RTOL = 1e-9


@dataclass(frozen=True)
class MmaResult:
    """Per-level alignment maps for two datasets.

    ``alphas[k]`` maps X samples (p features) and ``betas[k]`` maps Y samples
    (q features) into a shared d_k-dimensional space via x -> alpha^T x.
    ``factor`` is the joint Gram factor F with F F^T = Z D Z^T.
    """

    alphas: list[np.ndarray]
    betas: list[np.ndarray]
    dims: list[int]
    factor: np.ndarray
    tree: WaveletTree


@dataclass(frozen=True)
class JointEmbedding:
    FX: np.ndarray
    FY: np.ndarray
    mu: float


def _factor_parts(G: np.ndarray):
    """Gram factor pieces of a symmetric PSD matrix G = F F^T.

    Returns (F, Ft_pinv) with Ft_pinv = (F^T)^+; eigenvalues below the
    relative pseudoinverse cutoff are treated as exact zeros.
    """
    lam, U = np.linalg.eigh(_sym(G))
    keep = lam > PINV_RTOL * max(np.abs(lam).max(), 1e-300)
    if not keep.any():
        raise ValueError("Gram matrix is numerically zero")
    root = np.sqrt(lam[keep])
    return U[:, keep] * root, U[:, keep] / root


def generalized_eig_pinv(Z, L, D):
    """Solve Z L Z^T g = lambda Z D Z^T g through the Gram-factor reduction.

    Returns all (g, lambda) pairs sorted by ascending eigenvalue, where g =
    (F^T)^+ x for eigenpairs (x, lambda) of the reduced symmetric operator
    F^+ Z L Z^T (F^T)^+.  Rank-deficient Z D Z^T is handled by the same
    pseudoinverse path; its eigenvectors are then one valid choice among
    many.
    """
    Z = np.asarray(Z, dtype=float)
    L = np.asarray(L, dtype=float)
    D = np.asarray(D, dtype=float)
    G = Z @ D @ Z.T
    _, Ft_pinv = _factor_parts(G)
    T = _sym(Ft_pinv.T @ (Z @ L @ Z.T) @ Ft_pinv)
    lam, V = np.linalg.eigh(T)
    gammas = Ft_pinv @ V
    return [(gammas[:, i].copy(), float(lam[i])) for i in range(len(lam))]


def _psd_pinv(A: np.ndarray) -> np.ndarray:
    lam, U = np.linalg.eigh(_sym(A))
    keep = lam > PINV_RTOL * max(np.abs(lam).max(), 1e-300)
    if not keep.any():
        return np.zeros_like(A)
    return _sym((U[:, keep] / lam[keep]) @ U[:, keep].T)


def mma_solve(Z, L, D, p: int, epsilon: float = 1e-8, max_levels: int = 8) -> MmaResult:
    """Multiscale alignment maps for an explicit joint system.

    Builds the reduced operator T = F^+ Z L Z^T (F^T)^+, runs a wavelet tree
    on its pseudoinverse (rescaled to unit spectral norm, which changes no
    eigenvector and no span), and returns per-level maps
    [alpha_k; beta_k] = (F^T)^+ [phi_k]_{phi_0} split after the first ``p``
    feature rows.
    """
    Z = np.asarray(Z, dtype=float)
    F, Ft_pinv = _factor_parts(Z @ np.asarray(D, float) @ Z.T)
    T = _sym(Ft_pinv.T @ (Z @ np.asarray(L, float) @ Z.T) @ Ft_pinv)
    Tp = _psd_pinv(T)
    top = np.abs(np.linalg.eigvalsh(Tp)).max() if Tp.size else 0.0
    if top > 0:
        Tp = Tp / top
    tree = build_dwt(Tp, epsilon=epsilon, max_levels=max_levels)
    alphas, betas, dims = [], [], []
    for j in range(tree.num_levels):
        maps = Ft_pinv @ extended_basis(tree, j)
        alphas.append(maps[:p])
        betas.append(maps[p:])
        dims.append(maps.shape[1])
    return MmaResult(alphas=alphas, betas=betas, dims=dims, factor=F, tree=tree)


def mma(X, Y, C, mu: float, epsilon: float = 1e-8, max_levels: int = 8,
        k: int = 10, sigma: float | None = None) -> MmaResult:
    """Multiscale manifold alignment of two datasets with correspondence C.

    Intra-set graphs are heat-kernel k-nearest-neighbor graphs built from the
    data; the joint Laplacian couples them through C with weight mu.
    """
    ax, ay = _samples(X), _samples(Y)
    WX = heat_kernel_knn(ax, k, sigma)
    WY = heat_kernel_knn(ay, k, sigma)
    jg = joint_weight(WX, WY, C, mu, x=ax, y=ay)
    return mma_solve(jg.Z, jg.laplacian, jg.degree, p=ax.shape[1],
                     epsilon=epsilon, max_levels=max_levels)


def _swap_canonical(lam: np.ndarray, V: np.ndarray, half: int, rtol: float = 1e-6) -> np.ndarray:
    """Deterministic basis choice inside near-degenerate eigenvalue clusters.

    Within each cluster of eigenvalues closer than rtol * max|lam| the
    eigenbasis is arbitrary up to rotation; re-diagonalizing the block-swap
    operator there and listing swap-symmetric vectors first keeps every
    cluster span intact while making the choice reproducible and, for
    structurally identical halves, symmetric.
    """
    if 2 * half != V.shape[0] or len(lam) < 2:
        return V
    scale = max(np.abs(lam).max(), 1e-300)
    V = V.copy()
    start = 0
    for end in range(1, len(lam) + 1):
        if end == len(lam) or lam[end] - lam[end - 1] > rtol * scale:
            if end - start > 1:
                B = V[:, start:end]
                swapped = np.vstack([B[half:], B[:half]])
                G = _sym(B.T @ swapped)
                w, Q = np.linalg.eigh(G)
                V[:, start:end] = B @ Q[:, np.argsort(w)[::-1]]
            start = end
    return V


def _bottom_nonzero_eigvecs(A: np.ndarray, d: int, what: str, swap_half: int | None = None) -> np.ndarray:
    lam, V = np.linalg.eigh(_sym(A))
    if swap_half is not None:
        V = _swap_canonical(lam, V, swap_half)
    tol = EIG_ZERO_RTOL * max(np.abs(lam).max(), 1e-300)
    idx = np.nonzero(lam > tol)[0]
    if len(idx) < d:
        raise ValueError(f"{what}: only {len(idx)} non-zero eigenvalues, need {d}")
    return V[:, idx[:d]]


def lra(X, Y, C, mu: float, d: int, tau: float) -> JointEmbedding:
    """Low-rank alignment: joint embedding trading reconstruction vs coupling.

    The two reconstruction matrices are independent (and could be computed
    in parallel); the embedding is the d smallest non-zero eigenvectors of
    (1-mu) M + 2 mu L with M = (I-R)^T (I-R) and L the correspondence
    Laplacian, so F^T F = I holds by construction.
    """
    if not 0 <= mu <= 1:
        raise ValueError("mu must lie in [0, 1]")
    ax, ay = _samples(X), _samples(Y)
    nx, ny = len(ax), len(ay)
    if d >= nx + ny:
        raise ValueError(f"need d < N_X + N_Y = {nx + ny}, got {d}")
    C = np.asarray(C, dtype=float)
    if C.shape != (nx, ny):
        raise ValueError(f"correspondence shape {C.shape} does not match ({nx}, {ny})")
    RX = low_rank_reconstruct(ax, tau)
    RY = low_rank_reconstruct(ay, tau)
    M = block_M(RX, RY)
    L = correspondence_laplacian(C)
    F = _bottom_nonzero_eigvecs((1 - mu) * M + 2 * mu * L, d, "lra")
    return JointEmbedding(FX=F[:nx], FY=F[nx:], mu=float(mu))


def loss_ma(FX, FY, C, WX, WY, mu: float) -> float:
    """Manifold-alignment loss: mu/2 coupling plus (1-mu)/2 intra-set terms.

    All three terms are the literal double sums of squared embedding
    distances against the corresponding weights.
    """
    FX = np.asarray(FX, float)
    FY = np.asarray(FY, float)
    C = np.asarray(C, float)
    WX = np.asarray(WX, float)
    WY = np.asarray(WY, float)
    if C.shape != (len(FX), len(FY)) or WX.shape != (len(FX), len(FX)) or WY.shape != (len(FY), len(FY)):
        raise ValueError("shapes of embeddings, correspondence and weights disagree")
    cross = (cdist(FX, FY, "sqeuclidean") * C).sum()
    intra_x = (cdist(FX, FX, "sqeuclidean") * WX).sum()
    intra_y = (cdist(FY, FY, "sqeuclidean") * WY).sum()
    return float(mu / 2.0 * cross + (1 - mu) / 2.0 * (intra_x + intra_y))
