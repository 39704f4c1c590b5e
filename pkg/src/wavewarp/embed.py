"""Single-scale and multiscale spectral embeddings.

Laplacian eigenmaps and locality-preserving projections, plus their
multiscale counterparts where a diffusion-wavelet tree of the diffusion
operator supplies one embedding (or one linear map) per scale.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse.csgraph import connected_components

from .align import generalized_eig_pinv
from .graph import PINV_RTOL, _samples, _sym, laplacians
from .wavelets import WaveletTree, build_dwt, extended_basis

# eigenvalues below this fraction of the largest are classified as zero
EIG_ZERO_RTOL = 1e-9


@dataclass(frozen=True)
class Embedding:
    """Embedded coordinates, one row per sample."""

    coords: np.ndarray
    level: int | None = None


@dataclass(frozen=True)
class LinearMap:
    """Linear embedding map applied as x -> matrix^T x.

    ``factor`` is the Gram factor F with F F^T equal to the data Gram matrix,
    kept for residual checks and out-of-sample use.
    """

    matrix: np.ndarray
    factor: np.ndarray
    level: int | None = None


def _require_connected(W) -> None:
    n_comp, _ = connected_components((np.asarray(W) > 0), directed=False)
    if n_comp > 1:
        raise ValueError(f"graph is disconnected ({n_comp} components)")


def _fix_signs(V: np.ndarray) -> np.ndarray:
    """Deterministic sign convention: first non-negligible entry positive."""
    V = V.copy()
    for col in range(V.shape[1]):
        v = V[:, col]
        big = np.abs(v) > 1e-12 * max(np.abs(v).max(), 1e-300)
        idx = np.argmax(big)
        if big.any() and v[idx] < 0:
            V[:, col] = -v
    return V


def _nonzero_slice(lam: np.ndarray, d: int, what: str) -> np.ndarray:
    tol = EIG_ZERO_RTOL * max(np.abs(lam).max(), 1e-300)
    idx = np.nonzero(lam > tol)[0]
    if len(idx) < d:
        raise ValueError(f"{what}: only {len(idx)} non-zero eigenvalues, need {d}")
    return idx[:d]


def laplacian_eigenmaps(W, d: int) -> Embedding:
    """Embedding from the d smallest non-zero normalized-Laplacian eigenvectors.

    Requires a connected graph; columns are unit norm with a deterministic
    sign convention, so identical inputs reproduce identical output.
    """
    gm = laplacians(W)
    _require_connected(W)
    n = gm.laplacian_norm.shape[0]
    if not 1 <= d < n:
        raise ValueError(f"need 1 <= d < n, got d={d} for n={n}")
    lam, V = np.linalg.eigh(gm.laplacian_norm)
    idx = _nonzero_slice(lam, d, "laplacian_eigenmaps")
    return Embedding(coords=_fix_signs(V[:, idx]))


def lpp(X, W, d: int) -> LinearMap:
    """Locality-preserving projection: the linear surrogate of eigenmaps.

    Solves the generalized problem A L A^T f = lambda A A^T f over the
    feature-by-sample matrix A through the pseudoinverse factor reduction,
    which also covers rank-deficient Gram matrices.
    """
    A = _samples(X).T
    gm = laplacians(W)
    _require_connected(W)
    if A.shape[1] != gm.laplacian_norm.shape[0]:
        raise ValueError("data and graph sizes do not match")
    pairs = generalized_eig_pinv(A, gm.laplacian_norm, np.eye(A.shape[1]))
    lam = np.array([val for _, val in pairs])
    idx = _nonzero_slice(lam, d, "lpp")
    vecs = np.stack([pairs[i][0] for i in idx], axis=1)
    # recover the factor for downstream residual checks
    F = _gram_factor_of(A)
    return LinearMap(matrix=_fix_signs(vecs), factor=F)


def _gram_factor_of(A: np.ndarray) -> np.ndarray:
    lam, U = np.linalg.eigh(_sym(A @ A.T))
    keep = lam > PINV_RTOL * max(lam.max(), 1e-300)
    return U[:, keep] * np.sqrt(lam[keep])


def diffusion_tree(W, epsilon: float, max_levels: int) -> WaveletTree:
    """Wavelet tree of the diffusion operator T = I - normalized Laplacian."""
    gm = laplacians(W)
    _require_connected(W)
    return build_dwt(gm.diffusion, epsilon=epsilon, max_levels=max_levels)


def multiscale_eigenmaps(W, epsilon: float = 1e-8, max_levels: int = 8) -> list[Embedding]:
    """Per-level embeddings: row i of the level's extended basis is y_i."""
    tree = diffusion_tree(W, epsilon, max_levels)
    return [
        Embedding(coords=extended_basis(tree, j), level=j)
        for j in range(tree.num_levels)
    ]


def multiscale_lpp(X, W, epsilon: float = 1e-8, max_levels: int = 8) -> list[LinearMap]:
    """Per-level linear maps from a wavelet tree on the reduced LPP operator.

    The r x r relationship operator (F+ A L A^T F^T+)+ (r the data Gram rank)
    is rescaled to unit spectral norm before tree construction, a change of
    eigenvalue scale only, required for dyadic powers to stay bounded.
    """
    A = _samples(X).T
    gm = laplacians(W)
    _require_connected(W)
    lam, U = np.linalg.eigh(_sym(A @ A.T))
    keep = lam > PINV_RTOL * max(lam.max(), 1e-300)
    Ft_pinv = U[:, keep] / np.sqrt(lam[keep])  # (F^T)^+
    core = _sym(Ft_pinv.T @ (A @ gm.laplacian_norm @ A.T) @ Ft_pinv)
    T = _psd_pinv(core)
    top = np.abs(np.linalg.eigvalsh(T)).max()
    if top > 0:
        T = T / top
    tree = build_dwt(T, epsilon=epsilon, max_levels=max_levels)
    F = U[:, keep] * np.sqrt(lam[keep])
    return [
        LinearMap(matrix=Ft_pinv @ extended_basis(tree, j), factor=F, level=j)
        for j in range(tree.num_levels)
    ]


def _psd_pinv(A: np.ndarray) -> np.ndarray:
    lam, U = np.linalg.eigh(_sym(A))
    keep = lam > PINV_RTOL * max(np.abs(lam).max(), 1e-300)
    if not keep.any():
        return np.zeros_like(A)
    return _sym((U[:, keep] / lam[keep]) @ U[:, keep].T)


def select_level(dims, d: int) -> int:
    """Deepest level whose basis still has at least d functions, else 0."""
    if len(dims) == 0:
        raise ValueError("empty level list")
    best = 0
    for j, p in enumerate(dims):
        if p >= d:
            best = j
    return best


def reduce_level_coords(tree: WaveletTree, level: int, d: int) -> np.ndarray:
    """Level coordinates cut to d columns, ordered by the compressed spectrum.

    The extended-basis columns are orthonormal, so a plain SVD carries no
    energy ordering; the compressed operator's descending eigenvalues rank
    the directions by diffusion smoothness instead.  Directions whose
    eigenvalue sits at the stationary value 1 carry no sample-ordering
    information (the diffusion analogue of the zero-Laplacian constant) and
    are skipped when enough informative directions remain.
    """
    coords = extended_basis(tree, level)
    if coords.shape[1] <= d:
        return coords
    op = tree.levels[level].op_compressed
    lam, V = np.linalg.eigh(_sym(op))
    order = np.argsort(lam)[::-1]
    informative = [i for i in order if lam[i] < 1.0 - 1e-6]
    if len(informative) >= d:
        order = np.asarray(informative)
    return coords @ V[:, order[:d]]
