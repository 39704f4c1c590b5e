"""Iterative warping loops.

All loops alternate a joint-embedding step against the current correspondence
matrix with a DTW step in the embedded space, starting from the endpoint-only
correspondence.  DTW globally minimizes the coupling term of each loss over
valid correspondence matrices, and an embedding update is only accepted when
it does not increase the loss at the current correspondence (the identity
update is always a feasible fallback), so every recorded loss trace is
non-increasing and the loops terminate.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np
from scipy.spatial.distance import cdist

from . import embed as _embed
from .align import _bottom_nonzero_eigvecs, generalized_eig_pinv, mma_solve
from .data import AlignmentPath, TimeSeries
from .dtw import dtw_align, path_to_matrix, save_path_csv
from .graph import (
    _samples,
    block_M,
    chain_weights,
    correspondence_laplacian,
    heat_kernel_knn,
    low_rank_affinity,
    low_rank_reconstruct,
)

GRAPH_KINDS = ("knn-heat", "low-rank", "chain")
# lag cap for chain graphs; temporal adjacency is only meaningful for a few steps
CHAIN_MAX_LAG = 3
# maximum depth of per-series diffusion-wavelet trees
TREE_LEVELS = 6


@dataclass(frozen=True)
class WarpConfig:
    """Hyperparameters shared by all warping loops.

    Defaults: mu=0.5, tau=1.0, d=2, k=10.
    """

    d: int = 2
    mu: float = 0.5
    tau: float = 1.0
    epsilon: float = 1e-8
    k: int = 10
    graph_kind: str = "knn-heat"
    max_iters: int = 50
    tol: float = 1e-6
    level_override: int | None = None

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("d must be at least 1")
        if not 0 <= self.mu <= 1:
            raise ValueError("mu must lie in [0, 1]")
        if self.tau <= 0:
            raise ValueError("tau must be positive")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if self.k < 1:
            raise ValueError("k must be at least 1")
        if self.graph_kind not in GRAPH_KINDS:
            raise ValueError(f"graph_kind must be one of {GRAPH_KINDS}")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if self.tol <= 0:
            raise ValueError("tol must be positive")


@dataclass(frozen=True)
class WarpResult:
    """Final embeddings, alignment and per-iteration loss values of a loop."""

    FX: np.ndarray
    FY: np.ndarray
    path: AlignmentPath
    W_xy: np.ndarray
    loss_trace: np.ndarray
    iterations: int
    converged: bool


def _as_series(x) -> TimeSeries:
    return x if isinstance(x, TimeSeries) else TimeSeries(np.asarray(x, dtype=float))


def _endpoint_matrix(n: int, m: int) -> np.ndarray:
    W = np.zeros((n, m))
    W[0, 0] = 1.0
    W[n - 1, m - 1] = 1.0
    return W


def _balanced_coupling(WX, WY, Wxy) -> np.ndarray:
    """Correspondence block rescaled so its total mass matches the intra mass.

    Without this, the endpoint-only initial correspondence (two entries
    against hundreds of intra edges) exerts no force on the joint embedding.
    Only the embedding steps use the balanced block; recorded losses keep
    the literal coupling.
    """
    total = Wxy.sum()
    if total <= 0:
        return Wxy
    return (WX.sum() + WY.sum()) / (2.0 * total) * Wxy


def _orient(FX, FY, Wxy) -> np.ndarray:
    """Flip Y-embedding columns whose correspondence-weighted correlation
    with X is negative.

    Spectral embeddings carry arbitrary per-column signs; a reflection
    leaves every intra-set term unchanged and the flip rule can only lower
    the coupling term, so this is a pure descent step.
    """
    score = np.einsum("ic,ij,jc->c", FX, Wxy, FY)
    signs = np.where(score < 0, -1.0, 1.0)
    return FY * signs


def _intra_weights(ts, cfg: WarpConfig) -> np.ndarray:
    A = _samples(ts)
    if cfg.graph_kind == "knn-heat":
        return heat_kernel_knn(A, min(cfg.k, len(A) - 1))
    if cfg.graph_kind == "low-rank":
        return low_rank_affinity(low_rank_reconstruct(A, cfg.tau))
    k0 = min(max(1, cfg.k), CHAIN_MAX_LAG, len(A) - 1)
    return chain_weights(A, k0)


def _sum_cross(FX, FY, Wxy) -> float:
    return float((cdist(FX, FY, "sqeuclidean") * Wxy).sum())


def _sum_intra(F, W) -> float:
    return float((cdist(F, F, "sqeuclidean") * W).sum())


def loss_wow(FX, FY, phiX, phiY, Wxy, WX, WY, mu: float) -> float:
    """Warping loss: (1-mu) intra-set terms plus mu coupling, with the
    embedding maps applied multiplicatively before evaluation."""
    GX = np.asarray(FX, float) @ np.asarray(phiX, float)
    GY = np.asarray(FY, float) @ np.asarray(phiY, float)
    Wxy = np.asarray(Wxy, float)
    if Wxy.shape != (len(GX), len(GY)):
        raise ValueError("correspondence shape does not match the embeddings")
    return float(
        (1 - mu) * (_sum_intra(GX, np.asarray(WX, float)) + _sum_intra(GY, np.asarray(WY, float)))
        + mu * _sum_cross(GX, GY, Wxy)
    )


def _warp_loss(FX, FY, Wxy, WX, WY, mu) -> float:
    return float(
        (1 - mu) * (_sum_intra(FX, WX) + _sum_intra(FY, WY)) + mu * _sum_cross(FX, FY, Wxy)
    )


def _initial_multiscale(W, cfg: WarpConfig) -> np.ndarray:
    tree = _embed.diffusion_tree(W, cfg.epsilon, TREE_LEVELS)
    level = cfg.level_override
    if level is None:
        level = _embed.select_level(tree.dims, cfg.d)
    elif not 0 <= level < tree.num_levels:
        raise ValueError(f"level_override {level} out of range for tree depth {tree.num_levels}")
    return _embed.reduce_level_coords(tree, level, cfg.d)


def _iterate(n, m, cfg: WarpConfig, init, update, loss_at) -> WarpResult:
    """Shared alternation: safeguarded embedding update, then DTW.

    ``update(FX, FY, Wxy) -> (FX', FY') | None`` proposes new embeddings for
    the current correspondence; ``loss_at(FX, FY, Wxy)`` evaluates the loop's
    loss.  A proposal is kept only when the loss at the current
    correspondence does not increase.
    """
    FX, FY = init
    Wxy = _endpoint_matrix(n, m)
    trace = []
    path = None
    prev_path = None
    converged = False
    iterations = 0
    for iterations in range(1, cfg.max_iters + 1):
        cand = update(FX, FY, Wxy)
        if cand is not None:
            FXc, FYc = cand
            FYc = _orient(FXc, FYc, Wxy)
            if FX is None or loss_at(FXc, FYc, Wxy) <= loss_at(FX, FY, Wxy):
                FX, FY = FXc, FYc
        path, _ = dtw_align(FX, FY)
        Wxy = path_to_matrix(path, n, m)
        trace.append(loss_at(FX, FY, Wxy))
        if prev_path is not None and path == prev_path:
            converged = True
        elif len(trace) >= 2 and abs(trace[-2] - trace[-1]) <= cfg.tol * max(abs(trace[-2]), 1e-30):
            converged = True
        prev_path = path
        if converged:
            break
    return WarpResult(
        FX=FX, FY=FY, path=path, W_xy=Wxy,
        loss_trace=np.asarray(trace), iterations=iterations, converged=converged,
    )


def wow(X: TimeSeries, Y: TimeSeries, cfg: WarpConfig = WarpConfig()) -> WarpResult:
    """Warping on wavelets.

    Each series is first embedded by multiscale eigenmaps (reduced to d
    dimensions at the selected tree level).  Every iteration couples the two
    current embeddings through the joint weight matrix, solves the multiscale
    alignment problem on them, applies the selected-level maps
    multiplicatively, and re-runs DTW in the updated space.
    """
    X = _as_series(X)
    Y = _as_series(Y)
    WX = _intra_weights(X, cfg)
    WY = _intra_weights(Y, cfg)
    FX0 = _initial_multiscale(WX, cfg)
    FY0 = _initial_multiscale(WY, cfg)

    def update(FX, FY, Wxy):
        n, m = len(FX), len(FY)
        Cb = cfg.mu * _balanced_coupling(WX, WY, Wxy)
        W = np.block([[(1 - cfg.mu) * WX, Cb], [Cb.T, (1 - cfg.mu) * WY]])
        deg = W.sum(axis=1)
        if (deg <= 0).any():
            return None
        L = np.diag(deg) - W
        Z = np.zeros((FX.shape[1] + FY.shape[1], n + m))
        Z[: FX.shape[1], :n] = FX.T
        Z[FX.shape[1]:, n:] = FY.T
        res = mma_solve(Z, L, np.diag(deg), p=FX.shape[1], epsilon=cfg.epsilon, max_levels=TREE_LEVELS)
        if cfg.level_override is not None:
            level = min(cfg.level_override, len(res.dims) - 1)
        else:
            level = _embed.select_level(res.dims, cfg.d)
        alpha, beta = res.alphas[level], res.betas[level]
        if alpha.shape[1] > cfg.d:
            joint = np.vstack([FX @ alpha, FY @ beta])
            _, _, Vt = np.linalg.svd(joint, full_matrices=False)
            alpha = alpha @ Vt[: cfg.d].T
            beta = beta @ Vt[: cfg.d].T
        return FX @ alpha, FY @ beta

    def loss_at(FX, FY, Wxy):
        return _warp_loss(FX, FY, Wxy, WX, WY, cfg.mu)

    return _iterate(X.n, Y.n, cfg, (FX0, FY0), update, loss_at)


def wamm(X: TimeSeries, Y: TimeSeries, cfg: WarpConfig = WarpConfig()) -> WarpResult:
    """Warping on mixed manifolds.

    The intra-set structure comes from the closed-form low-rank
    reconstructions of the raw data (fixed across iterations); each iteration
    re-embeds jointly by the low-rank alignment eigenproblem against the
    current correspondence, then warps.
    """
    X = _as_series(X)
    Y = _as_series(Y)
    ax, ay = _samples(X), _samples(Y)
    RX = low_rank_reconstruct(ax, cfg.tau)
    RY = low_rank_reconstruct(ay, cfg.tau)
    M = block_M(RX, RY)
    nx = len(ax)

    def mixed_loss(FX, FY, Wxy):
        F = np.vstack([FX, FY])
        L = correspondence_laplacian(Wxy)
        return float((1 - cfg.mu) * np.trace(F.T @ M @ F) + 2 * cfg.mu * np.trace(F.T @ L @ F))

    def update(FX, FY, Wxy):
        A = (1 - cfg.mu) * M + 2 * cfg.mu * correspondence_laplacian(Wxy)
        half = nx if nx == len(ay) else None
        F = _bottom_nonzero_eigvecs(A, cfg.d, "wamm", swap_half=half)
        return F[:nx], F[nx:]

    return _iterate(X.n, Y.n, cfg, (None, None), update, mixed_loss)


def curve_warp(X: TimeSeries, Y: TimeSeries, cfg: WarpConfig = WarpConfig(),
               two_step: bool = False, kernel: str = "unit") -> WarpResult:
    """Curve wrapping: temporal chain graphs regularize the joint embedding.

    The loss couples consecutive samples of each series (lags up to k0,
    clipped small) with the correspondence term, and equals the quadratic
    form of the joint chain Laplacian, verified at every embedding step.
    With ``two_step`` each series is embedded once from its own chain graph
    and DTW runs exactly once.
    """
    X = _as_series(X)
    Y = _as_series(Y)
    cfg = replace(cfg, graph_kind="chain")
    k0x = min(max(1, cfg.k), CHAIN_MAX_LAG, X.n - 1)
    k0y = min(max(1, cfg.k), CHAIN_MAX_LAG, Y.n - 1)
    WcX = chain_weights(X, k0x, kernel)
    WcY = chain_weights(Y, k0y, kernel)
    nx = X.n

    def chain_loss(FX, FY, Wxy):
        # literal sum form: single-count intra lags plus coupling
        ix = float((cdist(FX, FX, "sqeuclidean") * np.triu(WcX)).sum())
        iy = float((cdist(FY, FY, "sqeuclidean") * np.triu(WcY)).sum())
        return (1 - cfg.mu) * (ix + iy) + cfg.mu * _sum_cross(FX, FY, Wxy)

    def joint_laplacian(Wxy):
        W = np.block([[(1 - cfg.mu) * WcX, cfg.mu * Wxy], [cfg.mu * Wxy.T, (1 - cfg.mu) * WcY]])
        return np.diag(W.sum(axis=1)) - W

    def update(FX, FY, Wxy):
        L = joint_laplacian(Wxy)
        half = nx if nx == Y.n else None
        F = _bottom_nonzero_eigvecs(L, cfg.d, "curve_warp", swap_half=half)
        sum_form = chain_loss(F[:nx], F[nx:], Wxy)
        trace_form = float(np.trace(F.T @ L @ F))
        if abs(sum_form - trace_form) > 1e-8 * max(1.0, abs(sum_form)):
            raise RuntimeError("chain loss does not match its Laplacian quadratic form")
        return F[:nx], F[nx:]

    if two_step:
        FX = _bottom_nonzero_eigvecs(np.diag(WcX.sum(axis=1)) - WcX, cfg.d, "curve_warp")
        FY = _bottom_nonzero_eigvecs(np.diag(WcY.sum(axis=1)) - WcY, cfg.d, "curve_warp")
        path, _ = dtw_align(FX, FY)
        Wxy = path_to_matrix(path, X.n, Y.n)
        return WarpResult(FX=FX, FY=FY, path=path, W_xy=Wxy,
                          loss_trace=np.asarray([chain_loss(FX, FY, Wxy)]),
                          iterations=1, converged=True)

    return _iterate(X.n, Y.n, cfg, (None, None), update, chain_loss)


def manifold_warp_baseline(X: TimeSeries, Y: TimeSeries, cfg: WarpConfig = WarpConfig(),
                           variant: str = "nonlinear") -> WarpResult:
    """Single-scale manifold warping, for comparison against the multiscale loops.

    ``nonlinear`` re-embeds the joint graph by Laplacian eigenmaps each
    iteration, ``linear`` solves the joint locality-preserving projection on
    the raw features, and ``two-step`` embeds each series once and warps once.
    """
    X = _as_series(X)
    Y = _as_series(Y)
    if variant not in ("linear", "nonlinear", "two-step"):
        raise ValueError(f"unknown variant {variant!r}")
    base = cfg if cfg.graph_kind != "chain" else replace(cfg, graph_kind="knn-heat")
    WX = _intra_weights(X, base)
    WY = _intra_weights(Y, base)
    ax, ay = _samples(X), _samples(Y)
    nx = len(ax)

    def loss_at(FX, FY, Wxy):
        return _warp_loss(FX, FY, Wxy, WX, WY, cfg.mu)

    if variant == "two-step":
        FX = _embed.laplacian_eigenmaps(WX, cfg.d).coords
        FY = _embed.laplacian_eigenmaps(WY, cfg.d).coords
        path, _ = dtw_align(FX, FY)
        Wxy = path_to_matrix(path, X.n, Y.n)
        return WarpResult(FX=FX, FY=FY, path=path, W_xy=Wxy,
                          loss_trace=np.asarray([loss_at(FX, FY, Wxy)]),
                          iterations=1, converged=True)

    def joint_blocks(Wxy):
        Cb = cfg.mu * _balanced_coupling(WX, WY, Wxy)
        return np.block([[(1 - cfg.mu) * WX, Cb], [Cb.T, (1 - cfg.mu) * WY]])

    if variant == "nonlinear":
        def update(FX, FY, Wxy):
            # literal joint blocks: the normalized Laplacian misbehaves when
            # two endpoint edges carry a large share of the total mass
            W = np.block([[(1 - cfg.mu) * WX, cfg.mu * Wxy], [cfg.mu * Wxy.T, (1 - cfg.mu) * WY]])
            F = _embed.laplacian_eigenmaps(W, cfg.d).coords
            return F[:nx], F[nx:]
    else:
        p, q = ax.shape[1], ay.shape[1]
        Z = np.zeros((p + q, nx + len(ay)))
        Z[:p, :nx] = ax.T
        Z[p:, nx:] = ay.T

        def update(FX, FY, Wxy):
            W = joint_blocks(Wxy)
            deg = W.sum(axis=1)
            L = np.diag(deg) - W
            pairs = generalized_eig_pinv(Z, L, np.diag(deg))
            lam = np.array([val for _, val in pairs])
            tol = 1e-9 * max(np.abs(lam).max(), 1e-300)
            idx = np.nonzero(lam > tol)[0]
            if len(idx) < cfg.d:
                raise ValueError("joint projection has too few non-zero eigenvalues")
            G = np.stack([pairs[i][0] for i in idx[: cfg.d]], axis=1)
            return ax @ G[:p], ay @ G[p:]

    return _iterate(X.n, Y.n, cfg, (None, None), update, loss_at)


def save_warp_result(result: WarpResult, cfg: WarpConfig, out_dir) -> None:
    """Serialize a warp result: path, embeddings, loss trace and config echo."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    save_path_csv(result.path, out / "path.csv")
    np.savetxt(out / "FX.csv", result.FX, fmt="%.17g", delimiter=",")
    np.savetxt(out / "FY.csv", result.FY, fmt="%.17g", delimiter=",")
    np.savetxt(out / "loss_trace.csv", result.loss_trace, fmt="%.17g", delimiter=",")
    with open(out / "config.txt", "w", encoding="utf-8") as fh:
        for key in ("d", "mu", "tau", "epsilon", "k", "graph_kind", "max_iters", "tol", "level_override"):
            fh.write(f"{key}={getattr(cfg, key)}\n")
        fh.write(f"iterations={result.iterations}\n")
        fh.write(f"converged={result.converged}\n")
