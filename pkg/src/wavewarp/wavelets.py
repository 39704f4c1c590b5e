"""Diffusion-wavelet trees.

A tree is built by alternating a rank-revealing QR of the current compressed
operator with a squaring step carried out entirely in the compressed basis,
yielding dyadic powers T^(2^j) represented on ever-smaller scaling-function
bases.  Extended bases express any level's scaling functions in the finest
coordinates; vectors transport between scales by multiplying with them.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

_ORTHO_TOL = 1e-10
_NORM_SLACK = 1e-8


@dataclass(frozen=True)
class DwtLevel:
    """One tree level: its local basis and the compressed operator.

    ``basis_local`` expresses this level's scaling functions on the previous
    level's basis (for level 0 it is the initial basis itself);
    ``op_compressed`` is T^(2^level) represented on this level's basis.
    """

    basis_local: np.ndarray
    op_compressed: np.ndarray


@dataclass(frozen=True)
class WaveletTree:
    levels: tuple[DwtLevel, ...]
    epsilon: float
    max_levels: int

    @property
    def num_levels(self) -> int:
        return len(self.levels)

    @property
    def dims(self) -> list[int]:
        """Basis sizes p_j per level; non-increasing by construction."""
        return [lvl.op_compressed.shape[0] for lvl in self.levels]


def _spectral_norm(A: np.ndarray) -> float:
    if A.size == 0:
        return 0.0
    return float(np.linalg.norm(A, 2))


def rank_revealing_qr(A, epsilon: float):
    """Column-pivoted QR truncated at the epsilon-numerical rank.

    Returns (Q, R) with orthonormal Q (within 1e-12), coefficients R in the
    original column order, and the guarantee |A - Q R|_2 <= epsilon |A|_2.
    The number of columns of Q is the smallest rank achieving that bound,
    which for well-separated spectra equals the count of singular values
    above epsilon * sigma_max.  A zero matrix yields a zero-column Q.
    """
    A = np.asarray(A, dtype=float)
    if A.ndim != 2:
        raise ValueError("A must be a matrix")
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    if not np.all(np.isfinite(A)):
        raise ValueError("A must be finite")
    Q, R, piv = scipy.linalg.qr(A, mode="economic", pivoting=True)
    thresh = epsilon * _spectral_norm(A)

    # smallest cut r with |R[r:, :]|_2 <= thresh; that trailing norm is
    # exactly the truncation error and is non-increasing in r
    def trailing(r):
        return _spectral_norm(R[r:, :])

    lo, hi = 0, R.shape[0]
    while lo < hi:
        mid = (lo + hi) // 2
        if trailing(mid) <= thresh:
            hi = mid
        else:
            lo = mid + 1
    r = lo
    inv = np.argsort(piv)
    return Q[:, :r].copy(), R[:r, :][:, inv].copy()


def build_dwt(T, phi0=None, epsilon: float = 1e-8, max_levels: int = 10) -> WaveletTree:
    """Construct a diffusion-wavelet tree for an operator with |T|_2 <= 1.

    Level j stores T^(2^j) compressed onto its scaling-function basis; the
    recurrence squares the QR coefficients in the reduced basis and never
    powers the original matrix.  Construction stops after ``max_levels``
    squaring steps or as soon as the compressed operator is 1x1 or empty.
    """
    T = np.asarray(T, dtype=float)
    if T.ndim != 2 or T.shape[0] != T.shape[1]:
        raise ValueError("T must be square")
    norm = _spectral_norm(T)
    if norm > 1.0 + _NORM_SLACK:
        raise ValueError(
            f"operator norm {norm:.6g} exceeds 1; dyadic powers would diverge"
        )
    n = T.shape[0]
    if phi0 is None:
        phi0 = np.eye(n)
    else:
        phi0 = np.asarray(phi0, dtype=float)
        if phi0.shape[0] != n:
            raise ValueError("phi0 must have one row per state of T")
        gram = phi0.T @ phi0
        if not np.allclose(gram, np.eye(phi0.shape[1]), atol=_ORTHO_TOL):
            raise ValueError("phi0 must have orthonormal columns")
    if max_levels < 0:
        raise ValueError("max_levels must be non-negative")

    levels = [DwtLevel(basis_local=phi0, op_compressed=phi0.T @ T @ phi0)]
    for _ in range(max_levels):
        op = levels[-1].op_compressed
        if op.shape[0] <= 1:
            break
        Q, R = rank_revealing_qr(op, epsilon)
        if Q.shape[1] == 0:
            break
        core = R @ Q
        levels.append(DwtLevel(basis_local=Q, op_compressed=core @ core))
    return WaveletTree(levels=tuple(levels), epsilon=float(epsilon), max_levels=int(max_levels))


def extended_basis(tree: WaveletTree, level: int) -> np.ndarray:
    """Scaling functions of ``level`` expressed on the finest-scale basis.

    The product of the per-level local bases down to level 0; its columns
    stay orthonormal because every factor has orthonormal columns.
    """
    if not 0 <= level < tree.num_levels:
        raise ValueError(f"level {level} out of range (tree has {tree.num_levels})")
    basis = tree.levels[0].basis_local
    for j in range(1, level + 1):
        basis = basis @ tree.levels[j].basis_local
    return basis


def transport_vector(tree: WaveletTree, v, level: int, direction: str = "to-finest") -> np.ndarray:
    """Move coefficient vectors between a tree level and the finest scale.

    ``to-finest`` extends level coefficients by the extended basis;
    ``to-level`` compresses a finest-scale vector by its transpose (an
    orthogonal projection onto the level's span followed by coordinates).
    """
    v = np.asarray(v, dtype=float)
    basis = extended_basis(tree, level)
    if direction == "to-finest":
        if v.shape[0] != basis.shape[1]:
            raise ValueError(
                f"vector length {v.shape[0]} does not match level dimension {basis.shape[1]}"
            )
        return basis @ v
    if direction == "to-level":
        if v.shape[0] != basis.shape[0]:
            raise ValueError(
                f"vector length {v.shape[0]} does not match finest dimension {basis.shape[0]}"
            )
        return basis.T @ v
    raise ValueError(f"unknown direction {direction!r}")


def dump_tree(tree: WaveletTree, out_dir) -> None:
    """Write per-level operators, bases and log-magnitude grids as CSV."""
    from pathlib import Path

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "manifest.csv", "w", encoding="utf-8") as fh:
        fh.write("level,dim\n")
        for j, dim in enumerate(tree.dims):
            fh.write(f"{j},{dim}\n")
    with open(out / "tree_config.txt", "w", encoding="utf-8") as fh:
        fh.write(f"epsilon={tree.epsilon:.17g}\n")
        fh.write(f"max_levels={tree.max_levels}\n")
    for j, lvl in enumerate(tree.levels):
        np.savetxt(out / f"operator_{j}.csv", lvl.op_compressed, fmt="%.17g", delimiter=",")
        np.savetxt(out / f"basis_{j}.csv", lvl.basis_local, fmt="%.17g", delimiter=",")
        logmag = np.log10(np.abs(lvl.op_compressed) + 1e-16)
        np.savetxt(out / f"operator_log10_{j}.csv", logmag, fmt="%.17g", delimiter=",")
