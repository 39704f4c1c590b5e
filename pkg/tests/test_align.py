import numpy as np
import pytest
import scipy.linalg

from wavewarp.align import generalized_eig_pinv, loss_ma, lra, mma
from wavewarp.graph import (
    block_M,
    correspondence_laplacian,
    heat_kernel_knn,
    low_rank_reconstruct,
)

from oracles import random_correspondence_path


def residual(Z, L, D, gamma, lam):
    A = Z @ L @ Z.T
    B = Z @ D @ Z.T
    return np.linalg.norm(A @ gamma - lam * B @ gamma)


def random_joint_system(seed, deficient=False):
    rng = np.random.default_rng(seed)
    p = int(rng.integers(3, 7))
    n = int(rng.integers(p + 2, 15))
    Z = rng.standard_normal((p, n))
    if deficient:
        Z[-1] = Z[0] + Z[1]  # dependent feature row: Z D Z^T loses rank
    L_half = rng.standard_normal((n, n))
    L = L_half @ L_half.T
    D = np.diag(rng.uniform(0.5, 2.0, n))
    return Z, L, D


class TestGeneralizedEigPinv:
    def test_identity_gram_matches_plain_eigenproblem(self):
        rng = np.random.default_rng(0)
        Z = np.linalg.qr(rng.standard_normal((5, 9)).T)[0].T  # Z Z^T = I
        L_half = rng.standard_normal((9, 9))
        L = L_half @ L_half.T
        pairs = generalized_eig_pinv(Z, L, np.eye(9))
        A = Z @ L @ Z.T
        lam_ref = np.linalg.eigvalsh(0.5 * (A + A.T))
        lam = np.array([v for _, v in pairs])
        np.testing.assert_allclose(lam, lam_ref, atol=1e-10)

    def test_residuals_full_rank(self):
        for seed in range(10):
            Z, L, D = random_joint_system(seed)
            scale = np.linalg.norm(Z @ L @ Z.T, 2)
            for gamma, lam in generalized_eig_pinv(Z, L, D):
                assert residual(Z, L, D, gamma, lam) <= 1e-8 * max(1.0, scale)

    def test_residuals_rank_deficient(self):
        for seed in range(10):
            Z, L, D = random_joint_system(seed, deficient=True)
            scale = np.linalg.norm(Z @ L @ Z.T, 2)
            for gamma, lam in generalized_eig_pinv(Z, L, D):
                assert residual(Z, L, D, gamma, lam) <= 1e-8 * max(1.0, scale)

    def test_sorted_ascending(self):
        Z, L, D = random_joint_system(3)
        lam = [v for _, v in generalized_eig_pinv(Z, L, D)]
        assert lam == sorted(lam)


class TestMma:
    def test_identical_inputs_symmetric_maps_at_alignment_level(self):
        rng = np.random.default_rng(1)
        X = rng.standard_normal((14, 3))
        C = np.eye(14)
        res = mma(X, X, C, mu=0.5, epsilon=1e-8, max_levels=6, k=4)
        # at coupling-dominated (coarse) levels the retained span is swap
        # symmetric, so the two mapping blocks coincide
        level = max(j for j, d in enumerate(res.dims) if d >= 2)
        a, b = res.alphas[level], res.betas[level]
        assert np.linalg.norm(a - b) <= 1e-6 * max(1.0, np.linalg.norm(a))
        emb_x = X @ a
        emb_y = X @ b
        np.testing.assert_allclose(emb_x, emb_y, atol=1e-6)

    def test_level_dims_nonincreasing(self):
        rng = np.random.default_rng(2)
        X = rng.standard_normal((12, 4))
        Y = rng.standard_normal((10, 3))
        C = random_correspondence_path(12, 10, rng)
        res = mma(X, Y, C, mu=0.5, epsilon=1e-6, max_levels=6, k=4)
        assert all(a >= b for a, b in zip(res.dims, res.dims[1:]))
        for a, b, d in zip(res.alphas, res.betas, res.dims):
            assert a.shape == (4, d) and b.shape == (3, d)

    def test_subspace_matches_generalized_eigensolve(self):
        # the acceptance suite runs the full 20-instance sweep; this is a
        # single-instance smoke version of the same comparison
        from wavewarp.align import _factor_parts, mma_solve
        from wavewarp.graph import joint_weight

        rng = np.random.default_rng(3)
        X = rng.standard_normal((12, 4))
        Y = rng.standard_normal((13, 4))
        C = random_correspondence_path(12, 13, rng)
        WX = heat_kernel_knn(X, 4)
        WY = heat_kernel_knn(Y, 4)
        jg = joint_weight(WX, WY, C, 0.5, x=X, y=Y)
        res = mma_solve(jg.Z, jg.laplacian, jg.degree, p=4, epsilon=1e-8, max_levels=8)
        A = jg.Z @ jg.laplacian @ jg.Z.T
        B = jg.Z @ jg.degree @ jg.Z.T
        lam, G = scipy.linalg.eigh(A, B)
        _, FtP = _factor_parts(B)
        T = FtP.T @ A @ FtP
        tl = np.linalg.eigvalsh(0.5 * (T + T.T))
        inv = np.where(tl > 1e-9 * tl.max(), 1.0 / np.where(tl > 1e-9 * tl.max(), tl, 1.0), 0.0)
        desc = np.sort(inv)[::-1]
        desc /= desc[0]
        r_nz = int((desc > 0).sum())
        asserted = 0
        for lvl in range(1, res.tree.num_levels):
            dk = res.dims[lvl]
            if dk >= r_nz:
                continue
            powered = desc ** (2**lvl)
            if powered[dk - 1] - powered[dk] < 1e-6:
                continue
            Q1, _ = np.linalg.qr(np.vstack([res.alphas[lvl], res.betas[lvl]]))
            idx = np.nonzero(lam > 1e-9 * np.abs(lam).max())[0][:dk]
            Q2, _ = np.linalg.qr(G[:, idx])
            assert np.linalg.norm(Q1 @ Q1.T - Q2 @ Q2.T, 2) <= 1e-6
            asserted += 1
        assert asserted >= 1


class TestLra:
    def _instance(self, seed=0, nx=9, ny=11):
        rng = np.random.default_rng(seed)
        X = rng.standard_normal((nx, 3))
        Y = rng.standard_normal((ny, 4))
        C = random_correspondence_path(nx, ny, rng)
        return X, Y, C

    def test_mu_zero_is_reconstruction_eigenproblem(self):
        X, Y, C = self._instance()
        emb = lra(X, Y, C, mu=0.0, d=2, tau=1.0)
        M = block_M(low_rank_reconstruct(X, 1.0), low_rank_reconstruct(Y, 1.0))
        lam, V = np.linalg.eigh(M)
        idx = np.nonzero(lam > 1e-9 * lam.max())[0][:2]
        F = np.vstack([emb.FX, emb.FY])
        Q1, _ = np.linalg.qr(F)
        Q2, _ = np.linalg.qr(V[:, idx])
        np.testing.assert_allclose(Q1 @ Q1.T, Q2 @ Q2.T, atol=1e-8)

    def test_orthonormal_embedding(self):
        X, Y, C = self._instance(1)
        emb = lra(X, Y, C, mu=0.5, d=3, tau=1.0)
        F = np.vstack([emb.FX, emb.FY])
        np.testing.assert_allclose(F.T @ F, np.eye(3), atol=1e-8)

    def test_beats_random_orthonormal_subspaces(self):
        X, Y, C = self._instance(2)
        mu, tau, d = 0.4, 1.0, 2
        emb = lra(X, Y, C, mu=mu, d=d, tau=tau)
        M = block_M(low_rank_reconstruct(X, tau), low_rank_reconstruct(Y, tau))
        Lc = correspondence_laplacian(C)

        def eq14_loss(F):
            return (1 - mu) * np.trace(F.T @ M @ F) + 2 * mu * np.trace(F.T @ Lc @ F)

        ours = eq14_loss(np.vstack([emb.FX, emb.FY]))
        rng = np.random.default_rng(3)
        n = len(X) + len(Y)
        for _ in range(200):
            Q, _ = np.linalg.qr(rng.standard_normal((n, d)))
            assert ours <= eq14_loss(Q) + 1e-9

    def test_mu_out_of_range(self):
        X, Y, C = self._instance(3)
        with pytest.raises(ValueError):
            lra(X, Y, C, mu=1.5, d=2, tau=1.0)

    def test_eq18_matrix_psd(self):
        X, Y, C = self._instance(4)
        for mu in (0.0, 0.3, 0.8, 1.0):
            M = block_M(low_rank_reconstruct(X, 1.0), low_rank_reconstruct(Y, 1.0))
            A = (1 - mu) * M + 2 * mu * correspondence_laplacian(C)
            assert np.linalg.eigvalsh(A).min() >= -1e-10


class TestLossMa:
    def test_constant_embeddings_zero(self):
        FX = np.ones((4, 2))
        FY = np.ones((5, 2))
        C = np.ones((4, 5))
        WX = np.ones((4, 4))
        WY = np.ones((5, 5))
        assert loss_ma(FX, FY, C, WX, WY, 0.5) == 0.0

    def test_zero_coupling_drops_cross_term(self):
        rng = np.random.default_rng(5)
        FX = rng.standard_normal((4, 2))
        FY = rng.standard_normal((5, 2))
        WX = np.abs(rng.standard_normal((4, 4)))
        WX = 0.5 * (WX + WX.T)
        WY = np.abs(rng.standard_normal((5, 5)))
        WY = 0.5 * (WY + WY.T)
        a = loss_ma(FX, FY, np.zeros((4, 5)), WX, WY, 0.7)
        b = loss_ma(FX, FY, np.zeros((4, 5)), WX, WY, 0.0)
        assert a == pytest.approx(b * 0.3 / 1.0, rel=1e-12)

    def test_matches_trace_form(self):
        # with the intra terms replaced by the low-rank reconstruction
        # penalty, the sum form equals the trace form exactly
        rng = np.random.default_rng(6)
        nx, ny, d = 6, 7, 3
        F = rng.standard_normal((nx + ny, d))
        C = random_correspondence_path(nx, ny, rng)
        mu = 0.35
        RX = low_rank_reconstruct(rng.standard_normal((nx, 3)), 1.0)
        RY = low_rank_reconstruct(rng.standard_normal((ny, 3)), 1.0)
        M = block_M(RX, RY)
        Lc = correspondence_laplacian(C)
        R = np.zeros((nx + ny, nx + ny))
        R[:nx, :nx] = RX.R
        R[nx:, nx:] = RY.R
        cross = sum(
            C[i, j] * ((F[i] - F[nx + j]) ** 2).sum()
            for i in range(nx)
            for j in range(ny)
        )
        sum_form = (1 - mu) * np.linalg.norm(F - R @ F, "fro") ** 2 + 2 * mu * cross
        trace_form = (1 - mu) * np.trace(F.T @ M @ F) + 2 * mu * np.trace(F.T @ Lc @ F)
        assert sum_form == pytest.approx(trace_form, rel=1e-10)

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            loss_ma(np.ones((3, 2)), np.ones((4, 2)), np.ones((3, 3)), np.ones((3, 3)), np.ones((4, 4)), 0.5)
