import numpy as np
import pytest

from actsub import (
    fro_norm,
    make_rng,
    matmul,
    qr_orthonormalize,
    spectral_norm_estimate,
    sym_eig_topr,
)


def naive_matmul(a, b):
    n, k = a.shape
    m = b.shape[1]
    out = np.zeros((n, m))
    for i in range(n):
        for j in range(m):
            acc = 0.0
            for p in range(k):
                acc += a[i, p] * b[p, j]
            out[i, j] = acc
    return out


class TestMatmul:
    def test_identity(self):
        rng = make_rng(0)
        b = rng.standard_normal((2, 5))
        assert np.array_equal(matmul(np.eye(2), b), b)

    def test_hand_checked_2x2(self):
        got = matmul(np.array([[1.0, 2.0], [3.0, 4.0]]), np.array([[0.0], [1.0]]))
        assert np.array_equal(got, np.array([[2.0], [4.0]]))

    def test_matches_naive_triple_loop(self):
        rng = make_rng(1)
        a = rng.standard_normal((7, 5))
        b = rng.standard_normal((5, 3))
        assert np.abs(matmul(a, b) - naive_matmul(a, b)).max() < 1e-12

    def test_dimension_mismatch_names_both_shapes(self):
        with pytest.raises(ValueError, match=r"7x5.*4x3"):
            matmul(np.zeros((7, 5)), np.zeros((4, 3)))

    def test_associativity(self):
        rng = make_rng(2)
        for _ in range(5):
            a = rng.standard_normal((6, 4))
            b = rng.standard_normal((4, 5))
            c = rng.standard_normal((5, 3))
            left = matmul(matmul(a, b), c)
            right = matmul(a, matmul(b, c))
            assert fro_norm(left - right) < 1e-10 * max(fro_norm(left), 1.0)

    def test_bitwise_deterministic(self):
        rng = make_rng(3)
        a = rng.standard_normal((8, 8))
        b = rng.standard_normal((8, 8))
        assert np.array_equal(matmul(a, b), matmul(a, b))


def mgs(a):
    a = a.copy()
    d, r = a.shape
    q = np.zeros((d, r))
    for j in range(r):
        v = a[:, j].copy()
        for i in range(j):
            v -= (q[:, i] @ v) * q[:, i]
        q[:, j] = v / np.sqrt(v @ v)
    return q


class TestQrOrthonormalize:
    def test_identity_fixed_point(self):
        assert np.allclose(qr_orthonormalize(np.eye(3)), np.eye(3), atol=1e-15)

    def test_column_rescaling(self):
        a = np.array([[2.0, 0.0], [0.0, 3.0], [0.0, 0.0]])
        expect = np.array([[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]])
        assert np.allclose(qr_orthonormalize(a), expect, atol=1e-15)

    def test_contract_random(self):
        rng = make_rng(4)
        a = rng.standard_normal((16, 4))
        q = qr_orthonormalize(a)
        assert fro_norm(q.T @ q - np.eye(4)) < 1e-10
        ref = mgs(a)
        assert fro_norm(q @ q.T - ref @ ref.T) < 1e-8

    def test_span_preservation_property(self):
        rng = make_rng(5)
        for rows, cols in ((10, 3), (40, 8), (6, 6)):
            a = rng.standard_normal((rows, cols))
            q = qr_orthonormalize(a)
            assert fro_norm(q.T @ q - np.eye(cols)) < 1e-10
            assert fro_norm(q @ (q.T @ a) - a) < 1e-8 * fro_norm(a)

    def test_rank_deficient_names_column(self):
        a = np.zeros((5, 3))
        a[:, 0] = 1.0
        a[:, 1] = 2.0  # dependent on column 0
        a[2, 2] = 1.0
        with pytest.raises(ValueError, match="column 1"):
            qr_orthonormalize(a)

    def test_wide_matrix_rejected(self):
        with pytest.raises(ValueError, match="rows >= cols"):
            qr_orthonormalize(np.zeros((2, 3)))

    def test_deterministic_sign_convention(self):
        rng = make_rng(6)
        a = rng.standard_normal((12, 3))
        q1 = qr_orthonormalize(a)
        q2 = qr_orthonormalize(a.copy())
        assert np.array_equal(q1, q2)


def power_iteration(c, iters=20000, tol=1e-15):
    rng = make_rng(99)
    v = rng.standard_normal(c.shape[0])
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(iters):
        w = c @ v
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return 0.0
        v = w / nw
        new = float(v @ c @ v)
        if abs(new - lam) < tol * max(1.0, abs(new)):
            return new
        lam = new
    return lam


class TestSymEig:
    def test_diagonal(self):
        pair = sym_eig_topr(np.diag([4.0, 1.0, 0.25]), 2)
        assert np.allclose(pair.values, [4.0, 1.0])
        assert np.allclose(np.abs(pair.vectors), np.eye(3)[:, :2])
        # sign convention: leading entries nonnegative
        assert pair.vectors[0, 0] >= 0 and pair.vectors[1, 1] >= 0

    def test_identity_degenerate_is_deterministic(self):
        p1 = sym_eig_topr(np.eye(3), 1)
        p2 = sym_eig_topr(np.eye(3), 1)
        assert p1.values[0] == pytest.approx(1.0, abs=1e-14)
        assert np.array_equal(p1.vectors, p2.vectors)
        assert abs(np.linalg.norm(p1.vectors[:, 0]) - 1.0) < 1e-12
        lead = np.argmax(np.abs(p1.vectors[:, 0]))
        assert p1.vectors[lead, 0] >= 0

    def test_gram_matrix_vs_power_iteration(self):
        rng = make_rng(7)
        b = rng.standard_normal((8, 3))
        c = b @ b.T
        pair = sym_eig_topr(c, 3)
        for i in range(3):
            resid = np.linalg.norm(c @ pair.vectors[:, i] - pair.values[i] * pair.vectors[:, i])
            assert resid <= 1e-8 * (1.0 + abs(pair.values[i]))
        top = power_iteration(c)
        assert abs(pair.values[0] - top) <= 1e-6 * abs(top)
        sv = np.linalg.svd(b, compute_uv=False)
        assert np.allclose(pair.values, sv**2, rtol=1e-6)

    def test_reconstruction_recovery(self):
        rng = make_rng(8)
        d = 10
        q = qr_orthonormalize(rng.standard_normal((d, d)))
        lam = np.sort(rng.uniform(0.5, 5.0, d))[::-1]
        c = (q * lam) @ q.T
        pair = sym_eig_topr((c + c.T) / 2, 4)
        assert np.allclose(pair.values, lam[:4], rtol=1e-8)

    def test_asymmetric_rejected_with_value(self):
        c = np.array([[1.0, 2.0], [0.0, 1.0]])
        with pytest.raises(ValueError, match="asymmetry"):
            sym_eig_topr(c, 1)

    def test_rank_out_of_range(self):
        with pytest.raises(ValueError, match="out of range"):
            sym_eig_topr(np.eye(3), 4)


class TestFroNorm:
    def test_three_four_five(self):
        assert fro_norm(np.diag([3.0, 4.0])) == pytest.approx(5.0, abs=1e-15)

    def test_zero(self):
        assert fro_norm(np.zeros((4, 2))) == 0.0

    def test_matches_scalar_loop(self):
        rng = make_rng(9)
        a = rng.standard_normal((6, 6))
        acc = 0.0
        for i in range(6):
            for j in range(6):
                acc += a[i, j] ** 2
        assert abs(fro_norm(a) - np.sqrt(acc)) < 1e-13


class TestSpectralEstimate:
    def test_zero_matrix(self):
        assert spectral_norm_estimate(np.zeros((5, 5))) == 0.0

    def test_close_to_top_eigenvalue(self):
        rng = make_rng(10)
        b = rng.standard_normal((12, 5))
        c = b @ b.T
        top = float(np.linalg.eigvalsh(c).max())
        assert spectral_norm_estimate(c) == pytest.approx(top, rel=1e-6)


class TestRng:
    def test_same_seed_same_stream(self):
        a = make_rng(42).standard_normal((4, 4))
        b = make_rng(42).standard_normal((4, 4))
        assert np.array_equal(a, b)

    def test_different_seed_differs(self):
        a = make_rng(42).standard_normal((4, 4))
        b = make_rng(43).standard_normal((4, 4))
        assert not np.array_equal(a, b)
