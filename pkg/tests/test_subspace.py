import numpy as np
import pytest

from actsub import (
    FixedTracker,
    OjaConfig,
    OjaTracker,
    PeriodicPcaTracker,
    SubspaceBasis,
    covariance,
    drift,
    fixed_step,
    fro_norm,
    init_basis,
    make_rng,
    oja_step,
    periodic_pca_step,
    principal_angles,
    qr_orthonormalize,
    sym_eig_topr,
    tracker_step,
)


def random_basis(rng, d, r):
    return SubspaceBasis(qr_orthonormalize(rng.standard_normal((d, r))))


class TestCovariance:
    def test_identity_rows(self):
        got = covariance(np.eye(2))
        assert np.array_equal(got, np.array([[0.5, 0.0], [0.0, 0.5]]))

    def test_zero(self):
        assert np.array_equal(covariance(np.zeros((4, 3))), np.zeros((3, 3)))

    def test_matches_scalar_loop(self):
        rng = make_rng(0)
        x = rng.standard_normal((32, 8))
        got = covariance(x)
        want = np.zeros((8, 8))
        for i in range(8):
            for j in range(8):
                want[i, j] = sum(x[t, i] * x[t, j] for t in range(32)) / 32.0
        assert np.abs(got - want).max() < 1e-12

    def test_exactly_symmetric(self):
        rng = make_rng(1)
        c = covariance(rng.standard_normal((10, 6)))
        assert np.array_equal(c, c.T)


class TestInitBasis:
    def test_planted_two_dim_span(self):
        rng = make_rng(2)
        x = np.zeros((40, 5))
        x[:, :2] = rng.standard_normal((40, 2))
        basis = init_basis(x, 2)
        assert principal_angles(basis.matrix, np.eye(5)[:, :2]).max() < 1e-8
        assert basis.step == 0

    def test_full_rank_projector_is_identity(self):
        rng = make_rng(3)
        x = rng.standard_normal((20, 4))
        basis = init_basis(x, 4)
        assert fro_norm(basis.matrix @ basis.matrix.T - np.eye(4)) < 1e-8

    def test_single_row(self):
        x = np.zeros((1, 5))
        x[0, 2] = 1.0
        basis = init_basis(x, 1)
        assert np.abs(np.abs(basis.matrix[:, 0]) - np.eye(5)[:, 2]).max() < 1e-12

    def test_rank_too_large(self):
        with pytest.raises(ValueError, match="out of range"):
            init_basis(np.ones((3, 2)), 3)

    def test_zero_input_rejected(self):
        with pytest.raises(ValueError, match="all-zero"):
            init_basis(np.zeros((4, 3)), 1)


class TestOjaStep:
    def test_invariant_span_fixed_point(self):
        rng = make_rng(4)
        d, r = 8, 3
        basis = random_basis(rng, d, r)
        lam = np.diag([3.0, 2.0, 1.0])
        c = basis.matrix @ lam @ basis.matrix.T
        c = (c + c.T) / 2
        new_basis, transition = oja_step(basis, c, OjaConfig(gamma=0.1))
        assert fro_norm(new_basis.matrix - basis.matrix) < 1e-12
        assert fro_norm(transition.matrix - np.eye(r)) < 1e-12

    def test_zero_covariance_skipped(self):
        rng = make_rng(5)
        basis = random_basis(rng, 6, 2)
        new_basis, transition = oja_step(basis, np.zeros((6, 6)), OjaConfig(gamma=0.1))
        assert np.array_equal(new_basis.matrix, basis.matrix)
        assert np.array_equal(transition.matrix, np.eye(2))
        assert new_basis.step == basis.step + 1

    def test_gamma_zero_is_exact_identity(self):
        rng = make_rng(6)
        basis = random_basis(rng, 6, 2)
        c = covariance(rng.standard_normal((30, 6)))
        new_basis, transition = oja_step(basis, c, OjaConfig(gamma=0.0))
        assert np.array_equal(new_basis.matrix, basis.matrix)
        assert np.array_equal(transition.matrix, np.eye(2))

    def test_stationary_convergence_and_monotone_tail(self):
        d, r = 8, 2
        c = np.diag([4.0, 1.0] + [0.25] * (d - 2))
        target = np.eye(d)[:, :r]
        rng = make_rng(7)
        basis = random_basis(rng, d, r)
        cfg = OjaConfig(gamma=0.1)
        angles = []
        for _ in range(500):
            basis, _ = oja_step(basis, c, cfg)
            angles.append(principal_angles(basis.matrix, target).max())
        assert angles[-1] < 1e-3
        # non-increasing after the first 10 steps (up to roundoff)
        for prev, curr in zip(angles[10:], angles[11:]):
            assert curr <= prev + 1e-12

    def test_orthonormal_after_every_step(self):
        rng = make_rng(8)
        basis = random_basis(rng, 10, 3)
        cfg = OjaConfig(gamma=0.5)
        for _ in range(50):
            c = covariance(rng.standard_normal((8, 10)))
            basis, _ = oja_step(basis, c, cfg)
            assert fro_norm(basis.matrix.T @ basis.matrix - np.eye(3)) < 1e-8

    def test_scale_equivariance_bitwise_power_of_two(self):
        rng = make_rng(9)
        basis = random_basis(rng, 7, 2)
        c = covariance(rng.standard_normal((20, 7)))
        ref, t_ref = oja_step(basis, c, OjaConfig(gamma=0.1))
        for alpha in (0.5, 2.0, 1024.0):
            scaled, t_scaled = oja_step(basis, alpha * c, OjaConfig(gamma=0.1))
            assert np.array_equal(scaled.matrix, ref.matrix)
            assert np.array_equal(t_scaled.matrix, t_ref.matrix)

    def test_scale_equivariance_general_alpha(self):
        rng = make_rng(10)
        basis = random_basis(rng, 7, 2)
        c = covariance(rng.standard_normal((20, 7)))
        ref, _ = oja_step(basis, c, OjaConfig(gamma=0.1))
        for alpha in (3.7, 0.013, 2.9e5):
            scaled, _ = oja_step(basis, alpha * c, OjaConfig(gamma=0.1))
            assert np.abs(scaled.matrix - ref.matrix).max() < 1e-12

    def test_nan_covariance_rejected(self):
        rng = make_rng(11)
        basis = random_basis(rng, 4, 2)
        c = np.zeros((4, 4))
        c[1, 1] = np.nan
        with pytest.raises(ValueError, match="non-finite"):
            oja_step(basis, c, OjaConfig(gamma=0.1))

    def test_dimension_mismatch(self):
        rng = make_rng(12)
        basis = random_basis(rng, 4, 2)
        with pytest.raises(ValueError, match="ambient"):
            oja_step(basis, np.eye(5), OjaConfig(gamma=0.1))


class TestPeriodicPca:
    def test_interval_one_is_per_step_pca(self):
        rng = make_rng(13)
        basis = random_basis(rng, 6, 2)
        c = covariance(rng.standard_normal((40, 6)))
        new_basis, _ = periodic_pca_step(basis, c, interval=1, t=7)
        oracle = sym_eig_topr(c, 2).vectors
        assert fro_norm(new_basis.matrix - oracle) < 1e-12

    def test_off_schedule_keeps_basis(self):
        rng = make_rng(14)
        basis = random_basis(rng, 6, 2)
        c = covariance(rng.standard_normal((40, 6)))
        new_basis, transition = periodic_pca_step(basis, c, interval=10, t=7)
        assert np.array_equal(new_basis.matrix, basis.matrix)
        assert np.array_equal(transition.matrix, np.eye(2))

    def test_refresh_matches_eig_oracle(self):
        d, r = 8, 2
        c = np.diag([4.0, 1.0] + [0.25] * (d - 2))
        rng = make_rng(15)
        basis = random_basis(rng, d, r)
        new_basis, _ = periodic_pca_step(basis, c, interval=10, t=10)
        assert principal_angles(new_basis.matrix, np.eye(d)[:, :r]).max() < 1e-10


class TestFixedStep:
    def test_identity(self):
        rng = make_rng(16)
        basis = random_basis(rng, 5, 2)
        same, transition = fixed_step(basis)
        assert same is basis
        assert np.array_equal(transition.matrix, np.eye(2))
        assert drift(transition) == 0.0


class TestDrift:
    def test_identity_is_zero(self):
        assert drift(np.eye(4)) == 0.0

    def test_orthogonal_is_one(self):
        assert drift(np.zeros((3, 3))) == 1.0

    def test_partial_overlap(self):
        assert drift(np.diag([1.0, 0.0])) == pytest.approx(np.sqrt(0.5), abs=1e-12)

    def test_bounded_for_random_basis_pairs(self):
        rng = make_rng(17)
        for _ in range(20):
            a = qr_orthonormalize(rng.standard_normal((9, 3)))
            b = qr_orthonormalize(rng.standard_normal((9, 3)))
            value = drift(b.T @ a)
            assert 0.0 <= value <= 1.0

    def test_rotation_transparency(self):
        rng = make_rng(18)
        u = qr_orthonormalize(rng.standard_normal((8, 3)))
        rot = qr_orthonormalize(rng.standard_normal((3, 3)))
        u_new = u @ rot
        transition = u_new.T @ u
        assert np.abs(transition - rot.T).max() < 1e-12
        assert drift(transition) < 1e-8

    def test_zero_iff_same_span(self):
        rng = make_rng(19)
        u = qr_orthonormalize(rng.standard_normal((10, 4)))
        rot = qr_orthonormalize(rng.standard_normal((4, 4)))
        same_span = u @ rot
        assert drift(same_span.T @ u) < 1e-8
        proj_gap = fro_norm(same_span @ same_span.T - u @ u.T)
        assert proj_gap < 1e-8


class TestTrackerDispatch:
    @pytest.mark.parametrize(
        "kind",
        [
            OjaTracker(OjaConfig(gamma=0.1)),
            PeriodicPcaTracker(interval=3),
            FixedTracker(),
        ],
        ids=["oja", "pca", "fixed"],
    )
    def test_orthonormality_invariant(self, kind):
        rng = make_rng(20)
        basis = random_basis(rng, 8, 3)
        for t in range(1, 30):
            c = covariance(rng.standard_normal((16, 8)))
            basis, transition, gamma_eff = tracker_step(kind, basis, c, t)
            assert fro_norm(basis.matrix.T @ basis.matrix - np.eye(3)) < 1e-8
            assert 0.0 <= drift(transition) <= 1.0

    def test_transition_singular_values_bounded(self):
        rng = make_rng(21)
        basis = random_basis(rng, 8, 3)
        kind = OjaTracker(OjaConfig(gamma=0.8))
        for t in range(1, 20):
            c = covariance(rng.standard_normal((16, 8)))
            basis, transition, _ = tracker_step(kind, basis, c, t)
            sv = np.linalg.svd(transition.matrix, compute_uv=False)
            assert sv.max() <= 1.0 + 1e-8

    def test_gamma_eff_reported(self):
        rng = make_rng(22)
        basis = random_basis(rng, 6, 2)
        c = covariance(rng.standard_normal((30, 6)))
        _, _, eff = tracker_step(OjaTracker(OjaConfig(gamma=0.1)), basis, c, 1)
        assert eff == pytest.approx(0.1 / fro_norm(c))
        _, _, eff_fixed = tracker_step(FixedTracker(), basis, c, 1)
        assert eff_fixed == 0.0


class TestValidation:
    def test_negative_gamma_rejected(self):
        with pytest.raises(ValueError, match="gamma"):
            OjaConfig(gamma=-0.1)

    def test_bad_interval_rejected(self):
        with pytest.raises(ValueError, match="interval"):
            PeriodicPcaTracker(interval=0)

    def test_bad_norm_kind_rejected(self):
        with pytest.raises(ValueError, match="norm_kind"):
            OjaConfig(gamma=0.1, norm_kind="nuclear")
