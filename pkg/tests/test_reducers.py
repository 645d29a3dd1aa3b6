import numpy as np
import pytest
import scipy.linalg

from randgsc.linalg import principal_angles
from randgsc.reducers import (
    Method,
    ReducerSpec,
    SketchMatrix,
    clairvoyant_psi,
    make_column_select_sketch,
    make_gaussian_sketch,
    pc_psi,
    sketch_psi,
)
from randgsc.scenario import CovarianceModel, RngStream, SoIBasis, orthonormal_complement


def stream(*path):
    return RngStream(5, path)


class TestGaussianSketch:
    def test_shape(self):
        s = make_gaussian_sketch(20, 10, stream(1))
        assert s.omega.shape == (20, 10)
        assert s.kind == "gaussian" and s.selected_indices is None

    def test_square_invertible(self):
        s = make_gaussian_sketch(5, 5, stream(2))
        assert abs(np.linalg.det(s.omega)) > 1e-8

    def test_entry_variance(self):
        s = make_gaussian_sketch(1000, 100, stream(3))
        assert abs(np.var(s.omega) - 1) < 0.02
        assert abs(np.mean(s.omega)) < 0.01

    def test_r_too_large(self):
        with pytest.raises(ValueError):
            make_gaussian_sketch(3, 4, stream(4))


class TestColumnSelect:
    def test_full_is_permutation(self):
        s = make_column_select_sketch(4, 4, stream(1))
        assert np.array_equal(np.sort(s.omega.sum(0)), np.ones(4))
        assert np.array_equal(np.sort(s.omega.sum(1)), np.ones(4))

    def test_structure(self):
        s = make_column_select_sketch(20, 10, stream(2))
        assert s.omega.sum() == 10
        assert np.all(s.omega.sum(0) == 1)
        assert len(set(s.selected_indices)) == 10
        for col, i in enumerate(s.selected_indices):
            assert s.omega[i, col] == 1.0
        np.testing.assert_array_equal(s.omega.T @ s.omega, np.eye(10))

    def test_uniform_selection(self):
        counts = np.zeros(6)
        for t in range(3000):
            counts[list(make_column_select_sketch(6, 2, stream(3, t)).selected_indices)] += 1
        np.testing.assert_allclose(counts / 3000, 2 / 6, atol=0.03)

    def test_r_too_large(self):
        with pytest.raises(ValueError):
            make_column_select_sketch(3, 4, stream(4))


class TestSketchPsi:
    def test_identity_sketch(self, rng):
        z = rng.standard_normal((9, 4))
        psi = sketch_psi(z, SketchMatrix(np.eye(4), "gaussian"))
        np.testing.assert_array_equal(psi.psi, z)

    def test_column_pick(self, rng):
        z = rng.standard_normal((6, 3))
        omega = np.zeros((3, 2))
        omega[2, 0] = omega[0, 1] = 1
        psi = sketch_psi(z, SketchMatrix(omega, "selection", (2, 0)))
        np.testing.assert_array_equal(psi.psi, z[:, [2, 0]])
        assert psi.spec.method is Method.SELECT

    def test_naive_product(self, rng):
        z = rng.standard_normal((9, 6))
        sk = make_gaussian_sketch(6, 4, stream(7))
        psi = sketch_psi(z, sk).psi
        naive = np.zeros((9, 4))
        for i in range(9):
            for c in range(4):
                for t in range(6):
                    naive[i, c] += z[i, t] * sk.omega[t, c]
        np.testing.assert_allclose(psi, naive, atol=1e-12)

    def test_selection_equals_product(self, rng):
        z = rng.standard_normal((8, 5))
        sk = make_column_select_sketch(5, 3, stream(8))
        np.testing.assert_array_equal(sketch_psi(z, sk).psi, z @ sk.omega)

    def test_gaussian_full_range(self, rng):
        # R >= rank(Z): range(Z Omega) = range(Z)
        for t in range(10):
            z = rng.standard_normal((30, 3)) @ rng.standard_normal((3, 8))
            psi = sketch_psi(z, make_gaussian_sketch(8, 4, stream(9, t))).psi
            assert np.max(principal_angles(psi, z[:, :3] if np.linalg.matrix_rank(z[:, :3]) == 3 else z)) < 1e-8

    def test_mismatch(self, rng):
        with pytest.raises(ValueError):
            sketch_psi(rng.standard_normal((5, 3)), make_gaussian_sketch(4, 2, stream(1)))


class TestPC:
    def test_orthogonal_columns(self):
        q = scipy.linalg.qr(np.random.default_rng(0).standard_normal((8, 3)), mode="economic")[0]
        z = q * np.array([3.0, 2.0, 1.0])
        psi = pc_psi(z, 2).psi
        for col, target in zip(psi.T, q[:, :2].T):
            assert min(np.linalg.norm(col - target), np.linalg.norm(col + target)) < 1e-12

    def test_full_principal_subspace(self, rng):
        z = rng.standard_normal((15, 3)) @ rng.standard_normal((3, 6))
        psi = pc_psi(z, 3).psi
        assert np.linalg.norm(z - psi @ (psi.T @ z)) < 1e-10 * np.linalg.norm(z)

    def test_capture_energy_matches_full_svd(self, rng):
        z = rng.standard_normal((49, 20))
        psi = pc_psi(z, 10).psi
        s = np.linalg.svd(z, compute_uv=False)
        captured = np.linalg.norm(psi.T @ z) ** 2
        assert captured == pytest.approx(np.sum(s[:10] ** 2), rel=1e-8)
        assert np.max(np.abs(psi.T @ psi - np.eye(10))) < 1e-10

    def test_prefix_property(self, rng):
        z = rng.standard_normal((30, 12))
        a = pc_psi(z, 4).psi
        b = pc_psi(z, 9).psi
        np.testing.assert_allclose(a, b[:, :4], atol=1e-12)


class TestClairvoyant:
    def _model(self, n, j, theta, seed=0):
        from randgsc.scenario import ScenarioSpec, make_covariance_model
        return make_covariance_model(ScenarioSpec(n=n, j=j, k=j, theta_deg=theta), stream(seed))

    def test_orthogonal_soi_full_dimension(self):
        model, soi = self._model(20, 4, 90)
        psi = clairvoyant_psi(model, soi)
        assert psi.r == 4
        assert np.linalg.matrix_rank(psi.psi) == 4

    def test_scalar_factor(self):
        q = np.zeros((5, 1))
        q[1, 0] = 1.0
        v = np.array([0.6, 0, 0.8, 0, 0])
        soi = SoIBasis(v=v, v_perp=orthonormal_complement(v))
        model = CovarianceModel(q=q, lam=[4.0])
        np.testing.assert_allclose(clairvoyant_psi(model, soi).psi[:, 0], 2 * soi.v_perp.T @ q[:, 0])

    @pytest.mark.parametrize("theta", [30.0, 75.0, 90.0])
    def test_range_equals_projected_interference(self, theta):
        model, soi = self._model(30, 5, theta, seed=int(theta))
        psi = clairvoyant_psi(model, soi)
        assert np.max(principal_angles(psi.psi, soi.v_perp.T @ model.q)) < 1e-10


def test_reducer_spec_validation():
    with pytest.raises(ValueError):
        ReducerSpec(Method.GAUSSIAN)
    assert ReducerSpec("mn").method is Method.MN
