import numpy as np
import pytest

from bgknet import build_layer_matrix, build_lift, layer_profile, stable_manifold


def quartic_eigenvalues(a, b, c):
    """Brute-force eigenvalues of the 4x4 zero-diagonal tridiagonal with offdiag (a, b, c).

    The characteristic polynomial is y^2 - (a^2+b^2+c^2) y + a^2 c^2 in y = lambda^2.
    """
    s = a * a + b * b + c * c
    disc = np.sqrt(s * s - 4 * a * a * c * c)
    y = np.array([(s - disc) / 2, (s + disc) / 2])
    lam = np.sqrt(y)
    return np.sort(np.concatenate([-lam, lam]))


class TestLayerMatrix:
    def test_offdiag_values_n4(self):
        m = build_layer_matrix(4)
        assert m.dim == 4
        np.testing.assert_allclose(m.offdiag, np.sqrt([2.5, 3.0, 3.5]), rtol=1e-15)

    def test_trace_zero(self):
        assert np.trace(build_layer_matrix(4).dense()) == 0.0

    @pytest.mark.parametrize("N", [2, 3])
    def test_rejects_degenerate(self, N):
        with pytest.raises(ValueError):
            build_layer_matrix(N)

    def test_dense_is_symmetric(self):
        a = build_layer_matrix(7).dense()
        np.testing.assert_array_equal(a, a.T)


class TestStableManifold:
    def test_n4_against_quartic_oracle(self):
        m = build_layer_matrix(4)
        spectrum = stable_manifold(m)
        expected = quartic_eigenvalues(*m.offdiag)
        np.testing.assert_allclose(spectrum.eigenvalues, expected, rtol=1e-13)

    def test_n5_against_dense_oracle(self):
        m = build_layer_matrix(5)
        spectrum = stable_manifold(m)
        dense = np.linalg.eigvalsh(m.dense())
        assert np.max(np.abs(spectrum.eigenvalues - dense)) < 1e-12

    @pytest.mark.parametrize("N", [4, 8, 16, 50, 100, 200])
    def test_spectrum_properties(self, N):
        m = build_layer_matrix(N)
        spectrum = stable_manifold(m)
        lam = spectrum.eigenvalues
        scale = np.max(np.abs(lam))
        assert np.min(np.diff(lam)) > 1e-12 * scale            # distinct
        assert np.max(np.abs(lam + lam[::-1])) < 1e-10         # symmetric about 0
        assert spectrum.positive_indices.size == N - 2             # half strictly positive
        assert np.all(spectrum.positive_eigenvalues > 0)
        assert abs(lam.sum()) < 1e-10 * scale                  # zero trace

    @pytest.mark.parametrize("N", [4, 16, 100])
    def test_eigen_residual(self, N):
        m = build_layer_matrix(N)
        spectrum = stable_manifold(m)
        dense = m.dense()
        res = dense @ spectrum.eigenvectors - spectrum.eigenvectors * spectrum.eigenvalues
        assert np.max(np.abs(res)) < 1e-10

    def test_sign_convention(self):
        spectrum = stable_manifold(build_layer_matrix(30))
        for j in range(spectrum.R2plus.shape[1]):
            col = spectrum.R2plus[:, j]
            nz = np.flatnonzero(col)
            assert col[nz[0]] > 0

    def test_orthonormal_eigenvectors(self):
        spectrum = stable_manifold(build_layer_matrix(12))
        gram = spectrum.eigenvectors.T @ spectrum.eigenvectors
        assert np.max(np.abs(gram - np.eye(gram.shape[0]))) < 1e-12


class TestLift:
    def test_block_structure(self):
        N = 8
        spectrum = stable_manifold(build_layer_matrix(N))
        T = build_lift(spectrum, N).matrix
        assert T.shape == (2 * N, N + 1)
        # C column touches only the g1 row
        c_col = T[:, 1]
        assert c_col[1] == pytest.approx(1 / np.sqrt(2))
        assert np.count_nonzero(c_col) == 1
        # g3 row is identically zero (bounded layers force g3 = 0)
        assert np.all(T[3, :] == 0.0)
        # D column: +1/2 in the g2 row only
        assert T[2, 0] == 0.5 and np.count_nonzero(T[:, 0]) == 1
        # lower-left block zero, lower-right is the stable basis
        assert np.all(T[4:, :3] == 0.0)
        np.testing.assert_array_equal(T[4:, 3:], spectrum.R2plus)

    def test_t11_rows(self):
        N = 6
        spectrum = stable_manifold(build_layer_matrix(N))
        T = build_lift(spectrum, N).matrix
        s2 = 1 / np.sqrt(2)
        np.testing.assert_allclose(T[:4, :3],
                                   [[0, 0, s2], [0, s2, 0], [0.5, 0, -0.5], [0, 0, 0]])
        np.testing.assert_allclose(T[0, 3:], 2 * np.sqrt(2) / np.sqrt(3) * spectrum.R2plus[0])
        np.testing.assert_allclose(T[2, 3:], -2 / np.sqrt(3) * spectrum.R2plus[0])

    @pytest.mark.parametrize("N", [4, 8, 50])
    def test_full_column_rank(self, N):
        spectrum = stable_manifold(build_layer_matrix(N))
        sv = np.linalg.svd(build_lift(spectrum, N).matrix, compute_uv=False)
        assert sv.size == N + 1
        assert sv[-1] > 1e-10 * sv[0]


class TestLayerProfile:
    def test_zero_amplitudes(self):
        spectrum = stable_manifold(build_layer_matrix(6))
        assert np.all(layer_profile(np.zeros(4), 1.3, spectrum) == 0.0)

    def test_value_at_origin(self):
        rng = np.random.default_rng(5)
        spectrum = stable_manifold(build_layer_matrix(8))
        gamma = rng.standard_normal(6)
        np.testing.assert_array_equal(layer_profile(gamma, 0.0, spectrum),
                                      spectrum.R2plus @ gamma)

    def test_ode_residual_central_difference(self):
        # oracle: sqrt(2) A g'(x) = -g(x) checked with second-order differences
        rng = np.random.default_rng(9)
        m = build_layer_matrix(8)
        spectrum = stable_manifold(m)
        gamma = rng.standard_normal(6)
        dense = m.dense()
        x, h = 0.7, 1e-4
        deriv = (layer_profile(gamma, x + h, spectrum) - layer_profile(gamma, x - h, spectrum)) / (2 * h)
        lhs = np.sqrt(2.0) * dense @ deriv
        rhs = -layer_profile(gamma, x, spectrum)
        assert np.max(np.abs(lhs - rhs)) < 1e-6 * np.max(np.abs(rhs))

    def test_single_mode_monotone_decay(self):
        spectrum = stable_manifold(build_layer_matrix(8))
        gamma = np.zeros(6)
        gamma[2] = 1.0
        xs = np.linspace(0.0, 5.0, 40)
        norms = [np.linalg.norm(layer_profile(gamma, x, spectrum)) for x in xs]
        assert np.all(np.diff(norms) < 0)

    def test_rejects_negative_x(self):
        spectrum = stable_manifold(build_layer_matrix(6))
        with pytest.raises(ValueError):
            layer_profile(np.zeros(4), -0.1, spectrum)
