import math

import numpy as np
import pytest
from numpy.polynomial import hermite as H

from pencil_lab.basis import (
    HermiteBasis1D,
    TensorBasis,
    default_alpha,
    gauss_hermite_rule,
    hermite_function_values,
    laplacian_matrix,
    laplacian_tensor,
    multiplication_matrix,
    position_matrix,
    synthesize,
    tpow_matrix,
)
from pencil_lab.errors import InputError
from pencil_lab.polynomial import HomogeneousPolynomial


def orthonormal_hermite_coeffs(j: int) -> np.ndarray:
    """Coefficient vector of the physicists' Hermite H_j, normalized so that
    h_j = coeffs . H * exp(-t^2/2) is an orthonormal Hermite function."""
    c = np.zeros(j + 1)
    c[j] = 1.0
    norm = math.sqrt(2.0**j * math.factorial(j) * math.sqrt(math.pi))
    return c / norm


class TestPositionMatrix:
    def test_two_by_two(self):
        expected = np.array([[0.0, 1.0 / math.sqrt(2)], [1.0 / math.sqrt(2), 0.0]])
        assert np.allclose(position_matrix(2, 1.0), expected, atol=1e-15)

    def test_alpha_scaling(self):
        mat = position_matrix(3, 2.0)
        assert mat[0, 1] == pytest.approx(1.0 / (2.0 * math.sqrt(2.0)))

    def test_eigenvalues_are_quadrature_nodes(self):
        # Golub-Welsch: the position matrix is the Jacobi matrix of the
        # Hermite weight, so its spectrum is the order-64 node set
        nodes_ref, _ = H.hermgauss(64)
        eigs = np.linalg.eigvalsh(position_matrix(64, 1.0))
        assert np.allclose(np.sort(eigs), np.sort(nodes_ref), atol=1e-12)


class TestLaplacianMatrix:
    def test_one_by_one(self):
        assert np.allclose(laplacian_matrix(1, 1.0), [[0.5]])

    def test_harmonic_oscillator_diagonal(self):
        n = 12
        total = laplacian_matrix(n, 1.0) + tpow_matrix(n, 1.0, 2)
        assert np.allclose(total, np.diag(2.0 * np.arange(n) + 1.0), atol=1e-12)

    def test_row_against_quadrature_oracle(self):
        # independent route: <h_5', h_j'> by Gauss-Hermite quadrature with
        # polynomial derivatives taken via numpy's Hermite-series calculus
        n = 40
        mat = laplacian_matrix(n, 1.0)
        x, w = H.hermgauss(2 * n + 8)

        def hprime(j):
            c = orthonormal_hermite_coeffs(j)
            # h_j' = (H_j' - t H_j) * c_j * exp(-t^2/2)
            return H.hermval(x, H.hermder(c)) - x * H.hermval(x, c)

        h5 = hprime(5)
        for j in range(n):
            oracle = float(np.sum(w * h5 * hprime(j)))
            assert mat[5, j] == pytest.approx(oracle, abs=1e-8)


class TestTpowAndMultiplication:
    def test_linear_equals_position(self):
        basis = TensorBasis((HermiteBasis1D(8, 1.3),))
        poly = HomogeneousPolynomial.monomial(1)
        assert np.allclose(
            multiplication_matrix(poly, basis), position_matrix(8, 1.3), atol=1e-14
        )

    def test_crop_differs_from_cropped_square(self):
        # the exact t^2 block is the crop of the enlarged square, not the
        # square of the crop; they differ in the trailing corner
        n = 6
        exact = tpow_matrix(n, 1.0, 2)
        naive = position_matrix(n, 1.0) @ position_matrix(n, 1.0)
        diff = exact - naive
        assert abs(diff[n - 1, n - 1]) > 0.5
        assert np.allclose(diff[: n - 2, : n - 2], 0.0, atol=1e-14)
        assert diff[n - 1, n - 1] == pytest.approx(n / 2.0)

    def test_crop_consistency_across_sizes(self):
        # leading block of the larger assembly equals the smaller assembly
        for power in (2, 3, 5):
            small = tpow_matrix(6, 0.9, power)
            large = tpow_matrix(12, 0.9, power)
            assert np.allclose(large[:6, :6], small, atol=1e-13)

    def test_separable_tensor_polynomial(self):
        basis = TensorBasis.regular(2, 6, 1.1)
        poly = HomogeneousPolynomial.radial(2, 1)
        t2 = tpow_matrix(6, 1.1, 2)
        eye = np.eye(6)
        expected = np.kron(t2, eye) + np.kron(eye, t2)
        assert np.allclose(multiplication_matrix(poly, basis), expected, atol=1e-13)

    def test_dimension_mismatch(self):
        basis = TensorBasis.regular(2, 6, 1.0)
        with pytest.raises(InputError):
            multiplication_matrix(HomogeneousPolynomial.monomial(2), basis)


class TestGaussHermite:
    def test_order_one(self):
        nodes, weights = gauss_hermite_rule(1)
        assert nodes[0] == 0.0
        assert weights[0] == pytest.approx(math.sqrt(math.pi))

    def test_order_two_closed_form(self):
        nodes, weights = gauss_hermite_rule(2)
        assert np.allclose(np.sort(nodes), [-1 / math.sqrt(2), 1 / math.sqrt(2)], atol=1e-14)
        assert np.allclose(weights, [math.sqrt(math.pi) / 2] * 2, atol=1e-14)

    def test_second_moment(self):
        nodes, weights = gauss_hermite_rule(20)
        assert np.sum(weights * nodes**2) == pytest.approx(
            math.sqrt(math.pi) / 2, abs=1e-12
        )

    def test_against_numpy_reference(self):
        nodes, weights = gauss_hermite_rule(48)
        ref_n, ref_w = H.hermgauss(48)
        assert np.allclose(np.sort(nodes), np.sort(ref_n), atol=1e-12)
        assert np.allclose(weights[np.argsort(nodes)], ref_w[np.argsort(ref_n)], atol=1e-12)

    def test_polynomial_exactness(self):
        nodes, weights = gauss_hermite_rule(6)
        # moments of exp(-t^2): odd vanish, even are Gamma((k+1)/2)
        for k in range(0, 12):
            exact = 0.0 if k % 2 else math.gamma((k + 1) / 2.0)
            assert np.sum(weights * nodes**k) == pytest.approx(exact, abs=1e-11)


class TestTensorBasis:
    def test_index_roundtrip(self):
        basis = TensorBasis.regular(3, 5, 1.0)
        for flat in range(0, basis.total_dim, 17):
            assert basis.flat_index(basis.multi_index(flat)) == flat

    def test_total_dim_cap(self):
        with pytest.raises(InputError):
            TensorBasis.regular(3, 30, 1.0)  # 27000 > 20000

    def test_axis_count(self):
        with pytest.raises(InputError):
            TensorBasis(())

    def test_min_size(self):
        with pytest.raises(InputError):
            HermiteBasis1D(3, 1.0)

    def test_orthonormality_by_quadrature(self):
        basis = HermiteBasis1D(10, 1.7)
        nodes, weights = gauss_hermite_rule(2 * basis.size)
        vals = math.sqrt(basis.alpha) * hermite_function_values(
            basis.size, nodes
        )  # evaluated at s = alpha t, ds = alpha dt
        gram = (vals * weights * np.exp(nodes**2)) @ vals.T / basis.alpha
        assert np.max(np.abs(gram - np.eye(basis.size))) < 1e-10


class TestSynthesize:
    def test_ground_state_value_at_origin(self):
        basis = TensorBasis((HermiteBasis1D(4, 1.0),))
        coeffs = np.array([1.0, 0.0, 0.0, 0.0])
        val = synthesize(coeffs, basis, np.array([0.0]))
        assert val[0] == pytest.approx(math.pi**-0.25, abs=1e-14)

    def test_odd_mode_vanishes_at_origin(self):
        basis = TensorBasis((HermiteBasis1D(4, 1.0),))
        coeffs = np.array([0.0, 1.0, 0.0, 0.0])
        assert synthesize(coeffs, basis, np.array([0.0]))[0] == 0.0

    @pytest.mark.parametrize("alpha", [1.0, 2.3])
    def test_parseval(self, alpha):
        # effective weights w_i * exp(s_i^2) via the stable reciprocal
        # identity 1/(order * h_{order-1}(s_i)^2); the direct product
        # underflows at the extreme nodes for orders beyond ~60
        rng = np.random.default_rng(7)
        n = 48
        order = 2 * n
        basis = TensorBasis((HermiteBasis1D(n, alpha),))
        coeffs = rng.standard_normal(n)
        nodes, _ = gauss_hermite_rule(order)
        h_top = hermite_function_values(order, nodes)[order - 1]
        w_eff = 1.0 / (order * h_top**2)
        vals = synthesize(coeffs, basis, nodes / alpha)
        quad = np.sum(w_eff * vals**2) / alpha
        assert quad == pytest.approx(float(np.sum(coeffs**2)), abs=1e-8)

    def test_tensor_synthesis_matches_product(self):
        basis = TensorBasis.regular(2, 5, 1.2)
        coeffs = np.zeros(25)
        coeffs[basis.flat_index((2, 3))] = 1.0
        pts = np.array([[0.3, -0.4], [1.0, 0.2]])
        vals = synthesize(coeffs, basis, pts)
        h = hermite_function_values(5, 1.2 * pts[:, 0])
        g = hermite_function_values(5, 1.2 * pts[:, 1])
        expected = 1.2 * h[2] * g[3]
        assert np.allclose(vals, expected, atol=1e-13)

    def test_no_overflow_large_basis(self):
        basis = TensorBasis((HermiteBasis1D(512, 1.0),))
        coeffs = np.ones(512) / math.sqrt(512.0)
        grid = np.linspace(-10, 10, 101)
        vals = synthesize(coeffs, basis, grid)
        assert np.all(np.isfinite(vals))

    def test_complex_coefficients(self):
        basis = TensorBasis((HermiteBasis1D(6, 1.0),))
        coeffs = np.arange(6) * (1 + 2j)
        grid = np.array([0.5])
        vals = synthesize(coeffs, basis, grid)
        assert vals.dtype.kind == "c"

    def test_length_mismatch(self):
        basis = TensorBasis((HermiteBasis1D(6, 1.0),))
        with pytest.raises(InputError):
            synthesize(np.ones(5), basis, np.array([0.0]))


class TestDefaultAlpha:
    def test_harmonic_is_unit(self):
        assert default_alpha(300, 1) == 1.0

    def test_growth_exponent(self):
        # alpha = N^{(m-1)/(2(m+1))}
        assert default_alpha(64, 2) == pytest.approx(64 ** (1.0 / 6.0))
        assert default_alpha(100, 5) == pytest.approx(100 ** (1.0 / 3.0))

    def test_laplacian_tensor_block_structure(self):
        basis = TensorBasis.regular(2, 4, 1.0)
        lap1 = laplacian_matrix(4, 1.0)
        eye = np.eye(4)
        expected = np.kron(lap1, eye) + np.kron(eye, lap1)
        assert np.allclose(laplacian_tensor(basis), expected, atol=1e-14)
