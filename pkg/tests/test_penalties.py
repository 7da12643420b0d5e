"""Penalty assembly, structure identities, and quadrature-oracle equivalence."""

import numpy as np
import pytest

from pilm import (
    BSplineBasis1D,
    PenaltyMatrix,
    ResidualTerm,
    assemble_penalty,
    combine,
    diffusion_penalty,
    elasticity_penalty,
    ode_penalty,
    smoothness_penalty,
)

from conftest import lsq_coeffs_2d, quad_residual_1d, quad_residual_2d


@pytest.fixture(scope="module")
def basis_1d():
    return BSplineBasis1D(10.0, 13)


@pytest.fixture(scope="module")
def integrals_1d(basis_1d):
    return basis_1d.integral_matrices()


@pytest.fixture(scope="module")
def bases_2d():
    return BSplineBasis1D(2.0, 9), BSplineBasis1D(1.0, 8)


@pytest.fixture(scope="module")
def integrals_2d(bases_2d):
    return bases_2d[0].integral_matrices(), bases_2d[1].integral_matrices()


class TestOdePenalty:
    def test_harmonic_combination(self, integrals_1d):
        R = integrals_1d
        expected = R[2, 2] + R[0, 0] + R[2, 0] + R[0, 2]
        penalty = ode_penalty(R, 1.0, 0.0, 1.0)
        np.testing.assert_allclose(penalty.matrix, expected, rtol=1e-14, atol=1e-16)

    def test_stiffness_only(self, integrals_1d):
        penalty = ode_penalty(integrals_1d, 0.0, 0.0, 1.0)
        np.testing.assert_array_equal(penalty.matrix, integrals_1d[0, 0])

    def test_full_coefficient_expansion(self, integrals_1d):
        R = integrals_1d
        m, c, k = 1.3, 0.7, 2.1
        expected = (
            m * m * R[2, 2]
            + c * c * R[1, 1]
            + k * k * R[0, 0]
            + m * c * (R[2, 1] + R[1, 2])
            + m * k * (R[2, 0] + R[0, 2])
            + c * k * (R[1, 0] + R[0, 1])
        )
        penalty = ode_penalty(R, m, c, k)
        np.testing.assert_allclose(penalty.matrix, expected, rtol=1e-14)

    def test_quadratic_form_matches_quadrature(self, basis_1d, integrals_1d):
        rng = np.random.default_rng(11)
        m, c, k = 2.0, 0.5, 1.5
        penalty = ode_penalty(integrals_1d, m, c, k)
        equations = [
            [ResidualTerm(0, (2,), m), ResidualTerm(0, (1,), c), ResidualTerm(0, (0,), k)]
        ]
        for _ in range(20):
            coeffs = rng.standard_normal(basis_1d.n_basis)
            expected = quad_residual_1d(
                basis_1d.length, basis_1d.n_basis, equations, coeffs
            )
            assert penalty.quad_form(coeffs) == pytest.approx(expected, rel=1e-10)


class TestDiffusionPenalty:
    def test_matches_kronecker_formula(self, integrals_2d):
        Rt, Rx = integrals_2d
        k = 0.1
        expected = (
            np.kron(Rt[1, 1], Rx[0, 0])
            + k * k * np.kron(Rt[0, 0], Rx[2, 2])
            - k * (np.kron(Rt[1, 0], Rx[0, 2]) + np.kron(Rt[0, 1], Rx[2, 0]))
        )
        penalty = diffusion_penalty(Rt, Rx, k)
        np.testing.assert_allclose(penalty.matrix, expected, rtol=1e-14, atol=1e-16)

    def test_zero_diffusivity_limit(self, integrals_2d):
        Rt, Rx = integrals_2d
        penalty = diffusion_penalty(Rt, Rx, 0.0)
        np.testing.assert_array_equal(penalty.matrix, np.kron(Rt[1, 1], Rx[0, 0]))

    def test_quadratic_form_matches_quadrature(self, bases_2d, integrals_2d):
        rng = np.random.default_rng(4)
        k = 0.1
        penalty = diffusion_penalty(*integrals_2d, k)
        equations = [[ResidualTerm(0, (1, 0), 1.0), ResidualTerm(0, (0, 2), -k)]]
        lengths = (bases_2d[0].length, bases_2d[1].length)
        sizes = (bases_2d[0].n_basis, bases_2d[1].n_basis)
        for _ in range(20):
            coeffs = rng.standard_normal(sizes[0] * sizes[1])
            expected = quad_residual_2d(lengths, sizes, equations, coeffs)
            assert penalty.quad_form(coeffs) == pytest.approx(expected, rel=1e-10)


def _smoothness_equations():
    equations = []
    for comp in (0, 1):
        equations += [
            [ResidualTerm(comp, (2, 0), 1.0)],
            [ResidualTerm(comp, (1, 1), 1.0)],
            [ResidualTerm(comp, (1, 1), 1.0)],
            [ResidualTerm(comp, (0, 2), 1.0)],
        ]
    return equations


class TestSmoothnessPenalty:
    def test_block_diagonal(self, integrals_2d):
        Rx, Ry = integrals_2d
        penalty = smoothness_penalty(Rx, Ry)
        block = Rx.n_basis * Ry.n_basis
        np.testing.assert_array_equal(penalty.matrix[:block, block:], 0.0)
        np.testing.assert_array_equal(penalty.matrix[block:, :block], 0.0)
        np.testing.assert_array_equal(
            penalty.matrix[:block, :block], penalty.matrix[block:, block:]
        )

    def test_per_component_block_formula(self, integrals_2d):
        Rx, Ry = integrals_2d
        expected = (
            np.kron(Rx[2, 2], Ry[0, 0])
            + 2.0 * np.kron(Rx[1, 1], Ry[1, 1])
            + np.kron(Rx[0, 0], Ry[2, 2])
        )
        block = Rx.n_basis * Ry.n_basis
        penalty = smoothness_penalty(Rx, Ry)
        np.testing.assert_allclose(penalty.matrix[:block, :block], expected, rtol=1e-14)

    def test_affine_field_in_null_space(self, bases_2d, integrals_2d):
        penalty = smoothness_penalty(*integrals_2d)
        coeffs_u = lsq_coeffs_2d(*bases_2d, lambda x, y: 1.0 + x + y + 0.0 * x * y)
        coeffs_v = lsq_coeffs_2d(*bases_2d, lambda x, y: 2.0 - x + 0.5 * y + 0.0 * x)
        coeffs = np.concatenate([coeffs_u, coeffs_v])
        scale = penalty.max_eigenvalue() * float(coeffs @ coeffs)
        assert penalty.quad_form(coeffs) <= 1e-10 * scale

    def test_quadratic_form_matches_quadrature(self, bases_2d, integrals_2d):
        rng = np.random.default_rng(5)
        penalty = smoothness_penalty(*integrals_2d)
        lengths = (bases_2d[0].length, bases_2d[1].length)
        sizes = (bases_2d[0].n_basis, bases_2d[1].n_basis)
        for _ in range(20):
            coeffs = rng.standard_normal(2 * sizes[0] * sizes[1])
            expected = quad_residual_2d(lengths, sizes, _smoothness_equations(), coeffs)
            assert penalty.quad_form(coeffs) == pytest.approx(expected, rel=1e-10)


def _elasticity_equations(nu):
    a = 2.0 / (1.0 - nu)
    b = (1.0 + nu) / (1.0 - nu)
    return [
        [
            ResidualTerm(0, (2, 0), a),
            ResidualTerm(1, (1, 1), b),
            ResidualTerm(0, (0, 2), 1.0),
        ],
        [
            ResidualTerm(1, (0, 2), a),
            ResidualTerm(0, (1, 1), b),
            ResidualTerm(1, (2, 0), 1.0),
        ],
    ]


class TestElasticityPenalty:
    def test_explicit_block_formulas(self, integrals_2d):
        Rx, Ry = integrals_2d
        nu = 0.25
        a = 2.0 / (1.0 - nu)
        b = (1.0 + nu) / (1.0 - nu)
        kron = np.kron
        g_xx = (
            a * a * kron(Rx[2, 2], Ry[0, 0])
            + a * (kron(Rx[2, 0], Ry[0, 2]) + kron(Rx[0, 2], Ry[2, 0]))
            + kron(Rx[0, 0], Ry[2, 2])
            + b * b * kron(Rx[1, 1], Ry[1, 1])
        )
        g_xy = b * (
            a * (kron(Rx[2, 1], Ry[0, 1]) + kron(Rx[1, 0], Ry[1, 2]))
            + kron(Rx[0, 1], Ry[2, 1])
            + kron(Rx[1, 2], Ry[1, 0])
        )
        g_yy = (
            a * a * kron(Rx[0, 0], Ry[2, 2])
            + a * (kron(Rx[0, 2], Ry[2, 0]) + kron(Rx[2, 0], Ry[0, 2]))
            + kron(Rx[2, 2], Ry[0, 0])
            + b * b * kron(Rx[1, 1], Ry[1, 1])
        )
        penalty = elasticity_penalty(Rx, Ry, nu)
        block = Rx.n_basis * Ry.n_basis
        np.testing.assert_allclose(penalty.matrix[:block, :block], g_xx, rtol=1e-13)
        np.testing.assert_allclose(penalty.matrix[:block, block:], g_xy, rtol=1e-13)
        np.testing.assert_allclose(penalty.matrix[block:, block:], g_yy, rtol=1e-13)

    def test_cross_block_transpose_symmetry(self, integrals_2d):
        penalty = elasticity_penalty(*integrals_2d, 0.3)
        block = penalty.size // 2
        np.testing.assert_array_equal(
            penalty.matrix[block:, :block], penalty.matrix[:block, block:].T
        )

    def test_decoupled_at_negative_one(self, integrals_2d):
        penalty = elasticity_penalty(*integrals_2d, -1.0)
        block = penalty.size // 2
        np.testing.assert_array_equal(penalty.matrix[:block, block:], 0.0)
        np.testing.assert_array_equal(penalty.matrix[block:, :block], 0.0)

    @pytest.mark.parametrize("nu", [-1.5, 0.6, 1.0])
    def test_poisson_ratio_range_enforced(self, integrals_2d, nu):
        with pytest.raises(ValueError, match="Poisson"):
            elasticity_penalty(*integrals_2d, nu)

    def test_exact_equilibrium_field_in_null_space(self, bases_2d, integrals_2d):
        # u = x^2 - y^2, v = -2 x y solves the homogeneous equilibrium
        penalty = elasticity_penalty(*integrals_2d, 0.5)
        coeffs_u = lsq_coeffs_2d(*bases_2d, lambda x, y: x * x - y * y)
        coeffs_v = lsq_coeffs_2d(*bases_2d, lambda x, y: -2.0 * x * y)
        coeffs = np.concatenate([coeffs_u, coeffs_v])
        scale = penalty.max_eigenvalue() * float(coeffs @ coeffs)
        assert penalty.quad_form(coeffs) <= 1e-12 * scale

    def test_quadratic_form_matches_quadrature(self, bases_2d, integrals_2d):
        rng = np.random.default_rng(6)
        penalty = elasticity_penalty(*integrals_2d, 0.0)
        lengths = (bases_2d[0].length, bases_2d[1].length)
        sizes = (bases_2d[0].n_basis, bases_2d[1].n_basis)
        for _ in range(20):
            coeffs = rng.standard_normal(2 * sizes[0] * sizes[1])
            expected = quad_residual_2d(lengths, sizes, _elasticity_equations(0.0), coeffs)
            assert penalty.quad_form(coeffs) == pytest.approx(expected, rel=1e-10)


class TestCombine:
    def test_single_term_identity(self, integrals_1d):
        penalty = ode_penalty(integrals_1d, 1.0, 0.5, 1.0)
        combined = combine([(1.0, penalty)])
        np.testing.assert_array_equal(combined.matrix, penalty.matrix)

    def test_zero_weight_drops_term(self, integrals_1d):
        first = ode_penalty(integrals_1d, 1.0, 0.5, 1.0)
        second = ode_penalty(integrals_1d, 0.0, 0.0, 1.0)
        combined = combine([(1.0, first), (0.0, second)])
        np.testing.assert_array_equal(combined.matrix, first.matrix)

    def test_weighted_sum_is_linear(self, integrals_1d):
        first = ode_penalty(integrals_1d, 1.0, 0.0, 1.0)
        second = ode_penalty(integrals_1d, 0.0, 1.0, 0.0)
        ratio = 0.37
        combined = combine([(1.0, first), (ratio, second)])
        np.testing.assert_allclose(
            combined.matrix, first.matrix + ratio * second.matrix, rtol=1e-15
        )

    def test_size_mismatch_rejected(self, integrals_1d):
        small = ode_penalty(BSplineBasis1D(1.0, 5).integral_matrices(), 1.0, 0.0, 1.0)
        big = ode_penalty(integrals_1d, 1.0, 0.0, 1.0)
        with pytest.raises(ValueError, match="size"):
            combine([(1.0, big), (1.0, small)])

    def test_negative_weight_rejected(self, integrals_1d):
        penalty = ode_penalty(integrals_1d, 1.0, 0.0, 1.0)
        with pytest.raises(ValueError, match=">= 0"):
            combine([(-1.0, penalty)])


class TestSpectrum:
    def test_identity_matrix(self):
        assert PenaltyMatrix(np.eye(7)).spectrum() == (7, pytest.approx(0.0))

    def test_rank_deficient_diagonal(self):
        rank, logdet = PenaltyMatrix(np.diag([2.0, 0.0])).spectrum()
        assert rank == 1
        assert logdet == pytest.approx(np.log(2.0))

    def test_zero_matrix(self):
        assert PenaltyMatrix(np.zeros((3, 3))).spectrum() == (0, 0.0)

    def test_non_finite_rejected(self):
        matrix = np.eye(3)
        matrix[1, 1] = np.nan
        with pytest.raises(ValueError, match="non-finite"):
            PenaltyMatrix(matrix).spectrum()

    def test_permutation_invariance(self, integrals_2d):
        penalty = smoothness_penalty(*integrals_2d)
        rng = np.random.default_rng(8)
        perm = rng.permutation(penalty.size)
        shuffled = PenaltyMatrix(penalty.matrix[np.ix_(perm, perm)])
        rank, logdet = penalty.spectrum()
        rank_p, logdet_p = shuffled.spectrum()
        assert rank == rank_p
        assert logdet == pytest.approx(logdet_p, rel=1e-10)

    def test_smoothness_rank_deficiency_from_affine_modes(self):
        basis = BSplineBasis1D(400.0, 23)
        integrals = basis.integral_matrices()
        penalty = smoothness_penalty(integrals, integrals)
        rank, _ = penalty.spectrum(1e-10)
        assert penalty.size - rank >= 6  # at least 1, x, y per component

    def test_constant_field_in_both_null_spaces(self, integrals_2d):
        ones = np.ones(2 * integrals_2d[0].n_basis * integrals_2d[1].n_basis)
        for penalty in (
            smoothness_penalty(*integrals_2d),
            elasticity_penalty(*integrals_2d, 0.25),
        ):
            scale = penalty.max_eigenvalue() * float(ones @ ones)
            assert penalty.quad_form(ones) <= 1e-12 * scale

    def test_assembled_penalties_symmetric_psd(self, integrals_1d, integrals_2d):
        candidates = [
            ode_penalty(integrals_1d, 1.0, 2.0, 3.0),
            diffusion_penalty(*integrals_2d, 0.1),
            smoothness_penalty(*integrals_2d),
            elasticity_penalty(*integrals_2d, 0.5),
        ]
        for penalty in candidates:
            np.testing.assert_allclose(
                penalty.matrix, penalty.matrix.T, rtol=0, atol=0
            )
            assert penalty.min_eigenvalue() >= -1e-12 * penalty.max_eigenvalue()


class TestAssembler:
    def test_order_above_two_rejected(self, integrals_2d):
        with pytest.raises(ValueError, match="order"):
            assemble_penalty(integrals_2d, [[ResidualTerm(0, (3, 0), 1.0)]])

    def test_axis_count_mismatch_rejected(self, integrals_1d):
        with pytest.raises(ValueError, match="axes"):
            assemble_penalty((integrals_1d,), [[ResidualTerm(0, (1, 0), 1.0)]])

    def test_mixed_equation_cross_terms(self, integrals_2d):
        # (u_t - u_x)^2 expands with the cross Kronecker terms
        Rt, Rx = integrals_2d
        eq = [[ResidualTerm(0, (1, 0), 1.0), ResidualTerm(0, (0, 1), -1.0)]]
        penalty = assemble_penalty(integrals_2d, eq)
        expected = (
            np.kron(Rt[1, 1], Rx[0, 0])
            + np.kron(Rt[0, 0], Rx[1, 1])
            - np.kron(Rt[1, 0], Rx[0, 1])
            - np.kron(Rt[0, 1], Rx[1, 0])
        )
        np.testing.assert_allclose(penalty.matrix, expected, rtol=1e-14)
