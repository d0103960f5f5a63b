"""Tests for spectral decompositions, matrix functions and the matrix-level quantities."""

from __future__ import annotations

import numpy as np
import pytest

from minmax.errors import DecompositionMismatchError, InputValidationError
from minmax.instances import random_commuting_family
from minmax.matrix_bridge import (
    CommutingFamily,
    SpectralDecomposition,
    apply_function_table,
    best_vector_approx,
    build_commuting_problem,
    build_matrix_problem,
    infer_pairing,
    matrix_residual_norm,
    minmax_matrix_value,
    real_normal_decomposition,
    sample_maxmin,
    validate_decomposition,
)
from minmax.minimax import solve_minimax
from minmax.numerics import random_unitary
from minmax.problem import Custom, Gmres, PointSet, build_basis_problem


def _diagonal(values) -> SpectralDecomposition:
    lambdas = np.asarray(values, dtype=complex)
    return SpectralDecomposition(Q=np.eye(lambdas.size, dtype=complex), lambdas=lambdas)


@pytest.fixture
def two_point():
    decomp = _diagonal([1.0, 3.0])
    return decomp, build_matrix_problem(decomp, Gmres(1))


def test_identity_eigenvectors_validate() -> None:
    """Q = I passes every check."""

    assert validate_decomposition(_diagonal([1.0, 2j, -3.0])).passed


def test_scaled_column_fails_unitarity() -> None:
    """A column scaled by two breaks unitarity."""

    Q = np.eye(2, dtype=complex)
    Q[:, 0] *= 2.0
    decomp = SpectralDecomposition(Q=Q, lambdas=np.array([1.0, 2.0], dtype=complex))

    assert not validate_decomposition(decomp).get("unitarity").passed


def test_unpaired_eigenvalue_fails_real_pairing() -> None:
    """A non-real eigenvalue paired with itself is rejected in real mode."""

    decomp = SpectralDecomposition(
        Q=np.eye(2, dtype=complex),
        lambdas=np.array([1j, 2.0]),
        field_mode="real",
        pairing=np.array([0, 1]),
    )

    assert not validate_decomposition(decomp).get("pairing").passed


def test_reconstruction_and_normality_are_checked() -> None:
    """A matching matrix passes and a nonnormal one fails."""

    decomp = SpectralDecomposition.from_hermitian(np.array([[2.0, 1.0], [1.0, 2.0]]))

    assert validate_decomposition(decomp, np.array([[2.0, 1.0], [1.0, 2.0]])).passed
    report = validate_decomposition(decomp, np.array([[0.0, 1.0], [0.0, 0.0]]))
    assert not report.get("normality").passed


def test_apply_function_table_cases() -> None:
    """Matrix functions follow the eigen formula."""

    decomp = SpectralDecomposition.from_hermitian(np.array([[2.0, 1.0], [1.0, 2.0]]))
    A = decomp.matrix()

    np.testing.assert_allclose(apply_function_table(decomp, decomp.lambdas**2), A @ A, atol=1e-12)
    np.testing.assert_allclose(apply_function_table(decomp, np.ones(2)), np.eye(2), atol=1e-12)
    np.testing.assert_allclose(
        apply_function_table(_diagonal([1.0, 2.0]), np.array([5.0, 7.0])), np.diag([5.0, 7.0])
    )
    with pytest.raises(InputValidationError):
        apply_function_table(decomp, np.ones(3))


def test_rotation_decomposition_matches_block() -> None:
    """The 2 x 2 rotation has eigenvectors (1, -+i)/sqrt(2) with conjugate pairing."""

    decomp = real_normal_decomposition(np.eye(2), [], [1j])

    np.testing.assert_allclose(decomp.matrix(), [[0.0, -1.0], [1.0, 0.0]], atol=1e-15)
    np.testing.assert_allclose(decomp.Q[:, 0], np.array([1.0, -1j]) / np.sqrt(2.0))
    np.testing.assert_array_equal(decomp.pairing, [1, 0])
    assert validate_decomposition(decomp).passed


def test_infer_pairing_recovers_conjugates() -> None:
    """Pairing can be inferred when it is not supplied."""

    decomp = real_normal_decomposition(np.eye(3), [0.5], [1.0 + 1j])

    np.testing.assert_array_equal(infer_pairing(decomp.Q, decomp.lambdas), [1, 0, 2])
    assert infer_pairing(np.eye(2, dtype=complex), np.array([1j, 2.0])) is None


def test_best_vector_approx_anchor_values(two_point) -> None:
    """GMRES(1) on diag(1, 3) gives 1/2 at v* and sqrt(1/5) at (1, 1)/sqrt(2)."""

    decomp, table = two_point

    at_worst, _ = best_vector_approx(decomp, table, np.array([np.sqrt(3.0) / 2.0, 0.5]))
    at_diagonal, alpha = best_vector_approx(decomp, table, np.array([1.0, 1.0]))

    assert at_worst == pytest.approx(0.5, abs=1e-12)
    assert at_diagonal == pytest.approx(np.sqrt(0.2), abs=1e-12)
    assert alpha.alpha[0] == pytest.approx(0.4, abs=1e-12)


def test_best_vector_approx_on_eigenvector_is_zero(two_point) -> None:
    """A single eigenvector can always be fitted exactly."""

    decomp, table = two_point

    value, _ = best_vector_approx(decomp, table, np.array([0.0, 1.0]))

    assert value == pytest.approx(0.0, abs=1e-14)
    with pytest.raises(InputValidationError):
        best_vector_approx(decomp, table, np.zeros(2))


def test_minmax_value_is_unitarily_invariant() -> None:
    """The matrix optimum does not depend on the eigenvector basis."""

    U = random_unitary(2, 4)
    rotated = SpectralDecomposition(Q=U, lambdas=np.array([1.0, 3.0], dtype=complex))
    table = build_matrix_problem(rotated, Gmres(1))

    assert minmax_matrix_value(rotated, table) == pytest.approx(0.5, abs=1e-9)

    phases = np.exp(1j * np.array([0.3, -1.1]))
    shifted = SpectralDecomposition(Q=U * phases[None, :], lambdas=rotated.lambdas)
    assert minmax_matrix_value(shifted, table) == pytest.approx(
        minmax_matrix_value(rotated, table), abs=1e-10
    )


def test_matrix_residual_norm_agrees_with_delta() -> None:
    """The explicit matrix residual norm equals the scalar optimum."""

    decomp = SpectralDecomposition(
        Q=random_unitary(5, 9), lambdas=np.array([0.2, 1.0 + 1j, -0.5, 0.7j, 1.3])
    )
    table = build_matrix_problem(decomp, Gmres(2))
    sol = solve_minimax(table)

    assert matrix_residual_norm(decomp, table, sol.alpha_star) == pytest.approx(
        sol.delta, abs=1e-8 * max(1.0, sol.delta)
    )


def test_repeated_eigenvalues_collapse_custom_tables() -> None:
    """Per-index custom tables collapse onto Gamma and must agree on repeats."""

    decomp = _diagonal([1.0, 2.0, 1.0])
    table = build_matrix_problem(decomp, Custom(F=[1.0, 1.0, 1.0], Phi=[[1.0], [2.0], [1.0]]))

    assert table.n == 2
    np.testing.assert_allclose(table.Phi[:, 0], [1.0, 2.0])
    with pytest.raises(InputValidationError):
        build_matrix_problem(decomp, Custom(F=[1.0, 1.0, 5.0], Phi=[[1.0], [2.0], [1.0]]))


def test_misaligned_decomposition_is_rejected(two_point) -> None:
    """A table built for another spectrum cannot be paired with the decomposition."""

    decomp, _ = two_point
    other = build_basis_problem(PointSet.from_points([1.0, 4.0]), Gmres(1))

    with pytest.raises(DecompositionMismatchError):
        best_vector_approx(decomp, other, np.array([1.0, 0.0]))


def test_sample_maxmin_bounds_and_include(two_point) -> None:
    """Sampling never beats delta and reaches it when v* is included."""

    decomp, table = two_point
    v_star = np.array([np.sqrt(3.0) / 2.0, 0.5])

    sampled, vector = sample_maxmin(decomp, table, trials=50, seed=1)
    with_witness, _ = sample_maxmin(decomp, table, trials=5, seed=1, include=v_star, polish_steps=0)

    assert sampled <= 0.5 + 1e-8
    assert np.linalg.norm(vector) == pytest.approx(1.0, abs=1e-12)
    assert with_witness == pytest.approx(0.5, abs=1e-8)


def test_sample_maxmin_is_independent_of_workers(two_point) -> None:
    """Thread-parallel trials reproduce the sequential result."""

    decomp, table = two_point

    sequential = sample_maxmin(decomp, table, trials=20, seed=3, polish_steps=5)
    parallel = sample_maxmin(decomp, table, trials=20, seed=3, polish_steps=5, workers=4)

    assert sequential[0] == parallel[0]
    np.testing.assert_array_equal(sequential[1], parallel[1])


def test_sample_maxmin_single_point() -> None:
    """With one eigenvalue every unit vector gives the same value."""

    decomp = _diagonal([2.0])
    table = build_matrix_problem(decomp, Custom(F=[1.0], Phi=[[0.0]]))

    value, _ = sample_maxmin(decomp, table, trials=3, seed=0)

    assert value == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(InputValidationError):
        sample_maxmin(decomp, table, trials=0, seed=0)


def test_commuting_family_matches_gmres_table() -> None:
    """Powers of diag(1, 2, 3) reproduce the GMRES table on {1, 2, 3}."""

    base = np.array([1.0, 2.0, 3.0], dtype=complex)
    family = CommutingFamily(U=np.eye(3, dtype=complex), diagonals=np.vstack([base**i for i in range(3)]))

    gamma, table, decomp = build_commuting_problem(family)
    expected = build_basis_problem(PointSet.from_points(base), Gmres(2))

    np.testing.assert_allclose(gamma.points, [1.0, 2.0, 3.0])
    np.testing.assert_allclose(table.F, expected.F)
    np.testing.assert_allclose(table.Phi, expected.Phi)
    np.testing.assert_allclose(decomp.lambdas, [1.0, 2.0, 3.0])


def test_commuting_family_with_equal_matrices_has_zero_error() -> None:
    """A_0 = A_1 gives delta 0 with alpha 1."""

    diag = np.array([1.0, -2.0, 0.5j])
    family = CommutingFamily(U=random_unitary(3, 2), diagonals=np.vstack([diag, diag]))

    _, table, _ = build_commuting_problem(family)
    sol = solve_minimax(table)

    assert sol.delta <= 1e-12
    assert sol.alpha_star.alpha[0] == pytest.approx(1.0, abs=1e-12)


def test_commuting_family_merges_identical_tuples() -> None:
    """Indices with identical diagonal tuples share a label."""

    family = CommutingFamily(
        U=np.eye(3, dtype=complex),
        diagonals=np.array([[1.0, 2.0, 1.0], [5.0, 6.0, 5.0]], dtype=complex),
    )

    gamma, table, decomp = build_commuting_problem(family)

    assert gamma.multiplicity_map == ((0, 2), (1,))
    np.testing.assert_allclose(decomp.lambdas, [1.0, 2.0, 1.0])
    assert table.n == 2


def test_non_commuting_family_is_rejected() -> None:
    """Explicit matrices that do not commute are refused."""

    A0 = np.eye(2, dtype=complex)
    A1 = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
    A2 = np.diag([1.0, -1.0]).astype(complex)
    family = CommutingFamily(
        U=np.eye(2, dtype=complex),
        diagonals=np.array([[1.0, 1.0], [1.0, -1.0], [1.0, -1.0]], dtype=complex),
        matrices=(A0, A1, A2),
    )

    with pytest.raises(InputValidationError):
        build_commuting_problem(family)


def test_random_family_norm_matches_delta() -> None:
    """The explicit norm of A_0 - sum alpha_i A_i equals delta."""

    family = random_commuting_family(6, 2, seed=8)
    _, table, _ = build_commuting_problem(family)
    sol = solve_minimax(table)

    A = family.explicit_matrices()
    residual = A[0] - sum(a * M for a, M in zip(sol.alpha_star.alpha, A[1:]))

    assert np.linalg.norm(residual, 2) == pytest.approx(sol.delta, abs=1e-8 * max(1.0, sol.delta))
