"""Tests for certificate recovery, pruning and verification."""

from __future__ import annotations

import numpy as np
import pytest

from minmax.certificate import (
    Certificate,
    activity_slack,
    caratheodory_prune,
    extract_active_set,
    recover_weights,
    verify_certificate,
)
from minmax.errors import NotOptimalError
from minmax.instances import random_complex_instance
from minmax.matrix_bridge import build_matrix_problem
from minmax.minimax import solution_from_coefficients, solve_minimax
from minmax.problem import Chebyshev, Gmres, PointSet, build_basis_problem


@pytest.fixture
def two_point_solution():
    table = build_basis_problem(PointSet.from_points([1.0, 3.0]), Gmres(1))
    return solve_minimax(table)


@pytest.fixture
def roots_solution():
    table = build_basis_problem(PointSet.from_points([1.0, 1j, -1.0, -1j]), Gmres(1))
    return solve_minimax(table)


def test_active_set_of_two_point_problem(two_point_solution) -> None:
    """Both points are extremal at the optimum."""

    np.testing.assert_array_equal(extract_active_set(two_point_solution), [0, 1])


def test_recovered_weights_match_hand_solution(two_point_solution) -> None:
    """The certificate on {1, 3} carries weights (3/4, 1/4)."""

    sol = two_point_solution
    cert = recover_weights(sol, extract_active_set(sol))

    np.testing.assert_array_equal(cert.support, [0, 1])
    np.testing.assert_allclose(cert.omega, [0.75, 0.25], atol=1e-9)
    assert cert.condition_residual <= 1e-8
    assert verify_certificate(cert, sol, sol.table).passed


def test_chebyshev_certificate_weights() -> None:
    """The three-point Chebyshev problem yields weights (1/4, 1/2, 1/4)."""

    table = build_basis_problem(PointSet.from_points([-1.0, 0.0, 1.0]), Chebyshev(2))
    sol = solve_minimax(table)

    cert = recover_weights(sol, extract_active_set(sol))

    np.testing.assert_allclose(cert.full_weights(), [0.25, 0.5, 0.25], atol=1e-9)


def test_non_optimal_coefficients_are_refuted(two_point_solution) -> None:
    """alpha = 0 on {1, 3} admits no certificate."""

    table = two_point_solution.table
    sol = solution_from_coefficients(table, np.array([0.0]))

    with pytest.raises(NotOptimalError) as excinfo:
        recover_weights(sol, extract_active_set(sol))

    assert excinfo.value.residual > 1e-8


def test_perturbed_optimum_is_refuted(two_point_solution) -> None:
    """Moving the optimum by 1e-3 leaves a single active point and no certificate."""

    table = two_point_solution.table
    sol = solution_from_coefficients(table, two_point_solution.alpha_star.alpha + 1e-3)

    with pytest.raises(NotOptimalError):
        recover_weights(sol, extract_active_set(sol))


def test_zero_error_gives_trivial_certificate() -> None:
    """An exact fit is certified by any single point."""

    table = build_basis_problem(PointSet.from_points([2.0]), Gmres(1))
    sol = solve_minimax(table)

    cert = recover_weights(sol, extract_active_set(sol))

    assert cert.trivial
    assert cert.ell == 1


def test_pruning_roots_of_unity_keeps_antipodal_pair(roots_solution) -> None:
    """Pruning the uniform certificate leaves {1, -1} with equal weights."""

    sol = roots_solution
    cert = recover_weights(sol, extract_active_set(sol))
    full = Certificate(
        support=np.arange(4),
        omega=np.full(4, 0.25),
        condition_residual=cert.condition_residual,
        field_mode="complex",
        solution=sol,
    )

    pruned = caratheodory_prune(full)

    np.testing.assert_array_equal(pruned.support, [0, 2])
    np.testing.assert_allclose(pruned.omega, [0.5, 0.5], atol=1e-12)
    assert pruned.ell <= 2 * sol.table.k + 1
    assert verify_certificate(pruned, sol, sol.table).passed


def test_verification_flags_wrong_weights(two_point_solution) -> None:
    """Weights (0.8, 0.2) break the orthogonality condition."""

    sol = two_point_solution
    cert = Certificate(
        support=np.array([0, 1]),
        omega=np.array([0.8, 0.2]),
        condition_residual=0.0,
        field_mode="complex",
        solution=sol,
    )

    report = verify_certificate(cert, sol, sol.table)

    assert not report.passed
    assert not report.get("orthogonality_condition").passed


def test_verification_flags_non_extremal_support() -> None:
    """A support point below the maximal error fails the activity check."""

    table = build_basis_problem(PointSet.from_points([1.0, 2.0, 3.0]), Gmres(1))
    sol = solve_minimax(table)
    cert = Certificate(
        support=np.array([1]),
        omega=np.array([1.0]),
        condition_residual=0.0,
        field_mode="complex",
        solution=sol,
    )

    report = verify_certificate(cert, sol, table)

    assert not report.get("support_active").passed


def test_verification_flags_unnormalized_weights(two_point_solution) -> None:
    """Weights summing to more than one fail normalization."""

    sol = two_point_solution
    cert = Certificate(
        support=np.array([0, 1]),
        omega=np.array([0.75, 0.5]),
        condition_residual=0.0,
        field_mode="complex",
        solution=sol,
    )

    assert not verify_certificate(cert, sol, sol.table).get("weights_normalized").passed


def test_activity_slack_widens_only_for_converged_solutions(two_point_solution) -> None:
    """Converged solves tolerate a few gaps of deficit; external coefficients do not."""

    sol = two_point_solution
    external = solution_from_coefficients(sol.table, sol.alpha_star.alpha)

    assert activity_slack(sol, 1e-8) >= 10 * sol.gap
    assert activity_slack(external, 1e-8) == pytest.approx(1e-8 * external.delta)


def test_nearly_equioscillating_segment_instance_is_certified() -> None:
    """Extremal values agreeing only to seven digits still yield a certificate."""

    instance = random_complex_instance(16, 5, 4, shape="segment")
    table = build_matrix_problem(instance.decomp, instance.kind)
    sol = solve_minimax(table)

    active = extract_active_set(sol)
    cert = recover_weights(sol, active)

    assert sol.converged
    assert active.size > 1
    assert cert.ell > 1
    assert cert.condition_residual <= 1e-8 * max(1.0, sol.delta)
    assert verify_certificate(cert, sol, table).passed
