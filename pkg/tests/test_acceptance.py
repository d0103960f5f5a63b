"""Property checks of the max-min/min-max equality on random instance suites."""

from __future__ import annotations

import numpy as np
import pytest

from minmax.certificate import extract_active_set, recover_weights, verify_certificate
from minmax.errors import NotOptimalError
from minmax.instances import (
    random_commuting_family,
    random_complex_instance,
    random_real_instance,
)
from minmax.matrix_bridge import (
    best_vector_approx,
    build_commuting_problem,
    build_matrix_problem,
    minmax_matrix_value,
    matrix_residual_norm,
    sample_maxmin,
)
from minmax.minimax import dual_lower_bound, solution_from_coefficients, solve_minimax
from minmax.pipeline import PipelineOptions, run_theorem_check
from minmax.problem import Gmres, PointSet, build_basis_problem
from minmax.worstcase import (
    complex_worst_vector,
    realize_polynomial,
    realize_solution,
    symmetrize_certificate,
)

SHAPES = ("disk", "circle", "segment")
SIZES = (8, 16, 32)


def _complex_cases() -> list[tuple[int, int, int, bool, str]]:
    cases = []
    for index in range(50):
        n = SIZES[index % 3]
        k = 1 + index % 5
        cases.append((index, n, k, index % 2 == 1, SHAPES[(index // 2) % 3]))
    return cases


def _tolerance(delta: float) -> float:
    return 1e-8 * max(1.0, delta)


@pytest.fixture
def options() -> PipelineOptions:
    return PipelineOptions(trials=0, prune=True)


@pytest.mark.parametrize(("seed", "n", "k", "chebyshev", "shape"), _complex_cases())
def test_complex_equality(
    seed: int, n: int, k: int, chebyshev: bool, shape: str, options: PipelineOptions
) -> None:
    """Random complex normal matrices attain the min-max value at v*."""

    instance = random_complex_instance(n, k, seed, chebyshev=chebyshev, shape=shape)
    table = build_matrix_problem(instance.decomp, instance.kind)

    result = run_theorem_check(instance.decomp, table, options)

    assert result.passed, result.report.failures()
    delta = result.solution.delta
    cert = result.certificate
    value, _ = best_vector_approx(instance.decomp, table, result.worst_case.v_star)
    assert abs(value - delta) <= _tolerance(delta)
    assert cert.condition_residual <= _tolerance(delta)
    assert np.all(cert.omega > 0.0)
    assert abs(cert.omega.sum() - 1.0) <= 1e-12
    assert cert.ell <= 2 * table.k + 1


@pytest.mark.parametrize("seed", range(30))
def test_real_equality(seed: int, options: PipelineOptions) -> None:
    """Random real normal matrices give a real worst-case vector attaining delta."""

    n = SIZES[seed % 3]
    instance = random_real_instance(n, 1 + seed % 4, seed, chebyshev=seed % 2 == 1)
    table = build_matrix_problem(instance.decomp, instance.kind)

    result = run_theorem_check(instance.decomp, table, options)

    assert result.passed, result.report.failures()
    assert np.max(np.abs(result.worst_case.v_star.imag)) <= 1e-10
    assert result.solution.alpha_star.is_real()
    value, _ = best_vector_approx(instance.decomp, table, result.worst_case.v_star)
    assert abs(value - result.solution.delta) <= _tolerance(result.solution.delta)


@pytest.mark.parametrize("seed", range(5))
def test_duality_sandwich_and_refutation(seed: int) -> None:
    """Lawson's bound sits below delta and a perturbed optimum is refuted."""

    instance = random_complex_instance(16, 2 + seed % 3, seed + 100)
    table = build_matrix_problem(instance.decomp, instance.kind)
    sol = solve_minimax(table)

    assert sol.converged
    assert dual_lower_bound(table, sol.lawson_weights) <= sol.delta + 1e-12
    assert sol.gap <= 1e-10 * max(1.0, sol.delta)

    perturbed = solution_from_coefficients(table, sol.alpha_star.alpha + 1e-3)
    with pytest.raises(NotOptimalError):
        recover_weights(perturbed, extract_active_set(perturbed))


@pytest.mark.parametrize("seed", range(3))
def test_sampled_maxmin_never_exceeds_minmax(seed: int) -> None:
    """Sampling with polishing stays below delta and reaches it when v* is included."""

    instance = random_complex_instance(8, 2, seed + 200)
    table = build_matrix_problem(instance.decomp, instance.kind)
    sol = solve_minimax(table)
    cert = recover_weights(sol, extract_active_set(sol))
    v_star = complex_worst_vector(cert, instance.decomp).v_star
    delta = minmax_matrix_value(instance.decomp, table)

    sampled, _ = sample_maxmin(instance.decomp, table, trials=1000, seed=seed)
    included, _ = sample_maxmin(instance.decomp, table, trials=10, seed=seed, include=v_star)

    assert sampled <= delta + _tolerance(delta)
    assert abs(included - delta) <= _tolerance(delta)
    assert delta <= matrix_residual_norm(instance.decomp, table, sol.alpha_star) + _tolerance(delta)


@pytest.mark.parametrize("seed", range(10))
def test_commuting_families(seed: int) -> None:
    """delta equals the family norm and the worst-case vector attains it."""

    n = 4 + seed % 13
    family = random_commuting_family(n, 1 + seed % 4, seed)
    gamma, table, decomp = build_commuting_problem(family)
    sol = solve_minimax(table)
    cert = recover_weights(sol, extract_active_set(sol))
    worst = complex_worst_vector(cert, decomp, gamma)

    A = family.explicit_matrices()
    residual = A[0] - sum(a * M for a, M in zip(sol.alpha_star.alpha, A[1:]))
    assert abs(np.linalg.norm(residual, 2) - sol.delta) <= _tolerance(sol.delta)
    value, _ = best_vector_approx(decomp, table, worst.v_star)
    assert abs(value - sol.delta) <= _tolerance(sol.delta)
    assert verify_certificate(cert, sol, table).passed


def test_realization_and_symmetrization_cases() -> None:
    """All three weight-merging cases produce symmetric convex weights."""

    table = build_basis_problem(
        PointSet.from_points([0.5, 1j, -1j, 0.3 + 0.6j, 0.3 - 0.6j]), Gmres(2), "real"
    )
    sol = solve_minimax(table)
    real = realize_polynomial(sol.alpha_star, table)
    assert table.max_error(real) <= sol.delta + 1e-12

    realized = realize_solution(sol)
    cert = recover_weights(realized, extract_active_set(realized))
    sym = symmetrize_certificate(cert)

    assert sym.omega_tilde.sum() == pytest.approx(1.0, abs=1e-12)
    np.testing.assert_allclose(sym.omega_tilde[sym.pairing], sym.omega_tilde, atol=1e-15)
    np.testing.assert_allclose(sym.theta[sym.pairing], np.conj(sym.theta), atol=1e-12)
    assert sym.condition_residual <= cert.condition_residual + 1e-14
    assert sym.condition_residual <= 1e-8 * max(1.0, sol.delta)
