"""Tests for the end-to-end theorem check on the built-in instances."""

from __future__ import annotations

import numpy as np
import pytest

from minmax.errors import NotOptimalError, RealnessError
from minmax.instances import DEMO_INSTANCES, demo_instance, random_commuting_family
from minmax.matrix_bridge import build_matrix_problem
from minmax.minimax import SolverOptions, solution_from_coefficients
from minmax.pipeline import (
    PipelineOptions,
    certify,
    run_commuting_check,
    run_theorem_check,
    solve,
)


@pytest.fixture
def quick_options() -> PipelineOptions:
    return PipelineOptions(trials=20, polish_steps=10)


@pytest.mark.parametrize("name", sorted(DEMO_INSTANCES))
def test_demo_instances_pass_every_check(name: str, quick_options: PipelineOptions) -> None:
    """Each built-in instance satisfies the max-min/min-max equality."""

    instance = demo_instance(name)
    table = build_matrix_problem(instance.decomp, instance.kind)

    result = run_theorem_check(instance.decomp, table, quick_options, name=name)

    assert result.passed, result.report.failures()
    assert result.report.get("attainment").passed
    assert result.worst_case is not None


def test_expected_demo_values(quick_options: PipelineOptions) -> None:
    """The anchored instances give their hand-derived optima."""

    expected = {
        "gmres_two_points": 0.5,
        "chebyshev_three_points": 0.5,
        "roots_of_unity": 1.0,
        "rotation": 1.0,
    }
    for name, delta in expected.items():
        instance = demo_instance(name)
        table = build_matrix_problem(instance.decomp, instance.kind)
        result = solve(table, quick_options, name=name)
        assert result.solution.delta == pytest.approx(delta, abs=1e-9)


def test_rotation_run_reports_realness_and_symmetrized_certificate(
    quick_options: PipelineOptions,
) -> None:
    """Real instances carry the realness check and the symmetrized certificate."""

    instance = demo_instance("rotation")
    table = build_matrix_problem(instance.decomp, instance.kind)

    result = run_theorem_check(instance.decomp, table, quick_options)

    assert result.report.get("realness").passed
    assert result.symmetrized is not None
    np.testing.assert_allclose(result.worst_case.v_star, [1.0, 0.0], atol=1e-10)


def test_certify_refutes_suboptimal_coefficients() -> None:
    """Zero coefficients on the two-point instance have no certificate."""

    instance = demo_instance("gmres_two_points")
    table = build_matrix_problem(instance.decomp, instance.kind)
    sol = solution_from_coefficients(table, np.array([0.0]))

    with pytest.raises(NotOptimalError):
        certify(sol)


def test_pruned_certificate_respects_support_bound(quick_options: PipelineOptions) -> None:
    """With pruning the roots-of-unity certificate keeps at most 2k+1 points."""

    instance = demo_instance("roots_of_unity")
    table = build_matrix_problem(instance.decomp, instance.kind)
    options = PipelineOptions(trials=0, prune=True)

    result = run_theorem_check(instance.decomp, table, options)

    assert result.passed
    assert result.certificate.ell <= 2 * table.k + 1


def test_non_converged_solve_stops_early() -> None:
    """A capped solve skips the certificate stages."""

    instance = demo_instance("gmres_two_points")
    table = build_matrix_problem(instance.decomp, instance.kind)
    options = PipelineOptions(solver=SolverOptions(max_iter=1, restarts=0), trials=0)

    result = run_theorem_check(instance.decomp, table, options)

    assert not result.passed
    assert result.certificate is None
    assert not result.report.get("converged").passed


def test_commuting_check_compares_family_norm(quick_options: PipelineOptions) -> None:
    """The explicit family norm agrees with delta."""

    family = random_commuting_family(5, 2, seed=17)

    result = run_commuting_check(family, quick_options)

    assert result.passed, result.report.failures()
    assert result.report.get("family_norm").passed


def test_report_omits_timings_unless_requested(quick_options: PipelineOptions) -> None:
    """Timings appear in the report only on request."""

    instance = demo_instance("gmres_two_points")
    table = build_matrix_problem(instance.decomp, instance.kind)
    result = run_theorem_check(instance.decomp, table, quick_options)

    assert result.to_report("verify").timings is None
    assert set(result.to_report("verify", include_timings=True).timings) >= {"solve", "certify"}


def test_refuted_certificate_is_reported_as_failed_check(
    quick_options: PipelineOptions, monkeypatch: pytest.MonkeyPatch
) -> None:
    """A certify stage that finds no weights yields a failed feasibility check."""

    def refuse(*_args, **_kwargs):
        raise NotOptimalError("no certificate", residual=0.25)

    monkeypatch.setattr("minmax.pipeline.certify", refuse)
    instance = demo_instance("gmres_two_points")
    table = build_matrix_problem(instance.decomp, instance.kind)

    result = run_theorem_check(instance.decomp, table, quick_options)

    assert not result.passed
    assert result.certificate is None
    check = result.report.get("certificate.feasible")
    assert not check.passed
    assert check.residual == pytest.approx(0.25)
    assert "solve" in result.timings


def test_complex_worst_vector_on_real_instance_is_a_failed_check(
    quick_options: PipelineOptions, monkeypatch: pytest.MonkeyPatch
) -> None:
    """A worst-case vector that cannot be made real fails the realness check."""

    def complex_only(*_args, **_kwargs):
        raise RealnessError("imaginary part 2.0e-01", imaginary=0.2)

    monkeypatch.setattr("minmax.pipeline.real_worst_vector", complex_only)
    instance = demo_instance("rotation")
    table = build_matrix_problem(instance.decomp, instance.kind)

    result = run_theorem_check(instance.decomp, table, quick_options)

    assert not result.passed
    assert not result.report.get("realness").passed
    assert result.report.get("realness").residual == pytest.approx(0.2)
    assert result.symmetrized is not None
    assert result.worst_case is None


def test_instances_take_their_field_mode_from_the_decomposition() -> None:
    """Real instances are recognized through their decomposition alone."""

    instance = demo_instance("rotation")

    assert not hasattr(instance, "mode")
    assert instance.decomp.field_mode == "real"
    assert build_matrix_problem(instance.decomp, instance.kind).field_mode == "real"
