"""End-to-end solve, certify, worst-case and verify runs.

The CLI and the acceptance tests share these entry points. Every stage runs
inside a :class:`StageRecorder` span so timings and Logfire traces line up.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .certificate import (
    Certificate,
    caratheodory_prune,
    extract_active_set,
    recover_weights,
    verify_certificate,
)
from .config import settings
from .errors import NotOptimalError, RealnessError
from .logging_utils import StageRecorder
from .matrix_bridge import (
    CommutingFamily,
    SpectralDecomposition,
    best_vector_approx,
    build_commuting_problem,
    matrix_residual_norm,
    sample_maxmin,
)
from .minimax import MinimaxSolution, SolverOptions, solve_minimax
from .numerics import spectral_norm
from .problem import EvaluationTable
from .schemas import CheckResult, RunReport, ValidationReport, to_pairs
from .worstcase import (
    SymmetrizedCertificate,
    WorstCaseVector,
    complex_worst_vector,
    real_worst_vector,
    realize_solution,
    symmetrize_certificate,
)

LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True)
class PipelineOptions:
    """Tolerances and sampling controls for a full run."""

    solver: SolverOptions = field(default_factory=SolverOptions)
    active_tol: float = settings.active_tol
    cond_tol: float = settings.cond_tol
    prune: bool = False
    trials: int = settings.trials
    seed: int = settings.seed
    polish_steps: int = settings.polish_steps
    workers: int = 1


@dataclass(eq=False)
class PipelineResult:
    """Everything a run produced, plus the checks it passed or failed."""

    name: str
    table: EvaluationTable
    solution: MinimaxSolution
    certificate: Optional[Certificate] = None
    symmetrized: Optional[SymmetrizedCertificate] = None
    worst_case: Optional[WorstCaseVector] = None
    maxmin_sampled: Optional[float] = None
    report: ValidationReport = field(default_factory=ValidationReport)
    timings: dict[str, float] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.solution.converged and self.report.passed

    def to_report(self, command: str, *, include_timings: bool = False) -> RunReport:
        """Serialize into the CLI report model."""

        sol = self.solution
        return RunReport(
            command=command,
            instance=self.name,
            mode=self.table.field_mode,
            delta=sol.delta,
            lower_bound=sol.lower_bound,
            alpha=to_pairs(sol.alpha_star.alpha),
            iterations=sol.iterations,
            converged=sol.converged,
            certificate=self.certificate.to_model() if self.certificate else None,
            symmetrized=self.symmetrized.to_model() if self.symmetrized else None,
            worst_case=self.worst_case.to_model() if self.worst_case else None,
            maxmin_sampled=self.maxmin_sampled,
            checks=list(self.report.checks),
            timings=self.timings if include_timings else None,
        )


def _tolerance(delta: float) -> float:
    return settings.attainment_tol * max(1.0, delta)


def _convergence_check(sol: MinimaxSolution) -> CheckResult:
    return CheckResult(
        name="converged",
        passed=sol.converged,
        residual=sol.gap,
        detail=None if sol.converged else f"duality gap {sol.gap:.3e} after {sol.iterations} iterations",
    )


def infeasible_check(exc: NotOptimalError) -> CheckResult:
    """Failed feasibility check for a refuted certificate."""

    residual = exc.residual if np.isfinite(exc.residual) else 0.0
    return CheckResult(name="certificate.feasible", passed=False, residual=residual, detail=str(exc))


def solve(
    table: EvaluationTable,
    opts: PipelineOptions | None = None,
    *,
    name: str = "solve",
    recorder: StageRecorder | None = None,
) -> PipelineResult:
    """Solve the minimax problem; real tables get realized coefficients."""

    opts = opts or PipelineOptions()
    recorder = recorder or StageRecorder(name)
    with recorder.stage("solve", n=table.n, k=table.k, mode=table.field_mode):
        sol = solve_minimax(table, opts.solver)
        if table.field_mode == "real":
            sol = realize_solution(sol)
    report = ValidationReport(checks=[_convergence_check(sol)])
    return PipelineResult(
        name=name, table=table, solution=sol, report=report, timings=recorder.timings()
    )


def certify(
    sol: MinimaxSolution,
    opts: PipelineOptions | None = None,
    *,
    name: str = "certify",
    recorder: StageRecorder | None = None,
) -> PipelineResult:
    """Recover, optionally prune, and verify a certificate for ``sol``.

    Raises :class:`NotOptimalError` when no certificate exists.
    """

    opts = opts or PipelineOptions()
    recorder = recorder or StageRecorder(name)
    table = sol.table
    with recorder.stage("certify", prune=opts.prune):
        active = extract_active_set(sol, opts.active_tol)
        cert = recover_weights(sol, active, opts.cond_tol)
        if opts.prune:
            cert = caratheodory_prune(cert, table)
        verdict = verify_certificate(cert, sol, table, opts.cond_tol)

    report = ValidationReport()
    report.extend(verdict, prefix="certificate.")
    return PipelineResult(
        name=name,
        table=table,
        solution=sol,
        certificate=cert,
        report=report,
        timings=recorder.timings(),
    )


def run_theorem_check(
    decomp: SpectralDecomposition,
    table: EvaluationTable,
    opts: PipelineOptions | None = None,
    *,
    name: str = "verify",
) -> PipelineResult:
    """Check that the max-min and min-max values coincide for ``decomp``.

    Solves, certifies, builds the worst-case vector and evaluates it against
    the matrix-level optimum. A non-converged solve stops after the solve
    stage.
    """

    opts = opts or PipelineOptions()
    recorder = StageRecorder(name)
    result = solve(table, opts, name=name, recorder=recorder)
    sol = result.solution
    if not sol.converged:
        LOGGER.warning("%s: skipping certificate stages after non-converged solve", name)
        return result

    report = result.report
    try:
        certified = certify(sol, opts, name=name, recorder=recorder)
    except NotOptimalError as exc:
        LOGGER.error("%s: not optimal: %s", name, exc)
        report.checks.append(infeasible_check(exc))
        result.timings = recorder.timings()
        return result
    report.checks.extend(certified.report.checks)
    cert = certified.certificate
    delta = sol.delta
    tol = _tolerance(delta)

    symmetrized: SymmetrizedCertificate | None = None
    try:
        with recorder.stage("worstcase"):
            if table.field_mode == "real":
                symmetrized = symmetrize_certificate(cert, table.gamma)
                worst = real_worst_vector(symmetrized, decomp, table.gamma)
            else:
                worst = complex_worst_vector(cert, decomp, table.gamma)
    except RealnessError as exc:
        LOGGER.error("%s: %s", name, exc)
        report.checks.append(
            CheckResult(name="realness", passed=False, residual=exc.imaginary, detail=str(exc))
        )
        return PipelineResult(
            name=name,
            table=table,
            solution=sol,
            certificate=cert,
            symmetrized=symmetrized,
            report=report,
            timings=recorder.timings(),
        )

    with recorder.stage("verify"):
        norm_gap = abs(float(np.linalg.norm(worst.v_star)) - 1.0)
        report.checks.append(CheckResult(name="unit_norm", passed=norm_gap <= 1e-12, residual=norm_gap))
        report.checks.append(
            CheckResult(
                name="orthogonality",
                passed=worst.orthogonality_residual <= opts.cond_tol * max(1.0, delta),
                residual=worst.orthogonality_residual,
            )
        )
        value, _ = best_vector_approx(decomp, table, worst.v_star)
        attainment = abs(value - delta)
        report.checks.append(
            CheckResult(
                name="attainment",
                passed=attainment <= tol,
                residual=attainment,
                detail=None if attainment <= tol else f"max-min {value:.17g} vs min-max {delta:.17g}",
            )
        )
        if table.field_mode == "real":
            imaginary = float(np.max(np.abs(worst.v_star.imag)))
            report.checks.append(
                CheckResult(
                    name="realness",
                    passed=imaginary <= settings.realness_tol,
                    residual=imaginary,
                )
            )
        matrix_value = matrix_residual_norm(decomp, table, sol.alpha_star)
        agreement = abs(matrix_value - delta)
        report.checks.append(
            CheckResult(name="matrix_scalar_agreement", passed=agreement <= tol, residual=agreement)
        )

    sampled: float | None = None
    if opts.trials > 0:
        with recorder.stage("sample", trials=opts.trials):
            sampled, _ = sample_maxmin(
                decomp,
                table,
                opts.trials,
                opts.seed,
                polish_steps=opts.polish_steps,
                workers=opts.workers,
            )
        excess = max(sampled - delta, 0.0)
        report.checks.append(
            CheckResult(name="maxmin_bound", passed=excess <= tol, residual=excess)
        )

    return PipelineResult(
        name=name,
        table=table,
        solution=sol,
        certificate=cert,
        symmetrized=symmetrized,
        worst_case=worst,
        maxmin_sampled=sampled,
        report=report,
        timings=recorder.timings(),
    )


def run_commuting_check(
    family: CommutingFamily, opts: PipelineOptions | None = None, *, name: str = "commuting"
) -> PipelineResult:
    """Run the theorem check on a commuting family and compare explicit norms."""

    _, table, decomp = build_commuting_problem(family)
    result = run_theorem_check(decomp, table, opts, name=name)
    sol = result.solution
    if not sol.converged:
        return result

    matrices = family.explicit_matrices()
    combination = matrices[0] - sum(
        coefficient * matrix for coefficient, matrix in zip(sol.alpha_star.alpha, matrices[1:])
    )
    family_norm = spectral_norm(combination)
    gap = abs(family_norm - sol.delta)
    result.report.checks.append(
        CheckResult(name="family_norm", passed=gap <= _tolerance(sol.delta), residual=gap)
    )
    return result


__all__ = [
    "PipelineOptions",
    "PipelineResult",
    "certify",
    "infeasible_check",
    "run_commuting_check",
    "run_theorem_check",
    "solve",
]
