"""Command-line front end: ``normal-minmax <command> [input] [flags]``.

Reports go to standard output as JSON; diagnostics go to standard error.
Exit codes: 0 success, 1 failed check or non-optimal coefficients, 2 solver
non-convergence, 3 input errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from dataclasses import replace
from pathlib import Path
from typing import Any, Callable, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ValidationError

from .config import settings
from .errors import (
    ConvergenceError,
    DecompositionMismatchError,
    InputValidationError,
    NotOptimalError,
    RealnessError,
)
from .instances import DEMO_INSTANCES, demo_instance
from .logging_utils import ensure_logfire
from .matrix_bridge import (
    CommutingFamily,
    SpectralDecomposition,
    build_matrix_problem,
    infer_pairing,
    validate_decomposition,
)
from .minimax import SolverOptions, solution_from_coefficients
from .pipeline import (
    PipelineOptions,
    PipelineResult,
    certify,
    infeasible_check,
    run_commuting_check,
    run_theorem_check,
    solve,
)
from .problem import (
    BasisKind,
    Chebyshev,
    Custom,
    EvaluationTable,
    Gmres,
    PointSet,
    build_basis_problem,
)
from .schemas import (
    BasisSpec,
    CommutingFamilyFile,
    DemoReport,
    MatrixProblemFile,
    ProblemFile,
    RunReport,
    from_pairs,
)

LOGGER = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_NOT_CONVERGED = 2
EXIT_INPUT_ERROR = 3

Outcome = Tuple[BaseModel, int]


def format_json(value: Any, indent: int = 2, _level: int = 0) -> str:
    """Serialize with 17 significant digits per float, rejecting non-finite values."""

    pad = " " * (indent * (_level + 1))
    close = " " * (indent * _level)
    if isinstance(value, bool) or value is None or isinstance(value, (int, str)):
        return json.dumps(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValueError(f"cannot serialize non-finite value {value!r}")
        return format(value, ".17g")
    if isinstance(value, dict):
        if not value:
            return "{}"
        items = [
            f"{pad}{json.dumps(str(key))}: {format_json(item, indent, _level + 1)}"
            for key, item in value.items()
        ]
        return "{\n" + ",\n".join(items) + "\n" + close + "}"
    if isinstance(value, (list, tuple)):
        if not value:
            return "[]"
        if all(not isinstance(item, (dict, list, tuple)) for item in value):
            return "[" + ", ".join(format_json(item, indent, _level + 1) for item in value) + "]"
        items = [pad + format_json(item, indent, _level + 1) for item in value]
        return "[\n" + ",\n".join(items) + "\n" + close + "]"
    raise TypeError(f"unsupported value of type {type(value).__name__}")


def _options(args: argparse.Namespace) -> PipelineOptions:
    solver = SolverOptions(
        gap_tol=args.gap_tol if args.gap_tol is not None else settings.gap_tol,
        max_iter=args.max_iter if args.max_iter is not None else settings.max_iter,
    )
    return PipelineOptions(
        solver=solver,
        active_tol=args.active_tol if args.active_tol is not None else settings.active_tol,
        cond_tol=args.cond_tol if args.cond_tol is not None else settings.cond_tol,
        prune=args.prune,
        trials=args.trials if args.trials is not None else settings.trials,
        seed=args.seed if args.seed is not None else settings.seed,
        workers=args.workers,
    )


def _basis_kind(spec: BasisSpec) -> BasisKind:
    if spec.kind == "gmres":
        return Gmres(spec.k)
    if spec.kind == "chebyshev":
        return Chebyshev(spec.k)
    return Custom(F=from_pairs(spec.F), Phi=from_pairs(spec.Phi))


def _load_problem(path: Path, mode_flag: Optional[str]) -> Tuple[EvaluationTable, ProblemFile]:
    document = ProblemFile.model_validate_json(path.read_text(encoding="utf-8"))
    gamma = PointSet.from_points(from_pairs(document.points))
    mode = mode_flag or document.mode
    return build_basis_problem(gamma, _basis_kind(document), mode), document


def _load_matrix_problem(
    path: Path, mode_flag: Optional[str]
) -> Tuple[SpectralDecomposition, EvaluationTable]:
    document = MatrixProblemFile.model_validate_json(path.read_text(encoding="utf-8"))
    matrix = document.matrix
    Q = from_pairs(matrix.Q)
    lambdas = from_pairs(matrix.lambdas)
    mode = mode_flag or matrix.mode
    pairing = np.asarray(matrix.pairing, dtype=np.intp) if matrix.pairing is not None else None
    if mode == "real" and pairing is None:
        pairing = infer_pairing(Q, lambdas)
        if pairing is None:
            raise DecompositionMismatchError("real mode needs a pairing and none could be inferred")
    decomp = SpectralDecomposition(Q=Q, lambdas=lambdas, field_mode=mode, pairing=pairing)
    report = validate_decomposition(decomp)
    if not report.passed:
        raise DecompositionMismatchError("invalid decomposition: " + "; ".join(report.failures()))
    return decomp, build_matrix_problem(decomp, _basis_kind(document.problem))


def _load_family(path: Path) -> CommutingFamily:
    document = CommutingFamilyFile.model_validate_json(path.read_text(encoding="utf-8"))
    matrices = (
        tuple(from_pairs(matrix) for matrix in document.matrices)
        if document.matrices is not None
        else None
    )
    return CommutingFamily(
        U=from_pairs(document.U), diagonals=from_pairs(document.diagonals), matrices=matrices
    )


def _exit_code(result: PipelineResult) -> int:
    if not result.solution.converged:
        return EXIT_NOT_CONVERGED
    return EXIT_OK if result.report.passed else EXIT_CHECK_FAILED


def _run_solve(args: argparse.Namespace) -> Outcome:
    table, _ = _load_problem(args.input, args.mode)
    result = solve(table, _options(args), name=args.input.stem)
    return result.to_report("solve", include_timings=args.timings), _exit_code(result)


def _run_certify(args: argparse.Namespace) -> Outcome:
    table, document = _load_problem(args.input, args.mode)
    opts = _options(args)
    if document.alpha is not None:
        sol = solution_from_coefficients(table, from_pairs(document.alpha))
    else:
        solved = solve(table, opts, name=args.input.stem)
        if not solved.solution.converged:
            return solved.to_report("certify"), EXIT_NOT_CONVERGED
        sol = solved.solution

    try:
        result = certify(sol, opts, name=args.input.stem)
    except NotOptimalError as exc:
        LOGGER.error("not optimal: %s", exc)
        report = PipelineResult(name=args.input.stem, table=table, solution=sol).to_report("certify")
        report.checks.append(infeasible_check(exc))
        return report, EXIT_CHECK_FAILED

    report = result.to_report("certify", include_timings=args.timings)
    return report, EXIT_OK if result.report.passed else EXIT_CHECK_FAILED


def _run_matrix(command: str, trials: Optional[int]) -> Callable[[argparse.Namespace], Outcome]:
    def _handler(args: argparse.Namespace) -> Outcome:
        decomp, table = _load_matrix_problem(args.input, args.mode)
        opts = _options(args)
        if trials is not None:
            opts = replace(opts, trials=trials)
        result = run_theorem_check(decomp, table, opts, name=args.input.stem)
        return result.to_report(command, include_timings=args.timings), _exit_code(result)

    return _handler


def _run_commuting(args: argparse.Namespace) -> Outcome:
    family = _load_family(args.input)
    result = run_commuting_check(family, _options(args), name=args.input.stem)
    return result.to_report("commuting", include_timings=args.timings), _exit_code(result)


def _run_demo(args: argparse.Namespace) -> Outcome:
    names = [args.instance] if args.instance else list(DEMO_INSTANCES)
    opts = _options(args)
    reports: List[RunReport] = []
    code = EXIT_OK
    for name in names:
        instance = demo_instance(name)
        table = build_matrix_problem(instance.decomp, instance.kind)
        result = run_theorem_check(instance.decomp, table, opts, name=instance.name)
        reports.append(result.to_report("demo", include_timings=args.timings))
        code = max(code, _exit_code(result))
    return DemoReport(instances=reports), code


def _add_common_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--gap-tol", type=float, default=None, help="Relative duality-gap tolerance.")
    parser.add_argument("--max-iter", type=int, default=None, help="Lawson iteration cap.")
    parser.add_argument("--active-tol", type=float, default=None, help="Relative activity tolerance.")
    parser.add_argument("--cond-tol", type=float, default=None, help="Certificate condition tolerance.")
    parser.add_argument("--prune", action="store_true", help="Reduce the certificate support.")
    parser.add_argument("--trials", type=int, default=None, help="Random trials for the max-min estimate.")
    parser.add_argument("--seed", type=int, default=None, help="Seed for the random trials.")
    parser.add_argument("--workers", type=int, default=1, help="Threads used for sampling.")
    parser.add_argument("--mode", choices=("real", "complex"), default=None, help="Override the field mode.")
    parser.add_argument("--timings", action="store_true", help="Include per-stage timings in the report.")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="normal-minmax",
        description="Min-max approximation on spectra of normal matrices, with certificates.",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    handlers: dict[str, Tuple[Callable[[argparse.Namespace], Outcome], str]] = {
        "solve": (_run_solve, "Solve the scalar minimax problem of a problem file."),
        "certify": (_run_certify, "Recover and verify an optimality certificate."),
        "worstcase": (_run_matrix("worstcase", 0), "Build the worst-case vector for a matrix file."),
        "verify": (_run_matrix("verify", None), "Run every max-min/min-max check on a matrix file."),
        "commuting": (_run_commuting, "Run the checks on a commuting family file."),
    }
    for name, (handler, help_text) in handlers.items():
        sub = commands.add_parser(name, help=help_text)
        sub.add_argument("input", type=Path, help="Input JSON file.")
        _add_common_flags(sub)
        sub.set_defaults(handler=handler)

    demo = commands.add_parser("demo", help="Run the built-in instances.")
    demo.add_argument("--instance", choices=sorted(DEMO_INSTANCES), default=None)
    _add_common_flags(demo)
    demo.set_defaults(handler=_run_demo)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    logging.basicConfig(
        level=settings.log_level,
        stream=sys.stderr,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        force=True,
    )
    ensure_logfire()

    try:
        report, code = args.handler(args)
    except NotOptimalError as exc:
        LOGGER.error("not optimal: %s", exc)
        return EXIT_CHECK_FAILED
    except RealnessError as exc:
        LOGGER.error("realness check failed: %s", exc)
        return EXIT_CHECK_FAILED
    except ConvergenceError as exc:
        LOGGER.error("did not converge: %s", exc)
        return EXIT_NOT_CONVERGED
    except (OSError, json.JSONDecodeError, ValidationError, InputValidationError) as exc:
        LOGGER.error("invalid input: %s", exc)
        return EXIT_INPUT_ERROR

    try:
        text = format_json(report.model_dump(mode="json"))
    except ValueError as exc:
        LOGGER.error("report contains non-finite values: %s", exc)
        return EXIT_CHECK_FAILED
    sys.stdout.write(text + "\n")
    return code


__all__ = ["build_parser", "format_json", "main"]
