"""Optimality certificates for discrete minimax solutions.

A certificate is a set of extremal points together with positive convex
weights for which the weighted residual is orthogonal to every basis function:
``sum_j omega_j r(mu_j) conj(phi_i(mu_j)) = 0``. Its existence is equivalent to
optimality, so failing to recover one refutes the candidate coefficients.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace

import numpy as np
import scipy.linalg
from scipy.optimize import nnls

from .config import settings
from .errors import InputValidationError, NotOptimalError
from .minimax import MinimaxSolution, dual_lower_bound
from .problem import EvaluationTable, FieldMode
from .schemas import CertificateModel, CheckResult, ValidationReport

LOGGER = logging.getLogger(__name__)

_WEIGHT_DROP = 1e-15
_NULL_TOL = 1e-10
_AMBIGUOUS_BAND = (1e-12, 1e-8)
_GAP_SLACK = 10.0


@dataclass(frozen=True, eq=False)
class Certificate:
    """Support indices into Gamma with positive convex weights."""

    support: np.ndarray
    omega: np.ndarray
    condition_residual: float
    field_mode: FieldMode
    solution: MinimaxSolution
    trivial: bool = False
    prune_ambiguous: bool = False

    @property
    def ell(self) -> int:
        return int(self.support.size)

    def full_weights(self) -> np.ndarray:
        """Return the weights extended by zeros to every point of Gamma."""

        weights = np.zeros(self.solution.table.n)
        weights[self.support] = self.omega
        return weights

    def to_model(self) -> CertificateModel:
        return CertificateModel(
            support=[int(j) for j in self.support],
            omega=[float(w) for w in self.omega],
            condition_residual=float(self.condition_residual),
            ell=self.ell,
        )


def condition_vector(
    table: EvaluationTable, residuals: np.ndarray, support: np.ndarray, omega: np.ndarray
) -> np.ndarray:
    """Return ``sum_j omega_j r(mu_j) conj(phi_i(mu_j))`` for every basis function."""

    moments = residuals[support, None] * np.conj(table.Phi[support, :])
    return omega @ moments


def _moment_system(table: EvaluationTable, residuals: np.ndarray, support: np.ndarray) -> np.ndarray:
    """Stack real and imaginary parts of the moments with the normalization row."""

    moments = (residuals[support, None] * np.conj(table.Phi[support, :])).T
    return np.vstack([moments.real, moments.imag, np.ones((1, support.size))])


def support_bound(table: EvaluationTable, support: np.ndarray) -> int:
    """Largest support size guaranteed by the characterization theorem."""

    points = table.gamma.points[support]
    if table.field_mode == "real" and np.all(np.abs(points.imag) <= 1e-14 * (1 + np.abs(points))):
        return table.k + 1
    return 2 * table.k + 1


def activity_slack(sol: MinimaxSolution, tol: float) -> float:
    """Absolute deficit below ``delta`` that still counts as extremal.

    A converged solve is only known to within its certified gap, so its
    extremal points may sit a few gaps below ``delta``.
    """

    slack = tol * sol.delta
    if sol.converged:
        slack = max(slack, _GAP_SLACK * sol.gap)
    return slack


def extract_active_set(sol: MinimaxSolution, active_tol: float | None = None) -> np.ndarray:
    """Return indices where ``|r_j| >= delta * (1 - active_tol)``, widened by the gap."""

    tol = settings.active_tol if active_tol is None else float(active_tol)
    modulus = np.abs(sol.residuals)
    active = np.flatnonzero(modulus >= sol.delta - activity_slack(sol, tol))
    return active.astype(np.intp)


def recover_weights(
    sol: MinimaxSolution, active: np.ndarray, cond_tol: float | None = None
) -> Certificate:
    """Find positive convex weights on ``active`` satisfying the orthogonality condition.

    The stacked real system (moments, normalization) is solved by nonnegative
    least squares. A residual above ``cond_tol * max(1, delta)`` at the NNLS
    optimum raises :class:`NotOptimalError`.
    """

    tol = settings.cond_tol if cond_tol is None else float(cond_tol)
    active = np.asarray(active, dtype=np.intp)
    if active.size == 0:
        raise InputValidationError("active set must be nonempty")

    table = sol.table
    delta = sol.delta
    if delta == 0.0:
        return Certificate(
            support=active[:1].copy(),
            omega=np.ones(1),
            condition_residual=0.0,
            field_mode=table.field_mode,
            solution=sol,
            trivial=True,
        )

    system = _moment_system(table, sol.residuals, active)
    rhs = np.zeros(system.shape[0])
    rhs[-1] = 1.0
    weights, _ = nnls(system, rhs, maxiter=50 * max(system.shape))

    total = float(weights.sum())
    if not total > 0.0:
        raise NotOptimalError(
            "no nonnegative weights satisfy the orthogonality condition; "
            "the coefficients are not optimal",
            residual=float("inf"),
        )
    weights = weights / total
    keep = weights > _WEIGHT_DROP
    support = active[keep]
    omega = weights[keep] / weights[keep].sum()

    residual = float(np.max(np.abs(condition_vector(table, sol.residuals, support, omega))))
    if residual > tol * max(1.0, delta):
        raise NotOptimalError(
            f"orthogonality condition residual {residual:.3e} exceeds "
            f"{tol:.1e} * max(1, delta); the coefficients are not optimal",
            residual=residual,
        )

    return Certificate(
        support=support,
        omega=omega,
        condition_residual=residual,
        field_mode=table.field_mode,
        solution=sol,
    )


def caratheodory_prune(cert: Certificate, table: EvaluationTable | None = None) -> Certificate:
    """Shrink the support along null directions of the moment system.

    Each step moves the weights along a null vector until at least one weight
    vanishes, then drops the vanished points. The loop ends when the moment
    columns are independent, which leaves at most ``2k+1`` points (``k+1`` for
    real data on real points).
    """

    table = table or cert.solution.table
    residuals = cert.solution.residuals
    support = cert.support.copy()
    omega = cert.omega.copy()

    while support.size > 1:
        system = _moment_system(table, residuals, support)
        _, singular, vh = scipy.linalg.svd(system)
        scale = singular[0] if singular.size else 0.0
        padded = np.zeros(support.size)
        padded[: singular.size] = singular
        low, high = _AMBIGUOUS_BAND
        if np.any((padded > low * scale) & (padded < high * scale)):
            LOGGER.warning("Carathéodory pruning stopped: numerically ambiguous rank")
            return replace(cert, prune_ambiguous=True)

        null_rows = np.flatnonzero(padded <= _NULL_TOL * scale)
        if null_rows.size == 0:
            break

        direction = vh[null_rows[0]]
        lead = np.flatnonzero(np.abs(direction) > 1e-12 * np.max(np.abs(direction)))[0]
        if direction[lead] < 0:
            direction = -direction

        negative = direction < 0
        if not np.any(negative):
            break
        step = float(np.min(omega[negative] / -direction[negative]))
        omega = omega + step * direction
        keep = omega > _WEIGHT_DROP * max(1.0, float(np.max(omega)))
        support, omega = support[keep], omega[keep]
        omega = omega / omega.sum()

    residual = float(np.max(np.abs(condition_vector(table, residuals, support, omega))))
    return replace(cert, support=support, omega=omega, condition_residual=residual)


def verify_certificate(
    cert: Certificate,
    sol: MinimaxSolution,
    table: EvaluationTable,
    tol: float | None = None,
) -> ValidationReport:
    """Check activity, positivity, normalization, orthogonality and support size."""

    tol = settings.cond_tol if tol is None else float(tol)
    delta = sol.delta
    scale = max(1.0, delta)
    support = np.asarray(cert.support, dtype=np.intp)
    omega = np.asarray(cert.omega, dtype=np.float64)
    checks: list[CheckResult] = []

    if support.size != omega.size or support.size == 0:
        return ValidationReport(
            checks=[CheckResult(name="dimensions", passed=False, detail="support/omega mismatch")]
        )
    if np.any(support < 0) or np.any(support >= table.n):
        return ValidationReport(
            checks=[CheckResult(name="dimensions", passed=False, detail="support out of range")]
        )

    modulus = np.abs(sol.residuals[support])
    deficit = float(np.max(delta - modulus)) / delta if delta > 0 else 0.0
    allowed = activity_slack(sol, tol) / delta if delta > 0 else tol
    checks.append(
        CheckResult(
            name="support_active",
            passed=deficit <= allowed,
            residual=max(deficit, 0.0),
            detail=None if deficit <= allowed else "a support point is not extremal",
        )
    )

    distinct = np.unique(support).size == support.size
    checks.append(CheckResult(name="support_distinct", passed=distinct))

    smallest = float(np.min(omega))
    checks.append(CheckResult(name="weights_positive", passed=smallest > 0.0, residual=smallest))

    drift = abs(float(omega.sum()) - 1.0)
    checks.append(CheckResult(name="weights_normalized", passed=drift <= 1e-12, residual=drift))

    condition = float(np.max(np.abs(condition_vector(table, sol.residuals, support, omega))))
    checks.append(
        CheckResult(
            name="orthogonality_condition",
            passed=condition <= tol * scale,
            residual=condition,
            detail=None if condition <= tol * scale else "weighted residual not orthogonal",
        )
    )

    if delta > 0 and checks[-1].passed and smallest > 0.0:
        weights = np.zeros(table.n)
        weights[support] = omega / omega.sum()
        tightness = abs(dual_lower_bound(table, weights) - delta)
        checks.append(
            CheckResult(
                name="duality_tight",
                passed=tightness <= tol * scale,
                residual=tightness,
            )
        )

    bound = support_bound(table, support)
    mixed_real = table.field_mode == "real" and bound == 2 * table.k + 1
    checks.append(
        CheckResult(
            name="support_size",
            passed=support.size <= bound,
            residual=float(support.size),
            informational=mixed_real,
            detail=f"ell={support.size}, bound={bound}",
        )
    )
    return ValidationReport(checks=checks)


__all__ = [
    "Certificate",
    "activity_slack",
    "caratheodory_prune",
    "condition_vector",
    "extract_active_set",
    "recover_weights",
    "support_bound",
    "verify_certificate",
]
