"""Discrete minimax approximation by Lawson's iteratively reweighted least squares.

Every iterate solves a weighted least-squares problem. Its weighted error is a
lower bound on the optimum and its maximum residual is an upper bound, so the
loop stops on a certified duality gap. The weights at the fixed point satisfy
the orthogonality condition that characterizes best approximations, which is
what the certificate module recovers.

Lawson converges linearly and can crawl on near-degenerate active sets. Once
the gap is small, the optimality conditions restricted to the extremal points
are solved directly (equal moduli, orthogonality, convex weights) and the
result replaces the iterate whenever it certifies a smaller gap.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import least_squares, nnls
from tenacity import Retrying, before_sleep_log, retry_if_result, stop_after_attempt

from .config import settings
from .errors import InputValidationError
from .numerics import weighted_least_squares
from .problem import Coefficients, EvaluationTable

LOGGER = logging.getLogger(__name__)

_NORMALIZATION_TOL = 1e-10
_REFINE_ROUNDS = 6
_REFINE_BAND = 10.0
_REFINE_WEIGHT_TOL = 1e-6
_REFINE_SUPPORT_TOL = 1e-10
_SHARP_GAP = 1e-12

Iterate = tuple[float, np.ndarray, np.ndarray, float, np.ndarray]


@dataclass(frozen=True)
class SolverOptions:
    """Tuning knobs of the Lawson iteration."""

    gap_tol: float = settings.gap_tol
    max_iter: int = settings.max_iter
    weight_floor: float = settings.weight_floor
    restarts: int = settings.solver_restarts
    stagnation_window: int = 50
    stagnation_factor: float = 0.999
    accel_exponent: float = 2.0
    accel_steps: int = 10
    refine: bool = True
    refine_below: float = 1e-3

    def __post_init__(self) -> None:
        if self.gap_tol <= 0.0 or self.max_iter < 1 or self.restarts < 0:
            raise InputValidationError("gap_tol > 0, max_iter >= 1, restarts >= 0 required")
        if self.stagnation_window < 1 or not 0.0 < self.refine_below <= 1.0:
            raise InputValidationError("stagnation_window >= 1 and 0 < refine_below <= 1 required")


@dataclass(frozen=True, eq=False)
class MinimaxSolution:
    """Best iterate of a minimax solve with its certified lower bound."""

    table: EvaluationTable
    alpha_star: Coefficients
    residuals: np.ndarray
    lower_bound: float
    lawson_weights: np.ndarray
    iterations: int
    converged: bool
    history: tuple[float, ...] = field(default=())
    accelerated: tuple[bool, ...] = field(default=())
    refined: bool = False

    @property
    def delta(self) -> float:
        """``||f - p*||_Gamma``, recomputed from the residuals."""

        return float(np.max(np.abs(self.residuals)))

    @property
    def gap(self) -> float:
        """Distance between the upper and lower bound."""

        return max(self.delta - self.lower_bound, 0.0)


def dual_lower_bound(table: EvaluationTable, omega: np.ndarray) -> float:
    """Return the weighted least-squares error, a lower bound on the optimum.

    For convex weights, ``min_alpha sqrt(sum_j omega_j |r_j|^2)`` never exceeds
    ``min_alpha max_j |r_j|``.
    """

    omega = np.asarray(omega, dtype=np.float64)
    if omega.shape != (table.n,):
        raise InputValidationError(f"expected {table.n} weights, got shape {omega.shape}")
    if np.any(omega < 0.0) or abs(float(omega.sum()) - 1.0) > _NORMALIZATION_TOL:
        raise InputValidationError("weights must be nonnegative and sum to one")

    alpha = weighted_least_squares(table.Phi, table.F, omega)
    r = table.F - table.Phi @ alpha
    return float(np.sqrt(np.sum(omega * np.abs(r) ** 2)))


def solution_from_coefficients(
    table: EvaluationTable, alpha: Coefficients | np.ndarray
) -> MinimaxSolution:
    """Wrap externally supplied coefficients so they can be certified or refuted."""

    coefficients = alpha if isinstance(alpha, Coefficients) else Coefficients(
        np.asarray(alpha, dtype=np.complex128)
    )
    uniform = np.full(table.n, 1.0 / table.n)
    return MinimaxSolution(
        table=table,
        alpha_star=coefficients,
        residuals=table.residuals(coefficients),
        lower_bound=dual_lower_bound(table, uniform),
        lawson_weights=uniform,
        iterations=0,
        converged=False,
    )


def _initial_weights(n: int, start: np.ndarray | None) -> np.ndarray:
    if start is None:
        return np.full(n, 1.0 / n)
    omega = np.asarray(start, dtype=np.float64).copy()
    if omega.shape != (n,) or np.any(omega < 0.0) or not np.any(omega > 0.0):
        raise InputValidationError("initial weights must be nonnegative, nonzero, one per point")
    return omega / omega.sum()


def _optimality_system(
    F: np.ndarray, Phi: np.ndarray, support: np.ndarray
) -> tuple[Callable[[np.ndarray], np.ndarray], Callable[[np.ndarray], np.ndarray]]:
    """Residual and Jacobian of the optimality conditions restricted to ``support``.

    The unknowns are ``x = (Re alpha, Im alpha, delta, omega)``. The equations
    are ``|r_j| = delta`` on the support, the real and imaginary parts of
    ``sum_j omega_j r_j conj(Phi_ji)`` and ``sum_j omega_j = 1``. There are as
    many equations as unknowns.
    """

    F_s, Phi_s = F[support], Phi[support]
    k, ell = Phi.shape[1], support.size

    def _unpack(x: np.ndarray) -> tuple[np.ndarray, float, np.ndarray]:
        return x[:k] + 1j * x[k : 2 * k], float(x[2 * k]), x[2 * k + 1 :]

    def fun(x: np.ndarray) -> np.ndarray:
        alpha, delta, omega = _unpack(x)
        r = F_s - Phi_s @ alpha
        moments = omega @ (r[:, None] * np.conj(Phi_s))
        return np.concatenate([np.abs(r) - delta, moments.real, moments.imag, [omega.sum() - 1.0]])

    def jac(x: np.ndarray) -> np.ndarray:
        alpha, _, omega = _unpack(x)
        r = F_s - Phi_s @ alpha
        modulus = np.maximum(np.abs(r), np.finfo(np.float64).tiny)
        slope = np.conj(r)[:, None] * Phi_s / modulus[:, None]
        gram = Phi_s.conj().T @ (omega[:, None] * Phi_s)
        moments = (r[:, None] * np.conj(Phi_s)).T

        J = np.zeros((ell + 2 * k + 1, 2 * k + 1 + ell))
        J[:ell, :k] = -slope.real
        J[:ell, k : 2 * k] = slope.imag
        J[:ell, 2 * k] = -1.0
        J[ell : ell + k, :k] = -gram.real
        J[ell : ell + k, k : 2 * k] = gram.imag
        J[ell : ell + k, 2 * k + 1 :] = moments.real
        J[ell + k : ell + 2 * k, :k] = -gram.imag
        J[ell + k : ell + 2 * k, k : 2 * k] = -gram.real
        J[ell + k : ell + 2 * k, 2 * k + 1 :] = moments.imag
        J[-1, 2 * k + 1 :] = 1.0
        return J

    return fun, jac


def _candidate_support(
    r: np.ndarray, Phi: np.ndarray, omega: np.ndarray, gap: float
) -> tuple[np.ndarray, np.ndarray]:
    """Pick extremal candidates and starting weights for the finishing step."""

    modulus = np.abs(r)
    delta = float(modulus.max())
    band = max(_REFINE_BAND * gap, 1e-12 * delta)
    candidates = np.flatnonzero(
        (modulus >= delta - band) | (omega >= _REFINE_WEIGHT_TOL * float(omega.max()))
    )

    moments = (r[candidates, None] * np.conj(Phi[candidates, :])).T
    system = np.vstack([moments.real, moments.imag, np.ones((1, candidates.size))])
    rhs = np.zeros(system.shape[0])
    rhs[-1] = 1.0
    weights, _ = nnls(system, rhs, maxiter=50 * max(system.shape))
    if not weights.sum() > 0.0:
        weights = omega[candidates].copy()

    keep = weights > _REFINE_SUPPORT_TOL * float(weights.max())
    weights = weights[keep]
    return candidates[keep], weights / weights.sum()


def _refine(
    table: EvaluationTable, alpha: np.ndarray, omega: np.ndarray
) -> tuple[np.ndarray, np.ndarray] | None:
    """Solve the optimality conditions on the extremal points, exchanging points.

    Returns coefficients and convex weights on Gamma, or ``None`` when no
    consistent extremal set was found.
    """

    F, Phi = table.F, table.Phi
    k = table.k
    r = F - Phi @ alpha
    upper = float(np.max(np.abs(r)))
    if upper == 0.0:
        return None
    lower = float(np.sqrt(np.sum(omega * np.abs(r) ** 2)))
    support, weights = _candidate_support(r, Phi, omega, max(upper - lower, 0.0))

    for _ in range(_REFINE_ROUNDS):
        if support.size == 0:
            return None
        fun, jac = _optimality_system(F, Phi, support)
        level = float(np.max(np.abs(r[support])))
        x0 = np.concatenate([alpha.real, alpha.imag, [level], weights])
        try:
            fit = least_squares(
                fun, x0, jac=jac, method="lm", xtol=1e-14, ftol=1e-14, gtol=1e-14,
                max_nfev=100 * (x0.size + 1),
            )
        except (ValueError, np.linalg.LinAlgError) as exc:
            LOGGER.debug("finishing step failed: %s", exc)
            return None

        alpha = fit.x[:k] + 1j * fit.x[k : 2 * k]
        level = float(fit.x[2 * k])
        weights = fit.x[2 * k + 1 :]
        r = F - Phi @ alpha

        negative = weights < -_REFINE_SUPPORT_TOL * max(1.0, float(np.max(np.abs(weights))))
        if np.any(negative):
            drop = int(np.argmin(weights))
            support = np.delete(support, drop)
            weights = np.clip(np.delete(weights, drop), 0.0, None)
            total = float(weights.sum())
            weights = weights / total if total > 0.0 else np.full(support.size, 1.0 / max(support.size, 1))
            continue

        outside = np.setdiff1d(np.arange(table.n), support)
        modulus = np.abs(r[outside])
        if outside.size and float(modulus.max()) > level * (1.0 + 1e-12) + 1e-300:
            entering = int(outside[np.argmax(modulus)])
            support = np.append(support, entering)
            weights = np.append(np.clip(weights, 0.0, None), 0.0)
            continue

        full = np.zeros(table.n)
        full[support] = np.clip(weights, 0.0, None)
        total = float(full.sum())
        if not total > 0.0:
            return None
        return alpha, full / total

    return None


def _evaluate_refined(
    table: EvaluationTable, alpha: np.ndarray, omega: np.ndarray
) -> Iterate | None:
    refined = _refine(table, alpha, omega)
    if refined is None:
        return None
    alpha_r, omega_r = refined
    r = table.F - table.Phi @ alpha_r
    lower = dual_lower_bound(table, omega_r)
    upper = float(np.max(np.abs(r)))
    return (upper - lower, alpha_r, r, lower, omega_r)


def _lawson(
    table: EvaluationTable, opts: SolverOptions, start: np.ndarray | None
) -> MinimaxSolution:
    """Run one Lawson attempt and return its smallest-gap iterate."""

    F, Phi = table.F, table.Phi
    omega = _initial_weights(table.n, start)

    def _tolerance(upper: float) -> float:
        return opts.gap_tol * max(1.0, upper)

    history: list[float] = []
    accelerated: list[bool] = []
    best: Iterate | None = None
    converged = False
    refined = False
    boosting = False
    boost_left = 0
    window_start, window_gap = 0, np.inf
    refine_at, refine_wait = opts.stagnation_window, opts.stagnation_window
    iteration = 0

    for iteration in range(1, opts.max_iter + 1):
        alpha = weighted_least_squares(Phi, F, omega)
        r = F - Phi @ alpha
        modulus = np.abs(r)
        lower = float(np.sqrt(np.sum(omega * modulus**2)))
        upper = float(np.max(modulus))
        history.append(lower)
        accelerated.append(boosting)

        gap = upper - lower
        if best is None or gap < best[0]:
            best = (gap, alpha, r, lower, omega)
        if gap <= _tolerance(upper):
            converged = True
            break

        if (
            opts.refine
            and iteration >= refine_at
            and upper > opts.gap_tol
            and gap <= opts.refine_below * upper
        ):
            candidate = _evaluate_refined(table, alpha, omega)
            if candidate is not None and candidate[0] < best[0]:
                best = candidate
                refined = True
                if candidate[0] <= _tolerance(float(np.max(np.abs(candidate[2])))):
                    converged = True
                    break
            refine_at, refine_wait = iteration + refine_wait, 2 * refine_wait

        if boost_left == 0 and iteration - window_start >= opts.stagnation_window:
            if gap > opts.stagnation_factor * window_gap:
                boost_left = opts.accel_steps
                LOGGER.debug("Lawson stagnating at gap %.3e; accelerating", gap)
            window_start, window_gap = iteration, gap

        exponent = opts.accel_exponent if boost_left > 0 else 1.0
        boosting = boost_left > 0
        boost_left = max(boost_left - 1, 0)

        update = omega * modulus**exponent
        total = float(update.sum())
        if not total > 0.0 or not np.isfinite(total):
            # Residuals vanish on the weighted support; only a restart can move on.
            break
        omega = update / total
        omega[omega < opts.weight_floor] = 0.0
        omega = omega / omega.sum()

    assert best is not None
    gap, alpha, r, _, omega = best
    upper = float(np.max(np.abs(r)))
    # Sharpen a converged but inexact iterate so its extremal points equioscillate.
    worth_refining = upper > opts.gap_tol and (
        (converged and gap > _SHARP_GAP * upper)
        or (not converged and gap <= opts.refine_below * upper)
    )
    if opts.refine and not refined and worth_refining:
        candidate = _evaluate_refined(table, alpha, omega)
        if candidate is not None:
            candidate_upper = float(np.max(np.abs(candidate[2])))
            candidate_converged = candidate[0] <= _tolerance(candidate_upper)
            if candidate_converged or candidate[0] < gap:
                best = candidate
                refined = True
                converged = converged or candidate_converged

    _, alpha, r, lower, omega = best
    return MinimaxSolution(
        table=table,
        alpha_star=Coefficients(alpha),
        residuals=r,
        lower_bound=min(lower, float(np.max(np.abs(r)))),
        lawson_weights=omega,
        iterations=iteration,
        converged=converged,
        history=tuple(history),
        accelerated=tuple(accelerated),
        refined=refined,
    )


def solve_minimax(
    table: EvaluationTable,
    opts: SolverOptions | None = None,
    initial_weights: np.ndarray | None = None,
) -> MinimaxSolution:
    """Solve ``min_alpha ||f - sum alpha_i phi_i||_Gamma`` with a certified gap.

    A non-converged attempt is retried from weights halfway between its best
    weights and the uniform distribution, which lets points whose weights were
    clamped to zero re-enter. Every attempt uses the same iteration cap. If no
    attempt converges the best one is returned with ``converged=False``.
    """

    opts = opts or SolverOptions()
    if table.n < 1:
        raise InputValidationError("cannot solve on an empty point set")

    attempts: list[MinimaxSolution] = []

    def _attempt() -> MinimaxSolution:
        if attempts:
            start = 0.5 * attempts[-1].lawson_weights + 0.5 / table.n
        else:
            start = initial_weights
        solution = _lawson(table, opts, start)
        attempts.append(solution)
        return solution

    def _best_attempt(_state: object) -> MinimaxSolution:
        return min(attempts, key=lambda sol: sol.gap / max(1.0, sol.delta))

    retrying = Retrying(
        stop=stop_after_attempt(opts.restarts + 1),
        retry=retry_if_result(lambda solution: not solution.converged),
        before_sleep=before_sleep_log(LOGGER, logging.WARNING),
        retry_error_callback=_best_attempt,
    )
    solution = retrying(_attempt)

    if not solution.converged:
        LOGGER.warning(
            "Lawson iteration did not converge: delta=%.6e lower=%.6e after %d iterations",
            solution.delta,
            solution.lower_bound,
            solution.iterations,
        )
    return solution


__all__ = [
    "MinimaxSolution",
    "SolverOptions",
    "dual_lower_bound",
    "solution_from_coefficients",
    "solve_minimax",
]
