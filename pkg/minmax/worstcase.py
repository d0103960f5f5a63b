"""Worst-case unit vectors attaining the matrix min-max value.

Given certificate weights ``omega`` on extremal points, the vector
``v* = Q xi`` with ``|xi_j|^2 = omega_j`` on the matching eigenvalue indices
makes the vector-level best approximation error equal to ``delta``. The real
case first realizes the coefficients, then closes the support under
conjugation so that ``xi`` is symmetric over conjugate eigenpairs and ``v*``
comes out real.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from typing import Literal

import numpy as np

from .certificate import Certificate, condition_vector
from .config import settings
from .errors import (
    DecompositionMismatchError,
    InputValidationError,
    RealnessError,
    SymmetryError,
)
from .matrix_bridge import SpectralDecomposition, check_alignment
from .minimax import MinimaxSolution
from .problem import (
    Coefficients,
    EvaluationTable,
    FieldMode,
    PointSet,
    conjugate_pairing,
    default_point_tol,
    validate_conjugate_symmetry,
)
from .schemas import SymmetrizedCertificateModel, WorstCaseModel, to_pairs

LOGGER = logging.getLogger(__name__)

Spread = Literal["first", "even"]


@dataclass(frozen=True, eq=False)
class SymmetrizedCertificate:
    """Conjugate-closed support ``theta`` with merged weights ``omega_tilde``.

    ``positions`` are the indices of ``theta`` in Gamma; ``pairing[i]`` is the
    position in ``theta`` of ``conj(theta[i])``.
    """

    theta: np.ndarray
    omega_tilde: np.ndarray
    pairing: np.ndarray
    positions: np.ndarray
    condition_residual: float
    solution: MinimaxSolution

    @property
    def m(self) -> int:
        return int(self.theta.size)

    def to_model(self) -> SymmetrizedCertificateModel:
        return SymmetrizedCertificateModel(
            theta=to_pairs(self.theta),
            omega_tilde=[float(w) for w in self.omega_tilde],
            pairing=[int(i) for i in self.pairing],
            condition_residual=float(self.condition_residual),
        )


@dataclass(frozen=True, eq=False)
class WorstCaseVector:
    """Unit vector ``v*``, its eigen-coordinates ``xi`` and the error it attains."""

    v_star: np.ndarray
    xi: np.ndarray
    attained: float
    orthogonality_residual: float
    field_mode: FieldMode

    def to_model(self) -> WorstCaseModel:
        return WorstCaseModel(v=to_pairs(self.v_star), attained=float(self.attained))


def _evaluate(
    decomp: SpectralDecomposition,
    table: EvaluationTable,
    owner: np.ndarray,
    residuals: np.ndarray,
    xi: np.ndarray,
) -> tuple[float, float]:
    """Return ``||f(A)v - p*(A)v||`` and the worst inner product with ``phi_i(A)v``.

    Both are computed in eigen-coordinates, where ``f(A)v - p*(A)v`` is
    ``Q (r o xi)`` and ``phi_i(A)v`` is ``Q (Phi_i o xi)``.
    """

    error = residuals[owner] * xi
    attained = float(np.linalg.norm(error))
    directions = table.Phi[owner, :] * xi[:, None]
    inner = directions.conj().T @ error
    return attained, float(np.max(np.abs(inner))) if inner.size else 0.0


def _finish(
    decomp: SpectralDecomposition,
    table: EvaluationTable,
    owner: np.ndarray,
    residuals: np.ndarray,
    xi: np.ndarray,
    field_mode: FieldMode,
) -> WorstCaseVector:
    norm = np.linalg.norm(xi)
    if norm == 0.0:
        raise InputValidationError("certificate carries no weight")
    xi = xi / norm
    v_star = decomp.Q @ xi
    if field_mode == "real":
        imaginary = float(np.max(np.abs(v_star.imag)))
        if imaginary > settings.realness_tol:
            raise RealnessError(
                f"pairing does not yield a real vector (max |Im v*| = {imaginary:.3e})",
                imaginary=imaginary,
            )
        v_star = v_star.real.astype(np.complex128)
        v_star = v_star / np.linalg.norm(v_star)
    attained, orthogonality = _evaluate(decomp, table, owner, residuals, xi)
    return WorstCaseVector(
        v_star=v_star,
        xi=xi,
        attained=attained,
        orthogonality_residual=orthogonality,
        field_mode=field_mode,
    )


def complex_worst_vector(
    cert: Certificate,
    decomp: SpectralDecomposition,
    gamma: PointSet | None = None,
    spread: Spread = "first",
) -> WorstCaseVector:
    """Build ``v* = Q xi`` with ``|xi_j|^2`` equal to the certificate weights.

    A point's weight goes to the first eigenvalue index of its class, or is
    split evenly over the whole class with ``spread="even"``.
    """

    table = cert.solution.table
    gamma = gamma or table.gamma
    if gamma.size != table.n:
        raise DecompositionMismatchError("point set does not match the certificate's table")
    owner = check_alignment(decomp, gamma)

    xi = np.zeros(decomp.n, dtype=np.complex128)
    for position, weight in zip(cert.support, cert.omega):
        members = gamma.multiplicity_map[int(position)]
        if spread == "even":
            xi[list(members)] = np.sqrt(weight / len(members))
        else:
            xi[gamma.first_index(int(position))] = np.sqrt(weight)
    return _finish(decomp, table, owner, cert.solution.residuals, xi, "complex")


def realize_polynomial(alpha: Coefficients, table: EvaluationTable) -> Coefficients:
    """Replace the coefficients by their real parts.

    On conjugate-symmetric data the real part is the average of ``p`` and its
    reflection ``conj(p(conj z))``, so the maximum error cannot grow.
    """

    if table.conjugate_index is None:
        report = validate_conjugate_symmetry(table)
        if not report.passed:
            raise SymmetryError("cannot realize coefficients: " + "; ".join(report.failures()))
    return Coefficients(alpha.alpha.real.astype(np.complex128))


def realize_solution(sol: MinimaxSolution) -> MinimaxSolution:
    """Re-evaluate a solution at its realized coefficients."""

    alpha = realize_polynomial(sol.alpha_star, sol.table)
    residuals = sol.table.residuals(alpha)
    delta = float(np.max(np.abs(residuals)))
    if delta > sol.delta + 1e-12 * max(1.0, sol.delta):
        LOGGER.warning("Realized coefficients increased the error: %.6e -> %.6e", sol.delta, delta)
    return replace(
        sol,
        alpha_star=alpha,
        residuals=residuals,
        lower_bound=min(sol.lower_bound, delta),
    )


def symmetrize_certificate(
    cert: Certificate, gamma: PointSet | None = None, pair_tol: float | None = None
) -> SymmetrizedCertificate:
    """Close the support under conjugation, halving weights across conjugate pairs.

    A real point keeps its weight. A non-real point sends half its weight to
    its conjugate, so a pair present in the support ends with the average of
    the two weights.
    """

    table = cert.solution.table
    gamma = gamma or table.gamma
    points = gamma.points
    tol = default_point_tol(points) if pair_tol is None else float(pair_tol)
    conjugate = conjugate_pairing(points, tol)

    accumulated = np.zeros(gamma.size)
    for position, weight in zip(cert.support, cert.omega):
        partner = conjugate[int(position)]
        if partner < 0:
            raise SymmetryError(
                f"conjugate of support point {points[int(position)]:.6g} is not in the point set"
            )
        accumulated[int(position)] += 0.5 * weight
        accumulated[partner] += 0.5 * weight

    positions = np.flatnonzero(accumulated > 0.0)
    omega_tilde = accumulated[positions] / accumulated[positions].sum()
    lookup = {int(position): i for i, position in enumerate(positions)}
    pairing = np.array([lookup[int(conjugate[p])] for p in positions], dtype=np.intp)

    residual = float(
        np.max(np.abs(condition_vector(table, cert.solution.residuals, positions, omega_tilde)))
    )
    return SymmetrizedCertificate(
        theta=points[positions].copy(),
        omega_tilde=omega_tilde,
        pairing=pairing,
        positions=positions,
        condition_residual=residual,
        solution=cert.solution,
    )


def real_worst_vector(
    symcert: SymmetrizedCertificate,
    decomp: SpectralDecomposition,
    gamma: PointSet | None = None,
) -> WorstCaseVector:
    """Build a real ``v*`` from a symmetrized certificate and a paired decomposition.

    ``xi`` is real and takes equal values on ``j`` and ``pairing[j]``, so the
    eigenvectors enter ``Q xi`` in conjugate pairs. A real point whose
    eigenvector is paired with another index of the same class splits its
    weight over both.
    """

    table = symcert.solution.table
    gamma = gamma or table.gamma
    pairing = decomp.pairing
    if pairing is None:
        raise DecompositionMismatchError("real worst-case vector needs eigenpair pairing")
    if not np.all(pairing[pairing] == np.arange(decomp.n)):
        raise DecompositionMismatchError("pairing is not an involution")
    owner = check_alignment(decomp, gamma)
    scale = 1.0 + float(np.max(np.abs(decomp.lambdas)))
    if np.max(np.abs(decomp.lambdas[pairing] - np.conj(decomp.lambdas))) > 1e-8 * scale:
        raise DecompositionMismatchError("paired eigenvalues are not conjugate")

    weight_at = {int(p): float(w) for p, w in zip(symcert.positions, symcert.omega_tilde)}
    xi = np.zeros(decomp.n, dtype=np.complex128)
    handled: set[int] = set()
    for position, weight in weight_at.items():
        if position in handled:
            continue
        j = gamma.first_index(position)
        partner = int(pairing[j])
        partner_point = int(owner[partner])
        if partner == j:
            xi[j] = np.sqrt(weight)
        elif partner_point == position:
            xi[j] = xi[partner] = np.sqrt(0.5 * weight)
        else:
            xi[j] = np.sqrt(weight)
            xi[partner] = np.sqrt(weight_at.get(partner_point, weight))
            handled.add(partner_point)
        handled.add(position)

    return _finish(decomp, table, owner, symcert.solution.residuals, xi, "real")


def conjugation_identity_residual(
    table: EvaluationTable, residuals: np.ndarray, basis_index: int
) -> float:
    """Largest ``|zeta(conj z) - conj(zeta(z))|`` over Gamma.

    ``zeta(z) = r(z) conj(phi_i(z))``; the identity holds for real coefficients
    on conjugate-symmetric data.
    """

    conjugate = table.conjugate_index
    if conjugate is None:
        conjugate = conjugate_pairing(table.gamma.points, default_point_tol(table.gamma.points))
    if np.any(conjugate < 0):
        raise SymmetryError("point set is not closed under conjugation")
    zeta = residuals * np.conj(table.Phi[:, basis_index])
    return float(np.max(np.abs(zeta[conjugate] - np.conj(zeta))))


__all__ = [
    "SymmetrizedCertificate",
    "WorstCaseVector",
    "complex_worst_vector",
    "conjugation_identity_residual",
    "real_worst_vector",
    "realize_polynomial",
    "realize_solution",
    "symmetrize_certificate",
]
