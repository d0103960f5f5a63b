"""The scalar approximation problem on a finite point set.

A problem is stored purely as values: ``F[j] = f(gamma_j)`` and
``Phi[j, i] = phi_i(gamma_j)``. Builders evaluate the two named instances
(GMRES and Chebyshev) or accept custom tables.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from typing import Literal, Sequence

import numpy as np

from .errors import InputValidationError, SymmetryError
from .numerics import as_complex_matrix, as_complex_vector
from .schemas import CheckResult, ValidationReport

LOGGER = logging.getLogger(__name__)

FieldMode = Literal["real", "complex"]


def default_point_tol(points: np.ndarray) -> float:
    """Return the dedupe/pairing tolerance ``1e-10 * (1 + max |z|)``."""

    if points.size == 0:
        return 1e-10
    return 1e-10 * (1.0 + float(np.max(np.abs(points))))


@dataclass(frozen=True, eq=False)
class PointSet:
    """Distinct points of Gamma with the eigenvalue indices each one represents."""

    points: np.ndarray
    multiplicity_map: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        if len(self.multiplicity_map) != self.points.shape[0]:
            raise InputValidationError("multiplicity map must have one entry per point")
        covered = sorted(index for members in self.multiplicity_map for index in members)
        if covered != list(range(len(covered))):
            raise InputValidationError("multiplicity map must partition 0..N-1")

    @property
    def size(self) -> int:
        """Number of distinct points."""

        return int(self.points.shape[0])

    @property
    def original_size(self) -> int:
        """Number of eigenvalue indices represented."""

        return sum(len(members) for members in self.multiplicity_map)

    def point_of_index(self) -> np.ndarray:
        """Return, for every original index, the position of its point."""

        owner = np.empty(self.original_size, dtype=np.intp)
        for position, members in enumerate(self.multiplicity_map):
            owner[list(members)] = position
        return owner

    def first_index(self, position: int) -> int:
        """Return the smallest original index represented by a point."""

        return min(self.multiplicity_map[position])

    @classmethod
    def from_points(cls, points: Sequence[complex] | np.ndarray) -> "PointSet":
        """Wrap already distinct points, one original index each."""

        array = as_complex_vector(points, name="points")
        return cls(points=array, multiplicity_map=tuple((j,) for j in range(array.size)))


def from_spectrum(
    eigenvalues: Sequence[complex] | np.ndarray, dedupe_tol: float | None = None
) -> PointSet:
    """Deduplicate a spectrum into a point set with a multiplicity map.

    Eigenvalues are swept in lexicographic order (real part, then imaginary
    part); each joins the first existing cluster whose representative lies
    within ``dedupe_tol``, otherwise it opens a new cluster. The anchor that
    opened a cluster is its representative, so every member lies within
    ``dedupe_tol`` of it. Points are ordered by smallest original index.
    """

    values = as_complex_vector(eigenvalues, name="eigenvalues")
    if values.size == 0:
        raise InputValidationError("spectrum must be nonempty")
    tol = default_point_tol(values) if dedupe_tol is None else float(dedupe_tol)

    order = np.lexsort((values.imag, values.real))
    clusters: list[list[int]] = []
    anchors: list[complex] = []
    for index in order:
        value = values[index]
        for cluster, anchor in zip(clusters, anchors):
            if abs(value - anchor) <= tol:
                cluster.append(int(index))
                break
        else:
            clusters.append([int(index)])
            anchors.append(value)

    ranked = sorted(zip(clusters, anchors), key=lambda item: min(item[0]))
    points = np.array([anchor for _, anchor in ranked], dtype=np.complex128)
    multiplicity = tuple(tuple(sorted(cluster)) for cluster, _ in ranked)
    return PointSet(points=points, multiplicity_map=multiplicity)


@dataclass(frozen=True, eq=False)
class Coefficients:
    """Coefficients ``alpha`` of ``p = sum_i alpha_i phi_i``."""

    alpha: np.ndarray

    @property
    def k(self) -> int:
        return int(self.alpha.shape[0])

    def is_real(self, tol: float = 1e-10) -> bool:
        """Return whether every imaginary part is within ``tol``."""

        return bool(np.all(np.abs(self.alpha.imag) <= tol))


@dataclass(frozen=True, eq=False)
class EvaluationTable:
    """Values of ``f`` and of the basis functions on every point of Gamma."""

    gamma: PointSet
    F: np.ndarray
    Phi: np.ndarray
    field_mode: FieldMode = "complex"
    conjugate_index: np.ndarray | None = None

    def __post_init__(self) -> None:
        if self.F.shape != (self.gamma.size,):
            raise InputValidationError(
                f"F must have one value per point ({self.gamma.size}), got {self.F.shape}"
            )
        if self.Phi.ndim != 2 or self.Phi.shape[0] != self.gamma.size:
            raise InputValidationError(
                f"Phi must have {self.gamma.size} rows, got shape {self.Phi.shape}"
            )
        if self.Phi.shape[1] < 1:
            raise InputValidationError("at least one basis function is required")
        if self.field_mode not in ("real", "complex"):
            raise InputValidationError(f"unknown field mode {self.field_mode!r}")

    @property
    def n(self) -> int:
        return self.gamma.size

    @property
    def k(self) -> int:
        return int(self.Phi.shape[1])

    def residuals(self, alpha: Coefficients | np.ndarray) -> np.ndarray:
        """Return ``f - p`` on every point."""

        values = alpha.alpha if isinstance(alpha, Coefficients) else np.asarray(alpha)
        if values.shape != (self.k,):
            raise InputValidationError(f"expected {self.k} coefficients, got {values.shape}")
        return self.F - self.Phi @ values

    def max_error(self, alpha: Coefficients | np.ndarray) -> float:
        """Return ``||f - p||_Gamma``."""

        return float(np.max(np.abs(self.residuals(alpha))))


@dataclass(frozen=True)
class Gmres:
    """``f = 1`` and ``phi_i(z) = z^i`` for ``i = 1..k``."""

    k: int


@dataclass(frozen=True)
class Chebyshev:
    """``f = z^k`` and ``phi_i(z) = z^(i-1)`` for ``i = 1..k``."""

    k: int


@dataclass(frozen=True, eq=False)
class Custom:
    """Explicit value tables, one row per point of Gamma."""

    F: Sequence[complex] | np.ndarray
    Phi: Sequence[Sequence[complex]] | np.ndarray


BasisKind = Gmres | Chebyshev | Custom


def _powers(points: np.ndarray, count: int) -> np.ndarray:
    """Return columns ``z^0 .. z^(count-1)`` by repeated multiplication."""

    table = np.empty((points.size, count), dtype=np.complex128)
    current = np.ones(points.size, dtype=np.complex128)
    for column in range(count):
        table[:, column] = current
        current = current * points
    return table


def build_basis_problem(
    gamma: PointSet, kind: BasisKind, mode: FieldMode = "complex"
) -> EvaluationTable:
    """Evaluate ``f`` and the basis on Gamma and assemble the table.

    In real mode the conjugate-symmetry condition is validated and a violation
    raises :class:`SymmetryError`.
    """

    points = gamma.points
    if isinstance(kind, (Gmres, Chebyshev)):
        if kind.k < 1:
            raise InputValidationError("basis size k must be at least 1")
        powers = _powers(points, kind.k + 1)
        if isinstance(kind, Gmres):
            F = np.ones(points.size, dtype=np.complex128)
            Phi = powers[:, 1:]
        else:
            F = powers[:, kind.k].copy()
            Phi = powers[:, : kind.k]
    elif isinstance(kind, Custom):
        F = as_complex_vector(kind.F, name="F")
        Phi = as_complex_matrix(kind.Phi, name="Phi")
    else:
        raise InputValidationError(f"unsupported basis kind {kind!r}")

    table = EvaluationTable(gamma=gamma, F=F, Phi=np.ascontiguousarray(Phi), field_mode=mode)
    if mode == "real":
        report, conjugate = _symmetry_report(table, None)
        if not report.passed:
            raise SymmetryError(
                "conjugate symmetry violated: " + "; ".join(report.failures())
            )
        table = replace(table, conjugate_index=conjugate)
    return table


def conjugate_pairing(points: np.ndarray, pair_tol: float) -> np.ndarray:
    """Return for every point the index of its nearest conjugate, ``-1`` if absent."""

    conjugate = np.full(points.size, -1, dtype=np.intp)
    for j, value in enumerate(points):
        distances = np.abs(points - np.conj(value))
        s = int(np.argmin(distances))
        if distances[s] <= pair_tol:
            conjugate[j] = s
    return conjugate


def _symmetry_report(
    table: EvaluationTable, pair_tol: float | None
) -> tuple[ValidationReport, np.ndarray]:
    points = table.gamma.points
    tol = default_point_tol(points) if pair_tol is None else float(pair_tol)
    conjugate = conjugate_pairing(points, tol)

    missing = [j for j in range(points.size) if conjugate[j] < 0]
    checks = [
        CheckResult(
            name="conjugate_closed",
            passed=not missing,
            residual=float(len(missing)),
            detail="; ".join(f"point {j} ({points[j]:.6g}) has no conjugate" for j in missing)
            or None,
        )
    ]

    f_failures: list[str] = []
    phi_failures: list[str] = []
    worst_f = 0.0
    worst_phi = 0.0
    for j, s in enumerate(conjugate):
        if s < 0:
            continue
        gap = abs(np.conj(table.F[j]) - table.F[s])
        worst_f = max(worst_f, gap)
        if gap > tol * (1.0 + abs(table.F[j])):
            f_failures.append(f"conj f at point {j} differs from f at point {s} by {gap:.3e}")
        for i in range(table.k):
            gap = abs(np.conj(table.Phi[j, i]) - table.Phi[s, i])
            worst_phi = max(worst_phi, gap)
            if gap > tol * (1.0 + abs(table.Phi[j, i])):
                phi_failures.append(
                    f"conj phi_{i + 1} at point {j} differs from point {s} by {gap:.3e}"
                )

    checks.append(
        CheckResult(
            name="f_conjugate_symmetric",
            passed=not f_failures,
            residual=worst_f,
            detail="; ".join(f_failures) or None,
        )
    )
    checks.append(
        CheckResult(
            name="basis_conjugate_symmetric",
            passed=not phi_failures,
            residual=worst_phi,
            detail="; ".join(phi_failures) or None,
        )
    )
    return ValidationReport(checks=checks), conjugate


def validate_conjugate_symmetry(
    table: EvaluationTable, pair_tol: float | None = None
) -> ValidationReport:
    """Check that Gamma is conjugate-closed and ``f``, ``phi_i`` commute with conjugation."""

    report, _ = _symmetry_report(table, pair_tol)
    return report


__all__ = [
    "BasisKind",
    "Chebyshev",
    "Coefficients",
    "Custom",
    "EvaluationTable",
    "FieldMode",
    "Gmres",
    "PointSet",
    "build_basis_problem",
    "conjugate_pairing",
    "default_point_tol",
    "from_spectrum",
    "validate_conjugate_symmetry",
]
