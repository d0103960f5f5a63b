"""Bridge between scalar results and matrices.

Normal matrices are held as spectral decompositions ``A = Q diag(lambdas) Q^H``;
matrix functions, the vector-level best approximation, the matrix-level
optimum and the commuting-family reformulation are all evaluated through it.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.linalg

from .config import settings
from .errors import ConvergenceError, DecompositionMismatchError, InputValidationError
from .minimax import SolverOptions, solve_minimax
from .numerics import (
    as_complex_matrix,
    as_complex_vector,
    hermitian_eig,
    random_unit_vector,
    spectral_norm,
)
from .problem import (
    BasisKind,
    Coefficients,
    Custom,
    EvaluationTable,
    FieldMode,
    PointSet,
    build_basis_problem,
    from_spectrum,
)
from .schemas import CheckResult, ValidationReport

LOGGER = logging.getLogger(__name__)

_ALIGNMENT_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    """Unitary eigenvector matrix and eigenvalues of a normal matrix.

    In real mode ``pairing[j]`` is the index whose eigenvalue and eigenvector
    are the conjugates of those at ``j``.
    """

    Q: np.ndarray
    lambdas: np.ndarray
    field_mode: FieldMode = "complex"
    pairing: np.ndarray | None = None

    def __post_init__(self) -> None:
        n = self.lambdas.shape[0]
        if self.Q.shape != (n, n):
            raise InputValidationError(f"Q must be {n} x {n}, got {self.Q.shape}")
        if self.pairing is not None:
            if self.pairing.shape != (n,):
                raise InputValidationError("pairing must have one entry per eigenvalue")
            if np.any(self.pairing < 0) or np.any(self.pairing >= n):
                raise InputValidationError("pairing entries must index eigenvalues")

    @property
    def n(self) -> int:
        return int(self.lambdas.shape[0])

    def matrix(self) -> np.ndarray:
        """Reconstruct ``A = Q Lambda Q^H``."""

        return (self.Q * self.lambdas[None, :]) @ self.Q.conj().T

    @classmethod
    def from_hermitian(cls, H: np.ndarray, tol: float = 1e-10) -> "SpectralDecomposition":
        """Factor a Hermitian (or real symmetric) matrix."""

        H = as_complex_matrix(H, name="H")
        Q, lambdas = hermitian_eig(H, tol)
        if not np.any(H.imag):
            return cls(
                Q=Q,
                lambdas=lambdas.astype(np.complex128),
                field_mode="real",
                pairing=np.arange(H.shape[0]),
            )
        return cls(Q=Q, lambdas=lambdas.astype(np.complex128))


@dataclass(frozen=True, eq=False)
class CommutingFamily:
    """Matrices ``A_i = U diag(diagonals[i]) U^H`` for ``i = 0..k``."""

    U: np.ndarray
    diagonals: np.ndarray
    matrices: tuple[np.ndarray, ...] | None = None

    @property
    def k(self) -> int:
        return int(self.diagonals.shape[0]) - 1

    def explicit_matrices(self) -> tuple[np.ndarray, ...]:
        """Return the given matrices, or build them from ``U`` and the diagonals."""

        if self.matrices is not None:
            return self.matrices
        return tuple((self.U * d[None, :]) @ self.U.conj().T for d in self.diagonals)


def real_normal_decomposition(
    O: np.ndarray,
    real_eigenvalues: Sequence[float],
    complex_pairs: Sequence[complex],
) -> SpectralDecomposition:
    """Decompose ``A = O B O^T`` with ``B`` block diagonal.

    ``B`` holds one ``[[a, -b], [b, a]]`` block per entry ``a + ib`` of
    ``complex_pairs`` (in that order), followed by the real eigenvalues. The
    eigenvector of ``a + ib`` is ``(o_c - i o_{c+1}) / sqrt(2)`` and its
    conjugate belongs to ``a - ib``.
    """

    O = np.asarray(O, dtype=np.float64)
    pairs = np.asarray(complex_pairs, dtype=np.complex128).reshape(-1)
    reals = np.asarray(real_eigenvalues, dtype=np.float64).reshape(-1)
    n = 2 * pairs.size + reals.size
    if O.shape != (n, n):
        raise InputValidationError(f"O must be {n} x {n}, got {O.shape}")

    Q = np.empty((n, n), dtype=np.complex128)
    lambdas = np.empty(n, dtype=np.complex128)
    pairing = np.arange(n)
    root = np.sqrt(0.5)
    for block, value in enumerate(pairs):
        c = 2 * block
        Q[:, c] = root * (O[:, c] - 1j * O[:, c + 1])
        Q[:, c + 1] = np.conj(Q[:, c])
        lambdas[c], lambdas[c + 1] = value, np.conj(value)
        pairing[c], pairing[c + 1] = c + 1, c
    offset = 2 * pairs.size
    Q[:, offset:] = O[:, offset:]
    lambdas[offset:] = reals
    return SpectralDecomposition(Q=Q, lambdas=lambdas, field_mode="real", pairing=pairing)


def infer_pairing(Q: np.ndarray, lambdas: np.ndarray, tol: float = 1e-10) -> np.ndarray | None:
    """Match every eigenpair with its conjugate pair, or return ``None``."""

    n = lambdas.shape[0]
    scale = 1.0 + float(np.max(np.abs(lambdas))) if n else 1.0
    pairing = np.full(n, -1, dtype=np.intp)
    for j in range(n):
        if pairing[j] >= 0:
            continue
        for i in range(n):
            if pairing[i] >= 0 and i != j:
                continue
            close_value = abs(lambdas[i] - np.conj(lambdas[j])) <= tol * scale
            if close_value and np.linalg.norm(Q[:, i] - np.conj(Q[:, j])) <= tol * np.sqrt(n):
                pairing[j], pairing[i] = i, j
                break
        else:
            return None
    return pairing


def validate_decomposition(
    decomp: SpectralDecomposition, A: np.ndarray | None = None, tol: float = 1e-10
) -> ValidationReport:
    """Check unitarity, reconstruction, normality and real-mode pairing."""

    n = decomp.n
    checks: list[CheckResult] = []

    unitarity = float(np.linalg.norm(decomp.Q.conj().T @ decomp.Q - np.eye(n)))
    checks.append(
        CheckResult(name="unitarity", passed=unitarity <= tol * n, residual=unitarity)
    )

    if A is not None:
        A = as_complex_matrix(A, name="A")
        scale = float(np.linalg.norm(A))
        recon = float(np.linalg.norm(A - decomp.matrix()))
        checks.append(
            CheckResult(name="reconstruction", passed=recon <= tol * max(scale, 1e-300), residual=recon)
        )
        normality = float(np.linalg.norm(A @ A.conj().T - A.conj().T @ A))
        checks.append(
            CheckResult(
                name="normality", passed=normality <= tol * max(scale**2, 1e-300), residual=normality
            )
        )

    if decomp.field_mode == "real":
        pairing = decomp.pairing
        if pairing is None:
            checks.append(CheckResult(name="pairing", passed=False, detail="pairing missing"))
        else:
            involution = bool(np.all(pairing[pairing] == np.arange(n)))
            value_gap = float(np.max(np.abs(decomp.lambdas[pairing] - np.conj(decomp.lambdas))))
            vector_gap = float(np.max(np.abs(decomp.Q[:, pairing] - np.conj(decomp.Q))))
            worst = max(value_gap, vector_gap)
            checks.append(
                CheckResult(
                    name="pairing",
                    passed=involution and worst <= tol,
                    residual=worst,
                    detail=None if involution else "pairing is not an involution",
                )
            )
        imaginary = float(np.max(np.abs(decomp.matrix().imag)))
        checks.append(CheckResult(name="real_matrix", passed=imaginary <= tol, residual=imaginary))

    return ValidationReport(checks=checks)


def check_alignment(decomp: SpectralDecomposition, gamma: PointSet) -> np.ndarray:
    """Verify that Gamma's multiplicity map matches the spectrum; return owners."""

    if gamma.original_size != decomp.n:
        raise DecompositionMismatchError(
            f"point set covers {gamma.original_size} indices, decomposition has {decomp.n}"
        )
    owner = gamma.point_of_index()
    scale = 1.0 + float(np.max(np.abs(decomp.lambdas)))
    gap = float(np.max(np.abs(decomp.lambdas - gamma.points[owner])))
    if gap > _ALIGNMENT_TOL * scale:
        raise DecompositionMismatchError(
            f"eigenvalues differ from their points by up to {gap:.3e}"
        )
    return owner


def build_matrix_problem(
    decomp: SpectralDecomposition, kind: BasisKind, dedupe_tol: float | None = None
) -> EvaluationTable:
    """Deduplicate the spectrum and evaluate the function system on it.

    Custom tables are given per eigenvalue index and collapsed onto Gamma;
    indices sharing a point must carry the same values.
    """

    gamma = from_spectrum(decomp.lambdas, dedupe_tol)
    if isinstance(kind, Custom):
        F = as_complex_vector(kind.F, name="F")
        Phi = as_complex_matrix(kind.Phi, name="Phi")
        if F.shape != (decomp.n,) or Phi.shape[0] != decomp.n:
            raise InputValidationError(
                f"custom tables need one row per eigenvalue ({decomp.n})"
            )
        owner = gamma.point_of_index()
        firsts = [gamma.first_index(position) for position in range(gamma.size)]
        tol = 1e-10 * (1.0 + float(np.max(np.abs(F))) + float(np.max(np.abs(Phi))))
        spread = max(
            float(np.max(np.abs(F - F[firsts][owner]))),
            float(np.max(np.abs(Phi - Phi[firsts][owner]))),
        )
        if spread > tol:
            raise InputValidationError(
                "custom tables differ between indices of a repeated eigenvalue"
            )
        kind = Custom(F=F[firsts], Phi=Phi[firsts])
    return build_basis_problem(gamma, kind, decomp.field_mode)


def apply_function_table(decomp: SpectralDecomposition, g_values: np.ndarray) -> np.ndarray:
    """Return ``g(A) = Q diag(g(lambda_j)) Q^H``."""

    g_values = as_complex_vector(g_values, name="g_values")
    if g_values.shape != (decomp.n,):
        raise InputValidationError(f"expected {decomp.n} function values, got {g_values.shape}")
    return (decomp.Q * g_values[None, :]) @ decomp.Q.conj().T


def _best_in_eigenbasis(
    table: EvaluationTable, owner: np.ndarray, w: np.ndarray
) -> tuple[float, np.ndarray]:
    """Least-squares fit of ``f(Lambda) w`` from the columns ``phi_i(Lambda) w``."""

    target = table.F[owner] * w
    columns = table.Phi[owner, :] * w[:, None]
    if table.field_mode == "real":
        stacked = np.vstack([columns.real, columns.imag])
        rhs = np.concatenate([target.real, target.imag])
        alpha, *_ = scipy.linalg.lstsq(stacked, rhs, check_finite=False)
        alpha = alpha.astype(np.complex128)
    else:
        alpha, *_ = scipy.linalg.lstsq(columns, target, check_finite=False)
    value = float(np.linalg.norm(target - columns @ alpha))
    return value, alpha


def best_vector_approx(
    decomp: SpectralDecomposition, table: EvaluationTable, v: np.ndarray
) -> tuple[float, Coefficients]:
    """Return ``min_alpha ||f(A) v - sum alpha_i phi_i(A) v||`` for unit ``v``.

    Real tables restrict the coefficients to real values.
    """

    owner = check_alignment(decomp, table.gamma)
    v = as_complex_vector(v, name="v")
    if v.shape != (decomp.n,):
        raise InputValidationError(f"v must have {decomp.n} entries, got {v.shape}")
    size = np.linalg.norm(v)
    if size == 0.0:
        raise InputValidationError("v must be nonzero")
    w = decomp.Q.conj().T @ (v / size)
    value, alpha = _best_in_eigenbasis(table, owner, w)
    return value, Coefficients(alpha)


def minmax_matrix_value(
    decomp: SpectralDecomposition, table: EvaluationTable, opts: SolverOptions | None = None
) -> float:
    """Return ``min_p ||f(A) - p(A)||``, which equals ``min_p ||f - p||_Gamma``."""

    check_alignment(decomp, table.gamma)
    solution = solve_minimax(table, opts)
    if not solution.converged:
        raise ConvergenceError(
            "minimax solve did not reach its duality-gap tolerance",
            achieved=solution.gap,
        )
    return solution.delta


def matrix_residual_norm(
    decomp: SpectralDecomposition, table: EvaluationTable, alpha: Coefficients
) -> float:
    """Return ``||f(A) - sum alpha_i phi_i(A)||_2`` from explicit matrices."""

    owner = check_alignment(decomp, table.gamma)
    residual = apply_function_table(decomp, table.F[owner])
    for i, coefficient in enumerate(alpha.alpha):
        residual = residual - coefficient * apply_function_table(decomp, table.Phi[owner, i])
    return spectral_norm(residual)


def _polish(
    decomp: SpectralDecomposition,
    table: EvaluationTable,
    owner: np.ndarray,
    v: np.ndarray,
    steps: int,
) -> np.ndarray:
    """Projected-gradient ascent on the squared best-approximation error."""

    w = decomp.Q.conj().T @ v
    value, alpha = _best_in_eigenbasis(table, owner, w)
    for _ in range(steps):
        energy = np.abs(table.F[owner] - table.Phi[owner, :] @ alpha) ** 2
        peak = float(np.max(energy))
        if peak == 0.0:
            break
        eta = 1.0
        for _ in range(8):
            candidate = w * (1.0 + eta * energy / peak)
            candidate = candidate / np.linalg.norm(candidate)
            candidate_value, candidate_alpha = _best_in_eigenbasis(table, owner, candidate)
            if candidate_value > value * (1.0 + 1e-15):
                w, value, alpha = candidate, candidate_value, candidate_alpha
                break
            eta *= 0.5
        else:
            break

    polished = decomp.Q @ w
    if table.field_mode == "real":
        polished = polished.real.astype(np.complex128)
    return polished / np.linalg.norm(polished)


def sample_maxmin(
    decomp: SpectralDecomposition,
    table: EvaluationTable,
    trials: int | None = None,
    seed: int | None = None,
    include: np.ndarray | None = None,
    *,
    polish_steps: int | None = None,
    workers: int = 1,
) -> tuple[float, np.ndarray]:
    """Estimate ``max_v min_p ||f(A) v - p(A) v||`` from below by sampling.

    Trial ``t`` draws from the substream ``(seed, t)``, so the outcome does not
    depend on ``workers``. The best sample is polished by projected-gradient
    ascent and compared against ``include``.
    """

    trials = settings.trials if trials is None else int(trials)
    seed = settings.seed if seed is None else int(seed)
    steps = settings.polish_steps if polish_steps is None else int(polish_steps)
    if trials < 1:
        raise InputValidationError("sample_maxmin requires at least one trial")
    owner = check_alignment(decomp, table.gamma)
    real_only = table.field_mode == "real"

    def _trial(index: int) -> tuple[float, np.ndarray]:
        v = random_unit_vector(decomp.n, (seed, index), real_only=real_only)
        value, _ = best_vector_approx(decomp, table, v)
        return value, v

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            results = list(executor.map(_trial, range(trials)))
    else:
        results = [_trial(index) for index in range(trials)]

    best_value, best_vector = max(results, key=lambda item: item[0])
    if steps > 0:
        polished = _polish(decomp, table, owner, best_vector, steps)
        polished_value, _ = best_vector_approx(decomp, table, polished)
        if polished_value > best_value:
            best_value, best_vector = polished_value, polished

    if include is not None:
        include_value, _ = best_vector_approx(decomp, table, include)
        if include_value > best_value:
            best_value = include_value
            best_vector = as_complex_vector(include) / np.linalg.norm(include)

    return best_value, best_vector


def build_commuting_problem(
    family: CommutingFamily, tol: float = 1e-8
) -> tuple[PointSet, EvaluationTable, SpectralDecomposition]:
    """Turn a commuting normal family into a scalar problem on integer labels.

    Indices whose diagonal tuples agree across all matrices share one label;
    labels are ``1..m`` in order of first occurrence.
    """

    U = as_complex_matrix(family.U, name="U")
    diagonals = np.asarray(family.diagonals, dtype=np.complex128)
    n = U.shape[0]
    if U.shape != (n, n) or diagonals.ndim != 2 or diagonals.shape[1] != n:
        raise InputValidationError("U must be n x n and diagonals (k+1) x n")
    if diagonals.shape[0] < 2:
        raise InputValidationError("a family needs A_0 and at least one A_i")
    unitarity = float(np.linalg.norm(U.conj().T @ U - np.eye(n)))
    if unitarity > 1e-10 * n:
        raise InputValidationError(f"U is not unitary (residual {unitarity:.3e})")

    if family.matrices is not None:
        matrices = [as_complex_matrix(M, name="A_i") for M in family.matrices]
        if len(matrices) != diagonals.shape[0]:
            raise InputValidationError("one explicit matrix per diagonal is required")
        norms = [float(np.linalg.norm(M)) for M in matrices]
        for i, A_i in enumerate(matrices):
            residual = float(np.linalg.norm(U.conj().T @ A_i @ U - np.diag(diagonals[i])))
            if residual > tol * norms[i] + 1e-300:
                raise InputValidationError(
                    f"U does not diagonalize A_{i} (residual {residual:.3e})"
                )
            for j in range(i + 1, len(matrices)):
                A_j = matrices[j]
                commutator = float(np.linalg.norm(A_i @ A_j - A_j @ A_i))
                if commutator > tol * norms[i] * norms[j]:
                    raise InputValidationError(
                        f"A_{i} and A_{j} do not commute (residual {commutator:.3e})"
                    )

    tuples = diagonals.T
    merge_tol = 1e-10 * (1.0 + float(np.max(np.abs(tuples))))
    classes: list[list[int]] = []
    for index in range(n):
        for members in classes:
            if np.max(np.abs(tuples[index] - tuples[members[0]])) <= merge_tol:
                members.append(index)
                break
        else:
            classes.append([index])

    labels = np.arange(1, len(classes) + 1, dtype=np.complex128)
    gamma = PointSet(points=labels, multiplicity_map=tuple(tuple(c) for c in classes))
    representatives = [members[0] for members in classes]
    table = EvaluationTable(
        gamma=gamma,
        F=tuples[representatives, 0].copy(),
        Phi=np.ascontiguousarray(tuples[representatives, 1:]),
        field_mode="complex",
    )
    decomp = SpectralDecomposition(Q=U, lambdas=labels[gamma.point_of_index()])
    return gamma, table, decomp


__all__ = [
    "CommutingFamily",
    "SpectralDecomposition",
    "apply_function_table",
    "best_vector_approx",
    "build_commuting_problem",
    "build_matrix_problem",
    "check_alignment",
    "infer_pairing",
    "matrix_residual_norm",
    "minmax_matrix_value",
    "real_normal_decomposition",
    "sample_maxmin",
    "validate_decomposition",
]
