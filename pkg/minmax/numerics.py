"""Dense complex linear algebra helpers used by every other module.

Scalars are ``complex128``; vectors are one-dimensional and matrices
two-dimensional numpy arrays. Functions never mutate their inputs.
"""

from __future__ import annotations

import logging
from typing import Sequence

import numpy as np
import scipy.linalg

from .errors import ConvergenceError, InputValidationError

LOGGER = logging.getLogger(__name__)

Seed = int | Sequence[int]

_LS_RANK_CUTOFF = 1e-12
_EIG_DENSE_LIMIT = 128
_EIG_POST_TOL = 1e-12
_POWER_MAX_ITER = 10_000


def as_complex_vector(values: object, *, name: str = "vector") -> np.ndarray:
    """Return a finite one-dimensional complex copy of ``values``."""

    array = np.array(values, dtype=np.complex128)
    if array.ndim != 1:
        raise InputValidationError(f"{name} must be one-dimensional, got shape {array.shape}")
    if not np.all(np.isfinite(array)):
        raise InputValidationError(f"{name} contains non-finite entries")
    return array


def as_complex_matrix(values: object, *, name: str = "matrix") -> np.ndarray:
    """Return a finite two-dimensional complex copy of ``values``."""

    array = np.array(values, dtype=np.complex128)
    if array.ndim != 2:
        raise InputValidationError(f"{name} must be two-dimensional, got shape {array.shape}")
    if not np.all(np.isfinite(array)):
        raise InputValidationError(f"{name} contains non-finite entries")
    return array


def hermitian_eig(H: np.ndarray, tol: float = 1e-10) -> tuple[np.ndarray, np.ndarray]:
    """Diagonalize a Hermitian matrix as ``H = Q diag(lambdas) Q^H``.

    Eigenvalues are returned in ascending order together with an orthonormal
    eigenvector matrix. The input must be Hermitian to within ``tol`` relative
    to its Frobenius norm.
    """

    H = as_complex_matrix(H, name="H")
    n, m = H.shape
    if n != m:
        raise InputValidationError(f"H must be square, got shape {H.shape}")

    scale = np.linalg.norm(H)
    skew = np.linalg.norm(H - H.conj().T)
    if skew > tol * scale:
        raise InputValidationError(
            f"H is not Hermitian: ||H - H^H||_F = {skew:.3e} exceeds {tol:.1e} * ||H||_F"
        )

    symmetric = 0.5 * (H + H.conj().T)
    try:
        if not np.any(symmetric.imag):
            # real symmetric input keeps real eigenvectors
            lambdas, Q = np.linalg.eigh(symmetric.real)
            Q = Q.astype(np.complex128)
        else:
            lambdas, Q = np.linalg.eigh(symmetric)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError(f"Hermitian eigensolver did not converge: {exc}") from exc

    bound = _EIG_POST_TOL * max(n, 1)
    unitarity = float(np.linalg.norm(Q.conj().T @ Q - np.eye(n)))
    reconstruction = float(np.linalg.norm(symmetric - (Q * lambdas) @ Q.conj().T))
    if unitarity > bound or reconstruction > bound * scale:
        raise ConvergenceError(
            f"Hermitian eigensolver lost accuracy: ||Q^H Q - I||_F = {unitarity:.3e}, "
            f"||H - Q diag Q^H||_F = {reconstruction:.3e}",
            achieved=reconstruction,
        )
    return Q, lambdas


def weighted_least_squares(
    Phi: np.ndarray, F: np.ndarray, omega: np.ndarray
) -> np.ndarray:
    """Minimize ``sum_j omega_j |F_j - (Phi alpha)_j|^2`` over complex ``alpha``.

    Rows are scaled by ``sqrt(omega)`` and the scaled system is solved with a
    column-pivoted QR (complete orthogonal factorization), which returns the
    minimum-norm minimizer when the weighted table is rank deficient.
    """

    Phi = np.asarray(Phi, dtype=np.complex128)
    F = np.asarray(F, dtype=np.complex128)
    omega = np.asarray(omega, dtype=np.float64)
    if Phi.ndim != 2 or F.ndim != 1 or omega.ndim != 1:
        raise InputValidationError("weighted_least_squares expects Phi (n x k), F (n), omega (n)")
    if Phi.shape[0] != F.shape[0] or F.shape[0] != omega.shape[0]:
        raise InputValidationError(
            f"dimension mismatch: Phi {Phi.shape}, F {F.shape}, omega {omega.shape}"
        )
    if np.any(omega < 0.0) or not np.any(omega > 0.0):
        raise InputValidationError("weights must be nonnegative and not all zero")

    root = np.sqrt(omega)
    alpha, *_ = scipy.linalg.lstsq(
        root[:, None] * Phi,
        root * F,
        cond=_LS_RANK_CUTOFF,
        lapack_driver="gelsy",
        check_finite=False,
    )
    return np.asarray(alpha, dtype=np.complex128)


def spectral_norm(M: np.ndarray, tol: float = 1e-12) -> float:
    """Return the largest singular value of ``M``.

    Small matrices go through the Hermitian eigensolver applied to ``M^H M``;
    larger ones use power iteration on ``M^H M`` with a Rayleigh-quotient
    stopping rule.
    """

    M = as_complex_matrix(M, name="M")
    if M.size == 0:
        return 0.0

    gram = M.conj().T @ M
    gram = 0.5 * (gram + gram.conj().T)
    if gram.shape[0] <= _EIG_DENSE_LIMIT:
        _, lambdas = hermitian_eig(gram)
        return float(np.sqrt(max(lambdas[-1], 0.0)))

    return _power_norm(gram, tol)


def _power_norm(gram: np.ndarray, tol: float) -> float:
    """Largest eigenvalue of a positive semidefinite matrix, as a norm."""

    x = random_unit_vector(gram.shape[0], seed=0)
    estimate = 0.0
    for _ in range(_POWER_MAX_ITER):
        y = gram @ x
        rayleigh = float(np.real(np.vdot(x, y)))
        size = np.linalg.norm(y)
        if size == 0.0:
            return 0.0
        x = y / size
        if abs(rayleigh - estimate) <= tol * max(rayleigh, np.finfo(float).tiny):
            return float(np.sqrt(max(rayleigh, 0.0)))
        estimate = rayleigh

    LOGGER.warning("Power iteration hit the iteration cap; returning last estimate")
    return float(np.sqrt(max(estimate, 0.0)))


def random_unit_vector(n: int, seed: Seed, real_only: bool = False) -> np.ndarray:
    """Draw a rotation-invariant random unit vector from a seeded PCG64 stream."""

    if n < 1:
        raise InputValidationError("random_unit_vector requires n >= 1")

    rng = np.random.default_rng(seed)
    if real_only:
        v = rng.standard_normal(n).astype(np.complex128)
    else:
        v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return v / np.linalg.norm(v)


def random_unitary(n: int, seed: Seed) -> np.ndarray:
    """Return a Haar-distributed unitary matrix (QR of a complex Gaussian)."""

    rng = np.random.default_rng(seed)
    Z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    Q, R = np.linalg.qr(Z)
    phases = np.diagonal(R) / np.abs(np.diagonal(R))
    return Q * phases[None, :]


def random_orthogonal(n: int, seed: Seed) -> np.ndarray:
    """Return a Haar-distributed real orthogonal matrix."""

    rng = np.random.default_rng(seed)
    Q, R = np.linalg.qr(rng.standard_normal((n, n)))
    return Q * np.sign(np.diagonal(R))[None, :]


__all__ = [
    "Seed",
    "as_complex_matrix",
    "as_complex_vector",
    "hermitian_eig",
    "random_orthogonal",
    "random_unit_vector",
    "random_unitary",
    "spectral_norm",
    "weighted_least_squares",
]
