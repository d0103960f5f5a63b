"""Pydantic models for every JSON document read or written by the toolkit."""

from __future__ import annotations

from typing import Dict, List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field, model_validator

ComplexPair = Tuple[float, float]


def to_pairs(values: np.ndarray) -> List[ComplexPair]:
    """Encode a complex vector as ``[re, im]`` pairs."""

    return [(float(z.real), float(z.imag)) for z in np.asarray(values, dtype=np.complex128)]


def from_pairs(pairs: List[ComplexPair] | List[List[ComplexPair]]) -> np.ndarray:
    """Decode nested ``[re, im]`` pairs into a complex array."""

    array = np.asarray(pairs, dtype=np.float64)
    if array.shape[-1:] != (2,):
        raise ValueError("complex values must be encoded as [re, im] pairs")
    return array[..., 0] + 1j * array[..., 1]


class CheckResult(BaseModel):
    """Outcome of a single named verification check."""

    name: str = Field(..., description="Identifier of the check.")
    passed: bool = Field(..., description="Whether the check succeeded.")
    residual: float = Field(0.0, description="Measured quantity compared to the tolerance.")
    informational: bool = Field(
        False, description="Informational checks never fail the overall report."
    )
    detail: Optional[str] = Field(None, description="Human readable explanation.")


class ValidationReport(BaseModel):
    """Collection of checks produced by a validation routine."""

    checks: List[CheckResult] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        """True when every non-informational check passed."""

        return all(check.passed for check in self.checks if not check.informational)

    def failures(self) -> List[str]:
        """Return descriptions of the failing, non-informational checks."""

        return [
            check.detail or check.name
            for check in self.checks
            if not check.passed and not check.informational
        ]

    def get(self, name: str) -> CheckResult:
        """Return the check with the given name."""

        for check in self.checks:
            if check.name == name:
                return check
        raise KeyError(name)

    def extend(self, other: "ValidationReport", prefix: str = "") -> None:
        """Append the checks of another report, optionally prefixing their names."""

        for check in other.checks:
            self.checks.append(check.model_copy(update={"name": prefix + check.name}))


class BasisSpec(BaseModel):
    """Either a named function system or explicit value tables."""

    kind: Optional[Literal["gmres", "chebyshev"]] = None
    k: Optional[int] = Field(None, ge=1)
    F: Optional[List[ComplexPair]] = None
    Phi: Optional[List[List[ComplexPair]]] = None

    @model_validator(mode="after")
    def _exactly_one_form(self) -> "BasisSpec":
        named = self.kind is not None
        custom = self.F is not None or self.Phi is not None
        if named == custom:
            raise ValueError("give either 'kind' with 'k' or both 'F' and 'Phi'")
        if named and self.k is None:
            raise ValueError("'k' is required with 'kind'")
        if custom and (self.F is None or self.Phi is None):
            raise ValueError("custom tables need both 'F' and 'Phi'")
        return self


class ProblemFile(BasisSpec):
    """Scalar problem: a point set plus a function system."""

    points: List[ComplexPair] = Field(..., min_length=1)
    mode: Literal["real", "complex"] = "complex"
    alpha: Optional[List[ComplexPair]] = Field(
        None, description="Coefficients to certify instead of solving."
    )


class MatrixFile(BaseModel):
    """Spectral decomposition of a normal matrix."""

    n: int = Field(..., ge=1)
    Q: List[List[ComplexPair]]
    lambdas: List[ComplexPair]
    mode: Literal["real", "complex"] = "complex"
    pairing: Optional[List[int]] = None

    @model_validator(mode="after")
    def _consistent_sizes(self) -> "MatrixFile":
        if len(self.Q) != self.n or any(len(row) != self.n for row in self.Q):
            raise ValueError("Q must be n x n")
        if len(self.lambdas) != self.n:
            raise ValueError("lambdas must have n entries")
        if self.pairing is not None and len(self.pairing) != self.n:
            raise ValueError("pairing must have n entries")
        return self


class MatrixProblemFile(BaseModel):
    """A matrix together with the function system to approximate on its spectrum."""

    matrix: MatrixFile
    problem: BasisSpec


class CommutingFamilyFile(BaseModel):
    """Pairwise commuting normal matrices given by a common unitary and diagonals."""

    U: List[List[ComplexPair]]
    diagonals: List[List[ComplexPair]] = Field(..., min_length=2)
    matrices: Optional[List[List[List[ComplexPair]]]] = None


class CertificateModel(BaseModel):
    """Support points and weights of an optimality certificate."""

    support: List[int]
    omega: List[float]
    condition_residual: float
    ell: int


class SymmetrizedCertificateModel(BaseModel):
    """Conjugate-closed support with merged weights."""

    theta: List[ComplexPair]
    omega_tilde: List[float]
    pairing: List[int]
    condition_residual: float


class WorstCaseModel(BaseModel):
    """Worst-case unit vector and the error it attains."""

    v: List[ComplexPair]
    attained: float


class RunReport(BaseModel):
    """Machine readable outcome of a CLI command."""

    command: str
    instance: Optional[str] = None
    mode: Optional[Literal["real", "complex"]] = None
    delta: Optional[float] = None
    lower_bound: Optional[float] = None
    alpha: Optional[List[ComplexPair]] = None
    iterations: Optional[int] = None
    converged: Optional[bool] = None
    certificate: Optional[CertificateModel] = None
    symmetrized: Optional[SymmetrizedCertificateModel] = None
    worst_case: Optional[WorstCaseModel] = None
    maxmin_sampled: Optional[float] = None
    checks: List[CheckResult] = Field(default_factory=list)
    timings: Optional[Dict[str, float]] = None


class DemoReport(BaseModel):
    """Reports of every built-in instance run by ``demo``."""

    command: Literal["demo"] = "demo"
    instances: List[RunReport] = Field(default_factory=list)


__all__ = [
    "BasisSpec",
    "CertificateModel",
    "CheckResult",
    "CommutingFamilyFile",
    "ComplexPair",
    "DemoReport",
    "MatrixFile",
    "MatrixProblemFile",
    "ProblemFile",
    "RunReport",
    "SymmetrizedCertificateModel",
    "ValidationReport",
    "WorstCaseModel",
    "from_pairs",
    "to_pairs",
]
