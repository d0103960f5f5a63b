"""Built-in and random instances used by ``demo`` and the test-suite."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Literal

import numpy as np

from .errors import InputValidationError
from .matrix_bridge import CommutingFamily, SpectralDecomposition, real_normal_decomposition
from .numerics import Seed, random_orthogonal, random_unitary
from .problem import BasisKind, Chebyshev, Gmres

SpectrumShape = Literal["disk", "circle", "segment"]


@dataclass(frozen=True, eq=False)
class Instance:
    """A named normal matrix paired with the function system to approximate."""

    name: str
    decomp: SpectralDecomposition
    kind: BasisKind


def _diagonal(values: list[complex]) -> SpectralDecomposition:
    lambdas = np.asarray(values, dtype=np.complex128)
    return SpectralDecomposition(Q=np.eye(lambdas.size, dtype=np.complex128), lambdas=lambdas)


def gmres_two_points() -> Instance:
    return Instance("gmres_two_points", _diagonal([1.0, 3.0]), Gmres(1))


def chebyshev_three_points() -> Instance:
    return Instance("chebyshev_three_points", _diagonal([-1.0, 0.0, 1.0]), Chebyshev(2))


def roots_of_unity() -> Instance:
    return Instance("roots_of_unity", _diagonal([1.0, 1j, -1.0, -1j]), Gmres(1))


def rotation() -> Instance:
    """The 2 x 2 rotation ``[[0, -1], [1, 0]]`` with eigenvalues ``+-i``."""

    decomp = real_normal_decomposition(np.eye(2), [], [1j])
    return Instance("rotation", decomp, Gmres(1))


DEMO_INSTANCES: dict[str, Callable[[], Instance]] = {
    "gmres_two_points": gmres_two_points,
    "chebyshev_three_points": chebyshev_three_points,
    "roots_of_unity": roots_of_unity,
    "rotation": rotation,
}


def demo_instance(name: str) -> Instance:
    try:
        return DEMO_INSTANCES[name]()
    except KeyError as exc:
        known = ", ".join(sorted(DEMO_INSTANCES))
        raise InputValidationError(f"unknown instance {name!r}; expected one of: {known}") from exc


def _sample_spectrum(rng: np.random.Generator, n: int, shape: SpectrumShape) -> np.ndarray:
    if shape == "disk":
        radius = np.sqrt(rng.uniform(0.0, 1.0, n))
        return radius * np.exp(2j * np.pi * rng.uniform(0.0, 1.0, n))
    if shape == "circle":
        center = rng.uniform(0.5, 1.5)
        return center + 0.5 * np.exp(2j * np.pi * rng.uniform(0.0, 1.0, n))
    if shape == "segment":
        ends = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        t = rng.uniform(0.0, 1.0, n)
        return ends[0] + t * (ends[1] - ends[0])
    raise InputValidationError(f"unknown spectrum shape {shape!r}")


def random_complex_instance(
    n: int, k: int, seed: Seed, *, chebyshev: bool = False, shape: SpectrumShape = "disk"
) -> Instance:
    """Random unitary eigenvectors with a spectrum sampled on ``shape``."""

    rng = np.random.default_rng(seed)
    lambdas = _sample_spectrum(rng, n, shape)
    Q = random_unitary(n, rng.integers(2**32))
    kind: BasisKind = Chebyshev(k) if chebyshev else Gmres(k)
    name = f"complex_{shape}_{'chebyshev' if chebyshev else 'gmres'}_{n}_{k}"
    return Instance(name, SpectralDecomposition(Q=Q, lambdas=lambdas), kind)


def random_real_instance(n: int, k: int, seed: Seed, *, chebyshev: bool = False) -> Instance:
    """Orthogonal similarity of rotation-scaling blocks plus real eigenvalues."""

    rng = np.random.default_rng(seed)
    pairs = int(rng.integers(1, n // 2 + 1))
    radius = np.sqrt(rng.uniform(0.05, 1.0, pairs))
    angle = np.pi * rng.uniform(0.05, 0.95, pairs)
    complex_pairs = radius * np.exp(1j * angle)
    reals = rng.uniform(-1.0, 1.0, n - 2 * pairs)
    O = random_orthogonal(n, rng.integers(2**32))
    decomp = real_normal_decomposition(O, reals, complex_pairs)
    kind: BasisKind = Chebyshev(k) if chebyshev else Gmres(k)
    name = f"real_{'chebyshev' if chebyshev else 'gmres'}_{n}_{k}"
    return Instance(name, decomp, kind)


def random_commuting_family(n: int, k: int, seed: Seed) -> CommutingFamily:
    """Common random unitary with Gaussian diagonals and explicit matrices."""

    rng = np.random.default_rng(seed)
    U = random_unitary(n, rng.integers(2**32))
    diagonals = rng.standard_normal((k + 1, n)) + 1j * rng.standard_normal((k + 1, n))
    family = CommutingFamily(U=U, diagonals=diagonals)
    return CommutingFamily(U=U, diagonals=diagonals, matrices=family.explicit_matrices())


__all__ = [
    "DEMO_INSTANCES",
    "Instance",
    "SpectrumShape",
    "chebyshev_three_points",
    "demo_instance",
    "gmres_two_points",
    "random_commuting_family",
    "random_complex_instance",
    "random_real_instance",
    "roots_of_unity",
    "rotation",
]
