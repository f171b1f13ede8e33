"""Kets and density operators on factored Hilbert spaces."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import linalg
from .errors import InvalidStateError, ShapeError
from .linalg import DEFAULT_TOL
from .rng import complex_normal, generator

KET_NORM_TOL = 1e-10


def _check_dims(dims: Sequence[int], size: int) -> tuple[int, ...]:
    dims = tuple(int(d) for d in dims)
    if not dims:
        raise ShapeError("factorization needs at least one subsystem")
    if any(d < 2 for d in dims):
        raise ShapeError(f"every subsystem dimension must be >= 2, got {dims}")
    if int(np.prod(dims)) != size:
        raise ShapeError(f"dims {dims} do not multiply to {size}")
    return dims


@dataclass(frozen=True)
class Ket:
    vector: np.ndarray
    dims: tuple[int, ...]

    def __init__(self, vector, dims: Sequence[int] | None = None):
        vec = linalg.as_matrix(vector, name="ket").reshape(-1, 1)
        dims = (vec.shape[0],) if dims is None else dims
        object.__setattr__(self, "vector", vec)
        object.__setattr__(self, "dims", _check_dims(dims, vec.shape[0]))

    @property
    def dim(self) -> int:
        return self.vector.shape[0]

    def norm(self) -> float:
        return float(np.linalg.norm(self.vector))


@dataclass(frozen=True)
class DensityOperator:
    """A square matrix annotated with its tensor factorization.

    Construction checks shapes only; use :func:`validate_density` for the
    Hermitian / PSD / unit-trace axioms.
    """

    matrix: np.ndarray
    dims: tuple[int, ...]

    def __init__(self, matrix, dims: Sequence[int] | None = None):
        m = linalg.as_matrix(matrix, name="density matrix")
        if m.shape[0] != m.shape[1]:
            raise ShapeError(f"density matrix must be square, got {m.shape}")
        dims = (m.shape[0],) if dims is None else dims
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "dims", _check_dims(dims, m.shape[0]))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def nslots(self) -> int:
        return len(self.dims)

    def trace(self) -> complex:
        return linalg.trace(self.matrix)

    def purity(self) -> float:
        return float(np.real(np.trace(self.matrix @ self.matrix)))


@dataclass(frozen=True)
class ValidationReport:
    hermitian: bool
    psd: bool
    unit_trace: bool
    hermitian_residual: float
    min_eigenvalue: float
    trace_residual: float

    @property
    def passed(self) -> bool:
        return self.hermitian and self.psd and self.unit_trace


def validate_density(rho: DensityOperator, tol: float = DEFAULT_TOL) -> ValidationReport:
    m = rho.matrix
    herm_res = linalg.hermitian_residual(m)
    # PSD is judged on the Hermitian part so a non-Hermitian input still gets a report
    hpart = 0.5 * (m + m.conj().T)
    min_eig = float(linalg.hermitian_eig(hpart, tol=tol).eigenvalues[-1])
    trace_res = abs(np.trace(m) - 1.0)
    return ValidationReport(
        hermitian=herm_res <= tol,
        psd=min_eig >= -tol,
        unit_trace=trace_res <= tol,
        hermitian_residual=herm_res,
        min_eigenvalue=min_eig,
        trace_residual=float(trace_res),
    )


def require_valid(rho: DensityOperator, tol: float = DEFAULT_TOL) -> DensityOperator:
    report = validate_density(rho, tol)
    if not report.passed:
        raise InvalidStateError(
            "invalid density operator: "
            f"hermitian_residual={report.hermitian_residual:.3e}, "
            f"min_eigenvalue={report.min_eigenvalue:.3e}, "
            f"trace_residual={report.trace_residual:.3e}"
        )
    return rho


def from_pure(k: Ket) -> DensityOperator:
    if abs(k.norm() - 1.0) > KET_NORM_TOL:
        raise InvalidStateError(f"ket is not normalized (norm {k.norm():.12g})")
    v = k.vector
    return DensityOperator(v @ v.conj().T, k.dims)


def product_state(rho_a: DensityOperator, rho_b: DensityOperator, tol: float = DEFAULT_TOL) -> DensityOperator:
    require_valid(rho_a, tol)
    require_valid(rho_b, tol)
    return DensityOperator(linalg.kron(rho_a.matrix, rho_b.matrix), rho_a.dims + rho_b.dims)


def ginibre(rng: np.random.Generator, dim: int) -> np.ndarray:
    """Normalized ``G G^H`` for an i.i.d. complex Gaussian ``G`` drawn from ``rng``."""
    g = complex_normal(rng, (dim, dim))
    w = g @ g.conj().T
    w = 0.5 * (w + w.conj().T)
    return w / np.trace(w).real


def random_density(dim: int, seed: int, dims: Sequence[int] | None = None) -> DensityOperator:
    """Ginibre-ensemble density operator, bit-reproducible for a given seed."""
    if dim < 2:
        raise ShapeError(f"dim must be >= 2, got {dim}")
    return DensityOperator(ginibre(generator(seed), dim), dims)


def random_unitary(rng: np.random.Generator, dim: int) -> np.ndarray:
    """Haar-distributed unitary: QR of a Ginibre draw with the R-diagonal phases removed."""
    g = complex_normal(rng, (dim, dim))
    q, r = np.linalg.qr(g)
    d = np.diag(r)
    return q * (d / np.abs(d))


# fixtures

def ket0() -> Ket:
    return Ket([1, 0])


def ket1() -> Ket:
    return Ket([0, 1])


def ket_plus() -> Ket:
    return Ket(np.array([1, 1]) / np.sqrt(2))


def ket_minus() -> Ket:
    return Ket(np.array([1, -1]) / np.sqrt(2))


def bell_phi_plus() -> DensityOperator:
    return from_pure(Ket(np.array([1, 0, 0, 1]) / np.sqrt(2), (2, 2)))


def maximally_mixed(dims: Sequence[int]) -> DensityOperator:
    d = int(np.prod(dims))
    return DensityOperator(linalg.identity(d) / d, dims)
