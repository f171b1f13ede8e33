"""Dense complex linear algebra kernels.

Matrices are 2-D ``complex128`` numpy arrays in row-major order. Kets are
``d x 1`` columns and bras ``1 x d`` rows. Composite indices follow the
Kronecker convention ``(i_A, i_B) -> i_A * d_B + i_B``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ConvergenceError, NotHermitianError, ShapeError

DEFAULT_TOL = 1e-10
JACOBI_SWEEPS = 100


def as_matrix(m, *, name: str = "matrix") -> np.ndarray:
    """Coerce ``m`` to a finite 2-D complex array (1-D input becomes a column)."""
    arr = np.asarray(m, dtype=np.complex128)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2:
        raise ShapeError(f"{name} must be 2-D, got shape {arr.shape}")
    if arr.size == 0:
        raise ShapeError(f"{name} is empty")
    if not np.all(np.isfinite(arr)):
        raise ShapeError(f"{name} has non-finite entries")
    return arr


def _square(m: np.ndarray, name: str = "matrix") -> np.ndarray:
    m = as_matrix(m, name=name)
    if m.shape[0] != m.shape[1]:
        raise ShapeError(f"{name} must be square, got shape {m.shape}")
    return m


def identity(d: int) -> np.ndarray:
    return np.eye(d, dtype=np.complex128)


def kron(m1, m2) -> np.ndarray:
    """Kronecker product: entry ``(i1*r2 + i2, j1*c2 + j2) = m1[i1, j1] * m2[i2, j2]``."""
    a = as_matrix(m1, name="m1")
    b = as_matrix(m2, name="m2")
    r1, c1 = a.shape
    r2, c2 = b.shape
    # axes (i1, i2, j1, j2) flattened row-major give exactly the index formula above
    out = a[:, None, :, None] * b[None, :, None, :]
    return out.reshape(r1 * r2, c1 * c2)


def kron_all(factors: Sequence) -> np.ndarray:
    out = as_matrix(factors[0])
    for f in factors[1:]:
        out = kron(out, f)
    return out


def dagger(m) -> np.ndarray:
    return as_matrix(m).conj().T.copy()


def matmul(m1, m2) -> np.ndarray:
    a = as_matrix(m1, name="m1")
    b = as_matrix(m2, name="m2")
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"cannot multiply {a.shape} by {b.shape}")
    return a @ b


def trace(m) -> complex:
    return complex(np.trace(_square(m)))


def commutator(m1, m2) -> np.ndarray:
    a = _square(m1, "m1")
    b = _square(m2, "m2")
    if a.shape != b.shape:
        raise ShapeError(f"commutator needs equal shapes, got {a.shape} and {b.shape}")
    return a @ b - b @ a


def hermitian_residual(m) -> float:
    m = _square(m)
    return float(np.max(np.abs(m - m.conj().T)))


def is_hermitian(m, tol: float = DEFAULT_TOL) -> bool:
    return hermitian_residual(m) <= tol


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenvalues in descending order; ``eigenvectors[:, k]`` pairs with ``eigenvalues[k]``."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T

    def vectors(self) -> list[np.ndarray]:
        return [self.eigenvectors[:, [k]] for k in range(self.eigenvectors.shape[1])]


def _max_offdiag(a: np.ndarray) -> float:
    n = a.shape[0]
    if n == 1:
        return 0.0
    off = a - np.diag(np.diag(a))
    return float(np.max(np.abs(off)))


def _jacobi_rotate(a: np.ndarray, v: np.ndarray, p: int, q: int) -> None:
    apq = a[p, q]
    mag = abs(apq)
    if mag == 0.0:
        return
    phase = apq / mag
    # the phase factor makes the (p, q) element real; a real rotation then zeroes it
    tau = (a[q, q].real - a[p, p].real) / (2.0 * mag)
    t = 1.0 / (abs(tau) + np.sqrt(1.0 + tau * tau))
    if tau < 0:
        t = -t
    c = 1.0 / np.sqrt(1.0 + t * t)
    s = t * c
    rot = np.array([[c, s], [-s * phase.conjugate(), c * phase.conjugate()]])
    idx = [p, q]
    a[:, idx] = a[:, idx] @ rot
    a[idx, :] = rot.conj().T @ a[idx, :]
    a[p, q] = a[q, p] = 0.0
    a[p, p] = a[p, p].real
    a[q, q] = a[q, q].real
    v[:, idx] = v[:, idx] @ rot


def _descending_order(values: np.ndarray, tol: float) -> list[int]:
    order = sorted(range(len(values)), key=lambda k: -values[k])
    # within-tolerance ties keep their original relative order
    out: list[int] = []
    cluster = [order[0]]
    for k in order[1:]:
        if values[cluster[-1]] - values[k] <= tol:
            cluster.append(k)
        else:
            out.extend(sorted(cluster))
            cluster = [k]
    out.extend(sorted(cluster))
    return out


def _fix_phase(vec: np.ndarray, tol: float) -> np.ndarray:
    for k, x in enumerate(vec):
        if abs(x) > tol:
            out = vec * (abs(x) / x)
            out[k] = abs(x)
            return out
    return vec


def hermitian_eig(m, tol: float = DEFAULT_TOL) -> SpectralDecomposition:
    """Diagonalize a Hermitian matrix with cyclic complex Jacobi rotations.

    Sweeps over all ``p < q`` pairs until the largest off-diagonal magnitude
    falls below ``tol``. Each eigenvector's first component above ``tol`` in
    magnitude is rotated to the positive real axis.

    Raises
    ------
    NotHermitianError
        if ``max|m - m^H| > tol``.
    ConvergenceError
        if the sweep budget runs out.
    """
    m = _square(m)
    if hermitian_residual(m) > tol:
        raise NotHermitianError(f"matrix is not Hermitian (residual {hermitian_residual(m):.3e})")
    n = m.shape[0]
    a = 0.5 * (m + m.conj().T)
    v = identity(n)
    for _ in range(JACOBI_SWEEPS):
        if _max_offdiag(a) < tol:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                _jacobi_rotate(a, v, p, q)
    else:
        if _max_offdiag(a) >= tol:
            raise ConvergenceError(f"Jacobi did not converge in {JACOBI_SWEEPS} sweeps")
    values = np.diag(a).real.copy()
    order = _descending_order(values, tol)
    vecs = np.column_stack([_fix_phase(v[:, k], tol) for k in order])
    return SpectralDecomposition(eigenvalues=values[order], eigenvectors=vecs)


def check_orthonormal(basis: Sequence, tol: float = DEFAULT_TOL) -> bool:
    """True iff ``|<v_i|v_j> - delta_ij| <= tol`` for every pair."""
    vecs = [as_matrix(b).reshape(-1) for b in basis]
    if not vecs:
        return False
    dim = vecs[0].shape[0]
    if any(x.shape[0] != dim for x in vecs):
        raise ShapeError("basis vectors have different dimensions")
    gram = np.array([[np.vdot(x, y) for y in vecs] for x in vecs])
    return bool(np.max(np.abs(gram - np.eye(len(vecs)))) <= tol)


def basis_matrix(basis: Sequence) -> np.ndarray:
    """Stack basis vectors as the columns of a matrix."""
    return np.column_stack([as_matrix(b).reshape(-1) for b in basis])


def computational_basis(d: int) -> list[np.ndarray]:
    return [identity(d)[:, [k]] for k in range(d)]


def ket_of(*components) -> np.ndarray:
    return np.asarray(components, dtype=np.complex128).reshape(-1, 1)
