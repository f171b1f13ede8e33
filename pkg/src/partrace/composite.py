"""Operators on tensor-product spaces and the partial trace.

Two partial-trace routes live here and are kept independent of each other:

* :func:`partial_trace_via_embeddings` sums the sandwiches
  ``(1 (x) <b_j|) rho (1 (x) |b_j>)`` with explicitly built rectangular
  embedding matrices, for any orthonormal basis of the traced factor.
* :func:`partial_trace_fast` views the composite index as mixed-radix digits
  and contracts the traced digits in place, never forming an embedding.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np

from . import linalg
from .errors import BasisError, ShapeError
from .states import DensityOperator, Ket

BASIS_TOL = 1e-8
WALKTHROUGH_TOL = 1e-10


@dataclass(frozen=True)
class ExtendedOperator:
    dims: tuple[int, ...]
    slot: int
    local: np.ndarray
    extended: np.ndarray


def _check_slot(slot: int, dims: Sequence[int]) -> int:
    if not 0 <= slot < len(dims):
        raise ShapeError(f"slot {slot} out of range for {len(dims)} subsystems")
    return int(slot)


def extend(local, slot: int, dims: Sequence[int]) -> ExtendedOperator:
    """Promote ``local`` acting on ``dims[slot]`` to the full composite space."""
    dims = tuple(int(d) for d in dims)
    slot = _check_slot(slot, dims)
    local = linalg.as_matrix(local, name="local")
    if local.shape != (dims[slot], dims[slot]):
        raise ShapeError(f"local operator {local.shape} does not act on slot {slot} of dims {dims}")
    factors = [local if k == slot else linalg.identity(d) for k, d in enumerate(dims)]
    return ExtendedOperator(dims, slot, local, linalg.kron_all(factors))


@dataclass(frozen=True)
class EmbeddingMap:
    """``local (x) |b>`` (ket-attach) or ``local (x) <b|`` (bra-contract) as a matrix."""

    direction: Literal["ket-attach", "bra-contract"]
    local: np.ndarray
    anchor: np.ndarray
    matrix: np.ndarray

    def __call__(self, vec) -> np.ndarray:
        return self.matrix @ linalg.as_matrix(vec)


def _anchor_vector(anchor) -> np.ndarray:
    vec = anchor.vector if isinstance(anchor, Ket) else linalg.as_matrix(anchor).reshape(-1, 1)
    if abs(np.linalg.norm(vec) - 1.0) > BASIS_TOL:
        raise ShapeError(f"anchor must be unit-norm, got norm {np.linalg.norm(vec):.12g}")
    return vec


def embed_ket(local, anchor) -> EmbeddingMap:
    """Map ``|a> -> (local|a>) (x) |b>``, i.e. ``kron(local, |b>)``."""
    local = linalg.as_matrix(local, name="local")
    vec = _anchor_vector(anchor)
    return EmbeddingMap("ket-attach", local, vec, linalg.kron(local, vec))


def embed_bra(local, anchor) -> EmbeddingMap:
    """Map ``|a, b> -> <anchor|b> local|a>``, i.e. ``kron(local, <anchor|)``.

    ``anchor`` is the ket whose bra is used (a :class:`Ket` or a column).
    A ``1 x d`` row is taken as the bra itself.
    """
    local = linalg.as_matrix(local, name="local")
    raw = anchor.vector if isinstance(anchor, Ket) else linalg.as_matrix(anchor)
    vec = raw.conj().T if raw.shape[0] == 1 and raw.shape[1] > 1 else raw
    vec = _anchor_vector(vec)
    bra = vec.conj().T
    return EmbeddingMap("bra-contract", local, bra, linalg.kron(local, bra))


def _resolve_basis(basis, d: int) -> list[np.ndarray]:
    if basis is None:
        return linalg.computational_basis(d)
    vecs = [v.vector if isinstance(v, Ket) else linalg.as_matrix(v).reshape(-1, 1) for v in basis]
    if len(vecs) != d or any(v.shape[0] != d for v in vecs):
        raise BasisError(f"basis must have {d} vectors of dimension {d}")
    if not linalg.check_orthonormal(vecs, BASIS_TOL):
        raise BasisError("basis is not orthonormal")
    return vecs


def _trace_slot_via_embeddings(m: np.ndarray, dims: tuple[int, ...], slot: int, basis) -> np.ndarray:
    left = int(np.prod(dims[:slot]))
    right = int(np.prod(dims[slot + 1 :]))
    id_left = linalg.identity(left)
    id_right = linalg.identity(right)
    out = np.zeros((left * right, left * right), dtype=np.complex128)
    for b in _resolve_basis(basis, dims[slot]):
        attach = linalg.kron(embed_ket(id_left, b).matrix, id_right)
        contract = linalg.kron(embed_bra(id_left, b).matrix, id_right)
        out += contract @ m @ attach
    return out


def partial_trace_via_embeddings(
    rho: DensityOperator, traced_slot: int = 1, basis: Sequence | None = None
) -> DensityOperator:
    """Trace out one slot as ``sum_j (1 (x) <b_j|) rho (1 (x) |b_j>)``.

    ``basis`` is any orthonormal basis of the traced factor (columns or
    :class:`Ket`); ``None`` means the computational basis. The identity on the
    kept factors is materialized, never elided.
    """
    slot = _check_slot(traced_slot, rho.dims)
    if rho.nslots < 2:
        raise ShapeError("cannot trace the only subsystem")
    out = _trace_slot_via_embeddings(rho.matrix, rho.dims, slot, basis)
    return DensityOperator(out, rho.dims[:slot] + rho.dims[slot + 1 :])


def partial_trace_fast(rho: DensityOperator, keep: Sequence[int]) -> DensityOperator:
    """Reduce ``rho`` to the slots in ``keep`` by strided index contraction.

    Kept slots appear in ascending order in the result. Keeping every slot
    returns ``rho`` itself.
    """
    keep = sorted({_check_slot(k, rho.dims) for k in keep})
    if not keep:
        raise ShapeError("keep set must not be empty")
    if len(keep) == rho.nslots:
        return rho
    n = rho.nslots
    # row digit of slot k is letter k, column digit is letter n + k; traced slots share one letter
    letters = [chr(ord("a") + k) for k in range(2 * n)]
    row = letters[:n]
    col = [letters[n + k] if k in keep else letters[k] for k in range(n)]
    out_spec = "".join(row[k] for k in keep) + "".join(col[k] for k in keep)
    spec = "".join(row) + "".join(col) + "->" + out_spec
    tensor = rho.matrix.reshape(rho.dims + rho.dims)
    kept_dims = tuple(rho.dims[k] for k in keep)
    d = int(np.prod(kept_dims))
    return DensityOperator(np.einsum(spec, tensor).reshape(d, d), kept_dims)


def partial_trace_sequential(rho: DensityOperator, keep: Sequence[int]) -> DensityOperator:
    """Slot-by-slot computational-basis traces via embeddings, highest slot first."""
    keep = {_check_slot(k, rho.dims) for k in keep}
    if not keep:
        raise ShapeError("keep set must not be empty")
    out = rho
    for slot in sorted(set(range(rho.nslots)) - keep, reverse=True):
        out = partial_trace_via_embeddings(out, slot)
    return out


@dataclass
class StepReport:
    """Per-outcome values of each intermediate expression and their gaps."""

    names: list[str]
    values: list[np.ndarray]
    deviations: list[float]
    identity_residuals: dict[str, float] = field(default_factory=dict)
    tol: float = WALKTHROUGH_TOL

    @property
    def max_deviation(self) -> float:
        return max(self.deviations)

    @property
    def passed(self) -> bool:
        return self.max_deviation <= self.tol

    def final(self) -> np.ndarray:
        return self.values[-1]


def _diag_sandwich(basis_vecs: np.ndarray, m: np.ndarray) -> np.ndarray:
    # <v_i| m |v_i> for each column v_i
    return np.einsum("ri,rs,si->i", basis_vecs.conj(), m, basis_vecs)


def derivation_walkthrough(
    rho: DensityOperator, basis_a: Sequence | None = None, basis_b: Sequence | None = None,
    tol: float = WALKTHROUGH_TOL,
) -> StepReport:
    """Evaluate every intermediate of the marginal-to-partial-trace derivation.

    Starting from ``sum_j <a_i,b_j|rho|a_i,b_j>``, the chain inserts the
    identity, expands it with two closure relations, factors each projector
    into ket-attach / bra-contract embeddings, collapses the overlap deltas,
    and ends at ``<a_i|rho_A|a_i>``. The last entry uses the fast partial
    trace so both ends of the chain are computed independently.
    """
    if rho.nslots != 2:
        raise ShapeError("derivation walk-through needs a bipartite state")
    da, db = rho.dims
    avecs = _resolve_basis(basis_a, da)
    bvecs = _resolve_basis(basis_b, db)
    ident_a = linalg.identity(da)
    m = rho.matrix
    va = linalg.basis_matrix(avecs)

    def product_columns(j: int) -> np.ndarray:
        return linalg.kron(va, bvecs[j])

    proj = [extend(b @ b.conj().T, 1, rho.dims).extended for b in bvecs]
    attach = [embed_ket(ident_a, b).matrix for b in bvecs]
    contract = [embed_bra(ident_a, b).matrix for b in bvecs]
    overlap = np.array([[np.vdot(bj, bk) for bk in bvecs] for bj in bvecs])
    full_identity = linalg.kron(ident_a, linalg.identity(db))
    rng_b = range(db)

    names: list[str] = []
    values: list[np.ndarray] = []

    def record(name: str, val: np.ndarray) -> None:
        names.append(name)
        values.append(np.asarray(val, dtype=np.complex128))

    record("marginal_sum", sum(_diag_sandwich(product_columns(j), m) for j in rng_b))
    record(
        "identity_insertion",
        sum(_diag_sandwich(product_columns(j), full_identity @ m @ full_identity) for j in rng_b),
    )
    record(
        "closure_expansion",
        sum(
            _diag_sandwich(product_columns(j), proj[k] @ m @ proj[kp])
            for j in rng_b for k in rng_b for kp in rng_b
        ),
    )
    record(
        "embedding_factorization",
        sum(
            _diag_sandwich(product_columns(j), attach[k] @ contract[k] @ m @ attach[kp] @ contract[kp])
            for j in rng_b for k in rng_b for kp in rng_b
        ),
    )
    record(
        "delta_collapse",
        sum(
            overlap[j, k] * _diag_sandwich(va, contract[k] @ m @ attach[kp]) * overlap[kp, j]
            for j in rng_b for k in rng_b for kp in rng_b
        ),
    )
    record("single_sum", sum(_diag_sandwich(va, contract[j] @ m @ attach[j]) for j in rng_b))
    record("reduced_population", _diag_sandwich(va, sum(contract[j] @ m @ attach[j] for j in rng_b)))
    record("partial_trace_population", _diag_sandwich(va, partial_trace_fast(rho, [0]).matrix))

    deviations = [float(np.max(np.abs(b - a))) for a, b in zip(values, values[1:])]

    # projector factorization and the two delta identities used in the collapse
    residuals = {
        "projector_factorization": max(
            float(np.max(np.abs(proj[k] - attach[k] @ contract[k]))) for k in rng_b
        ),
        "bra_contract_delta": max(
            float(np.max(np.abs(contract[kp] @ linalg.kron(a, bvecs[j]) - a * (1.0 if kp == j else 0.0))))
            for a in avecs for j in rng_b for kp in rng_b
        ),
        "ket_attach_delta": max(
            float(np.max(np.abs(
                linalg.kron(a, bvecs[j]).conj().T @ attach[k] - a.conj().T * (1.0 if k == j else 0.0)
            )))
            for a in avecs for j in rng_b for k in rng_b
        ),
    }
    return StepReport(names, values, deviations, residuals, tol)
