"""Born-rule statistics, classical marginalization and sampling."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np

from . import linalg
from .composite import extend, partial_trace_fast
from .errors import InvalidStateError, ShapeError
from .linalg import DEFAULT_TOL
from .rng import generator
from .states import DensityOperator, ginibre, random_unitary

TOL_DEGENERACY = 1e-9
CLAMP_TOL = 1e-12
SUM_TOL = 1e-9
COMPATIBILITY_TOL = 1e-10

Side = Literal["a", "b"]


@dataclass(frozen=True)
class Observable:
    """Spectral data of a Hermitian observable.

    ``groups`` partitions eigenvector indices into degenerate eigenspaces;
    each group's outcome label is the eigenvalue of its first member.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    groups: tuple[tuple[int, ...], ...]

    @property
    def dimension(self) -> int:
        return self.eigenvectors.shape[0]

    @property
    def outcomes(self) -> np.ndarray:
        return np.array([self.eigenvalues[g[0]] for g in self.groups])

    def matrix(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T

    def projector(self, group: int) -> np.ndarray:
        v = self.eigenvectors[:, list(self.groups[group])]
        return v @ v.conj().T


def _group(eigenvalues: np.ndarray, tol: float) -> tuple[tuple[int, ...], ...]:
    # eigenvalues are sorted descending; a group closes once the spread would exceed tol
    groups: list[list[int]] = [[0]]
    for k in range(1, len(eigenvalues)):
        if eigenvalues[groups[-1][0]] - eigenvalues[k] <= tol:
            groups[-1].append(k)
        else:
            groups.append([k])
    return tuple(tuple(g) for g in groups)


def observable_from_spectrum(
    eigenvalues: Sequence[float], eigenvectors, tol_degeneracy: float = TOL_DEGENERACY
) -> Observable:
    vals = np.asarray(eigenvalues, dtype=float)
    vecs = linalg.as_matrix(eigenvectors, name="eigenvectors")
    if vecs.shape != (len(vals), len(vals)):
        raise ShapeError(f"need {len(vals)} eigenvectors of dimension {len(vals)}, got {vecs.shape}")
    if not linalg.check_orthonormal([vecs[:, k] for k in range(len(vals))], 1e-8):
        raise ShapeError("eigenvectors are not orthonormal")
    order = np.argsort(-vals, kind="stable")
    vals, vecs = vals[order], vecs[:, order]
    return Observable(vals, vecs, _group(vals, tol_degeneracy))


def observable_from_matrix(m, tol_degeneracy: float = TOL_DEGENERACY, tol: float = DEFAULT_TOL) -> Observable:
    spec = linalg.hermitian_eig(m, tol=tol)
    return Observable(spec.eigenvalues, spec.eigenvectors, _group(spec.eigenvalues, tol_degeneracy))


PAULI_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)


def pauli_z() -> Observable:
    return observable_from_spectrum([1.0, -1.0], np.eye(2))


def pauli_x() -> Observable:
    return observable_from_spectrum([1.0, -1.0], np.array([[1, 1], [1, -1]]) / np.sqrt(2))


def identity_observable(d: int) -> Observable:
    return observable_from_matrix(linalg.identity(d))


def random_observable(rng: np.random.Generator, dim: int) -> Observable:
    """Haar-random eigenbasis with distinct uniform eigenvalues in [-1, 1)."""
    u = random_unitary(rng, dim)
    vals = 2.0 * rng.random(dim) - 1.0
    return observable_from_spectrum(vals, u)


@dataclass(frozen=True)
class ProbabilityDistribution:
    outcomes: np.ndarray
    probs: np.ndarray


@dataclass(frozen=True)
class JointDistribution:
    outcomes_a: np.ndarray
    outcomes_b: np.ndarray
    probs: np.ndarray  # probs[i, j] for (outcomes_a[i], outcomes_b[j])


def _clean_probs(p: np.ndarray) -> np.ndarray:
    """Drop round-off imaginary parts, clamp tiny negatives, renormalize."""
    p = np.real(np.asarray(p))
    if np.any(p < -CLAMP_TOL):
        raise InvalidStateError(f"negative probability {p.min():.3e}: state is not a valid density operator")
    if np.any(p < 0):
        p = np.where(p < 0, 0.0, p)
        p = p / p.sum()
    return p


def _group_sum(values: np.ndarray, groups, axis: int) -> np.ndarray:
    return np.stack([np.take(values, list(g), axis=axis).sum(axis=axis) for g in groups], axis=axis)


def _populations(matrix: np.ndarray, vecs: np.ndarray) -> np.ndarray:
    return np.einsum("ri,rs,si->i", vecs.conj(), matrix, vecs)


def born_probs(rho: DensityOperator, obs: Observable) -> ProbabilityDistribution:
    """``<a_i|rho|a_i>`` per eigenvector, summed over each degenerate group."""
    if rho.dim != obs.dimension:
        raise ShapeError(f"observable dimension {obs.dimension} does not match state dimension {rho.dim}")
    pops = _populations(rho.matrix, obs.eigenvectors)
    return ProbabilityDistribution(obs.outcomes, _clean_probs(_group_sum(pops, obs.groups, 0)))


def compatibility_residual(obs_a: Observable, obs_b: Observable) -> float:
    """Largest entry of ``[A (x) 1, 1 (x) B]`` for the reconstructed matrices."""
    dims = (obs_a.dimension, obs_b.dimension)
    ext_a = extend(obs_a.matrix(), 0, dims).extended
    ext_b = extend(obs_b.matrix(), 1, dims).extended
    return float(np.max(np.abs(linalg.commutator(ext_a, ext_b))))


def joint_born_probs(rho_ab: DensityOperator, obs_a: Observable, obs_b: Observable) -> JointDistribution:
    """``<a_i,b_j|rho|a_i,b_j>`` on explicit product kets, grouped by degeneracy."""
    if rho_ab.nslots != 2:
        raise ShapeError("joint probabilities need a bipartite state")
    da, db = rho_ab.dims
    if obs_a.dimension != da or obs_b.dimension != db:
        raise ShapeError(
            f"observable dimensions ({obs_a.dimension}, {obs_b.dimension}) do not match dims {rho_ab.dims}"
        )
    residual = compatibility_residual(obs_a, obs_b)
    if residual > COMPATIBILITY_TOL:
        raise ShapeError(f"extended observables do not commute (residual {residual:.3e})")
    product_basis = linalg.kron(obs_a.eigenvectors, obs_b.eigenvectors)
    pops = _populations(rho_ab.matrix, product_basis).reshape(da, db)
    grouped = _group_sum(_group_sum(pops, obs_a.groups, 0), obs_b.groups, 1)
    return JointDistribution(obs_a.outcomes, obs_b.outcomes, _clean_probs(grouped))


def marginalize(joint: JointDistribution, keep: Side = "a") -> ProbabilityDistribution:
    if keep == "a":
        return ProbabilityDistribution(joint.outcomes_a, joint.probs.sum(axis=1))
    if keep == "b":
        return ProbabilityDistribution(joint.outcomes_b, joint.probs.sum(axis=0))
    raise ValueError(f"keep must be 'a' or 'b', got {keep!r}")


@dataclass(frozen=True)
class ConsistencyReport:
    outcomes: np.ndarray
    reduced_probs: np.ndarray
    marginal_probs: np.ndarray
    deviations: np.ndarray
    tol: float

    @property
    def max_deviation(self) -> float:
        return float(np.max(self.deviations))

    @property
    def passed(self) -> bool:
        return self.max_deviation <= self.tol


def verify_marginal_consistency(
    rho_ab: DensityOperator,
    obs_a: Observable,
    obs_b: Observable,
    tol: float = DEFAULT_TOL,
    side: Side = "a",
    reduced: DensityOperator | None = None,
) -> ConsistencyReport:
    """Compare Born probabilities of the reduced state with marginals of the joint.

    ``side`` picks which subsystem is kept. ``reduced`` overrides the partial
    trace (used for negative controls).
    """
    keep = 0 if side == "a" else 1
    obs = obs_a if side == "a" else obs_b
    if reduced is None:
        reduced = partial_trace_fast(rho_ab, [keep])
    lhs = born_probs(reduced, obs)
    rhs = marginalize(joint_born_probs(rho_ab, obs_a, obs_b), side)
    return ConsistencyReport(lhs.outcomes, lhs.probs, rhs.probs, np.abs(lhs.probs - rhs.probs), tol)


@dataclass(frozen=True)
class CorpusTrial:
    index: int
    seed: int
    rho: DensityOperator
    obs_a: Observable
    obs_b: Observable


CORPUS_DIMS = (2, 3, 4)


def corpus_trial(index: int, seed0: int = 0, rho: DensityOperator | None = None) -> CorpusTrial:
    """Trial ``index`` of the random corpus, seeded with ``seed0 + index``.

    Draws subsystem dimensions uniformly from {2, 3, 4}, a Ginibre state and
    one random observable per factor. A fixed bipartite ``rho`` skips the
    state draw.
    """
    seed = seed0 + index
    rng = generator(seed)
    if rho is None:
        dims = tuple(int(CORPUS_DIMS[k]) for k in rng.integers(0, len(CORPUS_DIMS), size=2))
        rho = DensityOperator(ginibre(rng, dims[0] * dims[1]), dims)
    elif rho.nslots != 2:
        raise ShapeError("corpus trials need a bipartite state")
    return CorpusTrial(index, seed, rho, random_observable(rng, rho.dims[0]), random_observable(rng, rho.dims[1]))


def expectation(rho: DensityOperator, obs: Observable) -> float:
    """``sum_i a_i P(a_i)``."""
    dist = born_probs(rho, obs)
    return float(np.dot(dist.outcomes, dist.probs))


@dataclass(frozen=True)
class SampleCounts:
    outcomes_a: np.ndarray
    outcomes_b: np.ndarray
    counts: np.ndarray  # counts[i, j]
    n: int
    seed: int


def sample_joint(joint: JointDistribution, n: int, seed: int) -> SampleCounts:
    """Inverse-CDF sampling over the row-major flattened joint, one uniform per shot."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    flat = joint.probs.reshape(-1)
    cdf = np.cumsum(flat)
    cdf /= cdf[-1]
    u = generator(seed).random(n)
    idx = np.searchsorted(cdf, u, side="right")
    counts = np.bincount(idx, minlength=flat.size).reshape(joint.probs.shape)
    return SampleCounts(joint.outcomes_a, joint.outcomes_b, counts, int(n), int(seed))


@dataclass(frozen=True)
class DeviationReport:
    outcomes: list
    frequencies: np.ndarray
    probs: np.ndarray
    deviations: np.ndarray
    bounds: np.ndarray

    @property
    def flags(self) -> np.ndarray:
        return self.deviations > self.bounds

    @property
    def passed(self) -> bool:
        return not bool(np.any(self.flags))


def empirical_compare(
    counts: SampleCounts, reference: JointDistribution | ProbabilityDistribution, side: Side = "a"
) -> DeviationReport:
    """Per-outcome ``|freq - p|`` against the binomial bound ``3 sqrt(p(1-p)/n)``.

    A :class:`ProbabilityDistribution` reference is compared with the
    ``side`` marginal of the counts.
    """
    if isinstance(reference, JointDistribution):
        if not (np.array_equal(reference.outcomes_a, counts.outcomes_a)
                and np.array_equal(reference.outcomes_b, counts.outcomes_b)):
            raise ShapeError("joint reference outcomes do not match the sampled outcomes")
        outcomes = [(a, b) for a in reference.outcomes_a for b in reference.outcomes_b]
        observed = counts.counts.reshape(-1)
        probs = reference.probs.reshape(-1)
    else:
        labels = counts.outcomes_a if side == "a" else counts.outcomes_b
        if not np.array_equal(reference.outcomes, labels):
            raise ShapeError("reference outcomes do not match the sampled outcomes")
        outcomes = list(reference.outcomes)
        observed = counts.counts.sum(axis=1 if side == "a" else 0)
        probs = reference.probs
    freq = observed / counts.n
    bounds = 3.0 * np.sqrt(probs * (1.0 - probs) / counts.n)
    return DeviationReport(outcomes, freq, probs, np.abs(freq - probs), bounds)
