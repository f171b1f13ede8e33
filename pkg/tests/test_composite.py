import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from partrace import linalg
from partrace.composite import (
    derivation_walkthrough,
    embed_bra,
    embed_ket,
    extend,
    partial_trace_fast,
    partial_trace_sequential,
    partial_trace_via_embeddings,
)
from partrace.errors import BasisError, ShapeError
from partrace.rng import generator
from partrace.states import (
    DensityOperator,
    Ket,
    bell_phi_plus,
    from_pure,
    ket1,
    ket_plus,
    product_state,
    random_density,
    random_unitary,
    validate_density,
)

from conftest import brute_partial_trace, random_hermitian

seeds = st.integers(0, 2**40)
small = st.sampled_from([2, 3, 4])
k0, k1 = linalg.ket_of(1, 0), linalg.ket_of(0, 1)


def rotated_basis(seed, d):
    u = random_unitary(generator(seed), d)
    return [u[:, [k]] for k in range(d)]


def test_extend_examples(pauli):
    assert np.array_equal(extend(np.eye(2), 0, (2, 2)).extended, np.eye(4))
    x0 = extend(pauli["X"], 0, (2, 2)).extended
    # |0,1> -> |1,1>
    assert np.array_equal(x0 @ linalg.kron(k0, k1), linalg.kron(k1, k1))
    assert np.array_equal(extend(pauli["Z"], 1, (2, 2)).extended, np.diag([1, -1, 1, -1]))


def test_extend_middle_slot(pauli):
    ext = extend(pauli["Z"], 1, (2, 2, 3)).extended
    assert np.array_equal(ext, np.kron(np.kron(np.eye(2), pauli["Z"]), np.eye(3)))


def test_extend_errors(pauli):
    with pytest.raises(ShapeError):
        extend(pauli["X"], 2, (2, 2))
    with pytest.raises(ShapeError):
        extend(pauli["X"], 0, (3, 2))


def test_embed_ket_examples(pauli):
    m = embed_ket(np.eye(2), k0)
    assert m.matrix.shape == (4, 2)
    assert np.array_equal(m(k1), linalg.kron(k1, k0))
    assert np.array_equal(embed_ket(pauli["X"], ket1())(k0), linalg.kron(k1, k1))


def test_embed_bra_examples():
    m = embed_bra(np.eye(2), k0)
    assert m.matrix.shape == (2, 4)
    a = linalg.ket_of(0.6, 0.8j)
    assert np.array_equal(m(linalg.kron(a, k0)), a)
    assert np.array_equal(m(linalg.kron(a, k1)), np.zeros((2, 1)))
    plus = ket_plus().vector
    assert np.allclose(m(linalg.kron(a, plus)), a / np.sqrt(2), atol=1e-16)


def test_embed_bra_accepts_row():
    row = linalg.dagger(ket_plus().vector)
    assert np.array_equal(embed_bra(np.eye(2), row).matrix, embed_bra(np.eye(2), ket_plus()).matrix)


@given(seeds, small, small)
def test_embedding_adjoint(seed, da, db):
    rng = generator(seed)
    a = random_unitary(rng, da) @ np.diag(rng.random(da))
    b = random_unitary(rng, db)[:, [0]]
    assert np.array_equal(linalg.dagger(embed_ket(a, b).matrix), embed_bra(linalg.dagger(a), b).matrix)


@given(seeds, small, small)
def test_projector_factorizes_into_embeddings(seed, da, db):
    for b in rotated_basis(seed, db):
        proj = extend(b @ b.conj().T, 1, (da, db)).extended
        composed = embed_ket(np.eye(da), b).matrix @ embed_bra(np.eye(da), b).matrix
        assert np.max(np.abs(proj - composed)) <= 1e-15


def test_partial_trace_fixtures():
    rho_a, rho_b = random_density(3, 1), random_density(2, 2)
    prod = product_state(rho_a, rho_b)
    assert np.max(np.abs(partial_trace_via_embeddings(prod, 1).matrix - rho_a.matrix)) <= 1e-12
    assert np.max(np.abs(partial_trace_via_embeddings(bell_phi_plus(), 1).matrix - np.eye(2) / 2)) <= 1e-12
    pure01 = from_pure(Ket(linalg.kron(k0, k1), (2, 2)))
    out = partial_trace_via_embeddings(pure01, 1)
    assert np.array_equal(out.matrix, np.diag([1, 0]))
    assert out.dims == (2,)


def test_partial_trace_basis_errors():
    rho = random_density(4, 0, (2, 2))
    with pytest.raises(BasisError):
        partial_trace_via_embeddings(rho, 1, [k0])
    with pytest.raises(BasisError):
        partial_trace_via_embeddings(rho, 1, [k0, ket_plus().vector])
    with pytest.raises(ShapeError):
        partial_trace_via_embeddings(rho, 2)


def test_partial_trace_basis_tolerance():
    # orthonormal to ~1e-9 is accepted, ~1e-7 is not
    rho = random_density(4, 0, (2, 2))
    eps = 1e-9
    partial_trace_via_embeddings(rho, 1, [linalg.ket_of(1 + eps, 0), k1])
    with pytest.raises(BasisError):
        partial_trace_via_embeddings(rho, 1, [linalg.ket_of(1 + 1e-7, 0), k1])


def test_fast_keep_all_is_identity():
    rho = random_density(6, 3, (2, 3))
    assert partial_trace_fast(rho, [0, 1]) is rho


def test_fast_ghz():
    v = np.zeros(8)
    v[0] = v[7] = 1 / np.sqrt(2)
    ghz = from_pure(Ket(v, (2, 2, 2)))
    assert np.allclose(partial_trace_fast(ghz, [0]).matrix, np.diag([0.5, 0.5]), atol=1e-15)
    assert np.max(np.abs(partial_trace_sequential(ghz, [0]).matrix - np.diag([0.5, 0.5]))) <= 1e-15


def test_fast_errors():
    rho = random_density(4, 0, (2, 2))
    with pytest.raises(ShapeError):
        partial_trace_fast(rho, [])
    with pytest.raises(ShapeError):
        partial_trace_fast(rho, [2])


@pytest.mark.parametrize("dims", [(2, 3), (3, 2), (2, 2, 2), (2, 3, 2), (3, 2, 2, 2)])
def test_fast_matches_brute_force(dims):
    d = int(np.prod(dims))
    rho = random_density(d, sum(dims), dims)
    n = len(dims)
    for r in range(1, n):
        for keep in itertools.combinations(range(n), r):
            expected = brute_partial_trace(rho.matrix, dims, keep)
            assert np.max(np.abs(partial_trace_fast(rho, keep).matrix - expected)) <= 1e-12
            assert np.max(np.abs(partial_trace_sequential(rho, keep).matrix - expected)) <= 1e-12


@given(seeds, small, small)
def test_fast_matches_embeddings(seed, da, db):
    rho = random_density(da * db, seed, (da, db))
    fast = partial_trace_fast(rho, [0]).matrix
    slow = partial_trace_via_embeddings(rho, 1).matrix
    assert np.max(np.abs(fast - slow)) <= 1e-12
    fast_b = partial_trace_fast(rho, [1]).matrix
    assert np.max(np.abs(fast_b - partial_trace_via_embeddings(rho, 0).matrix)) <= 1e-12


@settings(max_examples=40)
@given(seeds, small, small)
def test_basis_invariance(seed, da, db):
    rho = random_density(da * db, seed, (da, db))
    ref = partial_trace_via_embeddings(rho, 1).matrix
    rot = partial_trace_via_embeddings(rho, 1, rotated_basis(seed + 1, db)).matrix
    assert np.max(np.abs(ref - rot)) <= 1e-10


@given(seeds, small, small, st.floats(0, 1))
def test_linearity(seed, da, db, alpha):
    r1 = random_density(da * db, seed, (da, db))
    r2 = random_density(da * db, seed + 1, (da, db))
    mix = DensityOperator(alpha * r1.matrix + (1 - alpha) * r2.matrix, (da, db))
    lhs = partial_trace_via_embeddings(mix, 1).matrix
    rhs = alpha * partial_trace_via_embeddings(r1, 1).matrix + (1 - alpha) * partial_trace_via_embeddings(r2, 1).matrix
    assert np.max(np.abs(lhs - rhs)) <= 1e-12


@settings(max_examples=40)
@given(seeds, small, small)
def test_trace_preserving_and_valid(seed, da, db):
    rho = random_density(da * db, seed, (da, db))
    out = partial_trace_via_embeddings(rho, 1)
    assert abs(out.trace() - 1) <= 1e-12
    rep = validate_density(out, 1e-10)
    assert rep.hermitian and rep.psd


@given(seeds, small, small)
def test_local_operator_slides_out(seed, da, db):
    rho = random_density(da * db, seed, (da, db))
    a = random_hermitian(seed + 7, da)
    moved = DensityOperator(extend(a, 0, (da, db)).extended @ rho.matrix, (da, db))
    lhs = partial_trace_via_embeddings(moved, 1).matrix
    rhs = a @ partial_trace_via_embeddings(rho, 1).matrix
    assert np.max(np.abs(lhs - rhs)) <= 1e-10


@given(seeds, small, small)
def test_expectation_consistency(seed, da, db):
    rho = random_density(da * db, seed, (da, db))
    a = random_hermitian(seed + 3, da)
    local = np.trace(partial_trace_fast(rho, [0]).matrix @ a)
    globl = np.trace(rho.matrix @ extend(a, 0, (da, db)).extended)
    assert abs(local - globl) <= 1e-10


@given(seeds, st.sampled_from([(2, 2, 2), (2, 3, 2), (3, 2, 2)]))
def test_traced_slots_commute(seed, dims):
    rho = random_density(int(np.prod(dims)), seed, dims)
    one_then_two = partial_trace_via_embeddings(partial_trace_via_embeddings(rho, 1), 1)
    two_then_one = partial_trace_via_embeddings(partial_trace_via_embeddings(rho, 2), 1)
    fast = partial_trace_fast(rho, [0])
    assert np.max(np.abs(one_then_two.matrix - two_then_one.matrix)) <= 1e-12
    assert np.max(np.abs(one_then_two.matrix - fast.matrix)) <= 1e-12


def test_walkthrough_bell():
    rep = derivation_walkthrough(bell_phi_plus())
    assert rep.max_deviation <= 1e-12
    assert len(rep.deviations) == len(rep.names) - 1 == 7
    assert np.allclose(rep.final(), [0.5, 0.5])
    assert all(v <= 1e-15 for v in rep.identity_residuals.values())


def test_walkthrough_ginibre_hadamard():
    r = 1 / np.sqrt(2)
    hadamard = [linalg.ket_of(r, r), linalg.ket_of(r, -r)]
    for seed in range(10):
        rep = derivation_walkthrough(random_density(4, seed, (2, 2)), basis_b=hadamard)
        assert rep.passed and rep.max_deviation <= 1e-10


@settings(max_examples=20)
@given(seeds, small, small)
def test_walkthrough_product_state_populations(seed, da, db):
    rho_a = random_density(da, seed)
    prod = product_state(rho_a, random_density(db, seed + 1))
    ba, bb = rotated_basis(seed + 2, da), rotated_basis(seed + 3, db)
    rep = derivation_walkthrough(prod, ba, bb)
    pops = [np.vdot(a, rho_a.matrix @ a) for a in ba]
    assert np.max(np.abs(rep.final() - pops)) <= 1e-12
    assert rep.passed


def test_walkthrough_requires_bipartite():
    with pytest.raises(ShapeError):
        derivation_walkthrough(random_density(8, 0, (2, 2, 2)))
    with pytest.raises(BasisError):
        derivation_walkthrough(bell_phi_plus(), basis_b=[k0, k0])
