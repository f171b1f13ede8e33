import numpy as np
import pytest

from partrace.rng import complex_normal, generator


def random_complex(seed, shape):
    return complex_normal(generator(seed), shape)


def random_hermitian(seed, d):
    g = random_complex(seed, (d, d))
    return g + g.conj().T


def brute_partial_trace(m, dims, keep):
    """Loop over every (row, col) pair and add entries whose traced digits agree."""
    dims = list(dims)
    n = len(dims)
    keep = sorted(keep)
    kept_dims = [dims[k] for k in keep]
    dk = int(np.prod(kept_dims))
    out = np.zeros((dk, dk), dtype=complex)
    for r, rdig in enumerate(np.ndindex(*dims)):
        for c, cdig in enumerate(np.ndindex(*dims)):
            if all(rdig[k] == cdig[k] for k in range(n) if k not in keep):
                rr = np.ravel_multi_index([rdig[k] for k in keep], kept_dims)
                cc = np.ravel_multi_index([cdig[k] for k in keep], kept_dims)
                out[rr, cc] += m[r, c]
    return out


@pytest.fixture
def pauli():
    return {
        "I": np.eye(2, dtype=complex),
        "X": np.array([[0, 1], [1, 0]], dtype=complex),
        "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
        "Z": np.array([[1, 0], [0, -1]], dtype=complex),
    }
