"""Text state files.

A state file is JSON::

    {"kind": "density", "dims": [2, 2], "matrix": [[re, im], ...]}

``matrix`` holds the ``(prod dims)^2`` entries in row-major order. Ket files
use ``"kind": "ket"`` and a ``"vector"`` of ``prod dims`` pairs; observable
files use ``"kind": "observable"`` with a Hermitian ``"matrix"``; basis files
use ``"kind": "basis"`` and ``"vectors"``, a list of vectors. Numbers are
written with 17 significant digits so doubles survive a round trip exactly.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Sequence

import numpy as np

from . import linalg
from .errors import PartraceError, ShapeError
from .states import DensityOperator, Ket, from_pure, require_valid

LOAD_TOL = 1e-8


class FileFormatError(PartraceError):
    pass


def _num(x: float) -> str:
    return format(float(x), ".17g")


def _pairs(values: np.ndarray, indent: str) -> str:
    items = [f"[{_num(z.real)}, {_num(z.imag)}]" for z in np.asarray(values).reshape(-1)]
    return "[\n" + ",\n".join(indent + it for it in items) + "\n" + indent[:-2] + "]"


def _header(kind: str, dims: Sequence[int]) -> str:
    return f'{{\n  "kind": "{kind}",\n  "dims": {json.dumps([int(d) for d in dims])},\n'


def dumps_density(rho: DensityOperator) -> str:
    return _header("density", rho.dims) + f'  "matrix": {_pairs(rho.matrix, "    ")}\n}}\n'


def dumps_ket(k: Ket) -> str:
    return _header("ket", k.dims) + f'  "vector": {_pairs(k.vector, "    ")}\n}}\n'


def dumps_observable(m, dims: Sequence[int] | None = None) -> str:
    m = linalg.as_matrix(m)
    return _header("observable", dims or [m.shape[0]]) + f'  "matrix": {_pairs(m, "    ")}\n}}\n'


def dumps_basis(vectors: Sequence) -> str:
    vecs = [linalg.as_matrix(v).reshape(-1) for v in vectors]
    body = ",\n".join("    " + _pairs(v, "      ") for v in vecs)
    return _header("basis", [len(vecs[0])]) + f'  "vectors": [\n{body}\n  ]\n}}\n'


def _complex_array(raw, n: int, what: str) -> np.ndarray:
    try:
        arr = np.asarray(raw, dtype=float)
    except (TypeError, ValueError) as exc:
        raise FileFormatError(f"{what}: entries must be [re, im] number pairs") from exc
    if arr.shape != (n, 2):
        raise FileFormatError(f"{what}: expected {n} [re, im] pairs, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise FileFormatError(f"{what}: non-finite entry")
    return arr[:, 0] + 1j * arr[:, 1]


def _parse(text: str) -> dict:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FileFormatError(f"not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise FileFormatError("top level must be an object")
    return data


def _dims(data: dict) -> tuple[int, ...]:
    dims = data.get("dims")
    if not isinstance(dims, list) or not dims or not all(isinstance(d, int) and d >= 2 for d in dims):
        raise FileFormatError("'dims' must be a non-empty list of integers >= 2")
    return tuple(dims)


def loads_state(text: str, tol: float = LOAD_TOL) -> DensityOperator:
    """Parse a density or ket file; density files must validate at ``tol``."""
    data = _parse(text)
    dims = _dims(data)
    d = int(np.prod(dims))
    kind = data.get("kind", "density")
    try:
        if kind == "ket":
            vec = _complex_array(data.get("vector"), d, "vector")
            return from_pure(Ket(vec, dims))
        if kind == "density":
            m = _complex_array(data.get("matrix"), d * d, "matrix").reshape(d, d)
            return require_valid(DensityOperator(m, dims), tol)
    except ShapeError as exc:
        raise FileFormatError(str(exc)) from exc
    raise FileFormatError(f"unsupported state kind {kind!r}")


def loads_observable(text: str) -> np.ndarray:
    data = _parse(text)
    dims = _dims(data)
    d = int(np.prod(dims))
    if data.get("kind", "observable") != "observable":
        raise FileFormatError(f"expected an observable file, got kind {data.get('kind')!r}")
    return _complex_array(data.get("matrix"), d * d, "matrix").reshape(d, d)


def loads_basis(text: str) -> list[np.ndarray]:
    data = _parse(text)
    dims = _dims(data)
    if len(dims) != 1:
        raise FileFormatError("basis files describe a single factor")
    d = dims[0]
    vectors = data.get("vectors")
    if not isinstance(vectors, list):
        raise FileFormatError("'vectors' must be a list")
    return [_complex_array(v, d, f"vector {i}").reshape(-1, 1) for i, v in enumerate(vectors)]


def read_text(path: str | Path) -> str:
    return Path(path).read_text()


def write_text(path: str | Path, text: str) -> None:
    Path(path).write_text(text)


def digest(*chunks: bytes) -> str:
    h = hashlib.sha256()
    for c in chunks:
        h.update(c)
    return "sha256:" + h.hexdigest()[:16]
