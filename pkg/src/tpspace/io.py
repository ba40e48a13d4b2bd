"""JSON documents for spaces, kernels, functions and subspaces.

Floats are written with ``repr`` precision (shortest string that round-trips
exactly), so a document read back reproduces every value bit for bit.

Schemas::

    ray       {"sector": k, "re": [...], "im": [...]}
    space     {"sectors": [d_1, ...], "hbar": [...], "points": [ray, ...]}
    kernel    {"n": N, "p": [[...], ...]}
    function  {"terms": [{"c": real, "point": ray}, ...]}
              or {"blocks": [{"re": [[...]], "im": [[...]]}, ...]}, one
              Hermitian matrix per sector (read only)
    complex   {"re": function, "im": function}
    subspace  {"sector_dims": [k_1, ...], "blocks": [[column, ...], ...]}
              where a column is {"re": [...], "im": [...]}
"""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .core import PureStateSpace, Ray, TransitionKernel
from .cstar import ComplexObservable
from .errors import InputError, TPSError
from .lattice import SubspaceElement
from .spectral import ObservableFunction


def _floats(x):
    return [float(v) for v in np.asarray(x, dtype=float).ravel()]


def _require(doc, key, kind=None):
    if not isinstance(doc, dict) or key not in doc:
        raise InputError(f"missing field {key!r}")
    value = doc[key]
    if kind is not None and not isinstance(value, kind):
        raise InputError(f"field {key!r} must be {kind.__name__}")
    return value


def _complex_vector(doc):
    re = np.asarray(_require(doc, "re", list), dtype=float)
    im = np.asarray(doc.get("im", [0.0] * len(re)), dtype=float)
    if re.shape != im.shape or re.ndim != 1:
        raise InputError("re and im must be flat lists of equal length")
    return re + 1j * im


def ray_to_json(ray):
    return {"sector": ray.sector, "re": _floats(ray.vector.real), "im": _floats(ray.vector.imag)}


def ray_from_json(doc):
    try:
        return Ray(int(_require(doc, "sector")), _complex_vector(doc))
    except (TypeError, ValueError) as exc:
        raise InputError(f"bad point: {exc}") from exc


def space_to_json(space):
    return {
        "sectors": list(space.sectors),
        "hbar": [float(h) for h in space.hbar],
        "points": [ray_to_json(r) for r in space.points],
    }


def space_from_json(doc):
    try:
        sectors = tuple(int(d) for d in _require(doc, "sectors", list))
        hbar = doc.get("hbar")
        points = [ray_from_json(p) for p in doc.get("points", [])]
        return PureStateSpace(sectors, tuple(hbar) if hbar is not None else None, points)
    except InputError:
        raise
    except (TypeError, ValueError) as exc:
        raise InputError(f"bad space: {exc}") from exc


def kernel_to_json(K):
    return {"n": K.n, "p": [_floats(row) for row in K.p]}


def kernel_from_json(doc):
    try:
        p = np.asarray(_require(doc, "p", list), dtype=float)
        K = TransitionKernel(p)
    except InputError:
        raise
    except (TypeError, ValueError) as exc:
        raise InputError(f"bad kernel: {exc}") from exc
    if "n" in doc and doc["n"] != K.n:
        raise InputError(f"kernel declares n={doc['n']} but has {K.n} rows")
    return K


def function_to_json(f):
    return {"terms": [{"c": float(c), "point": ray_to_json(r)} for c, r in f.terms]}


def _hermitian_blocks(doc, space):
    blocks = _require(doc, "blocks", list)
    if len(blocks) != len(space.sectors):
        raise InputError("need one block per sector")
    out = []
    for d, b in zip(space.sectors, blocks):
        re = np.asarray(_require(b, "re", list), dtype=float)
        im = np.asarray(b.get("im", np.zeros_like(re)), dtype=float)
        M = re + 1j * im
        if M.shape != (d, d):
            raise InputError(f"block of shape {M.shape} in a {d}-dim sector")
        if np.max(np.abs(M - M.conj().T)) > 1e-12:
            raise InputError("block is not Hermitian")
        out.append(M)
    return ObservableFunction.from_blocks(space, out)


def function_from_json(doc, space):
    if isinstance(doc, dict) and "blocks" in doc:
        return _hermitian_blocks(doc, space)
    try:
        terms = [(float(_require(t, "c")), ray_from_json(_require(t, "point"))) for t in _require(doc, "terms", list)]
        return ObservableFunction(space, terms)
    except InputError:
        raise
    except (TypeError, ValueError) as exc:
        raise InputError(f"bad function: {exc}") from exc


def complex_to_json(a):
    return {"re": function_to_json(a.re), "im": function_to_json(a.im)}


def complex_from_json(doc, space):
    im = doc.get("im") if isinstance(doc, dict) else None
    return ComplexObservable(
        function_from_json(_require(doc, "re"), space),
        function_from_json(im, space) if im is not None else None,
    )


def subspace_to_json(Q):
    return {
        "sector_dims": list(Q.sector_dims),
        "blocks": [
            [{"re": _floats(B[:, j].real), "im": _floats(B[:, j].imag)} for j in range(B.shape[1])]
            for B in Q.blocks
        ],
    }


def subspace_from_json(doc, space):
    blocks = _require(doc, "blocks", list)
    if len(blocks) != len(space.sectors):
        raise InputError("need one block per sector")
    spans = []
    for d, cols in zip(space.sectors, blocks):
        vecs = [_complex_vector(c) for c in cols]
        if any(v.shape != (d,) for v in vecs):
            raise InputError(f"column length differs from sector dimension {d}")
        spans.append(np.stack(vecs, axis=1) if vecs else np.zeros((d, 0), dtype=complex))
    try:
        return SubspaceElement(space.sectors, tuple(spans))
    except TPSError as exc:
        raise InputError(str(exc)) from exc


# files -------------------------------------------------------------------


def dumps(doc):
    return json.dumps(doc, indent=2, allow_nan=True) + "\n"


def load_json(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path} is not valid JSON: {exc}") from exc


def write_atomic(path, text):
    """Write via a temporary file in the same directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_json(path, doc):
    write_atomic(path, dumps(doc))
