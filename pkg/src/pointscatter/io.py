"""Output formats.

Binary matrix file (little-endian throughout):

    magic   8 bytes  b"PSMAT\\x00\\x01\\x00"
    rows    uint64
    cols    uint64
    nodes   rows float64   grid nodes (or basis indices for compressed matrices)
    weights rows float64   quadrature weights (1 for compressed matrices)
    entries rows*cols complex128, row-major, as (re, im) float64 pairs

Every writer goes through a temporary file in the target directory and an
atomic rename.
"""
import csv
import io as _io
import json
import os
import tempfile

import numpy as np

MAGIC = b"PSMAT\x00\x01\x00"


def atomic_write(path, data, mode="wb"):
    path = os.fspath(path)
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, mode) as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def matrix_bytes(matrix, nodes=None, weights=None):
    A = np.asarray(matrix, dtype="<c16")
    if A.ndim != 2:
        raise ValueError("matrix must be two-dimensional")
    r, c = A.shape
    nodes = np.arange(r, dtype=float) if nodes is None else np.asarray(nodes, dtype=float)
    weights = np.ones(r) if weights is None else np.asarray(weights, dtype=float)
    if nodes.shape != (r,) or weights.shape != (r,):
        raise ValueError("nodes and weights must have one entry per row")
    head = MAGIC + np.array([r, c], dtype="<u8").tobytes()
    return (head + nodes.astype("<f8").tobytes() + weights.astype("<f8").tobytes()
            + np.ascontiguousarray(A).tobytes())


def write_matrix(path, matrix, nodes=None, weights=None):
    """Write a plain array, or an OperatorMatrix as its action on nodal values
    (diag + kern·W, so that (Mu)_i = Σ_j M_ij u_j)."""
    if hasattr(matrix, "grid"):
        nodes, weights = matrix.grid.nodes, matrix.grid.weights
        matrix = matrix.matrix
    atomic_write(path, matrix_bytes(matrix, nodes, weights))


def read_matrix(path):
    """(matrix, nodes, weights) from a binary matrix file."""
    with open(path, "rb") as fh:
        buf = fh.read()
    if buf[:8] != MAGIC:
        raise ValueError(f"{path}: not a matrix file")
    r, c = np.frombuffer(buf, dtype="<u8", count=2, offset=8)
    r, c = int(r), int(c)
    off = 24
    nodes = np.frombuffer(buf, dtype="<f8", count=r, offset=off)
    off += 8 * r
    weights = np.frombuffer(buf, dtype="<f8", count=r, offset=off)
    off += 8 * r
    A = np.frombuffer(buf, dtype="<c16", count=r * c, offset=off).reshape(r, c)
    if off + 16 * r * c != len(buf):
        raise ValueError(f"{path}: size does not match header")
    return A.copy(), nodes.copy(), weights.copy()


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.floating, float)):
        v = float(x)
        return v if np.isfinite(v) else repr(v)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, complex):
        return [x.real, x.imag]
    return x


def dumps(obj):
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n"


def write_json(path, obj):
    atomic_write(path, dumps(obj), mode="w")


def write_csv(path, header, rows):
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    atomic_write(path, buf.getvalue(), mode="w")
