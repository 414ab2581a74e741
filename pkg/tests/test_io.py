import json
import os

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pointscatter import io
from pointscatter.observables import OperatorMatrix
from pointscatter.quadrature import make_line


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 6), st.integers(1, 6), st.integers(0, 2**31))
def test_matrix_roundtrip(tmp_path_factory, r, c, seed):
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(r, c)) + 1j * rng.normal(size=(r, c))
    nodes, weights = rng.normal(size=r), rng.uniform(size=r)
    path = tmp_path_factory.mktemp("m") / "a.bin"
    io.write_matrix(path, A, nodes, weights)
    B, n2, w2 = io.read_matrix(path)
    assert np.array_equal(A, B) and np.array_equal(nodes, n2) and np.array_equal(weights, w2)


def test_header_layout(tmp_path):
    A = np.arange(6, dtype=complex).reshape(2, 3)
    io.write_matrix(tmp_path / "a.bin", A)
    buf = (tmp_path / "a.bin").read_bytes()
    assert buf[:8] == io.MAGIC
    assert np.frombuffer(buf, "<u8", 2, 8).tolist() == [2, 3]
    assert len(buf) == 24 + 2 * 8 * 2 + 16 * 6


def test_operator_matrix_written_with_grid(tmp_path):
    g = make_line(-1, 1, 4)
    M = OperatorMatrix.identity(g)
    io.write_matrix(tmp_path / "I.bin", M)
    B, nodes, weights = io.read_matrix(tmp_path / "I.bin")
    assert np.array_equal(nodes, g.nodes) and np.array_equal(weights, g.weights)
    assert B.shape == (4, 4)


def test_bad_file(tmp_path):
    (tmp_path / "x.bin").write_bytes(b"nonsense-bytes-here-and-more")
    with pytest.raises(ValueError):
        io.read_matrix(tmp_path / "x.bin")


def test_atomic_write_leaves_no_temp(tmp_path):
    io.write_json(tmp_path / "r.json", {"a": np.float64(1.5), "b": np.arange(3), "c": float("inf")})
    assert sorted(os.listdir(tmp_path)) == ["r.json"]
    d = json.loads((tmp_path / "r.json").read_text())
    assert d == {"a": 1.5, "b": [0, 1, 2], "c": "inf"}


def test_failed_write_cleans_up(tmp_path):
    with pytest.raises(TypeError):
        io.atomic_write(tmp_path / "f.txt", object(), mode="w")
    assert os.listdir(tmp_path) == []


def test_csv_repr_floats(tmp_path):
    io.write_csv(tmp_path / "t.csv", ["x"], [[0.1], [1 / 3]])
    assert (tmp_path / "t.csv").read_text() == "x\n0.1\n0.3333333333333333\n"
