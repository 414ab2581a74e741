import csv
import json
import pathlib

import numpy as np
import pytest

from pointscatter import cli, io

GOLDEN = pathlib.Path(__file__).parent / "golden"
RUNS = json.loads((GOLDEN / "runs.json").read_text())
RTOL, ATOL = 1e-9, 1e-13   # ATOL covers round-off-level residuals (~1e-15)


def _close(a, b, where):
    if isinstance(a, dict):
        assert sorted(a) == sorted(b), where
        for k in a:
            _close(a[k], b[k], f"{where}/{k}")
    elif isinstance(a, list):
        assert len(a) == len(b), where
        for i, (x, y) in enumerate(zip(a, b)):
            _close(x, y, f"{where}/{i}")
    elif isinstance(a, float) or isinstance(b, float):
        assert np.isclose(a, b, rtol=RTOL, atol=ATOL), f"{where}: {a} vs {b}"
    else:
        assert a == b, where


def _cell(x):
    try:
        return complex(x)
    except ValueError:
        return x


def _compare_file(new, ref):
    if ref.suffix == ".json":
        _close(json.loads(new.read_text()), json.loads(ref.read_text()), ref.name)
    else:
        rn = list(csv.reader(new.open()))
        rr = list(csv.reader(ref.open()))
        assert rn[0] == rr[0] and len(rn) == len(rr)
        for i, (a, b) in enumerate(zip(rn[1:], rr[1:])):
            for x, y in zip(a, b):
                assert np.isclose(_cell(x), _cell(y), rtol=RTOL, atol=ATOL), (ref.name, i, x, y)


@pytest.mark.parametrize("name", sorted(RUNS))
def test_golden(name, tmp_path):
    assert cli.run(RUNS[name] + ["--out", str(tmp_path), "--quiet"]) == 0
    refs = sorted((GOLDEN / name).iterdir())
    assert refs
    for ref in refs:
        _compare_file(tmp_path / ref.name, ref)


def test_deterministic_bytes(tmp_path):
    for d in ("a", "b"):
        assert cli.run(["reduced-map", "--out", str(tmp_path / d), "--quiet"]) == 0
    for f in sorted((tmp_path / "a").iterdir()):
        assert f.read_bytes() == (tmp_path / "b" / f.name).read_bytes(), f.name


def test_threads_do_not_change_results(tmp_path):
    assert cli.run(["error-scaling", "--out", str(tmp_path / "1"), "--quiet"]) == 0
    assert cli.run(["error-scaling", "--out", str(tmp_path / "3"), "--threads", "3",
                    "--quiet"]) == 0
    a = json.loads((tmp_path / "1" / "error_scaling.json").read_text())
    b = json.loads((tmp_path / "3" / "error_scaling.json").read_text())
    _close(a, b, "threads")


def test_thread_env_default(monkeypatch):
    monkeypatch.setenv(cli.THREADS_ENV, "4")
    assert cli._threads_default() == 4
    monkeypatch.setenv(cli.THREADS_ENV, "zero")
    assert cli.run(["scattering-table", "--kmin", "1", "--kmax", "2", "--quiet"]) == 2


def test_reduced_map_outputs(tmp_path):
    assert cli.run(["reduced-map", "--out", str(tmp_path), "--quiet"]) == 0
    rep = json.loads((tmp_path / "reduced_map.json").read_text())
    assert rep["checks"]["passed"]
    A, nodes, w = io.read_matrix(tmp_path / "reduced_total.bin")
    B, _, _ = io.read_matrix(tmp_path / "reduced_B_star_G.bin")
    assert A.shape == B.shape == (len(nodes), len(nodes))


@pytest.mark.parametrize("config, fragment", [
    ({"dim": 1, "bogus": 1}, "'bogus' was unexpected"),
    ({"coupling": -1.0}, "coupling"),
    ({"state": {"state": "gauss1d", "width": 0}}, "state/width"),
    ({"observable": {"observable": "gauss_rank1", "wdth": 1}}, "'wdth' was unexpected"),
    ({"lambdas": [0.1, 1.5]}, "lambdas/1"),
    ({"rules": {"k_n": 0}}, "rules/k_n"),
])
def test_malformed_config_exit_2(tmp_path, capsys, config, fragment):
    p = tmp_path / "c.json"
    p.write_text(json.dumps(config))
    assert cli.run(["reduced-map", "--config", str(p), "--out", str(tmp_path)]) == 2
    assert fragment in capsys.readouterr().err


def test_usage_errors(tmp_path, capsys):
    assert cli.run(["no-such-command"]) == 2
    assert cli.run(["scattering-table", "--kmin", "1"]) == 2
    assert cli.run(["error-scaling", "--dim", "3"]) == 2
    assert cli.run(["reduced-map", "--config", str(tmp_path / "missing.json")]) == 2
    (tmp_path / "bad.json").write_text("{not json")
    assert cli.run(["reduced-map", "--config", str(tmp_path / "bad.json")]) == 2


def test_check_failure_exit_1(tmp_path, capsys):
    # under-resolved rules fail the convergence audit and name the unstable quantities
    cfg = {"rules": {"k_n": 2, "pair_n": 2, "heavy_n": 4}, "audit": True}
    p = tmp_path / "c.json"
    p.write_text(json.dumps(cfg))
    assert cli.run(["error-scaling", "--config", str(p), "--out", str(tmp_path), "--quiet"]) == 1
    out = capsys.readouterr().out
    assert "FAIL" in out and "epsilon_norm@0.02" in out


def test_verify_invariants_dim1(tmp_path, capsys):
    assert cli.run(["verify-invariants", "--dim", "1", "--out", str(tmp_path), "--quiet"]) == 0
    rep = json.loads((tmp_path / "invariants_dim1.json").read_text())
    assert rep["passed"] and rep["known_violations"]
    assert cli.run(["verify-invariants", "--dim", "1", "--strict", "--quiet"]) == 1
    assert "scattering inequality item3" in capsys.readouterr().out


def test_verify_invariants_dim2():
    assert cli.run(["verify-invariants", "--dim", "2", "--quiet"]) == 0


def test_inline_state_json(tmp_path):
    code = cli.run(["expansion-build", "--state", '{"state": "gauss_poly1d", "k0": 0.3}',
                    "--out", str(tmp_path), "--quiet"])
    assert code == 0
    assert json.loads((tmp_path / "expansion.json").read_text())["state"]["k0"] == 0.3


def test_schema_is_valid():
    import jsonschema

    jsonschema.Draft202012Validator.check_schema(cli.load_schema())
