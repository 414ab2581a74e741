"""Regenerate the golden reference outputs under tests/golden/.

    python3 scripts/make_golden.py [NAME ...]

Binary matrix files are not kept; the JSON reports carry their norms.
"""
import json
import pathlib
import shutil
import sys

from pointscatter.cli import run

GOLDEN = pathlib.Path(__file__).resolve().parents[1] / "tests" / "golden"


def main(names):
    runs = json.loads((GOLDEN / "runs.json").read_text())
    for name in names or sorted(runs):
        out = GOLDEN / name
        if out.exists():
            shutil.rmtree(out)
        code = run(runs[name] + ["--out", str(out), "--quiet"])
        for f in out.glob("*.bin"):
            f.unlink()
        print(f"{name}: exit {code}")
        if code != 0:
            sys.exit(code)


if __name__ == "__main__":
    main(sys.argv[1:])
