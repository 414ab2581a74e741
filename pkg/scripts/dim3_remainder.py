"""Dim-3 remainder on the s-wave sector: ‖ε‖/λ³ for a radial projector.

    python3 scripts/dim3_remainder.py [--out DIR]

The weighted observable norm is not available in dim 3, so this reports the
raw ratio; a bounded ratio as λ decreases is the third-order signature.
"""
import argparse
from dataclasses import dataclass, field

import numpy as np

from pointscatter import analysis, io
from pointscatter.observables import radial_rank1
from pointscatter.rules import make_rules
from pointscatter.scattering import ScatteringParams
from pointscatter.states import shell3d


@dataclass
class Dim3Config:
    k0: float = 1.0
    width: float = 1.0
    observable_width: float = 1.0
    lambdas: list = field(default_factory=lambda: [0.02, 0.04, 0.08, 0.16])
    coupling: float = 1.0
    basis_size: int = 10


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="results")
    args = ap.parse_args()
    cfg = Dim3Config()
    state, G = shell3d(cfg.k0, cfg.width), radial_rank1(cfg.observable_width)
    rules = make_rules(3, basis_size=cfg.basis_size)
    rows = []
    for lam in cfg.lambdas:
        e = analysis.epsilon(state, ScatteringParams(3, cfg.coupling, lam), G, rules)
        err = float(np.linalg.norm(e, 2))
        rows.append([lam, err, err / lam**3])
        print(f"lambda={lam}: |eps|={err:.4e}  |eps|/lambda^3={err / lam**3:.4f}")
    slope, half = analysis.fit_slope(cfg.lambdas, [r[1] for r in rows])
    print(f"slope {slope:.3f} ± {half:.3f}")
    io.write_csv(f"{args.out}/dim3_remainder.csv", ["lambda", "err", "err/lambda^3"], rows)


if __name__ == "__main__":
    main()
