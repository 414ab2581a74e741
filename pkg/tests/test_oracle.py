import numpy as np
import pytest

from pointscatter import exactmap, oracle
from pointscatter.errors import UnsupportedError
from pointscatter.observables import gauss_rank1, gauss_smoother, identity
from pointscatter.scattering import ScatteringParams


@pytest.mark.parametrize("G", [identity(), gauss_rank1()], ids=lambda g: g.name)
def test_formula_matches_oracle(state1, rules1, G):
    p = ScatteringParams(1, 1.0, 0.1)
    ref = oracle.brute_force_oracle(state1, p, G)
    res = exactmap.full_reduced_map(state1, p, G, rules1)
    assert oracle.relative_distance(oracle.compress(res.total), ref) <= 1e-6


def test_oracle_unitality(state1):
    ref = oracle.brute_force_oracle(state1, ScatteringParams(1, 1.0, 0.3), identity())
    assert np.linalg.norm(ref.matrix - np.eye(ref.basis_size), 2) < 1e-8


def test_oracle_scope(state1):
    with pytest.raises(UnsupportedError):
        oracle.brute_force_oracle(state1, ScatteringParams(1, 1.0, 0.1), gauss_smoother())
