import numpy as np
import pytest

from pointscatter import checks, exactmap
from pointscatter.errors import DomainError, UsageError
from pointscatter.observables import (gauss_rank1, gauss_rank2, gauss_smoother, identity, op_norm,
                                      realize)
from pointscatter.scattering import ScatteringParams
from pointscatter.states import gauss_pair1d


@pytest.mark.parametrize("lam", [0.05, 0.2, 0.5])
def test_unitality_dim1(state1, rules1, lam):
    assert all(c.passed for c in checks.unitality(state1, ScatteringParams(1, 1.0, lam), rules1))


@pytest.mark.parametrize("G", [gauss_rank1(), gauss_rank2(), gauss_smoother()],
                         ids=lambda g: g.name)
def test_norm_bounds_dim1(state1, rules1, G):
    for lam in (0.1, 0.5):
        assert all(c.passed for c in checks.norm_bound_checks(state1, ScatteringParams(1, 1.0, lam), G,
                                                        rules1))


def test_map_positive_on_projector(state1, rules1):
    # the reduced map is completely positive: Φ(|u><u|) >= 0
    res = exactmap.full_reduced_map(state1, ScatteringParams(1, 1.0, 0.3), gauss_rank1(), rules1)
    M = res.total.sym()
    assert np.linalg.eigvalsh(0.5 * (M + M.conj().T)).min() > -1e-10


def test_map_is_contraction(state1, rules1):
    # a unital CP map has norm 1 and maps 0 <= G <= I into 0 <= Φ(G) <= I
    res = exactmap.full_reduced_map(state1, ScatteringParams(1, 1.0, 0.3), gauss_rank2(), rules1)
    assert op_norm(res.total, "dense") <= 1 + 1e-10


def test_zero_coupling_limit(state1, rules1):
    G = gauss_rank1()
    res = exactmap.full_reduced_map(state1, ScatteringParams(1, 1.0, 0.0), G, rules1)
    assert op_norm(res.total - realize(G, rules1.heavy), "dense") < 1e-14


def test_mixture_linearity(rules1):
    p = ScatteringParams(1, 1.0, 0.2)
    mix = gauss_pair1d()
    from pointscatter.states import DensityState

    G = gauss_rank1(0.5)
    whole = exactmap.full_reduced_map(mix, p, G, rules1).total
    parts = [exactmap.full_reduced_map(DensityState(1, [1.0], [f]), p, G, rules1).total
             for f in mix.funcs]
    combo = parts[0].scale(mix.betas[0]) + parts[1].scale(mix.betas[1])
    assert op_norm(whole - combo, "dense") < 1e-12


def test_input_validation(state1, state3, rules1):
    with pytest.raises(DomainError):
        exactmap.full_reduced_map(state1, ScatteringParams(1, 1.0, 1.0), identity(), rules1)
    with pytest.raises(UsageError):
        exactmap.full_reduced_map(state3, ScatteringParams(1, 1.0, 0.1), identity(), rules1)
