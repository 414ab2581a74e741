import numpy as np
import pytest

from pointscatter import checks, expansion
from pointscatter.errors import DivergenceError, UnsupportedError
from pointscatter.observables import gauss_rank1, gauss_rank2, identity, op_norm, realize
from pointscatter.scattering import ScatteringParams
from pointscatter.states import gauss1d, gauss_pair1d


@pytest.fixture(scope="module")
def terms1(state1, rules1):
    return expansion.build_terms(state1, ScatteringParams(1, 1.0, 0.1), rules1)


@pytest.fixture(scope="module")
def terms3(state3, rules3):
    return expansion.build_terms(state3, ScatteringParams(3, 1.0, 0.1), rules3)


def test_structure_dim1(terms1):
    assert all(c.passed for c in checks.term_structure(terms1))


def test_structure_dim3(terms3):
    assert all(c.passed for c in checks.term_structure(terms3))


def test_term_bounds(terms1, terms3):
    for t in (terms1, terms3):
        assert all(c.passed for c in checks.term_bounds(t))


def test_phi_completely_positive(terms1, rules1):
    # φ(G) is a Kraus sum, so G >= 0 gives φ(G) >= 0
    phi = expansion.apply_phi(terms1, gauss_rank2()).sym()
    assert np.linalg.eigvalsh(0.5 * (phi + phi.conj().T)).min() > -1e-12


def test_generators_preserve_hermiticity(terms1):
    G = gauss_rank1(0.3, 1.2)
    for f in (expansion.apply_M1, expansion.apply_M2):
        assert f(terms1, G).hermitian_defect() < 1e-12


def test_dim3_m1_vanishes_on_identity(terms3):
    assert np.linalg.norm(expansion.apply_M1(terms3, identity())) < 1e-13


def test_mixture_terms_are_convex(rules1):
    # the terms are linear in ρ: V₁ of a mixture is the mixture of V₁'s
    p = ScatteringParams(1, 1.0, 0.1)
    mix = gauss_pair1d()
    t = expansion.build_terms(mix, p, rules1)
    from pointscatter.states import DensityState

    parts = [expansion.build_terms(DensityState(1, [1.0], [f]), p, rules1)
             for f in mix.funcs]
    grid = rules1.heavy
    V = sum(b * realize_op(pt.V1, grid) for b, pt in zip(mix.betas, parts))
    assert np.max(np.abs(V - realize_op(t.V1, grid))) < 1e-12


def realize_op(op, grid):
    return op.realize(grid).sym()


def test_divergent_state_rejected(rules1):
    with pytest.raises(DivergenceError):
        expansion.build_terms(gauss1d(0.0), ScatteringParams(1, 1.0, 0.1), rules1)


def test_dim2_rejected(rules1):
    with pytest.raises(UnsupportedError):
        expansion.build_terms(gauss1d(), ScatteringParams(2, 1.0, 0.1), rules1)


def test_dim3_v2_matches_derivative_identity(terms3):
    # for real g, A vanishes and V₂(0) = 8πc∫k⁴ g'g = -16πc∫k³g² (integration by parts)
    t = terms3.kraus
    assert t.a.sup() == 0
    v2_0 = t.V2(0.0)[0]
    k, w = t.k, t.wk
    g = terms3.state.funcs[0].g(k)
    c = 2.0
    assert v2_0 == pytest.approx(-16 * np.pi * c * np.sum(w * k**3 * np.abs(g) ** 2), rel=1e-8)


def test_kraus_vs_direct_dim1(terms1):
    d = op_norm(expansion.kraus_phi_of_I(terms1) - terms1.phi_of_I.realize(terms1.rules.heavy),
                "dense")
    assert d < 1e-10
