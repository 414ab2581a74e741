import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pointscatter.errors import DomainError, UsageError
from pointscatter.quadrature import make_rotations
from pointscatter.scattering import (ScatteringParams, check_relations, check_use_inequalities,
                                     s_coeff, s_coeff_taylor, scattering_table)

EULER_GAMMA = 0.5772156649015329

lams = st.floats(min_value=0.0, max_value=1.0)
ks = st.floats(min_value=1e-4, max_value=1e4)
couplings = st.floats(min_value=1e-2, max_value=1e2)


# frozen hand-computed values
def test_dim1_frozen_value():
    # α = λα₀/(1+λ) = 1/4 at λ = 1/3, and k = α/2 gives S = -2i/(1+i) = -1 - i
    S = s_coeff(ScatteringParams(1, 1.0, 1 / 3), 0.125)
    assert S == pytest.approx(-1 - 1j, abs=1e-15)


def test_dim3_frozen_value():
    # l = 1/2 at λ = 1, k = 1/l gives S = -4i/(2+2i) = -1 - i
    S = s_coeff(ScatteringParams(3, 1.0, 1.0), 2.0)
    assert S == pytest.approx(-1 - 1j, abs=1e-15)


def test_dim2_frozen_value():
    # the real part of the denominator vanishes at k = 2 exp(-γ - 1/l): S = -2
    k = 2 * np.exp(-EULER_GAMMA - 2.0)
    S = s_coeff(ScatteringParams(2, 1.0, 1.0), k)
    assert S == pytest.approx(-2.0, abs=1e-13)


def test_lambda_zero_is_free():
    for d in (1, 2, 3):
        assert s_coeff(ScatteringParams(d, 1.0, 0.0), 1.5) == 0


@given(st.sampled_from([1, 2, 3]), lams, ks, couplings)
def test_unitarity(dim, lam, k, c):
    S = s_coeff(ScatteringParams(dim, c, lam), k)
    assert abs(abs(1 + S) - 1) <= 1e-12


@given(st.sampled_from([1, 3]), st.floats(min_value=0.1, max_value=5.0),
       st.floats(min_value=0.1, max_value=2.0))
def test_taylor_orders(dim, k, c):
    p = ScatteringParams(dim, c, 0.0)
    errs = []
    for lam in (1e-3, 2e-3):
        q = p.with_lambda(lam)
        S = s_coeff(q, k)
        errs.append((abs(S - s_coeff_taylor(q, k, 1)), abs(S - s_coeff_taylor(q, k, 2))))
    # order-1 remainder is O(λ²), order-2 remainder is O(λ³)
    assert errs[1][0] / errs[0][0] == pytest.approx(4, rel=0.05)
    assert errs[1][1] / errs[0][1] == pytest.approx(8, rel=0.05)


def test_taylor_dim2_order2():
    p = ScatteringParams(2, 0.7, 0.0)
    k = 1.3
    e = [abs(s_coeff(p.with_lambda(l), k) - s_coeff_taylor(p.with_lambda(l), k, 2))
         for l in (1e-3, 2e-3)]
    assert e[1] / e[0] == pytest.approx(8, rel=0.05)


def test_domain_errors():
    p = ScatteringParams(1, 1.0, 0.1)
    with pytest.raises(DomainError):
        s_coeff(p, 0.0)
    with pytest.raises(DomainError):
        s_coeff(p, np.array([1.0, -1.0]))
    with pytest.raises(UsageError):
        ScatteringParams(4, 1.0, 0.1)
    with pytest.raises(UsageError):
        ScatteringParams(1, -1.0, 0.1)
    with pytest.raises(UsageError):
        ScatteringParams(1, 1.0, 1.5)
    with pytest.raises(UsageError):
        s_coeff_taylor(p, 1.0, 3)


@settings(max_examples=200)
@given(st.floats(-10, 10).filter(lambda x: abs(x) > 1e-3), st.floats(-10, 10),
       st.floats(0.0, 1.0), st.floats(0.5, 2.0))
def test_scattering_inequalities_dim1_items_1_2(k, K, lam, c):
    rep = check_use_inequalities(ScatteringParams(1, c, lam), k, K)
    assert rep["item1"] >= -1e-12
    assert rep["item2"] >= -1e-12
    assert rep["item3_corrected"] >= -1e-12


def test_scattering_inequalities_item3_counterexample():
    # at K = 0 the item-3 right side vanishes while the remainder is O(λ²)
    rep = check_use_inequalities(ScatteringParams(1, 1.0, 0.2), 1.0, 0.0)
    assert rep["item3"] == pytest.approx(-0.0199, abs=1e-3)
    assert rep["item3_corrected"] > 0


@settings(max_examples=200)
@given(st.lists(st.floats(-5, 5), min_size=6, max_size=6), st.floats(0.0, 1.0),
       st.floats(0.5, 2.0))
def test_scattering_inequalities_dim3_item4(v, lam, c):
    k, K = np.array(v[:3]), np.array(v[3:])
    if np.linalg.norm(k) < 1e-3:
        return
    rep = check_use_inequalities(ScatteringParams(3, c, lam), k, K)
    assert rep["item4"] >= -1e-12


@given(st.floats(-5, 5), st.floats(-5, 5), st.sampled_from([1.0, -1.0]), st.floats(0, 1),
       st.floats(0, 0.9))
def test_relations_dim1(k, P, sigma, r, lam):
    check_relations(k, P, sigma, r, lam)


def test_relations_dim3():
    rng = np.random.default_rng(1)
    R = make_rotations(3, 3).rotations
    for i in range(50):
        check_relations(rng.normal(size=3), rng.normal(size=3), R[i % len(R)],
                        rng.uniform(), rng.uniform(0, 0.9))


def test_scattering_table_columns():
    ks, S, u, t1, t2 = scattering_table(ScatteringParams(1, 1.0, 0.1), np.linspace(0.5, 2, 4))
    assert len(ks) == len(S) == len(u) == len(t1) == len(t2) == 4
    assert np.max(np.abs(u)) <= 1e-12
