import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pointscatter import checks
from pointscatter.errors import UsageError
from pointscatter.linalg import cross_singular_values, psd_sqrt, trace_norm_factored
from pointscatter.quadrature import (check_shifted_kernel_bound, composite_nodes, graded_edges,
                                     make_line, make_radial, make_rotations, make_sphere)
from pointscatter.rules import make_rules, radial_rule


@given(st.integers(2, 20), st.integers(0, 39))
def test_gauss_legendre_exactness(n, p):
    g = make_radial(0.5, 2.0, n)
    exact = (2.0 ** (p + 1) - 0.5 ** (p + 1)) / (p + 1)
    val = np.sum(g.weights * g.nodes**p)
    if p <= 2 * n - 1:
        assert val == pytest.approx(exact, rel=1e-12)


def test_bad_intervals():
    with pytest.raises(UsageError):
        make_radial(0.0, 1.0, 5)
    with pytest.raises(UsageError):
        make_radial(1.0, 2.0, 1)
    with pytest.raises(UsageError):
        composite_nodes([0.0, 1.0, 0.5], 4)
    with pytest.raises(UsageError):
        make_line(1.0, 1.0, 4)


def test_graded_edges_monotone():
    e = graded_edges(11.0, 0.5, 1e-5)
    assert e[0] == 0 and np.all(np.diff(e) > 0) and e[-1] >= 11.0 - 1e-12


def test_sphere_area_and_moments():
    s = make_sphere(3, 8)
    assert np.sum(s.weights) == pytest.approx(4 * np.pi, rel=1e-14)
    z2 = np.sum(s.weights * s.points[:, 2] ** 2)
    assert z2 == pytest.approx(4 * np.pi / 3, rel=1e-13)
    xy = np.sum(s.weights * s.points[:, 0] ** 2 * s.points[:, 1] ** 2)
    assert xy == pytest.approx(4 * np.pi / 15, rel=1e-12)
    s1 = make_sphere(1)
    assert np.sum(s1.weights) == 2


def test_rotation_rule_haar():
    R = make_rotations(3, 6)
    assert np.sum(R.weights) == pytest.approx(1.0, rel=1e-14)
    ortho = np.einsum("rij,rkj->rik", R.rotations, R.rotations) - np.eye(3)
    assert np.max(np.abs(ortho)) < 1e-13
    # the Haar average of R is zero and the average of R_ij R_kl is δ_ik δ_jl / 3
    assert np.max(np.abs(np.einsum("r,rij->ij", R.weights, R.rotations))) < 1e-13
    m = np.einsum("r,rij,rkl->ijkl", R.weights, R.rotations, R.rotations)
    expected = np.einsum("ik,jl->ijkl", np.eye(3), np.eye(3)) / 3
    assert np.max(np.abs(m - expected)) < 1e-13


def test_radial_rule_integrates_polynomials():
    x, w = radial_rule(3.0, 0.5, 6)
    assert np.sum(w * x**5) == pytest.approx(3.0**6 / 6, rel=1e-13)


def test_rules_refinement():
    r = make_rules(1)
    r2 = r.refined()
    assert r2.level == 1 and len(r2.heavy.nodes) == 2 * len(r.heavy.nodes)
    r3 = make_rules(3)
    assert len(r3.refined().cos_rule[0]) == 2 * len(r3.cos_rule[0])


def test_linalg_helpers():
    rng = np.random.default_rng(0)
    A = rng.normal(size=(5, 5))
    G = A @ A.T
    S = psd_sqrt(G)
    assert np.allclose(S @ S, G, atol=1e-10)
    # trace norm of |u><v| is |u||v|
    x, w = make_radial(0.1, 3.0, 30).nodes, make_radial(0.1, 3.0, 30).weights
    u, v = np.exp(-x), x * np.exp(-x**2)
    tn = trace_norm_factored(u[None], v[None], w)
    assert tn == pytest.approx(np.sqrt(np.sum(w * u**2) * np.sum(w * v**2)), rel=1e-12)
    sv = cross_singular_values(u[None], v[None], w)
    assert np.max(sv) == pytest.approx(tn, rel=1e-12)


def _gauss(center, width=1.0):
    c = np.atleast_1d(center)

    def f(x):
        return np.exp(-0.5 * np.sum((x - c) ** 2, axis=-1) / width**2) / (np.pi * width**2) ** (
            len(c) / 4) + 0j
    return f


LINE = composite_nodes(np.linspace(-10, 10, 21), 8)
GRID1 = (LINE[0][:, None], LINE[1])


@given(st.floats(0.3, 3.0), st.floats(0.3, 3.0), st.floats(-1, 1), st.floats(-1, 1),
       st.floats(-1, 1), st.floats(0.6, 1.6))
def test_shifted_kernel_bound_dim1(A, Ap, a, ap, c, width):
    eta = [(1.0, _gauss(0.0), _gauss(c, width)), (-0.4, _gauss(0.5), _gauss(0.5))]
    assert check_shifted_kernel_bound(eta, [[A]], [[Ap]], [a], [ap], GRID1) >= -1e-8


def test_shifted_kernel_bound_equality_case():
    eta = [(1.0, _gauss(0.0), _gauss(0.0))]
    s = check_shifted_kernel_bound(eta, [[1.0]], [[1.0]], [0.0], [0.0], GRID1)
    assert abs(s) < 1e-12
    with pytest.raises(UsageError):
        check_shifted_kernel_bound(eta, [[0.0]], [[1.0]], [0.0], [0.0], GRID1)


def test_shifted_kernel_bound_suite():
    assert all(c.passed for c in checks.shifted_kernel_bounds(dims=(1, 3)))
