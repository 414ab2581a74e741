"""Acceptance criteria 1-8 at their stated tolerances and runtime budgets.

Each test prints (and the session summary repeats) one line
`criterion N: PASS|FAIL ...`.
"""
import time

from pointscatter import analysis, checks, exactmap, expansion, oracle
from pointscatter.observables import gauss_rank1, gauss_rank2, gauss_smoother, identity, \
    radial_rank1
from pointscatter.rules import make_rules
from pointscatter.scattering import ScatteringParams
from pointscatter.states import gauss_pair1d, gauss_poly1d, shell3d

LAMS = [0.02, 0.04, 0.06, 0.08, 0.12]


def _finish(record, number, cs, t0, budget, extra=""):
    elapsed = time.perf_counter() - t0
    bad = [c for c in cs if not c.passed]
    ok = not bad and elapsed < budget
    worst = "; ".join(f"{c.name} = {c.value:.3e}" for c in bad[:3])
    detail = f"{len(cs) - len(bad)}/{len(cs)} checks, {elapsed:.1f}s (< {budget}s)"
    if extra:
        detail += f", {extra}"
    if worst:
        detail += f"; failing: {worst}"
    record(number, ok, detail)
    assert not bad, worst
    assert elapsed < budget


def test_criterion_1_unitarity(acceptance_line):
    t0 = time.perf_counter()
    cs = checks.unitarity(n_samples=1000)
    _finish(acceptance_line, 1, cs, t0, 1.0, f"max ||1+S|-1| = {cs[0].value:.1e}")


def test_criterion_2_scattering_inequalities_suite(acceptance_line):
    # all four inequalities; the item-3 bound fails at K = 0 (slack ≈ -λ²α₀²/(2k²))
    t0 = time.perf_counter()
    cs = checks.scattering_inequalities(n_samples=10_000, dims=(1, 3))
    gating = [c for c in cs if "lambda^2 term kept" not in c.name]
    corrected = [c for c in cs if "lambda^2 term kept" in c.name]
    _finish(acceptance_line, 2, gating, t0, 5.0,
            f"corrected item3 min slack {corrected[0].value:.2e}")


def test_criterion_3_unitality(acceptance_line):
    t0 = time.perf_counter()
    st, r1 = gauss_poly1d(), make_rules(1)
    cs = checks.unitality(st, ScatteringParams(1, 1.0, 0.1), r1)
    cs += checks.term_structure(expansion.build_terms(st, ScatteringParams(1, 1.0, 0.1), r1))[:2]
    cs += checks.unitality(shell3d(), ScatteringParams(3, 1.0, 0.1), make_rules(3))
    _finish(acceptance_line, 3, cs, t0, 60.0)


def test_criterion_4_identity(acceptance_line):
    t0 = time.perf_counter()
    st, r1 = gauss_poly1d(), make_rules(1)
    cs = []
    for lam in (0.05, 0.1, 0.2):
        cs += checks.identity_b(st, ScatteringParams(1, 1.0, lam), r1)
    _finish(acceptance_line, 4, cs, t0, 120.0,
            f"max residual {max(c.value for c in cs):.1e}")


def test_criterion_5_oracle(acceptance_line):
    t0 = time.perf_counter()
    st, G, p = gauss_poly1d(), gauss_rank1(), ScatteringParams(1, 1.0, 0.1)
    ref = oracle.brute_force_oracle(st, p, G)
    res = exactmap.full_reduced_map(st, p, G, make_rules(1))
    dist = oracle.relative_distance(oracle.compress(res.total), ref)
    cs = [checks.upper("formula vs oracle relative distance", dist, 1e-6)]
    _finish(acceptance_line, 5, cs, t0, 300.0, f"distance {dist:.2e}")


def test_criterion_6_scaling(acceptance_line):
    t0 = time.perf_counter()
    rep = analysis.scaling_run(gauss_poly1d(), ScatteringParams(1, 1.0, LAMS[0]), gauss_rank1(),
                               LAMS, make_rules(1))
    cs = [checks.lower("slope lower", rep.slope, 2.7), checks.upper("slope upper", rep.slope, 3.3),
          checks.upper("bound-ratio spread", rep.ratio_spread, 3.0),
          checks.upper("first-order anchor |slope-2|", abs(rep.anchors["1"] - 2), 0.3),
          checks.upper("zeroth-order anchor |slope-1|", abs(rep.anchors["0"] - 1), 0.3),
          checks.upper("excluded points", len(rep.excluded), 0)]
    _finish(acceptance_line, 6, cs, t0, 900.0,
            f"slope {rep.slope:.3f}, spread {rep.ratio_spread:.3f}, anchors "
            f"{rep.anchors['1']:.3f}/{rep.anchors['0']:.3f}")


def test_criterion_7_norm_bounds(acceptance_line):
    t0 = time.perf_counter()
    cs = []
    r1, r3 = make_rules(1), make_rules(3)
    for st in (gauss_poly1d(), gauss_pair1d()):
        cs += checks.term_bounds(expansion.build_terms(st, ScatteringParams(1, 1.0, 0.1), r1))
        for G in (identity(), gauss_rank1(), gauss_rank2(), gauss_smoother()):
            for lam in (0.1, 0.5):
                cs += checks.norm_bound_checks(st, ScatteringParams(1, 1.0, lam), G, r1)
    for st in (shell3d(), shell3d(k0=1.5, width=0.7)):
        cs += checks.term_bounds(expansion.build_terms(st, ScatteringParams(3, 1.0, 0.1), r3))
    for G in (identity(), radial_rank1()):
        for lam in (0.1, 0.5):
            cs += checks.norm_bound_checks(shell3d(), ScatteringParams(3, 1.0, lam), G, r3)
    cs += checks.shifted_kernel_bounds(dims=(1, 3))
    _finish(acceptance_line, 7, cs, t0, 300.0,
            f"min slack {min(c.value for c in cs):.2e}")


def test_criterion_8_convergence_audit(acceptance_line):
    t0 = time.perf_counter()
    sc = analysis.Scenario(gauss_poly1d(), ScatteringParams(1, 1.0, LAMS[0]), gauss_rank1(), LAMS)
    rep = analysis.convergence_audit(sc, levels=(0, 1, 2), rel_tol=1e-6)
    cs = [checks.upper(f"relative change {k}", row["relative_change"], 1e-6)
          for k, row in rep.table.items()]
    cs.append(checks.upper("epsilon quadrature error / min epsilon",
                           rep.epsilon_error / rep.min_epsilon, 0.1))
    _finish(acceptance_line, 8, cs, t0, 600.0,
            f"max relative change {max(c.value for c in cs[:-1]):.1e}")
