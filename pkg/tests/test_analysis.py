import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pointscatter import analysis
from pointscatter.errors import UsageError
from pointscatter.scattering import ScatteringParams

LAMS = [0.02, 0.04, 0.06, 0.08, 0.12]


@given(st.floats(0.5, 5.0), st.floats(1e-3, 1e3))
def test_fit_slope_recovers_power(p, c):
    lam = np.array(LAMS)
    slope, half = analysis.fit_slope(lam, c * lam**p)
    assert slope == pytest.approx(p, abs=1e-9)
    assert half < 1e-6


def test_richardson_second_order():
    h = 2.0 ** -np.arange(4)
    row = analysis.richardson_row(1.0 + 0.3 * h**2)
    assert row["observed_order"] == pytest.approx(2, abs=1e-9)
    assert row["extrapolated"] == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("lams", [[0.1, 0.2, 0.3], [0.1, 0.05, 0.2, 0.4], [0.1, 0.2, 0.3, 0.35],
                                  [0.1, 0.2, 0.4, 1.2]])
def test_scaling_run_rejects_bad_sweeps(state1, obs1, rules1, lams):
    with pytest.raises(UsageError):
        analysis.scaling_run(state1, ScatteringParams(1, 1.0, 0.1), obs1, lams, rules1)


def test_scaling_report(state1, obs1, rules1):
    rep = analysis.scaling_run(state1, ScatteringParams(1, 1.0, 0.02), obs1, LAMS, rules1)
    assert rep.verdict == "PASS"
    assert rep.excluded == []
    assert rep.errors[0] > 10 * rep.noise_floor


def test_noise_floor_excludes_points(state1, obs1, rules1):
    rep = analysis.scaling_run(state1, ScatteringParams(1, 1.0, 0.02), obs1, LAMS, rules1,
                               noise_floor=1e-5)
    assert rep.excluded == [0.02, 0.04, 0.06]
    assert rep.verdict == "INCONCLUSIVE" and rep.warnings


def test_audit_negative_control(state1, obs1):
    # under-resolved rules must be caught by the audit
    sc = analysis.Scenario(state1, ScatteringParams(1, 1.0, 0.1), obs1, [0.04, 0.08],
                           {"k_n": 2, "pair_n": 2, "heavy_n": 4})
    rep = analysis.convergence_audit(sc)
    assert not rep.passed and rep.failures


def test_audit_needs_three_levels(state1, obs1):
    sc = analysis.Scenario(state1, ScatteringParams(1, 1.0, 0.1), obs1, [0.04])
    with pytest.raises(UsageError):
        analysis.convergence_audit(sc, levels=(0, 1))
