"""Error-scaling harness for the third-order remainder

    ε(G, λ) = Tr₂[(I⊗ρ)S*(G⊗I)S] - (G + λM₁(G) + λ²M₂(G)),

its log-log slope fit, and a Richardson-style convergence audit.
"""
import logging
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import stats

from .errors import UsageError
from .observables import op_norm, realize, wn_norm
from .scattering import ScatteringParams
from .states import wtn_norm

log = logging.getLogger(__name__)

SLOPE_WINDOW = (2.7, 3.3)
MAX_RATIO_SPREAD = 3.0


def _norm(M):
    if hasattr(M, "sym"):
        return op_norm(M, "dense")
    return float(np.linalg.norm(np.asarray(M), 2))


def expansion_pieces(state, params, G, rules, terms=None):
    """(exact map total, G, M₁(G), M₂(G)) on a common realization."""
    from . import exactmap, expansion

    if terms is None:
        terms = expansion.build_terms(state, params, rules)
    if params.dim == 3:
        from . import exactmap3

        return exactmap3.expansion_pieces(state, params, G, rules, terms)
    res = exactmap.full_reduced_map(state, params, G, rules)
    Gm = realize(G, rules.heavy)
    return res, Gm, expansion.apply_M1(terms, G), expansion.apply_M2(terms, G)


def epsilon(state, params, G, rules, terms=None, order=2):
    """ε(G, λ) realized; order < 2 subtracts only the first `order+1` expansion terms."""
    if params.lam == 0:
        from . import exactmap  # noqa: F401  (validation only)
    res, Gm, M1, M2 = expansion_pieces(state, params, G, rules, terms)
    lam = params.lam
    e = res.total - Gm
    if order >= 1:
        e = e - M1 * lam
    if order >= 2:
        e = e - M2 * lam**2
    return e


def fit_slope(lambdas, errors, confidence=0.95):
    """Least-squares slope of log(error) against log(λ) with a confidence half-width."""
    x = np.log(np.asarray(lambdas, dtype=float))
    y = np.log(np.asarray(errors, dtype=float))
    if len(x) < 2:
        return float("nan"), float("nan")
    fit = stats.linregress(x, y)
    if len(x) > 2:
        half = float(stats.t.ppf(0.5 + confidence / 2, len(x) - 2) * fit.stderr)
    else:
        half = float("nan")
    return float(fit.slope), half


@dataclass
class ScalingReport:
    lambdas: list
    errors: list
    ratios: list
    slope: float
    slope_halfwidth: float
    bound_ratios: list
    bound_ratio: float
    ratio_spread: float
    anchors: dict
    anchor_errors: dict
    excluded: list
    warnings: list
    verdict: str
    wtn: float
    wn: float
    noise_floor: float

    def as_dict(self):
        return asdict(self)


def noise_floor_estimate(state, params, G, rules, terms=None):
    """Quadrature-noise floor: unitality residual of the exact map and of M₂ at this λ,
    scaled by ‖G‖, plus a linear-algebra floor."""
    from .observables import identity

    I = identity()
    res, Im, _, M2 = expansion_pieces(state, params, I, rules, terms)
    g = _norm(res.total - Im) + params.lam**2 * _norm(M2)
    res_g = expansion_pieces(state, params, G, rules, terms)[1]
    return float(g * _norm(res_g) + 1e-13 * _norm(res_g))


def scaling_run(state, params_base, G, lambdas, rules, noise_floor=None, terms=None,
                mapper=None):
    """Sweep λ, fit the slope of ‖ε‖ and decide PASS / FAIL / INCONCLUSIVE.

    `mapper` (e.g. an executor's map) evaluates the independent λ points."""
    lambdas = [float(x) for x in lambdas]
    if len(lambdas) < 4:
        raise UsageError("a scaling run needs at least 4 lambda values")
    if any(b <= a for a, b in zip(lambdas[:-1], lambdas[1:])):
        raise UsageError("lambda values must be strictly increasing")
    if not all(0 < x < 1 for x in lambdas):
        raise UsageError("lambda values must lie in (0, 1)")
    if lambdas[-1] / lambdas[0] < 4:
        raise UsageError("lambda values must span at least a factor 4")
    from . import expansion

    if terms is None:
        terms = expansion.build_terms(state, params_base, rules)
    wtn = wtn_norm(state)
    wn = wn_norm(G, rules.heavy) if params_base.dim == 1 else _dim3_wn(G, rules)
    if noise_floor is None:
        noise_floor = noise_floor_estimate(state, params_base.with_lambda(lambdas[-1]), G, rules,
                                           terms)
    def one(lam):
        res, Gm, M1, M2 = expansion_pieces(state, params_base.with_lambda(lam), G, rules, terms)
        d0 = res.total - Gm
        d1 = d0 - M1 * lam
        return _norm(d0), _norm(d1), _norm(d1 - M2 * lam**2)

    rows = list((mapper or map)(one, lambdas))
    errs = {order: [r[order] for r in rows] for order in (0, 1, 2)}
    warnings, excluded = [], []
    keep = []
    for lam, e in zip(lambdas, errs[2]):
        if e < 10 * noise_floor:
            msg = f"lambda={lam}: |eps|={e:.3e} below 10x noise floor {noise_floor:.3e}; excluded"
            log.warning(msg)
            warnings.append(msg)
            excluded.append(lam)
        else:
            keep.append(lam)
    idx = [lambdas.index(x) for x in keep]
    lk = [lambdas[i] for i in idx]
    ek = [errs[2][i] for i in idx]
    slope, half = fit_slope(lk, ek)
    anchors = {order: fit_slope(lambdas, errs[order])[0] for order in (0, 1)}
    anchors[2] = slope
    ratios = [e / lam**3 for lam, e in zip(lambdas, errs[2])]
    bounds = [e / (lam**3 * wtn * wn) for lam, e in zip(lambdas, errs[2])]
    bk = [bounds[i] for i in idx]
    spread = float(max(bk) / min(bk)) if bk and min(bk) > 0 else float("inf")
    bound_ratio = float(max(bk)) if bk else float("nan")
    if len(keep) < 3:
        verdict = "INCONCLUSIVE"
    elif (SLOPE_WINDOW[0] <= slope <= SLOPE_WINDOW[1] and np.isfinite(bound_ratio)
          and spread <= MAX_RATIO_SPREAD):
        verdict = "PASS"
    else:
        verdict = "FAIL"
    return ScalingReport(lambdas, errs[2], ratios, slope, half, bounds, bound_ratio, spread,
                         {str(k): v for k, v in anchors.items()},
                         {str(k): v for k, v in errs.items()}, excluded, warnings, verdict,
                         float(wtn), float(wn), float(noise_floor))


def _dim3_wn(G, rules):
    from . import exactmap3

    return exactmap3.weighted_norm(G, rules)


# --------------------------------------------------------------------------
# convergence audit


@dataclass
class Scenario:
    state: object
    params: ScatteringParams
    G: object
    lambdas: list
    rules_kwargs: dict = field(default_factory=dict)


def richardson_row(values):
    """Differences, observed order and extrapolated limit for a refinement sequence."""
    v = np.asarray(values, dtype=float)
    d = np.abs(np.diff(v))
    order = float("nan")
    limit = float(v[-1])
    if len(v) >= 3 and d[-2] > 0 and d[-1] > 0:
        order = float(np.log2(d[-2] / d[-1]))
        if order > 0.5:
            limit = float(v[-1] + (v[-1] - v[-2]) / (2**order - 1))
    return {"values": v.tolist(), "differences": d.tolist(), "observed_order": order,
            "extrapolated": limit}


@dataclass
class AuditReport:
    levels: list
    table: dict
    failures: list
    epsilon_error: float
    min_epsilon: float
    certified: bool
    passed: bool

    def as_dict(self):
        return asdict(self)


def _audit_quantities(sc, rules):
    from . import exactmap, expansion

    terms = expansion.build_terms(sc.state, sc.params, rules)
    q = {}
    if sc.params.dim == 1:
        q["V1_sup"] = expansion.symbol_sup(terms.V1)
        q["phi_of_I_sup"] = expansion.symbol_sup(terms.phi_of_I)
    q["M1_norm"] = _norm(expansion.apply_M1(terms, sc.G))
    q["M2_norm"] = _norm(expansion.apply_M2(terms, sc.G))
    for lam in sc.lambdas:
        p = sc.params.with_lambda(lam)
        res, Gm, M1, M2 = expansion_pieces(sc.state, p, sc.G, rules, terms)
        q[f"Bstar_G_norm@{lam}"] = _norm(res.B_star_G)
        q[f"BB_G_norm@{lam}"] = _norm(res.BB_G)
        q[f"total_norm@{lam}"] = _norm(res.total)
        q[f"epsilon_norm@{lam}"] = _norm(res.total - Gm - M1 * lam - M2 * lam**2)
    return q


def convergence_audit(scenario, levels=(0, 1, 2), rel_tol=1e-6, abs_floor=1e-14,
                      certify_fraction=0.1):
    """Per-quantity refinement table; every quantity must change by at most rel_tol
    (relative, with an absolute floor) between the first two levels, and the
    estimated quadrature error of every ‖ε‖ must stay below certify_fraction
    times the smallest ‖ε‖."""
    from .rules import make_rules

    levels = list(levels)
    if len(levels) < 3:
        raise UsageError("the convergence audit needs at least 3 refinement levels")
    per_level = []
    for lv in levels:
        rules = make_rules(scenario.params.dim, lv, **scenario.rules_kwargs)
        per_level.append(_audit_quantities(scenario, rules))
    table = {}
    failures = []
    for key in per_level[0]:
        row = richardson_row([q[key] for q in per_level])
        v0, v1 = row["values"][0], row["values"][1]
        row["relative_change"] = abs(v1 - v0) / max(abs(v0), abs_floor)
        row["stable"] = bool(row["relative_change"] <= rel_tol)
        table[key] = row
        if not row["stable"]:
            failures.append(key)
    eps_keys = [k for k in table if k.startswith("epsilon_norm@")]
    errs = [max(abs(table[k]["values"][0] - table[k]["extrapolated"]),
                table[k]["differences"][0]) for k in eps_keys]
    mins = [table[k]["extrapolated"] for k in eps_keys]
    eps_err = float(max(errs)) if errs else 0.0
    min_eps = float(min(mins)) if mins else float("nan")
    certified = bool(eps_err < certify_fraction * min_eps) if mins else True
    if not certified:
        failures.append("epsilon_quadrature_error")
    return AuditReport(levels, table, failures, eps_err, min_eps, certified, not failures)
