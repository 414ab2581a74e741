"""Invariant suites shared by the `verify-invariants` subcommand and the tests.

Every suite returns a list of Check records; a check passes when its value
lies within tolerance of the stated relation.
"""
from dataclasses import asdict, dataclass

import numpy as np

from . import exactmap, expansion
from .observables import identity, op_norm, realize
from .quadrature import check_shifted_kernel_bound, composite_nodes, make_rotations
from .scattering import (ScatteringParams, check_E_bounds, check_use_inequalities, s_coeff_raw)


@dataclass
class Check:
    name: str
    value: float
    tol: float
    passed: bool
    relation: str = "<="

    def as_dict(self):
        return asdict(self)


def upper(name, value, tol):
    """Passes when value <= tol."""
    value = float(value)
    return Check(name, value, tol, bool(value <= tol), "<=")


def lower(name, value, tol):
    """Passes when value >= tol (slacks)."""
    value = float(value)
    return Check(name, value, tol, bool(value >= tol), ">=")


# --------------------------------------------------------------------------
# scattering


def unitarity(n_samples=1000, seed=0):
    rng = np.random.default_rng(seed)
    dims = rng.integers(1, 4, n_samples)
    lams = rng.uniform(0.0, 1.0, n_samples)
    ks = 10.0 ** rng.uniform(-3, 3, n_samples)
    cs = 10.0 ** rng.uniform(-1, 1, n_samples)
    worst = 0.0
    for d in (1, 2, 3):
        sel = dims == d
        for lam, k, c in zip(lams[sel], ks[sel], cs[sel]):
            S = s_coeff_raw(ScatteringParams(int(d), float(c), float(lam)), k)
            worst = max(worst, abs(abs(1 + S) - 1))
    return [upper("unitarity |1+S|-1", worst, 1e-12)]


def inequality_samples(n_samples, dim, seed=0):
    rng = np.random.default_rng(seed + dim)
    lams = rng.uniform(0.0, 1.0, n_samples)
    cs = rng.uniform(0.5, 2.0, n_samples)
    if dim == 1:
        k = rng.uniform(-10, 10, n_samples)
        k = np.where(k == 0, 1.0, k)
        K = rng.uniform(-10, 10, n_samples)
    else:
        k = rng.normal(size=(n_samples, 3)) * 3
        K = rng.normal(size=(n_samples, 3)) * 3
    return lams, cs, k, K


def scattering_inequalities(n_samples=10_000, dims=(1, 3), seed=0, tol=-1e-12):
    """Minimum slack of each elementary inequality over random samples."""
    out = []
    for dim in dims:
        lams, cs, ks, Ks = inequality_samples(n_samples, dim, seed)
        mins = {}
        for lam, c, k, K in zip(lams, cs, ks, Ks):
            rep = check_use_inequalities(ScatteringParams(dim, float(c), float(lam)), k, K)
            for key, v in rep.items():
                if v is not None:
                    mins[key] = min(mins.get(key, np.inf), v)
        for key in sorted(mins):
            if key == "item3_corrected":
                out.append(lower(f"dim{dim} scattering inequality item3 with the lambda^2 term kept", mins[key],
                                 tol))
            else:
                out.append(lower(f"dim{dim} scattering inequality {key}", mins[key], tol))
    return out


def e_bounds(dim=1, n_samples=400, seed=0):
    rng = np.random.default_rng(seed)
    out = []
    for lam in (0.01, 0.05, 0.1, 0.3, 0.5):
        samples = []
        for _ in range(n_samples):
            if dim == 1:
                samples.append((rng.uniform(-10, 10), rng.uniform(-10, 10),
                                rng.choice([1.0, -1.0]), rng.uniform(0, 1)))
            else:
                R = make_rotations(3, 3).rotations[rng.integers(27)]
                samples.append((rng.normal(size=3) * 3, rng.normal(size=3) * 3, R,
                                rng.uniform(0, 1)))
        sup = check_E_bounds(ScatteringParams(dim, 1.0, lam), samples)
        out.append(upper(f"dim{dim} E bounds finite at lambda={lam}", max(sup.values()), 1e12))
    return out


# --------------------------------------------------------------------------
# expansion terms


def term_structure(terms):
    out = []
    I = identity()
    out.append(upper("|M1(I)|", _norm(expansion.apply_M1(terms, I)), 1e-10))
    out.append(upper("|M2(I)|", _norm(expansion.apply_M2(terms, I)), 1e-8))
    if terms.dim == 1:
        mats = expansion.realize_terms(terms)
        for name in ("V1", "V2", "phi_of_I"):
            out.append(upper(f"{name} Hermitian defect", mats[name].hermitian_defect(), 1e-10))
        phi = mats["phi_of_I"].sym()
        ev = np.linalg.eigvalsh(0.5 * (phi + phi.conj().T))
        out.append(lower("phi(I) smallest eigenvalue", ev.min(), -1e-10))
        kr = expansion.kraus_phi_of_I(terms)
        out.append(upper("Kraus vs direct phi(I)", op_norm(kr - mats["phi_of_I"], "dense"), 1e-8))
    else:
        from .radial import radial_space

        space = radial_space(terms.rules, I)
        phi = space.mult_matrix(terms.kraus.phi(space.r))[:space.M, :space.M]
        kr = expansion.kraus_phi_of_I(terms)
        out.append(upper("phi(I) Hermitian defect", np.linalg.norm(phi - phi.conj().T, 2), 1e-10))
        out.append(lower("phi(I) smallest eigenvalue",
                         np.linalg.eigvalsh(0.5 * (phi + phi.conj().T)).min(), -1e-10))
        out.append(upper("Kraus vs direct phi(I)", np.linalg.norm(kr - phi, 2), 1e-8))
    return out


def term_bounds(terms, tol=-1e-8):
    rep = expansion.check_term_bounds(terms)
    return [lower(f"dim{terms.dim} term bound {k}", v.slack, tol) for k, v in rep.items()]


# --------------------------------------------------------------------------
# exact map


def _norm(M):
    if hasattr(M, "sym"):
        return op_norm(M, "dense")
    return float(np.linalg.norm(np.asarray(M), 2))


def _power_norm(M):
    """Matrix-free norm (power iteration on the adjoint product)."""
    from .observables import power_norm

    A = M.sym() if hasattr(M, "sym") else np.asarray(M)
    AH = A.conj().T
    return power_norm(lambda v: A @ v, lambda v: AH @ v, A.shape[1], tol=1e-12)


def unitality(state, params, rules, terms=None):
    I = identity()
    res = exactmap.full_reduced_map(state, params, I, rules)
    if params.dim == 1:
        dev = _norm(res.total - realize(I, rules.heavy))
        tol = 1e-8
    else:
        dev = _power_norm(res.total - np.eye(res.total.shape[0]))
        tol = 1e-6
    return [upper(f"dim{params.dim} |Phi(I) - I| at lambda={params.lam}", dev, tol)]


def identity_b(state, params, rules, tol=1e-7):
    res = exactmap.full_reduced_map(state, params, identity(), rules)
    r = res.B_star_G + res.G_B + res.BB_G
    return [upper(f"dim{params.dim} |B* + B + B(I)| at lambda={params.lam}", _norm(r), tol)]


def norm_bound_checks(state, params, G, rules, tol=-1e-8):
    rep = exactmap.norm_bounds(state, params, G, rules)
    name = {"B_tilde": "first-order bound |B|", "BB_G": "second-order bound |B(G)|"}
    return [lower(f"dim{params.dim} {name[k]} G={G.name} lambda={params.lam}", v.slack, tol)
            for k, v in rep.items()]


# --------------------------------------------------------------------------
# shifted-kernel trace-norm bound


def _gauss_nd(center, width):
    center = np.asarray(center, dtype=float)
    n = len(center)
    norm = (np.pi * width**2) ** (-n / 4)

    def f(x):
        return norm * np.exp(-0.5 * np.sum((x - center) ** 2, axis=-1) / width**2) + 0j
    return f


def _hermite1_nd(center, width, axis=0):
    g = _gauss_nd(center, width)

    def f(x):
        return np.sqrt(2.0) * (x[..., axis] - center[axis]) / width * g(x)
    return f


def _box_grid(dim, L=9.0, panels=18, n=8):
    x, w = composite_nodes(np.linspace(-L, L, panels + 1), n)
    if dim == 1:
        return x[:, None], w
    X = np.stack(np.meshgrid(x, x, x, indexing="ij"), -1).reshape(-1, 3)
    W = np.einsum("i,j,k->ijk", w, w, w).ravel()
    return X, W


def shifted_kernel_bounds(dims=(1, 3), tol=-1e-8):
    out = []
    for dim in dims:
        grid = _box_grid(dim) if dim == 1 else _box_grid(3, L=8.0, panels=8, n=8)
        z = np.zeros(dim)
        e = np.eye(dim)
        c1 = np.full(dim, 0.3)
        etas = {
            "rank1 f=g": [(1.0, _gauss_nd(z, 1.0), _gauss_nd(z, 1.0))],
            "rank1 f!=g": [(1.0, _gauss_nd(z, 1.0), _gauss_nd(c1, 1.3))],
            "rank2": [(0.7, _gauss_nd(z, 1.0), _gauss_nd(z, 1.0)),
                      (-0.3, _hermite1_nd(z, 1.0), _hermite1_nd(z, 1.0))],
        }
        maps = {
            "A=A'=I": (e, e, z, z),
            "A=2I": (2 * e, e, z, z),
            "skew": (e + 0.3 * np.roll(e, 1, axis=1), 0.8 * e, c1, -c1),
        }
        for en, eta in etas.items():
            for mn, (A, Ap, a, ap) in maps.items():
                s = check_shifted_kernel_bound(eta, A, Ap, a, ap, grid)
                out.append(lower(f"dim{dim} shifted-kernel bound {en} {mn}", s, tol))
    return out


def summarize(checks):
    return {"passed": all(c.passed for c in checks), "checks": [c.as_dict() for c in checks],
            "failed": [c.name for c in checks if not c.passed]}
