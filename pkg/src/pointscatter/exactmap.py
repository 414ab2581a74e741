"""The exact reduced map G ↦ Tr₂[(I⊗ρ) S*(G⊗I) S] at finite λ.

Formula path (dim 1):

    Tr₂[...] = G + B̃*G + GB̃ + B̃(G)

B̃* is a shift-integral operator (see `operators.ShiftOp`):

    B̃* = (1+λ) ∫dk ½Σ_σ S̄(|k|) τ_{(1-σ)k} ρ((1+λ)k + λP, (σ+λ)k + λP).

B̃(G) is assembled from its light-momentum integral.  Writing k' for the
outgoing light momentum, the kernel is

    B̃(G)(K₁,K₂) = Σ_j β_j ∫dk' Σ_{s₁,s₂} conj c_{s₁}(K₁,k') c_{s₂}(K₂,k') G(K'_{s₁}, K'_{s₂})

with the forward branch c₊ = ½S(|k'-λK|/(1+λ)) f(k'), K'₊ = K, and the
reflected branch c₋ = ½S(|k'-λK|/(1-λ)) (1+λ)/(1-λ) f((2λK - (1+λ)k')/(1-λ)),
K'₋ = ((1+λ)K - 2k')/(1-λ).  The integrand has a kink and a Lorentzian peak
of width ~ λα₀ at k' = λK₁ and at k' = λK₂, so each (K₁, K₂) pair gets its own
rule split and graded at both points.  For G = g(P) the δ-function is resolved
analytically into a diagonal part plus a smooth kernel.

The independent oracle (`brute_force_oracle`) works in joint light/heavy
momentum space instead and shares none of this code.
"""
from dataclasses import dataclass, field

import numpy as np

from .errors import UnsupportedError, UsageError
from .observables import OperatorMatrix, realize
from .operators import ShiftOp, left_product, right_product
from .quadrature import composite_nodes
from .scattering import require_map_lambda, s_coeff_raw
from .states import kernel as rho_kernel


@dataclass(frozen=True, eq=False)
class ReducedMapResult:
    B_star_G: OperatorMatrix
    G_B: OperatorMatrix
    BB_G: OperatorMatrix
    total: OperatorMatrix
    lam: float
    meta: dict = field(default_factory=dict)


def _check(state, params):
    if state.dim != params.dim:
        raise UsageError(f"state is {state.dim}-dimensional, parameters are {params.dim}-dimensional")
    if params.dim not in (1, 3):
        raise UnsupportedError("the reduced map is implemented in dims 1 and 3")
    require_map_lambda(params)


# --------------------------------------------------------------------------
# first order


def b_star_op(state, params, krule):
    """B̃* as a ShiftOp (dim 1)."""
    lam = params.lam
    nodes, wts = krule.nodes, krule.weights
    sbar = np.conj(s_coeff_raw(params, np.abs(nodes)))

    def m(P):
        P = np.asarray(P, dtype=float)
        flat = P.reshape(-1)
        out = np.zeros(flat.shape, dtype=complex)
        for k, w, sb in zip(nodes, wts, sbar):
            a = (1 + lam) * k + lam * flat
            out += w * sb * rho_kernel(state, a, a)
        return (0.5 * (1 + lam) * out).reshape(P.shape)

    def q(k, P):
        sb = np.conj(s_coeff_raw(params, np.abs(k)))
        return 0.5 * (1 + lam) * sb * rho_kernel(state, (1 + lam) * k + lam * P,
                                                 (lam - 1) * k + lam * P)

    return ShiftOp(m, q, krule, "Bstar")


def reduced_first_order(state, params, G, rules):
    """B̃* G realized on the heavy grid."""
    _check(state, params)
    if params.dim == 3:
        from . import exactmap3

        return exactmap3.reduced_first_order(state, params, G, rules)
    if params.lam == 0:
        return OperatorMatrix.zeros(rules.heavy)
    return left_product(b_star_op(state, params, rules.krule), G, rules.heavy)


def _g_b(state, params, G, rules):
    """G B̃ = (B̃* G*)*."""
    if params.lam == 0:
        return OperatorMatrix.zeros(rules.heavy)
    return right_product(G, b_star_op(state, params, rules.krule).adjoint(), rules.heavy)


# --------------------------------------------------------------------------
# second order


def _c_plus(params, f, K, kp):
    lam = params.lam
    return 0.5 * s_coeff_raw(params, np.abs(kp - lam * K) / (1 + lam)) * f(kp)


def _c_minus(params, f, K, kp):
    lam = params.lam
    c = 0.5 * (1 + lam) / (1 - lam) * s_coeff_raw(params, np.abs(kp - lam * K) / (1 - lam))
    return c * f((2 * lam * K - (1 + lam) * kp) / (1 - lam))


def _k_minus(params, K, kp):
    lam = params.lam
    return ((1 + lam) * K - 2 * kp) / (1 - lam)


def _pair_rule(b1, b2, A, B, rules):
    """Per-pair nodes/weights, shape (len(b2), M); b1 scalar, b2 array."""
    lo = np.minimum(b1, b2)[:, None]
    hi = np.maximum(b1, b2)[:, None]
    to, wo = rules.pair_outer.t[None, :], rules.pair_outer.w[None, :]
    ti, wi = rules.pair_inner.t[None, :], rules.pair_inner.w[None, :]
    nodes = np.concatenate([A + (lo - A) * to, lo + (hi - lo) * ti, B - (B - hi) * to], axis=1)
    weights = np.concatenate([(lo - A) * wo, (hi - lo) * wi, (B - hi) * wo], axis=1)
    return nodes, weights


def _window(state, params, grid):
    lam = params.lam
    F = state.extent()
    L = max(abs(grid.lo), abs(grid.hi))
    return -(F + 2 * lam * L), F + 2 * lam * L


def _bb_smooth(state, params, G, rules):
    """B̃(G) for a smooth-kernel G (or finite-rank, as a cross-check) on per-pair rules."""
    grid = rules.heavy
    p = grid.nodes
    lam = params.lam
    A, B = _window(state, params, grid)
    n = len(p)
    out = np.zeros((n, n), dtype=complex)
    finite = G.kind == "finite_rank"
    # B̃(G) is Hermitian with G: only the upper triangle is integrated then.
    herm = G.hermitian
    for i, K1 in enumerate(p):
        cols = p[i:] if herm else p
        kp, w = _pair_rule(lam * K1, lam * cols, A, B, rules)
        K2 = cols[:, None]
        km1 = _k_minus(params, K1, kp)
        km2 = _k_minus(params, K2, kp)
        row = 0
        for b, f in zip(state.betas, state.funcs):
            cp1, cm1 = _c_plus(params, f, K1, kp), _c_minus(params, f, K1, kp)
            cp2, cm2 = _c_plus(params, f, K2, kp), _c_minus(params, f, K2, kp)
            if finite:
                acc = 0
                for mu, u, v in G.terms:
                    z1 = np.conj(cp1) * u(K1) + np.conj(cm1) * u(km1)
                    z2 = np.conj(cp2) * v(K2) + np.conj(cm2) * v(km2)
                    acc = acc + mu * z1 * np.conj(z2)
            else:
                g = G.kernel
                acc = (np.conj(cp1) * cp2 * g(K1, K2) + np.conj(cp1) * cm2 * g(K1, km2)
                       + np.conj(cm1) * cp2 * g(km1, K2) + np.conj(cm1) * cm2 * g(km1, km2))
            row = row + b * np.sum(w * acc, axis=1)
        if herm:
            out[i, i:] = row
            out[i + 1:, i] = np.conj(row[1:])
        else:
            out[i] = row
    return OperatorMatrix(grid, np.zeros(n, dtype=complex), out)


def merged_rule(state, params, grid, rules):
    """One light-momentum rule whose panel edges include every breakpoint λK_i.

    Between consecutive breakpoints each row's integrand is smooth (the
    Lorentzian peaks sit at panel ends), so one shared rule serves every
    (K₁, K₂) pair of heavy grid nodes.  Panels are subdivided to width at
    most `merge_h` times the peak width λα₀, and the outer intervals are
    graded geometrically away from the extreme breakpoints.
    """
    lam = params.lam
    a0 = params.coupling
    A, B = _window(state, params, grid)
    bp = np.unique(lam * grid.nodes)
    h_max = rules.merge_h * lam * a0
    edges = [bp[:1]]
    for a, b in zip(bp[:-1], bp[1:]):
        m = max(1, int(np.ceil((b - a) / h_max)))
        edges.append(np.linspace(a, b, m + 1)[1:])
    inner = np.concatenate(edges)

    def outward(x0, length):
        out = [0.0]
        h = min(h_max, length)
        while out[-1] + h < length:
            out.append(out[-1] + h)
            h = min(2 * h, rules.k_panel_outer)
        out.append(length)
        return np.array(out)

    left = bp[0] - outward(bp[0], bp[0] - A)[::-1]
    right = bp[-1] + outward(bp[-1], B - bp[-1])
    all_edges = np.concatenate([left[:-1], inner, right[1:]])
    return composite_nodes(all_edges, rules.pair_n)


def _z_matrix(params, f, g, K, kp):
    """Z_g(K, k') = conj c₊ g(K) + conj c₋ g(K'₋), rows K, columns k'."""
    K = K[:, None]
    kp = kp[None, :]
    return (np.conj(_c_plus(params, f, K, kp)) * g(K)
            + np.conj(_c_minus(params, f, K, kp)) * g(_k_minus(params, K, kp)))


def _bb_finite_rank(state, params, G, rules):
    """B̃(G) for finite-rank G as Σ_j β_j Σ_m μ_m Z_u W Z_v^* on the merged rule."""
    grid = rules.heavy
    p = grid.nodes
    kp, w = merged_rule(state, params, grid, rules)
    out = np.zeros((len(p), len(p)), dtype=complex)
    for b, f in zip(state.betas, state.funcs):
        for mu, u, v in G.terms:
            Zu = _z_matrix(params, f, u, p, kp)
            Zv = Zu if v is u else _z_matrix(params, f, v, p, kp)
            out += b * mu * (Zu * w[None, :]) @ Zv.conj().T
    return OperatorMatrix(grid, np.zeros(len(p), dtype=complex), out)


def _bb_mult(state, params, G, rules):
    """B̃(g(P)): diagonal from the (+,+) and (-,-) branches, kernel from the mixed ones."""
    grid = rules.heavy
    p = grid.nodes
    lam = params.lam
    g = G.mult
    d, wd = rules.krule.nodes[:, None], rules.krule.weights[:, None]
    S2 = np.abs(s_coeff_raw(params, np.abs(d))) ** 2
    K = p[None, :]
    diag = np.zeros(len(p), dtype=complex)
    for b, f in zip(state.betas, state.funcs):
        pp = np.abs(f((1 + lam) * d + lam * K)) ** 2 * g(K)
        mm = np.abs(f(lam * K - (1 + lam) * d)) ** 2 * g(K - 2 * d)
        diag += b * (1 + lam) * 0.25 * np.sum(wd * S2 * (pp + mm), axis=0)
    K1, K2 = p[:, None], p[None, :]
    kern = 0
    for b, f in zip(state.betas, state.funcs):
        ks = 0.5 * ((1 + lam) * K2 - (1 - lam) * K1)
        pm = np.conj(_c_plus(params, f, K1, ks)) * _c_minus(params, f, K2, ks) * g(K1)
        ks = 0.5 * ((1 + lam) * K1 - (1 - lam) * K2)
        mp = np.conj(_c_minus(params, f, K1, ks)) * _c_plus(params, f, K2, ks) * g(K2)
        kern = kern + b * 0.5 * (1 - lam) * (pm + mp)
    return OperatorMatrix(grid, diag, np.asarray(kern, dtype=complex))


def reduced_second_order(state, params, G, rules):
    """B̃(G) realized on the heavy grid."""
    _check(state, params)
    if params.dim == 3:
        from . import exactmap3

        return exactmap3.reduced_second_order(state, params, G, rules)
    if params.lam == 0:
        return OperatorMatrix.zeros(rules.heavy)
    if G.kind == "momentum":
        return _bb_mult(state, params, G, rules)
    if G.kind == "finite_rank":
        return _bb_finite_rank(state, params, G, rules)
    if G.kind in ("finite_rank", "kernel"):
        return _bb_smooth(state, params, G, rules)
    raise UnsupportedError(f"{G.kind} observables are not supported by the second-order term")


def full_reduced_map(state, params, G, rules):
    _check(state, params)
    if params.dim == 3:
        from . import exactmap3

        return exactmap3.full_reduced_map(state, params, G, rules)
    b1 = reduced_first_order(state, params, G, rules)
    b2 = _g_b(state, params, G, rules)
    bb = reduced_second_order(state, params, G, rules)
    total = realize(G, rules.heavy) + b1 + b2 + bb
    return ReducedMapResult(b1, b2, bb, total, params.lam, {"level": rules.level})


def b_tilde_identity_residual(state, params, rules):
    """B̃* + B̃ + B̃(I) on the heavy grid (should vanish)."""
    from .observables import identity

    I = identity()
    res = full_reduced_map(state, params, I, rules)
    return res.B_star_G + res.G_B + res.BB_G


# --------------------------------------------------------------------------
# norm bounds of the first- and second-order terms


def observable_norm(G, rules):
    """‖G‖: exact Gram-matrix value for finite-rank G, |g| sup for multiples of I,
    grid realization otherwise (dim 1)."""
    from .linalg import cross_singular_values
    from .observables import op_norm

    if G.kind == "finite_rank":
        if rules.dim == 1:
            x, w = rules.heavy.nodes, rules.heavy.weights
        else:
            from .rules import radial_rule

            ext = G.extent()
            x, w = radial_rule(ext, 0.25, 16)
            w = 4 * np.pi * w * x**2
        U = [mu * u(x) for mu, u, v in G.terms]
        V = [v(x) for mu, u, v in G.terms]
        return float(np.max(cross_singular_values(U, V, w)))
    if G.kind == "momentum" and rules.dim == 3:
        return float(abs(np.asarray(G.mult(np.zeros(1)))[0]))
    return op_norm(realize(G, rules.heavy), "dense")


def _matrix_norm(M):
    from .observables import op_norm

    return op_norm(M, "dense")


def norm_bounds(state, params, G, rules):
    """BoundChecks ‖B̃‖ ≤ min(2‖ρ‖₁, (1-λ)^{-n}‖ρ‖₁) and ‖B̃(G)‖ ≤ ‖ρ‖₁‖G‖(1-λ)^{-n}.

    ‖ρ‖₁ = Σβ_j = 1 for every DensityState; in dim 3 the left sides are norms of
    s-wave compressions."""
    from .expansion import BoundCheck
    from .observables import identity

    _check(state, params)
    n = params.dim
    rho1 = float(np.sum(state.betas))
    grow = (1 - params.lam) ** (-n)
    if n == 1:
        Bst = b_star_op(state, params, rules.krule).realize(rules.heavy)
    else:
        from . import exactmap3

        Bst = exactmap3.reduced_first_order(state, params, identity(), rules)
    bb = reduced_second_order(state, params, G, rules)
    return {
        "B_tilde": BoundCheck(_matrix_norm(Bst), min(2 * rho1, grow * rho1)),
        "BB_G": BoundCheck(_matrix_norm(bb), rho1 * observable_norm(G, rules) * grow),
    }
