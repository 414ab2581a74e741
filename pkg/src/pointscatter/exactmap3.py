"""Dim-3 reduced map on the isotropic (s-wave) sector.

First order.  B̃* is computed from its shift-integral form

    B̃* = (1+λ)³ ∫d³d ∫dσ S̄(|d|) τ_{(1-σ)d} ρ((1+λ)d + λP, (σ+λ)d + λP).

For radial heavy functions the whole integrand is invariant under a common
rotation, so K' (the heavy momentum after the shift) is put on the z axis and
the azimuth of d is dropped.  Both radial arguments that involve σd,
K'+d-σd and λ(K'+d)+σd, depend on σd only through its projection onto
w = K'+d, so the Haar average over σ becomes a single Gauss-Legendre integral
in cos∠(w, σd) (fast path).  `sigma_average` evaluates the same average with
the full SO(3) rule for cross-checks.

Second order.  In center-of-mass / relative coordinates (K_cm, d) the
collision acts on the s-wave of d only: (Sψ - ψ)(K_cm, d) = S(|d|) T_ψ(|K_cm|, |d|)
with T_ψ the sphere average of ψ over directions of d.  For a radial heavy
function y and a radial eigenfunction f,

    T(K_c, k) = ½ ∫dμ y(|K_c ẑ/(1+λ) - k Ω|) f(|k Ω + λK_c ẑ/(1+λ)|),  μ = Ω·ẑ,

and B̃(G) is assembled from the heavy overlaps of S·T at fixed outgoing light
momentum.  For G = I the overlap reduces to an integral over (K_c, k).
"""
import numpy as np

from .errors import UnsupportedError
from .exactmap import ReducedMapResult, _check
from .radial import FOUR_PI, radial_space
from .rules import radial_rule
from .scattering import s_coeff_raw


def _g(state, j):
    return state.funcs[j].radial


def _light_extent(state):
    return state.extent()


# --------------------------------------------------------------------------
# first order


def _b_star_fast(state, params, space, rules):
    """Matrix of B̃* on the function set by the single-angle fast path."""
    lam = params.lam
    fs = space.fs
    n = len(fs)
    Kmax = fs.extent()
    F = _light_extent(state)
    Kp, wKp = radial_rule(Kmax, rules.radial_panel, rules.radial_n)
    k, wk = radial_rule((F + lam * Kmax) / (1 + lam), rules.radial_panel, rules.radial_n)
    mu, wmu = rules.cos_rule
    S = np.conj(s_coeff_raw(params, k))
    Y = fs(Kp)                                                      # (n, NK)
    out = np.zeros((n, n), dtype=complex)
    kk = k[:, None, None]
    md = mu[None, :, None]
    mv = mu[None, None, :]
    radial_w = (wk * k**2 * S)[:, None, None] * (2 * np.pi * wmu)[None, :, None] \
        * (0.5 * wmu)[None, None, :]
    for i, K in enumerate(Kp):
        w = np.sqrt(np.maximum(K**2 + kk**2 + 2 * K * kk * md, 0.0))          # |K' + d|
        a1 = np.sqrt(np.maximum((1 + lam) ** 2 * kk**2 + lam**2 * K**2
                                + 2 * lam * (1 + lam) * K * kk * md, 0.0))
        xa = np.sqrt(np.maximum(w**2 + kk**2 - 2 * w * kk * mv, 0.0))        # |w - σd|
        a2 = np.sqrt(np.maximum(lam**2 * w**2 + kk**2 + 2 * lam * w * kk * mv, 0.0))
        W = 0
        for j, beta in enumerate(state.betas):
            g = _g(state, j)
            W = W + beta * g(a1) * np.conj(g(a2))
        W = W * radial_w
        col = (1 + lam) ** 3 * FOUR_PI * K**2 * wKp[i]
        bra = np.conj(fs(xa)).reshape(n, -1) @ W.ravel()
        out += col * np.outer(bra, Y[:, i])
    return out


def sigma_average(state, params, x, K, d, rotations=None, mu_rule=None, j=0):
    """∫dσ conj x(|K+d-σd|) conj f_j(|λ(K+d)+σd|) at vectors K, d (3,).

    With `rotations` the Haar integral is done by the SO(3) rule; otherwise by
    the single-angle reduction used in the fast path."""
    lam = params.lam
    g = _g(state, j)
    K = np.asarray(K, dtype=float)
    d = np.asarray(d, dtype=float)
    w = K + d
    if rotations is not None:
        v = np.einsum("rij,j->ri", rotations.rotations, d)
        vals = np.conj(x(np.linalg.norm(w - v, axis=1))) * np.conj(
            g(np.linalg.norm(lam * w + v, axis=1)))
        return complex(np.sum(rotations.weights * vals))
    mu, wmu = mu_rule
    wn, kn = np.linalg.norm(w), np.linalg.norm(d)
    xa = np.sqrt(np.maximum(wn**2 + kn**2 - 2 * wn * kn * mu, 0.0))
    a2 = np.sqrt(np.maximum(lam**2 * wn**2 + kn**2 + 2 * lam * wn * kn * mu, 0.0))
    return complex(0.5 * np.sum(wmu * np.conj(x(xa)) * np.conj(g(a2))))


# --------------------------------------------------------------------------
# energy-shell amplitudes


def shell_amplitude(fs, g, lam, Kc, k, mu_rule):
    """T(K_c, k) for every member of fs; Kc, k broadcast together; shape (n, *shape)."""
    mu, wmu = mu_rule
    Kc = np.asarray(Kc, dtype=float)[..., None] / (1 + lam)
    k = np.asarray(k, dtype=float)[..., None]
    a = np.sqrt(np.maximum(Kc**2 + k**2 - 2 * Kc * k * mu, 0.0))
    b = np.sqrt(np.maximum(k**2 + lam**2 * Kc**2 + 2 * lam * Kc * k * mu, 0.0))
    return 0.5 * (fs(a) * g(b)) @ wmu


def _shell_grid(state, params, fs, rules):
    lam = params.lam
    Ky = fs.extent()
    F = _light_extent(state)
    Kc, wKc = radial_rule(Ky + F, rules.radial_panel, rules.radial_n)
    k, wk = radial_rule(F + lam * Ky, rules.radial_panel, rules.radial_n)
    return Kc, wKc, k, wk


def shell_matrices(state, params, space, rules):
    """(B̃*, B̃(I)) on the function set from the energy-shell form."""
    lam = params.lam
    fs = space.fs
    Kc, wKc, k, wk = _shell_grid(state, params, fs, rules)
    S = s_coeff_raw(params, k)
    wgt = FOUR_PI**2 * np.outer(wKc * Kc**2, wk * k**2)
    n = len(fs)
    bstar = np.zeros((n, n), dtype=complex)
    bb = np.zeros((n, n), dtype=complex)
    for j, beta in enumerate(state.betas):
        T = shell_amplitude(fs, _g(state, j), lam, Kc[:, None], k[None, :], rules.cos_rule)
        T = T.reshape(n, -1)
        for out, fac in ((bstar, np.conj(S)), (bb, np.abs(S) ** 2)):
            W = (wgt * fac[None, :]).ravel()
            out += beta * (np.conj(T) * W) @ T.T
    return bstar, bb


def _y_vectors(state, params, fs, rules, v, j, kp):
    """Y_{v,y}(k') = ∫d³K conj v(|K|) S(|d|) T_y(|K + k'|, |d|) on the k' nodes."""
    lam = params.lam
    mu, wmu = rules.cos_rule
    Kv = v.extent(1e-17)
    K, wK = radial_rule(Kv, rules.radial_panel, rules.radial_n)
    vK = np.conj(v(K))
    g = _g(state, j)
    n = len(fs)
    out = np.zeros((n, len(kp)), dtype=complex)
    KK = K[:, None]
    MM = mu[None, :]
    base = 2 * np.pi * (wK * K**2 * vK)[:, None] * wmu[None, :]
    for i, q in enumerate(kp):
        Kcm = np.sqrt(np.maximum(KK**2 + q**2 + 2 * KK * q * MM, 0.0))
        dd = np.sqrt(np.maximum(q**2 + lam**2 * KK**2 - 2 * lam * KK * q * MM, 0.0)) / (1 + lam)
        T = shell_amplitude(fs, g, lam, Kcm, dd, rules.cos_rule)      # (n, NK, Nmu)
        out[:, i] = T.reshape(n, -1) @ (base * s_coeff_raw(params, dd)).ravel()
    return out


def bb_finite_rank(state, params, space, rules):
    """Matrix of B̃(G) rows=basis, columns=basis for the finite-rank G of `space`."""
    lam = params.lam
    fs = space.fs
    M = space.M
    F = _light_extent(state)
    Ky = fs.extent()
    vext = max(fs.extra[i - M].extent(1e-17) for _, a, b in space.idx for i in (a, b))
    kmax = (1 + lam) * (F + lam * Ky) + lam * vext
    kp, wkp = radial_rule(kmax, rules.radial_panel, rules.radial_n)
    out = np.zeros((M, M), dtype=complex)
    cache = {}
    for j, beta in enumerate(state.betas):
        for mu_, iu, iv in space.idx:
            for ix in (iu, iv):
                if (j, ix) not in cache:
                    cache[(j, ix)] = _y_vectors(state, params, fs, rules, fs.extra[ix - M], j, kp)[:M]
            Yu, Yv = cache[(j, iu)], cache[(j, iv)]
            out += beta * mu_ * (np.conj(Yu) * (FOUR_PI * wkp * kp**2)) @ Yv.T
    return out


# --------------------------------------------------------------------------
# public entry points


def reduced_first_order(state, params, G, rules, method="fast"):
    """Compression of B̃*G to the oscillator basis."""
    _check(state, params)
    space = radial_space(rules, G)
    return space.left(b_star_matrix(state, params, space, rules, method))


def b_star_matrix(state, params, space, rules, method="fast"):
    if method == "fast":
        return _b_star_fast(state, params, space, rules)
    if method == "shell":
        return shell_matrices(state, params, space, rules)[0]
    raise UnsupportedError(f"unknown B* method {method!r}")


def reduced_second_order(state, params, G, rules):
    _check(state, params)
    space = radial_space(rules, G)
    if space.idx:
        return bb_finite_rank(state, params, space, rules)
    bb = shell_matrices(state, params, space, rules)[1]
    return space.identity_scale * bb[:space.M, :space.M]


def full_reduced_map(state, params, G, rules, method="fast"):
    """Compressed G + B̃*G + GB̃ + B̃(G); B̃* by `method`, B̃(G) from the energy shell."""
    _check(state, params)
    space = radial_space(rules, G)
    bstar = b_star_matrix(state, params, space, rules, method)
    b1 = space.left(bstar)
    b2 = space.right(bstar.conj().T)
    if space.idx:
        bb = bb_finite_rank(state, params, space, rules)
    else:
        bb = space.identity_scale * shell_matrices(state, params, space, rules)[1][:space.M,
                                                                                 :space.M]
    total = space.G_matrix() + b1 + b2 + bb
    return ReducedMapResult(b1, b2, bb, total, params.lam,
                            {"level": rules.level, "basis": rules.basis, "method": method})


def expansion_pieces(state, params, G, rules, terms):
    from . import expansion3

    res = full_reduced_map(state, params, G, rules)
    space = radial_space(rules, G)
    return res, space.G_matrix(), expansion3.apply_M1(terms, G), expansion3.apply_M2(terms, G)


def weighted_norm(G, rules):
    raise UnsupportedError("the weighted observable norm is implemented in dimension 1 only")
