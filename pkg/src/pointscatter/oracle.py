"""Brute-force dim-1 reduced map in joint light/heavy momentum space.

The joint wave function ψ(K, k) = b(K) f_j(k) is written in relative /
center-of-mass coordinates

    k_d = (k - λK)/(1+λ),   K_cm = K + k,

where the collision acts as ψ ↦ ψ + S(|k_d|)·½(ψ(k_d, ·) + ψ(-k_d, ·)).  The
reduced map is contracted against an orthonormal Hermite basis {h_a} of the
heavy space,

    C_ab = Σ_j β_j ⟨S(h_a⊗f_j), (G⊗I) S(h_b⊗f_j)⟩,

so the output is the compression of Tr₂[(I⊗ρ)S*(G⊗I)S] to span{h_a}.  Only
generic quadrature primitives are shared with the formula path.
"""
from dataclasses import dataclass

import numpy as np

from .errors import UnsupportedError
from .functions import hermite_functions
from .quadrature import composite_nodes
from .scattering import require_map_lambda, s_coeff_raw


@dataclass(frozen=True)
class JointRules:
    basis_size: int = 24
    basis_scale: float = 2.5
    panel: float = 0.5
    n_per_panel: int = 10
    grade_levels: int = 8      # geometric panels toward the kink at k_d = 0
    grade_first: float = 1e-6

    def refined(self):
        return JointRules(self.basis_size, self.basis_scale, self.panel / 2, self.n_per_panel,
                          self.grade_levels + 2, self.grade_first / 10)


@dataclass(frozen=True, eq=False)
class CompressedOperator:
    """Matrix of an operator in the orthonormal Hermite basis h_a(K/scale)/sqrt(scale)."""
    matrix: np.ndarray
    basis_size: int
    basis_scale: float

    def basis(self, x):
        return hermite_functions(x, self.basis_size, self.basis_scale)


def compress(mat, basis_size=24, basis_scale=2.5):
    """Compression of a grid OperatorMatrix to the Hermite basis."""
    B = hermite_functions(mat.grid.nodes, basis_size, basis_scale)
    return CompressedOperator(mat.compress(B), basis_size, basis_scale)


def relative_distance(a, b):
    """‖a - b‖ / ‖b‖ for compressed operators (spectral norms)."""
    return float(np.linalg.norm(a.matrix - b.matrix, 2) / np.linalg.norm(b.matrix, 2))


def _uniform(a, b, panel, n):
    m = max(1, int(np.ceil((b - a) / panel)))
    return composite_nodes(np.linspace(a, b, m + 1), n)


def _graded_half(length, jr):
    """Rule on [0, length] graded geometrically toward 0."""
    first = min(jr.grade_first, 0.5 * jr.panel)
    top = min(jr.panel, length)
    edges = [0.0, *np.geomspace(first, top, jr.grade_levels + 1)]
    if length > top:
        m = max(1, int(np.ceil((length - top) / jr.panel)))
        edges += list(np.linspace(top, length, m + 1)[1:])
    return composite_nodes(np.array(edges), jr.n_per_panel)


def _split_rule(lo, hi, c, jr):
    """Rule on [lo, hi] split and graded at c (c clipped into the interval)."""
    c = min(max(c, lo), hi)
    xs, ws = [], []
    if c - lo > 0:
        t, w = _graded_half(c - lo, jr)
        xs.append(c - t)
        ws.append(w)
    if hi - c > 0:
        t, w = _graded_half(hi - c, jr)
        xs.append(c + t)
        ws.append(w)
    return np.concatenate(xs), np.concatenate(ws)


def _extent(g, tol=1e-16):
    return g.extent(tol)


def _scattered(params, S, psi, kd, Kcm):
    """(Sψ)(k_d, K_cm) for ψ given in heavy/light coordinates."""
    lam = params.lam
    K_of = lambda d: Kcm / (1 + lam) - d
    k_of = lambda d: d + lam * Kcm / (1 + lam)
    a = psi(K_of(kd), k_of(kd))
    b = psi(K_of(-kd), k_of(-kd))
    return a + 0.5 * S * (a + b)


def brute_force_oracle(state, params, G, joint_rules=None):
    """Compressed Tr₂[(I⊗ρ)S*(G⊗I)S] by joint-space quadrature (dim 1)."""
    if state.dim != 1 or params.dim != 1:
        raise UnsupportedError("the joint-space oracle is implemented in dimension 1 only")
    require_map_lambda(params)
    jr = joint_rules or JointRules()
    M, sc = jr.basis_size, jr.basis_scale
    if G.kind == "finite_rank":
        C = _oracle_finite_rank(state, params, G, jr)
    elif G.kind == "momentum":
        C = _oracle_momentum(state, params, G, jr)
    else:
        raise UnsupportedError(f"the oracle handles finite-rank and momentum observables, not {G.kind}")
    return CompressedOperator(C, M, sc)


def _oracle_finite_rank(state, params, G, jr):
    lam = params.lam
    M, sc = jr.basis_size, jr.basis_scale
    F = state.extent()
    C = np.zeros((M, M), dtype=complex)
    for mu, u, v in G.terms:
        V = max(_extent(u), _extent(v))
        kmax = (F + 2 * lam * V) * (1 + lam) / (1 - lam)
        k, wk = _uniform(-kmax, kmax, jr.panel, jr.n_per_panel)
        for beta, f in zip(state.betas, state.funcs):
            Yu = np.zeros((M, len(k)), dtype=complex)
            Yv = np.zeros((M, len(k)), dtype=complex)
            for i, ki in enumerate(k):
                # heavy integral ∫dK conj(g(K)) (S ψ_b)(K, k), split at the kink
                K, wK = _split_rule(-V, V, ki / lam if lam > 0 else 2 * V, jr)
                kd = (ki - lam * K) / (1 + lam)
                S = s_coeff_raw(params, np.abs(kd))
                Kr = K + 2 * kd                 # heavy momentum of the reflected branch
                kr = ki - 2 * kd
                hK = hermite_functions(K, M, sc)
                hR = hermite_functions(Kr, M, sc)
                psi = hK * f(ki) * (1 + 0.5 * S) + 0.5 * S * hR * f(kr)
                Yu[:, i] = psi @ (wK * np.conj(u(K)))
                Yv[:, i] = psi @ (wK * np.conj(v(K)))
            # ⟨Sψ_a|u⟩⟨v|Sψ_b⟩ integrated over the light momentum
            C += beta * mu * (np.conj(Yu) * wk) @ Yv.T
    return C


def _oracle_momentum(state, params, G, jr):
    lam = params.lam
    M, sc = jr.basis_size, jr.basis_scale
    F = state.extent()
    Hb = sc * (np.sqrt(2 * M + 1) + 6.0)     # Hermite basis support
    Cmax = Hb + F * (1 + lam)
    D = F + lam * Cmax
    Kcm, wc = _uniform(-Cmax, Cmax, jr.panel, jr.n_per_panel)
    kd, wd = _split_rule(-D, D, 0.0, jr)
    S = s_coeff_raw(params, np.abs(kd))
    C = np.zeros((M, M), dtype=complex)
    for Kc, w in zip(Kcm, wc):
        K_of = lambda d: Kc / (1 + lam) - d
        k_of = lambda d: d + lam * Kc / (1 + lam)
        Kp, Km = K_of(kd), K_of(-kd)
        hp = hermite_functions(Kp, M, sc)
        hm = hermite_functions(Km, M, sc)
        g = np.asarray(G.mult(Kp))
        for beta, f in zip(state.betas, state.funcs):
            a = hp * f(k_of(kd))
            b = hm * f(k_of(-kd))
            Spsi = a + 0.5 * S * (a + b)
            C += beta * w * (np.conj(Spsi) * (wd * g)) @ Spsi.T
    return C
