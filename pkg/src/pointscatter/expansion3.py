"""Dim-3 expansion terms for isotropic states f_j(k) = g_j(|k|).

Every term is a function of X.  With j₀, j₁ the spherical Bessel functions,
c = c₃ and Σ over components weighted by β_j:

    V₁(r)   = 4πc  ∫dk k³ Σ|g|² j₀(kr)²
    V₂(r)   = 8πc  ∫dk k⁴ Σ Re(g' ḡ) (j₀(kr)² + j₁(kr)²)
    A(x)    = a(r) x/r,  a(r) = -8πc ∫dk k³ Σ Im(g' ḡ) j₀(kr) j₁(kr)
    φ(I)(r) = 4πc² ∫dk k⁴ Σ|g|² j₀(kr)²

The Kraus operators are m_{j,k} = c√β_j |k| g_j(|k|) j₀(|k||X|) e^{-ik·X}.
Matrices act on the s-wave function set of `radial.RadialSpace`; results are
compressions to the oscillator basis.  For a real profile g the field A
vanishes identically.
"""
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.special import spherical_jn

from .radial import FOUR_PI, radial_space


@dataclass(frozen=True, eq=False)
class RadialProfile:
    """Radial function of X given by a light-momentum integral."""
    name: str
    weights: np.ndarray    # (Nk,) quadrature weights times the k-dependent factor
    k: np.ndarray
    kind: str              # "j0sq", "j0sq+j1sq", "j0j1"

    def __call__(self, r, derivative=False):
        r = np.atleast_1d(np.asarray(r, dtype=float))
        z = np.outer(r, self.k)
        a = spherical_jn(0, z)
        b = spherical_jn(1, z)
        if not derivative:
            if self.kind == "j0sq":
                m = a * a
            elif self.kind == "j0sq+j1sq":
                m = a * a + b * b
            else:
                m = a * b
            return m @ self.weights
        da = -b
        db = a - 2 * np.divide(b, z, out=np.zeros_like(z), where=z > 0)
        db = np.where(z > 0, db, 1.0 / 3.0)
        if self.kind == "j0sq":
            m = 2 * a * da
        elif self.kind == "j0sq+j1sq":
            m = 2 * a * da + 2 * b * db
        else:
            m = da * b + a * db
        return (m * self.k[None, :]) @ self.weights

    def sup(self, r_max=30.0, n=3001, over_r=False, derivative=False):
        """sup_r |value| (or |value|/r); grid search then local refinement."""
        def h(x):
            v = self(x, derivative=derivative)
            if over_r:
                v = np.divide(v, x, out=np.zeros_like(v), where=np.asarray(x) > 0)
            return np.abs(v)

        r = np.linspace(0.0, r_max, n)
        if over_r:
            r[0] = 1e-6
        vals = h(r)
        i = int(np.argmax(vals))
        lo, hi = r[max(i - 1, 0)], r[min(i + 1, n - 1)]
        if hi > lo:
            res = minimize_scalar(lambda x: -h(np.array([x]))[0], bounds=(lo, hi),
                                  method="bounded", options={"xatol": 1e-12})
            return float(max(vals[i], -res.fun))
        return float(vals[i])


@dataclass(frozen=True, eq=False)
class Terms3D:
    V1: RadialProfile
    V2: RadialProfile
    a: RadialProfile
    phi: RadialProfile
    k: np.ndarray
    wk: np.ndarray
    kraus_amp: np.ndarray   # (J, Nk): c√β_j |k| g_j(|k|)


def build_terms(state, params, rules):
    from .expansion import ExpansionTerms

    c = 2.0 * params.coupling
    k, wk = rules.radial_k
    G2 = np.zeros_like(k)
    gg = np.zeros_like(k, dtype=complex)
    amps = []
    for beta, f in zip(state.betas, state.funcs):
        g = f.g(k)
        dg = f.dg(k)
        G2 = G2 + beta * np.abs(g) ** 2
        gg = gg + beta * dg * np.conj(g)
        amps.append(c * np.sqrt(beta) * k * g)
    V1 = RadialProfile("V1", FOUR_PI * c * wk * k**3 * G2, k, "j0sq")
    V2 = RadialProfile("V2", 8 * np.pi * c * wk * k**4 * gg.real, k, "j0sq+j1sq")
    a = RadialProfile("A", -8 * np.pi * c * wk * k**3 * gg.imag, k, "j0j1")
    phi = RadialProfile("phi(I)", FOUR_PI * c**2 * wk * k**4 * G2, k, "j0sq")
    t3 = Terms3D(V1, V2, a, phi, k, wk, np.array(amps))
    return ExpansionTerms(3, params.coupling, state, V1, V2, a, None, phi, rules, t3,
                          {"wtn": None, "v1_0": float(V1(0.0)[0]), "phi_0": float(phi(0.0)[0])})


def _matrices(terms, space):
    r = space.r
    t = terms.kraus
    V1 = space.mult_matrix(t.V1(r))
    Y = space.mult_matrix(0.5 * t.V2(r) + 2.0 * t.V1(r)) + 0.5 * space.anti_P_matrix(t.a(r))
    phiI = space.mult_matrix(t.phi(r))
    return V1, Y, phiI


def _kraus_overlaps(terms, space):
    """O[x, y, k] = 4π ∫r² dr conj x̌ y̌ j₀(kr)² for the function set."""
    r, wr = space.r, space.wr
    t = terms.kraus
    J = spherical_jn(0, np.outer(t.k, r)) ** 2          # (Nk, Nr)
    Fw = np.conj(space.Fr) * (FOUR_PI * wr * r**2)
    return np.einsum("xr,yr,kr->xyk", Fw, space.Fr, J)


def apply_phi(terms, G):
    """Compressed φ(G) by the Kraus sum."""
    space = radial_space(terms.rules, G)
    t = terms.kraus
    M = space.M
    O = _kraus_overlaps(terms, space)
    wt = FOUR_PI * t.wk * t.k**2
    out = np.zeros((M, M), dtype=complex)
    for amp in t.kraus_amp:
        if not space.idx:
            out += space.identity_scale * np.einsum("k,xyk->xy", wt * np.abs(amp) ** 2,
                                                    O[:M, :M])
            continue
        for mu, iu, iv in space.idx:
            Tu = amp[None, :] * O[iu, :M, :]            # ⟨u|m_k|b⟩ for basis b
            Tv = amp[None, :] * O[iv, :M, :]
            out += mu * (np.conj(Tu) * wt) @ Tv.T
    return out


def kraus_phi_of_I(terms):
    from .observables import identity

    return apply_phi(terms, identity())


def apply_M1(terms, G):
    space = radial_space(terms.rules, G)
    V1 = space.mult_matrix(terms.kraus.V1(space.r))
    return 1j * (space.left(V1) - space.right(V1))


def apply_M2(terms, G):
    space = radial_space(terms.rules, G)
    V1, Y, phiI = _matrices(terms, space)
    ham = 1j * (space.left(Y) - space.right(Y))
    return ham + apply_phi(terms, G) - 0.5 * (space.left(phiI) + space.right(phiI))


def term_norms(terms):
    """Operator norms of the terms as functions of X.

    ‖A‖ = sup|a|; "PA" is Σ_j ‖[P_j, A_j]‖ where ‖[P_j, A_j]‖ = sup_r max(|a'|, |a|/r)
    (the same for every j by isotropy)."""
    t = terms.kraus
    pa = max(t.a.sup(derivative=True), t.a.sup(over_r=True))
    return {"V1": t.V1.sup(), "V2": t.V2.sup(), "A": t.a.sup(), "PA": 3 * pa,
            "phi": t.phi.sup()}
