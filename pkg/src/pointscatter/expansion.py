"""First- and second-order generators of the small-λ expansion

    Tr₂[(I⊗ρ)S*(G⊗I)S] = G + λM₁(G) + λ²M₂(G) + O(λ³),
    M₁(G) = i[V₁, G],
    M₂(G) = i[½V₂ + ½{A,P} + (n-1)V₁, G] + φ(G) - ½{φ(I), G}.

Dim 1.  Every term is a function of X in shift-integral form (c = α₀/2,
the s₁ = 2 counting measure already divided out):

    V₁   = c∫_R dk ρ(k,k)/|k|  + c∫_R dk τ_{2k} ρ(k,-k)/|k|
    A    = same with ∇_Tρ in place of ρ
    V₂   = 2c∫_R dk sgn(k) ∇_Tρ(k,k)
    φ(I) = c²·2∫_R dk ρ(k,k)/k² + c²·2∫_R dk τ_{2k} ρ(k,-k)/k²

and φ(G) = Σ_j ∫_R dk m*_{j,k} G m_{j,k} with Kraus factors
m_{j,k} = c√β_j/|k| Σ_{s=±} f_j(sk) τ*_{(1-s)k}.  Since τ_a = e^{iaX}, an
operator m + ∫dk τ_{2k} q(k) has the position-space symbol
m + ∫dk q(k) e^{2ikx}, whose supremum is its exact operator norm.
"""
from dataclasses import dataclass, field

import numpy as np

from .errors import UnsupportedError, UsageError
from .linalg import trace_norm_factored
from .observables import OperatorMatrix
from .operators import ShiftOp, commutator, anticommutator
from .states import _abs_p, _samples, grad_T, kernel as rho_kernel, state_grid, wtn_report


@dataclass(frozen=True, eq=False)
class ExpansionTerms:
    dim: int
    coupling: float
    state: object
    V1: object
    V2: object
    A: object
    Y: object            # ½V₂ + ½{A,P} + (n-1)V₁, the Hamiltonian part of M₂
    phi_of_I: object
    rules: object
    kraus: object = None
    meta: dict = field(default_factory=dict)

    @property
    def c_n(self):
        return {1: 1.0, 3: 2.0}[self.dim] * self.coupling


def _const(value):
    return lambda P: value * np.ones(np.shape(P))


def _over(num, den):
    """num/den with the removable k = 0 point (states vanish there) set to 0."""
    den = np.asarray(den, dtype=float)
    safe = np.where(den == 0, 1.0, den)
    return np.where(den == 0, 0.0, num / safe)


def build_terms(state, params, rules):
    """Expansion terms for `state`; independent of params.lam."""
    if params.dim == 2:
        raise UnsupportedError("the expansion is not available in dimension 2")
    if state.dim != params.dim:
        raise UsageError("state and parameters have different dimensions")
    rep = wtn_report(state)
    if rep.diverged:
        from .errors import DivergenceError

        raise DivergenceError(
            f"weighted trace norm of {state.name!r} diverges; the expansion terms are undefined")
    if params.dim == 3:
        from . import expansion3

        return expansion3.build_terms(state, params, rules)
    a0 = params.coupling
    c = 0.5 * a0
    kr = rules.krule
    k, w = kr.nodes, kr.weights
    ak = np.abs(k)
    diag_rho = np.real(rho_kernel(state, k, k))
    diag_grad = np.real(grad_T(state, k, k))

    v1_m = c * np.sum(w * diag_rho / ak)
    V1 = ShiftOp(_const(v1_m), lambda kk, P: c * _over(rho_kernel(state, kk, -kk), np.abs(kk))
                 * np.ones(np.shape(P)), kr, "V1")
    a_m = c * np.sum(w * diag_grad / ak)
    A = ShiftOp(_const(a_m), lambda kk, P: c * _over(grad_T(state, kk, -kk), np.abs(kk))
                * np.ones(np.shape(P)), kr, "A")
    v2_m = 2 * c * np.sum(w * np.sign(k) * diag_grad)
    V2 = ShiftOp(_const(v2_m), None, kr, "V2")
    Y = V2.scale(0.5) + A.anticommutator_P().scale(0.5)
    Y = ShiftOp(Y.m, Y.q, kr, "Y")
    phi_m = 2 * c**2 * np.sum(w * diag_rho / k**2)
    phi = ShiftOp(_const(phi_m), lambda kk, P: 2 * c**2 * _over(rho_kernel(state, kk, -kk), kk**2)
                  * np.ones(np.shape(P)), kr, "phi(I)")
    kraus = KrausFamily1D(state, c, kr)
    return ExpansionTerms(1, a0, state, V1, V2, A, Y, phi, rules, kraus,
                          {"wtn": rep.total, "v1_m": v1_m, "v2_m": v2_m, "phi_m": phi_m})


@dataclass(frozen=True, eq=False)
class KrausFamily1D:
    """m_{j,k} = c√β_j/|k| Σ_s f_j(sk) τ*_{(1-s)k}, k on the shift rule."""
    state: object
    c: float
    krule: object

    def coefficients(self, j, k):
        """(a₊, a₋) with m_{j,k} = a₊ + a₋ τ*_{2k}."""
        f = self.state.funcs[j]
        s = self.c * np.sqrt(self.state.betas[j]) / np.abs(k)
        return s * f(k), s * f(-k)

    def adjoint_apply(self, j, k, u, K):
        """(m*_{j,k} u)(K) = conj(a₊) u(K) + conj(a₋) u(K - 2k)."""
        ap, am = self.coefficients(j, k)
        return np.conj(ap) * u(K) + np.conj(am) * u(K - 2 * k)

    def apply_mult(self, g):
        """φ(g(P)) as a ShiftOp:  Σ_j ∫dk Σ_{s,s'} conj(a_s)a_{s'} τ_{(1-s)k} g(P) τ*_{(1-s')k}."""
        st, c, kr = self.state, self.c, self.krule
        k, w = kr.nodes, kr.weights

        def m(P):
            P = np.asarray(P, dtype=float)
            flat = P.reshape(-1)
            out = np.zeros(flat.shape, dtype=complex)
            for j in range(len(st.betas)):
                ap, am = self.coefficients(j, k)
                out += np.sum(w[:, None] * (np.abs(ap[:, None]) ** 2 * g(flat[None, :])
                                            + np.abs(am[:, None]) ** 2 * g(flat[None, :] - 2 * k[:, None])),
                              axis=0)
            return out.reshape(P.shape)

        def q(kk, P):
            out = 0
            for j in range(len(st.betas)):
                f = st.funcs[j]
                prod = c**2 * st.betas[j] * _over(f(kk) * np.conj(f(-kk)), kk**2)
                out = out + prod * (g(P) + g(P + 2 * kk))
            return out

        return ShiftOp(m, q, kr, "phi(g)")


# --------------------------------------------------------------------------
# application to observables (dim 1)


def _grid(terms):
    return terms.rules.heavy


def apply_M1(terms, G):
    if terms.dim == 3:
        from . import expansion3

        return expansion3.apply_M1(terms, G)
    return commutator(terms.V1, G, _grid(terms)).scale(1j)


def apply_phi(terms, G):
    """φ(G) by the Kraus sum."""
    if terms.dim == 3:
        from . import expansion3

        return expansion3.apply_phi(terms, G)
    grid = _grid(terms)
    p = grid.nodes
    kr = terms.kraus
    k, w = kr.krule.nodes, kr.krule.weights
    if G.kind == "momentum":
        return kr.apply_mult(G.mult).realize(grid)
    n = len(p)
    out = np.zeros((n, n), dtype=complex)
    st = terms.state
    if G.kind == "finite_rank":
        for j in range(len(st.betas)):
            for mu, u, v in G.terms:
                Mu = kr.adjoint_apply(j, k[:, None], u, p[None, :])
                Mv = Mu if v is u else kr.adjoint_apply(j, k[:, None], v, p[None, :])
                out += mu * (Mu.T * w[None, :]) @ np.conj(Mv)
        return OperatorMatrix(grid, np.zeros(n, dtype=complex), out)
    if G.kind == "kernel":
        P1, P2 = p[:, None], p[None, :]
        for j in range(len(st.betas)):
            ap, am = kr.coefficients(j, k)
            for kk, ww, a1, a2 in zip(k, w, ap, am):
                cs = {0: np.conj(a1), 1: np.conj(a2)}
                ds = {0: a1, 1: a2}
                acc = 0
                for s1 in (0, 1):
                    for s2 in (0, 1):
                        acc = acc + cs[s1] * ds[s2] * G.kernel(P1 - 2 * s1 * kk, P2 - 2 * s2 * kk)
                out += ww * acc
        return OperatorMatrix(grid, np.zeros(n, dtype=complex), out)
    raise UnsupportedError(f"φ is not implemented for {G.kind} observables")


def apply_M2(terms, G):
    if terms.dim == 3:
        from . import expansion3

        return expansion3.apply_M2(terms, G)
    grid = _grid(terms)
    ham = commutator(terms.Y, G, grid).scale(1j)
    return ham + apply_phi(terms, G) - anticommutator(terms.phi_of_I, G, grid).scale(0.5)


def realize_terms(terms):
    """Dict of realized term matrices (dim 1)."""
    if terms.dim != 1:
        raise UnsupportedError("dense realization of the expansion terms is dim-1 only")
    grid = _grid(terms)
    return {name: getattr(terms, name).realize(grid) for name in ("V1", "V2", "A", "Y", "phi_of_I")}


def kraus_phi_of_I(terms):
    """φ(I) reconstructed from the Kraus family."""
    if terms.dim == 3:
        from . import expansion3

        return expansion3.kraus_phi_of_I(terms)
    from .observables import identity

    return apply_phi(terms, identity())


# --------------------------------------------------------------------------
# norms of functions of X (dim 1) and the term bounds


def symbol(op, x, derivative=False):
    """Position-space symbol m + ∫dk q(k) e^{2ikx} of a P-independent ShiftOp.

    With derivative=True returns d/dx of the symbol; since P = i d/dx in
    position space, its supremum is ‖[P, O]‖.
    """
    x = np.asarray(x, dtype=float)
    k, w = op.krule.nodes, op.krule.weights
    out = np.zeros(x.shape, dtype=complex)
    if not derivative:
        out += op.m(np.zeros(1))[0]
    if op.q is not None:
        q = op.q(k, np.zeros_like(k))
        ph = np.exp(2j * np.outer(x.ravel(), k))
        fac = (2j * k) if derivative else 1.0
        out += (ph @ (w * q * fac)).reshape(x.shape)
    return out


def symbol_sup(op, x_max=30.0, n=6001, derivative=False):
    """sup_x |symbol| by a fine scan refined with a bounded scalar search."""
    from scipy.optimize import minimize_scalar

    x = np.linspace(-x_max, x_max, n)
    vals = np.abs(symbol(op, x, derivative))
    i = int(np.argmax(vals))
    h = x[1] - x[0]
    res = minimize_scalar(lambda t: -abs(symbol(op, np.array([t]), derivative)[0]),
                          bounds=(x[i] - h, x[i] + h), method="bounded",
                          options={"xatol": 1e-12})
    return float(max(vals[i], -res.fun))


@dataclass
class BoundCheck:
    lhs: float
    rhs: float

    @property
    def slack(self):
        return self.rhs - self.lhs

    @property
    def ratio(self):
        return self.lhs / self.rhs if self.rhs > 0 else np.inf

    def as_dict(self):
        return {"lhs": self.lhs, "rhs": self.rhs, "slack": self.slack, "ratio": self.ratio}


def _fn_images(state, grid):
    """Per eigenfunction: sampled f and X f (one entry per component)."""
    return [(v, X, None) for v, X, XX in _samples(state, grid)]


def term_majorants(state, coupling, grid=None):
    """Right-hand sides of the term bounds (trace norms via the Gram method)."""
    n = state.dim
    c = {1: 1.0, 3: 2.0}[n] * coupling
    if grid is None:
        grid = state_grid(state)
    w = grid.weights
    pts = grid.points
    b = state.betas
    img = _fn_images(state, grid)
    wp = lambda s: _abs_p(pts, s, n)

    def tn(Us, Vs):
        return trace_norm_factored(np.array(Us), np.array(Vs), w)

    out = {}
    out["V1_own_power"] = c * tn([bj * wp(n - 2) * v for bj, (v, X, P) in zip(b, img)],
                                 [v for v, X, P in img])
    out["V1_first_power"] = c * tn([bj * wp(1) * v for bj, (v, X, P) in zip(b, img)],
                                   [v for v, X, P in img])
    out["A"] = c * sum(tn([bj * wp(n - 2) * X[j] for bj, (v, X, P) in zip(b, img)],
                          [v for v, X, P in img]) for j in range(n))
    out["phi"] = c**2 * tn([bj * wp(n - 2) * v for bj, (v, X, P) in zip(b, img)],
                           [wp(n - 2) * v for v, X, P in img])
    # {P_j|P|^{n-1}, [X_j,ρ]} and [P_j|P|^{n-2}, [X_j,ρ]], with [X_j,ρ] = Σβ(|Xf><f| - |f><Xf|)
    v2 = 0.0
    pa = 0.0
    for j in range(n):
        for sign, e, acc in ((1, n - 1, "v2"), (-1, n - 2, "pa")):
            Us, Vs = [], []
            q = pts if n == 1 else pts[:, j]
            W = q * wp(e)           # multiplication by P_j|P|^e
            for bj, (v, X, P) in zip(b, img):
                Us += [bj * W * X[j], -bj * W * v, sign * bj * X[j], -sign * bj * v]
                Vs += [v, X[j], W * v, W * X[j]]
            val = tn(Us, Vs)
            if acc == "v2":
                v2 += val
            else:
                pa += val
    out["V2"] = c * v2
    out["PA"] = c * pa
    out["wtn"] = wtn_report(state, grid).total
    return out


def check_term_bounds(terms, state=None, grid=None):
    """Measured term norms against their trace-norm majorants.

    Both constant conventions for ‖V₁‖ are reported (own power |P|^{n-2} and
    first power |P|); neither is adjudicated.
    """
    state = terms.state if state is None else state
    if terms.dim == 3:
        from . import expansion3

        norms = expansion3.term_norms(terms)
    else:
        norms = {
            "V1": symbol_sup(terms.V1),
            "V2": abs(terms.meta["v2_m"]),
            "A": symbol_sup(terms.A),
            "PA": symbol_sup(terms.A, derivative=True),
            "phi": symbol_sup(terms.phi_of_I),
        }
    maj = term_majorants(state, terms.coupling, grid)
    rep = {
        "V1_own_power": BoundCheck(norms["V1"], maj["V1_own_power"]),
        "V1_first_power": BoundCheck(norms["V1"], maj["V1_first_power"]),
        "A": BoundCheck(norms["A"], maj["A"]),
        "V2": BoundCheck(norms["V2"], maj["V2"]),
        "PA": BoundCheck(norms["PA"], maj["PA"]),
        "phi": BoundCheck(norms["phi"], maj["phi"]),
        "wtn_V1": BoundCheck(norms["V1"], maj["wtn"]),
    }
    return rep
