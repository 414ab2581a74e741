"""Light-particle density matrices in spectral form and the weighted trace norm.

Momentum-space conventions: (X_j g)(k) = i ∂g/∂k_j, |P|^s is multiplication
by |k|^s.  In dim 3 every built-in eigenfunction is radial, f(k) = g(|k|),
with g a GaussPoly profile.
"""
from dataclasses import dataclass, field

import numpy as np

from .errors import DivergenceError, UsageError
from .functions import GaussPoly, orthonormalize
from .linalg import trace_norm_factored
from .quadrature import composite_nodes, graded_edges, make_sphere


class Radial3D:
    """f(k) = g(|k|) on R^3 with analytic gradient and Hessian."""

    def __init__(self, g):
        self.g = g
        self.dg = g.deriv()
        self.d2g = self.dg.deriv()

    def __call__(self, k):
        return self.g(np.linalg.norm(k, axis=-1))

    def radial(self, r):
        return self.g(r)

    def grad(self, k):
        k = np.asarray(k, dtype=float)
        r = np.linalg.norm(k, axis=-1)
        with np.errstate(invalid="ignore", divide="ignore"):
            khat = np.where(r[..., None] > 0, k / r[..., None], 0.0)
        return self.dg(r)[..., None] * khat

    def hess(self, k):
        k = np.asarray(k, dtype=float)
        r = np.linalg.norm(k, axis=-1)
        with np.errstate(invalid="ignore", divide="ignore"):
            khat = np.where(r[..., None] > 0, k / r[..., None], 0.0)
            gr = np.where(r > 0, self.dg(r) / r, 0.0)
        kk = khat[..., :, None] * khat[..., None, :]
        eye = np.eye(3)
        return self.d2g(r)[..., None, None] * kk + gr[..., None, None] * (eye - kk)

    def scale(self, a):
        return Radial3D(self.g.scale(a))


@dataclass(frozen=True, eq=False)
class DensityState:
    dim: int
    betas: np.ndarray
    funcs: tuple
    name: str = "custom"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        b = np.asarray(self.betas, dtype=float)
        if np.any(b < 0) or abs(b.sum() - 1) > 1e-12:
            raise UsageError("weights must be non-negative and sum to 1")
        if len(b) != len(self.funcs):
            raise UsageError("one weight per eigenfunction")
        object.__setattr__(self, "betas", b)
        object.__setattr__(self, "funcs", tuple(self.funcs))

    # 1-D helpers work directly on GaussPoly; 3-D on Radial3D
    def grads(self):
        if self.dim == 1:
            return [f.deriv() for f in self.funcs]
        return [f.grad for f in self.funcs]

    def extent(self):
        if self.dim == 1:
            return max(f.extent(1e-9) for f in self.funcs)
        return max(f.g.extent(1e-9) for f in self.funcs)

    def rephased(self, thetas):
        funcs = [f.scale(np.exp(1j * t)) for f, t in zip(self.funcs, thetas)]
        return DensityState(self.dim, self.betas, funcs, self.name, dict(self.params))


def kernel(state, k1, k2):
    """ρ(k1, k2) = Σ β_j f_j(k1) conj f_j(k2)."""
    out = 0
    for b, f in zip(state.betas, state.funcs):
        out = out + b * f(k1) * np.conj(f(k2))
    return out


def grad_T(state, k1, k2):
    """Diagonal derivative Σ β_j [∇f_j(k1) conj f_j(k2) + f_j(k1) conj ∇f_j(k2)].

    Dim 1 returns a scalar array; dim 3 an array with a trailing axis of size 3.
    """
    out = 0
    if state.dim == 1:
        for b, f, df in zip(state.betas, state.funcs, state.grads()):
            out = out + b * (df(k1) * np.conj(f(k2)) + f(k1) * np.conj(df(k2)))
        return out
    for b, f in zip(state.betas, state.funcs):
        out = out + b * (f.grad(k1) * np.conj(f(k2))[..., None]
                         + f(k1)[..., None] * np.conj(f.grad(k2)))
    return out


# --------------------------------------------------------------------------
# built-in state library


def gauss1d(k0=3.0, width=1.0):
    """Pure Gaussian packet f(k) = π^{-1/4} w^{-1/2} exp(-(k-k0)²/(2w²)).

    f(0) != 0, so its weighted trace norm is infinite in dim 1.
    """
    f = GaussPoly.gaussian(k0, width).scale(np.pi**-0.25 / np.sqrt(width))
    return DensityState(1, [1.0], [f], "gauss1d", {"k0": k0, "width": width})


def gauss_poly1d(k0=0.5, width=1.0, power=3):
    """Pure packet f ∝ k^power exp(-(k-k0)²/(2w²)); vanishes to order `power` at 0."""
    f = GaussPoly.gaussian(k0, width, power)
    f = f.scale(1 / f.norm())
    return DensityState(1, [1.0], [f], "gauss_poly1d", {"k0": k0, "width": width, "power": power})


def gauss_pair1d(k0=0.5, separation=1.5, width=1.0, power=3, weights=(0.7, 0.3)):
    """Rank-2 state from two packets k^power·Gaussian centered at k0 and k0 - separation,
    orthonormalized exactly."""
    f1 = GaussPoly.gaussian(k0, width, power)
    f2 = GaussPoly.gaussian(k0 - separation, width, power)
    fs = orthonormalize([f1, f2])
    w = np.asarray(weights, dtype=float)
    return DensityState(1, w / w.sum(), fs, "gauss_pair1d",
                        {"k0": k0, "separation": separation, "width": width, "power": power,
                         "weights": list(map(float, w))})


def _radial_norm2(g):
    # 4π ∫_0^∞ r² |g(r)|² dr by a high-order composite rule
    r, w = composite_nodes(np.linspace(0.0, g.extent(1e-18), 41), 24)
    return 4 * np.pi * float(np.sum(w * r**2 * np.abs(g(r)) ** 2))


def shell3d(k0=1.0, width=1.0):
    """Isotropic shell f(k) ∝ |k| exp(-(|k|-k0)²/(2w²)) in dim 3."""
    g = GaussPoly.gaussian(k0, width, 1)
    g = g.scale(1 / np.sqrt(_radial_norm2(g)))
    return DensityState(3, [1.0], [Radial3D(g)], "shell3d", {"k0": k0, "width": width})


STATE_LIBRARY = {
    "gauss1d": gauss1d,
    "gauss_poly1d": gauss_poly1d,
    "gauss_pair1d": gauss_pair1d,
    "shell3d": shell3d,
}


def make_state(spec):
    spec = dict(spec)
    name = spec.pop("state")
    if name not in STATE_LIBRARY:
        raise UsageError(f"unknown state {name!r}; choose from {sorted(STATE_LIBRARY)}")
    return STATE_LIBRARY[name](**spec)


# --------------------------------------------------------------------------
# weighted trace norm


@dataclass(frozen=True, eq=False)
class StateGrid:
    """Quadrature over momentum space for trace norms of finite-rank operators."""
    points: np.ndarray   # (m,) in dim 1, (m, 3) in dim 3
    weights: np.ndarray
    k_min: float
    k_max: float


def state_grid(state, k_min=None, k_max=None, n_per_panel=16, panel=0.5, sphere_degree=10):
    """Dim 1: composite rule on [-k_max, k_max], geometrically graded toward 0.
    Dim 3: composite radial rule on (0, k_max] times a sphere rule."""
    if k_max is None:
        k_max = state.extent()
    if state.dim == 1:
        # k_min is the innermost panel edge: the first panel [0, k_min] has no
        # node at 0, and halving k_min probes integrability at k = 0.
        if k_min is None:
            k_min = 1e-3
        edges = graded_edges(k_max, panel=panel, k_first=k_min)
        r, w = composite_nodes(edges, n_per_panel)
        return StateGrid(np.concatenate([-r[::-1], r]), np.concatenate([w[::-1], w]),
                         float(k_min), float(k_max))
    if k_min is None:
        k_min = 0.0
    edges = np.arange(k_min, k_max + panel, panel)
    r, w = composite_nodes(edges, n_per_panel)
    sph = make_sphere(3, sphere_degree)
    pts = (r[:, None, None] * sph.points[None, :, :]).reshape(-1, 3)
    ww = (w[:, None] * r[:, None] ** 2 * sph.weights[None, :]).ravel()
    return StateGrid(pts, ww, float(k_min), float(k_max))


def _abs_p(points, s, dim):
    r = np.abs(points) if dim == 1 else np.linalg.norm(points, axis=-1)
    with np.errstate(divide="ignore"):
        return r ** float(s)


def _samples(state, grid):
    """Per eigenfunction: values, X-images and XX-images on the grid."""
    p = grid.points
    out = []
    for f in state.funcs:
        if state.dim == 1:
            v = f(p)
            X = [1j * f.deriv()(p)]                  # X f = i f'
            XX = [[-f.deriv(2)(p)]]                  # X X f = -f''
        else:
            v = f(p)
            g = f.grad(p)
            H = f.hess(p)
            X = [1j * g[:, i] for i in range(3)]
            XX = [[-H[:, i, j] for j in range(3)] for i in range(3)]
        out.append((v, X, XX))
    return out


def wtn_summands(state, grid):
    n = state.dim
    eps = (0, 1) if n == 1 else (-1, 0, 1)
    w = grid.weights
    smp = _samples(state, grid)
    b = state.betas
    res = {}
    U = np.array([bj * s[0] for bj, s in zip(b, smp)])
    V = np.array([s[0] for s in smp])
    res["rho"] = trace_norm_factored(U, V, w)
    double = 0.0
    sand = 0.0
    for e in eps:
        wp = _abs_p(grid.points, n - 2 + e, n)
        for i in range(n):
            for j in range(n):
                # [X_i,[X_j,ρ]] = X_iX_jρ - X_iρX_j - X_jρX_i + ρX_jX_i
                Us, Vs = [], []
                for bj, (v, X, XX) in zip(b, smp):
                    Us += [bj * XX[i][j], -bj * X[i], -bj * X[j], bj * v]
                    Vs += [v, X[j], X[i], XX[j][i]]
                Us = np.array(Us) * wp
                double += trace_norm_factored(Us, np.array(Vs), w)
        for j in range(n):
            Us = np.array([bj * X[j] * wp for bj, (v, X, XX) in zip(b, smp)])
            Vs = np.array([X[j] * wp for (v, X, XX) in smp])
            sand += trace_norm_factored(Us, Vs, w)
    res["double_commutator"] = double
    res["position_sandwich"] = sand
    wp = _abs_p(grid.points, 2 * (n - 2), n)
    res["momentum_sandwich"] = trace_norm_factored(
        np.array([bj * s[0] * wp for bj, s in zip(b, smp)]),
        np.array([s[0] * wp for s in smp]), w)
    return res


@dataclass
class WtnReport:
    total: float
    summands: dict
    refined_total: float
    diverged: bool


def wtn_report(state, grid=None, rel_tol=0.01):
    """Weighted trace norm with a divergence probe.

    Dim 1 halves k_min (the |P|^{-1} weights probe the k = 0 region); dim 3
    doubles k_max (the positive powers probe the tail).  A relative change
    above rel_tol marks the norm as diverged.
    """
    if state.dim not in (1, 3):
        raise UsageError("weighted trace norm is defined for dims 1 and 3")
    if grid is None:
        grid = state_grid(state)
    s = wtn_summands(state, grid)
    total = float(sum(s.values()))
    if state.dim == 1:
        g2 = state_grid(state, k_min=grid.k_min / 2, k_max=grid.k_max)
    else:
        g2 = state_grid(state, k_min=grid.k_min, k_max=2 * grid.k_max)
    t2 = float(sum(wtn_summands(state, g2).values()))
    div = not np.isfinite(t2) or abs(t2 - total) > rel_tol * abs(total)
    return WtnReport(total, s, t2, bool(div))


def wtn_norm(state, grid=None):
    rep = wtn_report(state, grid)
    if rep.diverged:
        raise DivergenceError(
            f"weighted trace norm of state {state.name!r} diverges "
            f"(grid value {rep.total:.6g}, refined {rep.refined_total:.6g})")
    return rep.total


def trace_norm(state, grid=None, power=0.0):
    """‖|P|^s ρ |P|^s‖₁ via the Gram method."""
    if grid is None:
        grid = state_grid(state)
    wp = _abs_p(grid.points, power, state.dim)
    U = np.array([b * f(grid.points) * wp for b, f in zip(state.betas, state.funcs)])
    V = np.array([f(grid.points) * wp for f in state.funcs])
    return trace_norm_factored(U, V, grid.weights)


def trace_norm_left(state, grid=None, power=0.0):
    """‖|P|^s ρ‖₁ via the Gram method."""
    if grid is None:
        grid = state_grid(state)
    wp = _abs_p(grid.points, power, state.dim)
    U = np.array([b * f(grid.points) * wp for b, f in zip(state.betas, state.funcs)])
    V = np.array([f(grid.points) for f in state.funcs])
    return trace_norm_factored(U, V, grid.weights)


def diagonal_moment(state, grid=None, power=0.0):
    """∫ dk ρ(k,k) |k|^{2s}."""
    if grid is None:
        grid = state_grid(state)
    p = grid.points
    wp = _abs_p(p, 2 * power, state.dim)
    return float(np.sum(grid.weights * wp * np.real(kernel(state, p, p))))
