"""Heavy-particle observables, their grid realization, and operator norms.

Heavy momenta live on a LineGrid (dim 1).  A realized operator is stored as

    M = diag(d) + K W,   W = diag(weights),

i.e. a multiplication part d(p_i) plus a kernel part K(p_i, p_j); the two are
kept apart so that multiplication operators stay exact.  In the weighted inner
product <u, v> = Σ w_i conj(u_i) v_i the norm of M equals the spectral norm of
diag(d) + W^{1/2} K W^{1/2}.
"""
from dataclasses import dataclass, field

import numpy as np

from .errors import EstimationError, UnsupportedError, UsageError
from .functions import GaussPoly
from .quadrature import LineGrid, make_line


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    grid: LineGrid
    diag: np.ndarray
    kern: np.ndarray

    @classmethod
    def zeros(cls, grid):
        n = len(grid)
        return cls(grid, np.zeros(n, dtype=complex), np.zeros((n, n), dtype=complex))

    @classmethod
    def identity(cls, grid):
        n = len(grid)
        return cls(grid, np.ones(n, dtype=complex), np.zeros((n, n), dtype=complex))

    @classmethod
    def from_dense(cls, grid, M):
        """Wrap a plain matrix (entries already include the column weights)."""
        w = grid.weights
        return cls(grid, np.zeros(len(w), dtype=complex), np.asarray(M, dtype=complex) / w[None, :])

    @property
    def matrix(self):
        return np.diag(self.diag) + self.kern * self.grid.weights[None, :]

    def sym(self):
        """Similarity transform W^{1/2} M W^{-1/2}: plain spectral norm applies."""
        sw = np.sqrt(self.grid.weights)
        return np.diag(self.diag) + sw[:, None] * self.kern * sw[None, :]

    def _check(self, other):
        if other.grid is not self.grid and not (
                len(other.grid) == len(self.grid)
                and np.array_equal(other.grid.nodes, self.grid.nodes)
                and np.array_equal(other.grid.weights, self.grid.weights)):
            raise UsageError("operator matrices live on different grids")

    def __add__(self, other):
        self._check(other)
        return OperatorMatrix(self.grid, self.diag + other.diag, self.kern + other.kern)

    def __sub__(self, other):
        self._check(other)
        return OperatorMatrix(self.grid, self.diag - other.diag, self.kern - other.kern)

    def __neg__(self):
        return OperatorMatrix(self.grid, -self.diag, -self.kern)

    def scale(self, a):
        return OperatorMatrix(self.grid, a * self.diag, a * self.kern)

    __mul__ = scale
    __rmul__ = scale

    def adjoint(self):
        return OperatorMatrix(self.grid, self.diag.conj(), self.kern.conj().T)

    def __matmul__(self, other):
        self._check(other)
        w = self.grid.weights
        d1, k1, d2, k2 = self.diag, self.kern, other.diag, other.kern
        kern = d1[:, None] * k2 + k1 * d2[None, :] + (k1 * w[None, :]) @ k2
        return OperatorMatrix(self.grid, d1 * d2, kern)

    def apply(self, v):
        return self.diag * v + self.kern @ (self.grid.weights * v)

    def hermitian_defect(self):
        A = self.sym()
        return float(np.linalg.norm(A - A.conj().T, 2))

    def compress(self, basis_values):
        """<b_a | M | b_b> for basis functions sampled on the grid (rows)."""
        w = self.grid.weights
        B = np.asarray(basis_values)
        MB = np.array([self.apply(b) for b in B])
        return (B.conj() * w[None, :]) @ MB.T


# --------------------------------------------------------------------------
# norms


def dense_norm(mat):
    return float(np.linalg.norm(mat.sym(), 2))


def power_norm(apply, apply_adj, n, tol=1e-10, max_iter=10_000, seed=0, dtype=complex):
    """Largest singular value by power iteration on A^* A (matrix-free).

    Converged when the Rayleigh quotient changes by less than tol (relative)
    and the eigen-residual is below sqrt(tol) relative; for this Hermitian
    problem the quotient error is then of order tol.
    """
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(n)
    if np.issubdtype(dtype, np.complexfloating):
        x = x + 1j * rng.standard_normal(n)
    x /= np.linalg.norm(x)
    mu_old = None
    res = np.inf
    for it in range(max_iter):
        y = apply_adj(apply(x))
        mu = float(np.real(np.vdot(x, y)))
        if mu <= 0:
            if np.linalg.norm(y) == 0:
                return 0.0
        res = np.linalg.norm(y - mu * x) / max(abs(mu), 1e-300)
        ny = np.linalg.norm(y)
        if ny == 0:
            return 0.0
        if mu_old is not None and abs(mu - mu_old) <= tol * abs(mu) and res <= np.sqrt(tol):
            return float(np.sqrt(max(mu, 0.0)))
        mu_old = mu
        x = y / ny
    raise EstimationError(f"power iteration did not converge in {max_iter} steps", residual=res)


def op_norm(mat, method="power", **kw):
    """Operator norm of an OperatorMatrix in its weighted inner product."""
    A = mat.sym() if isinstance(mat, OperatorMatrix) else np.asarray(mat)
    if not np.all(np.isfinite(A)):
        raise UsageError("operator matrix has non-finite entries")
    if method == "dense":
        return float(np.linalg.norm(A, 2))
    if method != "power":
        raise UsageError(f"unknown norm method {method!r}")
    AH = A.conj().T
    return power_norm(lambda v: A @ v, lambda v: AH @ v, A.shape[1], **kw)


# --------------------------------------------------------------------------
# observables


@dataclass(frozen=True, eq=False)
class Observable:
    """Heavy observable of one of four kinds.

    momentum:    g(P), g a GaussPoly or a callable
    shift:       e^{iaX} = τ_a, (τ_a u)(p) = u(p - a)
    finite_rank: Σ μ_m |u_m><v_m| with GaussPoly factors
    kernel:      smooth kernel G(p1, p2) with first partial derivatives
    """
    kind: str
    data: dict = field(default_factory=dict)
    name: str = "custom"
    hermitian: bool = False

    def __post_init__(self):
        if self.kind not in ("momentum", "shift", "finite_rank", "kernel"):
            raise UsageError(f"unknown observable kind {self.kind!r}")

    # -- kernel evaluation -------------------------------------------------
    def kernel(self, p1, p2):
        if self.kind == "finite_rank":
            out = 0
            for mu, u, v in self.data["terms"]:
                out = out + mu * u(p1) * np.conj(v(p2))
            return out
        if self.kind == "kernel":
            return self.data["value"](p1, p2)
        raise UnsupportedError(f"{self.kind} observable has no smooth kernel")

    def mult(self, p):
        if self.kind != "momentum":
            raise UnsupportedError("not a momentum-function observable")
        return np.asarray(self.data["g"](p), dtype=complex) * np.ones(np.shape(p))

    @property
    def terms(self):
        return self.data["terms"]

    def adjoint(self):
        if self.kind == "finite_rank":
            return Observable("finite_rank", {"terms": [(np.conj(mu), v, u) for mu, u, v in self.terms]},
                              self.name + "^*", self.hermitian)
        if self.kind == "momentum":
            g = self.data["g"]
            return Observable("momentum", {"g": lambda p: np.conj(g(p))}, self.name + "^*",
                              self.hermitian)
        if self.kind == "kernel":
            d = self.data
            return Observable("kernel", {
                "value": lambda a, b: np.conj(d["value"](b, a)),
                "d1": lambda a, b: np.conj(d["d2"](b, a)),
                "d2": lambda a, b: np.conj(d["d1"](b, a)),
            }, self.name + "^*", self.hermitian)
        return shift(-self.data["a"])

    def shifted(self, a):
        """τ_a G, composed analytically (finite-rank kind only)."""
        if self.kind != "finite_rank":
            raise UnsupportedError("analytic shift composition is implemented for finite-rank kinds")
        return Observable("finite_rank", {"terms": [(mu, u.shift(a), v) for mu, u, v in self.terms]},
                          f"tau({a})" + self.name, False)

    def extent(self):
        if self.kind == "finite_rank":
            return max(max(u.extent(1e-16), v.extent(1e-16)) for mu, u, v in self.terms)
        return self.data.get("extent", np.inf)


def identity():
    return Observable("momentum", {"g": lambda p: np.ones(np.shape(p))}, "identity", True)


def momentum_function(g, name="momentum_function", hermitian=False):
    return Observable("momentum", {"g": g}, name, hermitian)


def shift(a):
    return Observable("shift", {"a": float(a)}, f"shift({a})", False)


def gauss_packet(center=0.0, width=1.0):
    f = GaussPoly.gaussian(center, width)
    return f.scale(1 / f.norm())


def gauss_rank1(center=0.0, width=1.0):
    """Projector |u><u| onto the normalized Gaussian u centered at `center`."""
    u = gauss_packet(center, width)
    return Observable("finite_rank", {"terms": [(1.0, u, u)]}, "gauss_rank1", True)


def gauss_rank2(centers=(-1.0, 1.0), width=1.0, weights=(1.0, 0.5)):
    """Σ w_m |u_m><u_m| for two exactly orthonormalized Gaussians."""
    from .functions import orthonormalize

    us = orthonormalize([GaussPoly.gaussian(c, width) for c in centers])
    return Observable("finite_rank", {"terms": [(float(w), u, u) for w, u in zip(weights, us)]},
                      "gauss_rank2", True)


def gauss_smoother(a=1.0, b=1.0):
    """Kernel exp(-a(p1-p2)² - b(p1²+p2²))."""
    def val(p1, p2):
        return np.exp(-a * (p1 - p2) ** 2 - b * (p1**2 + p2**2)) + 0j

    def d1(p1, p2):
        return (-2 * a * (p1 - p2) - 2 * b * p1) * val(p1, p2)

    def d2(p1, p2):
        return (2 * a * (p1 - p2) - 2 * b * p2) * val(p1, p2)

    ext = np.sqrt(37.0 / b)
    return Observable("kernel", {"value": val, "d1": d1, "d2": d2, "extent": ext},
                      "gauss_smoother", True)


def radial_rank1(width=1.0):
    """Dim 3: projector onto the normalized isotropic Gaussian u(|K|) ∝ exp(-|K|²/(2w²))."""
    from .states import _radial_norm2

    u = GaussPoly.gaussian(0.0, width)
    u = u.scale(1 / np.sqrt(_radial_norm2(u)))
    return Observable("finite_rank", {"terms": [(1.0, u, u)], "dim": 3}, "radial_rank1", True)


OBSERVABLE_LIBRARY = {
    "identity": lambda: identity(),
    "gauss_rank1": gauss_rank1,
    "gauss_rank2": gauss_rank2,
    "gauss_smoother": gauss_smoother,
    "radial_rank1": radial_rank1,
}


def make_observable(spec):
    spec = dict(spec)
    name = spec.pop("observable")
    if name not in OBSERVABLE_LIBRARY:
        raise UsageError(f"unknown observable {name!r}; choose from {sorted(OBSERVABLE_LIBRARY)}")
    if "centers" in spec:
        spec["centers"] = tuple(spec["centers"])
    if "weights" in spec:
        spec["weights"] = tuple(spec["weights"])
    return OBSERVABLE_LIBRARY[name](**spec)


# --------------------------------------------------------------------------
# realization


def heavy_grid(L=26.0, panels=52, n=8):
    return make_line(-L, L, n, panels)


def realize(obs, grid):
    p = grid.nodes
    n = len(p)
    if obs.kind == "momentum":
        return OperatorMatrix(grid, obs.mult(p), np.zeros((n, n), dtype=complex))
    if obs.kind in ("finite_rank", "kernel"):
        K = obs.kernel(p[:, None], p[None, :])
        return OperatorMatrix(grid, np.zeros(n, dtype=complex), np.asarray(K, dtype=complex))
    raise UnsupportedError("shift observables are composed analytically, never realized on a grid")


def rank_one(grid, a, b):
    """Realization of |a><b| from sampled vectors."""
    return OperatorMatrix(grid, np.zeros(len(grid), dtype=complex), np.outer(a, np.conj(b)))


# --------------------------------------------------------------------------
# weighted operator norm


def _weighted_images(f, p):
    """Sampled images of a GaussPoly factor under the weights used by ‖·‖_wn."""
    X = f.deriv().scale(1j)                 # X f = i f'
    XP = f.mul_x().deriv().scale(1j)        # X P f
    pw = {e: np.abs(p) ** e * f(p) for e in range(4)}
    return {"id": f(p), "X": X(p), "XP": XP(p), "P": pw}


def _wn_summands_finite_rank(obs, grid, method):
    p = grid.nodes
    imgs = [(mu, _weighted_images(u, p), _weighted_images(v, p)) for mu, u, v in obs.terms]

    def norm_of(left, right):
        M = OperatorMatrix.zeros(grid)
        for mu, iu, iv in imgs:
            M = M + rank_one(grid, mu * left(iu), right(iv))
        return op_norm(M, method=method)

    s = {"G": norm_of(lambda i: i["id"], lambda i: i["id"])}
    # |X| = sgn(X) X with sgn(X) unitary, hence ‖|X|G‖ = ‖XG‖ and ‖G|X|‖ = ‖GX‖.
    s["absX_G"] = norm_of(lambda i: i["X"], lambda i: i["id"])
    s["G_absX"] = norm_of(lambda i: i["id"], lambda i: i["X"])
    # G P X = (X P G^*)^*:  right factor of |u><v| P X is X P v
    s["XP_G"] = norm_of(lambda i: i["XP"], lambda i: i["id"])
    s["G_PX"] = norm_of(lambda i: i["id"], lambda i: i["XP"])
    for e1 in range(4):
        for e2 in range(4 - e1):
            s[f"P{e1}_G_P{e2}"] = norm_of(lambda i, e=e1: i["P"][e], lambda i, e=e2: i["P"][e])
    return s


def _wn_summands_kernel(obs, grid, method):
    p = grid.nodes
    P1, P2 = p[:, None], p[None, :]
    d = obs.data
    G = d["value"](P1, P2)
    g1 = d["d1"](P1, P2)
    g2 = d["d2"](P1, P2)
    z = np.zeros(len(p), dtype=complex)

    def nm(K):
        return op_norm(OperatorMatrix(grid, z, K), method=method)

    s = {"G": nm(G)}
    s["absX_G"] = nm(1j * g1)                 # (XG)(p1,p2) = i ∂1 G
    s["G_absX"] = nm(-1j * g2)                # (GX)(p1,p2) = -i ∂2 G
    s["XP_G"] = nm(1j * (G + P1 * g1))        # X (p1 G)
    s["G_PX"] = nm(-1j * (G + P2 * g2))       # (G P X)(p1,p2) = -i ∂2 (p2 G)
    for e1 in range(4):
        for e2 in range(4 - e1):
            s[f"P{e1}_G_P{e2}"] = nm(np.abs(P1) ** e1 * G * np.abs(P2) ** e2)
    return s


def _wn_summands_momentum(obs, grid, method):
    p = grid.nodes
    g = obs.mult(p)
    s = {"G": float(np.max(np.abs(g)))}
    # X g(P) and g(P) X are unbounded unless g = 0
    zero = bool(np.all(g == 0))
    for key in ("absX_G", "G_absX", "XP_G", "G_PX"):
        s[key] = 0.0 if zero else np.inf
    for e1 in range(4):
        for e2 in range(4 - e1):
            s[f"P{e1}_G_P{e2}"] = float(np.max(np.abs(p) ** (e1 + e2) * np.abs(g)))
    return s


def wn_summands(obs, grid, method="dense"):
    if obs.kind == "finite_rank":
        return _wn_summands_finite_rank(obs, grid, method)
    if obs.kind == "kernel":
        return _wn_summands_kernel(obs, grid, method)
    if obs.kind == "momentum":
        return _wn_summands_momentum(obs, grid, method)
    raise UnsupportedError("weighted norm of a shift: unbounded position weights, not supported")


@dataclass
class WnReport:
    total: float
    summands: dict
    refined_total: float
    diverged: bool


def wn_report(obs, grid, dim=1, rel_tol=0.01, method="dense"):
    """‖G‖_wn with a grid-extension probe: doubling the momentum window must
    change the total by less than rel_tol, otherwise the norm is marked diverged."""
    if dim != 1:
        raise UnsupportedError("weighted operator norm is realized in dim 1")
    s = wn_summands(obs, grid, method)
    total = float(sum(s.values()))
    g2 = grid.extended(2)
    s2 = wn_summands(obs, g2, method)
    t2 = float(sum(s2.values()))
    div = not (np.isfinite(total) and np.isfinite(t2)) or abs(t2 - total) > rel_tol * abs(total)
    return WnReport(total, s, t2, bool(div))


def wn_norm(obs, grid, dim=1):
    from .errors import DivergenceError

    rep = wn_report(obs, grid, dim)
    if rep.diverged:
        raise DivergenceError(f"weighted operator norm of {obs.name!r} diverges "
                              f"(grid value {rep.total:.6g}, extended {rep.refined_total:.6g})")
    return rep.total
