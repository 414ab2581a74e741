"""Quadrature rules: radial/line Gauss-Legendre rules, sphere rules, SO(3) rules.

All rules are immutable after construction.  No rule places a node at radial 0.
"""
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss

from .errors import UsageError


@dataclass(frozen=True, eq=False)
class RadialGrid:
    """Positive nodes on (0, k_max] with positive weights."""
    nodes: np.ndarray
    weights: np.ndarray
    k_max: float

    def integrate(self, values):
        return np.tensordot(np.asarray(values), self.weights, axes=([-1], [0]))

    def __len__(self):
        return len(self.nodes)


@dataclass(frozen=True, eq=False)
class LineGrid:
    """Nodes on a bounded interval of the real line (used for heavy momenta)."""
    nodes: np.ndarray
    weights: np.ndarray
    lo: float = None
    hi: float = None
    panels: int = None
    n_per_panel: int = None

    def refined(self, factor=2):
        """Same window, `factor` times as many panels."""
        return make_line(self.lo, self.hi, self.n_per_panel, self.panels * factor)

    def extended(self, factor=2):
        """Window scaled by `factor` at the same panel width."""
        return make_line(factor * self.lo, factor * self.hi, self.n_per_panel, self.panels * factor)

    def integrate(self, values):
        return np.tensordot(np.asarray(values), self.weights, axes=([-1], [0]))

    def __len__(self):
        return len(self.nodes)


@dataclass(frozen=True, eq=False)
class SphereRule:
    dim: int
    points: np.ndarray   # (m,) signs in dim 1, (m, 3) unit vectors in dim 3
    weights: np.ndarray  # sum to the surface area s_n

    def __len__(self):
        return len(self.weights)


@dataclass(frozen=True, eq=False)
class RotationRule:
    dim: int
    rotations: np.ndarray  # (m,) signs in dim 1, (m, 3, 3) matrices in dim 3
    weights: np.ndarray    # sum to 1 (normalized Haar measure)

    def __len__(self):
        return len(self.weights)


def _gl(n):
    if n < 1:
        raise UsageError(f"quadrature order must be >= 1, got {n}")
    x, w = leggauss(int(n))
    return x, w


def gl_interval(a, b, n):
    x, w = _gl(n)
    half = 0.5 * (b - a)
    return a + half * (x + 1.0), half * w


def make_radial(k_min, k_max, n):
    """Gauss-Legendre rule on [k_min, k_max]; exact for degree 2n-1."""
    if not (np.isfinite(k_min) and np.isfinite(k_max)) or not 0 < k_min < k_max:
        raise UsageError(f"need 0 < k_min < k_max, got k_min={k_min}, k_max={k_max}")
    if n < 2:
        raise UsageError(f"need n >= 2 nodes, got {n}")
    x, w = gl_interval(k_min, k_max, n)
    return RadialGrid(x, w, float(k_max))


def composite_nodes(edges, n_per_panel):
    edges = np.asarray(edges, dtype=float)
    if edges.ndim != 1 or len(edges) < 2 or np.any(np.diff(edges) <= 0):
        raise UsageError("panel edges must be strictly increasing")
    xs, ws = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        x, w = gl_interval(a, b, n_per_panel)
        xs.append(x)
        ws.append(w)
    return np.concatenate(xs), np.concatenate(ws)


def graded_edges(k_max, panel=0.5, k_first=1e-4, n_grade=None):
    """Panel edges on [0, k_max]: geometric grading toward 0, then uniform panels.

    The grading resolves the peak of the scattering coefficient near k = 0,
    whose width is set by the (small) effective coupling.
    """
    if n_grade is None:
        n_grade = max(1, int(np.ceil(np.log10(panel / k_first))))
    grade = np.geomspace(k_first, panel, n_grade + 1)
    uniform = np.arange(panel, k_max + 0.5 * panel, panel)[1:]
    return np.concatenate([[0.0], grade, uniform])


def composite_radial(edges, n_per_panel):
    """Composite Gauss-Legendre rule on [edges[0], edges[-1]] (edges[0] >= 0)."""
    if edges[0] < 0:
        raise UsageError("radial panels must start at a non-negative edge")
    x, w = composite_nodes(edges, n_per_panel)
    return RadialGrid(x, w, float(edges[-1]))


def make_line(lo, hi, n, panels=1):
    """Composite Gauss-Legendre rule on [lo, hi] with equal panels."""
    if not lo < hi:
        raise UsageError(f"need lo < hi, got {lo}, {hi}")
    x, w = composite_nodes(np.linspace(lo, hi, panels + 1), n)
    return LineGrid(x, w, float(lo), float(hi), int(panels), int(n))


def make_sphere(dim, degree=8):
    """Sphere rule with weights summing to the surface area s_n.

    dim 1: the counting measure on {+1, -1}.  dim 3: Gauss-Legendre in
    cos(theta) times the uniform rule in phi, exact for spherical harmonics
    up to `degree`.
    """
    if dim == 1:
        return SphereRule(1, np.array([1.0, -1.0]), np.array([1.0, 1.0]))
    if dim != 3:
        raise UsageError(f"sphere rule only in dims 1 and 3, got {dim}")
    nt = degree // 2 + 1
    nphi = degree + 1
    ct, wt = _gl(nt)
    phi = 2 * np.pi * np.arange(nphi) / nphi
    st = np.sqrt(1 - ct**2)
    pts = np.stack([
        np.outer(st, np.cos(phi)).ravel(),
        np.outer(st, np.sin(phi)).ravel(),
        np.repeat(ct, nphi),
    ], axis=1)
    w = np.repeat(wt, nphi) * (2 * np.pi / nphi)
    return SphereRule(3, pts, w)


def _rz(a):
    c, s = np.cos(a), np.sin(a)
    out = np.zeros(np.shape(a) + (3, 3))
    out[..., 0, 0] = c
    out[..., 0, 1] = -s
    out[..., 1, 0] = s
    out[..., 1, 1] = c
    out[..., 2, 2] = 1
    return out


def _ry(b):
    c, s = np.cos(b), np.sin(b)
    out = np.zeros(np.shape(b) + (3, 3))
    out[..., 0, 0] = c
    out[..., 0, 2] = s
    out[..., 2, 0] = -s
    out[..., 2, 2] = c
    out[..., 1, 1] = 1
    return out


def make_rotations(dim, resolution=6):
    """Rule for the normalized Haar measure on SO(n).

    dim 1: {+1, -1} with weight 1/2 each (the rotation group of the line is
    treated as the orthogonal group, matching the two-point sphere).
    dim 3: ZYZ Euler angles, uniform in the two azimuths and Gauss-Legendre in
    cos(beta); `resolution` nodes per angle.
    """
    if dim == 1:
        return RotationRule(1, np.array([1.0, -1.0]), np.array([0.5, 0.5]))
    if dim != 3:
        raise UsageError(f"rotation rule only in dims 1 and 3, got {dim}")
    n = int(resolution)
    if n < 1:
        raise UsageError("resolution must be >= 1")
    az = 2 * np.pi * np.arange(n) / n
    cb, wb = _gl(n)
    beta = np.arccos(cb)
    A, B, C = np.meshgrid(az, beta, az, indexing="ij")
    W = np.broadcast_to(wb[None, :, None], A.shape) / (2.0 * n * n)
    R = _rz(A.ravel()) @ _ry(B.ravel()) @ _rz(C.ravel())
    return RotationRule(3, R, W.ravel().copy())


def check_shifted_kernel_bound(eta, A, Ap, a, ap, grid):
    """Slack of the bound  int |eta(Ax+a, A'x+a')| dx <= (1/|det A| + 1/|det A'|)/2 * ||eta||_1.

    eta: list of (lam_j, f_j, g_j) with callables on arrays of points of shape
    (m, n), meaning eta = sum_j lam_j |f_j><g_j|.  grid: (points (m, n), weights (m,))
    used both for the x-integral and for the Gram matrices of the trace norm.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    Ap = np.atleast_2d(np.asarray(Ap, dtype=float))
    dA, dAp = np.linalg.det(A), np.linalg.det(Ap)
    if abs(dA) < 1e-300 or abs(dAp) < 1e-300:
        raise UsageError("A and A' must be invertible")
    pts, w = grid
    pts = np.asarray(pts, dtype=float).reshape(len(w), -1)
    a = np.atleast_1d(np.asarray(a, dtype=float))
    ap = np.atleast_1d(np.asarray(ap, dtype=float))
    if not eta:
        return 0.0
    from .linalg import trace_norm_factored

    x1 = pts @ A.T + a
    x2 = pts @ Ap.T + ap
    val = np.zeros(len(w), dtype=complex)
    for lam, f, g in eta:
        val += lam * f(x1) * np.conj(g(x2))
    lhs = float(np.sum(w * np.abs(val)))
    U = np.array([lam * f(pts) for lam, f, g in eta])
    V = np.array([g(pts) for lam, f, g in eta])
    tn = trace_norm_factored(U, V, w)
    rhs = 0.5 * (1 / abs(dA) + 1 / abs(dAp)) * tn
    return rhs - lhs
