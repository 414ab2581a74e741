"""Closed-form point-interaction scattering coefficients and their small-λ expansion.

Conventions: the coupling is a repulsive resonance constant α₀ (dim 1, units of
momentum) or a scattering length l₀ (dims 2, 3).  The mass ratio λ enters only
through the effective couplings α = λα₀/(1+λ) and l = λl₀/(1+λ).
"""
from dataclasses import dataclass

import numpy as np

from .errors import ConsistencyError, DomainError, UsageError

EULER_GAMMA = float(np.euler_gamma)

# Surface area of the unit sphere; s_1 is the counting measure on {+1, -1}.
SURFACE = {1: 2.0, 2: 2 * np.pi, 3: 4 * np.pi}


@dataclass(frozen=True)
class ScatteringParams:
    dim: int
    coupling: float
    lam: float = 0.0

    def __post_init__(self):
        if self.dim not in (1, 2, 3):
            raise UsageError(f"dim must be 1, 2 or 3, got {self.dim}")
        if not (np.isfinite(self.coupling) and self.coupling > 0):
            raise UsageError(f"coupling must be positive, got {self.coupling}")
        # λ = 1 is allowed for standalone coefficient evaluation; the maps
        # themselves require λ < 1 (see require_map_lambda).
        if not (np.isfinite(self.lam) and 0 <= self.lam <= 1):
            raise UsageError(f"lambda must lie in [0, 1], got {self.lam}")

    def with_lambda(self, lam):
        return ScatteringParams(self.dim, self.coupling, lam)

    @property
    def effective_coupling(self):
        """α (dim 1) or l (dims 2, 3) at this λ."""
        return self.lam * self.coupling / (1 + self.lam)

    @property
    def c_n(self):
        """Expansion constant built from the unscaled coupling: α₀, πl₀, 2l₀."""
        return {1: 1.0, 2: np.pi, 3: 2.0}[self.dim] * self.coupling

    @property
    def s_n(self):
        return SURFACE[self.dim]


def require_map_lambda(params):
    if not params.lam < 1:
        raise DomainError(f"the reduced map needs lambda < 1, got {params.lam}")


def _check_k(k):
    k = np.asarray(k, dtype=float)
    if np.any(~(k > 0)):
        raise DomainError("scattering coefficient needs k > 0")
    return k


def s_coeff_raw(params, k):
    """S_λ(k) without domain checks (k > 0 assumed, arrays allowed)."""
    lam = params.lam
    if lam == 0:
        return np.zeros(np.shape(k), dtype=complex)
    if params.dim == 1:
        a = lam * params.coupling / (1 + lam)
        return -1j * a / (k + 0.5j * a)
    if params.dim == 2:
        # The +iπ/2 sign is the one that gives |1 + S| = 1.
        inv_l = (1 + lam) / (lam * params.coupling)
        return -1j * np.pi / (inv_l + EULER_GAMMA + np.log(0.5 * k) + 0.5j * np.pi)
    inv_l = (1 + lam) / (lam * params.coupling)
    return -2j * k / (inv_l + 1j * k)


def s_coeff(params, k):
    """Scattering coefficient S_λ(k) for k > 0 (scalar or array)."""
    k = _check_k(k)
    out = s_coeff_raw(params, k)
    return out if out.ndim else complex(out)


def s_coeff_taylor(params, k, order):
    """Order-1 or order-2 truncation of S_λ(k) in λ.

    Coefficients come from expanding the closed forms in λ at fixed α₀/l₀:
      dim 1: S = -iλα₀/((1+λ)k + iλα₀/2)
      dim 3: S = -2iλl₀k/((1+λ) + iλl₀k)
      dim 2: S = -iπλl₀/((1+λ) + λl₀(γ + ln(k/2) + iπ/2))
    which gives -iλ(1-λ)c_n k^{n-2} - λ²c_n²k^{2(n-2)}/2 and, in dim 2,
    the extra +iπλ²l₀²(γ + ln(k/2)).
    """
    if order not in (1, 2):
        raise UsageError(f"order must be 1 or 2, got {order}")
    k = _check_k(k)
    lam, n, c = params.lam, params.dim, params.c_n
    kp = k ** (n - 2)
    out = -1j * lam * (1 - lam) * c * kp
    if order == 2:
        out = out - 0.5 * lam**2 * c**2 * kp**2
        if n == 2:
            out = out + 1j * np.pi * lam**2 * params.coupling**2 * (EULER_GAMMA + np.log(0.5 * k))
    out = np.asarray(out, dtype=complex)
    return out if out.ndim else complex(out)


# --------------------------------------------------------------------------
# Boundedness checks used in the third-order error estimate


def check_use_inequalities(params, k, K):
    """Right-minus-left slacks of the four elementary inequalities.

    Dim 1 (k, K real):
      item1: 1/sqrt((k-λK)² + α₀²λ²/4) <= 2 sqrt(K² + α₀²/4)/(α₀|k|) <= (2|K|+α₀)/(α₀|k|)
      item2: |S_λ(|k-λK|/(1+λ))| <= λ(2|K|+α₀)/|k|
      item3: |S_λ(|k-λK|/(1+λ)) + iα₀λ/|k|| <= λ²|K|(2|K|+α₀)/k²
    Dim 3 (k, K 3-vectors):
      item4: |S_λ(|k-λK|/(1+λ)) + 2il₀λ|k|| <= 4λ²l₀(1+l₀|k|)(|k|+|K|)/(1+λ)²
    Items not applicable to params.dim are reported as None.  Slacks of the
    dim-1 item 1 chain are the minimum over its two links.  Also reported:
    `item3_corrected`, the slack against λ²(2|K|+α₀)²/(2k²).  The item-3 bound
    fails near K = 0, where its right side vanishes but the remainder is O(λ²);
    the corrected bound keeps that λ² term.
    """
    lam = params.lam
    if params.dim == 1:
        k = float(k)
        K = float(K)
        if k == 0:
            raise DomainError("need k != 0")
        a0 = params.coupling
        left1 = 1 / np.sqrt((k - lam * K) ** 2 + a0**2 * lam**2 / 4)
        mid1 = 2 * np.sqrt(K**2 + a0**2 / 4) / (a0 * abs(k))
        right1 = (2 * abs(K) + a0) / (a0 * abs(k))
        x = abs(k - lam * K) / (1 + lam)
        S = s_coeff_raw(params, x) if x > 0 else (-2.0 + 0j if lam > 0 else 0j)
        item2 = lam * (2 * abs(K) + a0) / abs(k) - abs(S)
        rem = abs(S + 1j * a0 * lam / abs(k))
        item3 = lam**2 * abs(K) * (2 * abs(K) + a0) / k**2 - rem
        item3c = lam**2 * (2 * abs(K) + a0) ** 2 / (2 * k**2) - rem
        return {"item1": float(min(mid1 - left1, right1 - mid1)), "item2": float(item2),
                "item3": float(item3), "item3_corrected": float(item3c), "item4": None}
    if params.dim == 3:
        k = np.asarray(k, dtype=float).reshape(3)
        K = np.asarray(K, dtype=float).reshape(3)
        nk = np.linalg.norm(k)
        if nk == 0:
            raise DomainError("need k != 0")
        l0 = params.coupling
        x = np.linalg.norm(k - lam * K) / (1 + lam)
        S = s_coeff_raw(params, x) if x > 0 else 0j
        left = abs(S + 2j * l0 * lam * nk)
        right = lam**2 * 4 * l0 / (1 + lam) ** 2 * (1 + l0 * nk) * (nk + np.linalg.norm(K))
        return {"item1": None, "item2": None, "item3": None, "item3_corrected": None,
                "item4": float(right - left)}
    raise UsageError("inequality suite covers dims 1 and 3")


def _as_mat(sigma, n):
    return np.eye(1) * float(sigma) if n == 1 else np.asarray(sigma, dtype=float).reshape(3, 3)


def dictionary(k, P, sigma, r, lam):
    """Dictionary vectors a, v, d and the matrices used by the relations.

    D = σ(1+λ) - λr(σ-I).  The relations hold with
      R1: k + P = a/(1+rλ) + P/(1+rλ)
      R2: d = D⁻¹ v - λ D⁻¹(r + (1-r)σ) P
      R3: k + P = (1+λ)D⁻¹ v + σ(1+λ)D⁻¹ P
    D⁻¹ appears in place of scalar coefficients so that R2/R3 hold for every
    rotation σ and every r ∈ [0, 1].
    """
    k = np.atleast_1d(np.asarray(k, dtype=float))
    P = np.atleast_1d(np.asarray(P, dtype=float))
    n = len(k)
    s = _as_mat(sigma, n)
    eye = np.eye(n)
    D = (1 + lam) * s - lam * r * (s - eye)
    Dinv = np.linalg.inv(D)
    a = (1 + r * lam) * k + r * lam * P
    v = (D @ k - lam * r * (s - eye) @ P) / (1 + lam)
    d = (k - lam * P) / (1 + lam)
    mats = {
        "R2_v": Dinv,
        "R2_P": Dinv @ (r * eye + (1 - r) * s),
        "R3_v": (1 + lam) * Dinv,
        "R3_P": (1 + lam) * s @ Dinv,
    }
    return a, v, d, mats


def check_relations(k, P, sigma, r, lam, rtol=1e-12):
    a, v, d, m = dictionary(k, P, sigma, r, lam)
    k = np.atleast_1d(np.asarray(k, dtype=float))
    P = np.atleast_1d(np.asarray(P, dtype=float))
    scale = max(1.0, np.linalg.norm(k), np.linalg.norm(P))
    checks = {
        "R1": (k + P, a / (1 + r * lam) + P / (1 + r * lam)),
        "R2": (d, m["R2_v"] @ v - lam * m["R2_P"] @ P),
        "R3": (k + P, m["R3_v"] @ v + m["R3_P"] @ P),
    }
    for name, (lhs, rhs) in checks.items():
        if np.linalg.norm(lhs - rhs) > rtol * scale * 10:
            raise ConsistencyError(f"relation {name} violated at k={k}, P={P}, r={r}, lam={lam}")
    return a, v, d


def check_E_bounds(params, samples):
    """Suprema of |E1|, |E2|, |E3| over samples of (P, k, σ, r).

    Checks relations R1-R3 at every sample before evaluating.
    """
    n = params.dim
    if n not in (1, 3):
        raise UsageError("E bounds are defined for dims 1 and 3")
    lam = params.lam
    if not lam > 0:
        raise DomainError("E bounds need lambda > 0")
    d3 = 1.0 if n == 3 else 0.0
    sup = np.zeros(3)
    for P, k, sigma, r in samples:
        if not 0 <= r <= 1:
            raise UsageError("r must lie in [0, 1]")
        a, v, d = check_relations(k, P, sigma, r, lam)
        nP = np.linalg.norm(np.atleast_1d(P))
        nk = np.linalg.norm(np.atleast_1d(k))
        nd = np.linalg.norm(d)

        def sbar(x):
            return np.conj(s_coeff_raw(params, x)) if x > 0 else 0.0

        w = lambda vec: 1 / (d3 + np.linalg.norm(vec) ** (n - 2))
        e1 = w(a) / (1 + nP) * sbar(nk) / lam
        e2 = w(v) / (1 + nP) * sbar(nd) / lam
        e3 = w(np.atleast_1d(k)) / (1 + nP) * sbar(nd) / lam
        sup = np.maximum(sup, np.abs([e1, e2, e3]))
    return {"E1": float(sup[0]), "E2": float(sup[1]), "E3": float(sup[2])}


def scattering_table(params, ks):
    """Rows (k, Re S, Im S, |1+S|-1, taylor1, taylor2) for the CLI table."""
    ks = _check_k(ks)
    S = s_coeff_raw(params, ks)
    t1 = s_coeff_taylor(params, ks, 1)
    t2 = s_coeff_taylor(params, ks, 2)
    return ks, S, np.abs(1 + S) - 1, np.atleast_1d(t1), np.atleast_1d(t2)
