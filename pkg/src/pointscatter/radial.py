"""The isotropic (s-wave) sector of the heavy space in dim 3.

For an isotropic state every term of the reduced map and of its expansion
commutes with rotations, so it maps radial heavy functions to radial heavy
functions.  Operators are represented by their matrices on a finite set of
radial functions: an orthonormal oscillator basis of the s-wave sector
followed by the radial factors of the observable.  Results are compressions
to the oscillator basis, whose norms are lower bounds for the full norms.

Conventions: heavy functions u(|K|) are normalized in d³K; the position
representative is ǔ(r) = sqrt(2/π) ∫ K² j₀(Kr) u(K) dK, and P = i∇_x.
"""
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln, spherical_jn

from .errors import UnsupportedError

FOUR_PI = 4 * np.pi


def j0(z):
    return spherical_jn(0, z)


def j1(z):
    return spherical_jn(1, z)


def ho_values(K, size, scale):
    """Orthonormal s-wave oscillator functions ψ_n(|K|), n < size; shape (size, *K.shape).

    ψ_n ∝ L_n^{1/2}(K²/s²) exp(-K²/2s²), evaluated by the Laguerre recurrence.
    """
    K = np.asarray(K, dtype=float)
    x = (K / scale) ** 2
    out = np.empty((size,) + K.shape)
    a = 0.5
    lm1 = np.zeros_like(x)
    l0 = np.ones_like(x)
    e = np.exp(-0.5 * x)
    for n in range(size):
        lognorm = 0.5 * (np.log(2.0) + gammaln(n + 1) - 3 * np.log(scale) - gammaln(n + 1.5)
                         - np.log(FOUR_PI))
        out[n] = np.exp(lognorm) * l0 * e
        lm1, l0 = l0, ((2 * n + 1 + a - x) * l0 - (n + a) * lm1) / (n + 1)
    return out


class FunctionSet:
    """Oscillator basis (first `size` rows) followed by extra radial functions."""

    def __init__(self, size, scale, extra=()):
        self.size = int(size)
        self.scale = float(scale)
        self.extra = list(extra)

    def __len__(self):
        return self.size + len(self.extra)

    def __call__(self, K):
        K = np.asarray(K, dtype=float)
        rows = [ho_values(K, self.size, self.scale)]
        if self.extra:
            rows.append(np.array([np.asarray(f(K), dtype=complex) for f in self.extra]))
        return np.concatenate(rows, axis=0) if len(rows) > 1 else rows[0]

    def extent(self):
        """Radius beyond which every member is below ~1e-16 of its size."""
        K = np.linspace(0.0, 60.0 * self.scale, 6001)
        vals = np.abs(ho_values(K, self.size, self.scale))
        big = np.nonzero(np.max(vals, axis=0) > 1e-17)[0]
        ext = K[big[-1]] if len(big) else 0.0
        for f in self.extra:
            ext = max(ext, f.extent(1e-17))
        return float(ext)


def heavy_set(rules, G):
    """Function set for observable G and the index of each factor of G."""
    size, scale = rules.basis
    if G.kind == "momentum":
        g = np.asarray(G.mult(np.linspace(0.0, 10.0, 7)))
        if not np.allclose(g, g[0], rtol=0, atol=1e-15):
            raise UnsupportedError("dim-3 momentum observables are limited to multiples of I")
        return FunctionSet(size, scale), []
    if G.kind != "finite_rank":
        raise UnsupportedError(f"dim 3 supports identity and finite-rank radial observables, "
                               f"not {G.kind}")
    extra, idx = [], []
    for mu, u, v in G.terms:
        iu = size + len(extra)
        extra.append(u)
        if v is u:
            iv = iu
        else:
            iv = size + len(extra)
            extra.append(v)
        idx.append((mu, iu, iv))
    return FunctionSet(size, scale, extra), idx


@dataclass(eq=False)
class RadialSpace:
    """Sampled momentum and position representatives of a FunctionSet, plus the Gram matrix."""
    fs: FunctionSet
    idx: list
    identity_scale: complex
    K: np.ndarray
    wK: np.ndarray
    r: np.ndarray
    wr: np.ndarray
    FK: np.ndarray
    Fr: np.ndarray
    dFr: np.ndarray
    gram: np.ndarray

    @property
    def M(self):
        return self.fs.size

    def mult_matrix(self, V):
        """Matrix of the radial function V(|X|) (values on the r nodes)."""
        W = FOUR_PI * self.wr * self.r**2 * V
        return (np.conj(self.Fr) * W) @ self.Fr.T

    def anti_P_matrix(self, a):
        """Matrix of {A, P} = Σ_j {A_j, P_j} for the radial field A(x) = a(|x|) x/|x|."""
        W = FOUR_PI * self.wr * self.r**2 * a
        return 1j * ((np.conj(self.Fr) * W) @ self.dFr.T - (np.conj(self.dFr) * W) @ self.Fr.T)

    # -- compressions of products with the observable --------------------
    def G_matrix(self):
        M = self.M
        if not self.idx:
            return self.identity_scale * np.eye(M, dtype=complex)
        out = np.zeros((M, M), dtype=complex)
        for mu, iu, iv in self.idx:
            out += mu * np.outer(self.gram[:M, iu], self.gram[iv, :M])
        return out

    def left(self, O):
        """Compression of O G, O given on the full function set."""
        M = self.M
        if not self.idx:
            return self.identity_scale * O[:M, :M]
        out = np.zeros((M, M), dtype=complex)
        for mu, iu, iv in self.idx:
            out += mu * np.outer(O[:M, iu], self.gram[iv, :M])
        return out

    def right(self, O):
        """Compression of G O."""
        M = self.M
        if not self.idx:
            return self.identity_scale * O[:M, :M]
        out = np.zeros((M, M), dtype=complex)
        for mu, iu, iv in self.idx:
            out += mu * np.outer(self.gram[:M, iu], O[iv, :M])
        return out


def radial_space(rules, G):
    fs, idx = heavy_set(rules, G)
    scale = complex(np.asarray(G.mult(np.zeros(1)))[0]) if G.kind == "momentum" else 1.0
    K, wK = rules.ft_K
    r, wr = rules.ft_r
    FK = fs(K)
    kern = np.sqrt(2 / np.pi) * (wK * K**2)
    KR = np.outer(K, r)
    Fr = (FK * kern) @ j0(KR)
    dFr = (FK * kern * K) @ (-j1(KR))
    gram = FOUR_PI * (np.conj(FK) * wK * K**2) @ FK.T
    return RadialSpace(fs, idx, scale, K, wK, r, wr, FK, Fr, dFr, gram)
