"""Closed-form 1-D function family: finite sums of polynomial times Gaussian.

    f(x) = sum_t p_t(x) exp(-(x - c_t)^2 / (2 w_t^2))

The family is closed under differentiation, multiplication by polynomials,
scaling and conjugation, and its L2 inner products are exact (Gaussian
moments).  Wave packets, their derivatives, and radial profiles of the
dim-3 states are all built from it.
"""
import numpy as np
from numpy.polynomial import polynomial as npoly


def gauss_moments(m, mu, s):
    """E[X^j] for X ~ N(mu, s^2), j = 0..m (complex mu allowed)."""
    out = np.zeros(m + 1, dtype=complex)
    out[0] = 1.0
    if m >= 1:
        out[1] = mu
    for j in range(2, m + 1):
        out[j] = mu * out[j - 1] + (j - 1) * s**2 * out[j - 2]
    return out


def _horner(x, coeffs):
    """Real polynomial (coefficients low->high) at real x."""
    out = np.full(x.shape, coeffs[-1])
    for c in coeffs[-2::-1]:
        out = out * x + c
    return out


class GaussPoly:
    __slots__ = ("terms",)

    def __init__(self, terms):
        # terms: list of (coeffs low->high, center, width)
        self.terms = tuple((np.asarray(p, dtype=complex), float(c), float(w)) for p, c, w in terms)

    @classmethod
    def gaussian(cls, center=0.0, width=1.0, power=0, amp=1.0):
        p = np.zeros(power + 1, dtype=complex)
        p[power] = amp
        return cls([(p, center, width)])

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        re = np.zeros(x.shape)
        im = None
        for p, c, w in self.terms:
            e = np.exp(-0.5 * ((x - c) / w) ** 2)
            re += _horner(x, p.real) * e
            if np.any(p.imag):
                im = (0 if im is None else im) + _horner(x, p.imag) * e
        return re + 0j if im is None else re + 1j * im

    def deriv(self, order=1):
        f = self
        for _ in range(order):
            new = []
            for p, c, w in f.terms:
                # (p e)' = p' e - p (x - c)/w^2 e
                dp = npoly.polyder(p) if len(p) > 1 else np.zeros(1, dtype=complex)
                q = npoly.polymul(p, np.array([-c, 1.0])) / w**2
                new.append((npoly.polysub(dp, q), c, w))
            f = GaussPoly(new)
        return f

    def mul_poly(self, coeffs):
        coeffs = np.asarray(coeffs, dtype=complex)
        return GaussPoly([(npoly.polymul(p, coeffs), c, w) for p, c, w in self.terms])

    def mul_x(self, power=1):
        q = np.zeros(power + 1)
        q[power] = 1.0
        return self.mul_poly(q)

    def scale(self, a):
        return GaussPoly([(a * p, c, w) for p, c, w in self.terms])

    def conj(self):
        return GaussPoly([(np.conj(p), c, w) for p, c, w in self.terms])

    def reflect(self):
        """x -> f(-x)."""
        out = []
        for p, c, w in self.terms:
            q = p * (-1.0) ** np.arange(len(p))
            out.append((q, -c, w))
        return GaussPoly(out)

    def shift(self, a):
        """x -> f(x - a)."""
        out = []
        for p, c, w in self.terms:
            # p(x - a) via Horner on the shifted variable
            q = np.zeros(1, dtype=complex)
            for coef in p[::-1]:
                q = npoly.polyadd(npoly.polymul(q, np.array([-a, 1.0])), np.array([coef]))
            out.append((q, c + a, w))
        return GaussPoly(out)

    def __add__(self, other):
        return GaussPoly(self.terms + other.terms)

    def __sub__(self, other):
        return self + other.scale(-1.0)

    def __neg__(self):
        return self.scale(-1.0)

    def inner(self, other):
        """<self, other> = int conj(self(x)) other(x) dx over the real line."""
        tot = 0j
        for p1, c1, w1 in self.terms:
            for p2, c2, w2 in other.terms:
                s2 = 1.0 / (1.0 / w1**2 + 1.0 / w2**2)
                mu = s2 * (c1 / w1**2 + c2 / w2**2)
                pref = np.exp(-0.5 * (c1 - c2) ** 2 / (w1**2 + w2**2)) * np.sqrt(2 * np.pi * s2)
                prod = npoly.polymul(np.conj(p1), p2)
                mom = gauss_moments(len(prod) - 1, mu, np.sqrt(s2))
                tot += pref * np.dot(prod, mom)
        return complex(tot)

    def norm(self):
        return float(np.sqrt(max(self.inner(self).real, 0.0)))

    def extent(self, tol=1e-16):
        """Half-width beyond which every term is below tol (relative to its peak).

        Used to pick quadrature windows.
        """
        r = 0.0
        for p, c, w in self.terms:
            deg = len(p) - 1
            # polynomial growth: add a margin ~ sqrt(2 deg) widths
            t = w * (np.sqrt(-2 * np.log(tol)) + np.sqrt(2 * max(deg, 0)) + 1)
            r = max(r, abs(c) + t)
        return r


def orthonormalize(funcs):
    """Exact Loewdin (symmetric) orthonormalization of a list of GaussPoly."""
    n = len(funcs)
    G = np.array([[funcs[i].inner(funcs[j]) for j in range(n)] for i in range(n)])
    ev, Q = np.linalg.eigh(G)
    T = Q @ np.diag(ev**-0.5) @ Q.conj().T
    out = []
    for j in range(n):
        acc = None
        for i in range(n):
            t = funcs[i].scale(T[i, j])
            acc = t if acc is None else acc + t
        out.append(acc)
    return out


def hermite_functions(x, m, scale=1.0):
    """Orthonormal Hermite functions h_0..h_{m-1} of x/scale (rows), L2-normalized in x."""
    y = np.asarray(x, dtype=float) / scale
    H = np.zeros((m,) + y.shape)
    H[0] = np.pi**-0.25 * np.exp(-0.5 * y**2)
    if m > 1:
        H[1] = np.sqrt(2.0) * y * H[0]
    for n in range(2, m):
        H[n] = np.sqrt(2.0 / n) * y * H[n - 1] - np.sqrt((n - 1) / n) * H[n - 2]
    return H / np.sqrt(scale)
