"""Dim-1 heavy operators of the form

    O = m(P) + ∫_R dk τ_{2k} q(k, P),      (τ_a u)(p) = u(p - a),

which covers every λ-dependent first-order term (B̃*) and every expansion
term (V₁, A, V₂, φ(I), ½V₂ + ½{A,P}).  Shifts are composed analytically;
the grid enters only when an operator or a product with an observable is
realized.
"""
from dataclasses import dataclass

import numpy as np

from .errors import UnsupportedError
from .observables import Observable, OperatorMatrix


@dataclass(frozen=True, eq=False)
class KRule:
    """Quadrature on the full line for the shift variable k (symmetric, no node at 0)."""
    nodes: np.ndarray
    weights: np.ndarray


def symmetric_rule(r, w):
    return KRule(np.concatenate([-r[::-1], r]), np.concatenate([w[::-1], w]))


@dataclass(frozen=True, eq=False)
class ShiftOp:
    m: object        # callable P -> values (broadcasting)
    q: object        # callable (k, P) -> values; None for a pure multiplication
    krule: KRule
    name: str = "op"

    # -- algebra ---------------------------------------------------------
    def adjoint(self):
        m, q = self.m, self.q
        qa = None if q is None else (lambda k, P: np.conj(q(-k, P + 2 * k)))
        return ShiftOp(lambda P: np.conj(m(P)), qa, self.krule, self.name + "^*")

    def __add__(self, other):
        m1, m2, q1, q2 = self.m, other.m, self.q, other.q
        if q1 is None:
            q = q2
        elif q2 is None:
            q = q1
        else:
            q = lambda k, P: q1(k, P) + q2(k, P)
        return ShiftOp(lambda P: m1(P) + m2(P), q, self.krule, f"({self.name}+{other.name})")

    def scale(self, a):
        m, q = self.m, self.q
        return ShiftOp(lambda P: a * m(P), None if q is None else (lambda k, P: a * q(k, P)),
                       self.krule, f"{a}*{self.name}")

    def anticommutator_P(self):
        """{O, P} = m(P) 2P + ∫ τ_{2k} q(k, P)(2P + 2k)   (using P τ_a = τ_a (P + a))."""
        m, q = self.m, self.q
        return ShiftOp(lambda P: 2 * P * m(P),
                       None if q is None else (lambda k, P: q(k, P) * (2 * P + 2 * k)),
                       self.krule, "{" + self.name + ",P}")

    # -- action ----------------------------------------------------------
    def apply_fn(self, u, K):
        """(O u)(K) for a callable u."""
        K = np.asarray(K, dtype=float)
        out = self.m(K) * u(K)
        if self.q is not None:
            k = self.krule.nodes[:, None]
            Kp = K[None, :] - 2 * k
            out = out + np.sum(self.krule.weights[:, None] * self.q(k, Kp) * u(Kp), axis=0)
        return out

    def apply_kernel(self, G, K1, K2):
        """(O G)(K1, K2) for a callable kernel G, K1/K2 1-D node arrays."""
        out = self.m(K1)[:, None] * G(K1[:, None], K2[None, :])
        if self.q is not None:
            for k, w in zip(self.krule.nodes, self.krule.weights):
                Kp = K1 - 2 * k
                out = out + w * self.q(k, Kp)[:, None] * G(Kp[:, None], K2[None, :])
        return out

    def realize(self, grid):
        """Kernel of ∫dk τ_{2k} q(k,P): q((K1-K2)/2, K2)/2."""
        p = grid.nodes
        d = np.asarray(self.m(p), dtype=complex) * np.ones(len(p))
        if self.q is None:
            K = np.zeros((len(p), len(p)), dtype=complex)
        else:
            P1, P2 = p[:, None], p[None, :]
            K = 0.5 * self.q(0.5 * (P1 - P2), P2) * np.ones_like(P1 * P2)
        return OperatorMatrix(grid, d, np.asarray(K, dtype=complex))

    def times_mult(self, g):
        """O g(P) as a ShiftOp."""
        m, q = self.m, self.q
        return ShiftOp(lambda P: m(P) * g(P), None if q is None else (lambda k, P: q(k, P) * g(P)),
                       self.krule, self.name + "*g")


def left_product(op, G, grid):
    """Realization of O G for an Observable G."""
    p = grid.nodes
    if G.kind == "momentum":
        return op.times_mult(G.data["g"]).realize(grid)
    if G.kind == "finite_rank":
        K = 0
        for mu, u, v in G.terms:
            K = K + mu * np.outer(op.apply_fn(u, p), np.conj(v(p)))
        return OperatorMatrix(grid, np.zeros(len(p), dtype=complex), np.asarray(K, dtype=complex))
    if G.kind == "kernel":
        K = op.apply_kernel(G.kernel, p, p)
        return OperatorMatrix(grid, np.zeros(len(p), dtype=complex), K)
    raise UnsupportedError(f"{G.kind} observables are not composed with grid realizations")


def right_product(G, op, grid):
    """Realization of G O = (O^* G^*)^*."""
    return left_product(op.adjoint(), G.adjoint(), grid).adjoint()


def commutator(op, G, grid):
    return left_product(op, G, grid) - right_product(G, op, grid)


def anticommutator(op, G, grid):
    return left_product(op, G, grid) + right_product(G, op, grid)


def constant(c, krule, name="const"):
    return ShiftOp(lambda P: c * np.ones(np.shape(P)), None, krule, name)
