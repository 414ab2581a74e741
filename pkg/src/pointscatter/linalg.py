"""Small dense linear-algebra helpers (Gram-matrix trace norms, PSD roots)."""
import numpy as np


def psd_sqrt(G):
    """Hermitian square root of a positive semidefinite matrix."""
    G = 0.5 * (G + G.conj().T)
    ev, Q = np.linalg.eigh(G)
    ev = np.clip(ev, 0.0, None)
    return (Q * np.sqrt(ev)) @ Q.conj().T


def gram(U, w):
    """Gram matrix <u_m, u_n> = sum_i w_i conj(u_m[i]) u_n[i].

    U has shape (M, npts) or (M, ncomp, npts); components are summed.
    """
    U = np.asarray(U)
    U2 = U.reshape(U.shape[0], -1)
    wr = np.broadcast_to(np.asarray(w), U.shape[1:]).reshape(-1)
    return (U2.conj() * wr) @ U2.T


def trace_norm_factored(U, V, w):
    """Trace norm of sum_m |u_m><v_m| from sampled factors.

    Exact for finite rank: only Gram matrices of the factors are needed.
    """
    return float(np.sum(cross_singular_values(U, V, w)))


def cross_singular_values(U, V, w):
    # T = Ut Vt^*, Ut = Qu Gu^{1/2}, Vt = Qv Gv^{1/2}  =>  sv(T) = sv(Gu^{1/2} Gv^{1/2})
    Gu = gram(U, w)
    Gv = gram(V, w)
    M = psd_sqrt(Gu) @ psd_sqrt(Gv)
    return np.linalg.svd(M, compute_uv=False)
