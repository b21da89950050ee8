"""
Deformed permutation operators on H^{(x)n}, H = C^d, as dense matrices.

A degree-n tensor is a complex vector of length d**n.  The tuple
(t_1, ..., t_n) lives at index sum_i t_i d^{n-i}, i.e. t_1 is the most
significant digit, which makes ``np.kron(f, g)`` the tensor f (x) g.

The central formula is the closed form of the operator attached to a
permutation p for a kernel M,

    (Op_p f)(t) = M_{p^{-1}}(t) f(t_p),

used for the Q-kernel (Psi_p), the R-kernel (Phi_p) and the G-kernel
(Gamma_p).  Matrices returned by the cached builders are read-only.
"""
from __future__ import annotations

import functools
import math

import numpy as np

from .kernel import MODULUS_ONE_TOL, GKernel, QKernel, RKernel, derive_r
from .permgroup import (
    Permutation,
    PermutationError,
    SizeLimitError,
    all_permutations,
    inversion_weights,
    reduced_word,
    transposition,
)

SIZE_CAP = 4096
SPECTRAL_ZERO = 1e-8


class ConsistencyError(AssertionError):
    """An internal invariant of the projection construction failed."""


def check_size(d: int, n: int, cap: int | None = None) -> None:
    cap = SIZE_CAP if cap is None else cap
    if d**n > cap:
        raise SizeLimitError(f"d**n = {d}**{n} = {d**n} exceeds size cap {cap}")


def _readonly(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


# --- tuple <-> index codec --------------------------------------------------


@functools.lru_cache(maxsize=None)
def basis_tuples(d: int, n: int) -> np.ndarray:
    """All tuples in T^n, row i holding the tuple with index i."""
    if n == 0:
        return _readonly(np.zeros((1, 0), dtype=np.intp))
    grids = np.indices((d,) * n).reshape(n, -1).T
    return _readonly(np.ascontiguousarray(grids, dtype=np.intp))


def encode(tuples: np.ndarray, d: int) -> np.ndarray:
    n = tuples.shape[-1]
    place = d ** np.arange(n - 1, -1, -1, dtype=np.intp)
    return tuples @ place


def tuple_to_index(t, d: int) -> int:
    idx = 0
    for x in t:
        if not 0 <= x < d:
            raise IndexError(f"tuple entry {x} outside 0..{d - 1}")
        idx = idx * d + int(x)
    return idx


def index_to_tuple(i: int, d: int, n: int) -> tuple[int, ...]:
    out = []
    for _ in range(n):
        i, r = divmod(i, d)
        out.append(r)
    return tuple(out[::-1])


def degree_of(f: np.ndarray, d: int) -> int:
    """The degree n with len(f) == d**n."""
    size = np.asarray(f).shape[0]
    n = 0
    while d**n < size:
        n += 1
    if d**n != size:
        raise ValueError(f"vector of length {size} is not a tensor power of {d}")
    return n


def basis_vector(d: int, t) -> np.ndarray:
    """e_{t_1} (x) ... (x) e_{t_n}."""
    v = np.zeros(d ** len(t), dtype=complex)
    v[tuple_to_index(t, d)] = 1.0
    return v


def tensor(*factors: np.ndarray) -> np.ndarray:
    out = np.ones(1, dtype=complex)
    for f in factors:
        out = np.kron(out, np.asarray(f, dtype=complex))
    return out


# --- permutation operators --------------------------------------------------


def perm_operator(M: np.ndarray, p: Permutation) -> np.ndarray:
    """Matrix of f -> M_{p^{-1}}(t) f(t_p) on H^{(x)n}, n = p.n."""
    d = M.shape[0]
    T = basis_tuples(d, p.n)
    cols = encode(T[:, p.offsets], d)
    w = inversion_weights(M, p.inverse(), T)
    op = np.zeros((T.shape[0], T.shape[0]), dtype=complex)
    op[np.arange(T.shape[0]), cols] = w
    return op


@functools.lru_cache(maxsize=256)
def _psi_k(K: QKernel, n: int, k: int) -> np.ndarray:
    return _readonly(perm_operator(K.Q, transposition(n, k)))


def psi_k(K: QKernel, n: int, k: int, *, cap: int | None = None) -> np.ndarray:
    """(Psi_k f)(..., t_k, t_{k+1}, ...) = Q(t_k, t_{k+1}) f(..., t_{k+1}, t_k, ...)."""
    if n < 2 or not 1 <= k <= n - 1:
        raise PermutationError(f"Psi_k needs n >= 2 and 1 <= k <= n-1, got n={n}, k={k}")
    check_size(K.d, n, cap)
    return _psi_k(K, n, k)


def psi_pi(K: QKernel, p: Permutation, n: int | None = None, *, cap: int | None = None) -> np.ndarray:
    """Psi_p from the closed form Q_{p^{-1}}(t) f(t_p)."""
    if n is not None and n != p.n:
        raise PermutationError(f"permutation degree {p.n} != n = {n}")
    check_size(K.d, p.n, cap)
    return perm_operator(K.Q, p)


def psi_word(K: QKernel, word, n: int, *, cap: int | None = None) -> np.ndarray:
    """Psi_{j1} Psi_{j2} ... Psi_{jm} for a word (j1, ..., jm)."""
    check_size(K.d, n, cap)
    out = np.eye(K.d**n, dtype=complex)
    for j in word:
        out = out @ psi_k(K, n, j)
    return out


def phi_pi(R: RKernel, p: Permutation) -> np.ndarray:
    return perm_operator(R.R, p)


def gamma_pi(G: GKernel, p: Permutation) -> np.ndarray:
    return perm_operator(G.G, p)


# --- symmetriser and projection --------------------------------------------


@functools.lru_cache(maxsize=64)
def _p_n(K: QKernel, n: int) -> np.ndarray:
    d = K.d
    if n <= 1:
        return _readonly(np.eye(d**n, dtype=complex))
    T = basis_tuples(d, n)
    rows = np.arange(T.shape[0])
    out = np.zeros((T.shape[0], T.shape[0]), dtype=complex)
    for p in all_permutations(n):
        cols = encode(T[:, p.offsets], d)
        out[rows, cols] += inversion_weights(K.Q, p.inverse(), T)
    out /= math.factorial(n)
    return _readonly(out)


def p_n(K: QKernel, n: int, *, cap: int | None = None) -> np.ndarray:
    """The Q-symmetriser (1/n!) sum_p Psi_p; identity for n <= 1."""
    check_size(K.d, n, cap)
    return _p_n(K, n)


def s_n_1(R: RKernel, t) -> tuple[list[Permutation], int]:
    """
    Permutations p with |R_{p^{-1}}(t)| = 1, and their number c_n(t).

    The identity always belongs, so c_n(t) >= 1.
    """
    t = np.asarray(t, dtype=np.intp)[None, :]
    members = [
        p
        for p in all_permutations(t.shape[1])
        if abs(inversion_weights(R.R, p.inverse(), t)[0]) > 0.5
    ]
    return members, len(members)


@functools.lru_cache(maxsize=64)
def _bb_p_n(K: QKernel, n: int, tol: float) -> np.ndarray:
    d = K.d
    if n <= 1:
        return _readonly(np.eye(d**n, dtype=complex))
    R = derive_r(K, tol)
    T = basis_tuples(d, n)
    perms = all_permutations(n)
    weights = np.stack([inversion_weights(R.R, p.inverse(), T) for p in perms])
    member = np.abs(weights) > 0.5
    c = member.sum(axis=0)
    out = np.zeros((T.shape[0], T.shape[0]), dtype=complex)
    for p, w, m in zip(perms, weights, member):
        rows = np.flatnonzero(m)
        cols = encode(T[rows][:, p.offsets], d)
        # c_n is constant along S_n^1-moves; the averaging relies on it
        if np.any(c[rows] != c[cols]):
            bad = rows[np.flatnonzero(c[rows] != c[cols])[0]]
            raise ConsistencyError(
                f"c_n not invariant under {p} at tuple {tuple(T[bad])}"
            )
        np.add.at(out, (rows, cols), w[rows] / c[rows])
    return _readonly(out)


def bb_p_n(
    K: QKernel, n: int, *, tol: float = MODULUS_ONE_TOL, cap: int | None = None
) -> np.ndarray:
    """
    Orthogonal projection onto the Q-quasisymmetric tensors, built row by row:

        (PP_n f)(t) = (1/c_n(t)) sum_{p in S_n^1(t)} R_{p^{-1}}(t) f(t_p).

    Identity for n <= 1.
    """
    check_size(K.d, n, cap)
    return _bb_p_n(K, n, float(tol))


@functools.lru_cache(maxsize=64)
def _r_n(K: QKernel, n: int) -> np.ndarray:
    D = K.d**n
    out = np.eye(D, dtype=complex)
    prefix = np.eye(D, dtype=complex)
    for j in range(1, n):
        prefix = prefix @ _psi_k(K, n, j)
        out += prefix
    return _readonly(out)


def r_n_operator(K: QKernel, n: int, *, cap: int | None = None) -> np.ndarray:
    """1 + Psi_1 + Psi_1 Psi_2 + ... + Psi_1 ... Psi_{n-1}."""
    if n < 1:
        raise ValueError("R_n needs n >= 1")
    check_size(K.d, n, cap)
    return _r_n(K, n)


def ker_projection_e_k(
    K: QKernel, n: int, k: int, *, tol: float = MODULUS_ONE_TOL, cap: int | None = None
) -> np.ndarray:
    """
    Orthogonal projection onto Ker(1 + Psi_k):

        (E_k f)(t) = 1/2 chi(t) [f(t) - Q(t_k, t_{k+1}) f(..., t_{k+1}, t_k, ...)]

    with chi the indicator of |Q(t_k, t_{k+1})| = 1.
    """
    P = psi_k(K, n, k, cap=cap)
    T = basis_tuples(K.d, n)
    chi = K.theta_mask(tol)[T[:, k - 1], T[:, k]].astype(float)
    return 0.5 * chi[:, None] * (np.eye(P.shape[0]) - P)


def quasisym_check(
    K: QKernel, f: np.ndarray, tol: float = 1e-10, *, modulus_tol: float = MODULUS_ONE_TOL
) -> tuple[bool, float]:
    """
    Check f(t) = Q(t_k, t_{k+1}) f(..., t_{k+1}, t_k, ...) wherever
    |Q(t_k, t_{k+1})| = 1.  Returns (ok, max residual).
    """
    d = K.d
    f = np.asarray(f, dtype=complex)
    n = degree_of(f, d)
    if n < 2:
        return True, 0.0
    T = basis_tuples(d, n)
    theta = K.theta_mask(modulus_tol)
    worst = 0.0
    for k in range(1, n):
        sel = theta[T[:, k - 1], T[:, k]]
        if not np.any(sel):
            continue
        Ts = T[sel]
        swapped = Ts.copy()
        swapped[:, [k - 1, k]] = swapped[:, [k, k - 1]]
        res = f[encode(Ts, d)] - K.Q[Ts[:, k - 1], Ts[:, k]] * f[encode(swapped, d)]
        worst = max(worst, float(np.max(np.abs(res))))
    return worst <= tol, worst


def qsym_product(K: QKernel, f: np.ndarray, g: np.ndarray, *, cap: int | None = None) -> np.ndarray:
    """The quasisymmetric tensor product PP_{n+m}(f (x) g)."""
    fg = np.kron(np.asarray(f, dtype=complex), np.asarray(g, dtype=complex))
    return bb_p_n(K, degree_of(fg, K.d), cap=cap) @ fg


# --- spectral helpers -------------------------------------------------------


def range_projector(M: np.ndarray, zero_tol: float = SPECTRAL_ZERO) -> np.ndarray:
    """Orthogonal projection onto the span of eigenvectors of the Hermitian M with |eigenvalue| > zero_tol."""
    w, V = np.linalg.eigh(0.5 * (M + M.conj().T))
    keep = V[:, np.abs(w) > zero_tol]
    return keep @ keep.conj().T


def kernel_projector(M: np.ndarray, zero_tol: float = SPECTRAL_ZERO) -> np.ndarray:
    return np.eye(M.shape[0]) - range_projector(M, zero_tol)


def span_projector(projections, zero_tol: float = SPECTRAL_ZERO) -> np.ndarray:
    """Projection onto the span of the ranges of several orthogonal projections."""
    total = sum(projections)
    return range_projector(total, zero_tol)


def ker_p_n_span_projector(K: QKernel, n: int, zero_tol: float = SPECTRAL_ZERO) -> np.ndarray:
    """Projection onto span of Ran(E_1), ..., Ran(E_{n-1})."""
    return span_projector([ker_projection_e_k(K, n, k) for k in range(1, n)], zero_tol)


def residual(A: np.ndarray, B: np.ndarray) -> float:
    """Max-abs entrywise difference."""
    return float(np.max(np.abs(np.asarray(A) - np.asarray(B)))) if np.size(A) else 0.0


def op_norm(A: np.ndarray) -> float:
    return float(np.linalg.norm(A, 2)) if np.size(A) else 0.0


def welldefined_words(p: Permutation) -> list[list[int]]:
    """All reduced words of p (used to cross-check Psi_p)."""
    out = []
    target = len(reduced_word(p))

    def extend(q: Permutation, suffix: list[int]):
        if q.is_identity():
            out.append(suffix[::-1])
            return
        for j in range(1, q.n):
            if q(j) > q(j + 1):
                extend(q * transposition(q.n, j), suffix + [j])

    extend(p, [])
    assert all(len(w) == target for w in out)
    return out

