"""
The Q-deformed Fock space over H = C^d, truncated at degree N.

Vectors are graded families (f^(0), ..., f^(N)) with f^(n) in the range of
PP_n (the quasisymmetric tensors); the inner product is

    <F, G> = sum_n n! <P_n f^(n), g^(n)>,

antilinear in the first argument.  Creation is a+(h) f = PP_{n+1}(h (x) f);
annihilation is computed as a-(h) f = PP_{n-1} A-(h) R_n f with A-(h) the
free contraction of the first slot, and cross-checked against the explicit
insertion-sum formula in ``annihilate_direct``.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .kernel import MODULUS_ONE_TOL, KernelError, QKernel, anyon_fermion_kernel, is_fermion_type
from .permgroup import all_permutations, q_pi_weight
from .qsym import (
    basis_tuples,
    bb_p_n,
    degree_of,
    encode,
    op_norm,
    p_n,
    r_n_operator,
)

RANGE_TOL = 1e-8


class TruncationError(ValueError):
    pass


class NotQuasisymmetricError(ValueError):
    pass


class PreconditionError(ValueError):
    pass


def _as_tensor(v, size: int | None = None) -> np.ndarray:
    a = np.array(v, dtype=complex).reshape(-1)
    if size is not None and a.shape[0] != size:
        raise ValueError(f"expected a vector of length {size}, got {a.shape[0]}")
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class FockVector:
    d: int
    components: tuple[np.ndarray, ...]

    def __post_init__(self):
        comps = tuple(_as_tensor(c, self.d**n) for n, c in enumerate(self.components))
        if not comps:
            raise ValueError("a Fock vector needs at least the degree-0 component")
        object.__setattr__(self, "components", comps)

    @property
    def N(self) -> int:
        return len(self.components) - 1

    @classmethod
    def vacuum(cls, d: int, N: int = 0) -> FockVector:
        return cls.single(d, np.ones(1), N)

    @classmethod
    def zero(cls, d: int, N: int) -> FockVector:
        return cls(d, tuple(np.zeros(d**n) for n in range(N + 1)))

    @classmethod
    def single(cls, d: int, f: np.ndarray, N: int | None = None) -> FockVector:
        """The vector whose only nonzero component is the tensor ``f``."""
        n = degree_of(f, d)
        N = n if N is None else N
        if N < n:
            raise TruncationError(f"degree {n} exceeds truncation N = {N}")
        comps = [np.zeros(d**k) for k in range(N + 1)]
        comps[n] = f
        return cls(d, tuple(comps))

    def padded(self, N: int) -> FockVector:
        if N < self.N:
            if any(np.any(c) for c in self.components[N + 1 :]):
                raise TruncationError(f"cannot truncate nonzero components above N = {N}")
            return FockVector(self.d, self.components[: N + 1])
        extra = tuple(np.zeros(self.d**n) for n in range(self.N + 1, N + 1))
        return FockVector(self.d, self.components + extra)

    def truncated(self, N: int) -> FockVector:
        """Drop components above degree N, whatever they hold."""
        return FockVector(self.d, self.components[: N + 1]).padded(N)

    def __getitem__(self, n: int) -> np.ndarray:
        return self.components[n]

    def _binary(self, other: FockVector, op) -> FockVector:
        if self.d != other.d:
            raise ValueError(f"dimension mismatch: d = {self.d} vs {other.d}")
        N = max(self.N, other.N)
        a, b = self.padded(N), other.padded(N)
        return FockVector(self.d, tuple(op(x, y) for x, y in zip(a.components, b.components)))

    def __add__(self, other: FockVector) -> FockVector:
        return self._binary(other, np.add)

    def __sub__(self, other: FockVector) -> FockVector:
        return self._binary(other, np.subtract)

    def __mul__(self, c: complex) -> FockVector:
        return FockVector(self.d, tuple(c * x for x in self.components))

    __rmul__ = __mul__

    def __neg__(self) -> FockVector:
        return self * -1


def _one_particle(h, d: int | None = None) -> np.ndarray:
    h = np.array(h, dtype=complex).reshape(-1)
    if d is not None and h.shape[0] != d:
        raise ValueError(f"one-particle vector has length {h.shape[0]}, expected d = {d}")
    return h


def fock_inner(K: QKernel, F: FockVector, G: FockVector) -> complex:
    if F.d != K.d or G.d != K.d:
        raise ValueError(f"dimension mismatch: kernel d = {K.d}, vectors d = {F.d}, {G.d}")
    N = max(F.N, G.N)
    F, G = F.padded(N), G.padded(N)
    total = 0j
    for n in range(N + 1):
        f, g = F[n], G[n]
        if not (np.any(f) and np.any(g)):
            continue
        total += math.factorial(n) * np.vdot(p_n(K, n) @ f, g)
    return complex(total)


def fock_norm(K: QKernel, F: FockVector) -> float:
    return math.sqrt(max(fock_inner(K, F, F).real, 0.0))


def in_range_residual(K: QKernel, F: FockVector) -> float:
    """Largest relative distance of a component from the quasisymmetric subspace."""
    worst = 0.0
    for n, f in enumerate(F.components):
        if n < 2 or not np.any(f):
            continue
        gap = np.linalg.norm(bb_p_n(K, n) @ f - f) / max(1.0, np.linalg.norm(f))
        worst = max(worst, float(gap))
    return worst


def project(K: QKernel, F: FockVector) -> FockVector:
    return FockVector(F.d, tuple(bb_p_n(K, n) @ f for n, f in enumerate(F.components)))


def _require_range(K: QKernel, F: FockVector, project_input: bool) -> FockVector:
    if F.d != K.d:
        raise ValueError(f"dimension mismatch: kernel d = {K.d}, vector d = {F.d}")
    if project_input:
        return project(K, F)
    gap = in_range_residual(K, F)
    if gap > RANGE_TOL:
        raise NotQuasisymmetricError(
            f"input is not quasisymmetric (relative residual {gap:.3g}); "
            "pass project=True to project it first"
        )
    return F


def _create(K: QKernel, h: np.ndarray, F: FockVector, extend: bool) -> FockVector:
    top = F.components[-1]
    N = F.N
    if np.any(top):
        if not extend:
            raise TruncationError(f"a+(h) overflows the truncation degree N = {N}")
        N += 1
    comps = [np.zeros(1, dtype=complex)]
    for n in range(N):
        f = F[n] if n <= F.N else np.zeros(K.d**n)
        comps.append(bb_p_n(K, n + 1) @ np.kron(h, f) if np.any(f) else np.zeros(K.d ** (n + 1)))
    return FockVector(K.d, tuple(comps))


def _annihilate(K: QKernel, h: np.ndarray, F: FockVector) -> FockVector:
    comps = [np.zeros(K.d**n, dtype=complex) for n in range(F.N + 1)]
    for n in range(1, F.N + 1):
        f = F[n]
        if np.any(f):
            comps[n - 1] = bb_p_n(K, n - 1) @ a_minus_free(h, r_n_operator(K, n) @ f)
    return FockVector(K.d, tuple(comps))


def create(
    K: QKernel, h, F: FockVector, *, extend: bool = False, project: bool = False
) -> FockVector:
    """
    Apply a+(h): Omega -> h and f^(n) -> PP_{n+1}(h (x) f^(n)).

    Raises ``TruncationError`` when the top component is nonzero unless
    ``extend`` is set, in which case N grows by one.
    """
    h = _one_particle(h, K.d)
    F = _require_range(K, F, project)
    return _create(K, h, F, extend)


def annihilate(K: QKernel, h, F: FockVector, *, project: bool = False) -> FockVector:
    """Apply a-(h), the Fock-space adjoint of a+(h); a-(h) Omega = 0."""
    h = _one_particle(h, K.d)
    F = _require_range(K, F, project)
    return _annihilate(K, h, F)


def a_minus_free(h, g: np.ndarray) -> np.ndarray:
    """(A-(h) g)(t_1..t_{n-1}) = sum_s conj(h(s)) g(s, t_1, ..., t_{n-1})."""
    h = _one_particle(h)
    g = np.asarray(g, dtype=complex)
    d = h.shape[0]
    if g.shape[0] < d:
        raise ValueError("A-(h) is not defined on degree 0")
    return h.conj() @ g.reshape(d, -1)


def annihilate_direct_tensor(K: QKernel, h, f: np.ndarray) -> np.ndarray:
    """
    a-(h) on one quasisymmetric component via the insertion sum

        sum_k PP_{n-1}[ sum_s conj(h(s)) prod_{i<k} Q(s, t_i)
                        f(t_1, ..., t_{k-1}, s, t_k, ..., t_{n-1}) ].
    """
    h = _one_particle(h, K.d)
    d = K.d
    n = degree_of(f, d)
    if n == 0:
        raise ValueError("a-(h) lowers degree; a degree-0 input maps to zero")
    T = basis_tuples(d, n - 1)
    out = np.zeros(T.shape[0], dtype=complex)
    for k in range(1, n + 1):
        for s in range(d):
            if h[s] == 0:
                continue
            w = np.ones(T.shape[0], dtype=complex)
            for i in range(k - 1):
                w *= K.Q[s, T[:, i]]
            inserted = np.insert(T, k - 1, s, axis=1)
            out += np.conj(h[s]) * w * f[encode(inserted, d)]
    return bb_p_n(K, n - 1) @ out


def annihilate_direct(K: QKernel, h, F: FockVector, *, project: bool = False) -> FockVector:
    h = _one_particle(h, K.d)
    F = _require_range(K, F, project)
    comps = [np.zeros(K.d**n, dtype=complex) for n in range(F.N + 1)]
    for n in range(1, F.N + 1):
        if np.any(F[n]):
            comps[n - 1] = annihilate_direct_tensor(K, h, F[n])
    return FockVector(K.d, tuple(comps))


# --- block matrices ---------------------------------------------------------


def creation_matrix(K: QKernel, h, n: int) -> np.ndarray:
    """a+(h) from degree n to n + 1, as a d^{n+1} x d^n matrix."""
    h = _one_particle(h, K.d)
    return bb_p_n(K, n + 1) @ np.kron(h[:, None], np.eye(K.d**n))


def annihilation_matrix(K: QKernel, h, n: int) -> np.ndarray:
    """a-(h) from degree n to n - 1 (valid on quasisymmetric inputs)."""
    h = _one_particle(h, K.d)
    if n < 1:
        raise ValueError("annihilation from degree 0 is the zero map")
    contract = np.kron(h.conj()[None, :], np.eye(K.d ** (n - 1)))
    return bb_p_n(K, n - 1) @ contract @ r_n_operator(K, n)


def _basis(d: int, s: int) -> np.ndarray:
    e = np.zeros(d, dtype=complex)
    e[s] = 1.0
    return e


def verify_qcr(K: QKernel, s: int, t: int, N: int) -> float:
    """
    Max operator-norm residual of

        a-(e_s) a+(e_t) = delta_{st} + Q(s, t) a+(e_t) a-(e_s)

    on the quasisymmetric tensors of each degree 0..N.
    """
    es, et = _basis(K.d, s), _basis(K.d, t)
    worst = 0.0
    for n in range(N + 1):
        proj = bb_p_n(K, n)
        lhs = annihilation_matrix(K, es, n + 1) @ creation_matrix(K, et, n)
        rhs = (1.0 if s == t else 0.0) * np.eye(K.d**n)
        if n >= 1:
            rhs = rhs + K.Q[s, t] * creation_matrix(K, et, n - 1) @ annihilation_matrix(K, es, n)
        worst = max(worst, op_norm((lhs - rhs) @ proj))
    return worst


def _theta_pair(K: QKernel, s: int, t: int, tol: float) -> None:
    if not K.theta_mask(tol)[s, t]:
        raise PreconditionError(
            f"exchange relation only holds on |Q| = 1; |Q({s}, {t})| = {abs(K.Q[s, t]):.6g}"
        )


def verify_creation_exchange(
    K: QKernel, s: int, t: int, N: int, *, tol: float = MODULUS_ONE_TOL
) -> float:
    """
    For |Q(s, t)| = 1, the max residual over degrees <= N of

        a+(e_s) a+(e_t) = Q(t, s) a+(e_t) a+(e_s)
        a-(e_s) a-(e_t) = Q(t, s) a-(e_t) a-(e_s).
    """
    _theta_pair(K, s, t, tol)
    es, et = _basis(K.d, s), _basis(K.d, t)
    c = K.Q[t, s]
    worst = 0.0
    for n in range(N - 1):
        proj = bb_p_n(K, n)
        st = creation_matrix(K, es, n + 1) @ creation_matrix(K, et, n)
        ts = creation_matrix(K, et, n + 1) @ creation_matrix(K, es, n)
        worst = max(worst, op_norm((st - c * ts) @ proj))
    for n in range(2, N + 1):
        proj = bb_p_n(K, n)
        st = annihilation_matrix(K, es, n - 1) @ annihilation_matrix(K, et, n)
        ts = annihilation_matrix(K, et, n - 1) @ annihilation_matrix(K, es, n)
        worst = max(worst, op_norm((st - c * ts) @ proj))
    return worst


def exchange_misfit(K: QKernel, s: int, t: int, N: int) -> float:
    """
    min over |c| = 1 of the Frobenius norm of
    a+(e_s) a+(e_t) - c a+(e_t) a+(e_s), stacked over degrees 0..N-2.

    Positive values mean no unimodular exchange constant exists.
    """
    es, et = _basis(K.d, s), _basis(K.d, t)
    X, Y = [], []
    for n in range(N - 1):
        proj = bb_p_n(K, n)
        X.append((creation_matrix(K, es, n + 1) @ creation_matrix(K, et, n) @ proj).ravel())
        Y.append((creation_matrix(K, et, n + 1) @ creation_matrix(K, es, n) @ proj).ravel())
    x, y = np.concatenate(X), np.concatenate(Y)
    sq = np.vdot(x, x).real + np.vdot(y, y).real - 2 * abs(np.vdot(y, x))
    return math.sqrt(max(sq, 0.0))


# --- q-factorials and exclusion ---------------------------------------------


def q_factorial(q: complex, m: int) -> complex:
    """[m]_q! = prod_{i=1..m} (1 + q + ... + q^{i-1}); equals m! at q = 1."""
    if m < 0:
        raise ValueError("m must be nonnegative")
    out = 1 + 0j
    partial = 0j
    power = 1 + 0j
    for _ in range(m):
        partial += power
        power *= q
        out *= partial
    return out


def permanent_sum_identity(K: QKernel, n: int) -> tuple[complex, complex]:
    """
    (sum_{p in S_n} Q_p(0, 1, ..., n-1), [n]_q!) for a kernel that takes one
    value q on every pair s < t of the first n sites.
    """
    if n > K.d:
        raise ValueError(f"need d >= n, got d = {K.d}, n = {n}")
    if n > 7:
        raise ValueError("n is capped at 7")
    if n < 2:
        return 1 + 0j, q_factorial(0, n)
    upper = K.Q[:n, :n][np.triu_indices(n, 1)]
    q = complex(upper[0])
    if np.max(np.abs(upper - q)) > 1e-14:
        raise KernelError("kernel is not constant on the ordered pairs s < t")
    t = tuple(range(n))
    total = sum(q_pi_weight(K, p, t) for p in all_permutations(n))
    return complex(total), q_factorial(q, n)


def symmetrized_power_norm(K: QKernel, h, m: int) -> float:
    """||PP_m h^{(x)m}||."""
    h = _one_particle(h, K.d)
    hm = np.ones(1, dtype=complex)
    for _ in range(m):
        hm = np.kron(hm, h)
    return float(np.linalg.norm(bb_p_n(K, m) @ hm))


def random_quasisymmetric(K: QKernel, n: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.normal(size=K.d**n) + 1j * rng.normal(size=K.d**n)
    return bb_p_n(K, n) @ g


def random_fock_vector(K: QKernel, N: int, rng: np.random.Generator) -> FockVector:
    return FockVector(K.d, tuple(random_quasisymmetric(K, n, rng) for n in range(N + 1)))


def exclusion_residual(
    q: complex,
    m: int,
    h,
    d: int | None = None,
    *,
    rng: np.random.Generator | None = None,
    random_degree: int = 1,
    tol: float = 1e-10,
) -> float:
    """
    Worst of ||PP_m h^m||, ||a+(h)^m F|| (F = Omega and a random
    quasisymmetric F up to ``random_degree``) and ||a-(h)^m|| on degree m,
    for the discrete anyon fermion kernel with q^m = 1, q != 1.
    """
    q = complex(q)
    h = _one_particle(h, d)
    d = h.shape[0]
    if m < 2:
        raise PreconditionError("exclusion needs m >= 2")
    if abs(q - 1) <= tol or abs(q**m - 1) > tol:
        raise PreconditionError(f"q = {q} is not a nontrivial {m}-th root of unity")
    K = anyon_fermion_kernel(q, d)
    worst = symmetrized_power_norm(K, h, m)

    starts = [FockVector.vacuum(d)]
    if rng is not None and random_degree > 0:
        starts.append(random_fock_vector(K, random_degree, rng))
    for F in starts:
        for _ in range(m):
            F = _create(K, h, F, extend=True)
        worst = max(worst, fock_norm(K, F))

    down = bb_p_n(K, m)
    for n in range(m, 0, -1):
        down = annihilation_matrix(K, h, n) @ down
    worst = max(worst, op_norm(down))
    return worst


# --- vacuum moments ---------------------------------------------------------


@dataclass(frozen=True, eq=False)
class WickWord:
    """
    A product of letters a+(h), a-(h) or B(h) = a+(h) + a-(h), written left
    to right as an operator product (the rightmost letter acts first).
    """

    letters: tuple[tuple[str, np.ndarray], ...]

    def __post_init__(self):
        letters = tuple((k, _as_tensor(v)) for k, v in self.letters)
        if not letters:
            raise ValueError("a word needs at least one letter")
        if any(k not in ("+", "-", "B") for k, _ in letters):
            raise ValueError("letters must be '+', '-' or 'B'")
        if len({v.shape[0] for _, v in letters}) != 1:
            raise ValueError("all letters must share d")
        object.__setattr__(self, "letters", letters)

    @classmethod
    def B(cls, *phis) -> WickWord:
        return cls(tuple(("B", p) for p in phis))

    @property
    def d(self) -> int:
        return self.letters[0][1].shape[0]

    def __len__(self) -> int:
        return len(self.letters)

    def __mul__(self, other: WickWord) -> WickWord:
        return WickWord(self.letters + other.letters)

    def to_json(self) -> list:
        return [
            [k, [[float(z.real), float(z.imag)] for z in v]] for k, v in self.letters
        ]


def apply_word(K: QKernel, word: WickWord, F: FockVector, N: int | None = None) -> FockVector:
    """Apply ``word`` to F, right to left, with truncation degree N."""
    N = max(F.N, len(word)) if N is None else N
    F = F.padded(N)
    for kind, h in reversed(word.letters):
        out = None
        if kind in "+B":
            out = _create(K, h, F, extend=False)
        if kind in "-B":
            down = _annihilate(K, h, F)
            out = down if out is None else out + down
        F = out
    return F


def vacuum_moment(K: QKernel, word: WickWord, N: int | None = None) -> complex:
    """
    tau(p) for the word p: the Omega-component of p Omega, i.e. <Omega, p Omega>.

    Components that can no longer return to degree 0 are dropped as the word
    is consumed, so degrees never exceed len(word) / 2.  Words longer than
    2N are rejected.
    """
    L = len(word)
    N = (L + 1) // 2 if N is None else N
    if L > 2 * N:
        raise TruncationError(f"word of length {L} needs truncation N >= {(L + 1) // 2}, got {N}")
    if word.d != K.d:
        raise ValueError(f"dimension mismatch: kernel d = {K.d}, word d = {word.d}")
    F = FockVector.vacuum(K.d, N)
    for i, (kind, h) in enumerate(reversed(word.letters)):
        remaining = L - i - 1
        out = FockVector.zero(K.d, N)
        if kind in "+B" and remaining >= 1:
            src = F.truncated(min(remaining - 1, N - 1)).padded(N)
            out = out + _create(K, h, src, extend=False)
        if kind in "-B":
            out = out + _annihilate(K, h, F)
        F = out.truncated(min(N, remaining)).padded(N)
    return complex(F[0][0])


def random_word(d: int, length: int, rng: np.random.Generator, *, real: bool = True) -> WickWord:
    """A product of ``length`` factors B(phi) with random (real by default) phi."""
    phis = []
    for _ in range(length):
        v = rng.normal(size=d)
        if not real:
            v = v + 1j * rng.normal(size=d)
        phis.append(v)
    return WickWord.B(*phis)


def traciality_residual(K: QKernel, pairs: Iterable[tuple[WickWord, WickWord]]) -> float:
    """max |tau(p1 p2) - tau(p2 p1)| over the given pairs."""
    worst = 0.0
    for p1, p2 in pairs:
        worst = max(worst, abs(vacuum_moment(K, p1 * p2) - vacuum_moment(K, p2 * p1)))
    return worst


def traciality_search(
    K: QKernel,
    rng: np.random.Generator,
    n_pairs: int = 50,
    max_length: int = 4,
) -> tuple[float, dict | None]:
    """
    Evaluate ``n_pairs`` random pairs of B-words (lengths 1..max_length, real
    test functions).  Returns the max residual and the worst pair.
    """
    worst, witness = 0.0, None
    for _ in range(n_pairs):
        p1 = random_word(K.d, int(rng.integers(1, max_length + 1)), rng)
        p2 = random_word(K.d, int(rng.integers(1, max_length + 1)), rng)
        a, b = vacuum_moment(K, p1 * p2), vacuum_moment(K, p2 * p1)
        if abs(a - b) > worst or witness is None:
            worst = max(worst, abs(a - b))
            witness = {
                "p1": p1.to_json(),
                "p2": p2.to_json(),
                "tau_p1p2": [a.real, a.imag],
                "tau_p2p1": [b.real, b.imag],
                "residual": abs(a - b),
            }
    return worst, witness


# --- norms ------------------------------------------------------------------


def _range_frame(K: QKernel, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormal basis B of Ran(PP_n) and a Cholesky factor L of the Fock Gram matrix on it."""
    proj = bb_p_n(K, n)
    w, V = np.linalg.eigh(proj)
    B = V[:, w > 0.5]
    gram = math.factorial(n) * (B.conj().T @ p_n(K, n) @ B)
    gram = 0.5 * (gram + gram.conj().T)
    L = np.linalg.cholesky(gram) if B.shape[1] else np.zeros((0, 0))
    return B, L


def fock_block_norm(K: QKernel, M: np.ndarray, n_in: int, n_out: int) -> float:
    """Norm of M: F_{n_in} -> F_{n_out} with respect to the Fock norms."""
    B_in, L_in = _range_frame(K, n_in)
    B_out, L_out = _range_frame(K, n_out)
    if B_in.shape[1] == 0 or B_out.shape[1] == 0:
        return 0.0
    core = B_out.conj().T @ M @ B_in
    X = L_out.conj().T @ core @ np.linalg.inv(L_in.conj().T)
    return op_norm(X)


def creation_norm(K: QKernel, h, N: int) -> float:
    """||a+(h)|| restricted to degrees 0..N-1 (targets up to N)."""
    h = _one_particle(h, K.d)
    return max(
        (fock_block_norm(K, creation_matrix(K, h, n), n, n + 1) for n in range(N)),
        default=0.0,
    )


def operator_norm_check_fermion_type(K: QKernel, h, N: int) -> tuple[float, float]:
    """(truncated ||a+(h)||, ||h||_1) for a fermion-type kernel."""
    if not is_fermion_type(K):
        raise KernelError("kernel is not of fermion type (Q(t,t) = -1, |Q| = 1)")
    h = _one_particle(h, K.d)
    return creation_norm(K, h, N), float(np.sum(np.abs(h)))


def root_of_unity(m: int, k: int = 1) -> complex:
    return cmath.exp(2j * cmath.pi * k / m)
