"""
Named verification suites.  Each suite checks one proved statement for a
given kernel up to a degree cap and returns a ``SuiteResult``.

A suite whose hypotheses the kernel does not meet (e.g. the exclusion
principle on a kernel that is not of anyon fermion type) reports
``status == "skipped"`` with the reason; skipped suites do not fail a run.
"""
from __future__ import annotations

import itertools
import math
import zlib
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

from . import fock, qsym
from .kernel import QKernel, anyon_parameter, derive_g, derive_r, is_fermion_type
from .permgroup import all_permutations, compose
from .qsym import residual

IDENTITY_TOL = 1e-12


@dataclass
class Tolerances:
    modulus_one: float = 1e-12
    projector: float = 1e-10
    spectral_zero: float = 1e-8

    @classmethod
    def from_dict(cls, data: dict | None) -> Tolerances:
        data = dict(data or {})
        unknown = set(data) - {"modulus_one", "projector", "spectral_zero"}
        if unknown:
            raise ValueError(f"unknown tolerance keys: {sorted(unknown)}")
        return cls(**{k: float(v) for k, v in data.items()})


@dataclass
class SuiteContext:
    kernel: QKernel
    n_max: int
    tol: Tolerances
    seed: int
    params: dict[str, Any] = field(default_factory=dict)

    def rng(self, name: str) -> np.random.Generator:
        return np.random.default_rng([self.seed, zlib.crc32(name.encode())])

    @property
    def d(self) -> int:
        return self.kernel.d


@dataclass
class SuiteResult:
    name: str
    status: str
    max_residual: float
    tolerance: float
    witness: dict | None = None
    detail: str = ""

    def to_json(self) -> dict:
        out = {
            "name": self.name,
            "status": self.status,
            "max_residual": float(self.max_residual),
            "tolerance": self.tolerance,
        }
        if self.detail:
            out["detail"] = self.detail
        if self.witness is not None:
            out["witness"] = self.witness
        return out


class _Tracker:
    """Keeps the largest residual and the location where it occurred."""

    def __init__(self, tol: float):
        self.tol = tol
        self.worst = 0.0
        self.where: dict | None = None

    def add(self, value: float, /, **where):
        value = float(value)
        if value > self.worst or self.where is None:
            self.worst = max(self.worst, value)
            self.where = where

    def result(self, name: str, detail: str = "") -> SuiteResult:
        ok = self.worst <= self.tol
        return SuiteResult(
            name,
            "pass" if ok else "fail",
            self.worst,
            self.tol,
            witness=None if ok else self.where,
            detail=detail,
        )


def _skipped(name: str, reason: str) -> SuiteResult:
    return SuiteResult(name, "skipped", 0.0, 0.0, detail=reason)


def _degrees(ctx: SuiteContext, lo: int = 2, hi: int | None = None) -> range:
    hi = ctx.n_max if hi is None else min(hi, ctx.n_max)
    return range(lo, hi + 1)


# --- suites -----------------------------------------------------------------


def suite_braid(ctx: SuiteContext) -> SuiteResult:
    K = ctx.kernel
    tr = _Tracker(IDENTITY_TOL)
    for n in _degrees(ctx):
        psi = {k: qsym.psi_k(K, n, k) for k in range(1, n)}
        for k, P in psi.items():
            tr.add(residual(P, P.conj().T), n=n, relation="self-adjoint", k=k)
            for l in range(k + 2, n):
                tr.add(residual(P @ psi[l], psi[l] @ P), n=n, relation="commute", k=k, l=l)
            if k + 1 < n:
                Q = psi[k + 1]
                tr.add(residual(P @ Q @ P, Q @ P @ Q), n=n, relation="braid", k=k)
    return tr.result("braid")


def suite_psi_pi_welldef(ctx: SuiteContext) -> SuiteResult:
    K = ctx.kernel
    tr = _Tracker(IDENTITY_TOL)
    for n in _degrees(ctx, hi=ctx.params.get("n", 4)):
        for p in all_permutations(n):
            closed = qsym.psi_pi(K, p)
            for word in qsym.welldefined_words(p):
                tr.add(
                    residual(qsym.psi_word(K, word, n), closed),
                    permutation=list(p.images),
                    word=word,
                )
    return tr.result("psi_pi_welldef")


def suite_pn_psd(ctx: SuiteContext) -> SuiteResult:
    K = ctx.kernel
    tr = _Tracker(ctx.tol.projector)
    lowest = math.inf
    for n in _degrees(ctx):
        P = qsym.p_n(K, n)
        tr.add(residual(P, P.conj().T), n=n, check="self-adjoint")
        w = np.linalg.eigvalsh(P)
        lowest = min(lowest, float(w[0]))
        tr.add(max(0.0, -w[0]), n=n, check="min eigenvalue", value=float(w[0]))
        tr.add(max(0.0, w[-1] - 1.0), n=n, check="norm", value=float(w[-1]))
    return tr.result("pn_psd", detail=f"min eigenvalue {lowest:.3e}")


def suite_kernel_theorem(ctx: SuiteContext) -> SuiteResult:
    K = ctx.kernel
    tr = _Tracker(ctx.tol.spectral_zero)
    z = ctx.tol.spectral_zero
    for n in _degrees(ctx):
        ker = qsym.kernel_projector(qsym.p_n(K, n), z)
        span = qsym.ker_p_n_span_projector(K, n, z)
        tr.add(residual(ker, span), n=n, rank_ker=int(round(np.trace(ker).real)))
    return tr.result("kernel_theorem")


def suite_projection_laws(ctx: SuiteContext) -> SuiteResult:
    K = ctx.kernel
    tol = ctx.tol
    laws = _Tracker(tol.projector)
    spectral = _Tracker(tol.spectral_zero)
    for n in _degrees(ctx):
        B = qsym.bb_p_n(K, n, tol=tol.modulus_one)
        P = qsym.p_n(K, n)
        laws.add(residual(B @ B, B), n=n, law="idempotent")
        laws.add(residual(B, B.conj().T), n=n, law="self-adjoint")
        laws.add(residual(B @ P, P), n=n, law="PP_n P_n = P_n")
        laws.add(residual(P @ B, P), n=n, law="P_n PP_n = P_n")
        spectral.add(residual(qsym.range_projector(P, tol.spectral_zero), B), n=n, law="spectral range")
    a, b = laws.result("projection_laws"), spectral.result("projection_laws")
    worst = a if a.status == "fail" or b.status == "pass" else b
    return SuiteResult(
        "projection_laws",
        "pass" if a.status == b.status == "pass" else "fail",
        max(a.max_residual, b.max_residual),
        tol.projector,
        witness=worst.witness,
        detail=f"algebraic {a.max_residual:.2e}, spectral {b.max_residual:.2e} (tol {tol.spectral_zero:g})",
    )


def suite_tensor_factor(ctx: SuiteContext) -> SuiteResult:
    K = ctx.kernel
    tr = _Tracker(ctx.tol.projector)
    for n in _degrees(ctx):
        B = qsym.bb_p_n(K, n)
        for k in range(1, n):
            prod = np.kron(qsym.bb_p_n(K, k), qsym.bb_p_n(K, n - k))
            tr.add(residual(B @ prod, B), n=n, k=k)
    return tr.result("tensor_factor")


def suite_associativity(ctx: SuiteContext) -> SuiteResult:
    K = ctx.kernel
    rng = ctx.rng("associativity")
    tr = _Tracker(ctx.tol.projector)
    for a, b, c in itertools.product(range(1, ctx.n_max + 1), repeat=3):
        if a + b + c > ctx.n_max:
            continue
        f, g, h = (fock.random_quasisymmetric(K, m, rng) for m in (a, b, c))
        left = qsym.qsym_product(K, qsym.qsym_product(K, f, g), h)
        right = qsym.qsym_product(K, f, qsym.qsym_product(K, g, h))
        tr.add(residual(left, right), degrees=[a, b, c])
    return tr.result("associativity")


def suite_recursion_rn(ctx: SuiteContext) -> SuiteResult:
    K = ctx.kernel
    tr = _Tracker(IDENTITY_TOL)
    for n in range(1, ctx.n_max):
        lhs = (n + 1) * qsym.p_n(K, n + 1)
        rhs = np.kron(np.eye(K.d), qsym.p_n(K, n)) @ qsym.r_n_operator(K, n + 1)
        tr.add(residual(lhs, rhs), n=n)
    return tr.result("recursion_rn")


def suite_qcr(ctx: SuiteContext) -> SuiteResult:
    K = ctx.kernel
    tr = _Tracker(ctx.tol.projector)
    N = ctx.n_max - 1
    for s, t in itertools.product(range(K.d), repeat=2):
        tr.add(fock.verify_qcr(K, s, t, N), s=s, t=t)
    return tr.result("qcr", detail=f"degrees 0..{N}")


def suite_exchange(ctx: SuiteContext) -> SuiteResult:
    K = ctx.kernel
    tol = ctx.tol
    theta = K.theta_mask(tol.modulus_one)
    tr = _Tracker(tol.projector)
    pairs = 0
    for s, t in itertools.product(range(K.d), repeat=2):
        if theta[s, t]:
            pairs += 1
            tr.add(fock.verify_creation_exchange(K, s, t, ctx.n_max, tol=tol.modulus_one), s=s, t=t)
    res = tr.result("exchange")
    control = [(s, t) for s in range(K.d) for t in range(s + 1, K.d) if not theta[s, t]]
    if control:
        s, t = control[0]
        misfit = fock.exchange_misfit(K, s, t, ctx.n_max)
        res.detail = f"{pairs} Theta pairs; control pair ({s},{t}) misfit {misfit:.3e}"
        if misfit <= 1e-6:
            res.status = "fail"
            res.witness = {"control_pair": [s, t], "misfit": misfit}
    else:
        res.detail = f"{pairs} Theta pairs; no off-diagonal |Q| < 1 pair for the control"
    return res


def suite_adjointness(ctx: SuiteContext) -> SuiteResult:
    K = ctx.kernel
    rng = ctx.rng("adjointness")
    adj = _Tracker(ctx.tol.projector)
    dual = _Tracker(IDENTITY_TOL)
    N = ctx.n_max
    for trial in range(int(ctx.params.get("trials", 5))):
        h = rng.normal(size=K.d) + 1j * rng.normal(size=K.d)
        F = fock.random_fock_vector(K, N - 1, rng)
        G = fock.random_fock_vector(K, N, rng)
        lhs = fock.fock_inner(K, fock.create(K, h, F, extend=True), G)
        rhs = fock.fock_inner(K, F, fock.annihilate(K, h, G))
        adj.add(abs(lhs - rhs), trial=trial)
        a, b = fock.annihilate(K, h, G), fock.annihilate_direct(K, h, G)
        dual.add(max(residual(x, y) for x, y in zip(a.components, b.components)), trial=trial)
    a, b = adj.result("adjointness"), dual.result("adjointness")
    ok = a.status == b.status == "pass"
    return SuiteResult(
        "adjointness",
        "pass" if ok else "fail",
        a.max_residual,
        ctx.tol.projector,
        witness=None if ok else (a.witness or b.witness),
        detail=f"annihilator routes agree to {b.max_residual:.2e}",
    )


def _find_m(q: complex, limit: int) -> int | None:
    for m in range(2, limit + 1):
        if abs(q**m - 1) <= 1e-10:
            return m
    return None


def suite_exclusion(ctx: SuiteContext) -> SuiteResult:
    K = ctx.kernel
    q = anyon_parameter(K, ctx.tol.modulus_one)
    if q is None:
        return _skipped("exclusion", "kernel is not a discrete anyon kernel of fermion type")
    m = ctx.params.get("m")
    m = _find_m(q, ctx.n_max) if m is None else int(m)
    if m is None or abs(q - 1) <= 1e-10 or abs(q**m - 1) > 1e-10:
        return _skipped("exclusion", f"q = {q:.6g} is not a nontrivial m-th root of unity for m <= {ctx.n_max}")
    qsym.check_size(K.d, m)
    rng = ctx.rng("exclusion")
    random_degree = 1 if K.d ** (m + 1) <= qsym.SIZE_CAP else 0
    tr = _Tracker(ctx.tol.projector)
    for trial in range(int(ctx.params.get("trials", 10))):
        h = rng.normal(size=K.d) + 1j * rng.normal(size=K.d)
        tr.add(
            fock.exclusion_residual(q, m, h, rng=rng, random_degree=random_degree),
            trial=trial,
            h=[[float(z.real), float(z.imag)] for z in h],
        )
    return tr.result("exclusion", detail=f"m = {m}")


def suite_q_factorial_sum(ctx: SuiteContext) -> SuiteResult:
    from .kernel import anyon_fermion_kernel

    qs = [complex(*v) if isinstance(v, (list, tuple)) else complex(v) for v in ctx.params.get("q", [])]
    if not qs:
        qs = [0.5, -0.9, 1j, fock.root_of_unity(3)]
    n_hi = int(ctx.params.get("n", 6))
    tr = _Tracker(IDENTITY_TOL)
    for q in qs:
        # ordered kernel taking the value q on every pair s < t
        K = anyon_fermion_kernel(q.conjugate(), n_hi) if abs(abs(q) - 1) < 1e-12 else None
        for n in range(1, n_hi + 1):
            if K is None:
                total = sum(q ** len(p.inversion_pairs) for p in all_permutations(n))
            else:
                total, _ = fock.permanent_sum_identity(K, n)
            tr.add(abs(total - fock.q_factorial(q, n)), q=[q.real, q.imag], n=n)
    return tr.result("q_factorial_sum")


def suite_traciality(ctx: SuiteContext) -> SuiteResult:
    K = ctx.kernel
    rng = ctx.rng("traciality")
    pairs = int(ctx.params.get("pairs", 50))
    max_len = int(ctx.params.get("max_length", 4))
    worst, witness = fock.traciality_search(K, rng, n_pairs=pairs, max_length=max_len)
    if K.is_real():
        ok = worst <= ctx.tol.projector
        return SuiteResult(
            "traciality",
            "pass" if ok else "fail",
            worst,
            ctx.tol.projector,
            witness=None if ok else witness,
            detail=f"real kernel, {pairs} pairs: tracial",
        )
    ok = worst > 1e-6
    return SuiteResult(
        "traciality",
        "pass" if ok else "fail",
        worst,
        1e-6,
        witness=witness,
        detail=f"complex kernel, {pairs} pairs: "
        + ("non-tracial counterexample found" if ok else "no counterexample found"),
    )


def suite_norm_bound(ctx: SuiteContext) -> SuiteResult:
    K = ctx.kernel
    if not is_fermion_type(K, ctx.tol.modulus_one):
        return _skipped("norm_bound", "kernel is not of fermion type")
    rng = ctx.rng("norm_bound")
    tr = _Tracker(ctx.tol.projector)
    hs = [np.eye(K.d)[t] for t in range(K.d)]
    hs += [rng.normal(size=K.d) + 1j * rng.normal(size=K.d) for _ in range(int(ctx.params.get("trials", 5)))]
    for h in hs:
        norm, l1 = fock.operator_norm_check_fermion_type(K, h, ctx.n_max)
        tr.add(max(0.0, norm - l1), norm=norm, l1=l1)
    return tr.result("norm_bound")


def suite_quasisym_range(ctx: SuiteContext) -> SuiteResult:
    K = ctx.kernel
    rng = ctx.rng("quasisym_range")
    tol = ctx.tol
    tr = _Tracker(tol.spectral_zero)
    for n in _degrees(ctx):
        B = qsym.bb_p_n(K, n, tol=tol.modulus_one)
        f = B @ (rng.normal(size=K.d**n) + 1j * rng.normal(size=K.d**n))
        _, res = qsym.quasisym_check(K, f, modulus_tol=tol.modulus_one)
        tr.add(res, n=n, check="range is quasisymmetric")
        C = constraint_matrix(K, n, tol.modulus_one)
        tr.add(residual(qsym.kernel_projector(C.conj().T @ C, tol.spectral_zero), B), n=n, check="solution space")
    return tr.result("quasisym_range")


def constraint_matrix(K: QKernel, n: int, tol: float = 1e-12) -> np.ndarray:
    """Rows f(t) - Q(t_k, t_{k+1}) f(swap_k t) for every Theta-tuple t and every k."""
    d = K.d
    T = qsym.basis_tuples(d, n)
    theta = K.theta_mask(tol)
    rows = []
    for k in range(1, n):
        sel = np.flatnonzero(theta[T[:, k - 1], T[:, k]])
        for i in sel:
            t = T[i].copy()
            row = np.zeros(d**n, dtype=complex)
            row[i] += 1.0
            q = K.Q[t[k - 1], t[k]]
            t[[k - 1, k]] = t[[k, k - 1]]
            row[qsym.tuple_to_index(t, d)] -= q
            rows.append(row)
    return np.array(rows) if rows else np.zeros((0, d**n), dtype=complex)


def gamma_representation_residual(K: QKernel, n: int, tol: float = 1e-12) -> float:
    """max ||Gamma_p Gamma_v - Gamma_{pv}|| over S_n for the G-kernel of K."""
    G = derive_g(derive_r(K, tol))
    perms = all_permutations(n)
    mats = {p: qsym.gamma_pi(G, p) for p in perms}
    return max(residual(mats[p] @ mats[v], mats[compose(p, v)]) for p in perms for v in perms)


SUITES: dict[str, Callable[[SuiteContext], SuiteResult]] = {
    "braid": suite_braid,
    "psi_pi_welldef": suite_psi_pi_welldef,
    "pn_psd": suite_pn_psd,
    "kernel_theorem": suite_kernel_theorem,
    "projection_laws": suite_projection_laws,
    "tensor_factor": suite_tensor_factor,
    "associativity": suite_associativity,
    "recursion_rn": suite_recursion_rn,
    "qcr": suite_qcr,
    "exchange": suite_exchange,
    "adjointness": suite_adjointness,
    "exclusion": suite_exclusion,
    "q_factorial_sum": suite_q_factorial_sum,
    "traciality": suite_traciality,
    "norm_bound": suite_norm_bound,
    "quasisym_range": suite_quasisym_range,
}

ALIASES = {"positivity": "pn_psd"}


def resolve(name: str) -> str:
    name = ALIASES.get(name, name)
    if name not in SUITES:
        raise KeyError(name)
    return name
