"""
Hermitian kernels Q on a finite site set T = {0, ..., d-1}.

With the counting measure on a finite T there is no nontrivial null set, so
every pair (s, t) carries a value Q(s, t) and T^(n) = T^n.

Derived kernels:

* ``RKernel`` keeps Q on the modulus-one set Theta = {|Q| = 1} and zeroes
  it elsewhere;
* ``GKernel`` agrees with R on Theta and is 1 off it, so |G| = 1 everywhere.
"""
from __future__ import annotations

import cmath
import json
import os
from dataclasses import dataclass
from typing import Any

import numpy as np

MODULUS_ONE_TOL = 1e-12
BOUND_TOL = 1e-12


class KernelError(ValueError):
    pass


class HermitianError(KernelError):
    def __init__(self, s: int, t: int, a: complex, b: complex):
        self.pair = (s, t)
        super().__init__(
            f"kernel is not Hermitian at (s, t) = ({s}, {t}): "
            f"Q[s][t] = {a!r}, conj(Q[t][s]) = {b.conjugate()!r}"
        )


class BoundError(KernelError):
    pass


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class QKernel:
    """A validated Hermitian d x d kernel with entries in the closed unit disc."""

    Q: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "Q", _frozen(np.asarray(self.Q, dtype=complex)))

    @property
    def d(self) -> int:
        return self.Q.shape[0]

    def __eq__(self, other):
        if not isinstance(other, QKernel):
            return NotImplemented
        return self.Q.shape == other.Q.shape and bool(np.array_equal(self.Q, other.Q))

    def __hash__(self):
        return hash((self.Q.shape, self.Q.tobytes()))

    def __repr__(self):
        return f"QKernel(d={self.d})"

    def is_real(self, tol: float = 0.0) -> bool:
        return bool(np.all(np.abs(self.Q.imag) <= tol))

    def theta_mask(self, tol: float = MODULUS_ONE_TOL) -> np.ndarray:
        return np.abs(np.abs(self.Q) - 1.0) <= tol


@dataclass(frozen=True, eq=False)
class RKernel:
    R: np.ndarray
    theta_mask: np.ndarray

    @property
    def d(self) -> int:
        return self.R.shape[0]


@dataclass(frozen=True, eq=False)
class GKernel:
    G: np.ndarray

    @property
    def d(self) -> int:
        return self.G.shape[0]


def make_kernel(matrix) -> QKernel:
    """
    Validate ``matrix`` as a kernel.  Non-Hermitian input is rejected, never
    symmetrised.
    """
    Q = np.asarray(matrix, dtype=complex)
    if Q.ndim != 2 or Q.shape[0] != Q.shape[1] or Q.shape[0] == 0:
        raise KernelError(f"kernel must be a nonempty square matrix, got shape {Q.shape}")
    d = Q.shape[0]
    for s in range(d):
        for t in range(s, d):
            if Q[s, t] != np.conj(Q[t, s]):
                raise HermitianError(s, t, complex(Q[s, t]), complex(Q[t, s]))
    mod = np.abs(Q)
    if np.any(mod > 1.0 + BOUND_TOL):
        s, t = np.unravel_index(int(np.argmax(mod)), Q.shape)
        raise BoundError(f"|Q[{s}][{t}]| = {mod[s, t]:.6g} exceeds 1")
    return QKernel(Q)


def constant_kernel(q: float, d: int) -> QKernel:
    q = complex(q)
    if q.imag != 0 or not -1.0 <= q.real <= 1.0:
        raise KernelError(f"constant kernel needs real q in [-1, 1], got {q}")
    if d < 1:
        raise KernelError("d must be positive")
    return make_kernel(np.full((d, d), q.real, dtype=complex))


def anyon_fermion_kernel(q: complex, d: int) -> QKernel:
    """Q(s, t) = q for s > t, conj(q) for s < t, -1 on the diagonal."""
    q = complex(q)
    if abs(abs(q) - 1.0) > 1e-12:
        raise KernelError(f"anyon parameter must be unimodular, |q| = {abs(q)}")
    if d < 1:
        raise KernelError("d must be positive")
    s, t = np.indices((d, d))
    Q = np.where(s > t, q, np.where(s < t, q.conjugate(), -1.0 + 0j))
    return make_kernel(Q)


def derive_r(K: QKernel, tol: float = MODULUS_ONE_TOL) -> RKernel:
    mask = K.theta_mask(tol)
    R = np.where(mask, K.Q, 0.0)
    return RKernel(_frozen(R), _frozen(mask))


def derive_g(R: RKernel) -> GKernel:
    G = np.where(R.theta_mask, R.R, 1.0 + 0j)
    return GKernel(_frozen(G))


def anyon_parameter(K: QKernel, tol: float = 1e-12) -> complex | None:
    """Return q if ``K`` has discrete anyon fermion form, else None."""
    if K.d < 2:
        return None
    q = complex(K.Q[1, 0])
    if abs(abs(q) - 1.0) > tol:
        return None
    if np.max(np.abs(K.Q - anyon_fermion_kernel(q / abs(q), K.d).Q)) > tol:
        return None
    return q


def is_fermion_type(K: QKernel, tol: float = 1e-12) -> bool:
    """Q(t, t) = -1 on the diagonal and |Q| = 1 everywhere."""
    return bool(
        np.all(np.abs(np.diag(K.Q) + 1.0) <= tol) and np.all(K.theta_mask(tol))
    )


def random_kernel(
    d: int,
    rng: np.random.Generator,
    unit_fraction: float = 0.5,
    max_modulus: float = 0.9,
) -> QKernel:
    """
    A random Hermitian kernel mixing unimodular entries and entries of modulus
    at most ``max_modulus``.

    Sub-unit moduli are kept away from 1 so the spectral gap of the
    symmetriser stays well above double-precision noise.
    """
    Q = np.zeros((d, d), dtype=complex)
    for s in range(d):
        if rng.random() < unit_fraction:
            Q[s, s] = rng.choice([-1.0, 1.0])
        else:
            Q[s, s] = rng.uniform(-max_modulus, max_modulus)
        for t in range(s + 1, d):
            phase = cmath.exp(2j * cmath.pi * rng.random())
            r = 1.0 if rng.random() < unit_fraction else max_modulus * rng.random()
            Q[s, t] = r * phase
            Q[t, s] = np.conj(Q[s, t])
    return make_kernel(Q)


# --- JSON -------------------------------------------------------------------


def _complex_from_json(v) -> complex:
    if isinstance(v, (int, float)):
        return complex(v)
    if isinstance(v, (list, tuple)) and len(v) == 2:
        return complex(float(v[0]), float(v[1]))
    raise KernelError(f"complex numbers must be [re, im] pairs, got {v!r}")


def kernel_from_dict(spec: dict[str, Any]) -> QKernel:
    if not isinstance(spec, dict):
        raise KernelError("kernel spec must be a JSON object")
    kind = spec.get("kind")
    if kind is not None:
        if "q" not in spec or "d" not in spec:
            raise KernelError(f"kernel kind {kind!r} needs 'q' and 'd'")
        q = _complex_from_json(spec["q"])
        d = int(spec["d"])
        if kind == "constant":
            if abs(q.imag) > 0:
                raise KernelError("constant kernel needs a real q")
            return constant_kernel(q.real, d)
        if kind == "anyon_fermion":
            return anyon_fermion_kernel(q, d)
        raise KernelError(f"unknown kernel kind {kind!r}")
    if "entries" not in spec:
        raise KernelError("kernel spec needs either 'kind' or 'entries'")
    rows = spec["entries"]
    M = np.array([[_complex_from_json(v) for v in row] for row in rows], dtype=complex)
    if "d" in spec and M.shape != (int(spec["d"]), int(spec["d"])):
        raise KernelError(f"'d' = {spec['d']} does not match entries of shape {M.shape}")
    return make_kernel(M)


def kernel_to_dict(K: QKernel) -> dict[str, Any]:
    return {
        "d": K.d,
        "entries": [[[float(z.real), float(z.imag)] for z in row] for row in K.Q],
    }


def load_kernel(path: str | os.PathLike) -> QKernel:
    """Read a kernel JSON file; syntax errors report line and column."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    try:
        spec = json.loads(text)
    except json.JSONDecodeError as exc:
        raise KernelError(
            f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    return kernel_from_dict(spec)


def save_kernel(K: QKernel, path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(kernel_to_dict(K), fh, indent=2)
        fh.write("\n")
