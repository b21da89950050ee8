from __future__ import annotations

import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import _oracles as oracle
from qfock import qsym
from qfock.fock import random_quasisymmetric
from qfock.kernel import (
    anyon_fermion_kernel,
    constant_kernel,
    derive_g,
    derive_r,
    make_kernel,
    random_kernel,
)
from qfock.permgroup import SizeLimitError, all_permutations, compose, inverse, transposition
from qfock.qsym import residual

SPECIAL = [
    constant_kernel(1.0, 2),
    constant_kernel(-1.0, 2),
    constant_kernel(0.0, 2),
    constant_kernel(0.6, 2),
    anyon_fermion_kernel(1j, 2),
    anyon_fermion_kernel(np.exp(2j * np.pi / 3), 3),
]
RANDOM = [random_kernel(3, np.random.default_rng(s)) for s in range(4)]
KERNELS = SPECIAL + RANDOM

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def kernel_from_seed(seed, d=3):
    rng = np.random.default_rng(seed)
    return random_kernel(d, rng, unit_fraction=rng.uniform(0.2, 0.8))


def test_codec_round_trip():
    for t in itertools.product(range(3), repeat=3):
        i = qsym.tuple_to_index(t, 3)
        assert qsym.index_to_tuple(i, 3, 3) == t
        assert tuple(qsym.basis_tuples(3, 3)[i]) == t
    f, g = np.arange(3.0), np.arange(2.0, 5.0)
    assert np.array_equal(qsym.tensor(f, g), np.kron(f, g))
    assert qsym.degree_of(np.zeros(27), 3) == 3
    with pytest.raises(ValueError):
        qsym.degree_of(np.zeros(10), 3)


def test_size_cap():
    with pytest.raises(SizeLimitError):
        qsym.p_n(constant_kernel(0.5, 4), 7)
    with pytest.raises(SizeLimitError):
        qsym.p_n(constant_kernel(0.5, 2), 3, cap=4)


@pytest.mark.parametrize("K", KERNELS, ids=repr)
def test_psi_matches_loop_oracle(K):
    n = 3
    for p in all_permutations(n):
        assert residual(qsym.psi_pi(K, p), oracle.psi(K.Q, p.images, K.d)) < 1e-15


@pytest.mark.parametrize("K", KERNELS, ids=repr)
def test_braid_relations(K):
    n = 4
    psi = [qsym.psi_k(K, n, k) for k in range(1, n)]
    for k, P in enumerate(psi):
        assert residual(P, P.conj().T) < 1e-12
    assert residual(psi[0] @ psi[2], psi[2] @ psi[0]) < 1e-12
    for a, b in [(0, 1), (1, 2)]:
        assert residual(psi[a] @ psi[b] @ psi[a], psi[b] @ psi[a] @ psi[b]) < 1e-12


def test_psi_squared_on_theta_and_off():
    K = make_kernel([[1, 0.5], [0.5, -1]])
    P = qsym.psi_k(K, 2, 1)
    # |Q|^2 on the diagonal of Psi_1^2
    sq = np.diag(P @ P).real
    assert np.allclose(sq, [1, 0.25, 0.25, 1])


@pytest.mark.parametrize("K", KERNELS, ids=repr)
def test_every_reduced_word_gives_the_same_operator(K):
    for p in all_permutations(4):
        closed = qsym.psi_pi(K, p)
        for word in qsym.welldefined_words(p):
            assert residual(qsym.psi_word(K, word, 4), closed) < 1e-12


@pytest.mark.parametrize("K", RANDOM, ids=repr)
def test_unimodular_kernel_gives_a_representation(K):
    G = derive_g(derive_r(K))
    mats = {p: qsym.gamma_pi(G, p) for p in all_permutations(3)}
    for p, v in itertools.product(mats, repeat=2):
        assert residual(mats[p] @ mats[v], mats[compose(p, v)]) < 1e-14
    for p, M in mats.items():
        assert residual(M.conj().T, mats[inverse(p)]) < 1e-14


@pytest.mark.parametrize("K", RANDOM, ids=repr)
def test_phi_conjugation(K):
    # Psi_k restricted to Theta-rows equals Phi_k; off Theta it vanishes for R
    R = derive_r(K)
    n = 3
    T = qsym.basis_tuples(K.d, n)
    for k in range(1, n):
        chi = R.theta_mask[T[:, k - 1], T[:, k]]
        Phi = qsym.phi_pi(R, transposition(n, k))
        Psi = qsym.psi_k(K, n, k)
        assert residual(Phi[chi], Psi[chi]) == 0
        assert not np.any(Phi[~chi])


@pytest.mark.parametrize("K", KERNELS, ids=repr)
def test_symmetriser_matches_oracle_and_is_positive(K):
    for n in range(2, 4):
        P = qsym.p_n(K, n)
        assert residual(P, oracle.symmetriser(K.Q, K.d, n)) < 1e-14
        w = np.linalg.eigvalsh(P)
        assert w[0] >= -1e-10 and w[-1] <= 1 + 1e-10


def test_symmetriser_special_cases():
    d, n = 2, 3
    assert residual(qsym.p_n(constant_kernel(0, d), n), np.eye(d**n) / 6) == 0
    B = qsym.p_n(constant_kernel(1, d), n)
    assert residual(B @ B, B) < 1e-15 and np.isclose(np.trace(B).real, 4)
    F = qsym.p_n(constant_kernel(-1, 3), 3)
    assert residual(F @ F, F) < 1e-15 and np.isclose(np.trace(F).real, 1)


@pytest.mark.parametrize("K", KERNELS, ids=repr)
def test_projection_laws(K):
    for n in range(2, 5 if K.d == 2 else 4):
        B = qsym.bb_p_n(K, n)
        P = qsym.p_n(K, n)
        assert residual(B @ B, B) < 1e-10
        assert residual(B, B.conj().T) < 1e-10
        assert residual(B @ P, P) < 1e-10
        assert residual(P @ B, P) < 1e-10
        assert residual(qsym.range_projector(P), B) < 1e-8
        assert residual(B, oracle.quasisym_projector(K.Q, K.d, n)) < 1e-8


def test_projection_is_identity_without_unimodular_values():
    K = random_kernel(3, np.random.default_rng(2), unit_fraction=0.0)
    for n in range(1, 5):
        assert residual(qsym.bb_p_n(K, n), np.eye(3**n)) == 0


def test_s_n_1_and_c_n():
    K = anyon_fermion_kernel(1j, 2)
    members, c = qsym.s_n_1(derive_r(K), (0, 1, 1))
    assert c == len(members) == 6
    K = make_kernel([[1, 0.2], [0.2, 1]])
    _, c = qsym.s_n_1(derive_r(K), (0, 0, 1))
    # only swaps inside the block of zeros keep |R| = 1
    assert c == 2


@pytest.mark.parametrize("K", KERNELS, ids=repr)
def test_kernel_theorem(K):
    for n in range(2, 5 if K.d == 2 else 4):
        ker = qsym.kernel_projector(qsym.p_n(K, n))
        assert residual(ker, qsym.ker_p_n_span_projector(K, n)) < 1e-8


@pytest.mark.parametrize("K", KERNELS, ids=repr)
def test_e_k_projects_onto_kernel_of_one_plus_psi(K):
    n = 3
    for k in range(1, n):
        E = qsym.ker_projection_e_k(K, n, k)
        assert residual(E @ E, E) < 1e-14 and residual(E, E.conj().T) < 1e-14
        assert residual((np.eye(E.shape[0]) + qsym.psi_k(K, n, k)) @ E, 0) < 1e-14


@pytest.mark.parametrize("K", KERNELS, ids=repr)
def test_recursion(K):
    for n in range(1, 4):
        lhs = (n + 1) * qsym.p_n(K, n + 1)
        rhs = np.kron(np.eye(K.d), qsym.p_n(K, n)) @ qsym.r_n_operator(K, n + 1)
        assert residual(lhs, rhs) < 1e-12


@pytest.mark.parametrize("K", KERNELS, ids=repr)
def test_projection_absorbs_tensor_factors(K):
    n = 4 if K.d == 2 else 3
    B = qsym.bb_p_n(K, n)
    for k in range(1, n):
        assert residual(B @ np.kron(qsym.bb_p_n(K, k), qsym.bb_p_n(K, n - k)), B) < 1e-10


@pytest.mark.parametrize("K", KERNELS, ids=repr)
def test_quasisymmetric_product_is_associative(K):
    rng = np.random.default_rng(5)
    f, g, h = (random_quasisymmetric(K, 1, rng) for _ in range(3))
    left = qsym.qsym_product(K, qsym.qsym_product(K, f, g), h)
    right = qsym.qsym_product(K, f, qsym.qsym_product(K, g, h))
    assert residual(left, right) < 1e-10
    ok, res = qsym.quasisym_check(K, left)
    assert ok, res


def test_quasisym_check_detects_violation():
    K = constant_kernel(-1.0, 2)
    ok, res = qsym.quasisym_check(K, qsym.basis_vector(2, (0, 1)))
    assert not ok and res == pytest.approx(1.0)
    ok, _ = qsym.quasisym_check(K, qsym.basis_vector(2, (0, 1)) - qsym.basis_vector(2, (1, 0)))
    assert ok


@settings(max_examples=25, deadline=None)
@given(seeds, st.integers(min_value=2, max_value=4))
def test_property_symmetriser_is_psd_with_projection_range(seed, n):
    K = kernel_from_seed(seed, d=2 if n == 4 else 3)
    P = qsym.p_n(K, n)
    assert np.linalg.eigvalsh(P)[0] >= -1e-10
    B = qsym.bb_p_n(K, n)
    assert residual(qsym.range_projector(P), B) < 1e-8


@settings(max_examples=25, deadline=None)
@given(seeds)
def test_property_psi_fixes_range_on_theta_rows(seed):
    K = kernel_from_seed(seed)
    n = 3
    B = qsym.bb_p_n(K, n)
    T = qsym.basis_tuples(K.d, n)
    theta = K.theta_mask()
    for k in range(1, n):
        chi = theta[T[:, k - 1], T[:, k]]
        assert residual((qsym.psi_k(K, n, k) @ B)[chi], B[chi]) < 1e-12


@settings(max_examples=25, deadline=None)
@given(seeds)
def test_property_unimodular_kernel_absorbs_permutations(seed):
    K = derive_g(derive_r(kernel_from_seed(seed))).G
    K = make_kernel(K)
    P = qsym.p_n(K, 3)
    for p in all_permutations(3):
        assert residual(P @ qsym.psi_pi(K, p), P) < 1e-12
        assert residual(qsym.psi_pi(K, p) @ P, P) < 1e-12


@settings(max_examples=20, deadline=None)
@given(seeds)
def test_property_projection_of_random_vector_is_quasisymmetric(seed):
    K = kernel_from_seed(seed)
    rng = np.random.default_rng(seed)
    f = random_quasisymmetric(K, 3, rng)
    ok, res = qsym.quasisym_check(K, f)
    assert ok, res
    assert np.linalg.norm(qsym.bb_p_n(K, 3) @ f - f) < 1e-12 * max(1, np.linalg.norm(f))


def test_trace_of_projection_counts_orbits_for_fermions():
    # antisymmetric tensors over d sites: dimension C(d, n)
    for d, n in [(3, 2), (3, 3), (4, 2)]:
        B = qsym.bb_p_n(constant_kernel(-1.0, d), n)
        assert round(np.trace(B).real) == math.comb(d, n)
