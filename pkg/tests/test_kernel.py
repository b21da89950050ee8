from __future__ import annotations

import json

import numpy as np
import pytest

from qfock.kernel import (
    BoundError,
    HermitianError,
    KernelError,
    anyon_fermion_kernel,
    anyon_parameter,
    constant_kernel,
    derive_g,
    derive_r,
    is_fermion_type,
    kernel_from_dict,
    kernel_to_dict,
    load_kernel,
    make_kernel,
    random_kernel,
    save_kernel,
)


def test_non_hermitian_is_rejected_not_symmetrised():
    with pytest.raises(HermitianError) as info:
        make_kernel([[1, 0.5], [0.4, 1]])
    assert info.value.pair == (0, 1)
    with pytest.raises(HermitianError):
        make_kernel([[0.5j, 0], [0, 1]])


def test_bound_and_shape():
    with pytest.raises(BoundError):
        make_kernel([[1.5, 0], [0, 1]])
    with pytest.raises(KernelError):
        make_kernel([[1, 0, 0], [0, 1, 0]])
    with pytest.raises(KernelError):
        make_kernel(np.zeros((0, 0)))


def test_kernel_is_immutable():
    K = constant_kernel(0.3, 2)
    with pytest.raises(ValueError):
        K.Q[0, 0] = 1


def test_constant_kernel_range():
    assert np.all(constant_kernel(-1, 3).Q == -1)
    with pytest.raises(KernelError):
        constant_kernel(1.2, 2)
    with pytest.raises(KernelError):
        constant_kernel(0.5j, 2)


def test_anyon_kernel_form():
    q = np.exp(0.7j)
    K = anyon_fermion_kernel(q, 3)
    assert K.Q[2, 0] == q and K.Q[0, 2] == np.conj(q)
    assert np.all(np.diag(K.Q) == -1)
    assert anyon_parameter(K) == pytest.approx(q)
    assert is_fermion_type(K)
    assert anyon_parameter(constant_kernel(-1, 3)) == pytest.approx(-1)
    assert anyon_parameter(constant_kernel(0.5, 3)) is None
    with pytest.raises(KernelError):
        anyon_fermion_kernel(0.5, 2)


def test_derived_kernels():
    Q = np.array([[1, 0.3], [0.3, -1]], dtype=complex)
    R = derive_r(make_kernel(Q))
    assert np.array_equal(R.theta_mask, [[True, False], [False, True]])
    assert np.array_equal(R.R, [[1, 0], [0, -1]])
    G = derive_g(R)
    assert np.array_equal(G.G, [[1, 1], [1, -1]])
    assert np.allclose(np.abs(G.G), 1)


def test_modulus_one_tolerance():
    K = make_kernel([[1 - 1e-13, 0], [0, 1 - 1e-6]])
    assert K.theta_mask(1e-12).tolist() == [[True, False], [False, False]]


def test_random_kernel_is_valid_and_reproducible():
    a = random_kernel(4, np.random.default_rng(3))
    b = random_kernel(4, np.random.default_rng(3))
    assert a == b and hash(a) == hash(b)
    assert np.allclose(a.Q, a.Q.conj().T, atol=0)
    off = np.abs(a.Q[~a.theta_mask()])
    assert np.all(off <= 0.9)


def test_json_round_trip(tmp_path):
    K = random_kernel(3, np.random.default_rng(8))
    path = tmp_path / "k.json"
    save_kernel(K, path)
    assert load_kernel(path) == K
    assert kernel_from_dict(json.loads(json.dumps(kernel_to_dict(K)))) == K


def test_named_kinds_from_dict():
    K = kernel_from_dict({"kind": "anyon_fermion", "q": [0.0, 1.0], "d": 2})
    assert K.Q[1, 0] == 1j
    assert kernel_from_dict({"kind": "constant", "q": 0.25, "d": 2}) == constant_kernel(0.25, 2)
    with pytest.raises(KernelError):
        kernel_from_dict({"kind": "mystery", "q": 0, "d": 2})
    with pytest.raises(KernelError):
        kernel_from_dict({"d": 3, "entries": [[[1, 0]]]})


def test_parse_error_names_position(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"d": 1,\n  "entries": [[[1, 0]]\n}')
    with pytest.raises(KernelError, match="line 3, column 1"):
        load_kernel(path)
