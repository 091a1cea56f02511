import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mpdcircuit.errors import DimensionMismatchError, NotIsometricError
from mpdcircuit.tensor import contract, isometry_defect, orthonormal_complement, truncated_svd


def _rand(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def _loop_contract_axis2_axis0(a, b):
    out = np.zeros((a.shape[0], a.shape[1], b.shape[1]), dtype=complex)
    for i in range(a.shape[0]):
        for j in range(a.shape[1]):
            for m in range(b.shape[1]):
                for k in range(a.shape[2]):
                    out[i, j, m] += a[i, j, k] * b[k, m]
    return out


def test_contract_identity():
    out = contract(np.eye(2), np.array([1.0, 0.0]), [(1, 0)])
    np.testing.assert_allclose(out, [1, 0])


def test_contract_squared_norm():
    v = np.array([3, 4j])
    assert contract(v, v.conj(), [(0, 0)]) == pytest.approx(25)


def test_contract_matches_loop_oracle(rng):
    a = _rand(rng, 2, 3, 4)
    b = _rand(rng, 4, 5)
    np.testing.assert_allclose(contract(a, b, [(2, 0)]), _loop_contract_axis2_axis0(a, b), atol=1e-13)


def test_contract_free_axis_order(rng):
    a = _rand(rng, 2, 3, 4)
    b = _rand(rng, 5, 3)
    assert contract(a, b, [(1, 1)]).shape == (2, 4, 5)


def test_contract_mismatch_names_pair():
    with pytest.raises(DimensionMismatchError, match=r"\(1, 0\)"):
        contract(np.ones((2, 3)), np.ones((4,)), [(1, 0)])


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), alpha_re=st.floats(-3, 3), alpha_im=st.floats(-3, 3))
def test_contract_bilinear(seed, alpha_re, alpha_im):
    rng = np.random.default_rng(seed)
    a, b = _rand(rng, 3, 4), _rand(rng, 4, 2)
    alpha = alpha_re + 1j * alpha_im
    np.testing.assert_allclose(contract(alpha * a, b, [(1, 0)]), alpha * contract(a, b, [(1, 0)]), atol=1e-12)


def test_svd_identity():
    r = truncated_svd(np.eye(2), 2, 0.0)
    np.testing.assert_allclose(r.singular_values, [1, 1])
    assert r.discarded_weight == 0


def test_svd_exact_rank_one():
    r = truncated_svd(np.array([[1.0, 0], [0, 0]]), 1)
    np.testing.assert_allclose(r.singular_values, [1])
    assert r.discarded_weight == 0


def test_svd_discarded_weight_matches_full_svd(rng):
    m = _rand(rng, 8, 8)
    full = np.linalg.svd(m, compute_uv=False)
    expected = np.sum(full[4:] ** 2) / np.sum(full**2)
    r = truncated_svd(m, 4)
    assert r.rank == 4
    assert abs(r.discarded_weight - expected) < 1e-12


def test_svd_zero_matrix_keeps_one():
    r = truncated_svd(np.zeros((3, 2)), 2, 1e-3)
    assert r.rank == 1
    assert r.singular_values[0] == 0
    assert r.discarded_weight == 0


def test_svd_cutoff_relative():
    m = np.diag([1.0, 1e-3, 1e-14])
    assert truncated_svd(m, 3, 1e-12).rank == 2
    assert truncated_svd(m, 3, 1e-2).rank == 1


def test_svd_phase_convention(rng):
    r = truncated_svd(_rand(rng, 6, 4), 4)
    for col in r.left.T:
        pivot = col[np.argmax(np.abs(col))]
        assert abs(pivot.imag) < 1e-14 and pivot.real > 0


def test_svd_deterministic(rng):
    m = _rand(rng, 7, 5)
    a, b = truncated_svd(m, 3), truncated_svd(m.copy(), 3)
    assert np.array_equal(a.left, b.left) and np.array_equal(a.right_adjoint, b.right_adjoint)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), rows=st.integers(1, 9), cols=st.integers(1, 9))
def test_svd_invariants_and_reconstruction(seed, rows, cols):
    rng = np.random.default_rng(seed)
    m = _rand(rng, rows, cols)
    r = truncated_svd(m, max(rows, cols), 0.0)
    s = r.singular_values
    assert np.all(np.diff(s) <= 0) and np.all(s >= 0)
    assert isometry_defect(r.left) < 1e-12
    assert isometry_defect(r.right_adjoint.conj().T) < 1e-12
    assert 0 <= r.discarded_weight <= 1
    recon = (r.left * s) @ r.right_adjoint
    assert np.linalg.norm(recon - m) <= 1e-11 * np.linalg.norm(m)


def test_complement_coordinate_case():
    e0 = np.zeros((4, 1))
    e0[0] = 1
    k = orthonormal_complement(e0)
    assert k.shape == (4, 3)
    assert np.allclose(k[0], 0)
    np.testing.assert_allclose(e0 @ e0.T + k @ k.conj().T, np.eye(4), atol=1e-12)


def test_complement_of_unitary_is_empty(rng):
    q, _ = np.linalg.qr(_rand(rng, 4, 4))
    assert orthonormal_complement(q).shape == (4, 0)


def _check_complement(v, k):
    m = v.shape[0]
    assert np.linalg.norm(k.conj().T @ k - np.eye(k.shape[1])) < 1e-12
    assert np.linalg.norm(v.conj().T @ k) < 1e-12
    assert np.linalg.norm(v @ v.conj().T + k @ k.conj().T - np.eye(m)) < 1e-12


def test_complement_random_isometry(rng):
    v, _ = np.linalg.qr(_rand(rng, 4, 2))
    _check_complement(v, orthonormal_complement(v))


def test_complement_rejects_non_isometry():
    with pytest.raises(NotIsometricError) as info:
        orthonormal_complement(np.array([[1.1], [0.0]]))
    assert info.value.defect == pytest.approx(0.21)


def test_complement_deterministic(rng):
    v, _ = np.linalg.qr(_rand(rng, 9, 3))
    assert np.array_equal(orthonormal_complement(v), orthonormal_complement(v.copy()))


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), m=st.integers(1, 10), data=st.data())
def test_complement_projector_identity(seed, m, data):
    r = data.draw(st.integers(0, m))
    rng = np.random.default_rng(seed)
    v, _ = np.linalg.qr(_rand(rng, m, m))
    v = v[:, :r]
    _check_complement(v, orthonormal_complement(v))
