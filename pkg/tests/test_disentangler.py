import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mpdcircuit import mps
from mpdcircuit._kernels import apply_one_qubit_gate, apply_two_qubit_gate
from mpdcircuit.disentangler import (
    DisentanglerLayer,
    apply_layer,
    build_layer,
    generated_columns_defect,
    layer_unitarity_defect,
    layer_unitary,
)
from mpdcircuit.errors import BondTooLargeError, DimensionMismatchError
from mpdcircuit.tensor import unitarity_defect


def generate_dense(layer, n):
    v = np.zeros((2**n, 1), dtype=complex)
    v[0] = 1
    for k, g in enumerate(layer.two_qubit_gates):
        v = apply_two_qubit_gate(v, g, k, k + 1, n)
    return apply_one_qubit_gate(v, layer.final_gate, n - 1, n)[:, 0]


def test_ghz3_layer():
    psi = mps.ghz_mps(3)
    layer = build_layer(psi)
    assert len(layer.gates) == 3
    assert layer.final_gate.shape == (2, 2)
    rep = layer_unitarity_defect(layer, check_global=True)
    assert rep.max_gate_defect <= 1e-12 and rep.global_defect <= 1e-12
    assert generated_columns_defect(layer, psi) <= 1e-12
    out = apply_layer(layer, psi)
    assert abs(mps.overlap_with_zero(out)) == pytest.approx(1, abs=1e-12)


def test_product_state_layer():
    psi = mps.product_state([1, 0, 1, 1])
    layer = build_layer(psi)
    assert layer_unitarity_defect(layer).max_gate_defect <= 1e-12
    assert abs(mps.overlap_with_zero(apply_layer(layer, psi))) == pytest.approx(1, abs=1e-12)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_random_chi2_generates_state(seed):
    psi = mps.random_mps(8, 2, seed=seed)
    layer = build_layer(psi)
    v = generate_dense(layer, 8)
    assert abs(abs(np.vdot(mps.to_statevector(psi), v)) - 1) <= 1e-10
    out = apply_layer(layer, psi)
    assert 1 - abs(mps.overlap_with_zero(out)) <= 1e-10


def test_scaled_gate_flagged():
    layer = build_layer(mps.random_mps(4, 2, seed=3))
    gates = list(layer.two_qubit_gates)
    gates[1] = 1.1 * gates[1]
    bad = DisentanglerLayer(2, 4, tuple(gates), layer.final_gate)
    assert layer_unitarity_defect(bad).max_gate_defect == pytest.approx(0.21, abs=1e-12)


def test_global_unitarity_n6():
    layer = build_layer(mps.random_mps(6, 2, seed=4))
    u = layer_unitary(layer)
    assert unitarity_defect(u) <= 1e-12
    assert layer_unitarity_defect(layer, check_global=True).global_defect <= 1e-12


def test_disentangle_ghz8():
    psi = mps.ghz_mps(8)
    out = apply_layer(build_layer(psi), psi)
    assert out.max_bond == 1
    assert np.abs(mps.to_statevector(out) - np.eye(256)[0] * mps.overlap_with_zero(out)).max() < 1e-12
    assert abs(mps.overlap_with_zero(out)) == pytest.approx(1, abs=1e-12)


def test_round_trip_large_bond():
    psi = mps.random_mps(8, 8, seed=5)
    tilde, _ = mps.truncate(psi, 2)
    layer = build_layer(tilde)
    back = apply_layer(layer, apply_layer(layer, psi), "generate")
    assert abs(abs(mps.inner(psi, back)) - 1) <= 1e-10


@settings(max_examples=10, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(2, 8))
def test_gate_unitarity_property(seed, n):
    psi = mps.random_mps(n, 2, seed=seed)
    layer = build_layer(psi)
    assert layer_unitarity_defect(layer).max_gate_defect <= 1e-12
    assert generated_columns_defect(layer, psi) <= 1e-12


def test_complement_columns_orthogonal_to_kernel():
    psi = mps.random_mps(5, 2, seed=6)
    layer = build_layer(psi)
    for g in layer.two_qubit_gates:
        fixed, free = g[:, [0, 2]], g[:, [1, 3]]
        assert np.abs(fixed.conj().T @ free).max() <= 1e-12


def test_bond_growth_bounded():
    # one layer at most doubles each bond of a canonical state
    psi = mps.random_mps(8, 3, seed=7)
    layer = build_layer(mps.truncate(psi, 2)[0])
    out = apply_layer(layer, psi, "generate")
    assert all(b <= 2 * a for a, b in zip(psi.bond_dims, out.bond_dims))


def test_bond_too_large():
    with pytest.raises(BondTooLargeError):
        build_layer(mps.random_mps(6, 4, seed=0))


def test_layer_size_mismatch():
    layer = build_layer(mps.ghz_mps(4))
    with pytest.raises(DimensionMismatchError):
        apply_layer(layer, mps.ghz_mps(5))


def test_unknown_direction():
    psi = mps.ghz_mps(3)
    with pytest.raises(ValueError):
        apply_layer(build_layer(psi), psi, "sideways")
