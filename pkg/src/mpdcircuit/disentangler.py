"""Single-layer matrix product disentanglers.

A layer is built from a canonical MPS whose bonds are all ``<= d``. Gate
``n < N-1`` acts on sites ``(n, n+1)`` and is the unitary completion of the
isometry ``|b>_n |0>_{n+1} -> sum_{s,a} A[n][s, b, a] |s>_n |a>_{n+1}``; the
last gate acts on site ``N-1`` alone. Applying the gates in ascending order
to ``|0...0>`` regenerates the MPS exactly; applying their adjoints in
descending order maps the MPS back to ``|0...0>``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .errors import BondTooLargeError, DimensionMismatchError, SizeLimitError
from .mps import (
    MpsState,
    _apply_gate_block,
    _left_orthonormalize,
    _normalize_site,
    _right_orthonormalize,
    _split_theta,
    canonicalize,
)
from .tensor import DEFAULT_CUTOFF, orthonormal_complement, unitarity_defect
from . import _kernels

MAX_GLOBAL_SITES = 10

Direction = Literal["disentangle", "generate"]


@dataclass(frozen=True, eq=False)
class DisentanglerLayer:
    d: int
    n_sites: int
    two_qubit_gates: tuple[np.ndarray, ...]
    final_gate: np.ndarray

    def __post_init__(self):
        if len(self.two_qubit_gates) != self.n_sites - 1:
            raise DimensionMismatchError(
                f"{len(self.two_qubit_gates)} two-site gates for {self.n_sites} sites"
            )

    @property
    def gates(self) -> list[np.ndarray]:
        """All N gates in generation order."""
        return list(self.two_qubit_gates) + [self.final_gate]


@dataclass(frozen=True)
class UnitarityReport:
    per_gate: list[float]
    global_defect: float | None = None

    @property
    def max_gate_defect(self) -> float:
        return max(self.per_gate, default=0.0)


def _complete(columns: np.ndarray, slots: list[int], dim: int) -> np.ndarray:
    """Unitary whose columns ``slots`` are ``columns``; the rest come from the complement."""
    u = np.zeros((dim, dim), dtype=np.complex128)
    k = orthonormal_complement(columns)
    u[:, slots] = columns
    free = [j for j in range(dim) if j not in set(slots)]
    u[:, free] = k
    return u


def _padded(t: np.ndarray, d: int) -> np.ndarray:
    """Zero-pad the right bond of a site tensor to ``d``."""
    s, cl, cr = t.shape
    out = np.zeros((s, cl, d), dtype=np.complex128)
    out[:, :, :cr] = t
    return out


def build_layer(psi_tilde: MpsState) -> DisentanglerLayer:
    """Disentangler of a canonical MPS with every bond ``<= d``."""
    d, n_sites = psi_tilde.d, psi_tilde.n_sites
    if psi_tilde.max_bond > d:
        raise BondTooLargeError(
            f"bond dimension {psi_tilde.max_bond} exceeds d={d}; truncate the state to chi=d first"
        )
    psi_tilde = canonicalize(psi_tilde)
    ts = psi_tilde.tensors
    gates = []
    for n in range(n_sites - 1):
        a = _padded(ts[n], d)  # (s, b, a)
        chi_l = a.shape[1]
        # column (b, 0) of the gate holds vec_{s,a} A[s, b, a]
        cols = a.transpose(0, 2, 1).reshape(d * d, chi_l)
        slots = [b * d for b in range(chi_l)]
        gates.append(_complete(cols, slots, d * d))
    last = ts[-1][:, :, 0]  # (s, b)
    final = _complete(last, list(range(last.shape[1])), d)
    return DisentanglerLayer(d, n_sites, tuple(gates), final)


def generated_columns_defect(layer: DisentanglerLayer, psi_tilde: MpsState) -> float:
    """Largest deviation of the constrained gate columns from the MPS tensors."""
    d = layer.d
    worst = 0.0
    for n, t in enumerate(psi_tilde.tensors[:-1]):
        a = _padded(t, d)
        cols = a.transpose(0, 2, 1).reshape(d * d, a.shape[1])
        g = layer.two_qubit_gates[n][:, [b * d for b in range(a.shape[1])]]
        worst = max(worst, float(np.abs(g - cols).max()))
    return worst


def layer_unitary(layer: DisentanglerLayer) -> np.ndarray:
    """Dense ``d^N x d^N`` matrix of the generation circuit (the adjoint of the disentangler)."""
    n = layer.n_sites
    if n > MAX_GLOBAL_SITES:
        raise SizeLimitError(f"dense layer operator limited to {MAX_GLOBAL_SITES} sites")
    if layer.d != 2:
        raise DimensionMismatchError("dense layer operator implemented for qubits only")
    u = np.eye(2**n, dtype=np.complex128)
    for k, g in enumerate(layer.two_qubit_gates):
        u = _kernels.apply_two_qubit_gate(u, g, k, k + 1, n)
    return _kernels.apply_one_qubit_gate(u, layer.final_gate, n - 1, n)


def layer_unitarity_defect(layer: DisentanglerLayer, check_global: bool = False) -> UnitarityReport:
    per_gate = [unitarity_defect(g) for g in layer.gates]
    glob = None
    if check_global:
        if layer.n_sites > MAX_GLOBAL_SITES:
            raise SizeLimitError(f"global unitarity check limited to N <= {MAX_GLOBAL_SITES}")
        glob = unitarity_defect(layer_unitary(layer))
    return UnitarityReport(per_gate, glob)


def sweep_layer(layer: DisentanglerLayer, psi: MpsState, direction: Direction, chi_cap: int,
                cutoff: float = DEFAULT_CUTOFF) -> tuple[MpsState, list[float]]:
    """Apply a layer with TEBD-style truncation; also returns per-gate discarded weights."""
    if psi.n_sites != layer.n_sites or psi.d != layer.d:
        raise DimensionMismatchError(
            f"layer is (N={layer.n_sites}, d={layer.d}); state is (N={psi.n_sites}, d={psi.d})"
        )
    n_sites = psi.n_sites
    psi = canonicalize(psi)
    ts = [np.array(t) for t in psi.tensors]
    weights = []
    if direction == "generate":
        for n, g in enumerate(layer.two_qubit_gates):
            theta = _apply_gate_block(ts[n], ts[n + 1], g)
            ts[n], ts[n + 1], w = _split_theta(theta, chi_cap, cutoff, center_left=False)
            weights.append(w)
        ts[-1] = np.tensordot(layer.final_gate, ts[-1], axes=([1], [0]))
        _right_orthonormalize(ts, n_sites - 1, 0)
    elif direction == "disentangle":
        _left_orthonormalize(ts, 0, n_sites - 1)
        ts[-1] = np.tensordot(layer.final_gate.conj().T, ts[-1], axes=([1], [0]))
        for n in range(n_sites - 2, -1, -1):
            g = layer.two_qubit_gates[n].conj().T
            theta = _apply_gate_block(ts[n], ts[n + 1], g)
            ts[n], ts[n + 1], w = _split_theta(theta, chi_cap, cutoff, center_left=True)
            weights.append(w)
        weights.reverse()
    else:
        raise ValueError(f"unknown direction {direction!r}")
    _normalize_site(ts, 0)
    return MpsState(tuple(ts), canonical=True), weights


def apply_layer(layer: DisentanglerLayer, psi: MpsState, direction: Direction = "disentangle",
                chi_cap: int = 2**62, cutoff: float = DEFAULT_CUTOFF) -> MpsState:
    """Disentangle (``U|psi>``) or generate (``U^dag|psi>``) with bonds capped at ``chi_cap``."""
    return sweep_layer(layer, psi, direction, chi_cap, cutoff)[0]
