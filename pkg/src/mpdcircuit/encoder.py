"""Multi-layer encoding of an MPS into stacked disentanglers.

Each iteration truncates the current state to bond dimension ``d``, builds the
disentangler of that truncation, and applies it to the (untruncated) current
state under a bond cap ``chi_tilde``. Layers are stored in generation order:
layer 1 (computed last) acts first on ``|0...0>``.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .disentangler import DisentanglerLayer, build_layer, sweep_layer
from .errors import DimensionMismatchError
from .mps import MpsState, canonicalize, global_entanglement_nlf, nlf, overlap_with_zero, truncate, zero_state
from .tensor import DEFAULT_CUTOFF

DEFAULT_CHI_TILDE = 64
UNBOUNDED = 2**62


@dataclass(frozen=True, eq=False)
class EncodedCircuit:
    d: int
    n_sites: int
    layers: tuple[DisentanglerLayer, ...] = ()
    chi_tilde: int | None = None

    def __post_init__(self):
        for layer in self.layers:
            if layer.d != self.d or layer.n_sites != self.n_sites:
                raise DimensionMismatchError("all layers must share d and n_sites")

    @property
    def n_layers(self) -> int:
        return len(self.layers)

    def prefix(self, depth: int) -> "EncodedCircuit":
        """The circuit of the first ``depth`` computed layers (the last ``depth`` in generation order)."""
        if not 0 <= depth <= self.n_layers:
            raise ValueError(f"depth {depth} outside 0..{self.n_layers}")
        layers = self.layers[self.n_layers - depth:] if depth else ()
        return EncodedCircuit(self.d, self.n_sites, tuple(layers), self.chi_tilde)


def parameter_counts(d: int, chi: int, n_layers: int) -> dict[str, int]:
    """Per-site coefficient counts of the MPS (``d chi^2``) and the circuit (``D d^4``)."""
    return {"mps_per_site": d * chi**2, "circuit_per_site": n_layers * d**4}


@dataclass
class EncodeReport:
    nlf: list[float]
    max_discarded_weight: list[float]
    encode_discarded_weight: list[float]
    nlf_reverse: list[float]
    seconds: list[float]
    chi_tilde: int
    chi: int
    d: int
    n_layers: int
    parameters: dict[str, int] = field(default_factory=dict)

    def csv_rows(self, timings: bool = True) -> list[list[str]]:
        rows = []
        for depth in range(self.n_layers + 1):
            secs = repr(self.seconds[depth]) if timings else ""
            rows.append([str(depth), repr(self.nlf[depth]), repr(self.max_discarded_weight[depth]), secs])
        return rows


CSV_HEADER = ["depth", "nlf", "max_discarded_weight", "seconds"]


def evolve_with_stats(circuit: EncodedCircuit, chi_cap: int = UNBOUNDED,
                      cutoff: float = DEFAULT_CUTOFF) -> tuple[MpsState, float]:
    """Evolve ``|0...0>`` through all layers; also returns the largest discarded weight."""
    phi = zero_state(circuit.n_sites, circuit.d)
    worst = 0.0
    for layer in circuit.layers:
        phi, weights = sweep_layer(layer, phi, "generate", chi_cap, cutoff)
        worst = max([worst] + weights)
    return phi, worst


def evolve_circuit(circuit: EncodedCircuit, chi_cap: int = UNBOUNDED) -> MpsState:
    """``U_D^dag ... U_1^dag |0...0>`` with every two-site update capped at ``chi_cap``."""
    return evolve_with_stats(circuit, chi_cap)[0]


def fidelity_nlf(circuit: EncodedCircuit, psi: MpsState, chi_cap: int | None = None) -> float:
    """``-ln|<psi|phi_D>| / N``; ``chi_cap`` defaults to the circuit's encoding cap."""
    if psi.n_sites != circuit.n_sites or psi.d != circuit.d:
        raise DimensionMismatchError("circuit and state sizes differ")
    if chi_cap is None:
        chi_cap = circuit.chi_tilde or UNBOUNDED
    return nlf(canonicalize(psi), evolve_circuit(circuit, chi_cap))


def _zero_nlf(psi: MpsState) -> float:
    ov = abs(overlap_with_zero(psi))
    return float("inf") if ov == 0 else max(0.0, float(-np.log(ov) / psi.n_sites))


def encode(psi: MpsState, n_layers: int, chi_tilde: int = DEFAULT_CHI_TILDE,
           cutoff: float = DEFAULT_CUTOFF, evaluate: bool = True) -> tuple[EncodedCircuit, EncodeReport]:
    """Encode ``psi`` into ``n_layers`` disentangler layers.

    The report holds, for every depth ``k = 0..D``, the NLF of the circuit made
    of the first ``k`` computed layers. Depth 0 is the global-entanglement
    NLF. The forward NLF evolves ``|0>`` under ``chi_tilde``; ``nlf_reverse``
    is ``-ln|<0|psi_k>|/N`` of the partially disentangled state.
    """
    if n_layers < 1:
        raise ValueError("n_layers must be >= 1")
    if chi_tilde < 1:
        raise ValueError("chi_tilde must be >= 1")
    psi = canonicalize(psi)
    d = psi.d
    computed: list[DisentanglerLayer] = []
    enc_weights = [0.0]
    reverse = [_zero_nlf(psi)]
    step_seconds = [0.0]
    current = psi
    for _ in range(n_layers):
        t0 = time.perf_counter()
        tilde, _ = truncate(current, d, cutoff)
        layer = build_layer(tilde)
        current, weights = sweep_layer(layer, current, "disentangle", chi_tilde, cutoff)
        computed.append(layer)
        enc_weights.append(max(weights, default=0.0))
        reverse.append(_zero_nlf(current))
        step_seconds.append(time.perf_counter() - t0)

    circuit = EncodedCircuit(d, psi.n_sites, tuple(reversed(computed)), chi_tilde)

    nlfs = [global_entanglement_nlf(psi)]
    fwd_weights = [0.0]
    seconds = [step_seconds[0]]
    for depth in range(1, n_layers + 1):
        t0 = time.perf_counter()
        if evaluate:
            phi, worst = evolve_with_stats(circuit.prefix(depth), chi_tilde, cutoff)
            nlfs.append(nlf(psi, phi))
            fwd_weights.append(worst)
        else:
            nlfs.append(float("nan"))
            fwd_weights.append(float("nan"))
        seconds.append(step_seconds[depth] + time.perf_counter() - t0)

    report = EncodeReport(
        nlf=nlfs,
        max_discarded_weight=fwd_weights,
        encode_discarded_weight=enc_weights,
        nlf_reverse=reverse,
        seconds=seconds,
        chi_tilde=chi_tilde,
        chi=psi.max_bond,
        d=d,
        n_layers=n_layers,
        parameters=parameter_counts(d, psi.max_bond, n_layers),
    )
    return circuit, report
