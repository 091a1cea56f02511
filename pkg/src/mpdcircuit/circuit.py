"""Gate programs: flat layout, qubit-efficient schedule, serialization and a dense simulator.

The flat layout uses one wire per site. The qubit-efficient schedule reorders
the same gates along anti-diagonals (``site + layer`` constant) so at most
``D + 1`` wires are live at once; a site's wire is read out and reset as
soon as the deepest layer has acted on it, then handed to the next fresh
site. ``D + 2`` wires are allocated.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import __version__, _kernels
from .disentangler import DisentanglerLayer
from .encoder import EncodedCircuit
from .errors import DimensionMismatchError, SizeLimitError

FORMAT_VERSION = 1
MAX_SIM_WIRES = 20

TWO_QUBIT = "two_qubit"
ONE_QUBIT = "one_qubit"
MEASURE_RESET = "measure_reset"
OUTPUT_MAP = "output_map"
GATE_KINDS = (TWO_QUBIT, ONE_QUBIT)


@dataclass(frozen=True, eq=False)
class GateInstruction:
    kind: str
    wires: tuple[int, ...]
    matrix: np.ndarray | None = None
    site: int | None = None
    layer: int | None = None

    @property
    def is_gate(self) -> bool:
        return self.kind in GATE_KINDS


@dataclass(frozen=True, eq=False)
class QubitEfficientSchedule:
    d: int
    n_sites: int
    n_layers: int
    n_wires: int
    instructions: tuple[GateInstruction, ...]
    site_order: tuple[int, ...] = field(default=())

    @property
    def gates(self) -> list[GateInstruction]:
        return [ins for ins in self.instructions if ins.is_gate]


def _layer_instructions(layer: DisentanglerLayer, t: int) -> list[GateInstruction]:
    out = [GateInstruction(TWO_QUBIT, (n, n + 1), g, site=n, layer=t) for n, g in enumerate(layer.two_qubit_gates)]
    out.append(GateInstruction(ONE_QUBIT, (layer.n_sites - 1,), layer.final_gate, site=layer.n_sites - 1, layer=t))
    return out


def flatten_gates(circuit: EncodedCircuit) -> list[GateInstruction]:
    """Gates in generation order on ``N`` wires; layers are numbered from 1."""
    out = []
    for t, layer in enumerate(circuit.layers, start=1):
        out.extend(_layer_instructions(layer, t))
    return out


def qubit_efficient_schedule(circuit: EncodedCircuit) -> QubitEfficientSchedule:
    n_sites, depth = circuit.n_sites, circuit.n_layers
    n_wires = depth + 2
    by_pos = {(ins.layer, ins.site): ins for ins in flatten_gates(circuit)}
    free = list(range(n_wires))
    wire_of: dict[int, int] = {}
    out: list[GateInstruction] = []
    order: list[int] = []

    def wire(site: int) -> int:
        if site not in wire_of:
            if not free:
                raise RuntimeError("wire pool exhausted")  # unreachable for D + 2 wires
            wire_of[site] = free.pop(0)
        return wire_of[site]

    def finalize(site: int) -> None:
        w = wire(site)
        out.append(GateInstruction(OUTPUT_MAP, (w,), site=site))
        out.append(GateInstruction(MEASURE_RESET, (w,), site=site))
        order.append(site)
        del wire_of[site]
        free.append(w)
        free.sort()

    if depth == 0:
        for n in range(n_sites):
            finalize(n)
    else:
        for diag in range(n_sites + depth):
            for t in range(1, depth + 1):
                n = diag - t
                if not 0 <= n < n_sites:
                    continue
                ins = by_pos[(t, n)]
                wires = tuple(wire(s) for s in ((n, n + 1) if ins.kind == TWO_QUBIT else (n,)))
                out.append(GateInstruction(ins.kind, wires, ins.matrix, site=n, layer=t))
                if t == depth:
                    finalize(n)
    return QubitEfficientSchedule(circuit.d, n_sites, depth, n_wires, tuple(out), tuple(order))


def gate_counts(circuit: EncodedCircuit) -> dict[str, int]:
    flat = flatten_gates(circuit)
    return {
        "two_qubit": sum(ins.kind == TWO_QUBIT for ins in flat),
        "one_qubit": sum(ins.kind == ONE_QUBIT for ins in flat),
        "total": len(flat),
        "qubit_efficient_wires": circuit.n_layers + 2,
    }


# ---------------------------------------------------------------------------
# dense simulation


def simulate_statevector(instructions: Iterable[GateInstruction], n_wires: int) -> np.ndarray:
    """Dense amplitudes produced from ``|0...0>``.

    Measure-and-reset is deferred: after a reset the physical wire is mapped
    to a fresh virtual wire, created only when something touches it. If the
    program contains output events, the result is indexed by site label in
    ascending order with every other virtual wire projected on ``|0>``;
    otherwise it is indexed by wire.
    """
    instructions = list(instructions)
    virt_of: dict[int, int] = {}
    n_virt = 0
    state = np.ones((1, 1), dtype=np.complex128)
    outputs: dict[int, int] = {}

    def virt(w: int) -> int:
        nonlocal n_virt, state
        if w not in virt_of:
            if n_virt + 1 > MAX_SIM_WIRES:
                raise SizeLimitError(f"dense simulation limited to {MAX_SIM_WIRES} effective wires")
            virt_of[w] = n_virt
            n_virt += 1
            grown = np.zeros((state.shape[0] * 2, 1), dtype=np.complex128)
            grown[0::2] = state
            state = grown
        return virt_of[w]

    has_outputs = any(ins.kind == OUTPUT_MAP for ins in instructions)
    if not has_outputs:
        for w in range(n_wires):
            virt(w)
    for ins in instructions:
        if ins.kind == TWO_QUBIT:
            q0, q1 = (virt(w) for w in ins.wires)
            state = _kernels.apply_two_qubit_gate(state, ins.matrix, q0, q1, n_virt)
        elif ins.kind == ONE_QUBIT:
            q = virt(ins.wires[0])
            state = _kernels.apply_one_qubit_gate(state, ins.matrix, q, n_virt)
        elif ins.kind == OUTPUT_MAP:
            outputs[ins.site] = virt(ins.wires[0])
        elif ins.kind == MEASURE_RESET:
            virt_of.pop(ins.wires[0], None)
        else:
            raise ValueError(f"unknown instruction kind {ins.kind!r}")

    tensor = state.reshape((2,) * n_virt) if n_virt else state.reshape(())
    if not has_outputs:
        return tensor.reshape(-1)
    keep = [outputs[s] for s in sorted(outputs)]
    index = tuple(slice(None) if q in keep else 0 for q in range(n_virt))
    sliced = tensor[index]
    # remaining axes are in virtual-wire order; permute to site order
    remaining = [q for q in range(n_virt) if q in keep]
    perm = [remaining.index(q) for q in keep]
    return np.ascontiguousarray(np.transpose(sliced, perm)).reshape(-1)


def simulate_circuit(circuit: EncodedCircuit) -> np.ndarray:
    return simulate_statevector(flatten_gates(circuit), circuit.n_sites)


def simulate_schedule(schedule: QubitEfficientSchedule) -> np.ndarray:
    return simulate_statevector(schedule.instructions, schedule.n_wires)


# ---------------------------------------------------------------------------
# serialization


def _matrix_payload(m: np.ndarray) -> dict:
    return {"re": m.real.ravel().tolist(), "im": m.imag.ravel().tolist()}


def _matrix_from(entry: dict, dim: int) -> np.ndarray:
    re = np.asarray(entry["re"], dtype=np.float64)
    im = np.asarray(entry["im"], dtype=np.float64)
    return (re + 1j * im).reshape(dim, dim)


def circuit_to_dict(circuit: EncodedCircuit, metadata: dict | None = None) -> dict:
    gates = []
    for ins in flatten_gates(circuit):
        gates.append({"layer": ins.layer, "site": ins.site, "wires": list(ins.wires), "kind": ins.kind,
                      **_matrix_payload(ins.matrix)})
    out = {
        "format_version": FORMAT_VERSION,
        "d": circuit.d,
        "n_sites": circuit.n_sites,
        "n_layers": circuit.n_layers,
        "chi_tilde": circuit.chi_tilde,
        "gates": gates,
    }
    out["metadata"] = {"tool_version": __version__, **(metadata or {})}
    return out


def circuit_from_dict(obj: dict) -> EncodedCircuit:
    if obj.get("format_version") != FORMAT_VERSION:
        raise ValueError(f"unsupported circuit format_version {obj.get('format_version')!r}")
    d, n_sites, n_layers = obj["d"], obj["n_sites"], obj["n_layers"]
    two = {t: [None] * (n_sites - 1) for t in range(1, n_layers + 1)}
    one: dict[int, np.ndarray] = {}
    for g in obj["gates"]:
        if g["kind"] == TWO_QUBIT:
            two[g["layer"]][g["site"]] = _matrix_from(g, d * d)
        elif g["kind"] == ONE_QUBIT:
            one[g["layer"]] = _matrix_from(g, d)
        else:
            raise ValueError(f"unexpected gate kind {g['kind']!r} in circuit file")
    layers = []
    for t in range(1, n_layers + 1):
        if any(g is None for g in two[t]) or t not in one:
            raise DimensionMismatchError(f"layer {t} is incomplete in circuit file")
        layers.append(DisentanglerLayer(d, n_sites, tuple(two[t]), one[t]))
    return EncodedCircuit(d, n_sites, tuple(layers), obj.get("chi_tilde"))


def schedule_to_dict(schedule: QubitEfficientSchedule, circuit: EncodedCircuit, metadata: dict | None = None) -> dict:
    out = circuit_to_dict(circuit, metadata)
    index = {(g["layer"], g["site"]): i for i, g in enumerate(out["gates"])}
    events = []
    for ins in schedule.instructions:
        ev = {"kind": ins.kind, "wires": list(ins.wires)}
        if ins.is_gate:
            ev["gate"] = index[(ins.layer, ins.site)]
        else:
            ev["site"] = ins.site
        events.append(ev)
    out["n_wires"] = schedule.n_wires
    out["events"] = events
    return out


def schedule_from_dict(obj: dict) -> QubitEfficientSchedule:
    circuit = circuit_from_dict(obj)
    gates = obj["gates"]
    d = obj["d"]
    instructions = []
    order = []
    for ev in obj["events"]:
        if ev["kind"] in GATE_KINDS:
            g = gates[ev["gate"]]
            dim = d * d if ev["kind"] == TWO_QUBIT else d
            instructions.append(GateInstruction(ev["kind"], tuple(ev["wires"]), _matrix_from(g, dim),
                                                site=g["site"], layer=g["layer"]))
        else:
            instructions.append(GateInstruction(ev["kind"], tuple(ev["wires"]), site=ev["site"]))
            if ev["kind"] == OUTPUT_MAP:
                order.append(ev["site"])
    return QubitEfficientSchedule(d, circuit.n_sites, circuit.n_layers, obj["n_wires"], tuple(instructions), tuple(order))


def _dumps(obj: dict) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n"


def _write(path: Path, text: str) -> None:
    try:
        path.write_text(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc


QASM_HEADER_LINES = 6


def _gate_name(ins: GateInstruction) -> str:
    return f"mpd_l{ins.layer}_s{ins.site}"


def to_qasm_like(instructions: Sequence[GateInstruction], n_wires: int, n_outputs: int, sidecar_name: str) -> str:
    """Text program with opaque named unitaries; matrices live in the sidecar file."""
    lines = [
        "OPENQASM 2.0;",
        "// opaque two-/one-qubit unitaries, matrices in sidecar",
        f"// matrices: {sidecar_name}",
        'include "qelib1.inc";',
        f"qreg q[{n_wires}];",
        f"creg c[{n_outputs}];",
    ]
    for ins in instructions:
        if ins.is_gate:
            args = ",".join(f"q[{w}]" for w in ins.wires)
            lines.append(f"{_gate_name(ins)} {args};")
        elif ins.kind == OUTPUT_MAP:
            lines.append(f"// output site {ins.site} <- q[{ins.wires[0]}]")
        else:
            w = ins.wires[0]
            lines.append(f"measure q[{w}] -> c[{ins.site}]; reset q[{w}];")
    return "\n".join(lines) + "\n"


def sidecar_dict(instructions: Sequence[GateInstruction], d: int, metadata: dict | None = None) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "d": d,
        "gates": {_gate_name(ins): _matrix_payload(ins.matrix) for ins in instructions if ins.is_gate},
        "metadata": {"tool_version": __version__, **(metadata or {})},
    }


def export(obj: EncodedCircuit | QubitEfficientSchedule, path: str | Path, fmt: str = "json",
           circuit: EncodedCircuit | None = None, metadata: dict | None = None) -> list[Path]:
    """Write a circuit or schedule; returns the paths written.

    ``json`` is canonical and lossless. ``qasm`` writes the text program plus
    ``<stem>.matrices.json``. Exporting a schedule as json also needs the
    source ``circuit``.
    """
    path = Path(path)
    if isinstance(obj, QubitEfficientSchedule):
        instructions, n_wires, n_out, d = list(obj.instructions), obj.n_wires, obj.n_sites, obj.d
    else:
        instructions, n_wires, n_out, d = flatten_gates(obj), obj.n_sites, obj.n_sites, obj.d
    if fmt == "json":
        if isinstance(obj, QubitEfficientSchedule):
            if circuit is None:
                raise ValueError("exporting a schedule as json needs the source circuit")
            data = schedule_to_dict(obj, circuit, metadata)
        else:
            data = circuit_to_dict(obj, metadata)
        _write(path, _dumps(data))
        return [path]
    if fmt in ("qasm", "qasm_like"):
        side = path.with_name(path.stem + ".matrices.json")
        _write(path, to_qasm_like(instructions, n_wires, n_out, side.name))
        _write(side, _dumps(sidecar_dict(instructions, d, metadata)))
        return [path, side]
    raise ValueError(f"unknown export format {fmt!r}")


def load_circuit(path: str | Path) -> EncodedCircuit:
    path = Path(path)
    try:
        return circuit_from_dict(json.loads(path.read_text()))
    except OSError as exc:
        raise OSError(f"cannot read circuit file {path}: {exc}") from exc


def load_schedule(path: str | Path) -> QubitEfficientSchedule:
    return schedule_from_dict(json.loads(Path(path).read_text()))


def load_sidecar(path: str | Path) -> dict[str, np.ndarray]:
    obj = json.loads(Path(path).read_text())
    d = obj["d"]
    out = {}
    for name, entry in obj["gates"].items():
        n = len(entry["re"])
        dim = d * d if n == d**4 else d
        out[name] = _matrix_from(entry, dim)
    return out
