"""Command-line front end.

Every file written carries the tool version, the seed and the full parameter
set: JSON outputs under ``metadata``, CSV outputs as a leading ``# {...}``
comment line. Failures print one ``error: <kind>: <message>`` line on stderr.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from . import circuit as circ
from .disentangler import layer_unitarity_defect
from .encoder import CSV_HEADER, encode, evolve_circuit, fidelity_nlf
from .errors import MpdError
from .models import ModelSpec, dmrg_ground_state
from .mps import from_json_dict, ghz_mps, load_mps, load_mps_metadata, save_mps, to_json_dict, to_statevector

FIG2_GRID = [round(0.1 + 0.05 * i, 10) for i in range(19)]
FIG3_DEPTH = 9
FIG4_CHI_TILDES = [4, 8, 16]


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _positive_float(text: str) -> float:
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text}")
    return value


def _meta(args: argparse.Namespace, **extra) -> dict:
    params = {k: v for k, v in sorted(vars(args).items()) if k not in ("func",)}
    return {"tool_version": __version__, "seed": args.seed, "params": params, **extra}


def _write_csv(path: Path, meta: dict, header: list[str], rows: list[list]) -> None:
    buf = io.StringIO()
    buf.write("# " + json.dumps(meta, sort_keys=True) + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow(row)
    try:
        Path(path).write_text(buf.getvalue())
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc


def _fmt(x: float) -> str:
    return repr(float(x))


def _spec(model: str, n: int, hx: float) -> ModelSpec:
    return ModelSpec(model, n, hx)


# ---------------------------------------------------------------------------
# commands


def cmd_groundstate(args) -> int:
    spec = _spec(args.model, args.n, args.hx)
    res = dmrg_ground_state(spec, args.chi, args.max_sweeps, args.energy_tol, seed=args.seed)
    meta = _meta(args, energy=res.energy, sweep_energies=res.sweep_energies, converged=res.converged,
                 n_sweeps=res.n_sweeps, chi=args.chi, model=spec.as_dict())
    save_mps(res.state, args.out, meta)
    print(json.dumps({"energy": res.energy, "converged": res.converged, "n_sweeps": res.n_sweeps}))
    return 0


def cmd_ghz(args) -> int:
    save_mps(ghz_mps(args.n), args.out, _meta(args))
    return 0


def cmd_encode(args) -> int:
    psi = load_mps(args.input)
    circuit, report = encode(psi, args.layers, args.chi_cap)
    meta = _meta(args, source=load_mps_metadata(args.input), chi=report.chi,
                 parameters=report.parameters, gate_counts=circ.gate_counts(circuit))
    obj = circ.qubit_efficient_schedule(circuit) if args.qubit_efficient else circuit
    circ.export(obj, args.out, args.format, circuit=circuit, metadata=meta)
    if args.report:
        _write_csv(Path(args.report), meta, CSV_HEADER, report.csv_rows(timings=args.timings))
    print(json.dumps({"nlf": report.nlf[-1], "f0": report.nlf[0], "layers": args.layers}))
    return 0


def cmd_fidelity(args) -> int:
    psi = load_mps(args.input)
    circuit = circ.load_circuit(args.circuit)
    value = fidelity_nlf(circuit, psi, args.chi_cap)
    out = {"nlf": value, "n_layers": circuit.n_layers, "chi_cap": args.chi_cap or circuit.chi_tilde}
    if args.out:
        Path(args.out).write_text(json.dumps({**out, "metadata": _meta(args)}, sort_keys=True) + "\n")
    print(json.dumps(out))
    return 0


def cmd_export(args) -> int:
    circuit = circ.load_circuit(args.input)
    obj = circ.qubit_efficient_schedule(circuit) if args.qubit_efficient else circuit
    for p in circ.export(obj, args.out, args.format, circuit=circuit, metadata=_meta(args)):
        print(p)
    return 0


VERIFY_TOL = 1e-10


def cmd_verify(args) -> int:
    circuit = circ.load_circuit(args.circuit)
    checks: dict[str, dict] = {}
    worst = max((layer_unitarity_defect(layer).max_gate_defect for layer in circuit.layers), default=0.0)
    checks["gate_unitarity"] = {"value": worst, "ok": bool(worst <= VERIFY_TOL)}
    if args.input:
        psi = load_mps(args.input)
        checks["nlf"] = {"value": fidelity_nlf(circuit, psi, args.chi_cap), "ok": True}
    if args.statevector:
        if circuit.n_sites > circ.MAX_SIM_WIRES:
            raise MpdError(f"--statevector needs N <= {circ.MAX_SIM_WIRES}")
        v_mps = to_statevector(evolve_circuit(circuit))
        v_flat = circ.simulate_circuit(circuit)
        v_qe = circ.simulate_schedule(circ.qubit_efficient_schedule(circuit))
        for name, (a, b) in {"mps_vs_flat": (v_mps, v_flat), "flat_vs_qubit_efficient": (v_flat, v_qe),
                             "mps_vs_qubit_efficient": (v_mps, v_qe)}.items():
            defect = float(abs(1.0 - abs(np.vdot(a, b))))
            checks[name] = {"value": defect, "ok": bool(defect <= VERIFY_TOL)}
    ok = all(c["ok"] for c in checks.values())
    print(json.dumps({"ok": ok, "checks": checks}, sort_keys=True))
    return 0 if ok else 1


# sweeps ---------------------------------------------------------------------


def _fig2_point(model: str, n: int, hx: float, chi: int, chi_cap: int, seed: int) -> list[float]:
    psi = dmrg_ground_state(_spec(model, n, hx), chi, seed=seed).state
    _, report = encode(psi, 1, chi_cap)
    f0, f1 = report.nlf[0], report.nlf[1]
    return [hx, f0, f1, f1 / f0 if f0 > 0 else math.nan]


def _fig3_point(model: str, n: int, hx: float, chi: int, chi_cap: int, layers: int, seed: int) -> list[list]:
    psi = dmrg_ground_state(_spec(model, n, hx), chi, seed=seed).state
    _, report = encode(psi, layers, chi_cap)
    return [[n, depth, report.nlf[depth]] for depth in range(layers + 1)]


def _fig4_point(psi_json: dict, chi_cap: int, layers: int) -> list[list]:
    psi = from_json_dict(psi_json)
    _, report = encode(psi, layers, chi_cap)
    return [[chi_cap, depth, report.nlf[depth], report.max_discarded_weight[depth]] for depth in range(layers + 1)]


def _run_pool(fn, jobs: list[tuple], workers: int) -> list:
    if workers <= 1:
        return [fn(*job) for job in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(fn, *job) for job in jobs]
        return [f.result() for f in futures]


def cmd_sweep(args) -> int:
    which = args.figure
    chi = args.chi or 64
    if which == "fig2":
        grid = args.hx or FIG2_GRID
        chi_cap = (args.chi_cap or [64])[0]
        n = (args.n or [48])[0]
        jobs = [(args.model, n, hx, chi, chi_cap, args.seed) for hx in grid]
        rows = [[_fmt(x) for x in r] for r in _run_pool(_fig2_point, jobs, args.workers)]
        header = ["hx", "f0", "f1", "f1_over_f0"]
        extra = {"grid": {"hx": list(grid), "n": n, "chi": chi, "chi_tilde": chi_cap}}
    elif which == "fig3":
        sizes = args.n or [48]
        hx = (args.hx or [0.5])[0]
        chi_cap = (args.chi_cap or [64])[0]
        layers = args.layers or FIG3_DEPTH
        jobs = [(args.model, n, hx, chi, chi_cap, layers, args.seed) for n in sizes]
        rows = [[str(n), str(depth), _fmt(v)] for part in _run_pool(_fig3_point, jobs, args.workers)
                for n, depth, v in part]
        header = ["n", "depth", "nlf"]
        extra = {"grid": {"n": list(sizes), "depth": list(range(layers + 1)), "chi": chi, "chi_tilde": chi_cap, "hx": hx}}
    else:
        n = (args.n or [24])[0]
        hx = (args.hx or [0.5])[0]
        tildes = args.chi_cap or FIG4_CHI_TILDES
        layers = args.layers or int(round(math.log2(max(tildes)))) + 2
        psi = dmrg_ground_state(_spec(args.model, n, hx), chi, seed=args.seed).state
        payload = to_json_dict(psi)
        jobs = [(payload, ct, layers) for ct in tildes]
        rows = [[str(ct), str(depth), _fmt(v), _fmt(w)] for part in _run_pool(_fig4_point, jobs, args.workers)
                for ct, depth, v, w in part]
        header = ["chi_tilde", "depth", "nlf", "max_discarded_weight"]
        extra = {"grid": {"chi_tilde": list(tildes), "depth": list(range(layers + 1)), "n": n, "chi": chi, "hx": hx}}
    _write_csv(Path(args.out), _meta(args, **extra), header, rows)
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mpdcircuit", description="Encode MPS into layered two-qubit circuits.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--seed", type=int, default=0)

    g = sub.add_parser("groundstate", help="DMRG ground state of a benchmark chain")
    g.add_argument("--model", choices=["ising", "heisenberg", "xy"], required=True)
    g.add_argument("--hx", type=float, default=0.5)
    g.add_argument("--n", type=_positive_int, required=True)
    g.add_argument("--chi", type=_positive_int, default=64)
    g.add_argument("--max-sweeps", type=_positive_int, default=20)
    g.add_argument("--energy-tol", type=_positive_float, default=1e-10)
    g.add_argument("--out", required=True)
    common(g)
    g.set_defaults(func=cmd_groundstate)

    h = sub.add_parser("ghz", help="write the GHZ state as an MPS")
    h.add_argument("--n", type=_positive_int, required=True)
    h.add_argument("--out", required=True)
    common(h)
    h.set_defaults(func=cmd_ghz)

    e = sub.add_parser("encode", help="encode an MPS file into a layered circuit")
    e.add_argument("--in", dest="input", required=True)
    e.add_argument("--layers", type=_positive_int, required=True)
    e.add_argument("--chi-cap", type=_positive_int, default=64)
    e.add_argument("--out", required=True)
    e.add_argument("--report")
    e.add_argument("--format", choices=["json", "qasm"], default="json")
    e.add_argument("--qubit-efficient", action="store_true")
    e.add_argument("--timings", action="store_true", help="fill the seconds column of the report")
    common(e)
    e.set_defaults(func=cmd_encode)

    f = sub.add_parser("fidelity", help="NLF between a target MPS and a circuit")
    f.add_argument("--in", dest="input", required=True)
    f.add_argument("--circuit", required=True)
    f.add_argument("--chi-cap", type=_positive_int)
    f.add_argument("--out")
    common(f)
    f.set_defaults(func=cmd_fidelity)

    x = sub.add_parser("export", help="re-export a circuit file")
    x.add_argument("--in", dest="input", required=True)
    x.add_argument("--format", choices=["json", "qasm"], default="json")
    x.add_argument("--qubit-efficient", action="store_true")
    x.add_argument("--out", required=True)
    common(x)
    x.set_defaults(func=cmd_export)

    v = sub.add_parser("verify", help="check gate unitarity and simulator agreement")
    v.add_argument("--circuit", required=True)
    v.add_argument("--in", dest="input")
    v.add_argument("--chi-cap", type=_positive_int)
    v.add_argument("--statevector", action="store_true")
    common(v)
    v.set_defaults(func=cmd_verify)

    s = sub.add_parser("sweep", help="figure-reproduction sweeps emitting CSV")
    s.add_argument("figure", choices=["fig2", "fig3", "fig4"])
    s.add_argument("--model", choices=["ising", "heisenberg", "xy"], default="ising")
    s.add_argument("--hx", type=float, nargs="+")
    s.add_argument("--n", type=_positive_int, nargs="+")
    s.add_argument("--chi", type=_positive_int)
    s.add_argument("--chi-cap", type=_positive_int, nargs="+")
    s.add_argument("--layers", type=_positive_int)
    s.add_argument("--workers", type=_positive_int, default=1)
    s.add_argument("--out", required=True)
    common(s)
    s.set_defaults(func=cmd_sweep)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (MpdError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: io: {exc}", file=sys.stderr)
        return 1


run_cli = main

if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
