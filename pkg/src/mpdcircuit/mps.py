"""Open-boundary matrix product states.

Site tensors have shape ``(d, chi_left, chi_right)`` with dummy boundary
bonds of extent 1. The canonical form used throughout is the one with the
normalization center on site 0 and every other tensor an isometry from its
left bond into (physical x right bond)::

    sum_{s, a} A[s, b, a] conj(A[s, b', a]) = delta(b, b')

Sites and bonds are 0-indexed; bond ``b`` sits between sites ``b`` and
``b + 1``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import DimensionMismatchError, NotIsometricError, SizeLimitError, ZeroNormError
from .tensor import DEFAULT_CUTOFF, as_tensor, truncated_svd

CANONICAL_TOL = 1e-10
MAX_DENSE_SITES = 24
FORMAT_VERSION = 1


@dataclass(frozen=True, eq=False)
class MpsState:
    """List of site tensors plus a flag recording whether the canonical form holds.

    Instances are treated as immutable: the tensors are stored read-only and
    every operation returns a new state.
    """

    tensors: tuple[np.ndarray, ...]
    canonical: bool = False
    d: int = field(init=False)

    def __post_init__(self):
        ts = []
        for t in self.tensors:
            t = np.array(t, dtype=np.complex128)
            t.setflags(write=False)
            ts.append(t)
        if not ts:
            raise ValueError("an MPS needs at least one site")
        object.__setattr__(self, "tensors", tuple(ts))
        d = ts[0].shape[0]
        object.__setattr__(self, "d", d)
        if ts[0].ndim != 3 or ts[0].shape[1] != 1 or ts[-1].ndim != 3 or ts[-1].shape[2] != 1:
            raise DimensionMismatchError("boundary bonds must have extent 1")
        for n, t in enumerate(ts):
            if t.ndim != 3 or t.shape[0] != d:
                raise DimensionMismatchError(f"site {n}: expected shape (d={d}, chiL, chiR), got {t.shape}")
            if n + 1 < len(ts) and t.shape[2] != ts[n + 1].shape[1]:
                raise DimensionMismatchError(
                    f"bond {n}: right extent {t.shape[2]} != left extent {ts[n + 1].shape[1]}"
                )
            if not np.all(np.isfinite(t)):
                raise ValueError(f"site {n} contains non-finite entries")

    @property
    def n_sites(self) -> int:
        return len(self.tensors)

    @property
    def bond_dims(self) -> list[int]:
        return [t.shape[2] for t in self.tensors[:-1]]

    @property
    def max_bond(self) -> int:
        return max(self.bond_dims, default=1)

    def __len__(self) -> int:
        return self.n_sites

    def __repr__(self) -> str:
        return f"MpsState(n_sites={self.n_sites}, d={self.d}, bonds={self.bond_dims}, canonical={self.canonical})"


# ---------------------------------------------------------------------------
# gauge sweeps on raw tensor lists


def _qr_pos(m: np.ndarray):
    q, r = np.linalg.qr(m)
    diag = np.diagonal(r)
    mags = np.abs(diag)
    ph = np.where(mags > 0, diag / np.where(mags > 0, mags, 1.0), 1.0)
    return q * ph[None, :], r * ph.conj()[:, None]


def _left_orthonormalize(ts: list[np.ndarray], start: int, stop: int) -> None:
    """Make sites ``start..stop-1`` left isometries, pushing the remainder to ``stop``."""
    for n in range(start, stop):
        d, cl, cr = ts[n].shape
        m = ts[n].transpose(1, 0, 2).reshape(cl * d, cr)
        q, r = _qr_pos(m)
        k = q.shape[1]
        ts[n] = q.reshape(cl, d, k).transpose(1, 0, 2)
        ts[n + 1] = np.tensordot(r, ts[n + 1], axes=([1], [1])).transpose(1, 0, 2)


def _right_orthonormalize(ts: list[np.ndarray], start: int, stop: int) -> None:
    """Make sites ``start`` down to ``stop+1`` right isometries, pushing the remainder to ``stop``."""
    for n in range(start, stop, -1):
        d, cl, cr = ts[n].shape
        m = ts[n].transpose(1, 0, 2).reshape(cl, d * cr)
        q, r = _qr_pos(m.conj().T)
        k = q.shape[1]
        ts[n] = q.conj().T.reshape(k, d, cr).transpose(1, 0, 2)
        ts[n - 1] = np.tensordot(ts[n - 1], r.conj().T, axes=([2], [0]))


def _normalize_site(ts: list[np.ndarray], n: int) -> float:
    nrm = float(np.linalg.norm(ts[n]))
    if nrm == 0.0 or not np.isfinite(nrm):
        raise ZeroNormError("state has zero norm")
    ts[n] = ts[n] / nrm
    return nrm


def _canonical_tensors(ts: Sequence[np.ndarray]) -> list[np.ndarray]:
    ts = [np.array(t, dtype=np.complex128) for t in ts]
    _right_orthonormalize(ts, len(ts) - 1, 0)
    _normalize_site(ts, 0)
    return ts


# ---------------------------------------------------------------------------
# constructors


def from_tensors(tensors: Sequence[np.ndarray], canonical: bool = False) -> MpsState:
    return MpsState(tuple(tensors), canonical=canonical)


def product_state(bits: Sequence[int], d: int = 2) -> MpsState:
    """Computational basis product state ``|bits[0] bits[1] ...>``."""
    ts = []
    for b in bits:
        t = np.zeros((d, 1, 1), dtype=np.complex128)
        t[b, 0, 0] = 1.0
        ts.append(t)
    return MpsState(tuple(ts), canonical=True)


def zero_state(n_sites: int, d: int = 2) -> MpsState:
    return product_state([0] * n_sites, d)


def ghz_mps(n_sites: int) -> MpsState:
    """Canonical chi=2 MPS of ``(|0...0> + |1...1>)/sqrt(2)``."""
    if n_sites < 2:
        raise ValueError("GHZ state needs at least 2 sites")
    first = np.zeros((2, 1, 2), dtype=np.complex128)
    first[0, 0, 0] = first[1, 0, 1] = 1 / np.sqrt(2)
    mid = np.zeros((2, 2, 2), dtype=np.complex128)
    mid[0, 0, 0] = mid[1, 1, 1] = 1.0
    last = np.zeros((2, 2, 1), dtype=np.complex128)
    last[0, 0, 0] = last[1, 1, 0] = 1.0
    return MpsState((first,) + (mid,) * (n_sites - 2) + (last,), canonical=True)


def random_mps(n_sites: int, chi: int, d: int = 2, seed: int | np.random.Generator | None = 0,
               canonical: bool = True) -> MpsState:
    """Random complex MPS with bonds ``min(chi, d**n, d**(N-n))``."""
    rng = np.random.default_rng(seed)
    dims = [1] + [min(chi, d**b, d ** (n_sites - b)) for b in range(1, n_sites)] + [1]
    ts = []
    for n in range(n_sites):
        shape = (d, dims[n], dims[n + 1])
        ts.append(rng.standard_normal(shape) + 1j * rng.standard_normal(shape))
    if canonical:
        return MpsState(tuple(_canonical_tensors(ts)), canonical=True)
    return MpsState(tuple(ts), canonical=False)


def from_statevector(vec: np.ndarray, d: int = 2, chi_max: int | None = None,
                     cutoff: float = DEFAULT_CUTOFF) -> MpsState:
    """Exact (or capped) MPS of a dense state by sequential SVDs."""
    vec = as_tensor(vec).ravel()
    n_sites = int(round(np.log(vec.size) / np.log(d)))
    if d**n_sites != vec.size:
        raise DimensionMismatchError(f"length {vec.size} is not a power of {d}")
    chi_max = chi_max or vec.size
    ts = []
    rest = vec.reshape(1, -1)
    for n in range(n_sites - 1):
        cl = rest.shape[0]
        m = rest.reshape(cl * d, -1)
        svd = truncated_svd(m, chi_max, cutoff)
        k = svd.rank
        ts.append(svd.left.reshape(cl, d, k).transpose(1, 0, 2))
        rest = svd.singular_values[:, None] * svd.right_adjoint
    ts.append(rest.reshape(rest.shape[0], d, 1).transpose(1, 0, 2))
    return MpsState(tuple(_canonical_tensors(ts)), canonical=True)


# ---------------------------------------------------------------------------
# diagnostics


def canonical_residuals(psi: MpsState) -> list[float]:
    """Per-site residuals of the canonical conditions.

    Entry 0 is ``| ||A_0||^2 - 1 |``; entry ``n > 0`` is the Frobenius norm of
    ``sum_{s,a} A A^* - I`` on the left bond.
    """
    res = [abs(float(np.vdot(psi.tensors[0], psi.tensors[0]).real) - 1.0)]
    for t in psi.tensors[1:]:
        g = np.einsum("sba,sca->bc", t, t.conj())
        res.append(float(np.linalg.norm(g - np.eye(g.shape[0]))))
    return res


def is_canonical(psi: MpsState, tol: float = CANONICAL_TOL) -> bool:
    return max(canonical_residuals(psi)) <= tol


def canonicalize(psi: MpsState) -> MpsState:
    """Bring ``psi`` into the canonical form and normalize it.

    Sweeps from the last site towards site 0 with QR factorizations, so the
    normalization center ends on site 0.
    """
    if psi.canonical:
        return psi
    return MpsState(tuple(_canonical_tensors(psi.tensors)), canonical=True)


def _check_same_size(a: MpsState, b: MpsState) -> None:
    if a.n_sites != b.n_sites or a.d != b.d:
        raise DimensionMismatchError(
            f"size mismatch: (N={a.n_sites}, d={a.d}) vs (N={b.n_sites}, d={b.d})"
        )
    for n, (ta, tb) in enumerate(zip(a.tensors, b.tensors)):
        if ta.shape[0] != tb.shape[0]:
            raise DimensionMismatchError(f"site {n}: physical dims differ")


def inner(a: MpsState, b: MpsState) -> complex:
    """``<a|b>`` by transfer-matrix contraction, linear in the number of sites."""
    _check_same_size(a, b)
    env = np.ones((1, 1), dtype=np.complex128)
    for ta, tb in zip(a.tensors, b.tensors):
        # env[a, b] -> sum_s conj(A[s,a,a']) env[a,b] B[s,b,b']
        tmp = np.tensordot(env, tb, axes=([1], [1]))  # a, s, b'
        env = np.tensordot(ta.conj(), tmp, axes=([0, 1], [1, 0]))  # a', b'
    return complex(env[0, 0])


def norm(psi: MpsState) -> float:
    return float(np.sqrt(max(inner(psi, psi).real, 0.0)))


def overlap_with_zero(psi: MpsState) -> complex:
    """``<0...0|psi>``."""
    v = np.ones((1,), dtype=np.complex128)
    for t in psi.tensors:
        v = v @ t[0]
    return complex(v[0])


def to_statevector(psi: MpsState) -> np.ndarray:
    """Dense amplitudes, site 0 the most significant digit."""
    if psi.n_sites > MAX_DENSE_SITES:
        raise SizeLimitError(
            f"to_statevector limited to {MAX_DENSE_SITES} sites (got {psi.n_sites}); use inner/overlap routines instead"
        )
    v = psi.tensors[0][:, 0, :]
    for t in psi.tensors[1:]:
        v = np.tensordot(v, t, axes=([1], [1]))  # x, s, b
        v = v.reshape(-1, t.shape[2])
    return np.ascontiguousarray(v[:, 0])


def _center_sweep_singular_values(psi: MpsState, upto: int) -> list[np.ndarray]:
    """Schmidt spectra of bonds ``0..upto`` (psi canonical, center at 0)."""
    ts = [np.array(t) for t in psi.tensors]
    spectra = []
    for n in range(upto + 1):
        d, cl, cr = ts[n].shape
        m = ts[n].transpose(1, 0, 2).reshape(cl * d, cr)
        u, s, vh = np.linalg.svd(m, full_matrices=False)
        spectra.append(s)
        ts[n + 1] = np.tensordot(s[:, None] * vh, ts[n + 1], axes=([1], [1])).transpose(1, 0, 2)
    return spectra


def schmidt_values(psi: MpsState, bond: int) -> np.ndarray:
    if not 0 <= bond < psi.n_sites - 1:
        raise IndexError(f"bond index {bond} out of range for {psi.n_sites} sites")
    psi = canonicalize(psi)
    return _center_sweep_singular_values(psi, bond)[bond]


def _entropy(s: np.ndarray) -> float:
    p = s**2
    p = p / p.sum()
    p = p[p > 0]
    return float(-np.sum(p * np.log(p)))


def entanglement_entropy(psi: MpsState, bond: int) -> float:
    """Von Neumann entropy (nats) across ``bond``."""
    return _entropy(schmidt_values(psi, bond))


def entanglement_profile(psi: MpsState) -> list[float]:
    """Entropy at every bond in a single sweep."""
    if psi.n_sites < 2:
        return []
    psi = canonicalize(psi)
    return [_entropy(s) for s in _center_sweep_singular_values(psi, psi.n_sites - 2)]


# ---------------------------------------------------------------------------
# truncation


def _svd_truncate_sweep(ts: list[np.ndarray], chi_max: int, cutoff: float) -> list[float]:
    """Left-to-right truncation sweep; ts must be canonical with center at 0."""
    weights = []
    for n in range(len(ts) - 1):
        d, cl, cr = ts[n].shape
        m = ts[n].transpose(1, 0, 2).reshape(cl * d, cr)
        svd = truncated_svd(m, chi_max, cutoff)
        k = svd.rank
        s = svd.singular_values
        s = s / np.linalg.norm(s) if np.linalg.norm(s) > 0 else s
        ts[n] = svd.left.reshape(cl, d, k).transpose(1, 0, 2)
        ts[n + 1] = np.tensordot(s[:, None] * svd.right_adjoint, ts[n + 1], axes=([1], [1])).transpose(1, 0, 2)
        weights.append(svd.discarded_weight)
    return weights


def _variational_refine(target: MpsState, guess: list[np.ndarray], max_sweeps: int, tol: float) -> list[np.ndarray]:
    """One-site alternating sweeps maximizing ``|<guess|target>|`` at fixed bonds."""
    ts = [np.array(t) for t in guess]
    n_sites = len(ts)
    _right_orthonormalize(ts, n_sites - 1, 0)
    _normalize_site(ts, 0)

    def right_envs():
        envs = [None] * (n_sites + 1)
        envs[n_sites] = np.ones((1, 1), dtype=np.complex128)
        for n in range(n_sites - 1, 0, -1):
            tmp = np.tensordot(target.tensors[n], envs[n + 1], axes=([2], [1]))  # s, b, a'
            envs[n] = np.tensordot(tmp, ts[n].conj(), axes=([0, 2], [0, 2])).T  # a, b
        return envs

    prev = None
    for _ in range(max_sweeps):
        renv = right_envs()
        lenv = np.ones((1, 1), dtype=np.complex128)
        # left to right
        for n in range(n_sites):
            e = np.tensordot(lenv, target.tensors[n], axes=([1], [1]))  # a, s, b'
            e = np.tensordot(e, renv[n + 1], axes=([2], [1]))  # a, s, a'
            t = e.transpose(1, 0, 2)
            if n < n_sites - 1:
                d, cl, cr = t.shape
                q, r = _qr_pos(t.transpose(1, 0, 2).reshape(cl * d, cr))
                ts[n] = q.reshape(cl, d, q.shape[1]).transpose(1, 0, 2)
                tmp = np.tensordot(lenv, target.tensors[n], axes=([1], [1]))
                lenv = np.tensordot(ts[n].conj(), tmp, axes=([0, 1], [1, 0]))
            else:
                ts[n] = t / np.linalg.norm(t)
                ovl = float(np.linalg.norm(t))
        _right_orthonormalize(ts, n_sites - 1, 0)
        _normalize_site(ts, 0)
        if prev is not None and abs(ovl - prev) < tol:
            break
        prev = ovl
    return ts


def truncate(psi: MpsState, chi_max: int, cutoff: float = DEFAULT_CUTOFF,
             variational: bool = False, max_sweeps: int = 5, tol: float = 1e-10) -> tuple[MpsState, float]:
    """Cap every bond at ``chi_max``.

    Single-pass SVD truncation in the canonical gauge, optionally followed by
    variational refinement. Returns the re-canonicalized, normalized state and
    an estimate of ``|<psi|out>|`` from the discarded weights.
    """
    if chi_max < 1:
        raise ValueError("chi_max must be >= 1")
    if psi.max_bond <= chi_max:
        return psi, 1.0
    psi = canonicalize(psi)
    ts = [np.array(t) for t in psi.tensors]
    weights = _svd_truncate_sweep(ts, chi_max, cutoff)
    if variational:
        ts = _variational_refine(psi, ts, max_sweeps, tol)
        out = MpsState(tuple(ts), canonical=True)
        return out, abs(inner(psi, out))
    _normalize_site(ts, len(ts) - 1)
    ts = _canonical_tensors(ts)
    est = float(np.prod([np.sqrt(max(1.0 - w, 0.0)) for w in weights]))
    return MpsState(tuple(ts), canonical=True), est


def global_entanglement_nlf(psi: MpsState) -> float:
    """``-ln|<psi|psi_1>| / N`` with ``psi_1`` the chi=1 truncation of ``psi``."""
    psi = canonicalize(psi)
    prod, _ = truncate(psi, 1)
    return nlf(psi, prod)


def nlf(a: MpsState, b: MpsState) -> float:
    """Negative-logarithmic fidelity per site, clipped at 0."""
    ov = abs(inner(a, b))
    if ov == 0.0:
        return float("inf")
    return max(0.0, float(-np.log(ov) / a.n_sites))


# ---------------------------------------------------------------------------
# gate application


def _check_gate(gate: np.ndarray, dim: int, tol: float = 1e-8) -> np.ndarray:
    gate = as_tensor(gate)
    if gate.shape != (dim, dim):
        raise DimensionMismatchError(f"gate shape {gate.shape} != ({dim}, {dim})")
    defect = float(np.linalg.norm(gate.conj().T @ gate - np.eye(dim)))
    if defect > tol:
        raise NotIsometricError(f"gate is not unitary (defect {defect:.3e})", defect)
    return gate


def _split_theta(theta: np.ndarray, chi_cap: int, cutoff: float, center_left: bool):
    """Split a ``(chiL, d, d, chiR)`` block; returns the two site tensors and discarded weight."""
    cl, d1, d2, cr = theta.shape
    svd = truncated_svd(theta.reshape(cl * d1, d2 * cr), chi_cap, cutoff)
    k = svd.rank
    s = svd.singular_values
    ns = np.linalg.norm(s)
    if ns > 0:
        s = s / ns
    if center_left:
        left = (svd.left * s[None, :]).reshape(cl, d1, k).transpose(1, 0, 2)
        right = svd.right_adjoint.reshape(k, d2, cr).transpose(1, 0, 2)
    else:
        left = svd.left.reshape(cl, d1, k).transpose(1, 0, 2)
        right = (s[:, None] * svd.right_adjoint).reshape(k, d2, cr).transpose(1, 0, 2)
    return left, right, svd.discarded_weight


def _apply_gate_block(a: np.ndarray, b: np.ndarray, gate: np.ndarray) -> np.ndarray:
    d1, d2 = a.shape[0], b.shape[0]
    theta = np.tensordot(a, b, axes=([2], [1]))  # s, cl, t, cr
    g = gate.reshape(d1, d2, d1, d2)
    theta = np.tensordot(g, theta, axes=([2, 3], [0, 2]))  # s', t', cl, cr
    return theta.transpose(2, 0, 1, 3)


def apply_two_site_gate(psi: MpsState, n: int, gate: np.ndarray, chi_cap: int,
                        cutoff: float = DEFAULT_CUTOFF) -> MpsState:
    """Apply a ``d^2 x d^2`` unitary on sites ``(n, n+1)`` with truncation under ``chi_cap``.

    The gate's row index is ``s_n * d + s_{n+1}``.
    """
    if not 0 <= n < psi.n_sites - 1:
        raise IndexError(f"site {n} out of range for a two-site gate on {psi.n_sites} sites")
    gate = _check_gate(gate, psi.d**2)
    psi = canonicalize(psi)
    ts = [np.array(t) for t in psi.tensors]
    _left_orthonormalize(ts, 0, n)
    theta = _apply_gate_block(ts[n], ts[n + 1], gate)
    ts[n], ts[n + 1], _ = _split_theta(theta, chi_cap, cutoff, center_left=True)
    _right_orthonormalize(ts, n, 0)
    _normalize_site(ts, 0)
    return MpsState(tuple(ts), canonical=True)


def apply_one_site_gate(psi: MpsState, n: int, gate: np.ndarray) -> MpsState:
    gate = _check_gate(gate, psi.d)
    ts = list(psi.tensors)
    ts[n] = np.tensordot(gate, ts[n], axes=([1], [0]))
    # a unitary on the physical leg preserves both canonical conditions
    return MpsState(tuple(ts), canonical=psi.canonical)


# ---------------------------------------------------------------------------
# file format


def to_json_dict(psi: MpsState, metadata: dict | None = None) -> dict:
    out = {
        "format_version": FORMAT_VERSION,
        "d": psi.d,
        "n_sites": psi.n_sites,
        "canonical": bool(psi.canonical),
        "tensors": [
            {"shape": list(t.shape), "re": t.real.ravel().tolist(), "im": t.imag.ravel().tolist()}
            for t in psi.tensors
        ],
    }
    if metadata is not None:
        out["metadata"] = metadata
    return out


def from_json_dict(obj: dict) -> MpsState:
    if obj.get("format_version") != FORMAT_VERSION:
        raise ValueError(f"unsupported MPS format_version {obj.get('format_version')!r}")
    ts = []
    for entry in obj["tensors"]:
        shape = tuple(entry["shape"])
        data = np.asarray(entry["re"], dtype=np.float64) + 1j * np.asarray(entry["im"], dtype=np.float64)
        ts.append(data.reshape(shape))
    psi = MpsState(tuple(ts), canonical=False)
    if psi.n_sites != obj["n_sites"] or psi.d != obj["d"]:
        raise DimensionMismatchError("header n_sites/d disagree with tensors")
    if obj.get("canonical") and is_canonical(psi):
        psi = MpsState(psi.tensors, canonical=True)
    return psi


def save_mps(psi: MpsState, path: str | Path, metadata: dict | None = None) -> None:
    path = Path(path)
    try:
        path.write_text(json.dumps(to_json_dict(psi, metadata)) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write MPS file {path}: {exc}") from exc


def load_mps(path: str | Path) -> MpsState:
    path = Path(path)
    try:
        obj = json.loads(path.read_text())
    except OSError as exc:
        raise OSError(f"cannot read MPS file {path}: {exc}") from exc
    return from_json_dict(obj)


def load_mps_metadata(path: str | Path) -> dict:
    return json.loads(Path(path).read_text()).get("metadata", {})
