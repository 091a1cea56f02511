"""Benchmark spin-1/2 chains, two-site DMRG and a dense ground-state oracle.

Spin operators are ``S = sigma / 2``, so the open transverse-field Ising chain
``H = sum S^z S^z - h_x sum S^x`` has its critical field at ``h_x = 0.5``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from functools import reduce

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import SizeLimitError
from .mps import MpsState, _split_theta, canonicalize, random_mps
from .tensor import DEFAULT_CUTOFF

SX = np.array([[0, 1], [1, 0]], dtype=np.complex128) / 2
SY = np.array([[0, -1j], [1j, 0]], dtype=np.complex128) / 2
SZ = np.array([[1, 0], [0, -1]], dtype=np.complex128) / 2
SP = np.array([[0, 1], [0, 0]], dtype=np.complex128)
SM = np.array([[0, 0], [1, 0]], dtype=np.complex128)
ID2 = np.eye(2, dtype=np.complex128)

MAX_EXACT_SITES = 14
KINDS = ("ising", "heisenberg", "xy")


@dataclass(frozen=True)
class ModelSpec:
    """Open spin-1/2 chain. ``hx`` is only used by the Ising model."""

    kind: str
    n_sites: int
    hx: float = 0.0

    def __post_init__(self):
        kind = self.kind.lower()
        if kind not in KINDS:
            raise ValueError(f"unknown model {self.kind!r}; expected one of {KINDS}")
        object.__setattr__(self, "kind", kind)
        if self.n_sites < 2:
            raise ValueError("n_sites must be >= 2")

    def as_dict(self) -> dict:
        out = {"model": self.kind, "n": self.n_sites}
        if self.kind == "ising":
            out["hx"] = self.hx
        return out


@dataclass(frozen=True)
class Mpo:
    """Site operators ``W[n]`` with legs (phys-out, phys-in, bond-left, bond-right)."""

    tensors: tuple[np.ndarray, ...]

    @property
    def n_sites(self) -> int:
        return len(self.tensors)


def _bulk_w(spec: ModelSpec) -> np.ndarray:
    """Upper-triangular MPO generator as a (w, w, d, d) block matrix."""
    z = np.zeros((2, 2), dtype=np.complex128)
    if spec.kind == "ising":
        rows = [
            [ID2, SZ, -spec.hx * SX],
            [z, z, SZ],
            [z, z, ID2],
        ]
    elif spec.kind == "heisenberg":
        # SxSx + SySy = (S+S- + S-S+)/2
        rows = [
            [ID2, SP, SM, SZ, z],
            [z, z, z, z, SM / 2],
            [z, z, z, z, SP / 2],
            [z, z, z, z, SZ],
            [z, z, z, z, ID2],
        ]
    else:
        rows = [
            [ID2, SP, SM, z],
            [z, z, z, SM / 2],
            [z, z, z, SP / 2],
            [z, z, z, ID2],
        ]
    return np.array(rows)


def build_mpo(spec: ModelSpec) -> Mpo:
    w = _bulk_w(spec).transpose(2, 3, 0, 1)  # out, in, left, right
    first = w[:, :, :1, :]
    last = w[:, :, :, -1:]
    ts = [first] + [w] * (spec.n_sites - 2) + [last]
    return Mpo(tuple(np.array(t) for t in ts))


def mpo_to_dense(mpo: Mpo) -> np.ndarray:
    """Full ``d^N x d^N`` matrix of an MPO (small N only)."""
    if mpo.n_sites > MAX_EXACT_SITES:
        raise SizeLimitError(f"dense MPO limited to {MAX_EXACT_SITES} sites")
    acc = mpo.tensors[0][:, :, 0, :]  # out, in, r
    for w in mpo.tensors[1:]:
        acc = np.tensordot(acc, w, axes=([2], [2]))  # O, I, o, i, r
        o, i, o2, i2, r = acc.shape
        acc = acc.transpose(0, 2, 1, 3, 4).reshape(o * o2, i * i2, r)
    return acc[:, :, 0]


def _site_op(op: np.ndarray, n: int, n_sites: int) -> sp.csr_matrix:
    mats = [sp.identity(2 ** n, format="csr"), sp.csr_matrix(op), sp.identity(2 ** (n_sites - n - 1), format="csr")]
    return reduce(lambda a, b: sp.kron(a, b, format="csr"), mats)


def sparse_hamiltonian(spec: ModelSpec) -> sp.csr_matrix:
    """Hamiltonian assembled term by term from Kronecker products."""
    n = spec.n_sites
    h = sp.csr_matrix((2**n, 2**n), dtype=np.complex128)
    if spec.kind == "ising":
        pairs = [(SZ,)]
    elif spec.kind == "heisenberg":
        pairs = [(SX,), (SY,), (SZ,)]
    else:
        pairs = [(SX,), (SY,)]
    for k in range(n - 1):
        for (op,) in pairs:
            h = h + _site_op(op, k, n) @ _site_op(op, k + 1, n)
    if spec.kind == "ising" and spec.hx != 0.0:
        for k in range(n):
            h = h - spec.hx * _site_op(SX, k, n)
    return h.tocsr()


def dense_hamiltonian(spec: ModelSpec) -> np.ndarray:
    if spec.n_sites > MAX_EXACT_SITES:
        raise SizeLimitError(f"dense Hamiltonian limited to {MAX_EXACT_SITES} sites")
    return sparse_hamiltonian(spec).toarray()


def exact_ground_state(spec: ModelSpec) -> tuple[float, np.ndarray]:
    """Lowest eigenpair of the explicit Hamiltonian (N <= 14)."""
    if spec.n_sites > MAX_EXACT_SITES:
        raise SizeLimitError(f"exact diagonalization limited to {MAX_EXACT_SITES} sites; use dmrg_ground_state")
    if spec.n_sites <= 10:
        w, v = np.linalg.eigh(dense_hamiltonian(spec))
        e, vec = float(w[0]), v[:, 0]
    else:
        h = sparse_hamiltonian(spec)
        v0 = np.ones(h.shape[0], dtype=np.complex128) / np.sqrt(h.shape[0])
        w, v = spla.eigsh(h, k=1, which="SA", v0=v0, tol=1e-14)
        e, vec = float(w[0]), v[:, 0]
    vec = vec / np.linalg.norm(vec)
    return e, vec


# ---------------------------------------------------------------------------
# Lanczos


@dataclass
class LanczosResult:
    value: float
    vector: np.ndarray
    n_matvec: int
    converged: bool


def lanczos_ground(matvec, v0: np.ndarray, tol: float = 1e-10, max_iter: int = 200,
                   krylov_dim: int = 30) -> LanczosResult:
    """Lowest eigenpair of a Hermitian operator by restarted Lanczos.

    Full reorthogonalization; restarts from the current Ritz vector every
    ``krylov_dim`` steps. Converged when the residual norm is below
    ``tol * max(1, |theta|)``.
    """
    shape = v0.shape
    x = v0.ravel().astype(np.complex128)
    dim = x.size
    nrm = np.linalg.norm(x)
    if nrm == 0:
        x = np.ones(dim, dtype=np.complex128)
        nrm = np.linalg.norm(x)
    x = x / nrm
    n_mv = 0
    theta = 0.0
    kmax = min(krylov_dim, dim)
    while True:
        basis = np.empty((kmax, dim), dtype=np.complex128)
        alpha = np.zeros(kmax)
        beta = np.zeros(kmax)
        basis[0] = x
        k = 0
        for k in range(kmax):
            w = matvec(basis[k].reshape(shape)).ravel()
            n_mv += 1
            alpha[k] = np.vdot(basis[k], w).real
            # classical Gram-Schmidt, repeated once if cancellation is severe
            vk = basis[: k + 1]
            before = np.linalg.norm(w)
            w = w - (vk @ w.conj()).conj() @ vk
            b = np.linalg.norm(w)
            if b < 0.7 * before:
                w = w - (vk @ w.conj()).conj() @ vk
                b = np.linalg.norm(w)
            beta[k] = b
            if k + 1 == kmax or b < 1e-14 or n_mv >= max_iter:
                break
            basis[k + 1] = w / b
        m = k + 1
        t = np.diag(alpha[:m]) + np.diag(beta[: m - 1], 1) + np.diag(beta[: m - 1], -1)
        evals, evecs = np.linalg.eigh(t)
        theta = float(evals[0])
        c = evecs[:, 0]
        x = c @ basis[:m]
        x = x / np.linalg.norm(x)
        resid = abs(beta[m - 1] * c[-1])
        if resid <= tol * max(1.0, abs(theta)) or m == dim or beta[m - 1] < 1e-14:
            return LanczosResult(theta, x.reshape(shape), n_mv, True)
        if n_mv >= max_iter:
            return LanczosResult(theta, x.reshape(shape), n_mv, False)


# ---------------------------------------------------------------------------
# two-site DMRG


@dataclass
class DmrgResult:
    state: MpsState
    energy: float
    sweep_energies: list[float] = field(default_factory=list)
    converged: bool = True
    n_sweeps: int = 0
    max_discarded_weight: float = 0.0

    def __iter__(self):
        # allows ``psi, energy = dmrg_ground_state(...)``
        return iter((self.state, self.energy))


def _grow_left(env, a, w):
    # env (bra, w, ket); a site tensor (s, l, r); w (out, in, wl, wr)
    t = np.tensordot(env, a, axes=([2], [1]))  # bra, wl, t, r
    t = np.tensordot(t, w, axes=([1, 2], [2, 1]))  # bra, r, out, wr
    return np.tensordot(a.conj(), t, axes=([0, 1], [2, 0])).transpose(0, 2, 1)  # bra', wr, ket'


def _grow_right(env, a, w):
    # env (bra, w, ket) on the right bond
    t = np.tensordot(a, env, axes=([2], [2]))  # t, l, bra, wr
    t = np.tensordot(w, t, axes=([1, 3], [0, 3]))  # out, wl, l, bra
    return np.tensordot(a.conj(), t, axes=([0, 2], [0, 3]))  # l', wl, l


def _two_site_matvec(lenv, w1, w2, renv):
    def mv(theta):
        # theta (l, s1, s2, r)
        t = np.tensordot(lenv, theta, axes=([2], [0]))  # bra, wl, s1, s2, r
        t = np.tensordot(t, w1, axes=([1, 2], [2, 1]))  # bra, s2, r, o1, wm
        t = np.tensordot(t, w2, axes=([1, 4], [1, 2]))  # bra, r, o1, o2, wr
        t = np.tensordot(t, renv, axes=([1, 4], [2, 1]))  # bra, o1, o2, bra_r
        return t

    return mv


def dmrg_ground_state(spec: ModelSpec, chi: int, max_sweeps: int = 20, energy_tol: float = 1e-10,
                      seed: int = 0, cutoff: float = DEFAULT_CUTOFF, lanczos_tol: float = 1e-10,
                      lanczos_max_iter: int = 200) -> DmrgResult:
    """Two-site DMRG ground state of ``spec`` with bond dimension ``chi``.

    Returns the canonical MPS and energy; if the energy change per sweep never
    drops below ``energy_tol`` within ``max_sweeps``, the result is flagged
    ``converged=False`` and a warning is issued.
    """
    if chi < 2:
        raise ValueError("chi must be >= 2")
    mpo = build_mpo(spec)
    n = spec.n_sites
    psi0 = random_mps(n, chi, seed=seed)
    ts = [np.array(t) for t in psi0.tensors]
    ws = mpo.tensors

    one = np.ones((1, 1, 1), dtype=np.complex128)
    lenvs = [None] * (n + 1)
    renvs = [None] * (n + 1)
    lenvs[0] = one
    renvs[n] = one
    for k in range(n - 1, 0, -1):
        renvs[k] = _grow_right(renvs[k + 1], ts[k], ws[k])

    energies: list[float] = []
    energy = np.inf
    max_dw = 0.0
    converged = False
    sweeps_done = 0

    def solve(k):
        theta = np.tensordot(ts[k], ts[k + 1], axes=([2], [1])).transpose(1, 0, 2, 3)
        mv = _two_site_matvec(lenvs[k], ws[k], ws[k + 1], renvs[k + 2])
        res = lanczos_ground(mv, theta, tol=lanczos_tol, max_iter=lanczos_max_iter)
        return res.value, res.vector

    for sweep in range(max_sweeps):
        sweep_dw = 0.0
        e = energy
        for k in range(n - 1):
            e, theta = solve(k)
            left, right, dw = _split_theta(theta, chi, cutoff, center_left=False)
            ts[k], ts[k + 1] = left, right
            sweep_dw = max(sweep_dw, dw)
            lenvs[k + 1] = _grow_left(lenvs[k], ts[k], ws[k])
        for k in range(n - 2, -1, -1):
            e, theta = solve(k)
            left, right, dw = _split_theta(theta, chi, cutoff, center_left=True)
            ts[k], ts[k + 1] = left, right
            sweep_dw = max(sweep_dw, dw)
            renvs[k + 1] = _grow_right(renvs[k + 2], ts[k + 1], ws[k + 1])
        sweeps_done = sweep + 1
        max_dw = sweep_dw
        change = abs(energy - e)
        energy = e
        energies.append(float(e))
        if change < energy_tol:
            converged = True
            break

    if not converged:
        warnings.warn(f"DMRG did not converge within {max_sweeps} sweeps", RuntimeWarning, stacklevel=2)
    psi = canonicalize(MpsState(tuple(ts), canonical=False))
    return DmrgResult(psi, float(energy), energies, converged, sweeps_done, max_dw)
