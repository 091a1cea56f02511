"""Dense statevector gate kernels.

Each kernel has a numba ``@njit`` version and a pure-numpy version with an
identical signature. The numba path is used when numba imports and the
environment variable ``MPDCIRCUIT_DISABLE_NUMBA`` is unset (or ``0``).

States are ``(2**n, m)`` complex arrays: ``m`` independent columns, qubit 0
is the most significant bit of the row index.
"""

from __future__ import annotations

import os

import numpy as np

_DISABLE = os.environ.get("MPDCIRCUIT_DISABLE_NUMBA", "0").lower() not in ("", "0", "false", "no")

try:
    if _DISABLE:
        raise ImportError
    from numba import njit

    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False


def _np_apply_1q(state, gate, q, n):
    m = state.shape[1]
    d = gate.shape[0]
    t = state.reshape((d**q, d, d ** (n - q - 1), m))
    t = np.einsum("ij,ajbm->aibm", gate, t)
    return np.ascontiguousarray(t.reshape(state.shape))


def _np_apply_2q(state, gate, q0, q1, n):
    m = state.shape[1]
    t = state.reshape((2,) * n + (m,))
    g = gate.reshape(2, 2, 2, 2)
    t = np.tensordot(g, t, axes=([2, 3], [q0, q1]))
    t = np.moveaxis(t, [0, 1], [q0, q1])
    return np.ascontiguousarray(t.reshape(state.shape))


if HAVE_NUMBA:

    @njit(cache=True)
    def _nb_apply_1q(state, gate, q, n):
        out = np.empty_like(state)
        m = state.shape[1]
        shift = n - q - 1
        bit = 1 << shift
        dim = state.shape[0]
        for i in range(dim):
            if i & bit:
                continue
            j = i | bit
            for c in range(m):
                a0 = state[i, c]
                a1 = state[j, c]
                out[i, c] = gate[0, 0] * a0 + gate[0, 1] * a1
                out[j, c] = gate[1, 0] * a0 + gate[1, 1] * a1
        return out

    @njit(cache=True)
    def _nb_apply_2q(state, gate, q0, q1, n):
        out = np.empty_like(state)
        m = state.shape[1]
        b0 = 1 << (n - q0 - 1)
        b1 = 1 << (n - q1 - 1)
        dim = state.shape[0]
        idx = np.empty(4, dtype=np.int64)
        amp = np.empty(4, dtype=np.complex128)
        for i in range(dim):
            if (i & b0) or (i & b1):
                continue
            idx[0] = i
            idx[1] = i | b1
            idx[2] = i | b0
            idx[3] = i | b0 | b1
            for c in range(m):
                for k in range(4):
                    amp[k] = state[idx[k], c]
                for r in range(4):
                    acc = 0j
                    for k in range(4):
                        acc += gate[r, k] * amp[k]
                    out[idx[r], c] = acc
        return out


def apply_one_qubit_gate(state: np.ndarray, gate: np.ndarray, q: int, n: int) -> np.ndarray:
    """Apply a 2x2 ``gate`` to qubit ``q`` of an ``n``-qubit state batch."""
    state = np.ascontiguousarray(state, dtype=np.complex128)
    gate = np.ascontiguousarray(gate, dtype=np.complex128)
    if HAVE_NUMBA and gate.shape == (2, 2):
        return _nb_apply_1q(state, gate, q, n)
    return _np_apply_1q(state, gate, q, n)


def apply_two_qubit_gate(state: np.ndarray, gate: np.ndarray, q0: int, q1: int, n: int) -> np.ndarray:
    """Apply a 4x4 ``gate`` to qubits ``(q0, q1)``; ``q0`` is the gate's high bit."""
    state = np.ascontiguousarray(state, dtype=np.complex128)
    gate = np.ascontiguousarray(gate, dtype=np.complex128)
    if HAVE_NUMBA:
        return _nb_apply_2q(state, gate, q0, q1, n)
    return _np_apply_2q(state, gate, q0, q1, n)


def numpy_kernels():
    """The fallback implementations, for benchmarks and cross-checks."""
    return _np_apply_1q, _np_apply_2q
