"""Compare the numba and numpy statevector kernels.

Usage: python benchmarks/bench_kernels.py [--qubits 16] [--repeat 20]

Times one full staircase layer (N-1 two-qubit gates plus one one-qubit gate)
on a random N-qubit state with each backend and checks they agree.
"""

import argparse
import time

import numpy as np

from mpdcircuit import _kernels


def random_unitary(dim, rng):
    q, r = np.linalg.qr(rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim)))
    return q * (np.diagonal(r) / np.abs(np.diagonal(r)))


def layer(apply_1q, apply_2q, state, gates, last, n):
    for k, g in enumerate(gates):
        state = apply_2q(state, g, k, k + 1, n)
    return apply_1q(state, last, n - 1, n)


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main():
    p = argparse.ArgumentParser()
    p.add_argument("--qubits", type=int, default=16)
    p.add_argument("--repeat", type=int, default=20)
    args = p.parse_args()
    n = args.qubits
    rng = np.random.default_rng(0)
    state = rng.standard_normal((2**n, 1)) + 1j * rng.standard_normal((2**n, 1))
    state /= np.linalg.norm(state)
    gates = [random_unitary(4, rng) for _ in range(n - 1)]
    last = random_unitary(2, rng)

    np_1q, np_2q = _kernels.numpy_kernels()
    t_np, ref = best_of(lambda: layer(np_1q, np_2q, state, gates, last, n), args.repeat)
    print(f"numpy : {t_np * 1e3:8.2f} ms per layer (N={n})")
    if not _kernels.HAVE_NUMBA:
        print("numba : unavailable or disabled by MPDCIRCUIT_DISABLE_NUMBA")
        return
    nb_1q, nb_2q = _kernels._nb_apply_1q, _kernels._nb_apply_2q
    layer(nb_1q, nb_2q, state, gates, last, n)  # compile
    t_nb, out = best_of(lambda: layer(nb_1q, nb_2q, state, gates, last, n), args.repeat)
    print(f"numba : {t_nb * 1e3:8.2f} ms per layer (N={n})")
    print(f"speedup {t_np / t_nb:.2f}x, max deviation {np.abs(out - ref).max():.2e}")


if __name__ == "__main__":
    main()
