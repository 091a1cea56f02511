import functools

import numpy as np
import pytest

from mpdcircuit.models import ModelSpec, dmrg_ground_state

ACCEPTANCE_RESULTS: list[tuple[str, bool, str]] = []


def record(criterion: str, ok: bool, detail: str) -> None:
    ACCEPTANCE_RESULTS.append((criterion, bool(ok), detail))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in ACCEPTANCE_RESULTS:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")


@functools.lru_cache(maxsize=None)
def ground_state(kind: str, n: int, hx: float = 0.0, chi: int = 64, seed: int = 0):
    return dmrg_ground_state(ModelSpec(kind, n, hx), chi, seed=seed)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_unitary(dim: int, rng) -> np.ndarray:
    z = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    q, r = np.linalg.qr(z)
    return q * (np.diagonal(r) / np.abs(np.diagonal(r)))[None, :]


def dense_apply(vec: np.ndarray, gate: np.ndarray, sites: tuple[int, ...], n: int) -> np.ndarray:
    """Reference gate application by explicit Kronecker products."""
    k = len(sites)
    assert list(sites) == list(range(sites[0], sites[0] + k))
    full = np.kron(np.kron(np.eye(2 ** sites[0]), gate), np.eye(2 ** (n - sites[0] - k)))
    return full @ vec
