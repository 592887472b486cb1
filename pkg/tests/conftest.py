import numpy as np
import pytest

# Pauli matrices in the package's single-site ordering: index 0 = bit 0 = down.
PAULI_BITS = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, 1j], [-1j, 0]], dtype=complex),  # <0|sy|1> with 1 = up
    "z": np.diag([-1.0, 1.0]).astype(complex),
}


def site_op(op: np.ndarray, site: int, n: int) -> np.ndarray:
    """Operator on ``site`` of an n-site chain; site 0 is the leftmost kron factor."""
    out = np.eye(1)
    for k in range(n):
        out = np.kron(out, op if k == site else np.eye(2))
    return out


def dense_heisenberg(j, fields=None) -> np.ndarray:
    """Full 2^n matrix of sum J_k s_k.s_{k+1} + sum B_k.s_k from explicit kron products."""
    j = np.asarray(j, float)
    n = len(j) + 1
    h = np.zeros((2**n, 2**n), dtype=complex)
    for b, jb in enumerate(j):
        for a in "xyz":
            h += jb * site_op(PAULI_BITS[a], b, n) @ site_op(PAULI_BITS[a], b + 1, n)
    if fields is not None:
        for k in range(n):
            for c, a in enumerate("xyz"):
                h += fields[k][c] * site_op(PAULI_BITS[a], k, n)
    return h


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
