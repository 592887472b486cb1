"""Ground states and gaps via Lanczos with full reorthogonalization."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.linalg import eigh_tridiagonal

from .hilbert import SparseOperator, StateVector

DENSE_MAX_DIM = 4096
DEGENERACY_TOL = 1e-8


class ConvergenceError(RuntimeError):
    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (last residual {residual:.3e})")
        self.residual = residual


@dataclass
class SpectralResult:
    energies: np.ndarray
    states: list[StateVector]
    residuals: np.ndarray

    @property
    def energy(self) -> float:
        return float(self.energies[0])

    @property
    def state(self) -> StateVector:
        return self.states[0]


def _fix_phase(v: np.ndarray) -> np.ndarray:
    i = int(np.argmax(np.abs(v)))
    return v * (abs(v[i]) / v[i])


def _operator_matrix(h: SparseOperator):
    m = h.matrix
    if np.iscomplexobj(m.data) and not np.any(m.data.imag):
        m = sp.csr_matrix((m.data.real, m.indices, m.indptr), shape=m.shape)
    return m


def lanczos_lowest(
    matrix,
    deflate: list[np.ndarray] | None = None,
    seed: int = 0,
    tol: float = 1e-10,
    max_krylov: int = 120,
    max_restarts: int = 60,
) -> tuple[float, np.ndarray, float]:
    """Lowest eigenpair of a Hermitian ``matrix`` on the complement of ``deflate``.

    Explicitly restarted Lanczos: each cycle builds a Krylov basis of at most
    ``max_krylov`` vectors with full (twice-iterated Gram-Schmidt)
    reorthogonalization, then restarts from the lowest Ritz vector.
    Returns ``(energy, vector, residual_norm)``.
    """
    dim = matrix.shape[0]
    dtype = np.result_type(matrix.dtype, np.float64)
    if deflate:
        d = np.array([np.asarray(x, dtype=dtype) for x in deflate])
    else:
        d = np.zeros((0, dim), dtype=dtype)

    def project(w):
        for _ in range(2):
            if len(d):
                w = w - d.T @ (d.conj() @ w)
        return w

    rng = np.random.default_rng(seed)
    v = rng.normal(size=dim).astype(dtype)
    if np.iscomplexobj(v):
        v = v + 1j * rng.normal(size=dim)
    v = project(v)
    v /= np.linalg.norm(v)

    m_max = min(max_krylov, dim - len(d))
    residual = np.inf
    for _ in range(max_restarts):
        basis = np.zeros((m_max + 1, dim), dtype=dtype)
        alpha = np.zeros(m_max)
        beta = np.zeros(m_max)
        basis[0] = v
        m = m_max
        for j in range(m_max):
            w = matrix @ basis[j]
            alpha[j] = np.vdot(basis[j], w).real
            w = w - alpha[j] * basis[j]
            if j > 0:
                w = w - beta[j - 1] * basis[j - 1]
            for _ in range(2):
                w = w - basis[: j + 1].T @ (basis[: j + 1].conj() @ w)
            w = project(w)
            beta[j] = np.linalg.norm(w)
            if beta[j] < 1e-13 * max(1.0, abs(alpha[j])):
                m = j + 1
                break
            basis[j + 1] = w / beta[j]
            if j >= 2 and (j % 5 == 4 or j == m_max - 1):
                theta, s = eigh_tridiagonal(alpha[: j + 1], beta[:j], select="i", select_range=(0, 0))
                if abs(beta[j] * s[-1, 0]) < 0.1 * tol:
                    m = j + 1
                    break
        theta, s = eigh_tridiagonal(alpha[:m], beta[: m - 1], select="i", select_range=(0, 0))
        x = basis[:m].T @ s[:, 0]
        x = project(x)
        x /= np.linalg.norm(x)
        energy = float(np.vdot(x, matrix @ x).real)
        residual = float(np.linalg.norm(matrix @ x - energy * x))
        if residual < tol:
            return energy, x, residual
        v = x
    raise ConvergenceError("Lanczos did not converge", residual)


def lowest_levels(h: SparseOperator, k: int = 1, seed: int = 0, tol: float = 1e-10) -> SpectralResult:
    """The ``k`` lowest eigenpairs, found one at a time by deflation."""
    matrix = _operator_matrix(h)
    vecs: list[np.ndarray] = []
    energies, residuals = [], []
    for i in range(k):
        e, x, r = lanczos_lowest(matrix, deflate=vecs, seed=seed + i, tol=tol)
        vecs.append(x)
        energies.append(e)
        residuals.append(r)
    order = np.argsort(energies, kind="stable")
    states = [StateVector(h.basis, _fix_phase(vecs[i].astype(np.complex128))) for i in order]
    return SpectralResult(np.asarray(energies)[order], states, np.asarray(residuals)[order])


def ground_state(h: SparseOperator, seed: int = 0, tol: float = 1e-10) -> SpectralResult:
    return lowest_levels(h, 1, seed=seed, tol=tol)


def energy_gap(h: SparseOperator, seed: int = 0, tol: float = 1e-10, max_degeneracy: int = 16) -> float:
    """Distance from the ground energy to the next distinct level."""
    matrix = _operator_matrix(h)
    e0, x0, _ = lanczos_lowest(matrix, seed=seed, tol=tol)
    found = [x0]
    for i in range(max_degeneracy):
        e, x, _ = lanczos_lowest(matrix, deflate=found, seed=seed + i + 1, tol=tol)
        if e - e0 > DEGENERACY_TOL:
            return e - e0
        found.append(x)
        e0 = min(e0, e)
    raise ConvergenceError("ground level more degenerate than max_degeneracy", 0.0)


def dense_oracle(h: SparseOperator) -> SpectralResult:
    """Full spectrum by dense diagonalization (verification only)."""
    dim = h.basis.dimension
    if dim > DENSE_MAX_DIM:
        raise ValueError(f"dense diagonalization limited to dimension {DENSE_MAX_DIM}, got {dim}")
    a = h.toarray()
    w, v = np.linalg.eigh(a)
    states = [StateVector(h.basis, _fix_phase(v[:, i])) for i in range(dim)]
    residuals = np.linalg.norm(a @ v - v * w[None, :], axis=0)
    return SpectralResult(w, states, residuals)


def dense_gap(h: SparseOperator) -> float:
    w = dense_oracle(h).energies
    above = w[w > w[0] + DEGENERACY_TOL]
    return float(above[0] - w[0])
