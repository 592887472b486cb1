"""Computational basis, state vectors and sparse operators for spin-1/2 chains.

Conventions used throughout the package:

* bit value 1 is spin up (sigma^z = +1), 0 is spin down;
* site 0 is the most significant bit of a basis bitstring;
* a magnetization sector is labelled by ``n_up - n_down``.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np
import scipy.sparse as sp


class ProtocolConstraintError(ValueError):
    """Raised when a chain size or sector is incompatible with the protocols."""


class BasisMismatchError(ValueError):
    """Raised when objects defined on different bases are combined."""


class SectorError(ValueError):
    """Raised when a state has weight outside a sector-restricted basis."""


class SpinBasis:
    """Ordered computational basis of an ``n_sites`` chain.

    When ``sector`` is given only bitstrings with ``n_up - n_down == sector``
    are kept. ``states`` is sorted ascending and :meth:`index` is its inverse.
    """

    def __init__(self, n_sites: int, sector: int | None = None):
        self.n_sites = int(n_sites)
        self.sector = None if sector is None else int(sector)
        all_states = np.arange(2**self.n_sites, dtype=np.int64)
        if self.sector is None:
            self.states = all_states
        else:
            counts = np.bitwise_count(all_states)
            self.states = all_states[counts == self.n_up]
        self.states.setflags(write=False)

    @property
    def n_up(self) -> int | None:
        if self.sector is None:
            return None
        return (self.n_sites + self.sector) // 2

    @property
    def dimension(self) -> int:
        return len(self.states)

    @property
    def state_list(self) -> np.ndarray:
        return self.states

    @property
    def index_map(self) -> dict[int, int]:
        return {int(s): i for i, s in enumerate(self.states)}

    def index(self, bitstrings) -> np.ndarray:
        """Ordinals of ``bitstrings``; ``-1`` where a bitstring is not in the basis."""
        bitstrings = np.asarray(bitstrings, dtype=np.int64)
        if self.sector is None:
            ok = (bitstrings >= 0) & (bitstrings < self.dimension)
            return np.where(ok, bitstrings, -1)
        pos = np.searchsorted(self.states, bitstrings)
        pos_c = np.minimum(pos, self.dimension - 1)
        return np.where(self.states[pos_c] == bitstrings, pos_c, -1)

    def spins(self) -> np.ndarray:
        """``(dimension, n_sites)`` array of sigma^z eigenvalues (+1/-1)."""
        shifts = np.arange(self.n_sites - 1, -1, -1, dtype=np.int64)
        bits = (self.states[:, None] >> shifts[None, :]) & 1
        return (2 * bits - 1).astype(np.int8)

    def __eq__(self, other) -> bool:
        if not isinstance(other, SpinBasis):
            return NotImplemented
        return self.n_sites == other.n_sites and self.sector == other.sector

    def __hash__(self) -> int:
        return hash((self.n_sites, self.sector))

    def __repr__(self) -> str:
        return f"SpinBasis(n_sites={self.n_sites}, sector={self.sector}, dimension={self.dimension})"


def build_basis(n_sites: int, sector: int | None = None, allow_odd: bool = False) -> SpinBasis:
    """Enumerate the basis of an even chain, optionally restricted to one sector.

    ``allow_odd`` exists for sub-system bases (e.g. single-site factors) that
    never carry a protocol on their own.
    """
    if n_sites < 1:
        raise ProtocolConstraintError(f"n_sites must be positive, got {n_sites}")
    if n_sites % 2 and not allow_odd:
        raise ProtocolConstraintError(f"both protocols need an even chain, got n_sites={n_sites}")
    if sector is not None:
        if abs(sector) > n_sites or (sector - n_sites) % 2:
            raise ProtocolConstraintError(f"sector {sector} is infeasible for {n_sites} sites")
    return SpinBasis(n_sites, sector)


def sector_dimension(n_sites: int, sector: int) -> int:
    return comb(n_sites, (n_sites + sector) // 2)


@dataclass
class StateVector:
    basis: SpinBasis
    amplitudes: np.ndarray

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=np.complex128)
        if self.amplitudes.shape != (self.basis.dimension,):
            raise BasisMismatchError(
                f"amplitude length {self.amplitudes.shape} does not match dimension {self.basis.dimension}"
            )

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self) -> StateVector:
        return StateVector(self.basis, self.amplitudes / self.norm())

    def copy(self) -> StateVector:
        return StateVector(self.basis, self.amplitudes.copy())

    def amplitude(self, bitstring: int) -> complex:
        i = int(self.basis.index([bitstring])[0])
        return 0j if i < 0 else complex(self.amplitudes[i])

    def to_basis(self, basis: SpinBasis) -> StateVector:
        """Re-express in another basis of the same chain.

        Raises :class:`SectorError` if weight would be lost.
        """
        if basis.n_sites != self.basis.n_sites:
            raise BasisMismatchError("cannot change the number of sites")
        idx = basis.index(self.basis.states)
        outside = idx < 0
        if np.any(np.abs(self.amplitudes[outside]) > 1e-12):
            raise SectorError("state has weight outside the target sector")
        amps = np.zeros(basis.dimension, dtype=np.complex128)
        amps[idx[~outside]] = self.amplitudes[~outside]
        return StateVector(basis, amps)


class SparseOperator:
    """Sparse matrix acting on a :class:`SpinBasis`; treated as immutable."""

    def __init__(self, basis: SpinBasis, matrix, hermitian: bool = True):
        matrix = sp.csr_matrix(matrix)
        n = basis.dimension
        if matrix.shape != (n, n):
            raise BasisMismatchError(f"matrix shape {matrix.shape} does not match dimension {n}")
        self.basis = basis
        self.matrix = matrix
        self.hermitian = hermitian

    @property
    def shape(self) -> tuple[int, int]:
        return self.matrix.shape

    def __matmul__(self, x: np.ndarray) -> np.ndarray:
        return self.matrix @ x

    def toarray(self) -> np.ndarray:
        return self.matrix.toarray()

    def is_hermitian(self, atol: float = 0.0) -> bool:
        diff = self.matrix - self.matrix.conj().T
        return diff.nnz == 0 or float(np.abs(diff.data).max()) <= atol

    def expectation(self, v: StateVector) -> complex:
        return inner(v, StateVector(v.basis, matvec(self, v)))


def _check_same_basis(a: SpinBasis, b: SpinBasis):
    if a != b:
        raise BasisMismatchError(f"{a!r} vs {b!r}")


def matvec(op: SparseOperator, v: StateVector) -> np.ndarray:
    _check_same_basis(op.basis, v.basis)
    return op.matrix @ v.amplitudes


def inner(a: StateVector, b: StateVector) -> complex:
    """<a|b>, antilinear in ``a``."""
    _check_same_basis(a.basis, b.basis)
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def fidelity(a: StateVector, b: StateVector) -> float:
    return abs(inner(a, b)) ** 2


def basis_state(basis: SpinBasis, bitstring: int) -> StateVector:
    amps = np.zeros(basis.dimension, dtype=np.complex128)
    i = int(basis.index([bitstring])[0])
    if i < 0:
        raise SectorError(f"bitstring {bitstring:0{basis.n_sites}b} is not in {basis!r}")
    amps[i] = 1.0
    return StateVector(basis, amps)


def random_state(basis: SpinBasis, rng: np.random.Generator) -> StateVector:
    amps = rng.normal(size=basis.dimension) + 1j * rng.normal(size=basis.dimension)
    return StateVector(basis, amps / np.linalg.norm(amps))


def tensor_embed(part_a: StateVector, part_b: StateVector, target: SpinBasis | None = None) -> StateVector:
    """Product state ``part_a`` (leading sites) times ``part_b`` (trailing sites).

    The result is reindexed into ``target`` (default: the full basis of the
    combined chain) and normalized.
    """
    n_a, n_b = part_a.basis.n_sites, part_b.basis.n_sites
    if target is None:
        target = SpinBasis(n_a + n_b)
    if target.n_sites != n_a + n_b:
        raise BasisMismatchError(f"target has {target.n_sites} sites, parts have {n_a}+{n_b}")
    bits = (part_a.basis.states[:, None] << n_b) | part_b.basis.states[None, :]
    amps = np.outer(part_a.amplitudes, part_b.amplitudes)
    idx = target.index(bits.ravel())
    amps = amps.ravel()
    outside = idx < 0
    if np.any(np.abs(amps[outside]) > 1e-12):
        raise SectorError("product state has weight outside the target sector")
    out = np.zeros(target.dimension, dtype=np.complex128)
    out[idx[~outside]] = amps[~outside]
    return StateVector(target, out / np.linalg.norm(out))


def total_sz(basis: SpinBasis) -> SparseOperator:
    """Sum of sigma^z over all sites (diagonal, eigenvalue n_up - n_down)."""
    diag = 2.0 * np.bitwise_count(basis.states).astype(float) - basis.n_sites
    return SparseOperator(basis, sp.diags(diag.astype(np.complex128), format="csr"))
