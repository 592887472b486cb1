"""Heisenberg chain Hamiltonians with ramped couplings and local fields.

    H = sum_k J_k sigma_k . sigma_{k+1} + sum_k B_k . sigma_k

with Pauli matrices (hbar = J = 1). Bond ``b`` (0-based storage) couples sites
``b`` and ``b + 1`` and corresponds to the 1-based bond label ``k = b + 1``
used by the ramp formulas ("odd k", "J_2", "J_{N-2}").
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .hilbert import ProtocolConstraintError, SparseOperator, SpinBasis


class ProtocolKind(enum.Enum):
    GROUND_PREP = "ground_prep"
    TRANSFER = "transfer"


@dataclass(frozen=True)
class RampSchedule:
    kind: ProtocolKind
    n_sites: int
    ramp_time: float
    j_base: float = 1.0

    def __post_init__(self):
        if self.n_sites % 2 or self.n_sites < 2:
            raise ProtocolConstraintError(f"n_sites must be even and >= 2, got {self.n_sites}")
        if self.kind is ProtocolKind.TRANSFER and self.n_sites < 6:
            # J_2 and J_{N-2} would be the same bond
            raise ProtocolConstraintError("the transfer protocol needs n_sites >= 6")
        if not self.ramp_time > 0:
            raise ValueError(f"ramp time must be positive, got {self.ramp_time}")

    @property
    def n_bonds(self) -> int:
        return self.n_sites - 1

    def ramp_fraction(self, t: float) -> float:
        """min(t, T) / T, i.e. the linear ramp frozen at t = T."""
        return min(t, self.ramp_time) / self.ramp_time

    def clean_couplings(self, t: float) -> np.ndarray:
        if t < 0:
            raise ValueError(f"time must be non-negative, got {t}")
        s = self.ramp_fraction(t)
        j = np.full(self.n_bonds, self.j_base)
        if self.kind is ProtocolKind.GROUND_PREP:
            j[1::2] = s * self.j_base  # even 1-based labels
        else:
            j[1] = s * self.j_base
            j[self.n_sites - 3] = (1.0 - s) * self.j_base
        return j

    def final_couplings(self) -> np.ndarray:
        return self.clean_couplings(self.ramp_time)

    def initial_couplings(self) -> np.ndarray:
        return self.clean_couplings(0.0)


@dataclass(frozen=True)
class CouplingProfile:
    j: np.ndarray

    def __len__(self):
        return len(self.j)


@dataclass(frozen=True)
class FieldConfig:
    """Per-site field vectors ``b`` with shape ``(n_sites, 3)`` (x, y, z)."""

    b: np.ndarray = field(default=None)

    @classmethod
    def zeros(cls, n_sites: int) -> FieldConfig:
        return cls(np.zeros((n_sites, 3)))

    def __post_init__(self):
        b = np.asarray(self.b, dtype=float)
        if b.ndim != 2 or b.shape[1] != 3:
            raise ValueError(f"fields must have shape (n_sites, 3), got {b.shape}")
        if not np.all(np.isfinite(b)):
            raise ValueError("fields must be finite")
        object.__setattr__(self, "b", b)

    @property
    def n_sites(self) -> int:
        return self.b.shape[0]

    @property
    def has_transverse(self) -> bool:
        return bool(np.any(self.b[:, :2] != 0))

    @property
    def is_zero(self) -> bool:
        return not np.any(self.b)


def couplings_at(schedule: RampSchedule, t: float, static_eps=None, noise_eps=None) -> CouplingProfile:
    """Bond couplings at time ``t`` including the multiplicative disorder factor exp(-eps)."""
    j = schedule.clean_couplings(t)
    eps = np.zeros(schedule.n_bonds)
    for e in (static_eps, noise_eps):
        if e is not None:
            e = np.asarray(e, dtype=float)
            if e.shape != (schedule.n_bonds,):
                raise ValueError(f"disorder arrays need length {schedule.n_bonds}, got {e.shape}")
            eps = eps + e
    return CouplingProfile(j * np.exp(-eps))


class ChainHamiltonian:
    """Fixed sparsity pattern for all Hamiltonians of one chain on one basis.

    Constructed once per basis; :meth:`build` only fills the data array, so
    rebuilding H at every time step costs O(nnz).
    """

    def __init__(self, basis: SpinBasis, transverse: bool | None = None):
        self.basis = basis
        n = basis.n_sites
        self.n_bonds = n - 1
        if transverse is None:
            transverse = basis.sector is None
        if transverse and basis.sector is not None:
            raise ValueError("transverse fields leave a magnetization sector")
        self.transverse = transverse

        dim = basis.dimension
        states = basis.states
        spins = basis.spins().astype(np.float64)  # (dim, n)
        self._sz = spins
        self._zz = spins[:, :-1] * spins[:, 1:]  # (dim, n_bonds), +1 aligned / -1 anti-aligned

        rows = [np.arange(dim)]
        cols = [np.arange(dim)]
        kinds = [np.zeros(dim, dtype=np.int8)]  # 0 diag, 1 exchange, 2 field raise, 3 field lower
        labels = [np.zeros(dim, dtype=np.int64)]
        for b in range(self.n_bonds):
            anti = self._zz[:, b] < 0
            src = np.nonzero(anti)[0]
            mask = (1 << (n - 1 - b)) | (1 << (n - 2 - b))
            dst = basis.index(states[src] ^ mask)
            rows.append(dst)
            cols.append(src)
            kinds.append(np.ones(len(src), dtype=np.int8))
            labels.append(np.full(len(src), b))
        if transverse:
            for site in range(n):
                bit = 1 << (n - 1 - site)
                src = np.arange(dim)
                dst = basis.index(states ^ bit)
                up = (states & bit) != 0
                rows.append(dst)
                cols.append(src)
                # down -> up is the sigma^+ term, up -> down the sigma^- term
                kinds.append(np.where(up, 3, 2).astype(np.int8))
                labels.append(np.full(dim, site))
        rows = np.concatenate(rows)
        cols = np.concatenate(cols)
        kinds = np.concatenate(kinds)
        labels = np.concatenate(labels)
        if np.any(rows < 0):
            raise RuntimeError("exchange term left the basis")

        order = np.lexsort((cols, rows))
        self._rows, self._cols = rows[order], cols[order]
        self._kinds, self._labels = kinds[order], labels[order]
        self._indptr = np.searchsorted(self._rows, np.arange(dim + 1)).astype(np.int32)
        self._indices = self._cols.astype(np.int32)
        self._diag_pos = np.nonzero(self._kinds == 0)[0]
        self._diag_row = self._rows[self._diag_pos]
        self._exch_pos = np.nonzero(self._kinds == 1)[0]
        self._exch_bond = self._labels[self._exch_pos]
        self._raise_pos = np.nonzero(self._kinds == 2)[0]
        self._raise_site = self._labels[self._raise_pos]
        self._lower_pos = np.nonzero(self._kinds == 3)[0]
        self._lower_site = self._labels[self._lower_pos]

    @property
    def nnz(self) -> int:
        return len(self._indices)

    def data(self, j: np.ndarray, fields: np.ndarray | None = None) -> np.ndarray:
        j = np.asarray(j, dtype=float)
        if j.shape != (self.n_bonds,):
            raise ValueError(f"profile length must be {self.n_bonds}, got {j.shape}")
        out = np.empty(self.nnz, dtype=np.complex128)
        diag = self._zz @ j
        if fields is not None:
            fields = np.asarray(fields, dtype=float)
            if fields.shape != (self.basis.n_sites, 3):
                raise ValueError(f"fields must have shape ({self.basis.n_sites}, 3)")
            if np.any(fields[:, :2] != 0) and not self.transverse:
                raise ValueError("transverse fields are not representable on this basis")
            diag = diag + self._sz @ fields[:, 2]
        out[self._diag_pos] = diag[self._diag_row]
        out[self._exch_pos] = 2.0 * j[self._exch_bond]
        if self.transverse:
            bxy = np.zeros(self.basis.n_sites, dtype=np.complex128)
            if fields is not None:
                bxy = fields[:, 0] - 1j * fields[:, 1]
            out[self._raise_pos] = bxy[self._raise_site]
            out[self._lower_pos] = np.conj(bxy)[self._lower_site]
        return out

    def matrix(self, j: np.ndarray, fields: np.ndarray | None = None) -> sp.csr_matrix:
        dim = self.basis.dimension
        return sp.csr_matrix((self.data(j, fields), self._indices, self._indptr), shape=(dim, dim))

    def build(self, profile: CouplingProfile | np.ndarray, fields: FieldConfig | None = None) -> SparseOperator:
        j = profile.j if isinstance(profile, CouplingProfile) else profile
        b = None if fields is None else fields.b
        return SparseOperator(self.basis, self.matrix(j, b), hermitian=True)


_SKELETONS: dict[tuple[int, int | None, bool], ChainHamiltonian] = {}


def chain_hamiltonian(basis: SpinBasis, transverse: bool | None = None) -> ChainHamiltonian:
    """Cached :class:`ChainHamiltonian` per (n_sites, sector, transverse)."""
    if transverse is None:
        transverse = basis.sector is None
    key = (basis.n_sites, basis.sector, transverse)
    if key not in _SKELETONS:
        _SKELETONS[key] = ChainHamiltonian(basis, transverse)
    return _SKELETONS[key]


def build_hamiltonian(basis: SpinBasis, profile: CouplingProfile | np.ndarray, fields: FieldConfig | None = None) -> SparseOperator:
    j = profile.j if isinstance(profile, CouplingProfile) else np.asarray(profile, dtype=float)
    if len(j) != basis.n_sites - 1:
        raise ValueError(f"profile length {len(j)} does not match {basis.n_sites} sites")
    if fields is not None and fields.has_transverse and basis.sector is not None:
        raise ValueError("transverse fields cannot be used with a sector-restricted basis")
    transverse = basis.sector is None and fields is not None and fields.has_transverse
    return chain_hamiltonian(basis, transverse).build(j, fields)


def uniform_profile(n_sites: int, j: float = 1.0) -> CouplingProfile:
    return CouplingProfile(np.full(n_sites - 1, j))


def dimerized_profile(n_sites: int, j: float = 1.0) -> CouplingProfile:
    c = np.zeros(n_sites - 1)
    c[0::2] = j
    return CouplingProfile(c)
