"""Adiabatic state preparation and singlet/triplet transfer on Heisenberg chains.

Exact (sector-resolved) simulation of ramped spin-1/2 chains with static
exchange disorder, white coupling noise and quasi-static hyperfine fields.
Units: hbar = J = 1; times are Jt, energies E/(J hbar).
"""
__version__ = "0.1.0"

from .disorder import DisorderRealization, DisorderSpec, sample_realization, white_noise_at
from .ensemble import EnsembleStats, ProtocolSpec, run_ensemble
from .evolve import PropagatorConfig, Trajectory, krylov_expm_action, run_protocol, step
from .hamiltonian import (
    CouplingProfile,
    FieldConfig,
    ProtocolKind,
    RampSchedule,
    build_hamiltonian,
    couplings_at,
    dimerized_profile,
    uniform_profile,
)
from .hilbert import SparseOperator, SpinBasis, StateVector, build_basis, inner, matvec, tensor_embed
from .protocols import Payload, convergence_check, find_tmin, ground_prep_setup, make_setup, transfer_setup
from .spectral import SpectralResult, dense_oracle, energy_gap, ground_state

__all__ = [
    "CouplingProfile", "DisorderRealization", "DisorderSpec", "EnsembleStats", "FieldConfig", "Payload",
    "PropagatorConfig", "ProtocolKind", "ProtocolSpec", "RampSchedule", "SparseOperator", "SpectralResult",
    "SpinBasis", "StateVector", "Trajectory", "build_basis", "build_hamiltonian", "convergence_check",
    "couplings_at", "dense_oracle", "dimerized_profile", "energy_gap", "find_tmin", "ground_prep_setup",
    "ground_state", "inner", "krylov_expm_action", "make_setup", "matvec", "run_ensemble", "run_protocol",
    "sample_realization", "step", "tensor_embed", "transfer_setup", "uniform_profile", "white_noise_at",
]
