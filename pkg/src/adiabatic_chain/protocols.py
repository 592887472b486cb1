"""Initial and target states for the two protocols, plus T_min search.

Ground-state preparation starts from nearest-neighbour singlets on the
dimerized chain and targets the ground state of the uniform chain.
Transfer starts from a two-spin payload on sites (0, 1) next to the ground
state of the uniform (N-2)-chain, and targets the mirrored arrangement.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.optimize import minimize_scalar

from .disorder import DisorderRealization
from .evolve import PropagatorConfig, Trajectory, run_protocol
from .hamiltonian import ProtocolKind, RampSchedule, build_hamiltonian, uniform_profile
from .hilbert import SpinBasis, StateVector, build_basis, tensor_embed
from .spectral import energy_gap, ground_state

SQRT_HALF = 1.0 / math.sqrt(2.0)


class Payload(enum.Enum):
    SINGLET = "singlet"
    TRIPLET = "triplet"
    SUPERPOSITION = "superposition"


def pair_state(payload: Payload) -> StateVector:
    """Two-spin payload on the full 4-state basis (|10> is up-down)."""
    b = build_basis(2)
    amps = np.zeros(4, dtype=np.complex128)
    if payload is Payload.SINGLET:
        amps[0b10], amps[0b01] = SQRT_HALF, -SQRT_HALF
    elif payload is Payload.TRIPLET:
        amps[0b10], amps[0b01] = SQRT_HALF, SQRT_HALF
    else:
        # (singlet + triplet)/sqrt(2) = |up down>
        amps[0b10] = 1.0
    return StateVector(b, amps)


def singlet() -> StateVector:
    return pair_state(Payload.SINGLET)


def triplet() -> StateVector:
    return pair_state(Payload.TRIPLET)


def protocol_basis(n_sites: int, full: bool = False) -> SpinBasis:
    """Zero-magnetization sector, or the full space when fields can flip spins."""
    return build_basis(n_sites, None if full else 0)


@lru_cache(maxsize=16)
def _uniform_ground(n_sites: int) -> StateVector:
    basis = build_basis(n_sites, 0)
    return ground_state(build_hamiltonian(basis, uniform_profile(n_sites))).state


def uniform_ground_state(n_sites: int, basis: SpinBasis | None = None) -> StateVector:
    gs = _uniform_ground(n_sites)
    return gs if basis is None else gs.to_basis(basis)


def uniform_gap(n_sites: int) -> float:
    return energy_gap(build_hamiltonian(build_basis(n_sites, 0), uniform_profile(n_sites)))


def dimer_product(n_sites: int, basis: SpinBasis | None = None) -> StateVector:
    state = singlet()
    for _ in range(n_sites // 2 - 1):
        state = tensor_embed(state, singlet())
    return state if basis is None else state.to_basis(basis)


@dataclass(frozen=True)
class ProtocolSetup:
    schedule: RampSchedule
    initial: StateVector
    target: StateVector
    payload: Payload | None = None

    def run(self, realization: DisorderRealization | None = None, cfg: PropagatorConfig = PropagatorConfig(),
            t_end: float | None = None, callback=None) -> Trajectory:
        return run_protocol(self.initial, self.schedule, realization, self.target, cfg, t_end, callback)


def ground_prep_setup(n_sites: int, ramp_time: float, full_basis: bool = False) -> ProtocolSetup:
    schedule = RampSchedule(ProtocolKind.GROUND_PREP, n_sites, ramp_time)
    basis = protocol_basis(n_sites, full_basis)
    return ProtocolSetup(schedule, dimer_product(n_sites, basis), uniform_ground_state(n_sites, basis))


def transfer_setup(n_sites: int, ramp_time: float, payload: Payload | str = Payload.TRIPLET,
                   full_basis: bool = False) -> ProtocolSetup:
    payload = Payload(payload)
    schedule = RampSchedule(ProtocolKind.TRANSFER, n_sites, ramp_time)
    basis = protocol_basis(n_sites, full_basis)
    chain = uniform_ground_state(n_sites - 2)
    pair = pair_state(payload)
    initial = tensor_embed(pair, chain, basis)
    target = tensor_embed(chain, pair, basis)
    return ProtocolSetup(schedule, initial, target, payload)


def make_setup(kind: ProtocolKind | str, n_sites: int, ramp_time: float,
               payload: Payload | str = Payload.TRIPLET, full_basis: bool = False) -> ProtocolSetup:
    kind = ProtocolKind(kind)
    if kind is ProtocolKind.GROUND_PREP:
        return ground_prep_setup(n_sites, ramp_time, full_basis)
    return transfer_setup(n_sites, ramp_time, payload, full_basis)


def final_fidelity(kind, n_sites: int, ramp_time: float, cfg: PropagatorConfig = PropagatorConfig(),
                   payload: Payload | str = Payload.TRIPLET) -> float:
    setup = make_setup(kind, n_sites, ramp_time, payload)
    return setup.run(None, PropagatorConfig(cfg.backend, cfg.dt, cfg.krylov_dim, cfg.tol, 10**9)).fidelity_at_ramp_end


def convergence_check(setup: ProtocolSetup, cfg: PropagatorConfig = PropagatorConfig()) -> float:
    """|F_dt(T) - F_{dt/2}(T)| for a disorder-free run."""
    coarse = PropagatorConfig(cfg.backend, cfg.dt, cfg.krylov_dim, cfg.tol, 10**9)
    fine = PropagatorConfig(cfg.backend, cfg.dt / 2, cfg.krylov_dim, cfg.tol, 10**9)
    f1 = setup.run(None, coarse).fidelity_at_ramp_end
    f2 = setup.run(None, fine).fidelity_at_ramp_end
    return abs(f1 - f2)


def adiabatic_time_estimate(n_sites: int) -> float:
    """(1/gap)^2 of the uniform chain, the usual adiabaticity scale for JT."""
    return 1.0 / uniform_gap(n_sites) ** 2


class BracketError(RuntimeError):
    pass


def find_tmin(kind: ProtocolKind | str, n_sites: int, threshold: float = 0.99, resolution: float = 0.05,
              payload: Payload | str = Payload.TRIPLET, cfg: PropagatorConfig = PropagatorConfig(),
              t_max: float = 200.0, scan_step: float | None = None, lobe_margin: float = 0.01) -> float:
    """Smallest ramp time T (to within ``resolution``) with F(T) >= threshold.

    Scans upward from zero in steps seeded by the adiabatic estimate
    (1/gap)^2 until F(T) crosses ``threshold``, then bisects the bracket.
    Returns the upper end of the final bracket.

    Transfer fidelity oscillates in T and needs ramps several times longer,
    so its scan step is at least 0.5. A lobe of F(T) can rise above the
    threshold between two scan points; any local maximum of the scan within
    ``lobe_margin`` of the threshold is therefore refined before moving on.
    """
    kind = ProtocolKind(kind)
    if scan_step is None:
        floor = 0.5 if kind is ProtocolKind.TRANSFER else 0.25
        scan_step = min(2.0, max(floor, adiabatic_time_estimate(n_sites) / 4))

    def f(t):
        return final_fidelity(kind, n_sites, t, cfg, payload)

    lo, hi = 0.0, None
    ts, fs = [0.0], [0.0]
    t = scan_step
    while t <= t_max + 1e-12:
        ft = f(t)
        if ft >= threshold:
            hi = t
            break
        ts.append(t)
        fs.append(ft)
        if len(fs) >= 3 and fs[-2] > fs[-3] and fs[-2] > fs[-1] and fs[-2] >= threshold - lobe_margin:
            res = minimize_scalar(lambda x: -f(x), bounds=(ts[-3], ts[-1]), method="bounded",
                                  options={"xatol": resolution / 4})
            if -res.fun >= threshold:
                # every scanned point is below threshold, so the nearest one left of the maximum brackets it
                hi = float(res.x)
                lo = ts[-2] if hi > ts[-2] else ts[-3]
                break
        lo = t
        t += scan_step
    if hi is None:
        raise BracketError(f"F(T) stays below {threshold} up to T={t_max}")
    while hi - lo > resolution:
        mid = 0.5 * (lo + hi)
        if f(mid) >= threshold:
            hi = mid
        else:
            lo = mid
    return hi
