"""Piecewise-constant unitary propagation and fidelity tracking.

Within step ``j`` the Hamiltonian is held fixed at its value at the step
midpoint ``(j + 1/2) dt`` and the state is advanced by ``exp(-i H dt)``,
either through a full eigendecomposition (small bases) or a short Lanczos
(Krylov) approximation of the exponential's action.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .disorder import DisorderRealization
from .hamiltonian import RampSchedule, chain_hamiltonian, couplings_at
from .hilbert import SparseOperator, StateVector, _check_same_basis

log = logging.getLogger(__name__)

DENSE_AUTO_MAX_DIM = 128


class KrylovError(RuntimeError):
    pass


@dataclass(frozen=True)
class PropagatorConfig:
    backend: str = "auto"  # "auto", "dense" or "krylov"
    dt: float = 0.01
    krylov_dim: int = 20
    tol: float = 1e-10
    observe_every: int = 1

    def __post_init__(self):
        if self.backend not in ("auto", "dense", "krylov"):
            raise ValueError(f"unknown backend {self.backend!r}")
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.krylov_dim < 4:
            raise ValueError("krylov_dim must be >= 4")
        if self.observe_every < 1:
            raise ValueError("observe_every must be >= 1")

    def resolve_backend(self, dim: int) -> str:
        if self.backend != "auto":
            return self.backend
        return "dense" if dim <= DENSE_AUTO_MAX_DIM else "krylov"


@dataclass
class Trajectory:
    times: np.ndarray
    fidelities: np.ndarray
    final_state: StateVector
    ramp_time: float
    metadata: dict = field(default_factory=dict)
    max_norm_drift: float = 0.0
    total_norm_drift: float = 0.0

    @property
    def fidelity_at_ramp_end(self) -> float:
        i = int(np.argmin(np.abs(self.times - self.ramp_time)))
        return float(self.fidelities[i])

    def post_ramp_peak(self) -> tuple[float, float]:
        """(time, fidelity) of the maximum over (T, t_end]; F(T) if the window is empty."""
        mask = self.times > self.ramp_time + 1e-12
        if not np.any(mask):
            return self.ramp_time, self.fidelity_at_ramp_end
        i = int(np.argmax(np.where(mask, self.fidelities, -np.inf)))
        return float(self.times[i]), float(self.fidelities[i])


def krylov_expm_action(matrix, v: np.ndarray, dt: float, krylov_dim: int = 20, tol: float = 1e-10) -> tuple[np.ndarray, int]:
    """Approximate ``exp(-i dt H) v`` for Hermitian ``matrix``.

    Lanczos with full reorthogonalization; stops when the standard
    a-posteriori estimate ``beta_m |(exp(-i dt T_m) e_1)_m|`` drops below
    ``tol`` or the Krylov space becomes invariant.
    Returns the result and the number of Krylov vectors used.
    """
    nrm = np.linalg.norm(v)
    if nrm == 0:
        return v.copy(), 0
    dim = len(v)
    m_max = min(krylov_dim, dim)
    basis = np.empty((m_max, dim), dtype=np.complex128)
    alpha = np.zeros(m_max)
    beta = np.zeros(m_max)
    basis[0] = v / nrm
    err = np.inf
    for j in range(m_max):
        w = matrix @ basis[j]
        alpha[j] = np.vdot(basis[j], w).real
        w -= alpha[j] * basis[j]
        if j > 0:
            w -= beta[j - 1] * basis[j - 1]
        q = basis[: j + 1]
        w -= q.T @ (q.conj() @ w)
        beta[j] = np.linalg.norm(w)
        m = j + 1
        happy = beta[j] < 1e-14 * max(1.0, abs(alpha[j]))
        if m == 1:
            theta, s = alpha[:1], np.ones((1, 1))
        else:
            theta, s = eigh_tridiagonal(alpha[:m], beta[: m - 1])
        c = s @ (np.exp(-1j * dt * theta) * s[0])
        err = beta[j] * abs(c[-1])
        if happy or err < tol:
            return nrm * (q.T @ c), m
        if m < m_max:
            basis[m] = w / beta[j]
    if m_max == dim:
        # the whole space was spanned; the projection is exact
        return nrm * (basis.T @ c), m_max
    raise KrylovError(
        f"Krylov exponential not converged with krylov_dim={krylov_dim} (error estimate {err:.2e}); "
        "increase krylov_dim or reduce dt"
    )


def dense_expm_action(matrix, v: np.ndarray, dt: float) -> np.ndarray:
    a = matrix.toarray() if hasattr(matrix, "toarray") else np.asarray(matrix)
    w, u = np.linalg.eigh(a)
    return u @ (np.exp(-1j * dt * w) * (u.conj().T @ v))


def _advance(matrix, amps: np.ndarray, dt: float, backend: str, cfg: PropagatorConfig) -> np.ndarray:
    if backend == "dense":
        return dense_expm_action(matrix, amps, dt)
    return krylov_expm_action(matrix, amps, dt, cfg.krylov_dim, cfg.tol)[0]


def step(state: StateVector, h: SparseOperator, dt: float, cfg: PropagatorConfig = PropagatorConfig()) -> StateVector:
    """exp(-i H dt) applied to ``state``, renormalized."""
    _check_same_basis(state.basis, h.basis)
    backend = cfg.resolve_backend(state.basis.dimension)
    out = _advance(h.matrix, state.amplitudes, dt, backend, cfg)
    nrm = np.linalg.norm(out)
    if abs(nrm - 1.0) > 1e-10:
        log.debug("norm drift %.3e in step", nrm - 1.0)
    return StateVector(state.basis, out / nrm)


def _step_grid(ramp_time: float, t_end: float, dt: float) -> np.ndarray:
    """Step boundaries covering [0, T] and [T, t_end] with steps no longer than dt."""
    n1 = max(1, math.ceil(ramp_time / dt - 1e-9))
    edges = [np.linspace(0.0, ramp_time, n1 + 1)]
    if t_end > ramp_time:
        n2 = max(1, math.ceil((t_end - ramp_time) / dt - 1e-9))
        edges.append(np.linspace(ramp_time, t_end, n2 + 1)[1:])
    return np.concatenate(edges)


def run_protocol(
    initial: StateVector,
    schedule: RampSchedule,
    realization: DisorderRealization | None,
    target: StateVector,
    cfg: PropagatorConfig = PropagatorConfig(),
    t_end: float | None = None,
    callback: Callable[[float, StateVector], None] | None = None,
) -> Trajectory:
    """Propagate ``initial`` under the ramp and record F(t) = |<target|psi(t)>|^2.

    F is sampled at t = 0, every ``cfg.observe_every`` steps, at the ramp end
    T and at ``t_end``. The ramp is frozen after T while white noise stays active.
    """
    if t_end is None:
        t_end = schedule.ramp_time
    if t_end < schedule.ramp_time - 1e-12:
        raise ValueError("t_end must not precede the ramp end")
    _check_same_basis(initial.basis, target.basis)
    basis = initial.basis
    if basis.n_sites != schedule.n_sites:
        raise ValueError("schedule and state disagree on the number of sites")
    if realization is None:
        realization = DisorderRealization.clean(schedule.n_sites)
    fields = realization.hamiltonian_fields
    if fields.has_transverse and basis.sector is not None:
        raise ValueError("transverse fields require the full basis")
    skeleton = chain_hamiltonian(basis, transverse=fields.has_transverse)
    field_arr = None if fields.is_zero else fields.b
    backend = cfg.resolve_backend(basis.dimension)

    edges = _step_grid(schedule.ramp_time, t_end, cfg.dt)
    n_steps = len(edges) - 1
    ramp_step = int(np.argmin(np.abs(edges - schedule.ramp_time)))
    static = realization.static_eps if np.any(realization.static_eps) else None

    psi = initial.amplitudes / np.linalg.norm(initial.amplitudes)
    tgt = target.amplitudes
    times = [0.0]
    fids = [abs(np.vdot(tgt, psi)) ** 2]
    max_drift = total_drift = 0.0
    for j in range(n_steps):
        t0, t1 = edges[j], edges[j + 1]
        noise = realization.white_noise(j) if realization.eta > 0 else None
        prof = couplings_at(schedule, 0.5 * (t0 + t1), static, noise)
        matrix = skeleton.matrix(prof.j, field_arr)
        psi = _advance(matrix, psi, t1 - t0, backend, cfg)
        drift = abs(np.linalg.norm(psi) - 1.0)
        max_drift = max(max_drift, drift)
        total_drift += drift
        if drift > 1e-10:
            log.debug("norm drift %.3e at t=%.4f", drift, t1)
        psi = psi / np.linalg.norm(psi)
        k = j + 1
        if k % cfg.observe_every == 0 or k == ramp_step or k == n_steps:
            times.append(t1)
            fids.append(abs(np.vdot(tgt, psi)) ** 2)
            if callback is not None:
                callback(t1, StateVector(basis, psi))
    meta = {
        "kind": schedule.kind.value,
        "n_sites": schedule.n_sites,
        "ramp_time": schedule.ramp_time,
        "t_end": t_end,
        "dt": cfg.dt,
        "backend": backend,
        "realization": realization.index,
        "noise_seed": realization.noise_seed,
    }
    return Trajectory(
        times=np.asarray(times),
        fidelities=np.minimum(np.asarray(fids), 1.0 + 1e-12),
        final_state=StateVector(basis, psi),
        ramp_time=schedule.ramp_time,
        metadata=meta,
        max_norm_drift=max_drift,
        total_norm_drift=total_drift,
    )
