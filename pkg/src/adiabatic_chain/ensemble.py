"""Seeded disorder ensembles, optionally spread over worker processes."""
from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .disorder import DisorderSpec, sample_realization
from .evolve import PropagatorConfig, Trajectory
from .hamiltonian import ProtocolKind
from .protocols import Payload, make_setup

DEFAULT_POST_WINDOW = 5.0


@dataclass(frozen=True)
class ProtocolSpec:
    kind: ProtocolKind
    n_sites: int
    ramp_time: float
    payload: Payload = Payload.TRIPLET
    post_window: float | None = None  # default: 0 for preparation, 5/J for transfer

    def __post_init__(self):
        object.__setattr__(self, "kind", ProtocolKind(self.kind))
        object.__setattr__(self, "payload", Payload(self.payload))

    @property
    def t_end(self) -> float:
        window = self.post_window
        if window is None:
            window = DEFAULT_POST_WINDOW if self.kind is ProtocolKind.TRANSFER else 0.0
        return self.ramp_time + window


class EnsembleError(RuntimeError):
    def __init__(self, index: int, cause: BaseException):
        super().__init__(f"realization {index} failed: {cause!r}")
        self.index = index


@dataclass
class EnsembleStats:
    fidelities: np.ndarray
    peak_fidelities: np.ndarray
    peak_times: np.ndarray
    trajectories: list[Trajectory] | None = field(default=None, repr=False)

    @property
    def n(self) -> int:
        return len(self.fidelities)

    @staticmethod
    def _sem(x: np.ndarray) -> float:
        return float(np.std(x, ddof=1) / np.sqrt(len(x))) if len(x) > 1 else 0.0

    @property
    def mean_fidelity(self) -> float:
        return float(np.mean(self.fidelities))

    @property
    def std_error(self) -> float:
        return self._sem(self.fidelities)

    @property
    def mean_peak(self) -> float:
        return float(np.mean(self.peak_fidelities))

    @property
    def peak_std_error(self) -> float:
        return self._sem(self.peak_fidelities)


def run_realization(protocol: ProtocolSpec, disorder: DisorderSpec, cfg: PropagatorConfig, index: int) -> Trajectory:
    realization = sample_realization(disorder, protocol.n_sites, index)
    setup = make_setup(protocol.kind, protocol.n_sites, protocol.ramp_time, protocol.payload,
                       full_basis=realization.needs_full_basis)
    return setup.run(realization, cfg, protocol.t_end)


def _summaries(protocol, disorder, cfg, indices, keep):
    out = []
    for i in indices:
        try:
            tr = run_realization(protocol, disorder, cfg, i)
        except Exception as exc:  # noqa: BLE001 - re-raised with the realization index
            raise EnsembleError(i, exc) from exc
        t_peak, f_peak = tr.post_ramp_peak()
        out.append((i, tr.fidelity_at_ramp_end, f_peak, t_peak, tr if keep else None))
    return out


def default_workers() -> int:
    return len(os.sched_getaffinity(0)) if hasattr(os, "sched_getaffinity") else (os.cpu_count() or 1)


def run_ensemble(protocol: ProtocolSpec, disorder: DisorderSpec, cfg: PropagatorConfig = PropagatorConfig(),
                 workers: int | None = 1, keep_trajectories: bool = False) -> EnsembleStats:
    """Run ``disorder.n_realizations`` independent realizations and aggregate F(T).

    Results depend only on the specs and the master seed, never on ``workers``.
    """
    if workers is None:
        workers = default_workers()
    indices = list(range(disorder.n_realizations))
    if workers <= 1:
        rows = _summaries(protocol, disorder, cfg, indices, keep_trajectories)
    else:
        chunks = [indices[w::workers] for w in range(workers)]
        rows = []
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_summaries, protocol, disorder, cfg, c, keep_trajectories) for c in chunks if c]
            for fut in futures:
                rows.extend(fut.result())
    rows.sort(key=lambda r: r[0])
    return EnsembleStats(
        fidelities=np.array([r[1] for r in rows]),
        peak_fidelities=np.array([r[2] for r in rows]),
        peak_times=np.array([r[3] for r in rows]),
        trajectories=[r[4] for r in rows] if keep_trajectories else None,
    )
