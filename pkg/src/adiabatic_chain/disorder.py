"""Disorder channels: static exchange disorder, white coupling noise, quasi-static fields.

Couplings are multiplied by ``exp(-(eps_static + eps_white(t)))``:

* ``eps_static`` ~ Uniform[-delta, delta], one value per bond, frozen per realization;
* ``eps_white`` ~ Normal(0, eta^2), redrawn independently per bond and per
  integration step. Its bandwidth is therefore tied to the step size; the
  strengths quoted in this package assume dt = 0.01/J;
* each field component ~ Normal(0, b_nuc^2), frozen per realization. The
  field enters the Hamiltonian as ``field_coupling * B . sigma``; the default
  0.5 couples it to the spin operator S = sigma/2 while exchange keeps the
  Pauli normalization.

All draws are made from unit-strength variates scaled afterwards, so
realizations with the same seed and index share their random numbers across
different strengths.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .hamiltonian import FieldConfig


@dataclass(frozen=True)
class DisorderSpec:
    delta: float = 0.0
    eta: float = 0.0
    b_nuc: float = 0.0
    n_realizations: int = 100
    master_seed: int = 0
    correlated: bool = False  # all bonds share one eps stream
    field_coupling: float = 0.5

    def __post_init__(self):
        for name in ("delta", "eta", "b_nuc"):
            v = getattr(self, name)
            if not np.isfinite(v) or v < 0:
                raise ValueError(f"{name} must be finite and non-negative, got {v}")
        if not self.field_coupling >= 0:
            raise ValueError("field_coupling must be non-negative")
        if self.n_realizations < 1:
            raise ValueError("n_realizations must be >= 1")
        if not 0 <= self.master_seed < 2**64:
            raise ValueError("master_seed must fit in 64 unsigned bits")

    @property
    def is_clean(self) -> bool:
        return self.delta == 0 and self.eta == 0 and self.b_nuc == 0


@dataclass(frozen=True)
class DisorderRealization:
    static_eps: np.ndarray
    fields: FieldConfig
    noise_seed: int
    index: int = 0
    eta: float = 0.0
    correlated: bool = False
    field_coupling: float = 0.5

    @classmethod
    def clean(cls, n_sites: int) -> DisorderRealization:
        return cls(np.zeros(n_sites - 1), FieldConfig.zeros(n_sites), 0, 0, 0.0)

    @property
    def hamiltonian_fields(self) -> FieldConfig:
        """Field term as it enters H (sampled fields times the coupling)."""
        return FieldConfig(self.field_coupling * self.fields.b)

    @property
    def n_bonds(self) -> int:
        return len(self.static_eps)

    @property
    def needs_full_basis(self) -> bool:
        return self.field_coupling > 0 and self.fields.has_transverse

    def white_noise(self, step_index: int) -> np.ndarray:
        return white_noise_at(self, step_index, self.n_bonds)


def _stream(*key: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(k) for k in key])))


def sample_realization(spec: DisorderSpec, n_sites: int, index: int) -> DisorderRealization:
    if not 0 <= index < spec.n_realizations:
        raise ValueError(f"realization index {index} outside [0, {spec.n_realizations})")
    rng = _stream(spec.master_seed, index)
    n_bonds = n_sites - 1
    u = rng.uniform(-1.0, 1.0, size=n_bonds)
    g = rng.normal(size=(n_sites, 3))
    noise_seed = int(rng.integers(0, 2**63))
    if spec.correlated:
        u = np.full(n_bonds, u[0])
    return DisorderRealization(
        static_eps=spec.delta * u,
        fields=FieldConfig(spec.b_nuc * g),
        noise_seed=noise_seed,
        index=index,
        eta=spec.eta,
        correlated=spec.correlated,
        field_coupling=spec.field_coupling,
    )


def white_noise_at(realization: DisorderRealization, step_index: int, n_bonds: int) -> np.ndarray:
    """Per-bond white-noise eps for one integration step.

    Keyed on ``(noise_seed, step_index)``; entry ``b`` is the value for bond
    ``b``, so the same query always returns the same numbers.
    """
    if step_index < 0:
        raise ValueError("step_index must be non-negative")
    if realization.eta == 0:
        return np.zeros(n_bonds)
    z = _stream(realization.noise_seed, step_index).normal(size=n_bonds)
    if realization.correlated:
        z = np.full(n_bonds, z[0])
    return realization.eta * z
