"""
Spectra of the dimerized and uniform chains
===========================================

The dimerized chain (couplings J, 0, J, 0, ...) is a product of isolated
singlets, so its gap is the singlet-triplet splitting of one bond. The
uniform chain has a gap that closes roughly like 1/N.
"""
import numpy as np

from adiabatic_chain import build_basis, build_hamiltonian, dense_oracle, energy_gap, ground_state
from adiabatic_chain.hamiltonian import dimerized_profile, uniform_profile

# %%
# Two spins: one singlet at -3 and a threefold triplet at +1.
h2 = build_hamiltonian(build_basis(2), uniform_profile(2))
print("N=2 spectrum:", dense_oracle(h2).energies)

# %%
# Dimerized chains, zero-magnetization sector. The gap does not depend on N.
for n in (4, 6, 8, 10):
    h = build_hamiltonian(build_basis(n, 0), dimerized_profile(n))
    print(f"dimerized N={n:2d}  E0={ground_state(h).energy:8.4f}  gap={energy_gap(h):.10f}")

# %%
# Uniform chains: gap against 1/N.
ns = np.arange(8, 17, 2)
gaps = np.array([energy_gap(build_hamiltonian(build_basis(n, 0), uniform_profile(n))) for n in ns])
slope, intercept = np.polyfit(1 / ns, gaps, 1)
r2 = np.corrcoef(1 / ns, gaps)[0, 1] ** 2
for n, g in zip(ns, gaps):
    print(f"uniform N={n:2d}  1/N={1 / n:.4f}  gap={g:.6f}  gap*N={g * n:.4f}")
print(f"fit: gap = {slope:.3f}/N + {intercept:.3f}   r^2 = {r2:.5f}")
