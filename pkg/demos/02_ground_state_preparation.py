"""
Adiabatic preparation of the uniform-chain ground state
=======================================================

Start from nearest-neighbour singlets (the dimerized ground state) and ramp
the missing bonds up linearly over a time T. The fidelity with the uniform
ground state at t = T measures how adiabatic the ramp was.
"""
from adiabatic_chain import PropagatorConfig
from adiabatic_chain.protocols import ground_prep_setup

n = 10

# %%
# A fast ramp leaves the state far from the target; slower ramps approach 1.
for t in (0.5, 1.0, 2.0, 2.9, 5.0):
    tr = ground_prep_setup(n, t).run(None, PropagatorConfig(observe_every=10**9))
    print(f"N={n}  JT={t:4.1f}  F_g(T)={tr.fidelity_at_ramp_end:.5f}")

# %%
# The full fidelity curve along one ramp.
tr = ground_prep_setup(n, 2.9).run(None, PropagatorConfig(observe_every=29))
for t, f in zip(tr.times, tr.fidelities):
    print(f"Jt={t:5.2f}  F_g={f:.4f}  " + "#" * int(40 * f))
