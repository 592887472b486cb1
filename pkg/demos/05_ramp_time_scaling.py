"""
How the minimal ramp time grows with chain length
=================================================

T_min is the shortest ramp giving F(T) >= 0.99. For preparation it follows
the inverse squared gap and so grows roughly like N^2. Transfer needs much
longer ramps, and its F(T) oscillates, so T_min can jump between lobes.
"""
import numpy as np

from adiabatic_chain.protocols import adiabatic_time_estimate, find_tmin

ns = np.array([6, 8, 10, 12])

# %%
prep = np.array([find_tmin("ground_prep", n) for n in ns])
for n, t in zip(ns, prep):
    print(f"ground prep  N={n:2d}  JT_min={t:6.3f}  (1/gap)^2={adiabatic_time_estimate(n):.3f}")
print("r^2 against N^2:", round(np.corrcoef(ns**2, prep)[0, 1] ** 2, 4))

# %%
transfer = np.array([find_tmin("transfer", n) for n in ns])
for n, t, p in zip(ns, transfer, prep):
    print(f"transfer     N={n:2d}  JT_min={t:6.3f}  ratio to preparation {t / p:.1f}")

# %%
# At J = 0.5 GHz one unit of 1/J is 2 ns.
j_hz = 0.5e9
for n, p, t in zip(ns, prep, transfer):
    print(f"N={n:2d}  preparation {p / j_hz * 1e9:5.1f} ns   transfer {t / j_hz * 1e9:5.1f} ns")
