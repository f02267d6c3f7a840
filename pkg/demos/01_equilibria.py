# %% [markdown]
# # Equilibria and delay thresholds
#
# The reduced system lives on (prey x, pest y, mature enemy z2). Four steady
# states are possible; the two with y > 0 depend on the vital rates, and the
# interior one also on the maturation delay tau.

# %%
import numpy as np

from stagechain import BOUNDARY_PARAMS, REFERENCE_PARAMS, compute_equilibria, existence_thresholds
from stagechain.linstab import boundary_spectrum, routh_hurwitz_tau0

for e in compute_equilibria(REFERENCE_PARAMS):
    print(f"{e.kind}: {np.round(e.full_state(), 6)}  exists={e.exists} ({e.condition})")

# %% [markdown]
# The interior equilibrium shrinks in x and z2 as tau grows and vanishes at
# tau_bar; the same number is where the predator-free state E2 becomes stable.

# %%
th = existence_thresholds(REFERENCE_PARAMS)
print(f"tau_bar = {th.tau_bar:.6f}, tau_cr = {th.tau_cr:.6f}")
for tau in (0.0, 2.0, 5.0, 5.34, 5.35):
    print(f"  tau = {tau}: interior exists = {th.h2(tau)}")

# %% [markdown]
# Boundary spectra. E2's delayed factor has a single real root that crosses
# zero exactly at tau_cr.

# %%
for tau in (1.0, 5.6):
    sp = boundary_spectrum(REFERENCE_PARAMS, "E2", tau)
    print(f"E2 at tau={tau}: pair {sp.eigenvalues[0]:.6f}, indicator {sp.indicator:+.4f}, "
          f"delayed root {sp.delayed_root:+.4f} -> {sp.verdict}")
print("E0:", boundary_spectrum(REFERENCE_PARAMS, "E0"))
print("E1 when E2 is infeasible:", boundary_spectrum(BOUNDARY_PARAMS, "E1"))

# %%
rh = routh_hurwitz_tau0(REFERENCE_PARAMS)
print(f"Without delay the interior state is {rh.verdict}: a1*a2 - a3 = {rh.discriminant:.5f}")
