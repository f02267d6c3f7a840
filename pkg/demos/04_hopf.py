# %% [markdown]
# # Direction and stability of the bifurcating orbits
#
# At each crossing the centre-manifold reduction gives the first Lyapunov
# coefficient C1(0). Its real part decides the orbit's stability and, with
# Re lambda'(tau_c), which side of tau_c the orbit lives on.

# %%
import numpy as np

from stagechain import REFERENCE_PARAMS, find_switches, hopf_at_switches, simulate
from stagechain.orbit import post_transient

reports = hopf_at_switches(REFERENCE_PARAMS, find_switches(REFERENCE_PARAMS))
for r in reports:
    print(f"tau_c = {r.tau_c:.6f}  omega = {r.omega_c:.6f}")
    print(f"  g20 = {r.g20:.4f}  g11 = {r.g11:.4f}  g02 = {r.g02:.4f}  g21 = {r.g21:.4f}")
    print(f"  C1(0) = {r.C1_0:.4f}  lambda' = {r.lambda_prime:.4f}")
    print(f"  mu2 = {r.mu2:+.3f} ({r.direction}), beta2 = {r.beta2:+.3f} ({r.orbit_stability}), T2 = {r.T2:+.3f}")

# %% [markdown]
# Check the leading-order amplitude against simulation just inside the
# oscillatory window.

# %%
for r, off in zip(reports, (0.01, -0.01)):
    tau = r.tau_c + off
    tr = simulate(REFERENCE_PARAMS.with_tau(tau), t_end=6000)
    _, s = post_transient(tr, 0.75)
    amp = 0.5 * np.ptp(s[:, 0])
    print(f"tau = {tau:.4f}: predicted x amplitude {r.predicted_x_amplitude(tau):.4f}, simulated {amp:.4f}")
