# %% [markdown]
# # Stability switches of the interior equilibrium
#
# The characteristic coefficients depend on tau, so crossings are located as
# zeros of S_n(tau) = tau - (theta + 2 n pi) / omega on each omega branch.

# %%
from pathlib import Path

from stagechain import REFERENCE_PARAMS, find_switches
from stagechain.svg import line_plot
from stagechain.switch import f_cubic

rep = find_switches(REFERENCE_PARAMS)
print("case", rep.case_label)
for a, b, n in rep.branch_regions:
    print(f"  {n} omega branch(es) on [{a:.5f}, {b:.5f})")
for z in rep.sn_zeros:
    print(f"  S{z.n} = 0 at tau = {z.tau:.6f}, omega = {z.omega:.6f}, delta = {z.delta:+d}, "
          f"|P + Q e^(-i w tau)| = {z.residual:.1e}")
for a, b, s in rep.stability_intervals:
    print(f"  {s:8s} on [{a:.4f}, {b:.4f})")

# %% [markdown]
# The sign patterns of the cubic h(z) = z^3 + p z^2 + q z + r along tau.

# %%
for tau in (0.0, 1.0, 2.4, 2.59, 2.62, 4.0):
    fc = f_cubic(REFERENCE_PARAMS, tau)
    print(f"tau={tau:<5} p={fc.p:+.4f} q={fc.q:+.4f} r={fc.r:+.4f} omegas={[round(w, 4) for w in fc.omegas]}")

# %%
out = Path(__file__).with_name("output")
out.mkdir(exist_ok=True)
series = [(rep.grid, c, f"S{n}") for (n, b), c in sorted(rep.s_curves.items()) if n <= 1]
(out / "switch_curves.svg").write_text(line_plot(series, "switching functions", "tau", "S_n", hlines=(0.0,)))
print("wrote", out / "switch_curves.svg")
