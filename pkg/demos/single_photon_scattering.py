"""
Single photon on a two-level emitter
====================================

A Gaussian photon hits an emitter in its ground state. We compare the
scattered wavefunction with the closed-form solution, then watch the error
shrink as the time bins get finer.
"""

from wgqed.analysis import l2_error
from wgqed.plotting import line_plot
from wgqed.scenarios import run_single_scatter, single_scatter_setup, times_from_bins

# gamma = 1, pulse width 1 centred at t = 5, bins of 0.05 up to t = 10
res = run_single_scatter(single_scatter_setup(dt=0.05, t_max=10.0))
t = res["t"]
_, rel = l2_error(res["xi_out"], res["xi_ref"], t[1] - t[0])
print(f"relative L2 error against the closed form: {rel:.2e}")
print(f"peak emitter population: {res['emitter'].max():.3f}")

# The output pulse is reshaped: part of it is delayed by absorption and re-emission
line_plot("single_photon.svg",
          [("input", t, res["xi_in"].real), ("scattered", t, res["xi_out"].real),
           ("closed form", t, res["xi_ref"].real)],
          title="Single-photon scattering", xlabel="t", ylabel="Re xi(t)")

# %%
# Convergence: halving the bin width roughly halves the error
for n in (100, 200, 400, 800):
    r = run_single_scatter(single_scatter_setup(times=times_from_bins(n, 10.0)))
    dt = r["setup"].waveguide.dt
    print(f"N = {n:4d}  dt = {dt:.4f}  error = {l2_error(r['xi_out'], r['xi_ref'], dt)[1]:.2e}")
