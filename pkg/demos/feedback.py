"""
An emitter in front of a mirror
===============================

The emitted field returns after a delay tau. With a phase of pi it
interferes destructively with further emission and part of the excitation
stays trapped. With a phase of 0 the emitter decays faster than it would alone.
"""

import math

from wgqed.plotting import line_plot
from wgqed.scenarios import decay_setup, feedback_setup, run_decay, run_feedback

series = []
for phi in (0.0, math.pi):
    res = run_feedback(feedback_setup(dt=0.05, t_max=10.0, gamma=1.0, phi=phi, delay=1.0))
    series.append((f"phi = {phi:.2f}", res["series_t"], res["emitter"]))
    print(f"phi = {phi:.2f}: population at t = {res['series_t'][-1]:.1f} is {res['emitter'][-1]:.4f}")

ref = run_decay(decay_setup(t_end=series[0][1][-1]))
series.append(("no mirror", ref["series_t"], ref["emitter"]))

# With gamma * tau = 1 the trapped amplitude is 1 / (1 + gamma tau / 2), so the population is 4/9
print(f"expected trapped population: {4 / 9:.4f}")

line_plot("feedback.svg", series, title="Emitter population with feedback",
          xlabel="t", ylabel="<s+s>")
