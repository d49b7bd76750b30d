"""
Transmission and reflection of a photon pair
============================================

The emitter couples equally to a right-moving and a left-moving waveguide.
A two-photon pulse arrives from the left. Because the emitter saturates, the
pair rarely leaves together in the reflected direction, and the two reflected
photons almost never arrive at the same time.
"""

import numpy as np

from wgqed.plotting import heatmap
from wgqed.scenarios import run_two_waveguide

res = run_two_waveguide()
t = res["t"]
n_rr, n_ll, n_lr = res["n_rr_final"], res["n_ll_final"], res["n_lr_final"]
print(f"both transmitted  n_RR = {n_rr:.4f}")
print(f"both reflected    n_LL = {n_ll:.4f}")
print(f"one of each       n_LR = {n_lr:.4f}")
print(f"total             {n_rr + n_ll + n_lr + 2 * res['emitter'][-1]:.6f}")

ll = np.abs(res["xi2_ll"].values)
print(f"LL equal-time amplitude / peak: {np.diag(ll).max() / ll.max():.3f}")

for tag, wf in (("RR", res["xi2_rr"]), ("LL", res["xi2_ll"]), ("LR", res["xi2_lr"])):
    heatmap(f"two_waveguide_{tag}.svg", np.abs(wf.values) ** 2, t, t,
            title=f"|xi_{tag}(t, t')|^2", xlabel="t", ylabel="t'")
