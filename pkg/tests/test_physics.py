"""Physical predictions behind the feedback and two-waveguide scenarios."""

import math

import numpy as np
import pytest

from wgqed.basis import FockBasis, WaveguideBasis
from wgqed.evolution import waveguide_evolution
from wgqed.scenarios import (
    DEFAULT_SUBSTEPS,
    emitter_hamiltonian,
    feedback_setup,
    make_times,
    run_feedback,
    run_two_waveguide,
)
from wgqed.states import fock_state, one_photon_view, onephoton, tensor_state
from wgqed.oracle import gaussian_pulse


def test_trapped_population_approaches_four_ninths():
    # c' = -(g/2) c - (g/2) c(t - tau) conserves c + (g/2) int_{t-tau}^t c, so c -> 1/(1 + g tau/2)
    errors = []
    for dt in (0.1, 0.05, 0.025):
        res = run_feedback(feedback_setup(dt=dt, phi=math.pi))
        errors.append(abs(res["emitter"][-1] - 4 / 9))
    assert errors[-1] < 2e-3
    for a, b in zip(errors, errors[1:]):
        assert a / b == pytest.approx(2, rel=0.05)


def test_trapped_population_is_flat_after_a_few_delays():
    res = run_feedback(feedback_setup(phi=math.pi))
    t, e = res["series_t"], res["emitter"]
    late = e[t >= 6]
    assert np.ptp(late) < 1e-4


def _reflectance(dt=0.05, t_max=15.0, gamma_left=0.5, gamma_right=0.5, tau_g=2.0, t0=7.5):
    times = make_times(dt, t_max)
    bw = WaveguideBasis.from_times(1, times, n_waveguides=2)
    be = FockBasis(1)
    psi0 = tensor_state(fock_state(be, 0), onephoton(bw, lambda t: gaussian_pulse(t, tau_g, t0)))
    H = (emitter_hamiltonian(be, bw, gamma_right, dt, guide=1)
         + emitter_hamiltonian(be, bw, gamma_left, dt, guide=2))
    out = waveguide_evolution(times, psi0, H, substeps=DEFAULT_SUBSTEPS).state
    return one_photon_view(out, guide=2).norm_sq


def test_double_reflection_is_suppressed_relative_to_independent_photons():
    r = _reflectance()
    assert 0.55 < r < 0.65
    res = run_two_waveguide()
    independent = 2 * r**2
    assert res["n_ll_final"] < 0.25 * independent
    assert res["n_rr_final"] > 2 * (1 - r) ** 2
