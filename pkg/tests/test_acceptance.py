"""Acceptance suite: one test per criterion, each printing a single PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -s`` to see the summary lines.
"""

import math
import time

import numpy as np
import pytest

from oracles import dense_embed, dense_fock_destroy, dense_waveguide_destroy
from wgqed.analysis import l2_error
from wgqed.baseline import build_sparse_operators, run_benchmark, sparse_evolution
from wgqed.basis import FockBasis, TimeGrid, WaveguideBasis, tensor_basis
from wgqed.evolution import waveguide_evolution
from wgqed.operators import create, destroy, identity, set_active_bin, tensor
from wgqed.oracle import eom_integrate, gaussian_pulse
from wgqed.scenarios import (
    DEFAULT_SUBSTEPS,
    feedback_setup,
    run_feedback,
    run_single_scatter,
    run_two_scatter,
    run_two_waveguide,
    single_scatter_setup,
    times_from_bins,
    two_scatter_setup,
)


def verdict(label, passed, detail):
    print(f"\n{'PASS' if passed else 'FAIL'}  {label}: {detail}")
    assert passed, f"{label}: {detail}"


def timed(fn, *args, **kw):
    t = time.perf_counter()
    out = fn(*args, **kw)
    return out, time.perf_counter() - t


def norm_drift(norm_sq):
    n = np.sqrt(norm_sq)
    return float(np.max(np.abs(n - n[0])))


@pytest.fixture(scope="module", autouse=True)
def warm_up():
    run_single_scatter(single_scatter_setup(times=np.arange(5) * 0.5), substeps=1)


@pytest.fixture(scope="module")
def single():
    return run_single_scatter()


@pytest.fixture(scope="module")
def two():
    return timed(run_two_scatter, two_scatter_setup(times=times_from_bins(200, 10.0)))


@pytest.fixture(scope="module")
def two_default():
    return run_two_scatter()


@pytest.fixture(scope="module")
def two_waveguide():
    return run_two_waveguide()


def test_criterion_1_single_photon_scattering(single):
    _, rel = l2_error(single["xi_out"], single["xi_ref"], single["setup"].waveguide.dt)
    errors, seconds = [], []
    for n in (100, 200, 400, 800):
        res, sec = timed(run_single_scatter, single_scatter_setup(times=times_from_bins(n, 10.0)))
        errors.append(l2_error(res["xi_out"], res["xi_ref"], res["setup"].waveguide.dt)[1])
        seconds.append(sec)
    mono = all(b < a for a, b in zip(errors, errors[1:]))
    ok = rel < 1e-2 and mono and max(seconds) < 5
    verdict("criterion 1 single-photon scattering", ok,
            f"rel error {rel:.3e} at dt=0.05; errors {['%.2e' % e for e in errors]}; "
            f"slowest point {max(seconds):.2f}s")


def test_criterion_2_conservation(single, two_default, two_waveguide):
    nd = norm_drift(single["norm_sq"])
    ex = float(np.ptp(single["excitations"]))
    p2 = float(np.ptp(two_default["photons"] + two_default["emitter"]))
    pw = float(np.ptp(two_waveguide["photons"] + two_waveguide["emitter"]))
    ok = nd < 1e-8 and ex < 1e-6 and p2 < 1e-3 and pw < 1e-3
    verdict("criterion 2 conservation", ok,
            f"norm drift {nd:.2e}, excitation drift {ex:.2e}, photon drift two-photon "
            f"{p2:.2e}, two-waveguide {pw:.2e}")


def test_criterion_3_two_photon_entanglement(two):
    res, sec = two
    lin = float(res["schmidt_in"].lambda_sq[0])
    lout = res["schmidt_out"].lambda_sq
    n_big = int(np.sum(lout > 1e-3))
    ok = abs(lin - 1) < 1e-8 and lout[0] < 0.999 and n_big >= 3 and sec < 30
    verdict("criterion 3 two-photon entanglement", ok,
            f"input lambda1^2 {lin:.12f}; output lambda1^2 {lout[0]:.4f}, "
            f"{n_big} coefficients above 1e-3; {sec:.1f}s at N=200")


def test_criterion_4_two_waveguide(two_waveguide):
    r = two_waveguide
    total = r["n_rr_final"] + r["n_ll_final"] + r["n_lr_final"] + 2 * r["emitter"][-1]
    ll = np.abs(r["xi2_ll"].values)
    diag = float(np.max(np.diag(ll)) / np.max(ll))
    ratio = r["n_ll_final"] / r["n_rr_final"]
    ok = abs(total - 2) < 1e-2 and diag < 0.05 and ratio < 0.2
    verdict("criterion 4 two-waveguide scattering", ok,
            f"total {total:.6f}; LL diagonal ratio {diag:.4f}; "
            f"n_LL/n_RR {ratio:.3f} (n_RR {r['n_rr_final']:.4f}, n_LL {r['n_ll_final']:.4f})")


def test_criterion_5_feedback():
    pi = run_feedback(feedback_setup(phi=math.pi))
    zero = run_feedback(feedback_setup(phi=0.0))
    t, e = pi["series_t"], pi["emitter"]
    window = e[(t >= 8) & (t <= 9)]
    plateau = window.size > 0 and window.min() >= 0.45 and window.max() <= 0.55
    tz, ez = zero["series_t"], zero["emitter"]
    excess = float(np.max(ez[tz > 1.0] - np.exp(-tz[tz > 1.0])))
    ok = plateau and excess <= 0.02
    verdict("criterion 5 feedback", ok,
            f"phi=pi population on [8, 9] in [{window.min():.4f}, {window.max():.4f}]; "
            f"phi=0 max excess over exp(-t) {excess:.4f}")


def test_criterion_6_baseline_equivalence_and_speed():
    diffs = []
    for setup in (single_scatter_setup, two_scatter_setup):
        s = setup(times=times_from_bins(100, 10.0))
        a = waveguide_evolution(s.times, s.psi0, s.H, substeps=DEFAULT_SUBSTEPS).state.data
        b = sparse_evolution(s.times, s.psi0, build_sparse_operators(s.H),
                             substeps=DEFAULT_SUBSTEPS).state.data
        diffs.append(float(np.max(np.abs(a - b))))
    reports = run_benchmark("two-scatter", n_list=(200,), repeats=3)
    by = {r.method: r for r in reports}
    speedup = by["sparse"].total_seconds / by["matrix-free"].total_seconds
    ok = max(diffs) < 1e-10 and speedup >= 10
    verdict("criterion 6 baseline equivalence and speed", ok,
            f"max amplitude difference {max(diffs):.2e}; speedup {speedup:.1f}x at N=200")


def _to_dense(op):
    d = op.basis.dimension
    return np.array([op(np.eye(d, dtype=complex)[j]) for j in range(d)]).T


def test_criterion_7_algebra_properties():
    failures = []
    rng = np.random.default_rng(2024)

    b = WaveguideBasis(2, 2, TimeGrid(0.0, 0.1, 3))
    low = np.flatnonzero(b.photon_number() < 2)
    modes = [(g, k) for g in (1, 2) for k in (1, 2, 3)]
    for gj, kj in modes:
        for gk, kk in modes:
            a = dense_waveguide_destroy(b, gj, kj)
            c = dense_waveguide_destroy(b, gk, kk).conj().T
            w, wd = destroy(b, gj), create(b, gk)
            set_active_bin(w, kj)
            set_active_bin(wd, kk)
            lw, lwd = _to_dense(w), _to_dense(wd)
            if not (np.array_equal(lw, a) and np.array_equal(lwd, c)):
                failures.append("kernel vs occupation oracle")
            comm = (lw @ lwd - lwd @ lw)[np.ix_(low, low)]
            if not np.allclose(comm, float((gj, kj) == (gk, kk)) * np.eye(low.size), atol=1e-14):
                failures.append("commutator")
            x = rng.normal(size=b.dimension) + 1j * rng.normal(size=b.dimension)
            y = rng.normal(size=b.dimension) + 1j * rng.normal(size=b.dimension)
            if abs(np.vdot(y, w(x)) - np.vdot(w.dag()(y), x)) > 1e-13:
                failures.append("adjoint pairing")

    be, bw = FockBasis(1), WaveguideBasis(2, 1, TimeGrid(0.0, 0.1, 4))
    cb = tensor_basis(be, bw)
    s, sd = destroy(be), create(be)
    w, wd, wtau = destroy(bw), create(bw), destroy(bw, delay=2)
    c1, c2 = 0.7 - 0.2j, 1.3
    H = c1 * tensor(sd, w) + c2 * tensor(s, wd) * tensor(identity(be), wtau) - tensor(sd * s, wd * w)
    assert cb.dimension <= 64
    for k in (1, 2):
        set_active_bin(H, k)
        A, Ad = dense_waveguide_destroy(bw, 1, k), dense_waveguide_destroy(bw, 1, k).conj().T
        At = dense_waveguide_destroy(bw, 1, k + 2)
        S = dense_fock_destroy(be)
        ref = (c1 * dense_embed(cb, {0: S.conj().T, 1: A})
               + c2 * dense_embed(cb, {0: S, 1: Ad}) @ dense_embed(cb, {1: At})
               - dense_embed(cb, {0: S.conj().T @ S, 1: Ad @ A}))
        if np.abs(_to_dense(H) - ref).max() > 1e-13:
            failures.append("lazy vs dense")

    for basis in (WaveguideBasis(2, 3, TimeGrid(0, 0.1, 5)), WaveguideBasis(1, 2, TimeGrid(0, 0.1, 7))):
        if [basis.flat_index(basis.label(i)) for i in range(basis.dimension)] != list(range(basis.dimension)):
            failures.append("flat-index bijectivity")

    f = lambda t: gaussian_pulse(t) * np.cos(t)  # noqa: E731
    finals = [eom_integrate(f, 1.0, 10.0 / n, n + 1)[0][-1] for n in (100, 200, 400)]
    order = math.log2(abs(finals[0] - finals[1]) / abs(finals[1] - finals[2]))
    if not 3.8 < order < 4.2:
        failures.append(f"RK4 order {order:.2f}")

    verdict("criterion 7 algebra property suite", not failures,
            "all properties hold" if not failures else ", ".join(sorted(set(failures))))
