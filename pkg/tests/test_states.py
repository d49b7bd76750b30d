import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra import numpy as hnp

from wgqed.basis import FockBasis, PairSame, TimeGrid, WaveguideBasis, tensor_basis
from wgqed.operators import create, destroy, number, set_active_bin, tensor
from wgqed.states import (
    StateVector,
    expect,
    fock_state,
    inner,
    normalize,
    one_photon_view,
    onephoton,
    read_one_photon_csv,
    read_two_photon_csv,
    tensor_state,
    two_photon_view,
    twophoton,
    write_one_photon_csv,
    write_two_photon_csv,
    zerophoton,
)


def gauss(t, t0=1.0, w=0.3):
    return (2 / np.pi / w**2) ** 0.25 * np.exp(-((t - t0) ** 2) / w**2)


def wg(p=2, w=1, n=40, dt=0.05):
    return WaveguideBasis(p, w, TimeGrid(0.0, dt, n))


complex_vec = lambda n: hnp.arrays(  # noqa: E731
    np.complex128, n, elements=st.complex_numbers(max_magnitude=10, allow_nan=False,
                                                  allow_infinity=False))


@given(complex_vec(12))
@settings(max_examples=50, deadline=None)
def test_one_photon_round_trip(xi):
    b = wg(1, 2, 12)
    psi = onephoton(b, xi, guide=2)
    view = one_photon_view(psi, guide=2)
    assert np.allclose(view.values, xi, rtol=1e-12, atol=1e-12)
    assert np.allclose(one_photon_view(psi, guide=1).values, 0)
    assert np.isclose(psi.norm() ** 2, view.norm_sq)


@given(complex_vec((6, 6)))
@settings(max_examples=50, deadline=None)
def test_two_photon_round_trip_symmetric(m):
    b = wg(2, 1, 6)
    sym = (m + m.T) / 2
    psi = twophoton(b, sym)
    back = two_photon_view(psi)
    assert np.allclose(back.values, sym, atol=1e-12)
    assert np.isclose(psi.norm() ** 2, back.norm_sq)


@given(complex_vec((5, 5)))
@settings(max_examples=30, deadline=None)
def test_two_photon_round_trip_cross(m):
    b = wg(2, 3, 5)
    psi = twophoton(b, m, guide=(3, 1))
    assert np.allclose(two_photon_view(psi, 3, 1).values, m)
    assert np.allclose(two_photon_view(psi, 1, 3).values, m.T)
    assert np.isclose(psi.norm() ** 2, np.sum(np.abs(m) ** 2) * b.dt**2)


def test_amplitude_convention():
    b = wg(2, 1, 4, dt=0.5)
    m = np.arange(16, dtype=float).reshape(4, 4)
    psi = twophoton(b, m)
    assert psi.data[b.flat_index(PairSame(1, 2, 2))] == 0.5 * m[1, 1]
    assert np.isclose(psi.data[b.flat_index(PairSame(1, 1, 3))], 0.5 * (m[0, 2] + m[2, 0]) / np.sqrt(2))


def test_product_pulse_is_normalized():
    b = wg(2, 1, 400, dt=0.01)
    psi = twophoton(b, lambda a, c: gauss(a) * gauss(c))
    assert abs(psi.norm() - 1) < 1e-10
    psi1 = onephoton(wg(1, 1, 400, dt=0.01), gauss)
    assert abs(psi1.norm() - 1) < 1e-10


def test_callable_fallback_for_scalar_functions():
    b = wg(2, 1, 5)
    f = lambda a, c: float(a) + 2 * float(c)  # noqa: E731
    g = np.array([[f(x, y) for y in b.times] for x in b.times])
    assert np.allclose(twophoton(b, f).data, twophoton(b, g).data)


def test_twophoton_errors():
    with pytest.raises(ValueError):
        twophoton(wg(1, 1, 4), np.zeros((4, 4)))
    with pytest.raises(ValueError):
        twophoton(wg(2, 1, 4), np.zeros((3, 3)))
    with pytest.raises(ValueError):
        twophoton(wg(2, 2, 4), np.zeros((4, 4)), guide=(2, 2))
    with pytest.raises(ValueError):
        onephoton(wg(1, 1, 4), np.zeros(5))


@given(complex_vec(2), complex_vec(5), complex_vec(3))
@settings(max_examples=40, deadline=None)
def test_tensor_state_is_kron(a, b, c):
    bases = FockBasis(1), wg(1, 1, 4), FockBasis(2)
    s = tensor_state(*(StateVector(B, v) for B, v in zip(bases, (a, b, c))))
    assert s.dimension <= 30
    assert np.allclose(s.data, np.kron(np.kron(a, b), c))
    assert s.basis == tensor_basis(*bases)


def test_inner_expect_normalize():
    q = FockBasis(2)
    s = normalize(StateVector(q, [1, 1j, 1]))
    assert np.isclose(s.norm(), 1)
    assert np.isclose(inner(s, s), 1)
    assert np.isclose(expect(number(q), s), 1.0)
    with pytest.raises(ValueError):
        normalize(StateVector(q))
    with pytest.raises(ValueError):
        inner(s, fock_state(FockBasis(1), 0))


def test_expect_in_composite_space():
    be, bw = FockBasis(1), wg(1, 1, 4)
    psi = tensor_state(fock_state(be, 1), zerophoton(bw))
    op = tensor(number(be), destroy(bw).dag() * destroy(bw))
    set_active_bin(op, 2)
    assert expect(op, psi) == 0
    wd = tensor(destroy(be), create(bw))
    set_active_bin(wd, 2)
    emitted = wd(psi)
    assert np.isclose(one_photon_view(emitted).values[1], 1 / np.sqrt(bw.dt))


def test_views_report_leakage():
    be, bw = FockBasis(1), wg(1, 1, 5)
    xi = np.ones(5)
    ground = tensor_state(fock_state(be, 0), onephoton(bw, xi))
    excited = tensor_state(fock_state(be, 1), zerophoton(bw))
    psi = (ground + excited) / np.sqrt(2)
    v = one_photon_view(psi)
    assert np.allclose(v.values, xi / np.sqrt(2))
    assert np.isclose(v.leakage, 1 / np.sqrt(2))
    assert one_photon_view(ground).leakage == 0


def test_view_needs_a_waveguide_factor():
    with pytest.raises(ValueError):
        one_photon_view(fock_state(FockBasis(1), 0))
    two = tensor_state(zerophoton(wg(1, 1, 3)), zerophoton(wg(1, 1, 3)))
    with pytest.raises(ValueError, match="factor"):
        one_photon_view(two)
    assert one_photon_view(two, factor=1).values.shape == (3,)


def test_csv_round_trip(tmp_path):
    b = wg(2, 1, 7)
    rng = np.random.default_rng(0)
    xi = rng.normal(size=7) + 1j * rng.normal(size=7)
    psi1 = onephoton(wg(1, 1, 7), xi)
    p = write_one_photon_csv(tmp_path / "a.csv", one_photon_view(psi1))
    assert p.read_text().splitlines()[0] == "t,re,im"
    t, back = read_one_photon_csv(p)
    assert np.allclose(back, xi, rtol=1e-15, atol=0)
    assert np.array_equal(t, b.times)

    m = rng.normal(size=(7, 7)) + 1j * rng.normal(size=(7, 7))
    wf = two_photon_view(twophoton(b, m + m.T))
    p2 = write_two_photon_csv(tmp_path / "b.csv", wf)
    t2, back2 = read_two_photon_csv(p2)
    assert np.array_equal(back2, wf.values)
    assert np.array_equal(t2, b.times)
