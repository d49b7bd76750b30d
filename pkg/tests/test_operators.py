import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import dense_embed, dense_fock_destroy, dense_waveguide_destroy
from wgqed.basis import FockBasis, Single, TimeGrid, Vacuum, WaveguideBasis, tensor_basis
from wgqed.operators import (
    LocalOp,
    apply_accumulate,
    create,
    destroy,
    identity,
    lazy_tensor,
    number,
    set_active_bin,
    tensor,
)
from wgqed.scenarios import feedback_setup, two_scatter_setup, two_waveguide_setup


def wg(p, w, n, dt=0.1):
    return WaveguideBasis(p, w, TimeGrid(0.0, dt, n))


def to_dense(op):
    d = op.basis.dimension
    cols = []
    for j in range(d):
        e = np.zeros(d, dtype=complex)
        e[j] = 1
        cols.append(op(e))
    return np.array(cols).T


@pytest.mark.parametrize("p,w,n", [(1, 1, 4), (2, 1, 4), (2, 2, 3), (2, 3, 2), (1, 3, 3)])
def test_kernel_matches_occupation_oracle(p, w, n):
    b = wg(p, w, n)
    for g in range(1, w + 1):
        for delay in range(n):
            a = destroy(b, g, delay=delay)
            for k in range(1, n - delay + 1):
                set_active_bin(a, k)
                ref = dense_waveguide_destroy(b, g, k + delay)
                assert np.allclose(to_dense(a), ref, atol=1e-15)
                assert np.allclose(to_dense(a.dag()), ref.conj().T, atol=1e-15)


@pytest.mark.parametrize("p,w,n", [(1, 1, 3), (2, 1, 3), (2, 2, 3)])
def test_commutator_on_admissible_subspace(p, w, n):
    b = wg(p, w, n)
    modes = [(g, k) for g in range(1, w + 1) for k in range(1, n + 1)]
    low = np.flatnonzero(b.photon_number() < p)
    for gj, kj in modes:
        aj = dense_waveguide_destroy(b, gj, kj)
        for gk, kk in modes:
            ak = dense_waveguide_destroy(b, gk, kk)
            lazy_j, lazy_k = destroy(b, gj), create(b, gk)
            set_active_bin(lazy_j, kj)
            set_active_bin(lazy_k, kk)
            c = to_dense(lazy_j) @ to_dense(lazy_k) - to_dense(lazy_k) @ to_dense(lazy_j)
            assert np.allclose(c, aj @ ak.conj().T - ak.conj().T @ aj, atol=1e-14)
            expected = float((gj, kj) == (gk, kk)) * np.eye(low.size)
            assert np.allclose(c[np.ix_(low, low)], expected, atol=1e-14)


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=40, deadline=None)
def test_adjoint_pairing(seed):
    rng = np.random.default_rng(seed)
    b = wg(2, 2, 3)
    d = b.dimension
    x = rng.normal(size=d) + 1j * rng.normal(size=d)
    y = rng.normal(size=d) + 1j * rng.normal(size=d)
    op = destroy(b, int(rng.integers(1, 3)), delay=int(rng.integers(0, 2)))
    set_active_bin(op, int(rng.integers(1, 3)))
    assert np.isclose(np.vdot(y, op(x)), np.vdot(op.dag()(y), x), atol=1e-13)


# random expression trees over a composite basis, checked against dense kron algebra

CASES = [(FockBasis(1), wg(2, 1, 3)), (FockBasis(2), wg(1, 2, 3)), (FockBasis(1), wg(2, 2, 2))]


def _leaf(rng, be, bw, n_bins):
    kind = rng.integers(4)
    if kind == 0:
        m = rng.normal(size=(be.dimension,) * 2) + 1j * rng.normal(size=(be.dimension,) * 2)
        return tensor(LocalOp(be, m), identity(bw)), lambda k, m=m: dense_embed(
            tensor_basis(be, bw), {0: m})
    g = int(rng.integers(1, bw.n_waveguides + 1))
    delay = int(rng.integers(0, n_bins))
    w = destroy(bw, g, delay=delay)
    local = destroy(be) if kind == 1 else number(be)
    lm = dense_fock_destroy(be) if kind == 1 else np.diag(np.arange(be.dimension) + 0j)
    if kind == 3:
        w = w.dag()

    def dense(k, lm=lm, g=g, delay=delay, kind=kind):
        a = dense_waveguide_destroy(bw, g, min(k + delay, bw.n_bins))
        return dense_embed(tensor_basis(be, bw), {0: lm, 1: a.conj().T if kind == 3 else a})

    return tensor(local, w), dense


def _tree(rng, be, bw, depth):
    if depth == 0 or rng.random() < 0.3:
        return _leaf(rng, be, bw, bw.n_bins)
    (a, da), (b, db) = _tree(rng, be, bw, depth - 1), _tree(rng, be, bw, depth - 1)
    c = complex(rng.normal(), rng.normal())
    op = int(rng.integers(4))
    if op == 0:
        return a + b, lambda k: da(k) + db(k)
    if op == 1:
        return a - c * b, lambda k: da(k) - c * db(k)
    if op == 2:
        return a * b, lambda k: da(k) @ db(k)
    return a.dag(), lambda k: da(k).conj().T


@given(st.integers(0, 2**32 - 1), st.sampled_from(range(len(CASES))))
@settings(max_examples=80, deadline=None)
def test_lazy_tree_matches_dense(seed, case):
    rng = np.random.default_rng(seed)
    be, bw = CASES[case]
    op, dense = _tree(rng, be, bw, 3)
    assert op.basis.dimension <= 64
    delays = [k.delay_bins for k in op.kernels()]
    last = bw.n_bins - max(delays, default=0)
    for k in range(1, last + 1):
        set_active_bin(op, k)
        ref = dense(k)
        scale_ = max(1.0, np.abs(ref).max())
        assert np.abs(to_dense(op) - ref).max() <= 1e-13 * scale_


def test_identity_sigma_worked_example():
    q = FockBasis(1)
    sigma = LocalOp(q, [[0, 1], [0, 0]])
    op = tensor(identity(q), sigma)
    a, b, c, d = 2.0, 3.0, 5.0, 7.0
    x = np.kron([a, b], [c, d]).astype(complex)
    assert np.allclose(op(x), [a * d, 0, b * d, 0])


def test_lazy_tensor_positions():
    be, bw = FockBasis(1), wg(1, 1, 3)
    cb = tensor_basis(be, bw, be)
    w = destroy(bw)
    op = lazy_tensor(cb, {1: w, 2: create(be)}, coef=2.0)
    set_active_bin(op, 2)
    ref = 2 * dense_embed(cb, {1: dense_waveguide_destroy(bw, 1, 2),
                               2: dense_fock_destroy(be).T})
    assert np.allclose(to_dense(op), ref)
    with pytest.raises(ValueError):
        lazy_tensor(cb, {5: w})
    with pytest.raises(ValueError):
        lazy_tensor(cb, {0: w})


def test_active_bin_horizon_with_delay():
    b = wg(1, 1, 201, dt=0.05)
    w = destroy(b, delay=20)
    wd = create(b)
    h = tensor(w, identity(FockBasis(1))) + tensor(wd, identity(FockBasis(1)))
    set_active_bin(h, 181)
    assert w.effective_bin == 201
    with pytest.raises(ValueError, match="exceeds"):
        set_active_bin(h, 182)
    assert wd.active_bin == 181
    set_active_bin(h, 181)
    assert w.active_bin == 181
    with pytest.raises(ValueError):
        set_active_bin(h, 0)


def test_non_integer_delay_rejected():
    with pytest.raises(ValueError):
        destroy(wg(1, 1, 10), delay=2.5)


def test_apply_accumulate():
    b = wg(2, 1, 3)
    op = create(b)
    set_active_bin(op, 2)
    rng = np.random.default_rng(1)
    x = rng.normal(size=b.dimension) + 0j
    out = rng.normal(size=b.dimension) + 1j
    keep = out.copy()
    apply_accumulate(out, op, x, alpha=0.0, beta=1.0)
    assert np.array_equal(out, keep)
    apply_accumulate(out, op, x, alpha=2.0, beta=-1.0)
    assert np.allclose(out, 2 * to_dense(op) @ x - keep)


def test_apply_errors():
    b = wg(1, 1, 3)
    op = destroy(b)
    x = np.zeros(b.dimension, dtype=complex)
    with pytest.raises(ValueError, match="alias"):
        op.apply(x, x)
    with pytest.raises(ValueError, match="dimension"):
        op.apply(np.zeros(3, dtype=complex), x)
    with pytest.raises(TypeError):
        op.apply(np.zeros(b.dimension), x)


def test_create_on_vacuum():
    b = wg(1, 1, 5)
    wd = create(b)
    set_active_bin(wd, 3)
    vac = np.zeros(b.dimension, dtype=complex)
    vac[b.flat_index(Vacuum())] = 1
    out = wd(vac)
    expected = np.zeros_like(vac)
    expected[b.flat_index(Single(1, 3))] = 1
    assert np.array_equal(out, expected)


def test_double_occupation_factor():
    b = wg(2, 1, 3)
    wd = create(b)
    set_active_bin(wd, 2)
    vac = np.zeros(b.dimension, dtype=complex)
    vac[0] = 1
    twice = wd(wd(vac))
    assert math.isclose(np.linalg.norm(twice), math.sqrt(2))


def _scenario_hamiltonians():
    t = np.arange(5) * 0.5
    yield two_scatter_setup(times=t)
    yield two_waveguide_setup(times=t)
    yield feedback_setup(dt=0.5, t_max=3.0, delay=1.0)


@pytest.mark.parametrize("setup", list(_scenario_hamiltonians()), ids=["two", "twowg", "fb"])
def test_scenario_hamiltonians_hermitian(setup):
    H = setup.H
    assert H.basis.dimension <= 200
    last = setup.waveguide.n_bins - max(k.delay_bins for k in H.kernels())
    for k in range(1, last + 1):
        set_active_bin(H, k)
        m = to_dense(H)
        assert np.allclose(m, m.conj().T, atol=1e-12)
        idx = H.support()
        outside = np.setdiff1d(np.arange(m.shape[0]), idx)
        assert np.all(m[np.ix_(outside, outside)] == 0)
        assert np.all(m[np.ix_(idx, outside)] == 0)
