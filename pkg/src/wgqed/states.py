"""Waveguide and local states, wavefunction views, and CSV round-tripping.

Conventions for the time-bin encoding (bins sampled at left edges ``t_k``):

* one photon in guide ``m``: amplitude of ``|1_k>`` is ``sqrt(dt) * xi(t_k)``
* two photons in guide ``m``: ``|2_i>`` gets ``dt * xi(t_i, t_i)``, and ``|1_i 1_k>``
  (``i < k``) gets ``dt * (xi(t_i, t_k) + xi(t_k, t_i)) / sqrt(2)``
* one photon in each of guides ``m1 != m2``: ``dt * xi(t_i, t_k)``, unsymmetrized

Nothing is renormalized automatically. The Riemann-sum norm deviates from one at
order ``dt**2`` and that deviation is a useful convergence signal.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Union

import numpy as np

from .basis import (
    FockBasis,
    TimeGrid,
    WaveguideBasis,
    as_composite,
    tensor_basis,
)

__all__ = [
    "StateVector",
    "OnePhotonWavefunction",
    "TwoPhotonWavefunction",
    "zerophoton",
    "onephoton",
    "twophoton",
    "fock_state",
    "tensor_state",
    "norm",
    "normalize",
    "inner",
    "expect",
    "one_photon_view",
    "two_photon_view",
    "write_one_photon_csv",
    "read_one_photon_csv",
    "write_two_photon_csv",
    "read_two_photon_csv",
]

_SQRT2 = np.sqrt(2.0)


class StateVector:
    """Amplitude vector tied to a basis. ``data`` is the raw complex array."""

    __slots__ = ("basis", "data")

    def __init__(self, basis, data=None):
        self.basis = basis
        d = basis.dimension
        if data is None:
            data = np.zeros(d, dtype=np.complex128)
        else:
            data = np.array(data, dtype=np.complex128)
        if data.shape != (d,):
            raise ValueError(f"expected {d} amplitudes, got shape {data.shape}")
        self.data = data

    @classmethod
    def wrap(cls, basis, data: np.ndarray) -> "StateVector":
        """Share ``data`` without copying (it must be complex128 of the right length)."""
        if data.dtype != np.complex128 or data.shape != (basis.dimension,):
            raise ValueError("wrap needs a complex128 vector matching the basis")
        obj = cls.__new__(cls)
        obj.basis = basis
        obj.data = data
        return obj

    @property
    def amplitudes(self) -> np.ndarray:
        return self.data

    @property
    def dimension(self) -> int:
        return self.data.shape[0]

    def copy(self) -> "StateVector":
        return StateVector(self.basis, self.data.copy())

    def norm(self) -> float:
        return float(np.linalg.norm(self.data))

    def _same(self, other):
        if not isinstance(other, StateVector) or other.basis != self.basis:
            raise ValueError("states live on different bases")

    def __add__(self, other):
        self._same(other)
        return StateVector(self.basis, self.data + other.data)

    def __sub__(self, other):
        self._same(other)
        return StateVector(self.basis, self.data - other.data)

    def __mul__(self, c):
        return StateVector(self.basis, self.data * c)

    __rmul__ = __mul__

    def __truediv__(self, c):
        return StateVector(self.basis, self.data / c)

    def __neg__(self):
        return StateVector(self.basis, -self.data)

    def __repr__(self):
        return f"StateVector(dim={self.dimension}, norm={self.norm():.6g})"


@dataclass(frozen=True, eq=False)
class OnePhotonWavefunction:
    """Sampled ``xi(t_k)`` (units 1/sqrt(time)) for one guide.

    ``leakage`` is the norm of the amplitude the view discarded because local
    factors were not in their reference state.
    """

    values: np.ndarray
    grid: TimeGrid
    guide: int = 1
    leakage: float = 0.0

    @property
    def times(self) -> np.ndarray:
        return self.grid.times

    @property
    def norm_sq(self) -> float:
        return float(np.sum(np.abs(self.values) ** 2) * self.grid.dt)


@dataclass(frozen=True, eq=False)
class TwoPhotonWavefunction:
    """Sampled ``xi(t_i, t_k)`` (units 1/time). Row index is the bin of ``guides[0]``."""

    values: np.ndarray
    grid: TimeGrid
    guides: tuple = (1, 1)
    leakage: float = 0.0

    @property
    def times(self) -> np.ndarray:
        return self.grid.times

    @property
    def same_guide(self) -> bool:
        return self.guides[0] == self.guides[1]

    @property
    def norm_sq(self) -> float:
        """Probability carried by the sector this wavefunction came from."""
        return float(np.sum(np.abs(self.values) ** 2) * self.grid.dt ** 2)


# -- constructors --------------------------------------------------------------


def _require_waveguide(basis) -> WaveguideBasis:
    if not isinstance(basis, WaveguideBasis):
        raise TypeError("expected a WaveguideBasis")
    return basis


def _sample1(basis: WaveguideBasis, xi) -> np.ndarray:
    t = basis.times
    if callable(xi):
        try:
            v = np.asarray(xi(t), dtype=np.complex128)
        except Exception:
            v = None
        if v is None or v.shape != t.shape:
            v = np.array([xi(tk) for tk in t], dtype=np.complex128)
    else:
        v = np.asarray(xi, dtype=np.complex128)
    if v.shape != (basis.n_bins,):
        raise ValueError(f"wavefunction must have {basis.n_bins} samples, got {v.shape}")
    return v


def _sample2(basis: WaveguideBasis, xi2) -> np.ndarray:
    t = basis.times
    n = basis.n_bins
    if callable(xi2):
        try:
            m = np.asarray(xi2(t[:, None], t[None, :]), dtype=np.complex128)
        except Exception:
            m = None
        if m is None or m.shape != (n, n):
            m = np.array([[xi2(a, b) for b in t] for a in t], dtype=np.complex128)
    else:
        m = np.asarray(xi2, dtype=np.complex128)
    if m.shape != (n, n):
        raise ValueError(f"two-photon wavefunction must be {n}x{n}, got {m.shape}")
    return m


def zerophoton(basis: WaveguideBasis) -> StateVector:
    psi = StateVector(_require_waveguide(basis))
    psi.data[0] = 1.0
    return psi


def onephoton(basis: WaveguideBasis, xi: Union[Callable, np.ndarray], guide: int = 1) -> StateVector:
    """Single photon with temporal profile ``xi`` in ``guide``."""
    basis = _require_waveguide(basis)
    basis._check_guide(guide)
    psi = StateVector(basis)
    psi.data[basis.single_slice(guide)] = np.sqrt(basis.dt) * _sample1(basis, xi)
    return psi


def twophoton(basis: WaveguideBasis, xi2, guide=1) -> StateVector:
    """Two photons with joint profile ``xi2(t, t')``.

    ``guide`` is one label for both photons in the same guide, or a pair
    ``(m1, m2)`` of distinct labels, with ``t`` the arrival time in ``m1``.
    """
    basis = _require_waveguide(basis)
    if basis.max_photons < 2:
        raise ValueError("twophoton needs a basis with max_photons = 2")
    m = basis.dt * _sample2(basis, xi2)
    psi = StateVector(basis)
    if np.ndim(guide) == 0:
        basis._check_guide(guide)
        n = basis.n_bins
        r, c = np.triu_indices(n)
        amp = (m[r, c] + m[c, r]) / _SQRT2
        diag = r == c
        amp[diag] = m[r[diag], r[diag]]
        psi.data[basis.pair_slice(guide)] = amp
        return psi
    g1, g2 = guide
    basis._check_guide(g1)
    basis._check_guide(g2)
    if g1 == g2:
        raise ValueError("cross-guide twophoton needs two distinct guides")
    if g1 > g2:
        g1, g2, m = g2, g1, m.T
    psi.data[basis.cross_slice(g1, g2)] = m.ravel()
    return psi


def fock_state(basis: FockBasis, n: int) -> StateVector:
    if not 0 <= n < basis.dimension:
        raise ValueError(f"Fock level {n} outside 0..{basis.dimension - 1}")
    psi = StateVector(basis)
    psi.data[n] = 1.0
    return psi


def tensor_state(*states: StateVector) -> StateVector:
    """Kronecker product; the last factor varies fastest."""
    if not states:
        raise ValueError("tensor_state needs at least one state")
    data = states[0].data
    for s in states[1:]:
        data = np.kron(data, s.data)
    return StateVector(tensor_basis(*(s.basis for s in states)), data)


# -- linear algebra -------------------------------------------------------------


def norm(state: StateVector) -> float:
    return state.norm()


def normalize(state: StateVector) -> StateVector:
    n = state.norm()
    if n == 0:
        raise ValueError("cannot normalize the zero vector")
    return state / n


def inner(a: StateVector, b: StateVector) -> complex:
    """``<a|b>``, conjugate-linear in ``a``."""
    if a.dimension != b.dimension:
        raise ValueError(f"dimension mismatch: {a.dimension} vs {b.dimension}")
    return complex(np.vdot(a.data, b.data))


def expect(op, state: StateVector) -> complex:
    if op.basis.dimension != state.dimension:
        raise ValueError(
            f"dimension mismatch: operator {op.basis.dimension}, state {state.dimension}"
        )
    out = np.zeros_like(state.data)
    op.apply(out, state.data)
    return complex(np.vdot(state.data, out))


# -- views ----------------------------------------------------------------------


def _waveguide_slice(state: StateVector, factor):
    """Project local factors onto index 0; returns (waveguide basis, vector, leakage)."""
    cb = as_composite(state.basis)
    wg = cb.waveguide_positions()
    if not wg:
        raise ValueError("state has no waveguide factor")
    if factor is None:
        if len(wg) > 1:
            raise ValueError("several waveguide factors; pass factor=<position>")
        factor = wg[0]
    if factor not in wg:
        raise ValueError(f"position {factor} is not a waveguide factor")
    idx = tuple(slice(None) if p == factor else 0 for p in range(len(cb.dims)))
    v = state.data.reshape(cb.dims)[idx]
    rest = state.data.reshape(cb.dims).copy()
    rest[idx] = 0
    return cb.factors[factor], v, float(np.linalg.norm(rest))


def one_photon_view(state: StateVector, guide: int = 1, factor=None) -> OnePhotonWavefunction:
    """Recover ``xi(t_k)`` of the single-photon sector in ``guide``."""
    wb, v, leak = _waveguide_slice(state, factor)
    wb._check_guide(guide)
    vals = v[wb.single_slice(guide)] / np.sqrt(wb.dt)
    return OnePhotonWavefunction(vals, wb.grid, guide, leak)


def two_photon_view(state: StateVector, guide: int = 1, guide2=None, factor=None) -> TwoPhotonWavefunction:
    """Recover the ``N x N`` two-photon wavefunction.

    With one guide the result is the symmetric same-guide ``xi``; with two
    distinct guides it is the cross sector, rows indexed by bins of ``guide``.
    """
    wb, v, leak = _waveguide_slice(state, factor)
    if wb.max_photons < 2:
        raise ValueError("two-photon view needs max_photons = 2")
    wb._check_guide(guide)
    n, dt = wb.n_bins, wb.dt
    if guide2 is None or guide2 == guide:
        amp = v[wb.pair_slice(guide)]
        r, c = np.triu_indices(n)
        m = np.zeros((n, n), dtype=np.complex128)
        off = amp / (_SQRT2 * dt)
        m[r, c] = off
        m[c, r] = off
        diag = r == c
        m[r[diag], r[diag]] = amp[diag] / dt
        return TwoPhotonWavefunction(m, wb.grid, (guide, guide), leak)
    wb._check_guide(guide2)
    g1, g2 = sorted((guide, guide2))
    m = v[wb.cross_slice(g1, g2)].reshape(n, n) / dt
    if guide > guide2:
        m = m.T
    return TwoPhotonWavefunction(np.ascontiguousarray(m), wb.grid, (guide, guide2), leak)


# -- CSV --------------------------------------------------------------------------

_FMT = "%.17g"


def write_one_photon_csv(path, wf: OnePhotonWavefunction) -> Path:
    path = Path(path)
    v = np.asarray(wf.values)
    table = np.column_stack([wf.times, v.real, v.imag])
    np.savetxt(path, table, delimiter=",", header="t,re,im", comments="", fmt=_FMT,
               encoding="utf-8")
    return path


def read_one_photon_csv(path) -> tuple:
    """Returns ``(t, values)``."""
    table = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2, encoding="utf-8")
    return table[:, 0], table[:, 1] + 1j * table[:, 2]


def write_two_photon_csv(path, wf: TwoPhotonWavefunction) -> Path:
    path = Path(path)
    t = wf.times
    v = np.asarray(wf.values)
    t1, t2 = np.meshgrid(t, t, indexing="ij")
    table = np.column_stack([t1.ravel(), t2.ravel(), v.real.ravel(), v.imag.ravel()])
    np.savetxt(path, table, delimiter=",", header="t1,t2,re,im", comments="", fmt=_FMT,
               encoding="utf-8")
    return path


def read_two_photon_csv(path) -> tuple:
    """Returns ``(t, values)`` with ``values`` an ``N x N`` matrix."""
    table = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2, encoding="utf-8")
    t = np.unique(table[:, 0])
    n = t.size
    if table.shape[0] != n * n:
        raise ValueError("two-photon CSV is not a full square grid")
    order = np.lexsort((table[:, 1], table[:, 0]))
    table = table[order]
    return t, (table[:, 2] + 1j * table[:, 3]).reshape(n, n)
