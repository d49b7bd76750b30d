"""Bin-by-bin Schrödinger evolution.

During the step ending at ``times[n]`` the Hamiltonian's waveguide kernels point
at bin ``n`` and ``i d/dt psi = H psi`` is integrated with classical RK4
(``substeps_per_bin`` equal steps). Only the amplitudes the current bin can
touch are updated: ``H.support()`` names them, and everything outside that set
is provably untouched by the RK4 stages.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import _kernels
from .basis import as_composite
from .states import StateVector, expect

__all__ = ["SolverConfig", "EvolutionResult", "waveguide_evolution",
           "expectation_series", "validate_times", "NonFiniteStateError"]


class NonFiniteStateError(FloatingPointError):
    pass


@dataclass(frozen=True)
class SolverConfig:
    substeps_per_bin: int = 1
    integrator: str = "rk4"

    def __post_init__(self):
        if int(self.substeps_per_bin) != self.substeps_per_bin or self.substeps_per_bin < 1:
            raise ValueError("substeps_per_bin must be a positive integer")
        if self.integrator != "rk4":
            raise ValueError("only the 'rk4' integrator is available")


@dataclass
class EvolutionResult:
    state: StateVector
    times: np.ndarray
    series: Optional[list] = field(default=None)

    @property
    def final(self) -> StateVector:
        return self.state


def validate_times(times, basis, rtol: float = 1e-9) -> np.ndarray:
    """Check ``times`` is a uniform prefix of every waveguide grid in ``basis``."""
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size < 1:
        raise ValueError("times must be a non-empty 1-D array")
    if not np.all(np.isfinite(times)):
        raise ValueError("times must be finite")
    for wb in (as_composite(basis).factors[p] for p in as_composite(basis).waveguide_positions()):
        g = wb.grid
        if times.size - 1 > g.n_bins:
            raise ValueError(
                f"{times.size - 1} steps requested but the waveguide has {g.n_bins} bins"
            )
        expected = g.t0 + g.dt * np.arange(times.size)
        tol = rtol * max(1.0, abs(g.t0) + g.dt * times.size)
        if np.max(np.abs(times - expected)) > tol:
            raise ValueError(
                f"times must start at {g.t0} with spacing dt={g.dt} to match the waveguide grid"
            )
    if times.size > 1:
        steps = np.diff(times)
        if np.any(steps <= 0) or np.ptp(steps) > rtol * max(1.0, steps[0]) * times.size:
            raise ValueError("times must be uniformly increasing")
    return times


def _check_horizon(H, last_bin: int) -> None:
    for k in H.kernels() if hasattr(H, "kernels") else ():
        k._check_bin(last_bin)


def _integrate(H, psi: np.ndarray, times: np.ndarray, substeps: int,
               fout: Optional[Callable], basis) -> list:
    """Shared RK4 driver. ``H`` needs ``set_active_bin``, ``_apply`` and ``support``."""
    d = psi.shape[0]
    k1, k2, k3, k4, tmp = (np.zeros(d, dtype=np.complex128) for _ in range(5))
    tmp[:] = psi
    full = np.arange(d, dtype=np.int64)
    view = StateVector.wrap(basis, psi) if fout is not None else None
    series = [] if fout is not None else None
    if fout is not None:
        series.append(fout(times[0], view))
    mi = -1j
    for n in range(1, times.size):
        H.set_active_bin(n)
        idx = H.support()
        idx = full if idx is None else idx
        h = (times[n] - times[n - 1]) / substeps
        for _ in range(substeps):
            _kernels.zero_at(k1, idx)
            H._apply(k1, psi, mi, 1.0)
            _kernels.axpy_at(tmp, psi, k1, 0.5 * h, idx)
            _kernels.zero_at(k2, idx)
            H._apply(k2, tmp, mi, 1.0)
            _kernels.axpy_at(tmp, psi, k2, 0.5 * h, idx)
            _kernels.zero_at(k3, idx)
            H._apply(k3, tmp, mi, 1.0)
            _kernels.axpy_at(tmp, psi, k3, h, idx)
            _kernels.zero_at(k4, idx)
            H._apply(k4, tmp, mi, 1.0)
            _kernels.rk4_combine_at(psi, k1, k2, k3, k4, h, idx)
        _kernels.copy_at(tmp, psi, idx)
        if not _kernels.all_finite_at(psi, idx):
            raise NonFiniteStateError(
                f"non-finite amplitudes after bin {n} (t = {times[n]:.6g})"
            )
        if fout is not None:
            series.append(fout(times[n], view))
    return series


def waveguide_evolution(times, psi0: StateVector, H, fout: Optional[Callable] = None,
                        config: Optional[SolverConfig] = None,
                        substeps: Optional[int] = None) -> EvolutionResult:
    """Evolve ``psi0`` over ``times`` under the bin-switched Hamiltonian ``H``.

    ``fout(t, psi)`` is called at ``times[0]`` and after every step; ``psi`` is
    the live state, so copy it if you need to keep it. ``psi0`` is not modified.
    """
    config = config or SolverConfig()
    if substeps is not None:
        config = SolverConfig(substeps_per_bin=substeps)
    if H.basis.dimension != psi0.dimension:
        raise ValueError(
            f"Hamiltonian dimension {H.basis.dimension} != state dimension {psi0.dimension}"
        )
    times = validate_times(times, psi0.basis)
    if not np.all(np.isfinite(psi0.data)):
        raise NonFiniteStateError("initial state has non-finite amplitudes")
    if times.size > 1:
        _check_horizon(H, times.size - 1)
    psi = psi0.data.copy()
    series = _integrate(H, psi, times, int(config.substeps_per_bin), fout, psi0.basis)
    return EvolutionResult(StateVector(psi0.basis, psi), times, series)


def expectation_series(times, psi0: StateVector, H, observables,
                       config: Optional[SolverConfig] = None,
                       substeps: Optional[int] = None) -> np.ndarray:
    """``<psi(t)|O|psi(t)>`` for each observable at every grid time; shape ``(n_obs, n_times)``."""
    observables = list(observables)

    def fout(t, psi):
        return [expect(o, psi) for o in observables]

    res = waveguide_evolution(times, psi0, H, fout, config, substeps)
    return np.array(res.series, dtype=complex).T
