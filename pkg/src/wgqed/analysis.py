"""Post-processing of sampled wavefunctions."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .basis import TimeGrid
from .states import OnePhotonWavefunction, TwoPhotonWavefunction

__all__ = [
    "SchmidtDecomposition",
    "schmidt_decompose",
    "mode_population",
    "l2_error",
    "photon_flux",
    "write_schmidt_csv",
]


@dataclass(frozen=True, eq=False)
class SchmidtDecomposition:
    """``xi(t, t') ~ sum_i lambda_i phi_i(t) phi_i(t')`` up to per-mode phases.

    ``modes[i]`` (left singular vectors) are normalized so that
    ``sum_k |phi_i(t_k)|^2 dt = 1``. ``partners[i]`` are the conjugated right
    singular vectors; for a symmetric input they equal ``modes[i]`` up to a
    phase, and using them makes reconstruction exact even inside degenerate
    clusters. ``scale`` restores the absolute norm: ``xi = scale * sum lambda phi phi'``.
    """

    coefficients: np.ndarray
    modes: np.ndarray
    partners: np.ndarray
    grid: TimeGrid
    scale: float = 1.0

    @property
    def lambda_sq(self) -> np.ndarray:
        return self.coefficients**2

    def __len__(self):
        return self.coefficients.size

    def reconstruct(self, n_modes: int = None) -> np.ndarray:
        """Rebuild ``xi(t, t')`` from the leading ``n_modes`` modes."""
        n = len(self) if n_modes is None else n_modes
        lam = self.coefficients[:n]
        return self.scale * np.einsum("i,it,is->ts", lam, self.modes[:n], self.partners[:n])


def schmidt_decompose(xi2, dt: float = None) -> SchmidtDecomposition:
    """SVD of ``dt * xi``; coefficients rescaled so that ``sum lambda_i^2 = 1``.

    Accepts a :class:`TwoPhotonWavefunction` or a bare matrix plus ``dt``.
    """
    if isinstance(xi2, TwoPhotonWavefunction):
        grid = xi2.grid
        m = np.asarray(xi2.values)
        dt = grid.dt
    else:
        if dt is None:
            raise ValueError("dt is required for a bare matrix")
        m = np.asarray(xi2, dtype=complex)
        grid = TimeGrid(0.0, float(dt), m.shape[0])
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("two-photon wavefunction must be a square matrix")
    if not np.all(np.isfinite(m)):
        raise ValueError("two-photon wavefunction has non-finite entries")
    u, s, vh = np.linalg.svd(dt * m)
    total = np.sqrt(np.sum(s**2))
    if total == 0:
        raise ValueError("empty two-photon sector: nothing to decompose")
    modes = u.T / np.sqrt(dt)
    partners = vh / np.sqrt(dt)
    # dt * xi = sum s_i u_i v_i = dt * total * sum lambda_i phi_i phi'_i
    return SchmidtDecomposition(s / total, modes, partners, grid, float(total))


def mode_population(xi2, dt: float = None) -> float:
    """``2 sum_{i,k} |xi(t_i, t_k)|^2 dt^2``."""
    if isinstance(xi2, TwoPhotonWavefunction):
        m, dt = np.asarray(xi2.values), xi2.grid.dt
    else:
        if dt is None:
            raise ValueError("dt is required for a bare matrix")
        m = np.asarray(xi2)
    return float(2.0 * np.sum(np.abs(m) ** 2) * dt**2)


def l2_error(x, y, dt: float) -> tuple:
    """``(sum |x - y|^2 dt, that / sum |y|^2 dt)``.

    Both are squared-norm quantities, following the usual convergence-plot convention.
    """
    x = np.asarray(getattr(x, "values", x))
    y = np.asarray(getattr(y, "values", y))
    if x.shape != y.shape:
        raise ValueError(f"shape mismatch: {x.shape} vs {y.shape}")
    absolute = float(np.sum(np.abs(x - y) ** 2) * dt)
    ref = float(np.sum(np.abs(y) ** 2) * dt)
    if ref == 0:
        raise ValueError("reference has zero norm; relative error undefined")
    return absolute, absolute / ref


def photon_flux(wf) -> np.ndarray:
    """Detection-time density.

    One photon: ``|xi(t)|^2``. Two photons: rate of detecting a photon at ``t``
    in the first guide, so it integrates to the mean photon number there.
    """
    if isinstance(wf, OnePhotonWavefunction):
        return np.abs(wf.values) ** 2
    if isinstance(wf, TwoPhotonWavefunction):
        marginal = (np.abs(wf.values) ** 2).sum(axis=1) * wf.grid.dt
        return 2.0 * marginal if wf.same_guide else marginal
    raise TypeError("expected a one- or two-photon wavefunction")


def write_schmidt_csv(directory, dec: SchmidtDecomposition, prefix: str = "schmidt",
                      n_modes: int = 3) -> list:
    """``<prefix>_coefficients.csv`` (mode_index, lambda_sq) plus one ``t, re, im`` file per mode."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    files = []
    coef_path = directory / f"{prefix}_coefficients.csv"
    idx = np.arange(1, len(dec) + 1)
    np.savetxt(coef_path, np.column_stack([idx, dec.lambda_sq]), delimiter=",",
               header="mode_index,lambda_sq", comments="", fmt=["%d", "%.17g"],
               encoding="utf-8")
    files.append(coef_path)
    t = dec.grid.times
    for i in range(min(n_modes, len(dec))):
        path = directory / f"{prefix}_mode_{i + 1}.csv"
        phi = dec.modes[i]
        np.savetxt(path, np.column_stack([t, phi.real, phi.imag]), delimiter=",",
                   header="t,re,im", comments="", fmt="%.17g", encoding="utf-8")
        files.append(path)
    return files
