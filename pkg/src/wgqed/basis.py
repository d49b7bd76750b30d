"""Hilbert-space bookkeeping for time-binned waveguides and local systems.

Physical labels (waveguide and bin numbers) are 1-based throughout the public
API. Flat vector positions are 0-based.

Waveguide layout, for ``W`` waveguides of ``N`` bins::

    [vacuum]
    [singles  guide 1 bins 1..N][guide 2 ...] ...
    [pairs    guide 1 upper triangle (i <= k), row-major][guide 2 ...] ...
    [crosses  guide pair (1,2) as N x N row-major][(1,3)] ... [(W-1,W)]

Composite layout: the last factor varies fastest.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Sequence, Union

import numpy as np

__all__ = [
    "TimeGrid",
    "WaveguideBasis",
    "FockBasis",
    "CompositeBasis",
    "Vacuum",
    "Single",
    "PairSame",
    "PairCross",
    "BasisIndex",
    "flat_index",
    "tensor_basis",
    "enumerate_occupations",
]


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid of bin left edges ``t_k = t0 + (k - 1) * dt``, ``k = 1..n_bins``."""

    t0: float
    dt: float
    n_bins: int

    def __post_init__(self):
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise ValueError(f"dt must be positive and finite, got {self.dt}")
        if int(self.n_bins) != self.n_bins or self.n_bins < 1:
            raise ValueError(f"n_bins must be a positive integer, got {self.n_bins}")
        object.__setattr__(self, "n_bins", int(self.n_bins))
        object.__setattr__(self, "t0", float(self.t0))
        object.__setattr__(self, "dt", float(self.dt))

    @classmethod
    def from_times(cls, times, rtol: float = 1e-9) -> "TimeGrid":
        """One bin per entry of a uniform ``times`` array (as in ``0:0.05:10``)."""
        times = np.asarray(times, dtype=float)
        if times.ndim != 1 or times.size < 2:
            raise ValueError("times must be a 1-D array with at least two entries")
        steps = np.diff(times)
        dt = steps[0]
        if not np.allclose(steps, dt, rtol=rtol, atol=rtol * abs(dt)):
            raise ValueError("times must be uniformly spaced")
        return cls(times[0], dt, times.size)

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.n_bins)

    def time(self, k: int) -> float:
        return self.t0 + (k - 1) * self.dt


# -- basis labels ----------------------------------------------------------


@dataclass(frozen=True)
class Vacuum:
    pass


@dataclass(frozen=True)
class Single:
    guide: int
    bin: int


@dataclass(frozen=True)
class PairSame:
    """Two photons in one guide; stored canonically with ``i <= k``."""

    guide: int
    i: int
    k: int

    def __post_init__(self):
        if self.i > self.k:
            i, k = self.k, self.i
            object.__setattr__(self, "i", i)
            object.__setattr__(self, "k", k)


@dataclass(frozen=True)
class PairCross:
    """One photon in ``guide1`` at bin ``i`` and one in ``guide2`` at bin ``k``.

    Stored with ``guide1 < guide2``; the bins travel with their guides.
    """

    guide1: int
    guide2: int
    i: int
    k: int

    def __post_init__(self):
        if self.guide1 == self.guide2:
            raise ValueError("cross pair needs two distinct guides; use PairSame")
        if self.guide1 > self.guide2:
            g1, g2, i, k = self.guide2, self.guide1, self.k, self.i
            object.__setattr__(self, "guide1", g1)
            object.__setattr__(self, "guide2", g2)
            object.__setattr__(self, "i", i)
            object.__setattr__(self, "k", k)


BasisIndex = Union[Vacuum, Single, PairSame, PairCross]


# -- bases -----------------------------------------------------------------


@dataclass(frozen=True)
class FockBasis:
    """Truncated bosonic mode with occupations ``0..cutoff``.

    ``FockBasis(1)`` doubles as a two-level system with ``|g> = |0>``.
    """

    cutoff: int

    def __post_init__(self):
        if int(self.cutoff) != self.cutoff or self.cutoff < 0:
            raise ValueError(f"cutoff must be a non-negative integer, got {self.cutoff}")
        object.__setattr__(self, "cutoff", int(self.cutoff))

    @property
    def dimension(self) -> int:
        return self.cutoff + 1


@dataclass(frozen=True)
class WaveguideBasis:
    """Excitation-restricted time-bin basis of ``n_waveguides`` guides.

    Holds at most ``max_photons`` (1 or 2) photons in total across all guides.
    """

    max_photons: int
    n_waveguides: int
    grid: TimeGrid

    def __post_init__(self):
        if self.max_photons not in (1, 2):
            raise ValueError(
                f"max_photons must be 1 or 2, got {self.max_photons}"
            )
        if int(self.n_waveguides) != self.n_waveguides or self.n_waveguides < 1:
            raise ValueError(f"n_waveguides must be >= 1, got {self.n_waveguides}")
        if not isinstance(self.grid, TimeGrid):
            raise TypeError("grid must be a TimeGrid")

    @classmethod
    def from_times(cls, max_photons: int, times, n_waveguides: int = 1) -> "WaveguideBasis":
        return cls(max_photons, n_waveguides, TimeGrid.from_times(times))

    @property
    def n_bins(self) -> int:
        return self.grid.n_bins

    @property
    def dt(self) -> float:
        return self.grid.dt

    @property
    def times(self) -> np.ndarray:
        return self.grid.times

    # sector offsets ------------------------------------------------------

    @property
    def n_pairs_same(self) -> int:
        """Entries per guide in the same-guide pair sector, ``N(N+1)/2``."""
        n = self.n_bins
        return n * (n + 1) // 2 if self.max_photons == 2 else 0

    @property
    def n_guide_pairs(self) -> int:
        w = self.n_waveguides
        return w * (w - 1) // 2 if self.max_photons == 2 else 0

    @property
    def single_offset(self) -> int:
        return 1

    @property
    def pair_offset(self) -> int:
        return 1 + self.n_waveguides * self.n_bins

    @property
    def cross_offset(self) -> int:
        return self.pair_offset + self.n_waveguides * self.n_pairs_same

    @property
    def dimension(self) -> int:
        return self.cross_offset + self.n_guide_pairs * self.n_bins**2

    def guide_pair_index(self, g1: int, g2: int) -> int:
        """Position of the (0-based, ``g1 < g2``) guide pair in lexicographic order."""
        w = self.n_waveguides
        return g1 * w - g1 * (g1 + 1) // 2 + (g2 - g1 - 1)

    def _check_guide(self, m: int) -> None:
        if not 1 <= m <= self.n_waveguides:
            raise ValueError(f"guide {m} out of range 1..{self.n_waveguides}")

    def _check_bin(self, k: int) -> None:
        if not 1 <= k <= self.n_bins:
            raise ValueError(f"bin {k} out of range 1..{self.n_bins}")

    # label <-> position ----------------------------------------------------

    def flat_index(self, idx: BasisIndex) -> int:
        n = self.n_bins
        if isinstance(idx, Vacuum):
            return 0
        if isinstance(idx, Single):
            self._check_guide(idx.guide)
            self._check_bin(idx.bin)
            return 1 + (idx.guide - 1) * n + (idx.bin - 1)
        if self.max_photons < 2:
            raise ValueError(f"{idx!r} needs a two-photon basis")
        if isinstance(idx, PairSame):
            self._check_guide(idx.guide)
            self._check_bin(idx.i)
            self._check_bin(idx.k)
            i, k = idx.i - 1, idx.k - 1
            row = i * n - i * (i - 1) // 2
            return self.pair_offset + (idx.guide - 1) * self.n_pairs_same + row + (k - i)
        if isinstance(idx, PairCross):
            self._check_guide(idx.guide1)
            self._check_guide(idx.guide2)
            self._check_bin(idx.i)
            self._check_bin(idx.k)
            p = self.guide_pair_index(idx.guide1 - 1, idx.guide2 - 1)
            return self.cross_offset + p * n * n + (idx.i - 1) * n + (idx.k - 1)
        raise TypeError(f"not a basis label: {idx!r}")

    def label(self, pos: int) -> BasisIndex:
        """Inverse of :meth:`flat_index`."""
        pos = int(pos)
        if not 0 <= pos < self.dimension:
            raise ValueError(f"position {pos} out of range 0..{self.dimension - 1}")
        n = self.n_bins
        if pos == 0:
            return Vacuum()
        if pos < self.pair_offset:
            m, k = divmod(pos - 1, n)
            return Single(m + 1, k + 1)
        if pos < self.cross_offset:
            m, r = divmod(pos - self.pair_offset, self.n_pairs_same)
            # largest row i with row_start(i) <= r
            i = 0
            while (i + 1) < n and (i + 1) * n - (i + 1) * i // 2 <= r:
                i += 1
            k = i + r - (i * n - i * (i - 1) // 2)
            return PairSame(m + 1, i + 1, k + 1)
        p, r = divmod(pos - self.cross_offset, n * n)
        i, k = divmod(r, n)
        w = self.n_waveguides
        g1 = 0
        while self.guide_pair_index(g1, w - 1) < p:
            g1 += 1
        g2 = p - self.guide_pair_index(g1, g1 + 1) + g1 + 1
        return PairCross(g1 + 1, g2 + 1, i + 1, k + 1)

    def labels(self) -> Iterator[BasisIndex]:
        """All labels in flat-index order."""
        n, w = self.n_bins, self.n_waveguides
        yield Vacuum()
        for m in range(1, w + 1):
            for k in range(1, n + 1):
                yield Single(m, k)
        if self.max_photons < 2:
            return
        for m in range(1, w + 1):
            for i in range(1, n + 1):
                for k in range(i, n + 1):
                    yield PairSame(m, i, k)
        for g1 in range(1, w + 1):
            for g2 in range(g1 + 1, w + 1):
                for i in range(1, n + 1):
                    for k in range(1, n + 1):
                        yield PairCross(g1, g2, i, k)

    # flat positions of whole sectors, used by views and diagnostics

    def single_slice(self, guide: int) -> slice:
        self._check_guide(guide)
        start = 1 + (guide - 1) * self.n_bins
        return slice(start, start + self.n_bins)

    def pair_slice(self, guide: int) -> slice:
        self._check_guide(guide)
        if self.max_photons < 2:
            raise ValueError("pair sectors need a two-photon basis")
        start = self.pair_offset + (guide - 1) * self.n_pairs_same
        return slice(start, start + self.n_pairs_same)

    def cross_slice(self, guide1: int, guide2: int) -> slice:
        self._check_guide(guide1)
        self._check_guide(guide2)
        if guide1 >= guide2:
            raise ValueError("cross_slice expects guide1 < guide2")
        if self.max_photons < 2:
            raise ValueError("pair sectors need a two-photon basis")
        p = self.guide_pair_index(guide1 - 1, guide2 - 1)
        start = self.cross_offset + p * self.n_bins**2
        return slice(start, start + self.n_bins**2)

    def photon_number(self) -> np.ndarray:
        """Total photon count of every basis state, in flat order."""
        out = np.zeros(self.dimension)
        out[1 : self.pair_offset] = 1
        out[self.pair_offset :] = 2
        return out


@dataclass(frozen=True)
class CompositeBasis:
    """Ordered tensor product of bases; the last factor varies fastest."""

    factors: tuple

    def __post_init__(self):
        flat = []
        for f in self.factors:
            if isinstance(f, CompositeBasis):
                flat.extend(f.factors)
            elif isinstance(f, (FockBasis, WaveguideBasis)):
                flat.append(f)
            else:
                raise TypeError(f"not a basis: {f!r}")
        if not flat:
            raise ValueError("a composite basis needs at least one factor")
        object.__setattr__(self, "factors", tuple(flat))

    @property
    def dims(self) -> tuple:
        return tuple(f.dimension for f in self.factors)

    @property
    def strides(self) -> tuple:
        strides = [1] * len(self.factors)
        for j in range(len(self.factors) - 2, -1, -1):
            strides[j] = strides[j + 1] * self.factors[j + 1].dimension
        return tuple(strides)

    @property
    def dimension(self) -> int:
        return math.prod(self.dims)

    def index(self, sub_indices: Sequence[int]) -> int:
        if len(sub_indices) != len(self.factors):
            raise ValueError("one sub-index per factor required")
        flat = 0
        for s, d, st in zip(sub_indices, self.dims, self.strides):
            if not 0 <= s < d:
                raise ValueError(f"sub-index {s} out of range 0..{d - 1}")
            flat += s * st
        return flat

    def unravel(self, flat: int) -> tuple:
        if not 0 <= flat < self.dimension:
            raise ValueError(f"position {flat} out of range")
        return tuple(int(v) for v in np.unravel_index(flat, self.dims))

    def waveguide_positions(self) -> list:
        return [j for j, f in enumerate(self.factors) if isinstance(f, WaveguideBasis)]


def flat_index(basis: WaveguideBasis, idx: BasisIndex) -> int:
    return basis.flat_index(idx)


def tensor_basis(*factors) -> CompositeBasis:
    """Tensor product of bases; accepts bases or a single list of bases."""
    if len(factors) == 1 and isinstance(factors[0], (list, tuple)):
        factors = tuple(factors[0])
    if not factors:
        raise ValueError("tensor_basis needs at least one factor")
    return CompositeBasis(tuple(factors))


def as_composite(basis) -> CompositeBasis:
    return basis if isinstance(basis, CompositeBasis) else CompositeBasis((basis,))


def enumerate_occupations(basis: WaveguideBasis) -> list:
    """Brute-force list of occupation vectors over all ``W*N`` modes.

    Every vector with total excitation at most ``max_photons``, each returned as a
    sorted tuple of ``(guide, bin)`` photon positions (repeats mean double
    occupation). Independent of the packed layout; meant for checks.
    """
    modes = [(m, k) for m in range(1, basis.n_waveguides + 1)
             for k in range(1, basis.n_bins + 1)]
    out = [()]
    for a in range(len(modes)):
        out.append((modes[a],))
    if basis.max_photons == 2:
        for a in range(len(modes)):
            for b in range(a, len(modes)):
                out.append((modes[a], modes[b]))
    return out


def label_from_occupation(occ: tuple) -> BasisIndex:
    """Map a sorted tuple of ``(guide, bin)`` photons to its basis label."""
    if len(occ) == 0:
        return Vacuum()
    if len(occ) == 1:
        return Single(*occ[0])
    (m1, i), (m2, k) = occ
    if m1 == m2:
        return PairSame(m1, i, k)
    return PairCross(m1, m2, i, k)
