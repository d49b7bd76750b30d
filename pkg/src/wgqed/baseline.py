"""Sparse-matrix reference: one stored Hamiltonian per time bin.

The lazy tree is walked once per bin and every waveguide kernel is replaced by an
explicit CSR matrix. Waveguide ladder matrices are assembled from basis labels
(``flat_index``) rather than from the compiled kernels, so agreement between
the two paths is a genuine cross-check. Evolution reuses the matrix-free RK4
driver, so only operator application differs.
"""

from __future__ import annotations

import csv
import statistics
import time
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Optional

import numpy as np
import scipy.sparse as sp

from .basis import PairCross, PairSame, Single, Vacuum, WaveguideBasis
from .evolution import SolverConfig, waveguide_evolution
from .operators import (
    IdentityOp,
    LazyProduct,
    LazySum,
    LazyTensor,
    LocalOp,
    Operator,
    Scaled,
    WaveguideKernelOp,
)

__all__ = [
    "MemoryBudgetExceeded",
    "waveguide_ladder_matrix",
    "SparseSchedule",
    "build_sparse_operators",
    "sparse_evolution",
    "BenchmarkReport",
    "run_benchmark",
    "write_benchmark_csv",
]


class MemoryBudgetExceeded(MemoryError):
    pass


def waveguide_ladder_matrix(basis: WaveguideBasis, guide: int, e: int,
                            kind: str = "annihilate") -> sp.csr_matrix:
    """Explicit ``w_{guide, e}`` (or its adjoint) as a CSR matrix."""
    fi = basis.flat_index
    rows, cols, vals = [fi(Vacuum())], [fi(Single(guide, e))], [1.0]
    if basis.max_photons == 2:
        for j in range(1, basis.n_bins + 1):
            rows.append(fi(Single(guide, j)))
            cols.append(fi(PairSame(guide, e, j)))
            vals.append(np.sqrt(2.0) if j == e else 1.0)
        for m2 in range(1, basis.n_waveguides + 1):
            if m2 == guide:
                continue
            for j in range(1, basis.n_bins + 1):
                pair = (PairCross(guide, m2, e, j) if guide < m2
                        else PairCross(m2, guide, j, e))
                rows.append(fi(Single(m2, j)))
                cols.append(fi(pair))
                vals.append(1.0)
    d = basis.dimension
    mat = sp.csr_matrix((np.asarray(vals, dtype=complex), (rows, cols)), shape=(d, d))
    return mat if kind == "annihilate" else mat.T.conj().tocsr()


def _realize(op: Operator, k: int, cache: dict) -> sp.spmatrix:
    if isinstance(op, LocalOp):
        return sp.csr_matrix(op.matrix)
    if isinstance(op, IdentityOp):
        return sp.identity(op.basis.dimension, dtype=complex, format="csr")
    if isinstance(op, WaveguideKernelOp):
        key = (op.basis, op.guide, k + op.delay_bins, op.kind)
        if key not in cache:
            cache[key] = waveguide_ladder_matrix(op.basis, op.guide, k + op.delay_bins, op.kind)
        return cache[key]
    if isinstance(op, Scaled):
        return op.coef * _realize(op.op, k, cache)
    if isinstance(op, LazySum):
        total = _realize(op.ops[0], k, cache)
        for child in op.ops[1:]:
            total = total + _realize(child, k, cache)
        return total
    if isinstance(op, LazyProduct):
        total = _realize(op.ops[0], k, cache)
        for child in op.ops[1:]:
            total = total @ _realize(child, k, cache)
        return total
    if isinstance(op, LazyTensor):
        out = sp.identity(1, dtype=complex, format="csr")
        for pos, b in enumerate(op.basis.factors):
            f = op.factors.get(pos)
            m = (sp.identity(b.dimension, dtype=complex, format="csr") if f is None
                 else _realize(f, k, cache))
            out = sp.kron(out, m, format="csr")
        return op.coef * out
    raise TypeError(f"cannot realize {type(op).__name__} as a sparse matrix")


def _csr_bytes(m: sp.csr_matrix) -> int:
    return m.data.nbytes + m.indices.nbytes + m.indptr.nbytes


class SparseSchedule:
    """Per-bin CSR Hamiltonians with the same driver interface as a lazy tree."""

    def __init__(self, basis, matrices: list, supports: list):
        self.basis = basis
        self.matrices = matrices
        self.supports = supports
        self._k = 1

    def __len__(self):
        return len(self.matrices)

    def __getitem__(self, k: int) -> sp.csr_matrix:
        """Hamiltonian of bin ``k`` (1-based)."""
        return self.matrices[k - 1]

    def kernels(self) -> list:
        return []

    def set_active_bin(self, k: int) -> None:
        if not 1 <= k <= len(self.matrices):
            raise ValueError(f"bin {k} out of range 1..{len(self.matrices)}")
        self._k = k

    def support(self) -> Optional[np.ndarray]:
        return self.supports[self._k - 1]

    def _apply(self, out, x, alpha, beta) -> None:
        if beta == 0:
            out.fill(0.0)
        elif beta != 1:
            out *= beta
        out += alpha * (self.matrices[self._k - 1] @ x)

    def apply(self, out, x, alpha=1.0, beta=0.0):
        self._apply(out, x, alpha, beta)
        return out

    @property
    def nbytes(self) -> int:
        return sum(_csr_bytes(m) for m in self.matrices) + sum(
            s.nbytes for s in self.supports if s is not None)


def build_sparse_operators(H: Operator, bins=None, max_bytes: Optional[int] = None) -> SparseSchedule:
    """Realize ``H`` at each bin in ``bins`` (default: every bin the horizon allows)."""
    kernels = H.kernels()
    if bins is None:
        if not kernels:
            raise ValueError("H has no waveguide kernels; pass bins explicitly")
        n = min(k.basis.n_bins - k.delay_bins for k in kernels)
        bins = range(1, n + 1)
    bins = list(bins)
    if bins != list(range(1, len(bins) + 1)):
        raise ValueError("bins must be 1, 2, ..., n")
    for kern in kernels:
        kern._check_bin(bins[-1])
    cache: dict = {}
    matrices, supports, used = [], [], 0
    for k in bins:
        m = _realize(H, k, cache).tocsr()
        m.sum_duplicates()
        m.eliminate_zeros()
        m.sort_indices()
        used += _csr_bytes(m)
        if max_bytes is not None and used > max_bytes:
            raise MemoryBudgetExceeded(
                f"sparse Hamiltonians exceed the budget of {max_bytes} bytes at bin {k}"
            )
        coo = m.tocoo()
        matrices.append(m)
        supports.append(np.union1d(coo.row, coo.col).astype(np.int64))
        cache = {key: v for key, v in cache.items() if key[2] > k}
    return SparseSchedule(H.basis, matrices, supports)


def sparse_evolution(times, psi0, schedule, fout=None, config: Optional[SolverConfig] = None,
                     substeps: Optional[int] = None):
    """Same contract as :func:`wgqed.evolution.waveguide_evolution`."""
    if not isinstance(schedule, SparseSchedule):
        mats = [sp.csr_matrix(m) for m in schedule]
        sups = [np.union1d(*m.nonzero()).astype(np.int64) for m in mats]
        schedule = SparseSchedule(psi0.basis, mats, sups)
    if len(times) - 1 > len(schedule):
        raise ValueError(f"{len(times) - 1} steps but only {len(schedule)} Hamiltonians")
    return waveguide_evolution(times, psi0, schedule, fout, config, substeps)


# -- benchmark ----------------------------------------------------------------------


@dataclass(frozen=True)
class BenchmarkReport:
    method: str
    scenario: str
    n_bins: int
    alloc_seconds: float
    solve_seconds: float
    operator_bytes: int

    @property
    def total_seconds(self) -> float:
        return self.alloc_seconds + self.solve_seconds


def _median_time(fn, repeats: int):
    fn()
    samples, last = [], None
    for _ in range(repeats):
        t = time.perf_counter()
        last = fn()
        samples.append(time.perf_counter() - t)
    return statistics.median(samples), last


def run_benchmark(scenario: str = "two-scatter", n_list=(50, 100, 200), repeats: int = 5,
                  substeps: int = 8, t_max: float = 10.0) -> list:
    """Matrix-free vs sparse timings on the same problem at each bin count.

    Median of ``repeats`` runs after one warm-up, monotonic clock.
    """
    from .scenarios import (emitter_hamiltonian, single_scatter_setup, times_from_bins,
                            two_scatter_setup)

    builders = {"single-scatter": single_scatter_setup, "two-scatter": two_scatter_setup}
    if scenario not in builders:
        raise ValueError(f"benchmark scenario must be one of {sorted(builders)}")
    n_list = list(n_list)
    if n_list != sorted(n_list):
        raise ValueError("n_list must be ascending")
    cfg = SolverConfig(substeps_per_bin=substeps)
    reports = []
    for n in n_list:
        times = times_from_bins(n, t_max)
        base = builders[scenario](times=times)

        def build_lazy():
            return emitter_hamiltonian(base.emitter, base.waveguide,
                                       base.params["gamma"], base.waveguide.dt)

        alloc, H = _median_time(build_lazy, repeats)
        solve, _ = _median_time(lambda: waveguide_evolution(times, base.psi0, H, config=cfg),
                                repeats)
        reports.append(BenchmarkReport("matrix-free", scenario, n, alloc, solve, H.nbytes))

        alloc, sched = _median_time(lambda: build_sparse_operators(base.H), repeats)
        solve, _ = _median_time(lambda: sparse_evolution(times, base.psi0, sched, config=cfg),
                                repeats)
        reports.append(BenchmarkReport("sparse", scenario, n, alloc, solve, sched.nbytes))
    return reports


def write_benchmark_csv(path, reports) -> Path:
    path = Path(path)
    fields = ["method", "scenario", "n_bins", "alloc_seconds", "solve_seconds", "operator_bytes"]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=fields)
        w.writeheader()
        for r in reports:
            w.writerow({k: v for k, v in asdict(r).items() if k in fields})
    return path
