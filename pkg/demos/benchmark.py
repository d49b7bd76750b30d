"""
Matrix-free operators against stored sparse matrices
=====================================================

A stored approach keeps one sparse Hamiltonian per time bin. The lazy
operators touch only the amplitudes that involve the current bin, so their
storage does not grow and their cost per bin grows much more slowly.
"""

from wgqed.baseline import run_benchmark

reports = run_benchmark("two-scatter", n_list=(50, 100, 200), repeats=3)
print(f"{'method':12s} {'N':>5s} {'alloc s':>9s} {'solve s':>9s} {'bytes':>12s}")
for r in reports:
    print(f"{r.method:12s} {r.n_bins:5d} {r.alloc_seconds:9.4f} {r.solve_seconds:9.4f} "
          f"{r.operator_bytes:12d}")

by = {}
for r in reports:
    by.setdefault(r.n_bins, {})[r.method] = r.total_seconds
for n, d in by.items():
    print(f"N = {n}: matrix-free is {d['sparse'] / d['matrix-free']:.1f}x faster")
