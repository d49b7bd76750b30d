"""Matrix-free waveguide operators and the lazy operator algebra.

Waveguide ladder operators are never stored as matrices. Each one is a
:class:`WaveguideKernelOp` that knows its guide, its ladder direction, a fixed
delay and a *mutable* active bin; applying it runs a compiled loop over the
handful of basis states that touch the effective bin.

Composite operators (:class:`LazySum`, :class:`LazyProduct`,
:class:`LazyTensor`, :class:`Scaled`) defer all arithmetic to apply time.
Every operator implements the accumulate contract::

    op.apply(out, x, alpha, beta)   # out <- alpha * op @ x + beta * out

Sums and tensors whose factors are dense local matrices plus at most one
waveguide kernel are flattened into a *line table*, so applying a whole
Hamiltonian is a single compiled call.
"""

from __future__ import annotations

import itertools
import numbers
from typing import Optional

import numpy as np

from . import _kernels
from .basis import CompositeBasis, FockBasis, WaveguideBasis, as_composite

__all__ = [
    "Operator",
    "LocalOp",
    "IdentityOp",
    "WaveguideKernelOp",
    "Scaled",
    "LazySum",
    "LazyProduct",
    "LazyTensor",
    "destroy",
    "create",
    "number",
    "identity",
    "waveguide_destroy",
    "waveguide_create",
    "tensor",
    "lazy_tensor",
    "lazy_sum",
    "lazy_product",
    "scale",
    "set_active_bin",
    "apply_accumulate",
]

_INT = np.int64


def _prescale(out: np.ndarray, beta) -> None:
    if beta == 0:
        out.fill(0.0)
    elif beta != 1:
        out *= beta


class _LineTable:
    """Flat list of lines (see :mod:`wgqed._kernels`) plus the kernels they use."""

    __slots__ = ("ybase", "xbase", "coef", "kind", "kid", "stride", "kernels",
                 "delay", "guide", "nbin", "nwg", "nph", "_bins")

    def __init__(self, ybase, xbase, coef, kind, kid, stride, kernels):
        self.ybase = np.ascontiguousarray(ybase, dtype=_INT)
        self.xbase = np.ascontiguousarray(xbase, dtype=_INT)
        self.coef = np.ascontiguousarray(coef, dtype=np.complex128)
        self.kind = np.ascontiguousarray(kind, dtype=_INT)
        self.kid = np.ascontiguousarray(kid, dtype=_INT)
        self.stride = np.ascontiguousarray(stride, dtype=_INT)
        self.kernels = list(kernels)
        ks = self.kernels
        self.delay = np.array([k.delay_bins for k in ks], dtype=_INT)
        self.guide = np.array([k.guide for k in ks], dtype=_INT)
        self.nbin = np.array([k.basis.n_bins for k in ks], dtype=_INT)
        self.nwg = np.array([k.basis.n_waveguides for k in ks], dtype=_INT)
        self.nph = np.array([k.basis.max_photons for k in ks], dtype=_INT)
        self._bins = np.ones(len(ks), dtype=_INT)

    def scaled(self, c) -> "_LineTable":
        return _LineTable(self.ybase, self.xbase, self.coef * c, self.kind,
                          self.kid, self.stride, self.kernels)

    @staticmethod
    def concat(tables) -> "_LineTable":
        kernels: list = []
        where: dict = {}
        kids = []
        for t in tables:
            remap = np.empty(len(t.kernels), dtype=_INT)
            for j, k in enumerate(t.kernels):
                if id(k) not in where:
                    where[id(k)] = len(kernels)
                    kernels.append(k)
                remap[j] = where[id(k)]
            # plain lines carry a dummy kid of 0 and may have no kernels at all
            kids.append(remap[t.kid] if t.kernels else np.zeros_like(t.kid))
        cat = lambda name: np.concatenate([getattr(t, name) for t in tables])  # noqa: E731
        return _LineTable(cat("ybase"), cat("xbase"), cat("coef"), cat("kind"),
                          np.concatenate(kids), cat("stride"), kernels)

    def apply(self, y, x, alpha) -> None:
        bins = self._bins
        for j, k in enumerate(self.kernels):
            bins[j] = k.active_bin
        _kernels.apply_lines(y, x, complex(alpha), self.ybase, self.xbase,
                             self.coef, self.kind, self.kid, self.stride, bins,
                             self.delay, self.guide, self.nbin, self.nwg, self.nph)

    @property
    def nbytes(self) -> int:
        return sum(getattr(self, n).nbytes for n in
                   ("ybase", "xbase", "coef", "kind", "kid", "stride",
                    "delay", "guide", "nbin", "nwg", "nph", "_bins"))


class Operator:
    """Base class. Subclasses provide ``_apply`` and usually ``_table``."""

    basis = None

    # -- application -------------------------------------------------------

    def _apply(self, out, x, alpha, beta):
        table = self._table()
        if table is None:
            raise NotImplementedError
        _prescale(out, beta)
        table.apply(out, x, alpha)

    def _table(self) -> Optional[_LineTable]:
        return None

    def apply(self, out, x, alpha=1.0, beta=0.0):
        """``out <- alpha * self @ x + beta * out`` in place; returns ``out``."""
        out_arr = _data(out)
        x_arr = _data(x)
        _check_vectors(self, out_arr, x_arr)
        self._apply(out_arr, x_arr, alpha, beta)
        return out

    def __call__(self, x):
        x_arr = _data(x)
        out = np.zeros(self.basis.dimension, dtype=np.complex128)
        self.apply(out, x_arr)
        if hasattr(x, "basis") and not isinstance(x, np.ndarray):
            from .states import StateVector
            return StateVector(x.basis, out)
        return out

    # -- time dependence -----------------------------------------------------

    def kernels(self) -> list:
        return []

    def set_active_bin(self, k: int) -> None:
        set_active_bin(self, k)

    def support(self) -> Optional[np.ndarray]:
        """Sorted flat indices this operator can read or write at the current bin.

        ``None`` means the whole space. Any superset is valid.
        """
        return None

    # -- algebra -------------------------------------------------------------

    def dag(self) -> "Operator":
        raise NotImplementedError

    @property
    def nbytes(self) -> int:
        return 0

    def __add__(self, other):
        if isinstance(other, numbers.Number) and other == 0:
            return self
        if not isinstance(other, Operator):
            return NotImplemented
        return lazy_sum(self, other)

    def __radd__(self, other):
        if isinstance(other, numbers.Number) and other == 0:
            return self
        return NotImplemented

    def __neg__(self):
        return scale(-1.0, self)

    def __sub__(self, other):
        if not isinstance(other, Operator):
            return NotImplemented
        return lazy_sum(self, scale(-1.0, other))

    def __mul__(self, other):
        if isinstance(other, numbers.Number):
            return scale(other, self)
        if isinstance(other, Operator):
            return lazy_product(self, other)
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, numbers.Number):
            return scale(other, self)
        return NotImplemented

    def __truediv__(self, other):
        if isinstance(other, numbers.Number):
            return scale(1.0 / other, self)
        return NotImplemented


def _data(v):
    return v.data if hasattr(v, "data") and not isinstance(v, np.ndarray) else v


def _check_vectors(op, out, x):
    d = op.basis.dimension
    if out.shape != (d,) or x.shape != (d,):
        raise ValueError(
            f"dimension mismatch: operator {d}, out {out.shape}, in {x.shape}"
        )
    if out.dtype != np.complex128:
        raise TypeError("out must be a complex128 vector")
    if np.may_share_memory(out, x):
        raise ValueError("out and x must not alias")


# -- leaves ------------------------------------------------------------------


class LocalOp(Operator):
    """Small dense operator on a single :class:`FockBasis`."""

    def __init__(self, basis: FockBasis, matrix):
        matrix = np.asarray(matrix, dtype=np.complex128)
        d = basis.dimension
        if matrix.shape != (d, d):
            raise ValueError(f"matrix must be {d}x{d}, got {matrix.shape}")
        self.basis = basis
        self.matrix = matrix
        self._tab = None

    def _table(self):
        if self._tab is None:
            r, c = np.nonzero(self.matrix)
            self._tab = _LineTable(r, c, self.matrix[r, c], np.zeros(r.size),
                                   np.zeros(r.size), np.ones(r.size), [])
        return self._tab

    def _apply(self, out, x, alpha, beta):
        _prescale(out, beta)
        out += alpha * (self.matrix @ x)

    def dag(self):
        return LocalOp(self.basis, self.matrix.conj().T)

    @property
    def nbytes(self):
        return self.matrix.nbytes

    def __mul__(self, other):
        if isinstance(other, LocalOp) and other.basis == self.basis:
            return LocalOp(self.basis, self.matrix @ other.matrix)
        return super().__mul__(other)

    def __add__(self, other):
        if isinstance(other, LocalOp) and other.basis == self.basis:
            return LocalOp(self.basis, self.matrix + other.matrix)
        return super().__add__(other)

    def __repr__(self):
        return f"LocalOp({self.basis}, shape={self.matrix.shape})"


class IdentityOp(Operator):
    def __init__(self, basis):
        self.basis = basis

    def _apply(self, out, x, alpha, beta):
        _prescale(out, beta)
        out += alpha * x

    def _table(self):
        d = self.basis.dimension
        j = np.arange(d)
        return _LineTable(j, j, np.ones(d), np.zeros(d), np.zeros(d), np.ones(d), [])

    def dag(self):
        return self

    def __repr__(self):
        return f"IdentityOp({self.basis})"


class WaveguideKernelOp(Operator):
    """Ladder operator ``w_{m,k}`` / ``w_{m,k}^dagger`` acting on bin ``active_bin + delay_bins``.

    Unitless: rate prefactors such as ``sqrt(gamma/dt)`` belong in the
    coefficients of the surrounding expression.
    """

    ANNIHILATE = "annihilate"
    CREATE = "create"

    def __init__(self, basis: WaveguideBasis, guide: int = 1,
                 kind: str = "annihilate", delay_bins: int = 0):
        if not isinstance(basis, WaveguideBasis):
            raise TypeError("waveguide kernels need a WaveguideBasis")
        if not 1 <= guide <= basis.n_waveguides:
            raise ValueError(f"guide {guide} out of range 1..{basis.n_waveguides}")
        if kind not in (self.ANNIHILATE, self.CREATE):
            raise ValueError(f"unknown kind {kind!r}")
        self.basis = basis
        self.guide = int(guide)
        self.kind = kind
        self.delay_bins = _delay_bins(delay_bins)
        self.active_bin = 1
        self._tab = None

    @property
    def effective_bin(self) -> int:
        return self.active_bin + self.delay_bins

    def kernels(self):
        return [self]

    def _check_bin(self, k: int) -> None:
        n = self.basis.n_bins
        if not 1 <= k <= n:
            raise ValueError(f"bin {k} out of range 1..{n}")
        if k + self.delay_bins > n:
            raise ValueError(
                f"delayed bin {k} + {self.delay_bins} exceeds the {n} available bins"
                f" (need k <= {n - self.delay_bins})"
            )

    def _table(self):
        if self._tab is None:
            kind = _kernels.ANNIHILATE if self.kind == self.ANNIHILATE else _kernels.CREATE
            self._tab = _LineTable([0], [0], [1.0], [kind], [0], [1], [self])
        return self._tab

    def support(self):
        return kernel_support(self.basis, self.guide, self.effective_bin)

    def dag(self):
        kind = self.CREATE if self.kind == self.ANNIHILATE else self.ANNIHILATE
        op = WaveguideKernelOp(self.basis, self.guide, kind, self.delay_bins)
        op.active_bin = self.active_bin
        return op

    @property
    def nbytes(self):
        return self._table().nbytes

    def __repr__(self):
        sym = "w" if self.kind == self.ANNIHILATE else "wd"
        return (f"{sym}(guide={self.guide}, delay={self.delay_bins},"
                f" bin={self.active_bin})")


def _delay_bins(delay) -> int:
    d = float(delay)
    r = round(d)
    if abs(d - r) > 1e-9 * max(1.0, abs(d)):
        raise ValueError(f"delay must be a whole number of bins, got {delay}")
    if r < 0:
        raise ValueError(f"delay must be non-negative, got {delay}")
    return int(r)


def kernel_support(basis: WaveguideBasis, guide: int, e: int) -> np.ndarray:
    """Waveguide positions touched by a ladder operator on ``(guide, e)``, 1-based."""
    n, w = basis.n_bins, basis.n_waveguides
    m, e0 = guide - 1, e - 1
    if basis.max_photons == 1:
        return np.array([0, 1 + m * n + e0], dtype=_INT)
    parts = [np.arange(0, 1 + w * n, dtype=_INT)]
    po = basis.pair_offset + m * basis.n_pairs_same
    j = np.arange(n, dtype=_INT)
    rs = j * n - (j * (j - 1)) // 2
    lower = po + rs[:e0] + e0 - j[:e0]
    upper = po + rs[e0] + (j[e0:] - e0)
    parts += [lower, upper]
    co = basis.cross_offset
    for m2 in range(w):
        if m2 == m:
            continue
        if m < m2:
            p = basis.guide_pair_index(m, m2)
            parts.append(co + p * n * n + e0 * n + j)
        else:
            p = basis.guide_pair_index(m2, m)
            parts.append(co + p * n * n + j * n + e0)
    return np.concatenate(parts)


# -- composites --------------------------------------------------------------


def _union(supports) -> Optional[np.ndarray]:
    if any(s is None for s in supports):
        return None
    if not supports:
        return np.zeros(0, dtype=_INT)
    return np.unique(np.concatenate(supports))


class Scaled(Operator):
    def __init__(self, coef, op: Operator):
        self.coef = complex(coef)
        self.op = op
        self.basis = op.basis
        self._tab = False

    def _table(self):
        if self._tab is False:
            t = self.op._table()
            self._tab = None if t is None else t.scaled(self.coef)
        return self._tab

    def _apply(self, out, x, alpha, beta):
        t = self._table()
        if t is not None:
            _prescale(out, beta)
            t.apply(out, x, alpha)
        else:
            self.op._apply(out, x, alpha * self.coef, beta)

    def kernels(self):
        return self.op.kernels()

    def support(self):
        return self.op.support()

    def dag(self):
        return Scaled(np.conj(self.coef), self.op.dag())

    @property
    def nbytes(self):
        t = self._table()
        return t.nbytes if t is not None else self.op.nbytes

    def __repr__(self):
        return f"{self.coef}*({self.op!r})"


class LazySum(Operator):
    def __init__(self, ops):
        ops = list(ops)
        if not ops:
            raise ValueError("empty sum")
        basis = ops[0].basis
        for op in ops:
            if op.basis != basis:
                raise ValueError("all summands must share one basis")
        self.ops = ops
        self.basis = basis
        self._tab = False

    def _table(self):
        if self._tab is False:
            tables = [op._table() for op in self.ops]
            self._tab = None if any(t is None for t in tables) else _LineTable.concat(tables)
        return self._tab

    def _apply(self, out, x, alpha, beta):
        _prescale(out, beta)
        t = self._table()
        if t is not None:
            t.apply(out, x, alpha)
            return
        for op in self.ops:
            op._apply(out, x, alpha, 1.0)

    def kernels(self):
        return _unique_kernels(self.ops)

    def support(self):
        return _union([op.support() for op in self.ops])

    def dag(self):
        return LazySum([op.dag() for op in self.ops])

    @property
    def nbytes(self):
        t = self._table()
        return t.nbytes if t is not None else sum(op.nbytes for op in self.ops)

    def __repr__(self):
        return " + ".join(f"({op!r})" for op in self.ops)


class LazyProduct(Operator):
    """``ops[0] @ ops[1] @ ... @ ops[-1]``, applied right to left."""

    def __init__(self, ops):
        ops = list(ops)
        if len(ops) < 2:
            raise ValueError("a product needs at least two factors")
        basis = ops[0].basis
        for op in ops:
            if op.basis != basis:
                raise ValueError("all factors must share one basis")
        self.ops = ops
        self.basis = basis
        d = basis.dimension
        self._scratch = (np.zeros(d, dtype=np.complex128),
                         np.zeros(d, dtype=np.complex128))

    def _apply(self, out, x, alpha, beta):
        a, b = self._scratch
        self.ops[-1]._apply(a, x, 1.0, 0.0)
        for op in self.ops[-2:0:-1]:
            op._apply(b, a, 1.0, 0.0)
            a, b = b, a
        self.ops[0]._apply(out, a, alpha, beta)

    def kernels(self):
        return _unique_kernels(self.ops)

    def support(self):
        return _union([op.support() for op in self.ops])

    def dag(self):
        return LazyProduct([op.dag() for op in reversed(self.ops)])

    @property
    def nbytes(self):
        return sum(s.nbytes for s in self._scratch) + sum(op.nbytes for op in self.ops)

    def __repr__(self):
        return " * ".join(f"({op!r})" for op in self.ops)


class LazyTensor(Operator):
    """``coef * (op_1 (x) op_2 (x) ...)`` over a composite basis.

    Factors are given as ``{position: op}``; missing positions are identities.
    Factors must be dense :class:`LocalOp` or bare :class:`WaveguideKernelOp`, with
    at most one kernel. Use :func:`tensor` or :func:`lazy_tensor` for anything
    else; they expand sums, products and scalings into these elementary pieces.
    """

    def __init__(self, basis: CompositeBasis, factors: dict, coef=1.0):
        basis = as_composite(basis)
        self.basis = basis
        self.coef = complex(coef)
        self.factors = dict(sorted(factors.items()))
        n_kernels = 0
        for pos, op in self.factors.items():
            if not 0 <= pos < len(basis.factors):
                raise ValueError(f"position {pos} out of range")
            if op.basis != basis.factors[pos]:
                raise ValueError(f"factor at position {pos} has the wrong basis")
            if isinstance(op, WaveguideKernelOp):
                n_kernels += 1
            elif not isinstance(op, LocalOp):
                raise TypeError(f"LazyTensor factor must be LocalOp or kernel, got {op!r}")
        if n_kernels > 1:
            raise ValueError("LazyTensor holds at most one waveguide kernel")
        self._tab = self._build_table()

    def _kernel(self):
        for pos, op in self.factors.items():
            if isinstance(op, WaveguideKernelOp):
                return pos, op
        return None, None

    def _build_table(self) -> _LineTable:
        dims, strides = self.basis.dims, self.basis.strides
        kpos, kop = self._kernel()
        yb = np.zeros(1, dtype=_INT)
        xb = np.zeros(1, dtype=_INT)
        coef = np.array([self.coef])
        for pos in range(len(dims)):
            if pos == kpos:
                continue
            op = self.factors.get(pos)
            if op is None:
                r = c = np.arange(dims[pos], dtype=_INT)
                v = np.ones(dims[pos])
            else:
                r, c = np.nonzero(op.matrix)
                v = op.matrix[r, c]
            yb = (yb[:, None] + r[None, :] * strides[pos]).ravel()
            xb = (xb[:, None] + c[None, :] * strides[pos]).ravel()
            coef = (coef[:, None] * v[None, :]).ravel()
        n = yb.size
        if kop is None:
            return _LineTable(yb, xb, coef, np.zeros(n), np.zeros(n), np.ones(n), [])
        kind = _kernels.ANNIHILATE if kop.kind == kop.ANNIHILATE else _kernels.CREATE
        return _LineTable(yb, xb, coef, np.full(n, kind), np.zeros(n),
                          np.full(n, strides[kpos]), [kop])

    def _table(self):
        return self._tab

    def kernels(self):
        _, k = self._kernel()
        return [] if k is None else [k]

    def support(self):
        kpos, kop = self._kernel()
        if kop is None:
            return None
        dims, strides = self.basis.dims, self.basis.strides
        flat = kop.support() * strides[kpos]
        for pos in range(len(dims)):
            if pos != kpos:
                flat = (flat[:, None] + np.arange(dims[pos], dtype=_INT)[None, :]
                        * strides[pos]).ravel()
        return np.sort(flat)

    def dag(self):
        return LazyTensor(self.basis, {p: op.dag() for p, op in self.factors.items()},
                          np.conj(self.coef))

    @property
    def nbytes(self):
        return self._tab.nbytes + sum(op.nbytes for op in self.factors.values()
                                      if isinstance(op, LocalOp))

    def __repr__(self):
        inner = ", ".join(f"{p}: {op!r}" for p, op in self.factors.items())
        return f"LazyTensor({self.coef}, {{{inner}}})"


def _unique_kernels(ops) -> list:
    seen, out = set(), []
    for op in ops:
        for k in op.kernels():
            if id(k) not in seen:
                seen.add(id(k))
                out.append(k)
    return out


# -- constructors --------------------------------------------------------------


def destroy(basis, guide: int = 1, delay: float = 0):
    """Annihilation operator: dense for a Fock basis, a kernel for a waveguide."""
    if isinstance(basis, FockBasis):
        d = basis.dimension
        return LocalOp(basis, np.diag(np.sqrt(np.arange(1, d)), 1))
    return WaveguideKernelOp(basis, guide, WaveguideKernelOp.ANNIHILATE, delay)


def create(basis, guide: int = 1, delay: float = 0):
    if isinstance(basis, FockBasis):
        return destroy(basis).dag()
    return WaveguideKernelOp(basis, guide, WaveguideKernelOp.CREATE, delay)


def waveguide_destroy(basis: WaveguideBasis, guide: int = 1, delay_bins: float = 0):
    return WaveguideKernelOp(basis, guide, WaveguideKernelOp.ANNIHILATE, delay_bins)


def waveguide_create(basis: WaveguideBasis, guide: int = 1, delay_bins: float = 0):
    return WaveguideKernelOp(basis, guide, WaveguideKernelOp.CREATE, delay_bins)


def number(basis: FockBasis) -> LocalOp:
    return LocalOp(basis, np.diag(np.arange(basis.dimension, dtype=float)))


def identity(basis):
    if isinstance(basis, FockBasis):
        return LocalOp(basis, np.eye(basis.dimension))
    return IdentityOp(basis)


def scale(alpha, op: Operator) -> Operator:
    if isinstance(op, LocalOp):
        return LocalOp(op.basis, alpha * op.matrix)
    if isinstance(op, LazyTensor):
        return LazyTensor(op.basis, op.factors, alpha * op.coef)
    if isinstance(op, Scaled):
        return Scaled(alpha * op.coef, op.op)
    return Scaled(alpha, op)


def lazy_sum(*ops) -> LazySum:
    flat = []
    for op in ops:
        flat.extend(op.ops if isinstance(op, LazySum) else [op])
    return LazySum(flat)


def lazy_product(*ops) -> LazyProduct:
    flat = []
    for op in ops:
        flat.extend(op.ops if isinstance(op, LazyProduct) else [op])
    return LazyProduct(flat)


# -- tensor products -----------------------------------------------------------
#
# Every operator expands into a list of terms ``(coef, [piece, piece, ...])``: a
# sum over terms of a coefficient times a product of pieces, each piece a dict
# ``{position: LocalOp | WaveguideKernelOp}``. Tensor products combine terms
# position-wise, then each piece becomes one elementary LazyTensor.


def _expand(op: Operator, offset: int) -> list:
    if isinstance(op, (LocalOp, WaveguideKernelOp)):
        return [(1.0, [{offset: op}])]
    if isinstance(op, IdentityOp):
        return [(1.0, [])]
    if isinstance(op, LazyTensor):
        return [(op.coef, [{p + offset: f for p, f in op.factors.items()}])]
    if isinstance(op, Scaled):
        return [(op.coef * c, pieces) for c, pieces in _expand(op.op, offset)]
    if isinstance(op, LazySum):
        return [t for child in op.ops for t in _expand(child, offset)]
    if isinstance(op, LazyProduct):
        terms = [(1.0, [])]
        for child in op.ops:
            terms = [(c1 * c2, p1 + p2) for c1, p1 in terms
                     for c2, p2 in _expand(child, offset)]
        return terms
    raise TypeError(f"cannot place {op!r} in a tensor product")


def _split_kernels(piece: dict) -> list:
    """A piece with several kernels becomes a product of single-kernel pieces."""
    kernel_pos = [p for p, f in piece.items() if isinstance(f, WaveguideKernelOp)]
    if len(kernel_pos) <= 1:
        return [piece]
    first = {p: f for p, f in piece.items() if p not in kernel_pos[1:]}
    return [first] + [{p: piece[p]} for p in kernel_pos[1:]]


def _assemble(basis: CompositeBasis, arg_terms: list) -> Operator:
    summands = []
    for combo in itertools.product(*arg_terms):
        coef = np.prod([c for c, _ in combo])
        if coef == 0:
            continue
        length = max((len(p) for _, p in combo), default=0)
        pieces = []
        for j in range(length):
            merged = {}
            for _, plist in combo:
                if j < len(plist):
                    merged.update(plist[j])
            pieces.extend(_split_kernels(merged))
        if not pieces:
            pieces = [{}]
        tensors = [LazyTensor(basis, pc) for pc in pieces]
        tensors[0] = LazyTensor(basis, tensors[0].factors, coef)
        summands.append(tensors[0] if len(tensors) == 1 else LazyProduct(tensors))
    if not summands:
        return LazyTensor(basis, {}, 0.0)
    return summands[0] if len(summands) == 1 else LazySum(summands)


def tensor(*ops) -> Operator:
    """Lazy tensor product ``ops[0] (x) ops[1] (x) ...``."""
    if not ops:
        raise ValueError("tensor needs at least one operator")
    basis = CompositeBasis(tuple(op.basis for op in ops))
    arg_terms, offset = [], 0
    for op in ops:
        arg_terms.append(_expand(op, offset))
        offset += len(as_composite(op.basis).factors)
    return _assemble(basis, arg_terms)


def lazy_tensor(basis, factors: dict, coef=1.0) -> Operator:
    """Place single-basis operators at given positions of a composite basis."""
    basis = as_composite(basis)
    arg_terms = []
    for pos, op in factors.items():
        if not 0 <= pos < len(basis.factors):
            raise ValueError(f"position {pos} out of range")
        if isinstance(op.basis, CompositeBasis):
            raise TypeError("lazy_tensor factors must act on a single basis")
        if op.basis != basis.factors[pos]:
            raise ValueError(f"factor at position {pos} has the wrong basis")
        arg_terms.append(_expand(op, pos))
    out = _assemble(basis, arg_terms)
    return out if coef == 1 else scale(coef, out)


# -- evaluation helpers ----------------------------------------------------------


def set_active_bin(op: Operator, k: int) -> None:
    """Point every waveguide kernel in ``op`` at bin ``k`` (1-based).

    Validates all kernels before touching any of them.
    """
    k = int(k)
    ks = op.kernels()
    for kern in ks:
        kern._check_bin(k)
    for kern in ks:
        kern.active_bin = k


def apply_accumulate(out, op: Operator, x, alpha=1.0, beta=0.0):
    """``out <- alpha * op @ x + beta * out``."""
    return op.apply(out, x, alpha, beta)
