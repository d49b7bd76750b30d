"""Compiled inner loops.

A *line* is the waveguide axis of a flat composite vector: element ``j`` of the
line starting at ``base`` sits at ``base + j * stride``. Waveguide kernels read
one line of ``x`` and accumulate into one line of ``y``; everything else about
the tensor structure is folded into the line bases by the caller.

Indices here are 0-based: guide ``m``, effective bin ``e``.
"""

import numba as nb
import numpy as np

PLAIN = 0
ANNIHILATE = 1
CREATE = 2

SQRT2 = np.sqrt(2.0)


@nb.njit(cache=True, inline="always")
def _row_start(i, n):
    return i * n - (i * (i - 1)) // 2


@nb.njit(cache=True)
def _annihilate(y, x, yb, xb, st, c, m, e, n, w, p):
    s0 = 1 + m * n
    y[yb] += c * x[xb + (s0 + e) * st]
    if p < 2:
        return
    t = n * (n + 1) // 2
    po = 1 + w * n + m * t
    rs_e = _row_start(e, n)
    y[yb + (s0 + e) * st] += c * SQRT2 * x[xb + (po + rs_e) * st]
    for j in range(e):
        y[yb + (s0 + j) * st] += c * x[xb + (po + _row_start(j, n) + e - j) * st]
    for j in range(e + 1, n):
        y[yb + (s0 + j) * st] += c * x[xb + (po + rs_e + j - e) * st]
    co = 1 + w * n + w * t
    for m2 in range(w):
        if m2 == m:
            continue
        t0 = 1 + m2 * n
        if m < m2:
            pidx = m * w - (m * (m + 1)) // 2 + (m2 - m - 1)
            base = co + pidx * n * n + e * n
            for j in range(n):
                y[yb + (t0 + j) * st] += c * x[xb + (base + j) * st]
        else:
            pidx = m2 * w - (m2 * (m2 + 1)) // 2 + (m - m2 - 1)
            base = co + pidx * n * n + e
            for j in range(n):
                y[yb + (t0 + j) * st] += c * x[xb + (base + j * n) * st]


@nb.njit(cache=True)
def _create(y, x, yb, xb, st, c, m, e, n, w, p):
    s0 = 1 + m * n
    y[yb + (s0 + e) * st] += c * x[xb]
    if p < 2:
        return
    t = n * (n + 1) // 2
    po = 1 + w * n + m * t
    rs_e = _row_start(e, n)
    y[yb + (po + rs_e) * st] += c * SQRT2 * x[xb + (s0 + e) * st]
    for j in range(e):
        y[yb + (po + _row_start(j, n) + e - j) * st] += c * x[xb + (s0 + j) * st]
    for j in range(e + 1, n):
        y[yb + (po + rs_e + j - e) * st] += c * x[xb + (s0 + j) * st]
    co = 1 + w * n + w * t
    for m2 in range(w):
        if m2 == m:
            continue
        t0 = 1 + m2 * n
        if m < m2:
            pidx = m * w - (m * (m + 1)) // 2 + (m2 - m - 1)
            base = co + pidx * n * n + e * n
            for j in range(n):
                y[yb + (base + j) * st] += c * x[xb + (t0 + j) * st]
        else:
            pidx = m2 * w - (m2 * (m2 + 1)) // 2 + (m - m2 - 1)
            base = co + pidx * n * n + e
            for j in range(n):
                y[yb + (base + j * n) * st] += c * x[xb + (t0 + j) * st]


@nb.njit(cache=True)
def apply_lines(y, x, alpha, ybase, xbase, coef, kind, kid, stride,
                bins, delay, guide, nbin, nwg, nph):
    """``y += alpha * sum_lines coef * K_line x`` for one line table."""
    for l in range(ybase.shape[0]):
        c = alpha * coef[l]
        kd = kind[l]
        if kd == PLAIN:
            y[ybase[l]] += c * x[xbase[l]]
            continue
        k = kid[l]
        e = bins[k] - 1 + delay[k]
        if kd == ANNIHILATE:
            _annihilate(y, x, ybase[l], xbase[l], stride[l], c,
                        guide[k] - 1, e, nbin[k], nwg[k], nph[k])
        else:
            _create(y, x, ybase[l], xbase[l], stride[l], c,
                    guide[k] - 1, e, nbin[k], nwg[k], nph[k])


@nb.njit(cache=True)
def zero_at(buf, idx):
    for i in idx:
        buf[i] = 0.0


@nb.njit(cache=True)
def axpy_at(out, a, b, c, idx):
    """``out[idx] = a[idx] + c * b[idx]``."""
    for i in idx:
        out[i] = a[i] + c * b[i]


@nb.njit(cache=True)
def rk4_combine_at(psi, k1, k2, k3, k4, h, idx):
    w = h / 6.0
    for i in idx:
        psi[i] += w * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])


@nb.njit(cache=True)
def copy_at(dst, src, idx):
    for i in idx:
        dst[i] = src[i]


@nb.njit(cache=True)
def all_finite_at(v, idx):
    for i in idx:
        z = v[i]
        if not (np.isfinite(z.real) and np.isfinite(z.imag)):
            return False
    return True
