"""Hot numeric loops, each in a numba and a pure-numpy flavour.

The public names (``dh_fisher_sum``, ``laguerre_table``) dispatch on
``fockfisher._accel.USE_NUMBA``. The ``*_numba`` / ``*_numpy`` variants are
exported for tests and the benchmark.
"""
from __future__ import annotations

import math

import numpy as np

from ._accel import USE_NUMBA, njit

__all__ = [
    "dh_fisher_sum",
    "dh_fisher_sum_numba",
    "dh_fisher_sum_numpy",
    "laguerre_table",
    "laguerre_table_numba",
    "laguerre_table_numpy",
]


def _dh_fisher_sum_py(radii, weights, a, c, delta, phi, n_angular, p_floor):
    # Integrand over the (r, varphi) grid: r * (dp/dphi)^2 / p with
    # p = a(r) + c(r) cos(theta), theta = delta * (phi - 2 varphi).
    # Written as delta^2 c^2 w w' / ((a - |c|) + |c| w) with w = 1 + sign(c) cos,
    # w' = 1 - sign(c) cos taken from half angles, so the removable 0/0 at the
    # zeros of a pure-state density is resolved instead of dropped. Points with
    # p and |c| both below p_floor carry no mass and are skipped.
    # Rows are reduced in a fixed order with a Neumaier-compensated sum.
    dtheta = 2.0 * math.pi / n_angular
    d2 = delta * delta
    total = 0.0
    comp = 0.0
    skipped = 0
    ch2 = np.empty(n_angular)
    sh2 = np.empty(n_angular)
    for j in range(n_angular):
        half = 0.5 * delta * (phi - 2.0 * j * dtheta)
        ch2[j] = 2.0 * math.cos(half) ** 2
        sh2[j] = 2.0 * math.sin(half) ** 2
    for i in range(radii.shape[0]):
        ai = a[i]
        ci = c[i]
        ac = abs(ci)
        gap = ai - ac
        if gap < 0.0:
            gap = 0.0
        row = 0.0
        for j in range(n_angular):
            if ci >= 0.0:
                w = ch2[j]
                wp = sh2[j]
            else:
                w = sh2[j]
                wp = ch2[j]
            den = gap + ac * w
            if den < p_floor and ac < p_floor:
                skipped += 1
                continue
            if den > 0.0:
                row += d2 * ci * ci * w * wp / den
            else:
                row += d2 * ac * wp
        term = weights[i] * radii[i] * row * dtheta
        t = total + term
        if abs(total) >= abs(term):
            comp += (total - t) + term
        else:
            comp += (term - t) + total
        total = t
    return total + comp, skipped


dh_fisher_sum_numba = njit(_dh_fisher_sum_py)


def dh_fisher_sum_numpy(radii, weights, a, c, delta, phi, n_angular, p_floor):
    dtheta = 2.0 * math.pi / n_angular
    half = 0.5 * delta * (phi - 2.0 * np.arange(n_angular) * dtheta)
    ch2 = 2.0 * np.cos(half) ** 2
    sh2 = 2.0 * np.sin(half) ** 2
    pos = (c >= 0.0)[:, None]
    w = np.where(pos, ch2[None, :], sh2[None, :])
    wp = np.where(pos, sh2[None, :], ch2[None, :])
    ac = np.abs(c)[:, None]
    den = np.clip(a[:, None] - ac, 0.0, None) + ac * w
    skip = (den < p_floor) & (ac < p_floor)
    safe = np.where(den > 0.0, den, 1.0)
    ratio = np.where(den > 0.0, delta * delta * (c * c)[:, None] * w * wp / safe, delta * delta * ac * wp)
    ratio = np.where(skip, 0.0, ratio)
    rows = ratio.sum(axis=1) * weights * radii * dtheta
    return math.fsum(rows.tolist()), int(np.count_nonzero(skip))


def _laguerre_table_py(degrees, alphas, x):
    # out[q, i] = L_{degrees[q]}^{(alphas[q])}(x[i]) by the forward recurrence
    out = np.empty((degrees.shape[0], x.shape[0]))
    for q in range(degrees.shape[0]):
        n = degrees[q]
        alpha = alphas[q]
        for i in range(x.shape[0]):
            xi = x[i]
            if n == 0:
                out[q, i] = 1.0
                continue
            prev = 1.0
            cur = 1.0 + alpha - xi
            for s in range(1, n):
                nxt = ((2 * s + 1 + alpha - xi) * cur - (s + alpha) * prev) / (s + 1)
                prev = cur
                cur = nxt
            out[q, i] = cur
    return out


laguerre_table_numba = njit(_laguerre_table_py)


def laguerre_table_numpy(degrees, alphas, x):
    out = np.empty((len(degrees), x.shape[0]))
    for q, (n, alpha) in enumerate(zip(degrees, alphas)):
        if n == 0:
            out[q] = 1.0
            continue
        prev = np.ones_like(x)
        cur = 1.0 + alpha - x
        for s in range(1, n):
            prev, cur = cur, ((2 * s + 1 + alpha - x) * cur - (s + alpha) * prev) / (s + 1)
        out[q] = cur
    return out


if USE_NUMBA:
    dh_fisher_sum = dh_fisher_sum_numba
    laguerre_table = laguerre_table_numba
else:
    dh_fisher_sum = dh_fisher_sum_numpy
    laguerre_table = laguerre_table_numpy
