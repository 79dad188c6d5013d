"""Numba-jitted stencil kernels; semantics identical to _numpy_impl."""

import numpy as np
from numba import njit

NAME = "numba"


@njit(cache=True)
def grad_x(z, mask):
    nr, nc = z.shape
    out = np.zeros_like(z)
    for i in range(nr):
        for j in range(nc):
            if not mask[i, j]:
                continue
            has_l = j > 0 and mask[i, j - 1]
            has_r = j < nc - 1 and mask[i, j + 1]
            if has_l and has_r:
                out[i, j] = 0.5 * (z[i, j + 1] - z[i, j - 1])
            elif has_r:
                out[i, j] = z[i, j + 1] - z[i, j]
            elif has_l:
                out[i, j] = z[i, j] - z[i, j - 1]
    return out


@njit(cache=True)
def grad_x_adj(c, mask):
    nr, nc = c.shape
    g = np.zeros_like(c)
    for i in range(nr):
        for j in range(nc):
            if not mask[i, j]:
                continue
            has_l = j > 0 and mask[i, j - 1]
            has_r = j < nc - 1 and mask[i, j + 1]
            cc = c[i, j]
            if has_l and has_r:
                g[i, j + 1] += 0.5 * cc
                g[i, j - 1] -= 0.5 * cc
            elif has_r:
                g[i, j + 1] += cc
                g[i, j] -= cc
            elif has_l:
                g[i, j] += cc
                g[i, j - 1] -= cc
    return g


@njit(cache=True)
def grad_y(z, mask):
    nr, nc = z.shape
    out = np.zeros_like(z)
    for i in range(nr):
        for j in range(nc):
            if not mask[i, j]:
                continue
            has_u = i > 0 and mask[i - 1, j]
            has_d = i < nr - 1 and mask[i + 1, j]
            if has_u and has_d:
                out[i, j] = 0.5 * (z[i + 1, j] - z[i - 1, j])
            elif has_d:
                out[i, j] = z[i + 1, j] - z[i, j]
            elif has_u:
                out[i, j] = z[i, j] - z[i - 1, j]
    return out


@njit(cache=True)
def grad_y_adj(c, mask):
    nr, nc = c.shape
    g = np.zeros_like(c)
    for i in range(nr):
        for j in range(nc):
            if not mask[i, j]:
                continue
            has_u = i > 0 and mask[i - 1, j]
            has_d = i < nr - 1 and mask[i + 1, j]
            cc = c[i, j]
            if has_u and has_d:
                g[i + 1, j] += 0.5 * cc
                g[i - 1, j] -= 0.5 * cc
            elif has_d:
                g[i + 1, j] += cc
                g[i, j] -= cc
            elif has_u:
                g[i, j] += cc
                g[i - 1, j] -= cc
    return g


@njit(cache=True)
def second_x(z, mask):
    nr, nc = z.shape
    out = np.zeros_like(z)
    for i in range(nr):
        for j in range(1, nc - 1):
            if mask[i, j] and mask[i, j - 1] and mask[i, j + 1]:
                out[i, j] = z[i, j - 1] - 2.0 * z[i, j] + z[i, j + 1]
    return out


@njit(cache=True)
def second_x_adj(c, mask):
    nr, nc = c.shape
    g = np.zeros_like(c)
    for i in range(nr):
        for j in range(1, nc - 1):
            if mask[i, j] and mask[i, j - 1] and mask[i, j + 1]:
                cc = c[i, j]
                g[i, j - 1] += cc
                g[i, j] -= 2.0 * cc
                g[i, j + 1] += cc
    return g


@njit(cache=True)
def second_y(z, mask):
    nr, nc = z.shape
    out = np.zeros_like(z)
    for i in range(1, nr - 1):
        for j in range(nc):
            if mask[i, j] and mask[i - 1, j] and mask[i + 1, j]:
                out[i, j] = z[i - 1, j] - 2.0 * z[i, j] + z[i + 1, j]
    return out


@njit(cache=True)
def second_y_adj(c, mask):
    nr, nc = c.shape
    g = np.zeros_like(c)
    for i in range(1, nr - 1):
        for j in range(nc):
            if mask[i, j] and mask[i - 1, j] and mask[i + 1, j]:
                cc = c[i, j]
                g[i - 1, j] += cc
                g[i, j] -= 2.0 * cc
                g[i + 1, j] += cc
    return g


@njit(cache=True)
def _gsm_scalar(d, a_log, inv2s2, invs2, lse0):
    k = a_log.shape[0]
    m = -1e300
    for t in range(k):
        e = a_log[t] - d * d * inv2s2[t]
        if e > m:
            m = e
    sw = 0.0
    sr = 0.0
    for t in range(k):
        w = np.exp(a_log[t] - d * d * inv2s2[t] - m)
        sw += w
        sr += w * invs2[t]
    c = lse0 - (m + np.log(sw))
    return c, d * sr / sw


@njit(cache=True)
def pair_energy_5x5(h, active, a_log, inv2s2, invs2):
    nr, nc = h.shape
    val = np.zeros_like(h)
    grad = np.zeros_like(h)
    m0 = -1e300
    for t in range(a_log.shape[0]):
        if a_log[t] > m0:
            m0 = a_log[t]
    s0 = 0.0
    for t in range(a_log.shape[0]):
        s0 += np.exp(a_log[t] - m0)
    lse0 = m0 + np.log(s0)
    for dy in range(0, 3):
        dx0 = 1 if dy == 0 else -2
        for dx in range(dx0, 3):
            if dy == 0 and dx <= 0:
                continue
            for i in range(max(0, -dy), min(nr, nr - dy)):
                for j in range(max(0, -dx), min(nc, nc - dx)):
                    if not (active[i, j] and active[i + dy, j + dx]):
                        continue
                    d = h[i, j] - h[i + dy, j + dx]
                    c, cp = _gsm_scalar(d, a_log, inv2s2, invs2, lse0)
                    val[i, j] += 2.0 * c
                    grad[i, j] += 2.0 * cp
                    grad[i + dy, j + dx] -= 2.0 * cp
    return val, grad
