"""Compiled pair loops for the density-weighted average derivative.

All sums over pairs use Neumaier compensated accumulation.  Every routine is
single threaded and deterministic; callers parallelize across replications.
"""

import math

import numpy as np
from numba import njit

_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


@njit(cache=True, nogil=True, inline="always")
def _two_sum_err(s, v):
    t = s + v
    if abs(s) >= abs(v):
        return t, (s - t) + v
    return t, (v - t) + s


@njit(cache=True, nogil=True, inline="always")
def _factor(ul, coef, M):
    # returns p(u) and p'(u) - u p(u) for the even polynomial p
    u2 = ul * ul
    pv = coef[M - 1]
    dv = 0.0
    for m in range(M - 1, 0, -1):
        dv = dv * u2 + 2.0 * m * coef[m]
    for m in range(M - 2, -1, -1):
        pv = pv * u2 + coef[m]
    return pv, dv * ul - ul * pv


@njit(cache=True, nogil=True, inline="always")
def _grad_into(diff, inv_h, f, coef, M, p, dp, out):
    d = diff.shape[0]
    for l in range(d):
        p[l], dp[l] = _factor(diff[l] * inv_h, coef, M)
    for l in range(d):
        g = dp[l]
        for m in range(d):
            if m != l:
                g *= p[m]
        out[l] = f * g


@njit(cache=True, nogil=True)
def pair_aggregates(y, x, h, coef):
    """Row sums of U_ij over j != i and the pair sum of U_ij U_ij'.

    Returns ``(row_sums, outer_sum)`` with shapes (n, d) and (d, d).
    """
    n, d = x.shape
    M = coef.shape[0]
    row_s = np.zeros((n, d))
    row_c = np.zeros((n, d))
    oo_s = np.zeros((d, d))
    oo_c = np.zeros((d, d))
    inv_h = 1.0 / h
    half_inv_h2 = 0.5 * inv_h * inv_h
    scale = -(h ** (-d - 1)) * _INV_SQRT_2PI ** d
    p = np.empty(d)
    dp = np.empty(d)
    diff = np.empty(d)
    U = np.empty(d)
    for i in range(n - 1):
        yi = y[i]
        for j in range(i + 1, n):
            dy = yi - y[j]
            if dy == 0.0:
                continue
            sq = 0.0
            for l in range(d):
                diff[l] = x[i, l] - x[j, l]
                sq += diff[l] * diff[l]
            e = math.exp(-sq * half_inv_h2)
            if e == 0.0:
                continue
            _grad_into(diff, inv_h, scale * dy * e, coef, M, p, dp, U)
            for l in range(d):
                ul = U[l]
                row_s[i, l], err = _two_sum_err(row_s[i, l], ul)
                row_c[i, l] += err
                row_s[j, l], err = _two_sum_err(row_s[j, l], ul)
                row_c[j, l] += err
                for m in range(l, d):
                    oo_s[l, m], err = _two_sum_err(oo_s[l, m], ul * U[m])
                    oo_c[l, m] += err
    for l in range(d):
        for m in range(l, d):
            oo_s[l, m] += oo_c[l, m]
            oo_s[m, l] = oo_s[l, m]
    return row_s + row_c, oo_s


@njit(cache=True, nogil=True)
def pair_matrix(y, x, h, coef, v):
    """Dense symmetric n x n matrix of v'U_ij (zero diagonal)."""
    n, d = x.shape
    M = coef.shape[0]
    out = np.zeros((n, n))
    inv_h = 1.0 / h
    half_inv_h2 = 0.5 * inv_h * inv_h
    scale = -(h ** (-d - 1)) * _INV_SQRT_2PI ** d
    p = np.empty(d)
    dp = np.empty(d)
    diff = np.empty(d)
    U = np.empty(d)
    for i in range(n - 1):
        for j in range(i + 1, n):
            dy = y[i] - y[j]
            if dy == 0.0:
                continue
            sq = 0.0
            for l in range(d):
                diff[l] = x[i, l] - x[j, l]
                sq += diff[l] * diff[l]
            e = math.exp(-sq * half_inv_h2)
            if e == 0.0:
                continue
            _grad_into(diff, inv_h, scale * dy * e, coef, M, p, dp, U)
            s = 0.0
            for l in range(d):
                s += v[l] * U[l]
            out[i, j] = s
            out[j, i] = s
    return out


@njit(cache=True, nogil=True)
def theta_dyadic(y, x, h0, levels, coef):
    """Pair sums of U_ij at bandwidths h0, h0/2, ..., h0/2^(levels-1).

    The Gaussian factor at h0/2^k is the 4^k-th power of the factor at h0, so
    a single exponential serves every level.  Returns an array (levels, d) of
    sums over i < j.
    """
    n, d = x.shape
    M = coef.shape[0]
    s = np.zeros((levels, d))
    c = np.zeros((levels, d))
    norm = _INV_SQRT_2PI ** d
    p = np.empty(d)
    dp = np.empty(d)
    diff = np.empty(d)
    U = np.empty(d)
    inv_h = np.empty(levels)
    scale = np.empty(levels)
    for k in range(levels):
        h = h0 / 2.0 ** k
        inv_h[k] = 1.0 / h
        scale[k] = -(h ** (-d - 1)) * norm
    half_inv_h2 = 0.5 / (h0 * h0)
    for i in range(n - 1):
        for j in range(i + 1, n):
            dy = y[i] - y[j]
            if dy == 0.0:
                continue
            sq = 0.0
            for l in range(d):
                diff[l] = x[i, l] - x[j, l]
                sq += diff[l] * diff[l]
            e = math.exp(-sq * half_inv_h2)
            for k in range(levels):
                if k > 0:
                    e = e * e
                    e = e * e
                if e == 0.0:
                    break
                _grad_into(diff, inv_h[k], scale[k] * dy * e, coef, M, p, dp, U)
                for l in range(d):
                    s[k, l], err = _two_sum_err(s[k, l], U[l])
                    c[k, l] += err
    return s + c
