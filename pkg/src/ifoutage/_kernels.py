"""Compiled inner loops for small-dimension lattice work (K <= 8 in practice)."""
import numpy as np
from numba import njit


@njit(cache=True)
def _gram_schmidt(b):
    k = b.shape[1]
    bstar = np.zeros_like(b)
    mu = np.zeros((k, k))
    bn = np.zeros(k)
    for i in range(k):
        v = b[:, i].copy()
        for j in range(i):
            acc = 0.0
            for r in range(b.shape[0]):
                acc += b[r, i] * bstar[r, j]
            mu[i, j] = acc / bn[j]
            v -= mu[i, j] * bstar[:, j]
        bstar[:, i] = v
        bn[i] = np.sum(v * v)
    return bstar, mu, bn


@njit(cache=True)
def lll_columns(b_in, delta):
    """LLL-reduce the columns of ``b_in``; returns (reduced, U) with reduced = b_in @ U."""
    b = b_in.copy()
    k = b.shape[1]
    u = np.eye(k, dtype=np.int64)
    bstar, mu, bn = _gram_schmidt(b)
    i = 1
    guard = 0
    while i < k:
        guard += 1
        if guard > 100000:
            break
        for j in range(i - 1, -1, -1):
            q = np.round(mu[i, j])
            if q != 0.0:
                qi = np.int64(q)
                b[:, i] -= q * b[:, j]
                u[:, i] -= qi * u[:, j]
                for t in range(j + 1):
                    if t == j:
                        mu[i, t] -= q
                    else:
                        mu[i, t] -= q * mu[j, t]
        if bn[i] >= (delta - mu[i, i - 1] ** 2) * bn[i - 1]:
            i += 1
        else:
            tmp = b[:, i].copy()
            b[:, i] = b[:, i - 1]
            b[:, i - 1] = tmp
            tmpu = u[:, i].copy()
            u[:, i] = u[:, i - 1]
            u[:, i - 1] = tmpu
            bstar, mu, bn = _gram_schmidt(b)
            i = max(i - 1, 1)
    return b, u


@njit(cache=True)
def enumerate_short(r, r2, cap):
    """All nonzero integer x with ||R x||^2 <= r2, R upper triangular (k x k).

    Returns (coeffs, norms2, count); count == -1 signals the cap was hit.
    """
    k = r.shape[0]
    out = np.empty((cap, k), dtype=np.int64)
    norms = np.empty(cap)
    count = 0
    x = np.zeros(k, dtype=np.int64)
    center = np.zeros(k)
    hi = np.zeros(k, dtype=np.int64)
    partial = np.zeros(k + 1)
    lvl = k - 1
    t = np.sqrt(r2) / abs(r[lvl, lvl])
    center[lvl] = 0.0
    x[lvl] = np.int64(np.ceil(-t)) - 1
    hi[lvl] = np.int64(np.floor(t))
    while True:
        x[lvl] += 1
        if x[lvl] > hi[lvl]:
            lvl += 1
            if lvl == k:
                break
            continue
        dlt = r[lvl, lvl] * (x[lvl] - center[lvl])
        partial[lvl] = partial[lvl + 1] + dlt * dlt
        if partial[lvl] > r2:
            continue
        if lvl == 0:
            nz = False
            for i in range(k):
                if x[i] != 0:
                    nz = True
                    break
            if nz:
                if count >= cap:
                    return out[:0], norms[:0], -1
                out[count, :] = x
                norms[count] = partial[0]
                count += 1
            continue
        lvl -= 1
        s = 0.0
        for j in range(lvl + 1, k):
            s += r[lvl, j] * x[j]
        center[lvl] = -s / r[lvl, lvl]
        rem = r2 - partial[lvl + 1]
        if rem < 0.0:
            rem = 0.0
        t = np.sqrt(rem) / abs(r[lvl, lvl])
        x[lvl] = np.int64(np.ceil(center[lvl] - t)) - 1
        hi[lvl] = np.int64(np.floor(center[lvl] + t))
    return out[:count], norms[:count], count
