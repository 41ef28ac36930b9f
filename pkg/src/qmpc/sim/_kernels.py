"""Compiled inner loops for the tableau measurement."""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def _inv(a, p):
    a %= p
    r = 1
    e = p - 2
    while e:
        if e & 1:
            r = r * a % p
        a = a * a % p
        e >>= 1
    return r


@njit(cache=True)
def has_random_outcome(X, col):
    m = X.shape[1]
    for k in range(m, 2 * m):
        if X[k, col] != 0:
            return True
    return False


@njit(cache=True)
def measure_kernel(X, Z, R, col, p, outcome, random_case):
    """Computational-basis measurement of column ``col`` in place.

    ``outcome`` is used only when ``random_case``.  Returns (outcome, d)
    where d is the destabilizer row paired with the new Z_col stabilizer.
    """
    m = X.shape[1]
    two = 2 * m
    if random_case:
        piv = -1
        for k in range(m, two):
            if X[k, col] != 0:
                piv = k
                break
        d = piv - m
        inv = _inv(X[piv, col], p)
        own = 0
        for j in range(m):
            own += X[piv, j] * Z[piv, j]
        own %= p
        for row in range(two):
            if row == piv or row == d:
                continue
            v = X[row, col] % p
            if v == 0:
                continue
            a = (p - v) * inv % p
            cross = 0
            for j in range(m):
                cross += Z[row, j] * X[piv, j]
            cross %= p
            R[row] = (R[row] + a * R[piv] + own * ((a * (a - 1) // 2) % p) + a * cross) % p
            for j in range(m):
                X[row, j] = (X[row, j] + a * X[piv, j]) % p
                Z[row, j] = (Z[row, j] + a * Z[piv, j]) % p
        for j in range(m):
            X[d, j] = X[piv, j] * inv % p
            Z[d, j] = Z[piv, j] * inv % p
        R[d] = 0
    else:
        # phase of prod_k S_k^{c_k}, c = destabilizer x column
        s = 0
        accz = np.zeros(m, np.int64)
        d = -1
        for k in range(m):
            c = X[k, col] % p
            if c == 0:
                continue
            if d < 0:
                d = k
            row = m + k
            own = 0
            cross = 0
            for j in range(m):
                own += X[row, j] * Z[row, j]
                cross += accz[j] * X[row, j]
            s += c * R[row] + (own % p) * ((c * (c - 1) // 2) % p) + (cross % p) * c
            for j in range(m):
                accz[j] = (accz[j] + c * Z[row, j]) % p
            s %= p
        outcome = (p - s) % p
        piv = m + d
        cinv = _inv(X[d, col], p)
        for k in range(d + 1, m):
            c = X[k, col] % p
            if c == 0:
                continue
            f = c * cinv % p
            for j in range(m):
                X[k, j] = (X[k, j] - f * X[d, j]) % p
                Z[k, j] = (Z[k, j] - f * Z[d, j]) % p
        for j in range(m):
            X[d, j] = X[d, j] * cinv % p
            Z[d, j] = Z[d, j] * cinv % p
    for j in range(m):
        X[piv, j] = 0
        Z[piv, j] = 0
    Z[piv, col] = 1
    R[piv] = (p - outcome) % p
    for row in range(two):
        if row == piv or row == d:
            continue
        v = Z[row, col] % p
        if v != 0:
            R[row] = (R[row] - v * R[piv]) % p
            Z[row, col] = 0
    return outcome, d


@njit(cache=True)
def split_kernel(X, Z, R, col, d):
    """Copy of the tableau without column col and rows d, m + d."""
    m = X.shape[1]
    nm = m - 1
    X2 = np.empty((2 * nm, nm), np.int64)
    Z2 = np.empty((2 * nm, nm), np.int64)
    R2 = np.empty(2 * nm, np.int64)
    r2 = 0
    for row in range(2 * m):
        if row == d or row == m + d:
            continue
        c2 = 0
        for j in range(m):
            if j == col:
                continue
            X2[r2, c2] = X[row, j]
            Z2[r2, c2] = Z[row, j]
            c2 += 1
        R2[r2] = R[row]
        r2 += 1
    return X2, Z2, R2


@njit(cache=True)
def measure_batch_kernel(X, Z, R, cols, p, draws):
    """Measure several columns in sequence; rows of finished pairs are frozen.

    Returns (outcomes, alive) where alive[k] is False for the row pairs that
    now belong to measured wires.  ``draws[i]`` is the outcome used when the
    i-th measurement is random.
    """
    m = X.shape[1]
    alive = np.ones(m, np.bool_)
    outcomes = np.zeros(len(cols), np.int64)
    accz = np.zeros(m, np.int64)
    for idx in range(len(cols)):
        col = cols[idx]
        piv = -1
        for k in range(m):
            if alive[k] and X[m + k, col] != 0:
                piv = m + k
                break
        if piv >= 0:
            d = piv - m
            outcome = draws[idx] % p
            inv = _inv(X[piv, col], p)
            own = 0
            for j in range(m):
                own += X[piv, j] * Z[piv, j]
            own %= p
            for row in range(2 * m):
                if row == piv or row == d or not alive[row % m]:
                    continue
                v = X[row, col] % p
                if v == 0:
                    continue
                a = (p - v) * inv % p
                cross = 0
                for j in range(m):
                    cross += Z[row, j] * X[piv, j]
                cross %= p
                R[row] = (R[row] + a * R[piv] + own * ((a * (a - 1) // 2) % p) + a * cross) % p
                for j in range(m):
                    X[row, j] = (X[row, j] + a * X[piv, j]) % p
                    Z[row, j] = (Z[row, j] + a * Z[piv, j]) % p
            for j in range(m):
                X[d, j] = X[piv, j] * inv % p
                Z[d, j] = Z[piv, j] * inv % p
            R[d] = 0
        else:
            s = 0
            for j in range(m):
                accz[j] = 0
            d = -1
            for k in range(m):
                if not alive[k]:
                    continue
                c = X[k, col] % p
                if c == 0:
                    continue
                if d < 0:
                    d = k
                row = m + k
                own = 0
                cross = 0
                for j in range(m):
                    own += X[row, j] * Z[row, j]
                    cross += accz[j] * X[row, j]
                s += c * R[row] + (own % p) * ((c * (c - 1) // 2) % p) + (cross % p) * c
                for j in range(m):
                    accz[j] = (accz[j] + c * Z[row, j]) % p
                s %= p
            outcome = (p - s) % p
            piv = m + d
            cinv = _inv(X[d, col], p)
            for k in range(d + 1, m):
                if not alive[k]:
                    continue
                c = X[k, col] % p
                if c == 0:
                    continue
                f = c * cinv % p
                for j in range(m):
                    X[k, j] = (X[k, j] - f * X[d, j]) % p
                    Z[k, j] = (Z[k, j] - f * Z[d, j]) % p
            for j in range(m):
                X[d, j] = X[d, j] * cinv % p
                Z[d, j] = Z[d, j] * cinv % p
        for j in range(m):
            X[piv, j] = 0
            Z[piv, j] = 0
        Z[piv, col] = 1
        R[piv] = (p - outcome) % p
        for row in range(2 * m):
            if row == piv or row == d or not alive[row % m]:
                continue
            v = Z[row, col] % p
            if v != 0:
                R[row] = (R[row] - v * R[piv]) % p
                Z[row, col] = 0
        alive[d] = False
        outcomes[idx] = outcome
    return outcomes, alive


@njit(cache=True)
def compact_kernel(X, Z, R, keep_rows, keep_cols):
    """Tableau restricted to the kept row pairs and columns."""
    m = X.shape[1]
    nr = 0
    for k in range(m):
        if keep_rows[k]:
            nr += 1
    nc = 0
    for j in range(m):
        if keep_cols[j]:
            nc += 1
    X2 = np.empty((2 * nr, nc), np.int64)
    Z2 = np.empty((2 * nr, nc), np.int64)
    R2 = np.empty(2 * nr, np.int64)
    for half in range(2):
        r2 = half * nr
        for k in range(m):
            if not keep_rows[k]:
                continue
            row = half * m + k
            c2 = 0
            for j in range(m):
                if keep_cols[j]:
                    X2[r2, c2] = X[row, j]
                    Z2[r2, c2] = Z[row, j]
                    c2 += 1
            R2[r2] = R[row]
            r2 += 1
    return X2, Z2, R2
