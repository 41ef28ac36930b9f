"""Dense linear algebra over Z_p on small integer matrices."""

from __future__ import annotations

import numpy as np


def as_mod(a, p: int) -> np.ndarray:
    return np.asarray(a, dtype=np.int64) % p


def rref(a, p: int) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form of ``a`` mod p and its pivot columns."""
    m = as_mod(a, p).copy()
    rows, cols = m.shape
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.nonzero(m[r:, c])[0]
        if nz.size == 0:
            continue
        k = r + nz[0]
        if k != r:
            m[[r, k]] = m[[k, r]]
        m[r] = (m[r] * pow(int(m[r, c]), -1, p)) % p
        others = np.nonzero(m[:, c])[0]
        others = others[others != r]
        if others.size:
            m[others] = (m[others] - np.outer(m[others, c], m[r])) % p
        pivots.append(c)
        r += 1
    return m, pivots


def rank(a, p: int) -> int:
    return len(rref(a, p)[1])


def inv(a, p: int) -> np.ndarray:
    a = as_mod(a, p)
    n = a.shape[0]
    if a.shape != (n, n):
        raise ValueError("matrix must be square")
    r, piv = rref(np.hstack([a, np.eye(n, dtype=np.int64)]), p)
    if piv[:n] != list(range(n)):
        raise ValueError("matrix is singular mod p")
    return r[:, n:].copy()


def solve(a, b, p: int) -> np.ndarray | None:
    """One solution x of a @ x = b (mod p), or None if inconsistent."""
    a = as_mod(a, p)
    b = as_mod(b, p).reshape(-1, 1)
    rows, cols = a.shape
    r, piv = rref(np.hstack([a, b]), p)
    if cols in piv:
        return None
    x = np.zeros(cols, dtype=np.int64)
    for i, c in enumerate(piv):
        x[c] = r[i, cols]
    return x


def nullspace(a, p: int) -> np.ndarray:
    """Basis of {x : a @ x = 0 mod p} as rows."""
    a = as_mod(a, p)
    cols = a.shape[1]
    r, piv = rref(a, p)
    free = [c for c in range(cols) if c not in piv]
    basis = []
    for f in free:
        x = np.zeros(cols, dtype=np.int64)
        x[f] = 1
        for i, c in enumerate(piv):
            x[c] = (-r[i, f]) % p
        basis.append(x)
    if not basis:
        return np.zeros((0, cols), dtype=np.int64)
    return np.array(basis)


def elementary_ops(a, p: int) -> list[tuple]:
    """Factor an invertible map into row operations.

    Returns a list of ``("scale", i, c)`` (x_i <- c x_i) and
    ``("add", i, j, c)`` (x_i <- x_i + c x_j) operations which, applied in
    order to a vector x, produce ``a @ x``.
    """
    m = as_mod(a, p).copy()
    n = m.shape[0]
    ops: list[tuple] = []  # reduce m to identity; record the reductions
    for c in range(n):
        if m[c, c] == 0:
            below = np.nonzero(m[c + 1:, c])[0]
            if below.size == 0:
                raise ValueError("matrix is singular mod p")
            k = c + 1 + below[0]
            m[c] = (m[c] + m[k]) % p
            ops.append(("add", c, int(k), 1))
        s = pow(int(m[c, c]), -1, p)
        m[c] = (m[c] * s) % p
        ops.append(("scale", c, s))
        for r in range(n):
            if r != c and m[r, c]:
                f = int(m[r, c])
                m[r] = (m[r] - f * m[c]) % p
                ops.append(("add", r, c, (-f) % p))
    # R_k ... R_1 a = I  =>  a = R_1^-1 ... R_k^-1; apply R_k^-1 first.
    out: list[tuple] = []
    for op in reversed(ops):
        if op[0] == "scale":
            out.append(("scale", op[1], pow(op[2], -1, p)))
        else:
            out.append(("add", op[1], op[2], (-op[3]) % p))
    return out
