"""Stabilizer states over Z_p, stored as independent clusters of wires.

Each cluster is a tableau with m destabilizer rows followed by m stabilizer
rows over its m wires.  Row k represents omega^{r_k} X^{x_k} Z^{z_k}.  Wires
only merge into a common cluster when an entangling gate touches them, and
a computational-basis measurement splits the measured wire off again, so
protocols that entangle many small blocks stay cheap.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from qmpc import linalg
from qmpc.sim._kernels import (
    compact_kernel,
    has_random_outcome,
    measure_batch_kernel,
    measure_kernel,
    split_kernel,
)
from qmpc.sim.gates import GateOp, UnsupportedGate
from qmpc.sim.pauli import PauliOperator


def product_phase(xs: np.ndarray, zs: np.ndarray, rs: np.ndarray, c: np.ndarray, p: int):
    """(x, z, phase) of the ordered product prod_i P_i^{c_i}."""
    c = np.asarray(c, dtype=np.int64) % p
    keep = np.nonzero(c)[0]
    n = xs.shape[1]
    if keep.size == 0:
        return np.zeros(n, np.int64), np.zeros(n, np.int64), 0
    c = c[keep]
    x, z, r = xs[keep], zs[keep], rs[keep]
    cx = c[:, None] * x % p
    cz = c[:, None] * z % p
    own = (x * z).sum(axis=1) % p
    phase = int((c * r).sum() + (own * (c * (c - 1) // 2 % p)).sum())
    cross = cz @ cx.T % p
    phase += int(np.triu(cross, 1).sum())
    return cx.sum(axis=0) % p, cz.sum(axis=0) % p, phase % p


def canonical_group(xs, zs, rs, p):
    """Reduced echelon generators (with phases) of the group the rows generate.

    Returns ``(sym, phases)`` where ``sym`` rows are [x | z]; equal groups
    give identical output.
    """
    xs = np.asarray(xs, np.int64) % p
    zs = np.asarray(zs, np.int64) % p
    rs = np.asarray(rs, np.int64) % p
    k, n = xs.shape
    if k == 0:
        return np.zeros((0, 2 * n), np.int64), np.zeros(0, np.int64)
    sym = np.hstack([xs, zs])
    red, piv = linalg.rref(np.hstack([sym, np.eye(k, dtype=np.int64)]), p)
    rank = sum(1 for c in piv if c < 2 * n)
    out_sym = red[:rank, : 2 * n]
    phases = np.array(
        [product_phase(xs, zs, rs, red[i, 2 * n:], p)[2] for i in range(rank)],
        dtype=np.int64,
    )
    return out_sym, phases


class _Cluster:
    __slots__ = ("wires", "col", "x", "z", "r")

    def __init__(self, wires, x, z, r):
        self.wires = list(wires)
        self.col = {w: i for i, w in enumerate(self.wires)}
        self.x = x
        self.z = z
        self.r = r

    @property
    def m(self) -> int:
        return len(self.wires)

    @classmethod
    def zero(cls, wire):
        one = np.array([[1], [0]], np.int64)
        return cls([wire], one.copy(), one[::-1].copy(), np.zeros(2, np.int64))

    def copy(self):
        return _Cluster(self.wires, self.x.copy(), self.z.copy(), self.r.copy())

    def stabilizers(self):
        m = self.m
        return self.x[m:], self.z[m:], self.r[m:]


def _merge(clusters: list[_Cluster]) -> _Cluster:
    if len(clusters) == 1:
        return clusters[0]
    total = sum(c.m for c in clusters)
    x = np.zeros((2 * total, total), np.int64)
    z = np.zeros((2 * total, total), np.int64)
    r = np.zeros(2 * total, np.int64)
    wires = []
    off = 0
    for c in clusters:
        m = c.m
        cols = slice(off, off + m)
        for src, dst in ((slice(0, m), slice(off, off + m)), (slice(m, 2 * m), slice(total + off, total + off + m))):
            x[dst, cols] = c.x[src]
            z[dst, cols] = c.z[src]
            r[dst] = c.r[src]
        wires.extend(c.wires)
        off += m
    return _Cluster(wires, x, z, r)


class StabilizerState:
    """Pure stabilizer state on dynamically allocated qupit wires."""

    backend = "tableau"

    def __init__(self, p: int):
        self.p = p
        self._of: dict[int, _Cluster] = {}
        self._next = 0

    # ----------------------------------------------------------------- wires
    def alloc(self, count: int = 1, joined: bool = False) -> list[int]:
        """New wires, each in |0>.

        ``joined`` puts them in one cluster, which saves the merges when
        they are about to be entangled with each other anyway.
        """
        out = list(range(self._next, self._next + count))
        self._next += count
        if joined and count > 1:
            eye = np.eye(count, dtype=np.int64)
            zero = np.zeros_like(eye)
            c = _Cluster(out, np.vstack([eye, zero]), np.vstack([zero, eye]), np.zeros(2 * count, np.int64))
            for w in out:
                self._of[w] = c
            return out
        for w in out:
            self._of[w] = _Cluster.zero(w)
        return out

    @property
    def wires(self) -> list[int]:
        return sorted(self._of)

    @property
    def num_wires(self) -> int:
        return len(self._of)

    def cluster(self, wire: int) -> list[int]:
        return list(self._of[wire].wires)

    def clusters(self) -> list[list[int]]:
        seen = {}
        for c in self._of.values():
            seen[id(c)] = c
        return [list(c.wires) for c in seen.values()]

    def discard(self, wires) -> None:
        """Drop wires that are no longer entangled with anything."""
        for w in wires:
            c = self._of[w]
            if c.m != 1:
                raise ValueError(f"wire {w} is still entangled with {c.m - 1} others")
            del self._of[w]

    def copy(self) -> StabilizerState:
        new = StabilizerState(self.p)
        new._next = self._next
        done = {}
        for w, c in self._of.items():
            if id(c) not in done:
                done[id(c)] = c.copy()
            new._of[w] = done[id(c)]
        return new

    def _join(self, wires) -> _Cluster:
        clusters = {}
        for w in wires:
            c = self._of[w]
            clusters[id(c)] = c
        merged = _merge(list(clusters.values()))
        if len(clusters) > 1:
            for w in merged.wires:
                self._of[w] = merged
        return merged

    def _groups(self, wires):
        """Map cluster -> list of (index in ``wires``, column)."""
        groups: dict[int, tuple[_Cluster, list]] = {}
        for i, w in enumerate(wires):
            c = self._of[w]
            groups.setdefault(id(c), (c, []))[1].append((i, c.col[w]))
        return groups.values()

    # ----------------------------------------------------------------- gates
    def apply(self, gate: GateOp) -> StabilizerState:
        k = gate.kind
        if k == "toffoli":
            raise UnsupportedGate("Toffoli is not a Clifford gate")
        if k == "sum":
            self.apply_sum([gate.wires[0]], [gate.wires[1]], gate.scalar)
        else:
            self.apply_local(k, gate.wires, gate.scalar)
        return self

    def apply_local(self, kind: str, wires, scalar=1) -> None:
        """Single-wire Clifford ``kind`` on each wire (scalar may be per wire)."""
        p = self.p
        wires = list(wires)
        scal = np.broadcast_to(np.asarray(scalar, np.int64) % p, (len(wires),))
        if kind == "fourier_inv":
            kind, scal = "fourier", (-scal) % p
        for c, items in self._groups(wires):
            idx = [i for i, _ in items]
            cols = np.array([j for _, j in items])
            s = scal[idx]
            x, z = c.x[:, cols], c.z[:, cols]
            if kind == "shift":
                c.r = (c.r - (z * s).sum(axis=1)) % p
            elif kind == "phase_shift":
                c.r = (c.r + (x * s).sum(axis=1)) % p
            elif kind == "scalar_mul":
                sinv = np.array([pow(int(v), -1, p) for v in s])
                c.x[:, cols] = x * s % p
                c.z[:, cols] = z * sinv % p
            elif kind == "fourier":
                sinv = np.array([pow(int(v), -1, p) for v in s])
                c.r = (c.r - (x * z).sum(axis=1)) % p
                c.x[:, cols] = (-z * sinv) % p
                c.z[:, cols] = x * s % p
            else:
                raise ValueError(f"{kind} is not a single-wire Clifford gate")

    def apply_sum(self, controls, targets, scalar=1) -> None:
        """|a, b> -> |a, b + c a> for each (control, target) pair."""
        p = self.p
        controls, targets = list(controls), list(targets)
        scal = np.broadcast_to(np.asarray(scalar, np.int64) % p, (len(controls),))
        if len(set(controls) | set(targets)) < 2 * len(controls):
            # overlapping pairs: apply in order
            for a, b, s in zip(controls, targets, scal):
                self.apply_sum([a], [b], s)
            return
        for a, b in zip(controls, targets):
            if self._of[a] is not self._of[b]:
                self._join([a, b])
        for c, items in self._groups(controls):
            idx = [i for i, _ in items]
            ca = np.array([j for _, j in items])
            cb = np.array([c.col[targets[i]] for i in idx])
            s = scal[idx]
            c.x[:, cb] = (c.x[:, cb] + c.x[:, ca] * s) % p
            c.z[:, ca] = (c.z[:, ca] - c.z[:, cb] * s) % p

    def apply_linear(self, wires, mat) -> None:
        """|y> -> |L y> on the listed wires (L invertible mod p)."""
        p = self.p
        wires = list(wires)
        mat = linalg.as_mod(mat, p)
        minv = _cached_inverse(mat.tobytes(), mat.shape[0], p)
        c = self._join(wires)
        cols = np.array([c.col[w] for w in wires])
        c.x[:, cols] = c.x[:, cols] @ mat.T % p
        c.z[:, cols] = c.z[:, cols] @ minv % p

    def apply_pauli(self, op: PauliOperator, wires=None) -> StabilizerState:
        p = self.p
        wires = self.wires if wires is None else list(wires)
        if len(wires) != op.m:
            raise ValueError("operator size does not match wire count")
        a, b = op.x, op.z
        for c, items in self._groups(wires):
            idx = [i for i, _ in items]
            cols = np.array([j for _, j in items])
            c.r = (c.r + c.x[:, cols] @ b[idx] - c.z[:, cols] @ a[idx]) % p
        return self

    # ----------------------------------------------------------- measurement
    def measure(self, wire: int, rng: np.random.Generator) -> int:
        """Computational-basis measurement; the wire is left alone in |b>."""
        p = self.p
        c = self._of[wire]
        col = c.col[wire]
        rand = has_random_outcome(c.x, col)
        draw = int(rng.integers(p)) if rand else 0
        outcome, d = measure_kernel(c.x, c.z, c.r, col, p, draw, rand)
        self._split(c, col, d)
        single = _Cluster.zero(wire)
        single.r[1] = (-outcome) % p
        self._of[wire] = single
        return int(outcome)

    def _split(self, c: _Cluster, col: int, d: int) -> None:
        if c.m == 1:
            return
        c.x, c.z, c.r = split_kernel(c.x, c.z, c.r, col, d)
        del c.wires[col]
        c.col = {w: i for i, w in enumerate(c.wires)}

    def measure_fourier(self, wire: int, rng: np.random.Generator, r: int = 1) -> int:
        self.apply_local("fourier", [wire], r)
        return self.measure(wire, rng)

    def measure_many(self, wires, rng) -> list[int]:
        """Measure each wire in order (same statistics as repeated ``measure``).

        One uniform draw is consumed per wire whether or not its outcome is
        random.
        """
        p = self.p
        wires = list(wires)
        if len(set(wires)) != len(wires):
            raise ValueError("wires must be distinct")
        draws = rng.integers(p, size=len(wires))
        out = {}
        for c, items in self._groups(wires):
            idx = [i for i, _ in items]
            cols = np.array([j for _, j in items], np.int64)
            res, alive = measure_batch_kernel(c.x, c.z, c.r, cols, p, draws[idx])
            keep = np.ones(c.m, bool)
            keep[cols] = False
            if keep.any():
                c.x, c.z, c.r = compact_kernel(c.x, c.z, c.r, alive, keep)
                c.wires = [w for w, k in zip(c.wires, keep) if k]
                c.col = {w: i for i, w in enumerate(c.wires)}
            for i, o in zip(idx, res):
                w = wires[i]
                single = _Cluster.zero(w)
                single.r[1] = (-int(o)) % p
                self._of[w] = single
                out[i] = int(o)
        return [out[i] for i in range(len(wires))]

    # -------------------------------------------------------------- queries
    def _local(self, op: PauliOperator, wires):
        """Split op into per-cluster (cluster, cols, x, z) pieces."""
        a, b = op.x, op.z
        for c, items in self._groups(wires):
            idx = [i for i, _ in items]
            cols = [j for _, j in items]
            x = np.zeros(c.m, np.int64)
            z = np.zeros(c.m, np.int64)
            x[cols] = a[idx]
            z[cols] = b[idx]
            yield c, x, z

    def stabilizer_phase(self, op: PauliOperator, wires=None):
        """theta with omega^theta * op in the stabilizer group, else None."""
        p = self.p
        wires = self.wires if wires is None else list(wires)
        theta = 0
        for c, x, z in self._local(op, wires):
            if not (x.any() or z.any()):
                continue
            m = c.m
            comm = (c.x[m:] @ z - c.z[m:] @ x) % p
            if comm.any():
                return None
            coef = (c.x[:m] @ z - c.z[:m] @ x) % p
            gx, gz, s = product_phase(c.x[m:], c.z[m:], c.r[m:], coef, p)
            if (gx != x % p).any() or (gz != z % p).any():
                return None
            theta += s
        # op = omega^{r} prod P_c and omega^{s_c} P_c is in the group
        return (theta - op.phase_exp) % p

    def stabilizes(self, op: PauliOperator, wires=None) -> bool:
        return self.stabilizer_phase(op, wires) == 0

    def expectation(self, op: PauliOperator, wires=None) -> complex:
        theta = self.stabilizer_phase(op, wires)
        if theta is None:
            return 0j
        return complex(np.exp(-2j * np.pi * theta / self.p))

    def generators(self, wires=None):
        """Stabilizer generators of the whole clusters covering ``wires``.

        Returns (wire_list, x, z, r) with columns ordered as wire_list.
        """
        wires = self.wires if wires is None else list(wires)
        clusters = {}
        for w in wires:
            clusters[id(self._of[w])] = self._of[w]
        all_w = [w for c in clusters.values() for w in c.wires]
        pos = {w: i for i, w in enumerate(all_w)}
        n = len(all_w)
        xs, zs, rs = [], [], []
        for c in clusters.values():
            sx, sz, sr = c.stabilizers()
            cols = [pos[w] for w in c.wires]
            bx = np.zeros((c.m, n), np.int64)
            bz = np.zeros((c.m, n), np.int64)
            bx[:, cols] = sx
            bz[:, cols] = sz
            xs.append(bx)
            zs.append(bz)
            rs.append(sr)
        return all_w, np.vstack(xs), np.vstack(zs), np.concatenate(rs)

    def reduced_group(self, wires):
        """Canonical generators of the stabilizer subgroup supported on ``wires``.

        Together with the wire order this determines the reduced density
        matrix exactly: rho_A = p^{-|A|} sum over the group elements.
        """
        p = self.p
        wires = list(wires)
        rows_x, rows_z, rows_r = [], [], []
        pos = {w: i for i, w in enumerate(wires)}
        seen = set()
        for w in wires:
            c = self._of[w]
            if id(c) in seen:
                continue
            seen.add(id(c))
            sx, sz, sr = c.stabilizers()
            inside = [j for j, v in enumerate(c.wires) if v in pos]
            outside = [j for j, v in enumerate(c.wires) if v not in pos]
            if outside:
                sub = np.hstack([sx[:, outside], sz[:, outside]])
                combos = linalg.nullspace(sub.T, p)
            else:
                combos = np.eye(c.m, dtype=np.int64)
            cols = [pos[c.wires[j]] for j in inside]
            for cvec in combos:
                gx, gz, ph = product_phase(sx, sz, sr, cvec, p)
                bx = np.zeros(len(wires), np.int64)
                bz = np.zeros(len(wires), np.int64)
                bx[cols] = gx[inside]
                bz[cols] = gz[inside]
                rows_x.append(bx)
                rows_z.append(bz)
                rows_r.append(ph)
        n = len(wires)
        if not rows_x:
            return np.zeros((0, 2 * n), np.int64), np.zeros(0, np.int64)
        return canonical_group(np.array(rows_x), np.array(rows_z), np.array(rows_r), p)

    def fidelity_with(self, wires, target: StabilizerState, target_wires) -> float:
        """Fidelity of the reduced state on ``wires`` with a pure stabilizer state.

        With H the elements of the reduced group that are (up to phase) in
        the target group, the fidelity is |H| / p^n when the phases agree on
        H and 0 otherwise.
        """
        p = self.p
        target_wires = list(target_wires)
        t_w, tx, tz, tr = target.generators(target_wires)
        if sorted(t_w) != sorted(target_wires):
            raise ValueError("target wires must form a pure state")
        order = [target_wires.index(w) for w in t_w]
        gx = np.zeros_like(tx)
        gz = np.zeros_like(tz)
        gx[:, order] = tx
        gz[:, order] = tz
        sym, ph = self.reduced_group(wires)
        k = _intersection_size(sym, ph, gx, gz, tr, p)
        return 0.0 if k is None else float(p) ** (k - len(target_wires))

    def validate(self) -> None:
        """Raise AssertionError unless every cluster is a valid tableau."""
        p = self.p
        seen = set()
        for c in self._of.values():
            if id(c) in seen:
                continue
            seen.add(id(c))
            m = c.m
            om = (c.x @ c.z.T - c.z @ c.x.T) % p
            want = np.zeros((2 * m, 2 * m), np.int64)
            want[:m, m:] = np.eye(m, dtype=np.int64)
            want[m:, :m] = (-np.eye(m, dtype=np.int64)) % p
            assert (om[m:, m:] == 0).all(), "stabilizers do not commute"
            assert (om[:m, m:] == want[:m, m:]).all(), "destabilizers not dual"

    def factor(self, wires) -> bool:
        """Split ``wires`` into their own cluster if they form a pure factor.

        Returns False (and changes nothing) when the wires are entangled
        with the rest of their clusters.
        """
        p = self.p
        wires = list(wires)
        n = len(wires)
        sym, ph = self.reduced_group(wires)
        if len(ph) < n:
            return False
        own = {id(self._of[w]): self._of[w] for w in wires}
        rest = [v for c in own.values() for v in c.wires if v not in set(wires)]
        pieces = [(wires, sym, ph)]
        if rest:
            rsym, rph = self.reduced_group(rest)
            if len(rph) < len(rest):
                return False
            pieces.append((rest, rsym, rph))
        for ws, gsym, gph in pieces:
            k = len(ws)
            c = _from_stabilizers(ws, gsym[:, :k], gsym[:, k:], gph, p)
            for v in ws:
                self._of[v] = c
        return True

    def to_dense(self, wires=None) -> np.ndarray:
        """State vector on ``wires`` (must be a union of whole clusters)."""
        from qmpc.sim.dense import vector_from_stabilizers

        wires = self.wires if wires is None else list(wires)
        all_w, xs, zs, rs = self.generators(wires)
        if sorted(all_w) != sorted(wires):
            raise ValueError("wires are entangled with wires outside the list")
        order = [all_w.index(w) for w in wires]
        return vector_from_stabilizers(xs[:, order], zs[:, order], rs, self.p)

    def reduced_density(self, wires) -> np.ndarray:
        """Dense reduced density matrix (small wire sets only)."""
        from qmpc.sim.dense import density_from_group

        sym, ph = self.reduced_group(wires)
        n = len(list(wires))
        return density_from_group(sym[:, :n], sym[:, n:], ph, self.p, n)


@lru_cache(maxsize=256)
def _cached_inverse(raw: bytes, n: int, p: int) -> np.ndarray:
    mat = np.frombuffer(raw, np.int64).reshape(n, n)
    return linalg.inv(mat, p)


def _member_phase(gx, gz, gr, x, z, p):
    """theta with omega^theta X^x Z^z in the group generated by (gx, gz, gr)."""
    sym = np.hstack([gx, gz]) % p
    target = np.concatenate([x, z]) % p
    coef = linalg.solve(sym.T, target, p)
    if coef is None:
        return None
    _, _, s = product_phase(gx, gz, gr, coef, p)
    return s


def _intersection_size(sym, ph, gx, gz, gr, p):
    """log_p of |H| for H = reduced group cap target group, None if phases clash."""
    n = gx.shape[1]
    a = sym % p
    b = np.hstack([gx, gz]) % p
    # c a = e b  <=>  [c, -e] [a; b] = 0
    both = np.vstack([a, (-b) % p])
    null = linalg.nullspace(both.T, p)
    if null.size == 0:
        return 0
    ks = a.shape[0]
    coefs = null[:, :ks]
    rank = linalg.rank(coefs, p) if coefs.size else 0
    ax, az = a[:, :n], a[:, n:]
    for cvec in coefs:
        x, z, s = product_phase(ax, az, ph, cvec, p)
        theta = _member_phase(gx, gz, gr, x, z, p)
        if theta is None or (theta - s) % p:
            return None
    return rank


def _from_stabilizers(wires, sx, sz, sr, p) -> _Cluster:
    """Cluster with the given independent commuting generators.

    Destabilizers D are any solution of <D_i, S_j> = delta_ij.
    """
    m = len(wires)
    k = np.hstack([sz, (-sx) % p]).T  # <D, S_j> = D . k[:, j]
    dest = np.array([linalg.solve(k.T, np.eye(m, dtype=np.int64)[i], p) for i in range(m)])
    x = np.vstack([dest[:, :m], sx]) % p
    z = np.vstack([dest[:, m:], sz]) % p
    r = np.concatenate([np.zeros(m, np.int64), np.asarray(sr, np.int64) % p])
    return _Cluster(wires, x, z, r)
