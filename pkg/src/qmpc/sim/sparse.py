"""Sparse amplitude maps: basis strings -> complex amplitudes.

Terms are held as an (N, m) integer array of basis values and a length-N
amplitude vector, so permutation gates are single vectorized updates.
"""

from __future__ import annotations

import numpy as np

from qmpc.sim.gates import GateOp, basis_action
from qmpc.sim.pauli import PauliOperator

PRUNE = 1e-12
SUPPORT_CAP = 10**6


class SupportOverflow(Exception):
    """The number of terms would exceed the configured cap."""


class SparseState:
    backend = "sparse"

    def __init__(self, p: int, cap: int = SUPPORT_CAP, prune: float = PRUNE):
        self.p = p
        self.cap = cap
        self.prune = prune
        self.vals = np.zeros((1, 0), np.int64)
        self.amps = np.ones(1, complex)
        self._wires: list[int] = []
        self._next = 0

    @classmethod
    def from_terms(cls, p: int, terms: dict, **kw) -> SparseState:
        """State from {basis tuple: amplitude}; normalized."""
        st = cls(p, **kw)
        keys = list(terms)
        m = len(keys[0])
        st._wires = list(range(m))
        st._next = m
        st.vals = np.array(keys, np.int64).reshape(len(keys), m) % p
        st.amps = np.array([terms[k] for k in keys], complex)
        st._canon()
        st.normalize()
        return st

    @classmethod
    def basis(cls, p: int, values: dict, next_id: int | None = None, **kw) -> SparseState:
        """Product basis state {wire id: value}, keeping the given wire ids."""
        st = cls(p, **kw)
        st._wires = [int(w) for w in values]
        st._next = max(st._wires, default=-1) + 1 if next_id is None else next_id
        st.vals = np.array([[int(v) % p for v in values.values()]], np.int64).reshape(1, len(values))
        st.amps = np.ones(1, complex)
        return st

    @classmethod
    def from_dense(cls, vec, p: int, **kw) -> SparseState:
        vec = np.asarray(vec, complex).reshape(-1)
        m = int(round(np.log(vec.size) / np.log(p)))
        nz = np.nonzero(np.abs(vec) > PRUNE)[0]
        st = cls(p, **kw)
        st._wires = list(range(m))
        st._next = m
        st.vals = np.array(np.unravel_index(nz, (p,) * m), np.int64).T.reshape(len(nz), m)
        st.amps = vec[nz].astype(complex)
        st.normalize()
        return st

    # ----------------------------------------------------------------- wires
    @property
    def wires(self) -> list[int]:
        return list(self._wires)

    @property
    def num_wires(self) -> int:
        return len(self._wires)

    @property
    def num_terms(self) -> int:
        return len(self.amps)

    def alloc(self, count: int = 1) -> list[int]:
        out = list(range(self._next, self._next + count))
        self._next += count
        self.vals = np.hstack([self.vals, np.zeros((self.num_terms, count), np.int64)])
        self._wires.extend(out)
        return out

    def factor(self, wires) -> bool:
        """Cluster bookkeeping is a tableau concept; always a no-op here."""
        return False

    def copy(self) -> SparseState:
        new = SparseState(self.p, self.cap, self.prune)
        new.vals = self.vals.copy()
        new.amps = self.amps.copy()
        new._wires = list(self._wires)
        new._next = self._next
        return new

    def _cols(self, wires) -> list[int]:
        index = {w: i for i, w in enumerate(self._wires)}
        return [index[w] for w in wires]

    def discard(self, wires) -> None:
        """Remove wires whose value is the same in every term."""
        cols = self._cols(wires)
        for c, w in zip(cols, wires):
            if (self.vals[:, c] != self.vals[0, c]).any():
                raise ValueError(f"wire {w} is not in a basis state")
        keep = [i for i in range(self.num_wires) if i not in cols]
        self.vals = self.vals[:, keep]
        self._wires = [self._wires[i] for i in keep]

    def tensor(self, other: SparseState) -> list[int]:
        """Append ``other`` as fresh wires; returns their new ids."""
        if self.num_terms * other.num_terms > self.cap:
            raise SupportOverflow("tensor product exceeds the support cap")
        n1, n2 = self.num_terms, other.num_terms
        vals = np.hstack([np.repeat(self.vals, n2, axis=0), np.tile(other.vals, (n1, 1))])
        self.amps = np.repeat(self.amps, n2) * np.tile(other.amps, n1)
        self.vals = vals
        out = list(range(self._next, self._next + other.num_wires))
        self._next += other.num_wires
        self._wires.extend(out)
        return out

    # ---------------------------------------------------------------- basics
    def normalize(self) -> None:
        self.amps = self.amps / np.linalg.norm(self.amps)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def _canon(self) -> None:
        """Merge duplicate basis strings and prune tiny amplitudes."""
        if self.num_wires == 0:
            self.amps = np.array([self.amps.sum()])
            self.vals = np.zeros((1, 0), np.int64)
            return
        if self.p ** self.num_wires < 2**62:
            keys = np.ravel_multi_index(self.vals.T, (self.p,) * self.num_wires)
            uniq, first, inv = np.unique(keys, return_index=True, return_inverse=True)
        else:
            _, first, inv = np.unique(self.vals, axis=0, return_index=True, return_inverse=True)
        inv = inv.reshape(-1)
        amps = np.zeros(len(first), complex)
        np.add.at(amps, inv, self.amps)
        vals = self.vals[first]
        keep = np.abs(amps) > self.prune
        self.vals = vals[keep]
        self.amps = amps[keep]

    def _phase(self, e) -> np.ndarray:
        return np.exp(2j * np.pi * (np.asarray(e) % self.p) / self.p)

    # ----------------------------------------------------------------- gates
    def apply(self, gate: GateOp) -> SparseState:
        if gate.kind in ("fourier", "fourier_inv"):
            r = gate.scalar if gate.kind == "fourier" else -gate.scalar
            self._fourier(self._cols(gate.wires)[0], r)
            return self
        cols = self._cols(gate.wires)
        new, phase = basis_action(gate.kind, gate.scalar, self.vals[:, cols], self.p)
        self.vals[:, cols] = new
        if phase.any():
            self.amps = self.amps * self._phase(phase)
        return self

    def _fourier(self, col: int, r: int) -> None:
        p = self.p
        n = self.num_terms
        if n * p > self.cap:
            raise SupportOverflow(f"Fourier would create {n * p} terms (cap {self.cap})")
        a = self.vals[:, col]
        b = np.arange(p)
        vals = np.repeat(self.vals, p, axis=0)
        vals[:, col] = np.tile(b, n)
        kernel = self._phase(r * np.outer(a, b)) / np.sqrt(p)
        self.amps = (self.amps[:, None] * kernel).reshape(-1)
        self.vals = vals
        self._canon()

    def apply_local(self, kind, wires, scalar=1) -> None:
        wires = list(wires)
        scal = np.broadcast_to(np.asarray(scalar), (len(wires),))
        for w, s in zip(wires, scal):
            self.apply(GateOp(kind, (w,), int(s)))

    def apply_sum(self, controls, targets, scalar=1) -> None:
        p = self.p
        ca, cb = self._cols(controls), self._cols(targets)
        s = np.broadcast_to(np.asarray(scalar, np.int64), (len(ca),))
        if len(set(ca) | set(cb)) < 2 * len(ca):
            for a, b, c in zip(ca, cb, s):
                self.vals[:, b] = (self.vals[:, b] + self.vals[:, a] * c) % p
            return
        self.vals[:, cb] = (self.vals[:, cb] + self.vals[:, ca] * s) % p

    def apply_linear(self, wires, mat) -> None:
        cols = self._cols(wires)
        mat = np.asarray(mat, np.int64) % self.p
        self.vals[:, cols] = self.vals[:, cols] @ mat.T % self.p

    def apply_pauli(self, op: PauliOperator, wires=None) -> SparseState:
        wires = self.wires if wires is None else list(wires)
        cols = self._cols(wires)
        phase = self.vals[:, cols] @ op.z + op.phase_exp
        self.amps = self.amps * self._phase(phase)
        self.vals[:, cols] = (self.vals[:, cols] + op.x) % self.p
        return self

    # ----------------------------------------------------------- measurement
    def probabilities(self, wires=None) -> np.ndarray:
        wires = self.wires if wires is None else list(wires)
        cols = self._cols(wires)
        keys = np.ravel_multi_index(self.vals[:, cols].T, (self.p,) * len(cols))
        out = np.zeros(self.p ** len(cols))
        np.add.at(out, keys, np.abs(self.amps) ** 2)
        return out

    def measure(self, wire: int, rng: np.random.Generator) -> int:
        col = self._cols([wire])[0]
        probs = np.zeros(self.p)
        np.add.at(probs, self.vals[:, col], np.abs(self.amps) ** 2)
        b = int(rng.choice(self.p, p=probs / probs.sum()))
        keep = self.vals[:, col] == b
        self.vals = self.vals[keep]
        self.amps = self.amps[keep]
        self.normalize()
        return b

    def measure_fourier(self, wire: int, rng, r: int = 1) -> int:
        self.apply(GateOp("fourier", (wire,), r))
        return self.measure(wire, rng)

    def measure_many(self, wires, rng) -> list[int]:
        return [self.measure(w, rng) for w in wires]

    # -------------------------------------------------------------- queries
    def support(self, wires=None) -> set[tuple[int, ...]]:
        wires = self.wires if wires is None else list(wires)
        cols = self._cols(wires)
        return {tuple(int(v) for v in row) for row in self.vals[:, cols]}

    def to_dense(self, wires=None) -> np.ndarray:
        from qmpc.sim.dense import MAX_DIM, OracleTooLarge

        wires = self.wires if wires is None else list(wires)
        if sorted(wires) != sorted(self._wires):
            raise ValueError("to_dense needs every live wire")
        if self.p ** len(wires) > MAX_DIM:
            raise OracleTooLarge("too many wires for a dense vector")
        cols = self._cols(wires)
        out = np.zeros(self.p ** len(wires), complex)
        idx = np.ravel_multi_index(self.vals[:, cols].T, (self.p,) * len(cols))
        np.add.at(out, idx, self.amps)
        return out

    def amplitude_map(self, wires=None) -> dict:
        wires = self.wires if wires is None else list(wires)
        cols = self._cols(wires)
        out: dict = {}
        for row, a in zip(self.vals[:, cols], self.amps):
            key = tuple(int(v) for v in row)
            out[key] = out.get(key, 0) + a
        return out

    def inner(self, other: SparseState, wires=None, other_wires=None) -> complex:
        """<self|other> with wires matched positionally."""
        a = self.amplitude_map(wires)
        b = other.amplitude_map(other_wires)
        return complex(sum(np.conj(v) * b.get(k, 0) for k, v in a.items()))

    def reduced_density(self, wires) -> np.ndarray:
        """Dense reduced density matrix on a few wires."""
        wires = list(wires)
        cols = self._cols(wires)
        rest = [i for i in range(self.num_wires) if i not in cols]
        p = self.p
        dim = p ** len(cols)
        a_idx = np.ravel_multi_index(self.vals[:, cols].T, (p,) * len(cols)) if cols else np.zeros(self.num_terms, int)
        if rest:
            _, env = np.unique(self.vals[:, rest], axis=0, return_inverse=True)
            env = env.reshape(-1)
        else:
            env = np.zeros(self.num_terms, int)
        mat = np.zeros((dim, env.max() + 1), complex)
        np.add.at(mat, (a_idx, env), self.amps)
        return mat @ mat.conj().T


def fused_sum_measure(control: SparseState, target: SparseState, rng, scalar: int = 1):
    """SUM from every wire of ``control`` into ``target`` then measure ``target``.

    Both states must be unentangled with each other and the target is
    measured completely, so the joint state never needs to be formed: the
    outcome is w = x_t + c x_c with x_t, x_c sampled independently, and the
    control keeps amplitudes psi_c(x) psi_t(w - c x).  Returns the measured
    word; ``control`` is updated in place.
    """
    p = control.p
    if control.num_wires != target.num_wires:
        raise ValueError("blocks differ in size")
    probs_c = np.abs(control.amps) ** 2
    probs_t = np.abs(target.amps) ** 2
    i = rng.choice(len(probs_c), p=probs_c / probs_c.sum())
    j = rng.choice(len(probs_t), p=probs_t / probs_t.sum())
    word = (target.vals[j] + scalar * control.vals[i]) % p
    lookup = dict(zip(map(tuple, target.vals.tolist()), target.amps))
    partner = (word - scalar * control.vals) % p
    amp_t = np.array([lookup.get(tuple(row), 0) for row in partner.tolist()], complex)
    control.amps = control.amps * amp_t
    keep = np.abs(control.amps) > control.prune
    control.vals = control.vals[keep]
    control.amps = control.amps[keep]
    control.normalize()
    return [int(v) for v in word]
