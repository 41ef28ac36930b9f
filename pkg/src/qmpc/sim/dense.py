"""Dense state vectors, used as the reference oracle for the other backends."""

from __future__ import annotations

import itertools

import numpy as np

from qmpc.sim.gates import GateOp, gate_matrix
from qmpc.sim.pauli import PauliOperator

MAX_DIM = 2 * 10**7


class OracleTooLarge(Exception):
    """Dense representation would exceed the dimension budget."""


def _omega_pow(p: int, e) -> np.ndarray:
    return np.exp(2j * np.pi * (np.asarray(e) % p) / p)


def pauli_on_tensor(psi: np.ndarray, x, z, phase: int, p: int) -> np.ndarray:
    """omega^phase X^x Z^z applied to a tensor with one axis per wire."""
    out = psi
    a = np.arange(p)
    for axis, (xa, za) in enumerate(zip(x, z)):
        if za % p:
            shape = [1] * psi.ndim
            shape[axis] = p
            out = out * _omega_pow(p, za * a).reshape(shape)
        if xa % p:
            out = np.roll(out, int(xa) % p, axis=axis)
    if phase % p:
        out = out * _omega_pow(p, phase)
    return out


def vector_from_stabilizers(xs, zs, rs, p: int, seed: int = 7) -> np.ndarray:
    """The (unit, arbitrary global phase) state fixed by all generators."""
    n = xs.shape[1]
    if p**n > MAX_DIM:
        raise OracleTooLarge(f"{p}^{n} amplitudes")
    rng = np.random.default_rng(seed)
    psi = rng.normal(size=(p,) * n) + 1j * rng.normal(size=(p,) * n)
    for x, z, r in zip(xs, zs, rs):
        g = PauliOperator(tuple(x), tuple(z), int(r), p)
        acc = psi.copy()
        for k in range(1, p):
            gk = g**k
            acc = acc + pauli_on_tensor(psi, gk.x, gk.z, gk.phase_exp, p)
        psi = acc / p
    norm = np.linalg.norm(psi)
    if norm < 1e-9:
        raise ValueError("generators do not fix a common state")
    return (psi / norm).reshape(-1)


def density_from_group(xs, zs, phases, p: int, n: int) -> np.ndarray:
    """rho = p^{-n} sum of all elements of the group given by generators."""
    if p ** (2 * n) > MAX_DIM:
        raise OracleTooLarge(f"{p}^{n} x {p}^{n} density matrix")
    k = len(phases)
    rho = np.zeros((p**n, p**n), complex)
    gens = [PauliOperator(tuple(x), tuple(z), int(r), p) for x, z, r in zip(xs, zs, phases)]
    for coeffs in itertools.product(range(p), repeat=k):
        g = PauliOperator.identity(n, p)
        for gen, c in zip(gens, coeffs):
            g = g * gen**c
        rho += g.to_dense()
    return rho / p**n


def trace_distance(rho: np.ndarray, sigma: np.ndarray) -> float:
    return float(0.5 * np.abs(np.linalg.eigvalsh(rho - sigma)).sum())


class DenseState:
    """Full amplitude tensor with one axis per live wire."""

    backend = "dense"

    def __init__(self, p: int):
        self.p = p
        self.psi = np.ones((), complex)
        self._wires: list[int] = []
        self._next = 0

    @classmethod
    def from_vector(cls, vec, p: int) -> DenseState:
        vec = np.asarray(vec, complex)
        m = int(round(np.log(vec.size) / np.log(p)))
        st = cls(p)
        st._wires = list(range(m))
        st._next = m
        st.psi = vec.reshape((p,) * m) / np.linalg.norm(vec)
        return st

    @property
    def wires(self) -> list[int]:
        return list(self._wires)

    @property
    def num_wires(self) -> int:
        return len(self._wires)

    def alloc(self, count: int = 1) -> list[int]:
        if self.p ** (len(self._wires) + count) > MAX_DIM:
            raise OracleTooLarge("dense state would be too large")
        out = list(range(self._next, self._next + count))
        self._next += count
        for _ in out:
            zero = np.zeros(self.p, complex)
            zero[0] = 1
            self.psi = np.multiply.outer(self.psi, zero)
        self._wires.extend(out)
        return out

    def factor(self, wires) -> bool:
        """Cluster bookkeeping is a tableau concept; always a no-op here."""
        return False

    def copy(self) -> DenseState:
        new = DenseState(self.p)
        new.psi = self.psi.copy()
        new._wires = list(self._wires)
        new._next = self._next
        return new

    def _axes(self, wires):
        return [self._wires.index(w) for w in wires]

    def apply_matrix(self, u: np.ndarray, wires) -> None:
        axes = self._axes(wires)
        k = len(axes)
        u = u.reshape((self.p,) * (2 * k))
        out = np.tensordot(u, self.psi, axes=(list(range(k, 2 * k)), axes))
        self.psi = np.moveaxis(out, list(range(k)), axes)

    def apply(self, gate: GateOp) -> DenseState:
        self.apply_matrix(gate_matrix(gate, self.p), gate.wires)
        return self

    def apply_local(self, kind, wires, scalar=1) -> None:
        wires = list(wires)
        scal = np.broadcast_to(np.asarray(scalar), (len(wires),))
        for w, s in zip(wires, scal):
            self.apply(GateOp(kind, (w,), int(s)))

    def apply_sum(self, controls, targets, scalar=1) -> None:
        controls = list(controls)
        scal = np.broadcast_to(np.asarray(scalar), (len(controls),))
        for a, b, s in zip(controls, targets, scal):
            self.apply(GateOp("sum", (a, b), int(s)))

    def apply_linear(self, wires, mat) -> None:
        """|y> -> |L y> on the listed wires, as an index permutation."""
        p = self.p
        wires = list(wires)
        k = len(wires)
        mat = np.asarray(mat, np.int64) % p
        axes = self._axes(wires)
        moved = np.moveaxis(self.psi, axes, list(range(k)))
        shape = moved.shape
        flat = moved.reshape(p**k, -1)
        basis = np.array(np.unravel_index(np.arange(p**k), (p,) * k))
        image = np.ravel_multi_index(mat @ basis % p, (p,) * k)
        out = np.empty_like(flat)
        out[image] = flat
        self.psi = np.moveaxis(out.reshape(shape), list(range(k)), axes)

    def apply_pauli(self, op: PauliOperator, wires=None) -> DenseState:
        wires = self.wires if wires is None else list(wires)
        axes = self._axes(wires)
        x = np.zeros(self.num_wires, np.int64)
        z = np.zeros(self.num_wires, np.int64)
        x[axes] = op.x
        z[axes] = op.z
        self.psi = pauli_on_tensor(self.psi, x, z, op.phase_exp, self.p)
        return self

    def probabilities(self, wires=None) -> np.ndarray:
        """Joint outcome distribution of measuring ``wires`` (flattened)."""
        wires = self.wires if wires is None else list(wires)
        probs = np.abs(self.psi) ** 2
        axes = self._axes(wires)
        rest = tuple(i for i in range(self.num_wires) if i not in axes)
        marg = probs.sum(axis=rest) if rest else probs
        order = np.argsort(np.argsort(axes))
        return np.transpose(marg, order).reshape(-1) if marg.ndim else marg.reshape(-1)

    def measure(self, wire: int, rng: np.random.Generator) -> int:
        probs = self.probabilities([wire])
        probs = probs / probs.sum()
        b = int(rng.choice(self.p, p=probs))
        axis = self._axes([wire])[0]
        mask = np.zeros(self.p)
        mask[b] = 1
        shape = [1] * self.psi.ndim
        shape[axis] = self.p
        self.psi = self.psi * mask.reshape(shape)
        self.psi /= np.linalg.norm(self.psi)
        return b

    def measure_fourier(self, wire: int, rng, r: int = 1) -> int:
        self.apply(GateOp("fourier", (wire,), r))
        return self.measure(wire, rng)

    def measure_many(self, wires, rng) -> list[int]:
        return [self.measure(w, rng) for w in wires]

    def to_vector(self, wires=None) -> np.ndarray:
        wires = self.wires if wires is None else list(wires)
        if sorted(wires) != sorted(self._wires):
            raise ValueError("to_vector needs every live wire")
        return np.transpose(self.psi, self._axes(wires)).reshape(-1)

    def reduced_density(self, wires) -> np.ndarray:
        wires = list(wires)
        axes = self._axes(wires)
        rest = [i for i in range(self.num_wires) if i not in axes]
        psi = np.transpose(self.psi, axes + rest).reshape(self.p ** len(axes), -1)
        return psi @ psi.conj().T

    def discard(self, wires) -> None:
        """Trace out wires that are in a product state with the rest."""
        for w in list(wires):
            axis = self._axes([w])[0]
            mat = np.moveaxis(self.psi, axis, 0).reshape(self.p, -1)
            u, s, vh = np.linalg.svd(mat, full_matrices=False)
            if s.size > 1 and s[1] > 1e-9:
                raise ValueError(f"wire {w} is entangled with the rest")
            rest_shape = np.moveaxis(self.psi, axis, 0).shape[1:]
            self.psi = (s[0] * vh[0]).reshape(rest_shape)
            self._wires.remove(w)
