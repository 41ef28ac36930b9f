"""The qupit gate set and its action on basis states and dense matrices."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

ARITY = {
    "shift": 1,  # X^c
    "phase_shift": 1,  # Z^c
    "scalar_mul": 1,  # S_c |a> = |c a>
    "fourier": 1,  # F_r |a> = p^{-1/2} sum_b omega^{r a b} |b>
    "fourier_inv": 1,  # F_r^{-1}
    "sum": 2,  # |a, b> -> |a, b + c a>
    "toffoli": 3,  # |a, b, d> -> |a, b, d + c a b>
}

ALIASES = {
    "x": "shift",
    "z": "phase_shift",
    "s": "scalar_mul",
    "mul": "scalar_mul",
    "f": "fourier",
    "finv": "fourier_inv",
    "cx": "sum",
    "sum": "sum",
    "ccx": "toffoli",
}

CLIFFORD = frozenset(k for k in ARITY if k != "toffoli")


class UnsupportedGate(Exception):
    """The backend cannot apply this gate exactly."""


@dataclass(frozen=True)
class GateOp:
    kind: str
    wires: tuple[int, ...]
    scalar: int = 1

    def __post_init__(self):
        kind = self.kind.lower().replace("-", "_")
        kind = ALIASES.get(kind, kind)
        if kind not in ARITY:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        object.__setattr__(self, "kind", kind)
        wires = tuple(int(w) for w in self.wires)
        object.__setattr__(self, "wires", wires)
        if len(wires) != ARITY[kind]:
            raise ValueError(f"{kind} acts on {ARITY[kind]} wires, got {len(wires)}")
        if len(set(wires)) != len(wires):
            raise ValueError("gate wires must be distinct")
        if kind in ("scalar_mul", "fourier", "fourier_inv") and self.scalar == 0:
            raise ValueError(f"{kind} needs a nonzero scalar")

    @property
    def is_clifford(self) -> bool:
        return self.kind in CLIFFORD

    def inverse(self, p: int) -> GateOp:
        k, c = self.kind, self.scalar
        if k == "scalar_mul":
            return GateOp(k, self.wires, pow(c, -1, p))
        if k == "fourier":
            return GateOp("fourier_inv", self.wires, c)
        if k == "fourier_inv":
            return GateOp("fourier", self.wires, c)
        return GateOp(k, self.wires, (-c) % p)


def shift(w, c=1):
    return GateOp("shift", (w,), c)


def phase_shift(w, c=1):
    return GateOp("phase_shift", (w,), c)


def scalar_mul(w, c):
    return GateOp("scalar_mul", (w,), c)


def fourier(w, r=1):
    return GateOp("fourier", (w,), r)


def fourier_inv(w, r=1):
    return GateOp("fourier_inv", (w,), r)


def sum_gate(a, b, c=1):
    return GateOp("sum", (a, b), c)


def toffoli(a, b, d, c=1):
    return GateOp("toffoli", (a, b, d), c)


def basis_action(kind: str, scalar: int, vals: np.ndarray, p: int) -> tuple[np.ndarray, np.ndarray]:
    """Permutation-with-phase gates on rows of basis values.

    ``vals`` has one column per gate wire.  Returns new values and the
    omega exponents picked up by each row.
    """
    vals = vals.copy()
    phase = np.zeros(vals.shape[0], dtype=np.int64)
    if kind == "shift":
        vals[:, 0] = (vals[:, 0] + scalar) % p
    elif kind == "phase_shift":
        phase = scalar * vals[:, 0] % p
    elif kind == "scalar_mul":
        vals[:, 0] = vals[:, 0] * scalar % p
    elif kind == "sum":
        vals[:, 1] = (vals[:, 1] + scalar * vals[:, 0]) % p
    elif kind == "toffoli":
        vals[:, 2] = (vals[:, 2] + scalar * vals[:, 0] * vals[:, 1]) % p
    else:
        raise ValueError(f"{kind} is not a basis permutation")
    return vals, phase


def fourier_matrix(p: int, r: int = 1) -> np.ndarray:
    omega = np.exp(2j * np.pi / p)
    a = np.arange(p)
    return omega ** (r * np.outer(a, a) % p) / np.sqrt(p)


def gate_matrix(gate: GateOp, p: int) -> np.ndarray:
    """Dense unitary on the gate's own wires (first wire most significant)."""
    if gate.kind == "fourier":
        return fourier_matrix(p, gate.scalar)
    if gate.kind == "fourier_inv":
        return fourier_matrix(p, -gate.scalar)
    k = ARITY[gate.kind]
    basis = np.array(np.unravel_index(np.arange(p**k), (p,) * k)).T
    out, phase = basis_action(gate.kind, gate.scalar, basis, p)
    cols = np.arange(p**k)
    rows = np.ravel_multi_index(out.T, (p,) * k)
    u = np.zeros((p**k, p**k), dtype=complex)
    u[rows, cols] = np.exp(2j * np.pi * phase / p)
    return u
