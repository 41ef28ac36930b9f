"""Generalized Pauli operators omega^r X^x Z^z on qupits."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class PauliOperator:
    """omega^phase_exp * (X^{x_1} Z^{z_1}) (x) ... (x) (X^{x_m} Z^{z_m}).

    X is written to the left of Z on every wire.  Exponent vectors are stored
    as tuples of residues so the operator is hashable.
    """

    x_exps: tuple[int, ...]
    z_exps: tuple[int, ...]
    phase_exp: int
    p: int

    def __post_init__(self):
        x = tuple(int(v) % self.p for v in self.x_exps)
        z = tuple(int(v) % self.p for v in self.z_exps)
        if len(x) != len(z):
            raise ValueError("x and z exponent vectors differ in length")
        object.__setattr__(self, "x_exps", x)
        object.__setattr__(self, "z_exps", z)
        object.__setattr__(self, "phase_exp", int(self.phase_exp) % self.p)

    @classmethod
    def identity(cls, m: int, p: int) -> PauliOperator:
        return cls((0,) * m, (0,) * m, 0, p)

    @classmethod
    def single(cls, m: int, p: int, wire: int, x: int = 0, z: int = 0) -> PauliOperator:
        xs = [0] * m
        zs = [0] * m
        xs[wire], zs[wire] = x, z
        return cls(tuple(xs), tuple(zs), 0, p)

    @property
    def m(self) -> int:
        return len(self.x_exps)

    @property
    def x(self) -> np.ndarray:
        return np.array(self.x_exps, dtype=np.int64)

    @property
    def z(self) -> np.ndarray:
        return np.array(self.z_exps, dtype=np.int64)

    @property
    def weight(self) -> int:
        return sum(1 for a, b in zip(self.x_exps, self.z_exps) if a or b)

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(i for i, (a, b) in enumerate(zip(self.x_exps, self.z_exps)) if a or b)

    def __mul__(self, other: PauliOperator) -> PauliOperator:
        # (X^a Z^b)(X^c Z^d) = omega^{b c} X^{a+c} Z^{b+d}
        cross = int(self.z @ other.x)
        return PauliOperator(
            tuple(self.x + other.x),
            tuple(self.z + other.z),
            self.phase_exp + other.phase_exp + cross,
            self.p,
        )

    def __pow__(self, k: int) -> PauliOperator:
        k %= self.p
        xz = int(self.x @ self.z)
        phase = k * self.phase_exp + xz * (k * (k - 1) // 2)
        return PauliOperator(tuple(k * self.x), tuple(k * self.z), phase, self.p)

    def inverse(self) -> PauliOperator:
        return self ** (self.p - 1)

    def symplectic(self, other: PauliOperator) -> int:
        """<P, Q> = x_P . z_Q - z_P . x_Q, so that Q P = omega^{<P,Q>} P Q."""
        return int(self.x @ other.z - self.z @ other.x) % self.p

    def commutes(self, other: PauliOperator) -> bool:
        return self.symplectic(other) == 0

    def restrict(self, wires) -> PauliOperator:
        wires = list(wires)
        return PauliOperator(
            tuple(self.x[wires]), tuple(self.z[wires]), self.phase_exp, self.p
        )

    def to_dense(self) -> np.ndarray:
        p = self.p
        omega = np.exp(2j * np.pi / p)
        shift = np.roll(np.eye(p), 1, axis=0)  # X|a> = |a+1>
        clock = np.diag(omega ** np.arange(p))  # Z|a> = omega^a |a>
        out = np.array([[omega**self.phase_exp]], dtype=complex)
        for a, b in zip(self.x_exps, self.z_exps):
            local = np.linalg.matrix_power(shift, a) @ np.linalg.matrix_power(clock, b)
            out = np.kron(out, local)
        return out

    def __str__(self) -> str:
        terms = []
        for i, (a, b) in enumerate(zip(self.x_exps, self.z_exps)):
            if a or b:
                s = (f"X{a}" if a else "") + (f"Z{b}" if b else "")
                terms.append(f"{s}[{i}]")
        body = " ".join(terms) or "I"
        return f"w^{self.phase_exp} {body}" if self.phase_exp else body
