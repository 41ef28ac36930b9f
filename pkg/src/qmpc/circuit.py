"""Logical circuits over the qupit gate set and their text format.

Format, one record per line, ``#`` starts a comment::

    wires 3
    ancillas 1        # optional, extra wires starting in |0>
    sum 0 1 2         # kind, wires, optional scalar (default 1)
    toffoli 0 1 2
    fourier 2

Gate kinds are those of ``qmpc.sim.gates`` (shift, phase_shift,
scalar_mul, fourier, fourier_inv, sum, toffoli) and their aliases.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from qmpc.sim.gates import ALIASES, ARITY, GateOp
from qmpc.sim.sparse import SparseState


class CircuitParseError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


@dataclass
class LogicalCircuit:
    num_wires: int
    gates: list[GateOp] = field(default_factory=list)
    ancillas: int = 0

    def __post_init__(self):
        if self.num_wires < 1 or self.ancillas < 0:
            raise ValueError("need at least one wire and a nonnegative ancilla count")
        for g in self.gates:
            if any(not 0 <= w < self.width for w in g.wires):
                raise ValueError(f"gate {g} uses a wire outside 0..{self.width - 1}")

    @property
    def width(self) -> int:
        return self.num_wires + self.ancillas

    def add(self, kind: str, *wires: int, scalar: int = 1) -> LogicalCircuit:
        g = GateOp(kind, wires, scalar)
        if any(not 0 <= w < self.width for w in g.wires):
            raise ValueError(f"gate {g} uses a wire outside 0..{self.width - 1}")
        self.gates.append(g)
        return self

    @property
    def toffoli_count(self) -> int:
        return sum(g.kind == "toffoli" for g in self.gates)

    @property
    def is_clifford(self) -> bool:
        return all(g.is_clifford for g in self.gates)

    def fourier_after_toffoli(self) -> bool:
        seen = False
        for g in self.gates:
            if g.kind == "toffoli":
                seen = True
            elif seen and g.kind in ("fourier", "fourier_inv"):
                return True
        return False

    def to_text(self) -> str:
        lines = [f"wires {self.num_wires}"]
        if self.ancillas:
            lines.append(f"ancillas {self.ancillas}")
        for g in self.gates:
            lines.append(" ".join([g.kind, *map(str, g.wires), str(g.scalar)]))
        return "\n".join(lines) + "\n"

    def evaluate(self, inputs, p: int) -> dict:
        """Outcome distribution of the unencoded circuit on basis inputs.

        Returns {output tuple: probability} over all ``width`` wires.
        """
        vals = list(inputs) + [0] * self.ancillas
        if len(vals) != self.width:
            raise ValueError(f"need {self.num_wires} inputs")
        st = SparseState.from_terms(p, {tuple(v % p for v in vals): 1.0})
        for g in self.gates:
            st.apply(g)
        probs: dict = {}
        for row, amp in zip(st.vals, st.amps):
            key = tuple(int(v) for v in row)
            probs[key] = probs.get(key, 0.0) + abs(amp) ** 2
        return {k: v for k, v in probs.items() if v > 1e-12}

    def classical_output(self, inputs, p: int) -> tuple[int, ...]:
        """The deterministic output on basis inputs; errors if it is not one."""
        dist = self.evaluate(inputs, p)
        if len(dist) != 1:
            raise ValueError("output is not a basis state")
        return next(iter(dist))


def parse_circuit(text: str) -> LogicalCircuit:
    num_wires = None
    ancillas = 0
    gates: list[tuple[int, GateOp]] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, *rest = line.split()
        head = head.lower()
        try:
            nums = [int(tok) for tok in rest]
        except ValueError:
            raise CircuitParseError(f"non-integer operand in {raw.strip()!r}", lineno) from None
        if head in ("wires", "ancillas"):
            if len(nums) != 1 or nums[0] < 0:
                raise CircuitParseError(f"{head} takes one nonnegative integer", lineno)
            if head == "wires":
                num_wires = nums[0]
            else:
                ancillas = nums[0]
            continue
        kind = ALIASES.get(head.replace("-", "_"), head.replace("-", "_"))
        if kind not in ARITY:
            raise CircuitParseError(f"unknown gate kind {head!r}", lineno)
        arity = ARITY[kind]
        if len(nums) not in (arity, arity + 1):
            raise CircuitParseError(f"{kind} takes {arity} wires and an optional scalar", lineno)
        scalar = nums[arity] if len(nums) > arity else 1
        try:
            gates.append((lineno, GateOp(kind, tuple(nums[:arity]), scalar)))
        except ValueError as exc:
            raise CircuitParseError(str(exc), lineno) from None
    if num_wires is None:
        raise CircuitParseError("missing 'wires' header")
    circ = LogicalCircuit(num_wires, [], ancillas)
    for lineno, g in gates:
        if any(not 0 <= w < circ.width for w in g.wires):
            raise CircuitParseError(f"wire out of range 0..{circ.width - 1}", lineno)
        circ.gates.append(g)
    return circ


def load_circuit(path) -> LogicalCircuit:
    return parse_circuit(Path(path).read_text())
