"""Exact qupit simulators: stabilizer tableau, sparse amplitudes, dense oracle."""

from qmpc.sim.dense import DenseState, OracleTooLarge, trace_distance
from qmpc.sim.gates import GateOp, UnsupportedGate, gate_matrix
from qmpc.sim.oracle import dense_oracle_compare, prepare, random_circuit
from qmpc.sim.pauli import PauliOperator
from qmpc.sim.sparse import SparseState, SupportOverflow
from qmpc.sim.stabilizer import StabilizerState, canonical_group


def apply_gate(state, gate: GateOp):
    """Apply ``gate`` in place and return the state."""
    return state.apply(gate)


def measure_computational(state, wire: int, rng):
    """Born-rule measurement; returns (outcome, state) with the state projected."""
    return state.measure(wire, rng), state


def measure_fourier(state, wire: int, rng, r: int = 1):
    return state.measure_fourier(wire, rng, r), state


def pauli_apply(state, op: PauliOperator, wires=None):
    return state.apply_pauli(op, wires)


__all__ = [
    "DenseState",
    "GateOp",
    "OracleTooLarge",
    "PauliOperator",
    "SparseState",
    "StabilizerState",
    "SupportOverflow",
    "UnsupportedGate",
    "apply_gate",
    "canonical_group",
    "dense_oracle_compare",
    "gate_matrix",
    "measure_computational",
    "measure_fourier",
    "pauli_apply",
    "prepare",
    "random_circuit",
    "trace_distance",
]
