"""Cross-checks of the tableau and sparse backends against dense vectors."""

from __future__ import annotations

import numpy as np

from qmpc.sim.dense import MAX_DIM, DenseState, OracleTooLarge, pauli_on_tensor
from qmpc.sim.gates import GateOp
from qmpc.sim.sparse import SparseState
from qmpc.sim.stabilizer import StabilizerState


def prepare(backend: str, p: int, inputs):
    """Fresh state with one wire per input basis value."""
    cls = {"tableau": StabilizerState, "sparse": SparseState, "dense": DenseState}[backend]
    st = cls(p)
    wires = st.alloc(len(inputs))
    for w, a in zip(wires, inputs):
        if a % p:
            st.apply(GateOp("shift", (w,), a))
    return st


def dense_oracle_compare(circuit, inputs, p: int, backends=None) -> float:
    """Largest disagreement between the dense run and the other backends.

    For the sparse backend this is the largest amplitude-probability
    difference over the computational basis; for the tableau it also
    includes how far each stabilizer generator is from fixing the dense
    state.  Global phases never enter.
    """
    circuit = list(circuit)
    m = len(inputs)
    if p**m > MAX_DIM:
        raise OracleTooLarge(f"{p}^{m} amplitudes")
    if backends is None:
        backends = ["sparse"]
        if all(g.is_clifford for g in circuit):
            backends.append("tableau")
    dense = prepare("dense", p, inputs)
    for g in circuit:
        dense.apply(g)
    ref = dense.to_vector()
    ref_probs = np.abs(ref) ** 2
    worst = 0.0
    for name in backends:
        st = prepare(name, p, inputs)
        for g in circuit:
            st.apply(g)
        if name == "sparse":
            worst = max(worst, float(np.abs(st.probabilities() - ref_probs).max()))
            overlap = abs(np.vdot(st.to_dense(), ref))
            worst = max(worst, 1 - overlap)
        else:
            wires, xs, zs, rs = st.generators()
            order = [wires.index(w) for w in st.wires]
            psi = ref.reshape((p,) * m)
            for x, z, r in zip(xs[:, order], zs[:, order], rs):
                moved = pauli_on_tensor(psi, x, z, int(r), p)
                worst = max(worst, float(np.abs(moved - psi).max()))
            probs = np.abs(st.to_dense()) ** 2
            worst = max(worst, float(np.abs(probs - ref_probs).max()))
    return worst


def random_circuit(rng, p: int, m: int, depth: int, toffoli: bool = False) -> list[GateOp]:
    kinds = ["shift", "phase_shift", "scalar_mul", "fourier", "fourier_inv", "sum"]
    if toffoli and m >= 3:
        kinds.append("toffoli")
    out = []
    for _ in range(depth):
        kind = kinds[rng.integers(len(kinds))]
        arity = {"sum": 2, "toffoli": 3}.get(kind, 1)
        wires = tuple(int(w) for w in rng.choice(m, size=arity, replace=False))
        scalar = int(rng.integers(1, p))
        out.append(GateOp(kind, wires, scalar))
    if toffoli and m >= 3 and not any(g.kind == "toffoli" for g in out):
        wires = tuple(int(w) for w in rng.choice(m, size=3, replace=False))
        out.insert(int(rng.integers(len(out) + 1)), GateOp("toffoli", wires, 1))
    return out
