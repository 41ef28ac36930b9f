import numpy as np
import pytest
from scipy import stats

from qmpc.sim import (
    DenseState,
    GateOp,
    OracleTooLarge,
    PauliOperator,
    SparseState,
    StabilizerState,
    SupportOverflow,
    UnsupportedGate,
    apply_gate,
    dense_oracle_compare,
    gate_matrix,
    measure_computational,
    measure_fourier,
    pauli_apply,
    prepare,
    random_circuit,
)
from qmpc.sim.dense import pauli_on_tensor

P = 7


def basis(backend, *vals):
    return prepare(backend, P, list(vals))


@pytest.mark.parametrize("backend", ["tableau", "sparse", "dense"])
def test_gate_examples(backend):
    st = basis(backend, 3)
    apply_gate(st, GateOp("shift", (0,), 1))
    assert st.measure(0, np.random.default_rng(0)) == 4
    st = basis(backend, 2, 3)
    apply_gate(st, GateOp("sum", (0, 1)))
    rng = np.random.default_rng(0)
    assert (st.measure(0, rng), st.measure(1, rng)) == (2, 5)


@pytest.mark.parametrize("backend", ["sparse", "dense"])
def test_toffoli_example(backend):
    st = basis(backend, 2, 3, 1)
    apply_gate(st, GateOp("toffoli", (0, 1, 2)))
    rng = np.random.default_rng(0)
    assert [st.measure(w, rng) for w in range(3)] == [2, 3, 0]


def test_toffoli_on_tableau_rejected():
    with pytest.raises(UnsupportedGate):
        basis("tableau", 0, 0, 0).apply(GateOp("toffoli", (0, 1, 2)))


def test_gate_validation():
    with pytest.raises(ValueError):
        GateOp("sum", (0,))
    with pytest.raises(ValueError):
        GateOp("scalar_mul", (0,), 0)
    with pytest.raises(ValueError):
        GateOp("teleport", (0,))
    assert GateOp("CX", (0, 1)).kind == "sum"


def test_zx_commutation_dense():
    x = PauliOperator((1,), (0,), 0, P).to_dense()
    z = PauliOperator((0,), (1,), 0, P).to_dense()
    omega = np.exp(2j * np.pi / P)
    assert np.allclose(z @ x, omega * x @ z)


def test_pauli_composition_matches_dense():
    rng = np.random.default_rng(3)
    for _ in range(30):
        a = PauliOperator(tuple(rng.integers(0, P, 2)), tuple(rng.integers(0, P, 2)), int(rng.integers(P)), P)
        b = PauliOperator(tuple(rng.integers(0, P, 2)), tuple(rng.integers(0, P, 2)), int(rng.integers(P)), P)
        assert np.allclose((a * b).to_dense(), a.to_dense() @ b.to_dense())
        k = int(rng.integers(P))
        assert np.allclose((a**k).to_dense(), np.linalg.matrix_power(a.to_dense(), k))
        omega = np.exp(2j * np.pi / P)
        assert np.allclose(b.to_dense() @ a.to_dense(), omega ** a.symplectic(b) * a.to_dense() @ b.to_dense())


def test_pauli_order_p_exhaustive():
    for x in range(P):
        for z in range(P):
            op = PauliOperator((x,), (z,), 0, P)
            assert op**P == PauliOperator.identity(1, P)
            assert (op * op) * op == op * (op * op)


def test_pauli_weight_and_support():
    op = PauliOperator((0, 2, 0, 1), (0, 0, 3, 1), 0, P)
    assert op.weight == 3 and op.support == (1, 2, 3)


@pytest.mark.parametrize("kind", ["shift", "phase_shift", "scalar_mul", "fourier", "fourier_inv"])
@pytest.mark.parametrize("scalar", [1, 3])
def test_single_wire_conjugation_exhaustive(kind, scalar):
    u = gate_matrix(GateOp(kind, (0,), scalar), P)
    for x in range(P):
        for z in range(P):
            st = StabilizerState(P)
            st.alloc(1)
            c = st._of[0]
            c.x[:] = [[0], [x]]
            c.z[:] = [[0], [z]]
            st.apply(GateOp(kind, (0,), scalar))
            got = PauliOperator((c.x[1, 0],), (c.z[1, 0],), c.r[1], P).to_dense()
            want = u @ PauliOperator((x,), (z,), 0, P).to_dense() @ u.conj().T
            assert np.allclose(got, want)


def test_sum_conjugation():
    u = gate_matrix(GateOp("sum", (0, 1), 2), P)
    for xa, za in [(1, 0), (0, 1), (2, 3)]:
        st = StabilizerState(P)
        st.alloc(2)
        st._join([0, 1])
        c = st._of[0]
        c.x[2] = [xa, 0]
        c.z[2] = [za, 0]
        st.apply(GateOp("sum", (0, 1), 2))
        got = PauliOperator(tuple(c.x[2]), tuple(c.z[2]), c.r[2], P).to_dense()
        want = u @ PauliOperator((xa, 0), (za, 0), 0, P).to_dense() @ u.conj().T
        assert np.allclose(got, want)


def test_fourier_conjugates_x_to_z():
    f = gate_matrix(GateOp("fourier", (0,)), P)
    x = PauliOperator((1,), (0,), 0, P).to_dense()
    z = PauliOperator((0,), (1,), 0, P).to_dense()
    assert np.allclose(f @ x @ f.conj().T, z)
    st = StabilizerState(P)
    st.alloc(1)
    st.apply(GateOp("fourier", (0,)))
    # |0> is fixed by Z; after F the state is fixed by X
    assert st.stabilizes(PauliOperator((1,), (0,), 0, P))


@pytest.mark.parametrize("backend", ["tableau", "sparse", "dense"])
def test_measure_eigenstate(backend):
    st = basis(backend, 5)
    b, st = measure_computational(st, 0, np.random.default_rng(0))
    assert b == 5


@pytest.mark.parametrize("backend", ["tableau", "sparse", "dense"])
def test_fourier_measurement_conventions(backend):
    rng = np.random.default_rng(1)
    st = basis(backend, 0)
    st.apply(GateOp("fourier", (0,)))
    b, _ = measure_fourier(st, 0, rng)
    assert b == 0  # F maps sum_a |a> to |0>
    # X|psi> = omega |psi> for |psi> = F^dag |1>; the Fourier outcome is 1
    st = basis(backend, 1)
    st.apply(GateOp("fourier_inv", (0,)))
    x = PauliOperator((1,), (0,), 0, P).to_dense()
    if backend == "dense":
        v = st.to_vector()
        assert np.allclose(x @ v, np.exp(2j * np.pi / P) * v)
    assert measure_fourier(st, 0, rng)[0] == 1
    # a Z eigenstate has a uniform Fourier-basis outcome
    outs = {measure_fourier(basis(backend, 1), 0, rng)[0] for _ in range(80)}
    assert len(outs) > 3


@pytest.mark.parametrize("backend", ["tableau", "sparse"])
def test_uniform_measurement_chi_square(backend):
    rng = np.random.default_rng(11)
    counts = np.zeros(P)
    for _ in range(10_000):
        st = basis(backend, 0)
        st.apply(GateOp("fourier", (0,)))
        counts[st.measure(0, rng)] += 1
    chi2 = ((counts - 10_000 / P) ** 2 / (10_000 / P)).sum()
    # chi-square with 6 dof: mean 6, sd sqrt(12); 5 sigma bound
    assert chi2 < 6 + 5 * np.sqrt(12)
    assert stats.chisquare(counts).pvalue > 1e-6


@pytest.mark.parametrize("backend", ["tableau", "sparse", "dense"])
def test_bell_pair_measurement(backend):
    rng = np.random.default_rng(5)
    seen = set()
    for _ in range(60):
        st = basis(backend, 0, 0)
        st.apply(GateOp("fourier", (0,)))
        st.apply(GateOp("sum", (0, 1)))
        a = st.measure(0, rng)
        assert st.measure(1, rng) == a
        seen.add(a)
    assert len(seen) > 3


@pytest.mark.parametrize("backend", ["tableau", "sparse", "dense"])
def test_pauli_apply_roundtrip(backend):
    st = basis(backend, 2, 4)
    pauli_apply(st, PauliOperator.identity(2, P))
    x = PauliOperator((1, 0), (0, 0), 0, P)
    pauli_apply(st, x)
    pauli_apply(st, x ** (P - 1))
    rng = np.random.default_rng(0)
    assert (st.measure(0, rng), st.measure(1, rng)) == (2, 4)


def test_fourier_x_conjugation_on_tableau():
    st = basis("tableau", 0)
    st.apply(GateOp("fourier", (0,)))
    st.apply_pauli(PauliOperator((0,), (1,), 0, P))  # Z on F|0> is F X|0> = F|1>
    st.apply(GateOp("fourier_inv", (0,)))
    assert st.measure(0, np.random.default_rng(0)) == 1


def test_empty_circuit_deviation_zero():
    assert dense_oracle_compare([], [1, 2], P) == pytest.approx(0, abs=1e-12)


def test_random_clifford_circuits_against_dense():
    rng = np.random.default_rng(2024)
    worst = max(
        dense_oracle_compare(random_circuit(rng, P, 4, 12), list(rng.integers(0, P, 4)), P)
        for _ in range(40)
    )
    assert worst < 1e-9


def test_random_toffoli_circuits_against_dense():
    rng = np.random.default_rng(99)
    worst = max(
        dense_oracle_compare(random_circuit(rng, P, 3, 10, toffoli=True), list(rng.integers(0, P, 3)), P)
        for _ in range(20)
    )
    assert worst < 1e-9


def test_tableau_measurement_matches_dense_projection():
    rng = np.random.default_rng(7)
    for _ in range(60):
        circ = random_circuit(rng, P, 4, 10)
        t = prepare("tableau", P, [0] * 4)
        d = prepare("dense", P, [0] * 4)
        for g in circ:
            t.apply(g)
            d.apply(g)
        for w in (2, 0, 3):
            probs = d.probabilities([w])
            b = t.measure(w, rng)
            assert probs[b] > 1e-9
            assert np.isclose(probs.max(), 1) or np.allclose(probs, 1 / P)
            mask = np.zeros(P)
            mask[b] = 1
            shape = [1] * 4
            shape[w] = P
            d.psi = d.psi * mask.reshape(shape)
            d.psi /= np.linalg.norm(d.psi)
            t.validate()
            wires, xs, zs, rs = t.generators()
            order = [wires.index(v) for v in t.wires]
            for x, z, r in zip(xs[:, order], zs[:, order], rs):
                assert np.allclose(pauli_on_tensor(d.psi, x, z, int(r), P), d.psi)


def test_clusters_split_after_measurement():
    st = basis("tableau", 0, 0, 0)
    st.apply(GateOp("fourier", (0,)))
    st.apply(GateOp("sum", (0, 1)))
    st.apply(GateOp("sum", (1, 2)))
    assert len(st.cluster(0)) == 3
    st.measure(1, np.random.default_rng(0))
    assert st.cluster(1) == [1]
    st.discard([1])
    assert 1 not in st.wires


def test_discard_entangled_rejected():
    st = basis("tableau", 0, 0)
    st.apply(GateOp("fourier", (0,)))
    st.apply(GateOp("sum", (0, 1)))
    with pytest.raises(ValueError):
        st.discard([0])


def test_expectation_and_reduced_density_against_dense():
    rng = np.random.default_rng(4)
    for _ in range(20):
        circ = random_circuit(rng, P, 3, 10)
        t = prepare("tableau", P, [0] * 3)
        d = prepare("dense", P, [0] * 3)
        for g in circ:
            t.apply(g)
            d.apply(g)
        rho_t = t.reduced_density([2, 0])
        rho_d = d.reduced_density([2, 0])
        assert np.allclose(rho_t, rho_d)
        op = PauliOperator(tuple(rng.integers(0, P, 3)), tuple(rng.integers(0, P, 3)), 0, P)
        v = d.to_vector()
        assert np.isclose(t.expectation(op), np.vdot(v, op.to_dense() @ v))


def test_fidelity_with_stabilizer_target():
    st = basis("tableau", 0, 0)
    st.apply(GateOp("fourier", (0,)))
    tgt = basis("tableau", 0)
    tgt.apply(GateOp("fourier", (0,)))
    assert st.fidelity_with([0], tgt, [0]) == 1.0
    assert st.fidelity_with([1], tgt, [0]) == pytest.approx(1 / P)
    st.apply(GateOp("sum", (0, 1)))
    assert st.fidelity_with([0], tgt, [0]) == pytest.approx(1 / P)
    one = basis("tableau", 1)
    assert basis("tableau", 0).fidelity_with([0], one, [0]) == 0.0


def test_sparse_fourier_cap():
    st = SparseState(P, cap=20)
    st.alloc(2)
    st.apply(GateOp("fourier", (0,)))
    with pytest.raises(SupportOverflow):
        st.apply(GateOp("fourier", (1,)))


def test_sparse_norm_preserved():
    rng = np.random.default_rng(8)
    st = prepare("sparse", P, [1, 2, 3])
    for g in random_circuit(rng, P, 3, 30, toffoli=True):
        st.apply(g)
        assert abs(st.norm - 1) < 1e-9


def test_dense_size_guard():
    with pytest.raises(OracleTooLarge):
        DenseState(11).alloc(8)


def test_seeded_outcomes_reproducible_across_backends():
    outs = []
    for backend in ("tableau", "sparse", "dense"):
        rng = np.random.default_rng(42)
        st = basis(backend, 3, 0)
        st.apply(GateOp("sum", (0, 1), 2))
        outs.append((st.measure(0, rng), st.measure(1, rng)))
    assert outs[0] == outs[1] == outs[2] == (3, 6)
