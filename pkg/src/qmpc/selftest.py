"""Fast invariant suites for every module, run at fixed seeds.

``selftest(inject=name)`` flips one decoded value inside the named suite,
which must then fail while the others pass.
"""

from __future__ import annotations

import itertools

import numpy as np

from qmpc.css import CssCode, decode_D, encode, transversal_apply
from qmpc.field import DecodeFailure, ReedSolomonCode, rs_decode
from qmpc.sim.dense import DenseState
from qmpc.sim.gates import GateOp
from qmpc.sim.oracle import dense_oracle_compare, random_circuit

SUITES = ("field_codes", "pauli_sim", "css_code", "protocol_net", "vqss", "mpqc")


def _flip(value: int, p: int, fault: bool) -> int:
    return (value + 1) % p if fault else value


def codec_suite(p: int = 7, n: int = 5, delta: int = 2, fault: bool = False, seed: int = 0):
    """Roundtrip every codeword and correct every weight-1 error."""
    code = ReedSolomonCode(p, n, delta)
    rng = np.random.default_rng(seed)
    words = corrected = 0
    ok = True
    first = True
    for secret, *rand in itertools.product(range(p), *[range(p)] * delta):
        cw = code.encode(secret, rand)
        got = rs_decode(code, cw).secret
        if first:
            got, first = _flip(got, p, fault), False
        ok &= got == secret
        words += 1
        if code.radius:
            pos = int(rng.integers(n))
            bad = list(cw)
            bad[pos] = (bad[pos] + int(rng.integers(1, p))) % p
            try:
                ok &= rs_decode(code, bad).secret == secret
                corrected += 1
            except DecodeFailure:
                ok = False
    return bool(ok), {"codewords": words, "corrected": corrected}


def sim_suite(fault: bool = False, seed: int = 0):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for i in range(20):
        circ = random_circuit(rng, 7, 3, 8, toffoli=i % 2 == 1)
        inputs = [int(v) for v in rng.integers(0, 7, 3)]
        worst = max(worst, dense_oracle_compare(circ, inputs, 7))
    if fault:
        worst += 1.0
    return worst < 1e-9, {"max_deviation": worst}


def css_suite(fault: bool = False, seed: int = 0):
    p, n = 7, 5
    code = CssCode(p, n, 2)
    rng = np.random.default_rng(seed)
    ok = True
    for a in range(p):
        for kind, scalar, expect in (("shift", 2, (a + 2) % p), ("scalar_mul", 3, 3 * a % p)):
            st = DenseState(p)
            w = st.alloc(1)[0]
            if a:
                st.apply(GateOp("shift", (w,), a))
            blk = encode(st, code, w)
            (blk,) = transversal_apply(st, [blk], kind, scalar)
            pos = int(rng.integers(n))
            st.apply(GateOp("shift", (blk.wires[pos],), int(rng.integers(1, p))))
            out = decode_D(st, blk, rng).wire
            got = st.measure(out, rng)
            ok &= _flip(got, p, fault and a == 0 and kind == "shift") == expect
    return bool(ok), {"cases": 2 * p}


def net_suite(fault: bool = False, seed: int = 0):
    import tempfile
    from pathlib import Path

    from qmpc.network import Network, NetworkConfig, OwnershipViolation, Transcript
    from qmpc.sim.stabilizer import StabilizerState

    cfg = NetworkConfig(5, 1, 7, 1, frozenset({0}), seed, "vqss")
    net = Network(cfg, StabilizerState(7))
    w = net.alloc(1, 2)
    net.deliver_quantum(1, 2, [w[0]], "probe")
    violations = 0
    try:
        net.local_sum([w[0]], [w[1]])
    except OwnershipViolation:
        violations += 1
    vals = net.broadcast({i: [i] for i in range(5)}, "probe")
    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "t.jsonl"
        net.transcript.write(path)
        back = Transcript.read(path)
    ok = violations == 1 and back == net.transcript and _flip(vals[3][0], 7, fault) == 3
    return bool(ok), {"events": len(net.transcript.events)}


def vqss_suite(fault: bool = False, seed: int = 0):
    from qmpc.scenario import vqss_trial
    from qmpc.network import NetworkConfig
    from qmpc.adversary import make_strategy

    ok = True
    fids = []
    for i, a in enumerate((0, 3, ("fourier", 0))):
        cfg = NetworkConfig(5, 1, 7, 2, frozenset({1}), seed ^ i, "vqss")
        rec = vqss_trial(cfg, make_strategy("pauli_tamper"), a, receiver=4)
        fid = rec.get("fidelity", 0.0)
        if fault and i == 0:
            fid = 0.0
        fids.append(fid)
        ok &= rec["accepted"] and abs(fid - 1) < 1e-9 and rec["sets_in_C"]
    return bool(ok), {"fidelities": fids}


def mpqc_suite(fault: bool = False, seed: int = 0):
    from qmpc.circuit import parse_circuit
    from qmpc.mpqc import mpqc_run
    from qmpc.network import NetworkConfig

    circ = parse_circuit("wires 2\nsum 0 1\n")
    cfg = NetworkConfig(7, 1, 11, 1, frozenset({6}), seed, "mpqc")
    res = mpqc_run(circ, [4, 5], cfg)
    got = [res.outputs[0], _flip(res.outputs[1], 11, fault)]
    return got == [4, 9] and res.agreement, {"outputs": got}


_RUNNERS = {
    "field_codes": codec_suite,
    "pauli_sim": sim_suite,
    "css_code": css_suite,
    "protocol_net": net_suite,
    "vqss": vqss_suite,
    "mpqc": mpqc_suite,
}


def selftest(seed: int = 0, inject: str | None = None, suites=SUITES, details: dict | None = None) -> dict:
    """Run each suite; returns {suite: passed}.  Exceptions count as failures."""
    if inject is not None and inject not in _RUNNERS:
        raise ValueError(f"unknown suite {inject!r}")
    summary = {}
    for name in suites:
        try:
            ok, info = _RUNNERS[name](fault=name == inject, seed=seed)
        except Exception as exc:  # a crash is a failed suite, not a crashed selftest
            ok, info = False, {"error": f"{type(exc).__name__}: {exc}"}
        summary[name] = bool(ok)
        if details is not None:
            details[name] = info
    return summary
