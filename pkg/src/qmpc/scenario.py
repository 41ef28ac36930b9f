"""Experiment scenarios: parsing, execution and reports.

A scenario is a JSON object::

    {
      "mode": "vqss",                      # codec | vqss | mpqc | selftest
      "params": {"n": 5, "t": 1, "p": 7, "k": 4, "corrupt": [0], "seed": 0},
      "strategy": {"name": "bad_branch_dealer", "params": {"level": "branch"}},
      "input": 3,                          # vqss: int, or {"fourier": a}
      "inputs": [4, 5],                    # mpqc: one entry per circuit wire
      "circuit": "sum.circ",               # mpqc: path relative to the scenario file
      "trials": 200,
      "k_sweep": [1, 2, 3, 4],
      "expect": {"accept_rate": 1.0, "max_catch_rate": 0.0, "min_fidelity": 1.0,
                 "two_good": true, "catch_monotone": true, "outputs_match": true}
    }

Trial i of a run uses seed ``seed ^ i``.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from qmpc.adversary import STRATEGIES, make_strategy
from qmpc.circuit import LogicalCircuit, load_circuit, parse_circuit
from qmpc.css import CssCode
from qmpc.network import ConfigRejected, Network, NetworkConfig
from qmpc.sim.sparse import SupportOverflow
from qmpc.sim.dense import OracleTooLarge
from qmpc.sim.stabilizer import StabilizerState

MODES = ("codec", "vqss", "mpqc", "selftest")
BACKENDS = ("auto", "tableau", "sparse", "dense")
DEFAULTS = {
    "vqss": {"n": 5, "t": 1, "p": 7, "k": 4},
    "mpqc": {"n": 7, "t": 1, "p": 11, "k": 3},
    "codec": {"n": 5, "t": 1, "p": 7, "k": 1},
    "selftest": {"n": 5, "t": 1, "p": 7, "k": 1},
}


class ScenarioError(ValueError):
    def __init__(self, field_name: str, message: str):
        self.field = field_name
        super().__init__(f"{field_name}: {message}")


@dataclass
class Scenario:
    mode: str
    config: NetworkConfig
    strategy: str = "honest"
    strategy_params: dict = field(default_factory=dict)
    input: object = 0
    inputs: list = field(default_factory=list)
    circuit: LogicalCircuit | None = None
    trials: int = 1
    k_sweep: list = field(default_factory=list)
    expect: dict = field(default_factory=dict)
    backend: str = "auto"
    dealer: int = 0
    receiver: int | None = None

    def make_strategy(self):
        return make_strategy(self.strategy, **self.strategy_params)


def _input_spec(value, where: str):
    if isinstance(value, int):
        return value
    if isinstance(value, dict) and set(value) == {"fourier"} and isinstance(value["fourier"], int):
        return ("fourier", value["fourier"])
    raise ScenarioError(where, "expected an integer or {\"fourier\": a}")


def scenario_from_dict(data: dict, base: Path | None = None) -> Scenario:
    if not isinstance(data, dict):
        raise ScenarioError("<root>", "scenario must be a JSON object")
    mode = data.get("mode")
    if mode not in MODES:
        raise ScenarioError("mode", f"must be one of {MODES}, got {mode!r}")
    params = dict(DEFAULTS[mode])
    given = data.get("params", {})
    if not isinstance(given, dict):
        raise ScenarioError("params", "must be an object")
    unknown = set(given) - {"n", "t", "p", "k", "corrupt", "seed"}
    if unknown:
        raise ScenarioError("params", f"unknown fields {sorted(unknown)}")
    params.update(given)
    regime = {"vqss": "vqss", "mpqc": "mpqc"}.get(mode)
    try:
        config = NetworkConfig(
            int(params["n"]), int(params["t"]), int(params["p"]), int(params["k"]),
            frozenset(params.get("corrupt", [])), int(params.get("seed", 0)), regime,
        )
    except ConfigRejected as exc:
        raise ScenarioError("params", str(exc)) from None
    strat = data.get("strategy", {"name": "honest"})
    if isinstance(strat, str):
        strat = {"name": strat}
    name = strat.get("name", "honest")
    if name not in STRATEGIES:
        raise ScenarioError("strategy.name", f"unknown strategy {name!r}; choose from {sorted(STRATEGIES)}")
    sparams = strat.get("params", {})
    try:
        make_strategy(name, **sparams)
    except (TypeError, ValueError) as exc:
        raise ScenarioError("strategy.params", str(exc)) from None
    trials = data.get("trials", 1)
    if not isinstance(trials, int) or trials < 1:
        raise ScenarioError("trials", "must be an integer >= 1")
    k_sweep = data.get("k_sweep", [])
    if not isinstance(k_sweep, list) or any(not isinstance(k, int) or not 1 <= k <= 8 for k in k_sweep):
        raise ScenarioError("k_sweep", "must be a list of integers in 1..8")
    backend = data.get("backend", "auto")
    if backend not in BACKENDS:
        raise ScenarioError("backend", f"must be one of {BACKENDS}")
    sc = Scenario(mode, config, name, sparams, trials=trials, k_sweep=k_sweep,
                  expect=data.get("expect", {}), backend=backend,
                  dealer=int(data.get("dealer", 0)), receiver=data.get("receiver"))
    if mode == "vqss":
        sc.input = _input_spec(data.get("input", 0), "input")
    if mode == "mpqc":
        if "circuit" not in data:
            raise ScenarioError("circuit", "mpqc scenarios need a circuit path or inline text")
        circ = data["circuit"]
        try:
            if isinstance(circ, dict) and "text" in circ:
                sc.circuit = parse_circuit(circ["text"])
            else:
                path = Path(circ)
                if base is not None and not path.is_absolute():
                    path = base / path
                sc.circuit = load_circuit(path)
        except (OSError, ValueError) as exc:
            raise ScenarioError("circuit", str(exc)) from None
        inputs = data.get("inputs", [0] * sc.circuit.num_wires)
        if len(inputs) != sc.circuit.num_wires:
            raise ScenarioError("inputs", f"circuit has {sc.circuit.num_wires} input wires")
        sc.inputs = [_input_spec(v, f"inputs[{i}]") for i, v in enumerate(inputs)]
    return sc


def parse_scenario(path) -> Scenario:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"<json line {exc.lineno}>", exc.msg) from None
    return scenario_from_dict(data, path.parent)


# --------------------------------------------------------------------- runs
@dataclass
class RunReport:
    mode: str
    seed: int
    ok: bool = True
    results: dict = field(default_factory=dict)
    failures: list = field(default_factory=list)
    wall_time: float = 0.0

    def check(self, cond: bool, message: str) -> None:
        if not cond:
            self.ok = False
            self.failures.append(message)

    def to_dict(self) -> dict:
        return {"mode": self.mode, "seed": self.seed, "ok": self.ok, "failures": self.failures,
                "wall_time": round(self.wall_time, 3), "results": self.results}


def _prepare(state, wire, spec, p):
    if isinstance(spec, tuple):
        _, a = spec
        if a % p:
            state.apply_local("shift", [wire], a % p)
        state.apply_local("fourier", [wire], 1)
    elif spec % p:
        state.apply_local("shift", [wire], spec % p)


def vqss_trial(config: NetworkConfig, strategy, input_spec, dealer: int = 0, receiver: int | None = None,
               check_two_good: bool = True) -> dict:
    """One sharing plus (if accepted) reconstruction; returns a summary record."""
    from qmpc.vqss import two_good_quantum_check, vqss_reconstruct, vqss_share

    p, n = config.p, config.n
    code = CssCode(p, n, (n - 1) // 2 if config.regime != "mpqc" else 2 * config.t)
    net = Network(config, StabilizerState(p), adversary=strategy)
    wire = net.alloc(dealer, 1)[0]
    _prepare(net.state, wire, input_spec, p)
    res = vqss_share(net, dealer, wire, code)
    C = set(config.corrupt)
    rec = {
        "accepted": res.accepted,
        "reason": res.reason,
        "caught": (not res.accepted) or bool(res.sets.B & C),
        "sets": res.sets.as_dict(),
        "sets_in_C": all(res.sets.Bs[i] <= C for i in range(n) if i not in C),
        "rounds": res.rounds,
        "net": net,
    }
    if not res.accepted:
        return rec
    if check_two_good:
        rec["two_good"] = two_good_quantum_check(net.state, res.tree, res.sets, C)
    if receiver is None:
        receiver = max(i for i in range(n) if i not in C)
    out = vqss_reconstruct(net, res.tree, res.sets, receiver)
    target = StabilizerState(p)
    tw = target.alloc(1)[0]
    _prepare(target, tw, input_spec, p)
    rec["fidelity"] = net.state.fidelity_with([out], target, [tw])
    return rec


def _binomial_monotone(rates: list, trials: int) -> bool:
    """Nondecreasing up to two standard errors between consecutive points."""
    for a, b in zip(rates, rates[1:]):
        sa = math.sqrt(max(a * (1 - a), 1e-12) / trials)
        sb = math.sqrt(max(b * (1 - b), 1e-12) / trials)
        if b < a - 2 * math.hypot(sa, sb):
            return False
    return True


def run_vqss(sc: Scenario, out_dir: Path | None = None) -> RunReport:
    report = RunReport("vqss", sc.config.seed)
    if sc.backend not in ("auto", "tableau"):
        report.check(False, f"backend {sc.backend} cannot hold a two-level sharing; use tableau")
        return report
    ks = sc.k_sweep or [sc.config.k]
    per_k = {}
    for k in ks:
        stats = {"accepted": 0, "caught": 0, "two_good_fail": 0, "fidelities": [], "sets_in_C": True,
                 "set_history": []}
        for i in range(sc.trials):
            cfg = NetworkConfig(sc.config.n, sc.config.t, sc.config.p, k, sc.config.corrupt,
                                sc.config.seed ^ i, sc.config.regime)
            rec = vqss_trial(cfg, sc.make_strategy(), sc.input, sc.dealer, sc.receiver)
            if out_dir is not None and i == 0:
                rec["net"].transcript.write(out_dir / f"transcript_k{k}.jsonl")
            stats["accepted"] += rec["accepted"]
            stats["caught"] += rec["caught"]
            stats["sets_in_C"] &= rec["sets_in_C"]
            if len(stats["set_history"]) < 10:
                stats["set_history"].append(rec["sets"])
            if rec["accepted"]:
                stats["two_good_fail"] += not rec.get("two_good", True)
                stats["fidelities"].append(rec["fidelity"])
        fids = stats.pop("fidelities")
        per_k[k] = {
            **stats,
            "trials": sc.trials,
            "accept_rate": stats["accepted"] / sc.trials,
            "catch_rate": stats["caught"] / sc.trials,
            "min_fidelity": min(fids) if fids else None,
            "mean_fidelity": float(np.mean(fids)) if fids else None,
        }
    report.results = {"per_k": per_k}
    exp = sc.expect
    for k, r in per_k.items():
        report.check(r["sets_in_C"], f"k={k}: an honest player's B_i holds an honest player")
        if "accept_rate" in exp:
            report.check(r["accept_rate"] >= exp["accept_rate"], f"k={k}: accept rate {r['accept_rate']}")
        if "max_catch_rate" in exp:
            report.check(r["catch_rate"] <= exp["max_catch_rate"], f"k={k}: catch rate {r['catch_rate']}")
        if "min_fidelity" in exp and r["min_fidelity"] is not None:
            report.check(r["min_fidelity"] >= exp["min_fidelity"] - 1e-9, f"k={k}: fidelity {r['min_fidelity']}")
        if exp.get("two_good", False):
            report.check(r["two_good_fail"] == 0, f"k={k}: {r['two_good_fail']} accepted trees fail 2-GOOD")
    if exp.get("catch_monotone"):
        rates = [per_k[k]["catch_rate"] for k in ks]
        report.check(_binomial_monotone(rates, sc.trials), f"catch rates not nondecreasing: {rates}")
    return report


def mpqc_trial(config: NetworkConfig, circuit: LogicalCircuit, inputs, strategy) -> dict:
    from qmpc.mpqc import mpqc_run

    res = mpqc_run(circuit, inputs, config, strategy)
    rec = {"outputs": res.outputs, "agreement": res.agreement, "faults": res.faults,
           "caught": sorted(res.caught), "net": res.net, "codes": res.codes}
    try:
        expected = circuit.classical_output([v if isinstance(v, int) else 0 for v in inputs], config.p)
        if all(isinstance(v, int) for v in inputs):
            rec["expected"] = list(expected[:circuit.num_wires])
            rec["match"] = [res.outputs[w] for w in range(circuit.num_wires)] == rec["expected"]
    except ValueError:
        pass
    return rec


def run_mpqc(sc: Scenario, out_dir: Path | None = None) -> RunReport:
    report = RunReport("mpqc", sc.config.seed)
    if sc.backend not in ("auto", "tableau"):
        report.check(False, f"backend {sc.backend} cannot hold the protocol state; use tableau (auto)")
        return report
    matches = agree = faults = 0
    outputs = []
    ks = sc.k_sweep or [sc.config.k]
    for k in ks:
        for i in range(sc.trials):
            cfg = NetworkConfig(sc.config.n, sc.config.t, sc.config.p, k, sc.config.corrupt,
                                sc.config.seed ^ i, sc.config.regime)
            try:
                rec = mpqc_trial(cfg, sc.circuit, sc.inputs, sc.make_strategy())
            except (SupportOverflow, OracleTooLarge) as exc:
                report.check(False, f"trial {i}: backend overflow: {exc}")
                continue
            if out_dir is not None and i == 0:
                rec["net"].transcript.write(out_dir / f"transcript_k{k}.jsonl")
            matches += rec.get("match", False)
            agree += rec["agreement"]
            faults += bool(rec["faults"])
            outputs.append([rec["outputs"][w] for w in sorted(rec["outputs"])])
    total = sc.trials * len(ks)
    report.results = {"trials": total, "match_rate": matches / total, "agreement_rate": agree / total,
                      "fault_trials": faults, "first_outputs": outputs[:5]}
    report.check(agree == total, "honest players disagreed on a broadcast decode")
    if sc.expect.get("outputs_match"):
        report.check(matches == total, f"outputs matched in {matches}/{total} trials")
    return report


def run_codec(sc: Scenario, out_dir: Path | None = None) -> RunReport:
    from qmpc.selftest import codec_suite

    report = RunReport("codec", sc.config.seed)
    ok, detail = codec_suite(sc.config.p, sc.config.n, (sc.config.n - 1) // 2, seed=sc.config.seed)
    report.results = detail
    report.check(ok, "codec checks failed")
    return report


def run_scenario(sc: Scenario, out_dir=None) -> RunReport:
    out = Path(out_dir) if out_dir is not None else None
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
    t0 = time.time()
    if sc.mode == "vqss":
        report = run_vqss(sc, out)
    elif sc.mode == "mpqc":
        report = run_mpqc(sc, out)
    elif sc.mode == "codec":
        report = run_codec(sc, out)
    else:
        from qmpc.selftest import selftest

        summary = selftest(seed=sc.config.seed)
        report = RunReport("selftest", sc.config.seed, all(summary.values()), {"suites": summary})
    report.wall_time = time.time() - t0
    if out is not None:
        (out / "report.json").write_text(json.dumps(report.to_dict(), indent=2, sort_keys=True, default=str))
    return report
