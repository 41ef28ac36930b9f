"""Command-line experiment runner.

Usage::

    qmpc codec    [--seed S]
    qmpc vqss     [--scenario FILE] [--seed S] [--trials N] [--k-sweep 1,2,3,4] [--out DIR]
    qmpc mpqc     [--scenario FILE] [--circuit FILE --inputs 4,5] [--trials N] [--out DIR]
    qmpc selftest [--seed S] [--inject SUITE]

Flags given on the command line override the scenario file.  Without a
scenario, the default desk parameters are used (vqss: n=5, t=1, p=7, k=4;
mpqc: n=7, t=1, p=11, k=3).

Strategy parameters (``--strategy NAME --param key=value``, values parsed as
JSON, or ``"strategy": {"name": ..., "params": {...}}`` in a scenario):

    honest                  no parameters
    pauli_tamper            when: checkpoint name or "every_round" (default "post_sharing");
                            targets: {held_index: [a, b]} (default: random Pauli on every held wire;
                            indices past the current holding are skipped)
    bad_branch_dealer       level: "branch" | "root"; positions: list of leaf/root positions
    wrong_state_dealer      no parameters (acts only on proved sharings)
    lying_broadcaster       no parameters
    clifford_wire_attack    when: checkpoint name; depth: int (default 3)

Checkpoints: dealer_prepared, reencoded, shared, post_sharing,
pre_reconstruct, pre_output.

Exit status is 0 iff every assertion in the scenario's ``expect`` block holds.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from qmpc.scenario import BACKENDS, ScenarioError, parse_scenario, run_scenario, scenario_from_dict
from qmpc.selftest import SUITES, selftest


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.replace(" ", "").split(",") if x]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _param(text: str) -> tuple[str, object]:
    if "=" not in text:
        raise argparse.ArgumentTypeError("expected key=value")
    key, val = text.split("=", 1)
    try:
        return key, json.loads(val)
    except json.JSONDecodeError:
        return key, val


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qmpc", description="Qupit VQSS / MPQC experiment runner")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--scenario", type=Path, help="JSON scenario file")
    common.add_argument("--seed", type=int, help="base seed; trial i uses seed ^ i")
    common.add_argument("--trials", type=int, help="trials per k")
    common.add_argument("--k-sweep", type=_int_list, help="comma-separated k values")
    common.add_argument("--out", type=Path, help="directory for report.json and transcripts")
    common.add_argument("--backend", choices=BACKENDS, help="simulator backend (default auto)")
    common.add_argument("--n", type=int)
    common.add_argument("--t", type=int)
    common.add_argument("--p", type=int)
    common.add_argument("--k", type=int)
    common.add_argument("--corrupt", type=_int_list, help="comma-separated corrupt players")
    common.add_argument("--strategy", help="adversary strategy name")
    common.add_argument("--param", type=_param, action="append", default=[], help="strategy key=value")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("codec", parents=[common], help="exhaustive codec checks")
    v = sub.add_parser("vqss", parents=[common], help="verifiable sharing runs")
    v.add_argument("--input", type=int, help="basis value to share")
    m = sub.add_parser("mpqc", parents=[common], help="multi-party circuit evaluation")
    m.add_argument("--circuit", type=Path, help="circuit file")
    m.add_argument("--inputs", type=_int_list, help="comma-separated basis inputs")
    s = sub.add_parser("selftest", parents=[common], help="fast invariant suites")
    s.add_argument("--inject", choices=SUITES, help="flip one decode inside this suite")
    return parser


def _scenario_dict(args) -> tuple[dict, Path | None]:
    if args.scenario is not None:
        try:
            data = json.loads(args.scenario.read_text())
        except json.JSONDecodeError as exc:
            raise ScenarioError(f"<json line {exc.lineno}>", exc.msg) from None
        except OSError as exc:
            raise ScenarioError("scenario", str(exc)) from None
        if data.get("mode", args.command) != args.command:
            raise ScenarioError("mode", f"scenario is for {data['mode']!r}, not {args.command!r}")
        base = args.scenario.parent
    else:
        data, base = {}, Path.cwd()
    data["mode"] = args.command
    params = data.setdefault("params", {})
    for key in ("n", "t", "p", "k", "seed"):
        val = getattr(args, key, None)
        if val is not None:
            params[key] = val
    if args.corrupt is not None:
        params["corrupt"] = args.corrupt
    if args.trials is not None:
        data["trials"] = args.trials
    if args.k_sweep is not None:
        data["k_sweep"] = args.k_sweep
    if args.backend is not None:
        data["backend"] = args.backend
    if args.strategy is not None:
        data["strategy"] = {"name": args.strategy, "params": dict(args.param)}
    if getattr(args, "input", None) is not None:
        data["input"] = args.input
    if getattr(args, "circuit", None) is not None:
        data["circuit"] = str(args.circuit.resolve())
    if getattr(args, "inputs", None) is not None:
        data["inputs"] = args.inputs
    return data, base


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "selftest" and args.scenario is None:
        seed = args.seed if args.seed is not None else 0
        details: dict = {}
        summary = selftest(seed=seed, inject=args.inject, details=details)
        for name, ok in summary.items():
            print(f"{name:14s} {'PASS' if ok else 'FAIL'}  {json.dumps(details[name], default=str)}")
        if args.out is not None:
            args.out.mkdir(parents=True, exist_ok=True)
            (args.out / "report.json").write_text(json.dumps({"seed": seed, "suites": summary}, indent=2))
        return 0 if all(summary.values()) else 1
    try:
        data, base = _scenario_dict(args)
        sc = scenario_from_dict(data, base)
    except ScenarioError as exc:
        print(f"scenario error [{exc.field}]: {exc}", file=sys.stderr)
        return 2
    report = run_scenario(sc, args.out)
    print(json.dumps(report.to_dict(), indent=2, sort_keys=True, default=str))
    return 0 if report.ok else 1


if __name__ == "__main__":
    sys.exit(main())
