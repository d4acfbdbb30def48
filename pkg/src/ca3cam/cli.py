"""Command-line front end.

    ca3cam ops-demo  [--out DIR] [--format csv|json] [--param k=v ...]
    ca3cam memtest   [--cues N] [--cont M] ...
    ca3cam gridmap   [SCENARIO] ...
    ca3cam run       SCRIPT [--cues N] [--cont M] ...
    ca3cam stress    [--seed S] [--ops K] [--cues N] [--cont M] ...

Every subcommand writes ``report.json`` into --out, plus ``raster.<fmt>``
for all but stress, and exits 0 only if all of its checks pass.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from . import __version__
from .cam import CamConfig, CamParams, build_cam
from .formats import write_raster
from .gridmap import ScenarioError, load_scenario, reference_scenario, run_scenario
from .ops import (
    CamMemory,
    Learn,
    OperationError,
    RecallByContent,
    RecallByCue,
)
from .snn import NetworkError, NeuronParams, StdpRule
from .testbench import (
    DEMO_CONFIG,
    result_value,
    run_memtest,
    run_operation_demo,
    run_random_stress,
)

NEURON_KEYS = {f.name for f in dataclasses.fields(NeuronParams)}
STDP_KEYS = {f.name for f in dataclasses.fields(StdpRule)}
CAM_KEYS = {f.name for f in dataclasses.fields(CamParams)} - {"neuron", "stdp"}
INT_KEYS = {"refractory_steps", "depression_window"}


class UsageError(ValueError):
    pass


def parse_params(items: list[str]) -> tuple[CamParams, dict[str, float]]:
    neuron, stdp, cam, echo = {}, {}, {}, {}
    for item in items:
        key, sep, value = item.partition("=")
        key = key.strip()
        if not sep:
            raise UsageError(f"--param expects key=value, got {item!r}")
        try:
            val = int(value) if key in INT_KEYS else float(value)
        except ValueError:
            raise UsageError(f"--param {key}: not a number: {value!r}") from None
        if key in NEURON_KEYS:
            neuron[key] = val
        elif key in STDP_KEYS:
            stdp[key] = val
        elif key in CAM_KEYS:
            cam[key] = val
        else:
            raise UsageError(f"unknown parameter {key!r}")
        echo[key] = val
    params = CamParams(
        neuron=NeuronParams(**neuron),
        stdp=StdpRule(**stdp),
        **cam,
    )
    return params, dict(sorted(echo.items()))


def _sorted(s) -> list[int]:
    return sorted(int(x) for x in s)


def _write(args, raster, report: dict) -> None:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_raster(raster, out / f"raster.{args.format}", args.format)
    (out / "report.json").write_text(json.dumps(report, indent=2, sort_keys=False) + "\n")


def _metadata(args, cues: int, cont: int, overrides: dict) -> dict:
    return {
        "version": __version__,
        "subcommand": args.command,
        "cues": cues,
        "cont": cont,
        "seed": args.seed,
        "format": args.format,
        "params": overrides,
    }


def _result_json(r, line: int | None = None) -> dict:
    d = {"kind": r.kind, "start": r.start, "valid": r.valid}
    if line is not None:
        d["line"] = line
    if r.kind == "learn":
        d["cue"] = r.op.pattern.cue
        d["content"] = _sorted(r.op.pattern.content)
        d["forgotten"] = _sorted(r.forgotten)
    elif r.kind == "recall_by_cue":
        d["cue"] = r.op.cue
        d["content"] = _sorted(r.content)
    else:
        d["fragment"] = _sorted(r.op.fragment)
        d["cues"] = _sorted(r.cues)
    if r.problems:
        d["problems"] = list(r.problems)
    return d


def cmd_ops_demo(args) -> int:
    params, overrides = parse_params(args.param)
    for flag, default in (("cues", DEMO_CONFIG.cue_count), ("cont", DEMO_CONFIG.cont_size)):
        if getattr(args, flag) not in (None, default):
            raise UsageError(f"ops-demo runs the fixed 5x(5+10) network; --{flag} must be {default}")
    raster, verdict = run_operation_demo(params)
    report = {
        "metadata": _metadata(args, DEMO_CONFIG.cue_count, DEMO_CONFIG.cont_size, overrides),
        "passed": verdict.passed,
        "mismatches": verdict.mismatches,
        "results": [_result_json(r) for r in verdict.results],
    }
    _write(args, raster, report)
    print(f"ops-demo: {'PASS' if verdict.passed else 'FAIL'} ({len(verdict.mismatches)} mismatches)")
    for m in verdict.mismatches[:20]:
        print("  " + m)
    return 0 if verdict.passed else 1


def cmd_memtest(args) -> int:
    params, overrides = parse_params(args.param)
    config = CamConfig(args.cues or 5, args.cont or 10, params)
    try:
        report = run_memtest(config)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    out = {
        "metadata": _metadata(args, config.cue_count, config.cont_size, overrides),
        "passed": report.passed,
        "operations": report.operations,
        "counts": report.counts,
        "forgetting_learns": report.forgetting_learns,
        "total_steps": report.total_steps,
        "sweep3_equals_sweep1": report.sweep3_equals_sweep1,
        "mismatches": report.mismatches,
        "checks": [
            {"sweep": c.sweep, "kind": c.kind, "arg": c.arg, "start": c.start,
             "expected": _sorted(c.expected), "got": _sorted(c.got), "passed": c.passed}
            for c in report.checks
        ],
    }
    _write(args, report.raster, out)
    print(f"memtest {config.cue_count}x({config.cue_count}+{config.cont_size}): "
          f"{'PASS' if report.passed else 'FAIL'}; {report.operations} operations "
          f"({report.counts['learn']} learn, {report.forgetting_learns} forgetting; "
          f"{report.counts['recall_by_cue']} recall by cue; {report.counts['recall_by_content']} recall by content); "
          f"{report.total_steps} steps")
    for m in report.mismatches[:20]:
        print("  " + m)
    return 0 if report.passed else 1


def cmd_gridmap(args) -> int:
    params, overrides = parse_params(args.param)
    scenario = load_scenario(args.scenario) if args.scenario else reference_scenario()
    result = run_scenario(scenario, params)
    report = {
        "metadata": _metadata(args, scenario.grid.cells, len(scenario.grid.states), overrides),
        "scenario": str(args.scenario) if args.scenario else "reference",
        "state_map": {str(p): s for p, s in result.state_map.items()},
        "observations_done": result.observations_done,
        "answers": [
            {"states": _sorted(a.states), "positions": _sorted(a.positions),
             "start": a.start, "answer_step": a.answer_step}
            for a in result.answers
        ],
    }
    _write(args, result.raster, report)
    print(f"gridmap: observations done at step {result.observations_done}")
    for a in result.answers:
        print(f"  query {_sorted(a.states)} -> {_sorted(a.positions)} at step {a.answer_step}")
    return 0


def parse_bits(token: str, cont_size: int, lineno: int) -> frozenset[int]:
    if token.startswith("{") and token.endswith("}"):
        body = token[1:-1].strip()
        try:
            return frozenset(int(x) for x in body.split(",") if x.strip())
        except ValueError:
            raise ScenarioError(f"bad index set {token!r}", lineno) from None
    if len(token) != cont_size or set(token) - {"0", "1"}:
        raise ScenarioError(f"content bits {token!r} must be {cont_size} characters of 0/1", lineno)
    return frozenset(i for i, ch in enumerate(token) if ch == "1")


def parse_script(text: str, cont_size: int):
    """Return (operations, starts, line numbers) for an operation script."""
    ops, starts, lines = [], [], []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        start = None
        at = [p for p in parts if p.startswith("@")]
        if len(at) > 1:
            raise ScenarioError("more than one @start", lineno)
        if at:
            parts.remove(at[0])
            try:
                start = int(at[0][1:])
            except ValueError:
                raise ScenarioError(f"bad start {at[0]!r}", lineno) from None
        try:
            if parts[0] == "learn" and len(parts) == 3:
                op = Learn(int(parts[1]), parse_bits(parts[2], cont_size, lineno))
            elif parts[0] == "rcue" and len(parts) == 2:
                op = RecallByCue(int(parts[1]))
            elif parts[0] == "rcont" and len(parts) == 2:
                op = RecallByContent(parse_bits(parts[1], cont_size, lineno))
            else:
                raise ScenarioError(f"cannot parse {raw.strip()!r}", lineno)
        except ScenarioError:
            raise
        except ValueError as exc:
            raise ScenarioError(str(exc), lineno) from None
        ops.append(op)
        starts.append(start)
        lines.append(lineno)
    return ops, starts, lines


def cmd_run(args) -> int:
    params, overrides = parse_params(args.param)
    config = CamConfig(args.cues or 5, args.cont or 10, params)
    ops, starts, lines = parse_script(Path(args.script).read_text(), config.cont_size)
    mem = CamMemory(build_cam(config))
    try:
        results = mem.execute(ops, starts)
    except OperationError as exc:
        where = f"line {lines[exc.index]}: " if exc.index is not None else ""
        raise UsageError(where + str(exc)) from None
    report = {
        "metadata": _metadata(args, config.cue_count, config.cont_size, overrides),
        "passed": all(r.valid for r in results),
        "results": [_result_json(r, ln) for r, ln in zip(results, lines)],
    }
    _write(args, mem.raster(), report)
    for r, ln in zip(results, lines):
        print(f"line {ln}: {r.kind} @ {r.start} -> {sorted(result_value(r))}{'' if r.valid else ' (INVALID)'}")
    return 0 if report["passed"] else 1


def cmd_stress(args) -> int:
    params, overrides = parse_params(args.param)
    config = CamConfig(args.cues or 32, args.cont or 32, params)
    seed = 0 if args.seed is None else args.seed
    report = run_random_stress(seed, args.ops, config)
    out = {
        "metadata": _metadata(args, config.cue_count, config.cont_size, overrides),
        "passed": report.passed,
        "n_ops": report.n_ops,
        "divergences": report.divergences,
        "failing_prefix_length": None if report.failing_prefix is None else len(report.failing_prefix),
    }
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "report.json").write_text(json.dumps(out, indent=2) + "\n")
    print(f"stress seed={seed} {config.cue_count}x({config.cue_count}+{config.cont_size}) "
          f"{args.ops} ops: {'PASS' if report.passed else 'FAIL'}")
    for d in report.divergences[:20]:
        print("  " + d)
    return 0 if report.passed else 1


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--cues", type=int, default=None, help="number of cues (one-hot width)")
    common.add_argument("--cont", type=int, default=None, help="number of content neurons")
    common.add_argument("--seed", type=int, default=None, help="random seed (recorded in metadata)")
    common.add_argument("--out", default="out", help="output directory")
    common.add_argument("--format", choices=("csv", "json"), default="csv", help="raster format")
    common.add_argument("--param", action="append", default=[], metavar="KEY=VALUE",
                        help="override a neuron, STDP or wiring parameter")

    parser = argparse.ArgumentParser(prog="ca3cam", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("ops-demo", parents=[common], help="nine-operation demo against the golden timeline")
    sub.add_parser("memtest", parents=[common], help="three-sweep memory testbench")
    p = sub.add_parser("gridmap", parents=[common], help="environment state map scenario")
    p.add_argument("scenario", nargs="?", help="scenario file (default: built-in reference)")
    p = sub.add_parser("run", parents=[common], help="run an operation script")
    p.add_argument("script")
    p = sub.add_parser("stress", parents=[common], help="random operations against the oracle")
    p.add_argument("--ops", type=int, default=1000)
    return parser


COMMANDS = {
    "ops-demo": cmd_ops_demo,
    "memtest": cmd_memtest,
    "gridmap": cmd_gridmap,
    "run": cmd_run,
    "stress": cmd_stress,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (UsageError, ScenarioError, OperationError, NetworkError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
