"""Experiment suites: the operation demo, the MemTest86-style sweeps and
seeded random stress against the dictionary oracle."""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from .cam import POPULATIONS, S1_PLASTIC, S2_PLASTIC, CamConfig, CamParams, build_cam
from .formats import raster_from_csv
from .ops import (
    CamMemory,
    Learn,
    Operation,
    OperationResult,
    RecallByContent,
    RecallByCue,
)
from .oracle import OracleCam
from .snn import Raster

# Operation demo: 5 cues x 10 content neurons, operations every 10 steps.
DEMO_CONFIG = CamConfig(5, 10)
DEMO_OPS: tuple[Operation, ...] = (
    Learn(0, {0, 1, 8, 9}),
    Learn(4, {1, 5, 6}),
    Learn(3, {4, 5, 6}),
    RecallByCue(0),
    RecallByContent({6}),
    RecallByContent({4, 5}),
    Learn(3, {1, 3, 4, 8}),
    RecallByCue(3),
    RecallByContent({6}),
)
DEMO_STARTS = tuple(range(0, 90, 10))
DEMO_UNTIL = 86

# Spikes narrated step by step for the demo: (step, population, neurons).
GOLDEN_ANCHORS: tuple[tuple[int, str, frozenset[int]], ...] = tuple(
    (t, pop, frozenset(ns))
    for t, pop, ns in [
        (0, "Input", {0, 5, 6, 13, 14}), (1, "Input", {0, 5, 6, 13, 14}), (2, "Input", {0, 5, 6, 13, 14}),
        (1, "S1Cue", {0}), (3, "S1Cue", {0}), (2, "S1Cue", set()),
        (1, "S1Cont", {0, 1, 8, 9}), (3, "S1Cont", {0, 1, 8, 9}), (2, "S1Cont", set()),
        (2, "S2Int", {0}), (4, "S2Int", {0}),
        (2, "S2Cond", {0, 1, 8, 9}), (4, "S2Cond", {0, 1, 8, 9}),
        (3, "S2Cue", {0}), (5, "S2Cue", {0}),
        (3, "S2Cont", {0, 1, 8, 9}), (5, "S2Cont", {0, 1, 8, 9}),
        (4, "MergeCue", {0}), (6, "MergeCue", {0}),
        (4, "MergeCont", {0, 1, 8, 9}), (6, "MergeCont", {0, 1, 8, 9}),
        (7, "Output", {0, 5, 6, 13, 14}),
        # recall by cue 0 at 30
        (31, "S1Cue", {0}), (32, "S1Cont", {0, 1, 8, 9}), (33, "S2Int", {0}),
        (33, "S2Cond", set()), (34, "S2Cond", set()), (33, "S2Cue", {0}),
        (34, "MergeCue", {0}), (35, "MergeCont", {0, 1, 8, 9}),
        (35, "Output", {0}), (36, "Output", {5, 6, 13, 14}),
        # recall by content {6} at 40
        (41, "S1Cont", {6}), (42, "S2Int", {0}), (42, "S2Cond", {6}), (43, "S2Cont", {6}),
        (44, "S2Cue", {3, 4}), (44, "MergeCont", {6}), (45, "MergeCue", {3, 4}),
        (45, "Output", {11}), (46, "Output", {3, 4}),
        # learn with forgetting, cue 3 at 60
        (61, "S1Cue", {3}), (63, "S1Cue", {3}),
        (61, "S1Cont", {1, 3, 4, 8}), (62, "S1Cont", {5, 6}), (63, "S1Cont", {1, 3, 4, 8}),
        (63, "S2Cue", {3}), (65, "S2Cue", {3}),
        (63, "S2Cont", {1, 3, 4, 8}), (64, "S2Cont", {5, 6}), (65, "S2Cont", {1, 3, 4, 8}),
        # verification recalls
        (75, "MergeCont", {1, 3, 4, 8}), (76, "Output", {6, 8, 9, 13}),
        (85, "MergeCue", {4}), (86, "Output", {4}),
    ]
)

# Decoded results the demo must produce, in operation order.
DEMO_EXPECTED = (
    ("learn", frozenset()),
    ("learn", frozenset()),
    ("learn", frozenset()),
    ("recall_by_cue", frozenset({0, 1, 8, 9})),
    ("recall_by_content", frozenset({3, 4})),
    ("recall_by_content", frozenset({3, 4})),
    ("learn", frozenset({5, 6})),
    ("recall_by_cue", frozenset({1, 3, 4, 8})),
    ("recall_by_content", frozenset({4})),
)


def golden_raster() -> Raster:
    """Full demo raster, generated once by the simulator and frozen."""
    text = resources.files("ca3cam").joinpath("data/golden_ops_demo.csv").read_text()
    return raster_from_csv(text, POPULATIONS)


def result_value(r: OperationResult) -> frozenset[int]:
    if r.kind == "learn":
        return r.forgotten
    if r.kind == "recall_by_cue":
        return r.content
    return r.cues


@dataclass
class DemoVerdict:
    passed: bool
    mismatches: list[str]
    results: list[OperationResult]
    elapsed: float = 0.0


def simulate_operation_demo(params: CamParams | None = None) -> tuple[Raster, list[OperationResult]]:
    config = CamConfig(DEMO_CONFIG.cue_count, DEMO_CONFIG.cont_size, params or CamParams())
    mem = CamMemory(build_cam(config))
    results = mem.execute(DEMO_OPS, DEMO_STARTS)
    mem.network.run_until(DEMO_UNTIL)
    return mem.raster(), results


def run_operation_demo(params: CamParams | None = None, compare_full: bool = True) -> tuple[Raster, DemoVerdict]:
    t0 = time.perf_counter()
    raster, results = simulate_operation_demo(params)
    mismatches = []
    for t, pop, want in GOLDEN_ANCHORS:
        got = raster.at(t, pop)
        if got != want:
            mismatches.append(f"anchor {pop}@{t}: got {sorted(got)}, expected {sorted(want)}")
    for k, (r, (kind, want)) in enumerate(zip(results, DEMO_EXPECTED)):
        got = result_value(r)
        if r.kind != kind or got != want or not r.valid:
            mismatches.append(f"operation {k} ({kind}): got {sorted(got)} valid={r.valid}, expected {sorted(want)}")
    if compare_full:
        frozen = golden_raster()
        if raster != frozen:
            extra = sorted(set(raster.events) - set(frozen.events))
            missing = sorted(set(frozen.events) - set(raster.events))
            mismatches.append(f"raster differs from frozen golden: {len(extra)} extra, {len(missing)} missing")
    verdict = DemoVerdict(not mismatches, mismatches, results, time.perf_counter() - t0)
    return raster, verdict


# ----------------------------------------------------------------------
# MemTest86-style sweeps


def binary_content(value: int) -> frozenset[int]:
    """Bit b of ``value`` set -> content neuron b (LSB is neuron 0)."""
    return frozenset(b for b in range(value.bit_length()) if value >> b & 1)


def memtest_sweeps(config: CamConfig) -> list[list[Operation]]:
    c, n = config.cue_count, config.cont_size
    # values 1..c must fit in n bits without any of them being all ones,
    # whose complement would be an empty (unlearnable) content
    if c > 2 ** n - 2:
        raise ValueError(f"{c} cues need {(c + 1).bit_length()} content bits, only {n} available")
    universe = frozenset(range(n))
    first = {i: binary_content(i + 1) for i in range(c)}
    second = {i: universe - first[i] for i in range(c)}
    # the third sweep complements again, which restores the first table
    third = {i: universe - second[i] for i in range(c)}
    tables = [first, second, third]
    sweeps = []
    for table in tables:
        ops: list[Operation] = [Learn(i, table[i]) for i in range(c)]
        ops += [RecallByCue(i) for i in range(c)]
        ops += [RecallByContent({j}) for j in range(n)]
        sweeps.append(ops)
    return sweeps


@dataclass
class OpCheck:
    sweep: int
    kind: str
    arg: str
    expected: frozenset[int]
    got: frozenset[int]
    start: int
    passed: bool


@dataclass
class MemtestReport:
    cue_count: int
    cont_size: int
    checks: list[OpCheck] = field(default_factory=list)
    counts: dict[str, int] = field(default_factory=dict)
    forgetting_learns: int = 0
    total_steps: int = 0
    sweep3_equals_sweep1: bool = False
    mismatches: list[str] = field(default_factory=list)
    raster: Raster | None = field(default=None, repr=False)

    @property
    def operations(self) -> int:
        return sum(self.counts.values())

    @property
    def passed(self) -> bool:
        return not self.mismatches and self.sweep3_equals_sweep1

    def recall_table(self, sweep: int) -> list[tuple[str, str, frozenset[int]]]:
        return [(c.kind, c.arg, c.got) for c in self.checks if c.sweep == sweep and c.kind != "learn"]


def _describe(op: Operation) -> str:
    if isinstance(op, Learn):
        return f"cue={op.pattern.cue} content={sorted(op.pattern.content)}"
    if isinstance(op, RecallByCue):
        return f"cue={op.cue}"
    return f"fragment={sorted(op.fragment)}"


def run_memtest(config: CamConfig | None = None) -> MemtestReport:
    config = config or CamConfig(5, 10)
    sweeps = memtest_sweeps(config)
    mem = CamMemory(build_cam(config))
    oracle = OracleCam()
    report = MemtestReport(config.cue_count, config.cont_size)
    counts = {"learn": 0, "recall_by_cue": 0, "recall_by_content": 0}
    for k, ops in enumerate(sweeps, start=1):
        results = mem.execute(ops)
        for op, r in zip(ops, results):
            if isinstance(op, Learn) and op.pattern.cue in oracle.table:
                report.forgetting_learns += 1
            want = oracle.apply(op)
            got = result_value(r)
            ok = got == want and r.valid
            counts[r.kind] += 1
            report.checks.append(OpCheck(k, r.kind, _describe(op), want, got, r.start, ok))
            if not ok:
                report.mismatches.append(
                    f"sweep {k} {r.kind} {_describe(op)} @ {r.start}: got {sorted(got)}, expected {sorted(want)}"
                    + (f" ({'; '.join(r.problems)})" if r.problems else "")
                )
    report.counts = counts
    report.total_steps = mem.network.t
    report.sweep3_equals_sweep1 = report.recall_table(3) == report.recall_table(1)
    report.raster = mem.raster()
    return report


# ----------------------------------------------------------------------
# Seeded random stress against the oracle


def random_operations(rng: np.random.Generator, n_ops: int, cue_count: int, cont_size: int) -> list[Operation]:
    """Random valid operations, biased toward overlapping contents."""
    ops: list[Operation] = []
    stored: list[frozenset[int]] = []
    for _ in range(n_ops):
        u = rng.random()
        if u < 0.4:
            density = rng.uniform(0.02, 0.9)
            bits = set(np.flatnonzero(rng.random(cont_size) < density).tolist())
            if stored and rng.random() < 0.5:
                # reuse part of an earlier content to force non-orthogonal memories
                base = sorted(stored[rng.integers(len(stored))])
                keep = rng.random(len(base)) < 0.7
                bits |= {b for b, k in zip(base, keep) if k}
            if not bits:
                bits = {int(rng.integers(cont_size))}
            content = frozenset(bits)
            stored.append(content)
            ops.append(Learn(int(rng.integers(cue_count)), content))
        elif u < 0.7:
            ops.append(RecallByCue(int(rng.integers(cue_count))))
        else:
            size = min(int(rng.geometric(0.5)), cont_size)
            frag = rng.choice(cont_size, size=size, replace=False)
            ops.append(RecallByContent(frag.tolist()))
    return ops


@dataclass
class StressReport:
    seed: int
    n_ops: int
    cue_count: int
    cont_size: int
    divergences: list[str] = field(default_factory=list)
    failing_prefix: list[Operation] | None = None
    weight_checks: int = 0
    elapsed: float = 0.0

    @property
    def passed(self) -> bool:
        return not self.divergences


def expected_weights(table: dict[int, frozenset[int]], cue_count: int, cont_size: int, w_max: float):
    """Plastic weight matrices implied by a cue -> content table."""
    s1 = np.zeros((cue_count, cont_size))
    for cue, content in table.items():
        s1[cue, sorted(content)] = w_max
    return s1, s1.T.copy()


def run_random_stress(
    seed: int, n_ops: int = 1000, config: CamConfig | None = None, chunk: int = 50
) -> StressReport:
    config = config or CamConfig(32, 32)
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    ops = random_operations(rng, n_ops, config.cue_count, config.cont_size)
    mem = CamMemory(build_cam(config))
    oracle = OracleCam()
    report = StressReport(seed, n_ops, config.cue_count, config.cont_size)
    w_max = config.params.stdp.w_max
    done = 0
    for lo in range(0, n_ops, chunk):
        batch = ops[lo:lo + chunk]
        for k, (op, r) in enumerate(zip(batch, mem.execute(batch)), start=lo):
            want = oracle.apply(op)
            got = result_value(r)
            if got != want or not r.valid:
                report.divergences.append(
                    f"op {k} {r.kind} {_describe(op)} @ {r.start}: got {sorted(got)}, expected {sorted(want)}"
                    + (f" ({'; '.join(r.problems)})" if r.problems else "")
                )
        done = lo + len(batch)
        s1, s2 = expected_weights(oracle.table, config.cue_count, config.cont_size, w_max)
        report.weight_checks += 1
        if not np.array_equal(mem.network.weights(S1_PLASTIC), s1):
            report.divergences.append(f"S1 weights diverge from oracle table after op {done - 1}")
        if not np.array_equal(mem.network.weights(S2_PLASTIC), s2):
            report.divergences.append(f"S2 weights diverge from oracle table after op {done - 1}")
        if report.divergences:
            report.failing_prefix = ops[:done]
            break
    report.elapsed = time.perf_counter() - t0
    return report
