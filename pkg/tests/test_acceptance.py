"""Acceptance criteria. Each test records one summary line (see conftest)."""
import time

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings

from ca3cam.cam import S1_PLASTIC, S2_PLASTIC, CamConfig, build_cam
from ca3cam.gridmap import reference_scenario, run_scenario
from ca3cam.ops import CamMemory, Learn, MemoryPattern
from ca3cam.snn import StdpRule, stdp_on_pre
from ca3cam.testbench import golden_raster, random_operations, run_memtest, run_operation_demo, run_random_stress
from kernel_cases import check_kernel_invariants, check_matches_brute_force, random_networks

STRESS_CONFIGS = [(32, 32), (8, 8), (32, 4), (4, 32), (16, 24)]
STRESS_SEEDS = range(20)


@pytest.mark.criterion("1", "golden operation timeline")
def test_golden_timeline(record_property):
    raster, verdict = run_operation_demo()
    record_property("detail", f"{len(raster)} spikes, {len(verdict.mismatches)} mismatches, {verdict.elapsed:.3f} s")
    assert verdict.passed, verdict.mismatches[:5]
    assert raster == golden_raster()
    assert verdict.elapsed < 1.0


@pytest.mark.criterion("2", "memtest 5x(5+10)")
def test_memtest(record_property):
    report = run_memtest(CamConfig(5, 10))
    record_property(
        "detail",
        f"{report.operations} ops {report.counts}, {report.total_steps} steps, "
        f"{report.forgetting_learns} forgetting learns, sweep3==sweep1: {report.sweep3_equals_sweep1}",
    )
    assert report.passed, report.mismatches[:5]
    assert report.operations == 60
    assert report.total_steps <= 851
    assert report.sweep3_equals_sweep1


@pytest.mark.criterion("3", "environment state map")
def test_gridmap(record_property):
    result = run_scenario(reference_scenario())
    answers = [(sorted(a.positions), a.answer_step) for a in result.answers]
    record_property("detail", f"observations done at {result.observations_done}; answers {answers}")
    assert result.observations_done == 112
    assert answers == [
        ([2, 6, 10, 12, 13, 14], 118),
        ([3, 5, 11, 15], 124),
        ([1, 7, 9], 130),
        ([0, 4, 8], 136),
    ]


@pytest.mark.criterion("4", "oracle equivalence on random streams")
def test_random_stress(record_property):
    t0 = time.perf_counter()
    failures = []
    for seed in STRESS_SEEDS:
        c, n = STRESS_CONFIGS[seed % len(STRESS_CONFIGS)]
        report = run_random_stress(seed, 1000, CamConfig(c, n))
        if not report.passed:
            failures.append(f"seed {seed} {c}x{n}: {report.divergences[0]}")
    elapsed = time.perf_counter() - t0
    record_property(
        "detail",
        f"{len(STRESS_SEEDS)} seeds x 1000 ops over {len(STRESS_CONFIGS)} configs up to 32x(32+32), "
        f"{len(failures)} divergent, {elapsed:.1f} s",
    )
    assert not failures, failures[:3]
    assert elapsed < 60


KERNEL_EXAMPLES = 200


@pytest.mark.criterion("5", "kernel invariants")
def test_kernel(record_property):
    count = 0

    @settings(max_examples=KERNEL_EXAMPLES, deadline=None, derandomize=True,
              suppress_health_check=[HealthCheck.too_slow])
    @given(random_networks())
    def check(case):
        nonlocal count
        count += 1
        check_matches_brute_force(case)
        check_kernel_invariants(case)

    check()
    record_property("detail", f"{count} random networks: brute-force equivalence, delivery count, "
                              "weight bounds, STDP locality, refractory gaps, determinism")


@pytest.mark.criterion("6", "plastic weights only take the values 1.2 and 0")
def test_weight_algebra(record_property):
    rule = StdpRule()
    # potentiation saturates in two coincidences; one post-before-pre step erases
    assert stdp_on_pre(5, 5, stdp_on_pre(4, 4, 0.0, rule), rule) == 1.2
    assert stdp_on_pre(7, 6, 1.2, rule) == 0.0
    assert stdp_on_pre(7, 6, 0.0, rule) == 0.0
    assert stdp_on_pre(7, 7, 1.2, rule) == 1.2

    seen = set()
    for seed, (c, n) in enumerate([(5, 10), (12, 7), (32, 32)]):
        mem = CamMemory(build_cam(CamConfig(c, n)))
        ops = random_operations(np.random.default_rng(100 + seed), 300, c, n)
        for k in range(0, len(ops), 25):
            mem.execute(ops[k:k + 25])
            for pid in (S1_PLASTIC, S2_PLASTIC):
                seen |= {float(x) for x in np.unique(mem.network.weights(pid))}
        table = {}
        for op in ops:
            if isinstance(op, Learn):
                table[op.pattern.cue] = op.pattern.content
        s1 = mem.network.weights(S1_PLASTIC)
        for cue in range(c):
            assert set(np.flatnonzero(s1[cue]).tolist()) == set(table.get(cue, ()))
    mem = CamMemory(build_cam(CamConfig(2, 3)))
    mem.learn(MemoryPattern(0, {0, 1}))
    mem.learn(MemoryPattern(0, {2}))
    assert mem.network.weights(S1_PLASTIC)[0].tolist() == [0.0, 0.0, 1.2]
    record_property("detail", f"distinct weight values seen: {sorted(seen)}")
    assert seen <= {0.0, 1.2}
