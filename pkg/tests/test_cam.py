import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from ca3cam.cam import (
    INPUT,
    OUTPUT,
    POPULATIONS,
    S1_PLASTIC,
    S2_PLASTIC,
    CamConfig,
    build_cam,
    inject,
    read_output,
    wiring_table,
)
from ca3cam.ops import CamMemory, Learn, MemoryPattern, RecallByContent, RecallByCue, compile_ops
from ca3cam.oracle import OracleCam
from ca3cam.snn import NetworkError, PlasticProjection
from ca3cam.testbench import DEMO_CONFIG, DEMO_OPS, DEMO_STARTS, golden_raster


# ------------------------------------------------------------------ builder

def test_population_sizes():
    cam = build_cam(CamConfig(5, 10))
    sizes = {p: cam.network.size(p) for p in POPULATIONS}
    assert sizes == {
        "Input": 15, "S1Cue": 5, "S1Cont": 10, "S2Int": 1, "S2Cond": 10,
        "S2Cue": 5, "S2Cont": 10, "MergeCue": 5, "MergeCont": 10, "Output": 15,
    }


def test_wiring_groups():
    wires = wiring_table(CamConfig(4, 6))
    assert len(wires) == 18
    groups = {w.group.rstrip("ab") for w in wires}
    assert groups == {str(g) for g in range(1, 18)}
    plastic = [w.projection.id for w in wires if isinstance(w.projection, PlasticProjection)]
    assert plastic == [S1_PLASTIC, S2_PLASTIC]


def test_recurrent_inhibition_defaults_to_full_content_drive():
    wires = {w.group: w.projection for w in wiring_table(CamConfig(3, 7))}
    assert wires["11a"].weight == wires["11b"].weight == pytest.approx(-7 * 1.2)
    assert (wires["11a"].delay, wires["11b"].delay) == (1, 2)
    assert wires["11a"].pattern.include_self and not wires["11b"].pattern.include_self


def test_plastic_weights_start_at_zero():
    cam = build_cam(CamConfig(4, 6))
    assert cam.weights(S1_PLASTIC).shape == (4, 6)
    assert cam.weights(S2_PLASTIC).shape == (6, 4)
    assert not cam.weights(S1_PLASTIC).any() and not cam.weights(S2_PLASTIC).any()


@pytest.mark.parametrize("c,n", [(5, 10), (16, 6), (1, 1)])
def test_learn_then_recall_round_trip(c, n):
    mem = CamMemory(build_cam(CamConfig(c, n)))
    content = {0, n - 1}
    assert mem.learn(MemoryPattern(c - 1, content)).valid
    r = mem.recall_by_cue(c - 1)
    assert r.valid and r.content == content
    r = mem.recall_by_content({n - 1})
    assert r.valid and r.cues == {c - 1}


@pytest.mark.parametrize("c,n", [(0, 4), (4, 0)])
def test_config_rejects_empty_regions(c, n):
    with pytest.raises(ValueError):
        CamConfig(c, n)


# ------------------------------------------------------------------ inject / read

def test_inject_repeats_on_consecutive_steps():
    cam = build_cam(CamConfig(5, 10))
    sched = inject(cam, 20, {0, 5, 6}, repeat=3)
    assert [(s, p, set(ns)) for s, p, ns in sched.entries] == [
        (20, INPUT, {0, 5, 6}), (21, INPUT, {0, 5, 6}), (22, INPUT, {0, 5, 6})
    ]


def test_inject_errors():
    cam = build_cam(CamConfig(5, 10))
    with pytest.raises(NetworkError):
        inject(cam, 0, {15})
    with pytest.raises(NetworkError):
        inject(cam, 0, {1}, repeat=0)


def test_read_output_windows():
    raster = golden_raster()
    # recall by cue 0 at 30 echoes the cue then answers its content
    assert read_output(raster, (35, 36)) == {35: {0}, 36: {5, 6, 13, 14}}
    # recall by content {6} at 40 answers cues 3 and 4
    assert read_output(raster, (45, 46)) == {45: {11}, 46: {3, 4}}


# ------------------------------------------------------------------ invariants

def check_invariants(raster, plan, tables_before):
    """Structural properties every decoded operation must show.

    ``tables_before[k]`` is the oracle table just before operation ``k``.
    """
    c = plan.cue_count
    for k, s in enumerate(plan.ops):
        t0, op = s.start, s.op
        s2cond = [raster.at(t0 + d, "S2Cond") for d in range(s.last_step - t0 + 1)]
        s2cue = {d: raster.at(t0 + d, "S2Cue") for d in range(s.last_step - t0 + 1)}
        if isinstance(op, RecallByCue):
            assert not any(s2cond), f"gate open during recall by cue at {t0}"
            assert all(v <= {op.cue} for v in s2cue.values())
        elif isinstance(op, RecallByContent):
            assert s2cond[2] == op.fragment, f"gate closed for fragment at {t0}"
        else:
            cue, new = op.pattern.cue, op.pattern.content
            old = tables_before[k].get(cue, frozenset())
            assert s2cond[2] == new
            assert s2cond[3] == old - new
            # the learned cue fires at +3 and +5 only
            assert {d for d, v in s2cue.items() if v} == {3, 5}
            assert all(v == {cue} for v in s2cue.values() if v)
            echo = raster.at(t0 + 5, OUTPUT)
            assert echo == {cue} | {c + j for j in new}
    last = max((e.step for e in raster.events), default=0)
    for t in range(last + 2):
        out = raster.at(t, OUTPUT)
        merged = raster.at(t - 1, "MergeCue") | {c + j for j in raster.at(t - 1, "MergeCont")}
        assert out == merged
        assert raster.at(t, "MergeCue") <= raster.at(t - 1, "S2Cue") | raster.at(t - 3, "S1Cue")
        assert raster.at(t, "MergeCont") <= raster.at(t - 1, "S2Cont") | raster.at(t - 3, "S1Cont")


def _tables(ops):
    oracle, tables = OracleCam(), []
    for op in ops:
        tables.append(dict(oracle.table))
        oracle.apply(op)
    return tables


def test_invariants_on_golden_raster():
    _, plan = compile_ops(build_cam(DEMO_CONFIG), DEMO_OPS, starts=DEMO_STARTS)
    check_invariants(golden_raster(), plan, _tables(DEMO_OPS))


@st.composite
def op_streams(draw):
    c = draw(st.integers(1, 6))
    n = draw(st.integers(1, 6))
    cue = st.integers(0, c - 1)
    content = st.frozensets(st.integers(0, n - 1), min_size=1)
    op = st.one_of(
        st.builds(Learn, cue, content),
        st.builds(RecallByCue, cue),
        st.builds(RecallByContent, content),
    )
    return c, n, draw(st.lists(op, min_size=1, max_size=25))


@settings(max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(op_streams())
def test_invariants_on_random_streams(stream):
    c, n, ops = stream
    cam = build_cam(CamConfig(c, n))
    schedule, plan = compile_ops(cam, ops)
    cam.network.schedule(schedule)
    cam.network.run_until(plan.horizon)
    check_invariants(cam.network.raster(), plan, _tables(ops))


def test_output_is_silent_between_operations():
    raster = golden_raster()
    allowed = {s + d for s in DEMO_STARTS for d in (5, 6, 7)}
    assert set(raster.steps(OUTPUT)) <= allowed


def test_recall_leaves_weights_untouched():
    mem = CamMemory(build_cam(CamConfig(4, 5)))
    mem.learn(MemoryPattern(1, {0, 2}))
    mem.learn(MemoryPattern(2, {2, 3}))
    before = {k: v.copy() for k, v in mem.weights().items()}
    mem.recall_by_cue(1)
    mem.recall_by_content({2})
    mem.recall_by_cue(3)
    for k, v in mem.weights().items():
        np.testing.assert_array_equal(v, before[k])
