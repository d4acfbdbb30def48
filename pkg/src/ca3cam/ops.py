"""CAM operations: compile learn/recall streams into stimuli, decode rasters.

Operations are spaced by a fixed timing contract so that the STDP
activity of one operation never overlaps the next. Answers are read off
the Output population at fixed offsets from each operation's start.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .cam import OUTPUT, S1_PLASTIC, S2_PLASTIC, CamNetwork, inject
from .snn import Raster, StimulusSchedule


class OperationError(ValueError):
    """Invalid operation or schedule that breaks the timing contract."""

    def __init__(self, message: str, index: int | None = None):
        super().__init__(message)
        self.index = index


@dataclass(frozen=True)
class MemoryPattern:
    cue: int
    content: frozenset[int]

    def __init__(self, cue: int, content: Iterable[int]):
        object.__setattr__(self, "cue", int(cue))
        object.__setattr__(self, "content", frozenset(int(c) for c in content))
        if not self.content:
            raise OperationError("cannot learn an empty content")


@dataclass(frozen=True)
class Learn:
    pattern: MemoryPattern

    def __init__(self, pattern_or_cue, content: Iterable[int] | None = None):
        if content is not None:
            pattern_or_cue = MemoryPattern(pattern_or_cue, content)
        object.__setattr__(self, "pattern", pattern_or_cue)


@dataclass(frozen=True)
class RecallByCue:
    cue: int


@dataclass(frozen=True)
class RecallByContent:
    fragment: frozenset[int]

    def __init__(self, fragment: Iterable[int]):
        object.__setattr__(self, "fragment", frozenset(int(c) for c in fragment))
        if not self.fragment:
            raise OperationError("recall by content needs at least one content neuron")


Operation = Learn | RecallByCue | RecallByContent


@dataclass(frozen=True)
class TimingContract:
    learn_input_repeat: int = 3
    learn_latency: int = 7
    learn_next_offset: int = 7
    recall_latency: int = 6
    recall_next_offset: int = 6

    def offset(self, op: Operation) -> int:
        return self.learn_next_offset if isinstance(op, Learn) else self.recall_next_offset

    def latency(self, op: Operation) -> int:
        return self.learn_latency if isinstance(op, Learn) else self.recall_latency


@dataclass(frozen=True)
class ScheduledOp:
    op: Operation
    start: int

    @property
    def echo_step(self) -> int:
        return self.start + 5

    @property
    def answer_step(self) -> int:
        return self.start + 6

    @property
    def last_step(self) -> int:
        return self.start + (7 if isinstance(self.op, Learn) else 6)


@dataclass(frozen=True)
class DecodePlan:
    cue_count: int
    cont_size: int
    ops: tuple[ScheduledOp, ...] = ()

    @property
    def horizon(self) -> int:
        """Last step any decode window reads."""
        return max((s.last_step for s in self.ops), default=-1)


@dataclass(frozen=True)
class OperationResult:
    op: Operation
    start: int
    valid: bool
    content: frozenset[int] = frozenset()
    cues: frozenset[int] = frozenset()
    forgotten: frozenset[int] = frozenset()
    echo: tuple[frozenset[int], ...] = ()
    problems: tuple[str, ...] = field(default=(), compare=False)

    @property
    def kind(self) -> str:
        return {Learn: "learn", RecallByCue: "recall_by_cue", RecallByContent: "recall_by_content"}[type(self.op)]


def _validate(op: Operation, cue_count: int, cont_size: int) -> None:
    if isinstance(op, Learn):
        cue, content = op.pattern.cue, op.pattern.content
    elif isinstance(op, RecallByCue):
        cue, content = op.cue, frozenset()
    elif isinstance(op, RecallByContent):
        cue, content = None, op.fragment
    else:
        raise OperationError(f"not an operation: {op!r}")
    if cue is not None and not 0 <= cue < cue_count:
        raise OperationError(f"cue {cue} outside [0, {cue_count})")
    bad = sorted(c for c in content if not 0 <= c < cont_size)
    if bad:
        raise OperationError(f"content neurons {bad} outside [0, {cont_size})")


def stimulus_neurons(op: Operation, cue_count: int) -> frozenset[int]:
    if isinstance(op, Learn):
        return frozenset({op.pattern.cue} | {cue_count + c for c in op.pattern.content})
    if isinstance(op, RecallByCue):
        return frozenset({op.cue})
    return frozenset(cue_count + c for c in op.fragment)


def compile_ops(
    cam: CamNetwork,
    ops: Sequence[Operation],
    contract: TimingContract | None = None,
    starts: Sequence[int | None] | None = None,
    origin: int = 0,
) -> tuple[StimulusSchedule, DecodePlan]:
    """Assign start steps and build the stimulus schedule.

    ``starts`` may pin individual operations; unpinned ones go at the
    earliest legal step. Pinned starts closer than the contract allows
    raise :class:`OperationError`.
    """
    contract = contract or TimingContract()
    c, n = cam.cue_count, cam.cont_size
    if starts is not None and len(starts) != len(ops):
        raise OperationError(f"{len(starts)} starts given for {len(ops)} operations")
    earliest = origin
    scheduled = []
    schedule = StimulusSchedule()
    for k, op in enumerate(ops):
        try:
            _validate(op, c, n)
        except OperationError as exc:
            raise OperationError(str(exc), k) from None
        start = earliest if starts is None or starts[k] is None else int(starts[k])
        if start < earliest:
            raise OperationError(
                f"operation {k} starts at {start}, earliest legal start is {earliest}", k
            )
        repeat = contract.learn_input_repeat if isinstance(op, Learn) else 1
        schedule = schedule + inject(cam, start, stimulus_neurons(op, c), repeat)
        scheduled.append(ScheduledOp(op, start))
        earliest = start + contract.offset(op)
    return schedule, DecodePlan(c, n, tuple(scheduled))


def _split(output: frozenset[int], cue_count: int) -> tuple[frozenset[int], frozenset[int]]:
    cues = frozenset(i for i in output if i < cue_count)
    content = frozenset(i - cue_count for i in output if i >= cue_count)
    return cues, content


def decode(raster: Raster, plan: DecodePlan) -> list[OperationResult]:
    c = plan.cue_count
    results = []
    for s in plan.ops:
        op = s.op
        problems = []
        echo_cues, echo_content = _split(raster.at(s.echo_step, OUTPUT), c)
        ans_cues, ans_content = _split(raster.at(s.answer_step, OUTPUT), c)
        if isinstance(op, Learn):
            late_cues, late_content = _split(raster.at(s.start + 7, OUTPUT), c)
            want = ({op.pattern.cue}, op.pattern.content)
            for label, got in (("+5", (echo_cues, echo_content)), ("+7", (late_cues, late_content))):
                if got != want:
                    problems.append(f"learn echo at {label} is {got}, expected {want}")
            if ans_cues:
                problems.append(f"unexpected cue output {sorted(ans_cues)} at +6")
            results.append(OperationResult(
                op, s.start, not problems,
                forgotten=ans_content,
                echo=(echo_cues | {c + j for j in echo_content}, late_cues | {c + j for j in late_content}),
                problems=tuple(problems),
            ))
        elif isinstance(op, RecallByCue):
            if echo_cues != {op.cue} or echo_content:
                problems.append(f"cue echo at +5 is {(echo_cues, echo_content)}, expected {op.cue}")
            if ans_cues:
                problems.append(f"unexpected cue output {sorted(ans_cues)} at +6")
            results.append(OperationResult(
                op, s.start, not problems, content=ans_content,
                echo=(echo_cues | {c + j for j in echo_content},), problems=tuple(problems),
            ))
        else:
            if echo_content != op.fragment or echo_cues:
                problems.append(f"content echo at +5 is {(echo_cues, echo_content)}, expected {set(op.fragment)}")
            if ans_content:
                problems.append(f"unexpected content output {sorted(ans_content)} at +6")
            results.append(OperationResult(
                op, s.start, not problems, cues=ans_cues,
                echo=(echo_cues | {c + j for j in echo_content},), problems=tuple(problems),
            ))
    return results


class CamMemory:
    """Runs operations on one CAM network, in order, at the contract spacing.

    Each call simulates just far enough to read its own answer. The next
    operation may start on the step the previous answer appeared, which is
    already simulated; that works because the network accepts input
    stimuli for the step it has just finished.
    """

    def __init__(self, cam: CamNetwork, contract: TimingContract | None = None):
        self.cam = cam
        self.contract = contract or TimingContract()
        self.next_start = cam.network.t
        self.history: list[OperationResult] = []

    @property
    def network(self):
        return self.cam.network

    def execute(self, ops: Sequence[Operation], starts: Sequence[int | None] | None = None) -> list[OperationResult]:
        if not ops:
            return []
        schedule, plan = compile_ops(self.cam, ops, self.contract, starts, origin=self.next_start)
        first = plan.ops[0].start
        self.network.schedule(schedule)
        self.network.run_until(plan.horizon)
        results = decode(self.network.raster(since=first), plan)
        last = plan.ops[-1]
        self.next_start = last.start + self.contract.offset(last.op)
        self.history.extend(results)
        return results

    def learn(self, pattern: MemoryPattern) -> OperationResult:
        return self.execute([Learn(pattern)])[0]

    def recall_by_cue(self, cue: int) -> OperationResult:
        return self.execute([RecallByCue(cue)])[0]

    def recall_by_content(self, fragment: Iterable[int]) -> OperationResult:
        return self.execute([RecallByContent(fragment)])[0]

    def weights(self) -> dict[str, np.ndarray]:
        return {pid: self.network.weights(pid) for pid in (S1_PLASTIC, S2_PLASTIC)}

    def raster(self) -> Raster:
        return self.network.raster()
