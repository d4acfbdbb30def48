"""CA3-inspired content-addressable memory network.

Ten populations in three structures: S1 (recall by cue), S2 (recall by
content, gated by the S2Int/S2Cond interneurons) and Merge, which folds
both output streams back into a memory-shaped Output population.
Input and Output are ``cue_count + cont_size`` wide; index ``i < cue_count``
is cue ``i``, the rest is content neuron ``i - cue_count``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

from .snn import (
    LIF,
    SPIKE_SOURCE,
    AllToAll,
    AllToOne,
    ExplicitPairs,
    Network,
    NetworkError,
    NeuronParams,
    OneToAll,
    OneToOne,
    PlasticProjection,
    PopulationSpec,
    Raster,
    StaticProjection,
    StdpRule,
    StimulusSchedule,
    build_network,
)

INPUT = "Input"
OUTPUT = "Output"
POPULATIONS = (
    INPUT, "S1Cue", "S1Cont", "S2Int", "S2Cond", "S2Cue", "S2Cont", "MergeCue", "MergeCont", OUTPUT,
)
S1_PLASTIC = "S1Cue->S1Cont"
S2_PLASTIC = "S2Cont->S2Cue"


@dataclass(frozen=True)
class CamParams:
    """Reference parameterization; every field may be overridden."""

    neuron: NeuronParams = field(default_factory=NeuronParams)
    stdp: StdpRule = field(default_factory=StdpRule)
    relay_weight: float = 1.0
    cond_inhibition: float = 0.5
    int_excitation: float = 0.5
    # None -> cont_size * w_max, enough to cancel the largest plastic drive
    recurrent_inhibition: float | None = None


@dataclass(frozen=True)
class CamConfig:
    cue_count: int = 5
    cont_size: int = 10
    params: CamParams = field(default_factory=CamParams)

    def __post_init__(self):
        if self.cue_count < 1 or self.cont_size < 1:
            raise NetworkError(f"need cue_count >= 1 and cont_size >= 1, got {self.cue_count}x{self.cont_size}")

    @property
    def width(self) -> int:
        return self.cue_count + self.cont_size


@dataclass(frozen=True)
class Wire:
    group: str
    projection: StaticProjection | PlasticProjection


def wiring_table(config: CamConfig) -> list[Wire]:
    c, n = config.cue_count, config.cont_size
    prm = config.params
    rw = prm.relay_weight
    rec = prm.recurrent_inhibition
    if rec is None:
        rec = n * prm.stdp.w_max

    def static(group, pre, post, pattern, weight, delay, name=None):
        return Wire(group, StaticProjection(pre, post, pattern, weight, delay, name=name))

    wires = [
        static("1", INPUT, "S1Cue", ExplicitPairs((i, i) for i in range(c)), rw, 1),
        static("2", INPUT, "S1Cont", ExplicitPairs((c + j, j) for j in range(n)), rw, 1),
        Wire("3", PlasticProjection("S1Cue", "S1Cont", prm.stdp, 1, name=S1_PLASTIC)),
        static("4", "S1Cue", "S2Cue", OneToOne(), rw, 2),
        static("5", "S1Cue", "S2Cond", AllToAll(), -prm.cond_inhibition, 2),
        static("6", "S1Cont", "S2Cond", OneToOne(), rw, 1),
        static("7", "S1Cont", "S2Int", AllToOne(), rw, 1),
        static("8", "S2Int", "S2Cond", OneToAll(), prm.int_excitation, 1),
        static("9", "S2Cond", "S2Cont", OneToOne(), rw, 1),
        Wire("10", PlasticProjection("S2Cont", "S2Cue", prm.stdp, 1, name=S2_PLASTIC)),
        static("11a", "S2Cue", "S2Cue", AllToAll(include_self=True), -rec, 1, name="S2Cue->S2Cue/d1"),
        static("11b", "S2Cue", "S2Cue", AllToAll(include_self=False), -rec, 2, name="S2Cue->S2Cue/d2"),
        static("12", "S2Cue", "MergeCue", OneToOne(), rw, 1),
        static("13", "S1Cue", "MergeCue", OneToOne(), rw, 3),
        static("14", "S2Cont", "MergeCont", OneToOne(), rw, 1),
        static("15", "S1Cont", "MergeCont", OneToOne(), rw, 3),
        static("16", "MergeCue", OUTPUT, ExplicitPairs((i, i) for i in range(c)), rw, 1),
        static("17", "MergeCont", OUTPUT, ExplicitPairs((j, c + j) for j in range(n)), rw, 1),
    ]
    return wires


@dataclass
class CamNetwork:
    config: CamConfig
    network: Network
    wiring: list[Wire]

    @property
    def cue_count(self) -> int:
        return self.config.cue_count

    @property
    def cont_size(self) -> int:
        return self.config.cont_size

    def input_index(self, *, cue: int | None = None, content: Iterable[int] = ()) -> set[int]:
        idx = set() if cue is None else {cue}
        return idx | {self.cue_count + j for j in content}

    def weights(self, projection_id: str):
        return self.network.weights(projection_id)


def build_cam(config: CamConfig | None = None) -> CamNetwork:
    config = config or CamConfig()
    c, n = config.cue_count, config.cont_size
    neuron = config.params.neuron
    sizes = {
        INPUT: c + n, "S1Cue": c, "S1Cont": n, "S2Int": 1, "S2Cond": n,
        "S2Cue": c, "S2Cont": n, "MergeCue": c, "MergeCont": n, OUTPUT: c + n,
    }
    pops = [
        PopulationSpec(name, sizes[name], SPIKE_SOURCE if name == INPUT else LIF, neuron)
        for name in POPULATIONS
    ]
    wires = wiring_table(config)
    statics = [w.projection for w in wires if isinstance(w.projection, StaticProjection)]
    plastics = [w.projection for w in wires if isinstance(w.projection, PlasticProjection)]
    return CamNetwork(config, build_network(pops, statics, plastics), wires)


def inject(cam: CamNetwork, start: int, neurons: Iterable[int], repeat: int = 1) -> StimulusSchedule:
    neurons = frozenset(neurons)
    if repeat < 1:
        raise NetworkError(f"repeat must be >= 1, got {repeat}")
    width = cam.config.width
    bad = sorted(i for i in neurons if not 0 <= i < width)
    if bad:
        raise NetworkError(f"input neurons {bad} outside [0, {width})")
    return StimulusSchedule((start + k, INPUT, neurons) for k in range(repeat))


def read_output(raster: Raster, window: tuple[int, int]) -> dict[int, frozenset[int]]:
    lo, hi = window
    return {t: raster.at(t, OUTPUT) for t in range(lo, hi + 1)}
