"""Deterministic discrete-time spiking network kernel.

LIF neurons with refractoriness, delayed weighted spike delivery and
pair-based nearest-neighbour STDP. One global clock; every projection has
a delay of at least one step, so the order in which populations are
evaluated inside a step does not matter.
"""
from __future__ import annotations

import bisect
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

import numpy as np

SPIKE_SOURCE = "spike_source"
LIF = "lif"

NEVER = -(10**9)


class NetworkError(ValueError):
    """Invalid topology, schedule or lookup."""


@dataclass(frozen=True)
class NeuronParams:
    threshold: float = 1.0
    decay: float = 0.5
    refractory_steps: int = 1
    reset_potential: float = 0.0
    floor_potential: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.decay <= 1.0:
            raise NetworkError(f"decay must lie in [0, 1], got {self.decay}")
        if not self.floor_potential <= self.reset_potential < self.threshold:
            raise NetworkError("need floor_potential <= reset_potential < threshold")
        if self.refractory_steps < 0:
            raise NetworkError("refractory_steps must be >= 0")


@dataclass(frozen=True)
class PopulationSpec:
    id: str
    size: int
    kind: str = LIF
    params: NeuronParams = field(default_factory=NeuronParams)
    record: bool = True

    def __post_init__(self):
        if self.size < 1:
            raise NetworkError(f"population {self.id!r} needs size >= 1")
        if self.kind not in (SPIKE_SOURCE, LIF):
            raise NetworkError(f"unknown population kind {self.kind!r}")


# Connectivity patterns. Each knows how to expand itself into a boolean
# pre x post mask once the population sizes are known.


@dataclass(frozen=True)
class OneToOne:
    def mask(self, n_pre: int, n_post: int) -> np.ndarray:
        if n_pre != n_post:
            raise NetworkError(f"one-to-one needs equal sizes, got {n_pre} and {n_post}")
        return np.eye(n_pre, dtype=bool)


@dataclass(frozen=True)
class AllToAll:
    include_self: bool = True

    def mask(self, n_pre: int, n_post: int) -> np.ndarray:
        m = np.ones((n_pre, n_post), dtype=bool)
        if not self.include_self:
            if n_pre != n_post:
                raise NetworkError("all-to-all without self needs equal sizes")
            np.fill_diagonal(m, False)
        return m


@dataclass(frozen=True)
class AllToOne:
    def mask(self, n_pre: int, n_post: int) -> np.ndarray:
        if n_post != 1:
            raise NetworkError(f"all-to-one needs a post population of size 1, got {n_post}")
        return np.ones((n_pre, 1), dtype=bool)


@dataclass(frozen=True)
class OneToAll:
    def mask(self, n_pre: int, n_post: int) -> np.ndarray:
        if n_pre != 1:
            raise NetworkError(f"one-to-all needs a pre population of size 1, got {n_pre}")
        return np.ones((1, n_post), dtype=bool)


@dataclass(frozen=True)
class ExplicitPairs:
    pairs: tuple[tuple[int, int], ...]

    def __init__(self, pairs: Iterable[tuple[int, int]]):
        object.__setattr__(self, "pairs", tuple((int(i), int(j)) for i, j in pairs))

    def mask(self, n_pre: int, n_post: int) -> np.ndarray:
        m = np.zeros((n_pre, n_post), dtype=bool)
        for i, j in self.pairs:
            if not (0 <= i < n_pre and 0 <= j < n_post):
                raise NetworkError(f"pair ({i}, {j}) outside {n_pre}x{n_post}")
            if m[i, j]:
                raise NetworkError(f"duplicate pair ({i}, {j})")
            m[i, j] = True
        return m


Pattern = OneToOne | AllToAll | AllToOne | OneToAll | ExplicitPairs


@dataclass(frozen=True)
class StaticProjection:
    pre: str
    post: str
    pattern: Pattern
    weight: float
    delay: int = 1
    name: str | None = None

    @property
    def id(self) -> str:
        return self.name or f"{self.pre}->{self.post}"


@dataclass(frozen=True)
class StdpRule:
    a_plus: float = 0.6
    a_minus: float = 1.2
    w_init: float = 0.0
    w_min: float = 0.0
    w_max: float = 1.2
    depression_window: int = 3

    def __post_init__(self):
        if not self.w_min <= self.w_init <= self.w_max:
            raise NetworkError("need w_min <= w_init <= w_max")
        if self.a_plus <= 0 or self.a_minus <= 0:
            raise NetworkError("STDP amplitudes must be positive")
        if self.depression_window < 1:
            raise NetworkError("depression_window must be >= 1")


@dataclass(frozen=True)
class PlasticProjection:
    pre: str
    post: str
    rule: StdpRule = field(default_factory=StdpRule)
    delay: int = 1
    name: str | None = None
    pattern: AllToAll = field(default_factory=AllToAll)

    @property
    def id(self) -> str:
        return self.name or f"{self.pre}->{self.post}"


def stdp_on_pre(t_pre: int, last_post: int | None, w: float, rule: StdpRule) -> float:
    """Weight after one presynaptic spike at ``t_pre``.

    ``last_post`` is the latest postsynaptic firing step not after ``t_pre``.
    Coincidence potentiates, post-before-pre within the window depresses.
    """
    if last_post is None:
        return w
    dt = t_pre - last_post
    if dt == 0:
        return min(w + rule.a_plus, rule.w_max)
    if 1 <= dt <= rule.depression_window:
        return max(w - rule.a_minus, rule.w_min)
    return w


class SpikeEvent(NamedTuple):
    step: int
    population: str
    neuron: int


@dataclass(frozen=True)
class StimulusSchedule:
    entries: tuple[tuple[int, str, frozenset[int]], ...] = ()

    def __init__(self, entries: Iterable[tuple[int, str, Iterable[int]]] = ()):
        norm = []
        for step, pop, neurons in entries:
            if step < 0:
                raise NetworkError(f"negative stimulus step {step}")
            norm.append((int(step), pop, frozenset(int(n) for n in neurons)))
        object.__setattr__(self, "entries", tuple(norm))

    def __add__(self, other: StimulusSchedule) -> StimulusSchedule:
        return StimulusSchedule(self.entries + other.entries)

    def __len__(self):
        return len(self.entries)

    @property
    def last_step(self) -> int:
        return max((e[0] for e in self.entries), default=-1)


class Raster:
    """Immutable record of spikes, sorted by (step, population order, neuron)."""

    def __init__(self, populations: Sequence[str], chunks: Iterable[tuple[int, int, np.ndarray]]):
        self.populations = tuple(populations)
        index: dict[tuple[int, int], np.ndarray] = {}
        for step, p, neurons in chunks:
            key = (step, p)
            if key in index:
                neurons = np.union1d(index[key], neurons)
            index[key] = np.unique(np.asarray(neurons, dtype=np.int64))
        self._index = {k: index[k] for k in sorted(index) if len(index[k])}
        self._events: tuple[SpikeEvent, ...] | None = None

    @property
    def events(self) -> tuple[SpikeEvent, ...]:
        if self._events is None:
            self._events = tuple(
                SpikeEvent(step, self.populations[p], int(n))
                for (step, p), ns in self._index.items()
                for n in ns
            )
        return self._events

    def __len__(self):
        return sum(len(v) for v in self._index.values())

    def __iter__(self):
        return iter(self.events)

    def __eq__(self, other):
        if not isinstance(other, Raster):
            return NotImplemented
        return self.populations == other.populations and self.events == other.events

    def at(self, step: int, population: str) -> frozenset[int]:
        p = self.populations.index(population)
        ns = self._index.get((step, p))
        return frozenset() if ns is None else frozenset(int(n) for n in ns)

    def times(self, population: str, neuron: int) -> list[int]:
        p = self.populations.index(population)
        return [s for (s, q), ns in self._index.items() if q == p and neuron in ns]

    def steps(self, population: str) -> list[int]:
        p = self.populations.index(population)
        return [s for (s, q) in self._index if q == p]

    def select(self, population: str) -> list[SpikeEvent]:
        return [e for e in self.events if e.population == population]

    def window(self, lo: int, hi: int) -> Raster:
        chunks = [(s, p, ns) for (s, p), ns in self._index.items() if lo <= s <= hi]
        return Raster(self.populations, chunks)

    @classmethod
    def from_events(cls, populations: Sequence[str], events: Iterable[SpikeEvent]) -> Raster:
        order = {name: i for i, name in enumerate(populations)}
        grouped: dict[tuple[int, int], list[int]] = {}
        for step, pop, n in events:
            grouped.setdefault((int(step), order[pop]), []).append(int(n))
        return cls(populations, [(s, p, np.array(ns)) for (s, p), ns in grouped.items()])

    def __repr__(self):
        return f"Raster({len(self)} events)"


class _Pop:
    __slots__ = ("spec", "index", "v", "last_fire", "refractory_until", "quiet", "can_idle")

    def __init__(self, spec: PopulationSpec, index: int):
        self.spec = spec
        self.index = index
        self.v = np.full(spec.size, spec.params.reset_potential)
        self.last_fire = np.full(spec.size, NEVER, dtype=np.int64)
        self.refractory_until = np.full(spec.size, NEVER, dtype=np.int64)
        prm = spec.params
        # an all-zero population with no input stays all-zero and cannot fire
        self.can_idle = prm.floor_potential <= 0.0 < prm.threshold
        self.quiet = self.can_idle and not self.v.any()


class _Proj:
    __slots__ = ("id", "pre", "post", "delay", "mask", "weights", "rule", "out_degree")

    def __init__(self, pid, pre, post, delay, mask, weights, rule=None):
        self.id = pid
        self.pre = pre
        self.post = post
        self.delay = delay
        self.mask = mask
        self.weights = weights
        self.rule = rule
        self.out_degree = mask.sum(axis=1)


class Network:
    """Topology plus mutable simulation state. Build with :func:`build_network`."""

    def __init__(self, populations, statics, plastics):
        self.population_specs: tuple[PopulationSpec, ...] = tuple(populations)
        self._pops: dict[str, _Pop] = {}
        for i, spec in enumerate(self.population_specs):
            if spec.id in self._pops:
                raise NetworkError(f"duplicate population id {spec.id!r}")
            self._pops[spec.id] = _Pop(spec, i)
        self.names = tuple(p.id for p in self.population_specs)

        self._projs: list[_Proj] = []
        self._plastic: dict[str, _Proj] = {}
        ids = set()
        for proj in list(statics) + list(plastics):
            pre, post = self._lookup(proj.pre), self._lookup(proj.post)
            if proj.delay < 1:
                raise NetworkError(f"projection {proj.id} has delay {proj.delay} < 1")
            if proj.id in ids:
                raise NetworkError(f"duplicate projection id {proj.id!r}")
            ids.add(proj.id)
            mask = proj.pattern.mask(pre.spec.size, post.spec.size)
            if isinstance(proj, PlasticProjection):
                if post.spec.kind != LIF:
                    raise NetworkError("plastic projection must target a lif population")
                w = np.where(mask, proj.rule.w_init, 0.0)
                p = _Proj(proj.id, pre, post, proj.delay, mask, w, proj.rule)
                self._plastic[proj.id] = p
            else:
                if post.spec.kind != LIF:
                    raise NetworkError(f"projection {proj.id} targets spike source {post.spec.id!r}")
                w = np.where(mask, float(proj.weight), 0.0)
                p = _Proj(proj.id, pre, post, proj.delay, mask, w)
            self._projs.append(p)
        self._outgoing: dict[str, list[_Proj]] = {n: [] for n in self.names}
        for p in self._projs:
            self._outgoing[p.pre.spec.id].append(p)
        self._incoming_plastic: dict[str, list[_Proj]] = {n: [] for n in self.names}
        for p in self._plastic.values():
            self._incoming_plastic[p.post.spec.id].append(p)

        self.t = 0
        # arrival step -> list of (projection, fired presynaptic indices)
        self._pending: dict[int, list[tuple[_Proj, np.ndarray]]] = {}
        self._stimuli: dict[int, dict[str, set[int]]] = {}
        self._chunks: list[tuple[int, int, np.ndarray]] = []
        self.deliveries_enqueued = 0

    def _lookup(self, pid: str) -> _Pop:
        try:
            return self._pops[pid]
        except KeyError:
            raise NetworkError(f"unknown population id {pid!r}") from None

    @property
    def plastic_ids(self) -> tuple[str, ...]:
        return tuple(self._plastic)

    @property
    def projection_ids(self) -> tuple[str, ...]:
        return tuple(p.id for p in self._projs)

    def size(self, pid: str) -> int:
        return self._lookup(pid).spec.size

    def potentials(self, pid: str) -> np.ndarray:
        return self._lookup(pid).v.copy()

    def out_degree(self, pid: str) -> np.ndarray:
        """Number of synapses leaving each neuron of ``pid``."""
        total = np.zeros(self.size(pid), dtype=np.int64)
        for p in self._outgoing[pid]:
            total += p.out_degree
        return total

    def schedule(self, schedule: StimulusSchedule) -> None:
        """Queue stimuli on spike-source populations.

        A stimulus may also target the step just simulated: spike sources
        carry no state and every delay is >= 1, so firing them late is
        indistinguishable from having scheduled them in time.
        """
        late: dict[str, set[int]] = {}
        for step, pid, neurons in schedule.entries:
            pop = self._lookup(pid)
            if pop.spec.kind != SPIKE_SOURCE:
                raise NetworkError(f"stimulus targets non-source population {pid!r}")
            bad = [n for n in neurons if not 0 <= n < pop.spec.size]
            if bad:
                raise NetworkError(f"stimulus neurons {sorted(bad)} outside {pid!r}")
            if step >= self.t:
                self._stimuli.setdefault(step, {}).setdefault(pid, set()).update(neurons)
            elif step == self.t - 1:
                late.setdefault(pid, set()).update(neurons)
            else:
                raise NetworkError(f"stimulus at step {step} is in the past (t={self.t})")
        for pid, neurons in late.items():
            pop = self._pops[pid]
            fired = np.array(sorted(neurons), dtype=np.int64)
            fresh = fired[pop.last_fire[fired] != self.t - 1]
            self._fire(pop, fresh, self.t - 1)
            self._apply_stdp({pid: fresh}, self.t - 1)

    def _fire(self, pop: _Pop, idx: np.ndarray, t: int) -> None:
        if not len(idx):
            return
        pop.last_fire[idx] = t
        if pop.spec.record:
            self._chunks.append((t, pop.index, idx))
        for proj in self._outgoing[pop.spec.id]:
            self._pending.setdefault(t + proj.delay, []).append((proj, idx))
            self.deliveries_enqueued += int(proj.out_degree[idx].sum())

    def _apply_stdp(self, fired: dict[str, np.ndarray], t: int) -> None:
        for proj in self._plastic.values():
            idx = fired.get(proj.pre.spec.id)
            if idx is None or not len(idx):
                continue
            rule = proj.rule
            dt = t - proj.post.last_fire
            rows = proj.weights[idx]
            pot = (dt == 0) & proj.mask[idx]
            dep = (dt >= 1) & (dt <= rule.depression_window) & proj.mask[idx]
            rows = np.where(pot, np.minimum(rows + rule.a_plus, rule.w_max), rows)
            rows = np.where(dep, np.maximum(rows - rule.a_minus, rule.w_min), rows)
            proj.weights[idx] = rows

    def step(self) -> list[SpikeEvent]:
        """Advance one step and return every fire at that step."""
        t = self.t
        arrivals = self._pending.pop(t, ())
        inputs: dict[str, np.ndarray] = {}
        for proj, idx in arrivals:
            contrib = proj.weights[idx].sum(axis=0)
            name = proj.post.spec.id
            if name in inputs:
                inputs[name] = inputs[name] + contrib
            else:
                inputs[name] = contrib
        stim = self._stimuli.pop(t, {})

        fired: dict[str, np.ndarray] = {}
        for pop in self._pops.values():
            spec = pop.spec
            if spec.kind == SPIKE_SOURCE:
                ns = stim.get(spec.id)
                if ns:
                    fired[spec.id] = np.array(sorted(ns), dtype=np.int64)
                continue
            I = inputs.get(spec.id)
            if I is None and pop.quiet:
                continue
            prm = spec.params
            v = prm.decay * pop.v
            if I is not None:
                v = v + I
            refractory = pop.refractory_until >= t
            fire = (v >= prm.threshold) & ~refractory
            v = np.maximum(v, prm.floor_potential)
            if fire.any():
                v[fire] = prm.reset_potential
                idx = np.flatnonzero(fire)
                pop.refractory_until[idx] = t + prm.refractory_steps
                fired[spec.id] = idx
            pop.v = v
            pop.quiet = pop.can_idle and not v.any()

        for name, idx in fired.items():
            self._fire(self._pops[name], idx, t)
        self._apply_stdp(fired, t)
        self.t = t + 1
        return [SpikeEvent(t, name, int(n)) for name in self.names if name in fired for n in fired[name]]

    def run_until(self, until: int) -> None:
        while self.t <= until:
            self.step()

    def raster(self, since: int = 0) -> Raster:
        # chunks are appended in nondecreasing step order
        lo = bisect.bisect_left(self._chunks, since, key=lambda c: c[0])
        return Raster(self.names, self._chunks[lo:])

    def weights(self, projection_id: str) -> np.ndarray:
        try:
            return self._plastic[projection_id].weights.copy()
        except KeyError:
            raise NetworkError(f"unknown plastic projection {projection_id!r}") from None


def build_network(
    populations: Sequence[PopulationSpec],
    statics: Sequence[StaticProjection] = (),
    plastics: Sequence[PlasticProjection] = (),
) -> Network:
    return Network(populations, statics, plastics)


def step(network: Network) -> list[SpikeEvent]:
    return network.step()


def run(network: Network, schedule: StimulusSchedule, until: int) -> Raster:
    """Simulate from the network's current step through ``until`` inclusive."""
    if until < schedule.last_step:
        raise NetworkError(f"until={until} precedes the last stimulus at {schedule.last_step}")
    start = network.t
    network.schedule(schedule)
    network.run_until(until)
    return network.raster(since=start)


def get_weights(network: Network, projection_id: str) -> np.ndarray:
    return network.weights(projection_id)
