"""Environment state map: grid cells are cues, cell states are content.

One memory per cell; a single recall by content answers "which cells are
in any of these states".
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from .cam import CamConfig, CamParams, build_cam
from .ops import CamMemory, MemoryPattern, TimingContract
from .snn import Raster

STATES = ("unknown", "initial", "goal", "free", "visited", "obstacle")
UNKNOWN, INITIAL, GOAL, FREE, VISITED, OBSTACLE = range(6)


class ScenarioError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


@dataclass(frozen=True)
class GridConfig:
    width: int = 4
    height: int = 4
    states: tuple[str, ...] = STATES

    @property
    def cells(self) -> int:
        return self.width * self.height

    def cam_config(self, params: CamParams | None = None) -> CamConfig:
        return CamConfig(self.cells, len(self.states), params or CamParams())


class GridMapApp:
    def __init__(self, grid: GridConfig | None = None, params: CamParams | None = None,
                 contract: TimingContract | None = None):
        self.grid = grid or GridConfig()
        self.memory = CamMemory(build_cam(self.grid.cam_config(params)), contract)
        self.recorded: dict[int, int] = {}

    def _check_position(self, position: int) -> None:
        if not 0 <= position < self.grid.cells:
            raise ValueError(f"position {position} outside a {self.grid.width}x{self.grid.height} grid")

    def _check_state(self, state: int) -> None:
        if not 0 <= state < len(self.grid.states):
            raise ValueError(f"state {state} outside [0, {len(self.grid.states)})")

    def record_state(self, position: int, state: int) -> None:
        self._check_position(position)
        self._check_state(state)
        result = self.memory.learn(MemoryPattern(position, {state}))
        if not result.valid:
            raise RuntimeError(f"learning cell {position} failed: {result.problems}")
        self.recorded[position] = state

    def query_positions(self, states: Iterable[int]) -> frozenset[int]:
        states = frozenset(states)
        if not states:
            raise ValueError("query needs at least one state")
        for s in states:
            self._check_state(s)
        return self.memory.recall_by_content(states).cues

    @property
    def t(self) -> int:
        return self.memory.network.t


@dataclass
class Scenario:
    grid: GridConfig = field(default_factory=GridConfig)
    # ("obs", position, state) or ("query", frozenset(states)), with source line
    steps: list[tuple] = field(default_factory=list)


def parse_scenario(text: str) -> Scenario:
    """Parse ``obs <position> <state>`` / ``query <s>[,<s>...]`` lines.

    An optional ``grid <width> <height>`` line must precede the rest.
    """
    scen = Scenario()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        try:
            if parts[0] == "grid" and len(parts) == 3:
                if scen.steps:
                    raise ScenarioError("grid must come before observations and queries", lineno)
                scen.grid = GridConfig(int(parts[1]), int(parts[2]))
                if scen.grid.width < 1 or scen.grid.height < 1:
                    raise ScenarioError("grid dimensions must be positive", lineno)
            elif parts[0] == "obs" and len(parts) == 3:
                pos, state = int(parts[1]), int(parts[2])
                if not 0 <= pos < scen.grid.cells:
                    raise ScenarioError(f"position {pos} outside the grid", lineno)
                if not 0 <= state < len(scen.grid.states):
                    raise ScenarioError(f"unknown state {state}", lineno)
                scen.steps.append(("obs", pos, state, lineno))
            elif parts[0] == "query" and len(parts) == 2:
                states = frozenset(int(s) for s in parts[1].split(",") if s)
                if not states:
                    raise ScenarioError("query needs at least one state", lineno)
                bad = sorted(s for s in states if not 0 <= s < len(scen.grid.states))
                if bad:
                    raise ScenarioError(f"unknown states {bad}", lineno)
                scen.steps.append(("query", states, lineno))
            else:
                raise ScenarioError(f"cannot parse {raw.strip()!r}", lineno)
        except ValueError as exc:
            if isinstance(exc, ScenarioError):
                raise
            raise ScenarioError(str(exc), lineno) from None
    return scen


def load_scenario(path: str | Path) -> Scenario:
    return parse_scenario(Path(path).read_text())


@dataclass
class QueryAnswer:
    states: frozenset[int]
    positions: frozenset[int]
    start: int
    answer_step: int


@dataclass
class ScenarioResult:
    state_map: dict[int, int]
    answers: list[QueryAnswer]
    raster: Raster
    observations_done: int
    grid: GridConfig


def run_scenario(scenario: Scenario | str | Path, params: CamParams | None = None) -> ScenarioResult:
    if isinstance(scenario, (str, Path)):
        scenario = load_scenario(scenario)
    app = GridMapApp(scenario.grid, params)
    answers = []
    obs_done = 0
    for item in scenario.steps:
        if item[0] == "obs":
            app.record_state(item[1], item[2])
            obs_done = app.memory.next_start
        else:
            start = app.memory.next_start
            positions = app.query_positions(item[1])
            answers.append(QueryAnswer(item[1], positions, start, start + 6))
    return ScenarioResult(dict(sorted(app.recorded.items())), answers, app.memory.raster(), obs_done, scenario.grid)


# Path cells: 2 initial, 14 goal, the rest visited. Which path cells were
# initial/goal is a convention; any choice inside the path set gives the
# same query answers.
REFERENCE_MAP = {
    0: UNKNOWN, 1: OBSTACLE, 2: INITIAL, 3: FREE,
    4: UNKNOWN, 5: FREE, 6: VISITED, 7: OBSTACLE,
    8: UNKNOWN, 9: OBSTACLE, 10: VISITED, 11: FREE,
    12: VISITED, 13: VISITED, 14: GOAL, 15: FREE,
}
REFERENCE_QUERIES = (
    frozenset({INITIAL, GOAL, VISITED}),
    frozenset({FREE}),
    frozenset({OBSTACLE}),
    frozenset({UNKNOWN}),
)


def reference_scenario_text() -> str:
    lines = ["# 4x4 grid after the robot reached its goal", "grid 4 4"]
    lines += [f"obs {p} {s}  # {STATES[s]}" for p, s in REFERENCE_MAP.items()]
    lines += ["query " + ",".join(str(s) for s in sorted(q)) for q in REFERENCE_QUERIES]
    return "\n".join(lines) + "\n"


def reference_scenario() -> Scenario:
    return parse_scenario(reference_scenario_text())
