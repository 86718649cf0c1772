"""Discrete execution: walk planned paths, reveal dynamic obstacles, replan.

Tick order is fixed and load-bearing for the collision semantics: at tick t
the obstacles with appears_at_step <= t materialize first, then the robot
takes its move (stepping onto any occupied cell collides), then it senses
within the Chebyshev sensing radius, and only a newly sensed obstacle lying
on the remaining path triggers a replan. An obstacle can therefore defeat
sensing by appearing on the robot's next cell in the same tick.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from pathlib import Path
from typing import Protocol

import yaml

from .errors import InvalidScenario
from .gridmap import CellState, GridPose, OccupancyGrid, load_map

SCENARIO_VERSION = "scenario_v1"


@dataclass(frozen=True)
class DynamicObstacle:
    cell: GridPose
    appears_at_step: int


@dataclass
class Scenario:
    """One executable task: a map, endpoints, and the dynamic environment."""

    map: OccupancyGrid
    start: GridPose
    goal: GridPose
    instruction_text: str
    dynamic_obstacles: tuple[DynamicObstacle, ...] = ()
    sensing_radius: int = 1
    seed: int = 0

    def validate(self) -> None:
        grid = self.map
        for name, p in (("start", self.start), ("goal", self.goal)):
            if not grid.in_bounds(p[0], p[1]):
                raise InvalidScenario(f"{name} ({p[0]},{p[1]}) outside the map")
            if grid.cells[p[1] * grid.width + p[0]] is not CellState.FREE:
                raise InvalidScenario(f"{name} ({p[0]},{p[1]}) is not Free on the base map")
        if not self.instruction_text:
            raise InvalidScenario("instruction_text must be non-empty")
        if self.sensing_radius < 1:
            raise InvalidScenario(f"sensing_radius must be >= 1, got {self.sensing_radius}")
        for ob in self.dynamic_obstacles:
            if ob.appears_at_step < 0:
                raise InvalidScenario(f"appears_at_step must be >= 0, got {ob.appears_at_step}")
            if not grid.in_bounds(ob.cell[0], ob.cell[1]):
                raise InvalidScenario(f"obstacle cell ({ob.cell[0]},{ob.cell[1]}) outside the map")


@dataclass
class ExecutionRecord:
    """What actually happened: the walked cells and the outcome flags."""

    visited: list[GridPose]
    collided: bool
    reached_goal: bool
    replan_count: int
    steps_taken: int


class SimPlanner(Protocol):
    """Planner interface the executor drives.

    Both methods return a waypoint list (ideally starting at the given cell
    and ending at the goal) or None when no path could be produced.
    """

    def plan(
        self, grid: OccupancyGrid, start: GridPose, goal: GridPose, instruction_text: str
    ) -> list[GridPose] | None:
        ...

    def replan(
        self, grid: OccupancyGrid, current: GridPose, goal: GridPose, instruction_text: str
    ) -> list[GridPose] | None:
        ...


def _chebyshev(a: GridPose, b: GridPose) -> int:
    return max(abs(a[0] - b[0]), abs(a[1] - b[1]))


def execute(scenario: Scenario, planner: SimPlanner) -> ExecutionRecord:
    """Run one episode under the tick order documented in the module docstring.

    The robot walks one waypoint per tick within a global step budget of
    10 * (width + height). Collision and goal arrival are mutually
    exclusive and both end the episode.

    Raises:
        InvalidScenario: the scenario fails validation.
    """
    scenario.validate()
    grid = scenario.map
    budget = 10 * (grid.width + grid.height)
    start = GridPose(*scenario.start)
    goal = GridPose(*scenario.goal)

    materialized: set[GridPose] = set()
    sensed: set[GridPose] = set()

    def materialize(tick: int) -> None:
        for ob in scenario.dynamic_obstacles:
            if ob.appears_at_step <= tick:
                materialized.add(GridPose(*ob.cell))

    def occupied_now(c: GridPose) -> bool:
        return grid.cells[c.y * grid.width + c.x] is not CellState.FREE or c in materialized

    pos = start
    visited = [pos]
    replan_count = 0
    steps_taken = 0
    collided = False
    reached = pos == goal

    materialize(0)
    newly = {c for c in materialized - sensed if _chebyshev(c, pos) <= scenario.sensing_radius}
    sensed |= newly
    working = grid.with_occupied(sensed) if sensed else grid

    upcoming: deque[GridPose] = deque()
    if not reached:
        path = planner.plan(working, pos, goal, scenario.instruction_text)
        if path is None:
            return ExecutionRecord(visited, False, False, 0, 0)
        upcoming = deque(GridPose(*p) for p in path)
        if upcoming and upcoming[0] == pos:
            upcoming.popleft()

    tick = 0
    while upcoming and steps_taken < budget and not collided and not reached:
        tick += 1
        materialize(tick)
        nxt = upcoming.popleft()
        steps_taken += 1
        if not grid.in_bounds(nxt.x, nxt.y) or occupied_now(nxt):
            collided = True
            break
        pos = nxt
        visited.append(pos)
        if pos == goal:
            reached = True
            break
        newly = {c for c in materialized - sensed if _chebyshev(c, pos) <= scenario.sensing_radius}
        if newly:
            sensed |= newly
            working = grid.with_occupied(sensed)
            remaining = set(upcoming)
            if newly & remaining:
                replan_count += 1
                new_path = planner.replan(working, pos, goal, scenario.instruction_text)
                if new_path is None:
                    upcoming = deque()
                else:
                    upcoming = deque(GridPose(*p) for p in new_path)
                    if upcoming and upcoming[0] == pos:
                        upcoming.popleft()
    return ExecutionRecord(visited, collided, reached, replan_count, steps_taken)


@dataclass(frozen=True)
class PathValidation:
    """Verdict for an externally produced path; rule/index name the first violation."""

    valid: bool
    rule: str | None = None
    index: int | None = None


def validate_external_path(scenario: Scenario, waypoints: list[GridPose]) -> PathValidation:
    """Structural check for model-produced coordinate lists.

    Verifies start anchoring, four-connected step adjacency, freeness of
    every cell on the base map, and goal termination, returning the first
    violated rule with the waypoint index. Total: never raises.
    """
    grid = scenario.map
    if not waypoints or GridPose(*waypoints[0]) != GridPose(*scenario.start):
        return PathValidation(False, "start", 0)
    prev: GridPose | None = None
    for i, raw in enumerate(waypoints):
        p = GridPose(*raw)
        if prev is not None and abs(p.x - prev.x) + abs(p.y - prev.y) != 1:
            return PathValidation(False, "adjacency", i)
        if not grid.in_bounds(p.x, p.y) or grid.cells[p.y * grid.width + p.x] is not CellState.FREE:
            return PathValidation(False, "freeness", i)
        prev = p
    if GridPose(*waypoints[-1]) != GridPose(*scenario.goal):
        return PathValidation(False, "goal", len(waypoints) - 1)
    return PathValidation(True)


# --- scenario files (scenario_v1) ---


def _as_pose(value, label: str) -> GridPose:
    if (
        not isinstance(value, (list, tuple))
        or len(value) != 2
        or not all(isinstance(v, int) and not isinstance(v, bool) for v in value)
    ):
        raise InvalidScenario(f"{label} must be a [x, y] integer pair, got {value!r}")
    return GridPose(value[0], value[1])


def parse_scenario(text: str, base_dir: str | Path | None = None) -> Scenario:
    """Parse a scenario_v1 document.

    The map is either inline ASCII under ``map`` or a relative file
    reference under ``map_file`` resolved against ``base_dir``.

    Raises:
        InvalidScenario: structural problems, version mismatch, bad fields.
    """
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise InvalidScenario(f"unparseable scenario file: {exc}") from exc
    if not isinstance(doc, dict):
        raise InvalidScenario("scenario file must be a mapping")
    if doc.get("version") != SCENARIO_VERSION:
        raise InvalidScenario(
            f"unsupported scenario version {doc.get('version')!r}, expected {SCENARIO_VERSION!r}"
        )
    if ("map" in doc) == ("map_file" in doc):
        raise InvalidScenario("exactly one of 'map' or 'map_file' is required")
    if "map" in doc:
        map_text = doc["map"]
        if not isinstance(map_text, str):
            raise InvalidScenario("'map' must be inline ASCII map text")
    else:
        if base_dir is None:
            raise InvalidScenario("'map_file' requires a base directory to resolve against")
        map_path = Path(base_dir) / doc["map_file"]
        try:
            map_text = map_path.read_text(encoding="utf-8")
        except OSError as exc:
            raise InvalidScenario(f"cannot read map file {map_path}: {exc}") from exc
    try:
        grid = load_map(map_text)
    except Exception as exc:
        raise InvalidScenario(f"bad map: {exc}") from exc

    for key in ("start", "goal", "instruction_text"):
        if key not in doc:
            raise InvalidScenario(f"missing required field {key!r}")
    obstacles = []
    for i, entry in enumerate(doc.get("dynamic_obstacles") or []):
        if not isinstance(entry, dict) or "cell" not in entry or "appears_at_step" not in entry:
            raise InvalidScenario(f"dynamic_obstacles[{i}] needs 'cell' and 'appears_at_step'")
        appears = entry["appears_at_step"]
        if not isinstance(appears, int) or isinstance(appears, bool):
            raise InvalidScenario(f"dynamic_obstacles[{i}].appears_at_step must be an integer")
        obstacles.append(DynamicObstacle(_as_pose(entry["cell"], f"dynamic_obstacles[{i}].cell"), appears))
    if not isinstance(doc["instruction_text"], str):
        raise InvalidScenario("instruction_text must be a string")
    sensing_radius = doc.get("sensing_radius", 1)
    seed = doc.get("seed", 0)
    if not isinstance(sensing_radius, int) or isinstance(sensing_radius, bool):
        raise InvalidScenario("sensing_radius must be an integer")
    if not isinstance(seed, int) or isinstance(seed, bool):
        raise InvalidScenario("seed must be an integer")

    scenario = Scenario(
        map=grid,
        start=_as_pose(doc["start"], "start"),
        goal=_as_pose(doc["goal"], "goal"),
        instruction_text=doc["instruction_text"],
        dynamic_obstacles=tuple(obstacles),
        sensing_radius=sensing_radius,
        seed=seed,
    )
    scenario.validate()
    return scenario


def load_scenario(path: str | Path) -> Scenario:
    """Read and parse a scenario file; map_file references resolve beside it."""
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise InvalidScenario(f"cannot read scenario file {p}: {exc}") from exc
    return parse_scenario(text, base_dir=p.parent)
