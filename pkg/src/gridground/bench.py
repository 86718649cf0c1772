"""Benchmark harness: repeated trials, aggregate metrics, CSV/report/SVG output.

Trial identity is deterministic: the seed for (scenario, planner, index) is a
stable hash, so two runs of the same suite agree on every non-timing column.
Planning time and scorer wall time are separate columns; transport latency
never pollutes algorithmic time.
"""

from __future__ import annotations

import csv
import hashlib
import io
import statistics
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

import yaml

from .classical import PlannedPath, RrtParams, astar, path_length, rrt
from .errors import ConfigError, EmptyPathList, MalformedReply, UnknownPlanner
from .gridmap import CellState, Connectivity, GridPose, OccupancyGrid
from .grounded import Instruction, PlannerConfig, plan as grounded_plan
from .scorers import MockScorer, OracleScorer, TaskScorerQuery
from . import translator
from .simulator import Scenario, SimPlanner, execute, load_scenario, validate_external_path

CSV_HEADER = (
    "planner_id,scenario_id,seed,planning_time_ms,scorer_wall_time_ms,"
    "correct,path_length_m,replan_count"
)

SUITE_VERSION = "suite_v1"

# Shown verbatim at the top of every report. The cited absolute numbers come
# from the original GPT-3.5-turbo grid-planning experiments and are context
# only; desk-scale reruns use different maps, hardware, and scorer backends.
REFERENCE_NOTE = (
    "reference results (context only, NOT reproduction targets): "
    "GPT-3.5-turbo 10 ms mean planning, 81% correct, 6.34 m mean path; "
    "A* 72 ms, 95%; RRT 21 ms, 87%."
)

CORRECTNESS_NOTE = (
    "correctness is per-trial: a trial counts as correct iff the executed "
    "path reaches the goal collision-free and passes structural validation "
    "(start anchoring, 4-connected steps, free cells, goal termination)."
)


@dataclass
class TrialResult:
    """One row of the raw results table."""

    planner_id: str
    scenario_id: str
    seed: int
    planning_time_ms: float
    scorer_wall_time_ms: float
    correct: bool
    path_length_m: float
    replan_count: int


# --- planner adapters -------------------------------------------------------


class _AstarPlanner:
    def __init__(self, connectivity: Connectivity = Connectivity.FOUR):
        self.connectivity = connectivity

    def plan(self, grid, start, goal, instruction_text):
        p = astar(grid, start, goal, self.connectivity)
        return list(p.waypoints) if p else None

    def replan(self, grid, current, goal, instruction_text):
        return self.plan(grid, current, goal, instruction_text)


class _RrtPlanner:
    def __init__(self, params: RrtParams):
        self.params = params

    def plan(self, grid, start, goal, instruction_text):
        p = rrt(grid, start, goal, self.params)
        return list(p.waypoints) if p else None

    def replan(self, grid, current, goal, instruction_text):
        return self.plan(grid, current, goal, instruction_text)


class _GroundedPlanner:
    def __init__(self, scorer, config: PlannerConfig | None = None):
        self.scorer = scorer
        self.config = config

    def plan(self, grid, start, goal, instruction_text):
        result = grounded_plan(
            self.scorer, grid, start, Instruction(instruction_text, GridPose(*goal)), self.config
        )
        return list(result.path.waypoints) if result.succeeded else None

    def replan(self, grid, current, goal, instruction_text):
        return self.plan(grid, current, goal, instruction_text)


# fullpath reply producers return raw model-style text; the adapter parses it
ReplyFn = Callable[[OccupancyGrid, GridPose, Instruction], str]


def fullpath_mock_reply(grid: OccupancyGrid, start: GridPose, instruction: Instruction) -> str:
    # obstacle-blind staircase: x first, then y; wrong on walled maps by design
    x, y = start
    gx, gy = instruction.goal
    cells = [GridPose(x, y)]
    while x != gx:
        x += 1 if gx > x else -1
        cells.append(GridPose(x, y))
    while y != gy:
        y += 1 if gy > y else -1
        cells.append(GridPose(x, y))
    return translator.format_coordinate_list(cells)


def fullpath_oracle_reply(grid: OccupancyGrid, start: GridPose, instruction: Instruction) -> str:
    p = astar(grid, start, instruction.goal, Connectivity.FOUR)
    if p is None:
        return "no route found"
    return translator.format_coordinate_list(list(p.waypoints))


class _FullpathPlanner:
    def __init__(self, reply_fn: ReplyFn):
        self.reply_fn = reply_fn

    def plan(self, grid, start, goal, instruction_text):
        instruction = Instruction(instruction_text, GridPose(*goal))
        try:
            reply = self.reply_fn(grid, GridPose(*start), instruction)
            parsed = translator.parse_coordinate_list(reply)
        except MalformedReply:
            return None
        return list(parsed.waypoints)

    def replan(self, grid, current, goal, instruction_text):
        return self.plan(grid, current, goal, instruction_text)


# --- registry ---------------------------------------------------------------


@dataclass
class TrialPlanner:
    """A planner instance plus the scorer whose wall time must be tracked."""

    planner: SimPlanner
    scorer: object | None = None


PlannerFactory = Callable[[Scenario, int], TrialPlanner]


def _make_grounded(scorer_factory) -> PlannerFactory:
    def factory(scenario: Scenario, seed: int) -> TrialPlanner:
        scorer = scorer_factory()
        return TrialPlanner(_GroundedPlanner(scorer), scorer)

    return factory


_REGISTRY: dict[str, PlannerFactory] = {
    "astar": lambda scenario, seed: TrialPlanner(_AstarPlanner()),
    "rrt": lambda scenario, seed: TrialPlanner(_RrtPlanner(RrtParams(seed=seed))),
    "grounded:mock": _make_grounded(lambda: MockScorer(tau=0.5)),
    "grounded:oracle": _make_grounded(OracleScorer),
    "fullpath:mock": lambda scenario, seed: TrialPlanner(_FullpathPlanner(fullpath_mock_reply)),
    "fullpath:oracle": lambda scenario, seed: TrialPlanner(_FullpathPlanner(fullpath_oracle_reply)),
}


def register_planner(planner_id: str, factory: PlannerFactory) -> None:
    """Add or replace a planner id (e.g. a remote-backed grounded planner)."""
    _REGISTRY[planner_id] = factory


def make_planner(planner_id: str, scenario: Scenario, seed: int) -> TrialPlanner:
    factory = _REGISTRY.get(planner_id)
    if factory is None:
        raise UnknownPlanner(
            f"unknown planner id {planner_id!r}; registered: {sorted(_REGISTRY)}"
        )
    return factory(scenario, seed)


# --- timing wrappers --------------------------------------------------------


class _TimedScorer:
    def __init__(self, scorer):
        self.scorer = scorer
        self.elapsed_s = 0.0

    def __call__(self, query: TaskScorerQuery):
        t0 = time.perf_counter()
        try:
            return self.scorer(query)
        finally:
            self.elapsed_s += time.perf_counter() - t0


class _TimedPlanner:
    def __init__(self, planner: SimPlanner):
        self.planner = planner
        self.elapsed_s = 0.0

    def plan(self, grid, start, goal, instruction_text):
        t0 = time.perf_counter()
        try:
            return self.planner.plan(grid, start, goal, instruction_text)
        finally:
            self.elapsed_s += time.perf_counter() - t0

    def replan(self, grid, current, goal, instruction_text):
        t0 = time.perf_counter()
        try:
            return self.planner.replan(grid, current, goal, instruction_text)
        finally:
            self.elapsed_s += time.perf_counter() - t0


# --- trials -----------------------------------------------------------------


def trial_seed(scenario_id: str, planner_id: str, trial_index: int) -> int:
    """Stable per-trial seed; process-salted hash() must not be used here."""
    digest = hashlib.sha256(f"{scenario_id}|{planner_id}|{trial_index}".encode("utf-8")).digest()
    return int.from_bytes(digest[:4], "big")


def _run_trial_full(
    scenario: Scenario, planner_id: str, seed: int, scenario_id: str
) -> tuple[TrialResult, list[GridPose]]:
    tp = make_planner(planner_id, scenario, seed)  # UnknownPlanner propagates
    visited: list[GridPose] = [GridPose(*scenario.start)]
    try:
        if tp.scorer is not None:
            timed_scorer = _TimedScorer(tp.scorer)
            tp.planner.scorer = timed_scorer  # type: ignore[attr-defined]
        else:
            timed_scorer = None
        timed = _TimedPlanner(tp.planner)
        record = execute(scenario, timed)
        visited = record.visited
        correct = (
            record.reached_goal
            and not record.collided
            and validate_external_path(scenario, record.visited).valid
        )
        scorer_ms = timed_scorer.elapsed_s * 1000.0 if timed_scorer else 0.0
        planning_ms = max(timed.elapsed_s * 1000.0 - scorer_ms, 0.0)
        length_m = path_length(PlannedPath(tuple(record.visited), scenario.map.resolution))
        row = TrialResult(
            planner_id=planner_id,
            scenario_id=scenario_id,
            seed=seed,
            planning_time_ms=planning_ms,
            scorer_wall_time_ms=scorer_ms,
            correct=correct,
            path_length_m=length_m,
            replan_count=record.replan_count,
        )
    except Exception:
        # a failed trial is data, not a crash: record it as incorrect
        row = TrialResult(planner_id, scenario_id, seed, 0.0, 0.0, False, 0.0, 0)
    return row, visited


def run_trial(
    scenario: Scenario, planner_id: str, seed: int, scenario_id: str = "scenario"
) -> TrialResult:
    """Execute one trial; only planner plan/replan calls are timed.

    Raises:
        UnknownPlanner: planner_id is not registered. Any failure inside the
            trial itself is recorded as correct=False instead of raising.
    """
    row, _ = _run_trial_full(scenario, planner_id, seed, scenario_id)
    return row


# --- suites -----------------------------------------------------------------


@dataclass
class PlannerStats:
    planner_id: str
    trials: int
    correct_rate: float
    mean_planning_time_ms: float
    median_planning_time_ms: float
    mean_path_length_m: float | None  # over correct trials only


@dataclass
class AggregateReport:
    header: str
    per_planner: dict[str, PlannerStats]


def aggregate(rows: Sequence[TrialResult]) -> AggregateReport:
    """Recompute aggregate statistics from raw rows (pure function)."""
    order: list[str] = []
    grouped: dict[str, list[TrialResult]] = {}
    for row in rows:
        if row.planner_id not in grouped:
            order.append(row.planner_id)
            grouped[row.planner_id] = []
        grouped[row.planner_id].append(row)
    per: dict[str, PlannerStats] = {}
    for pid in order:
        rs = grouped[pid]
        correct = [r for r in rs if r.correct]
        per[pid] = PlannerStats(
            planner_id=pid,
            trials=len(rs),
            correct_rate=len(correct) / len(rs),
            mean_planning_time_ms=statistics.mean(r.planning_time_ms for r in rs),
            median_planning_time_ms=statistics.median(r.planning_time_ms for r in rs),
            mean_path_length_m=(
                statistics.mean(r.path_length_m for r in correct) if correct else None
            ),
        )
    header = f"{CORRECTNESS_NOTE}\n{REFERENCE_NOTE}"
    return AggregateReport(header=header, per_planner=per)


def rows_to_csv(rows: Sequence[TrialResult]) -> str:
    """Render raw rows with the fixed header and LF line endings."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER.split(","))
    for r in rows:
        writer.writerow(
            [
                r.planner_id,
                r.scenario_id,
                r.seed,
                f"{r.planning_time_ms:.3f}",
                f"{r.scorer_wall_time_ms:.3f}",
                "true" if r.correct else "false",
                f"{r.path_length_m:.6f}",
                r.replan_count,
            ]
        )
    return buf.getvalue()


def format_report(report: AggregateReport) -> str:
    """Plain-text report: disclaimer header plus a per-planner table."""
    lines = ["benchmark report", "", report.header, ""]
    lines.append(
        f"{'planner':<18} {'trials':>6} {'correct':>8} "
        f"{'mean_ms':>10} {'median_ms':>10} {'mean_path_m':>12}"
    )
    for pid, st in report.per_planner.items():
        path_m = f"{st.mean_path_length_m:.3f}" if st.mean_path_length_m is not None else "-"
        lines.append(
            f"{pid:<18} {st.trials:>6} {st.correct_rate:>8.2%} "
            f"{st.mean_planning_time_ms:>10.3f} {st.median_planning_time_ms:>10.3f} {path_m:>12}"
        )
    return "\n".join(lines) + "\n"


def run_suite(
    scenarios: Sequence[tuple[str, Scenario]],
    planners: Sequence[str],
    trials_per_pair: int,
    parallelism: int = 1,
) -> tuple[list[TrialResult], AggregateReport, dict[tuple[str, str], list[GridPose]]]:
    """Run every (scenario, planner, trial) combination.

    Returns the raw rows in deterministic task order, the aggregate report,
    and one sample trajectory (trial 0) per pair for plotting.

    Raises:
        ConfigError: empty suite or nonpositive trial count.
        UnknownPlanner: an unregistered planner id.
    """
    if not scenarios or not planners or trials_per_pair < 1:
        raise ConfigError("suite needs scenarios, planners, and trials_per_pair >= 1")
    for pid in planners:
        if pid not in _REGISTRY:
            raise UnknownPlanner(f"unknown planner id {pid!r}; registered: {sorted(_REGISTRY)}")
    tasks = [
        (sid, scenario, pid, idx)
        for sid, scenario in scenarios
        for pid in planners
        for idx in range(trials_per_pair)
    ]

    def one(task):
        sid, scenario, pid, idx = task
        return _run_trial_full(scenario, pid, trial_seed(sid, pid, idx), sid), (sid, pid, idx)

    results = []
    if parallelism > 1:
        with ThreadPoolExecutor(max_workers=parallelism) as pool:
            results = list(pool.map(one, tasks))
    else:
        results = [one(t) for t in tasks]

    rows: list[TrialResult] = []
    samples: dict[tuple[str, str], list[GridPose]] = {}
    for (row, visited), (sid, pid, idx) in results:
        rows.append(row)
        if idx == 0:
            samples[(sid, pid)] = visited
    return rows, aggregate(rows), samples


# --- suite files (suite_v1) -------------------------------------------------


@dataclass
class Suite:
    scenarios: list[tuple[str, Scenario]]
    planners: list[str]
    trials_per_pair: int


def load_suite(path: str | Path) -> Suite:
    """Read a suite_v1 file; scenario paths resolve beside it."""
    p = Path(path)
    try:
        doc = yaml.safe_load(p.read_text(encoding="utf-8"))
    except (OSError, yaml.YAMLError) as exc:
        raise ConfigError(f"cannot read suite file {p}: {exc}") from exc
    if not isinstance(doc, dict) or doc.get("version") != SUITE_VERSION:
        raise ConfigError(f"suite file must declare version {SUITE_VERSION!r}")
    entries = doc.get("scenarios")
    planners = doc.get("planners")
    trials = doc.get("trials_per_pair")
    if not isinstance(entries, list) or not entries:
        raise ConfigError("suite needs a non-empty 'scenarios' list")
    if not isinstance(planners, list) or not all(isinstance(x, str) for x in planners) or not planners:
        raise ConfigError("suite needs a non-empty 'planners' list of ids")
    if not isinstance(trials, int) or isinstance(trials, bool) or trials < 1:
        raise ConfigError("'trials_per_pair' must be a positive integer")
    scenarios = []
    for i, entry in enumerate(entries):
        if not isinstance(entry, dict) or "id" not in entry or "file" not in entry:
            raise ConfigError(f"scenarios[{i}] needs 'id' and 'file'")
        scenarios.append((str(entry["id"]), load_scenario(p.parent / entry["file"])))
    return Suite(scenarios=scenarios, planners=list(planners), trials_per_pair=trials)


def run_suite_file(
    suite_path: str | Path, out_dir: str | Path, parallelism: int = 1
) -> tuple[list[TrialResult], AggregateReport]:
    """Run a suite file and write rows.csv, report.txt, and one SVG per scenario.

    Raw rows land on disk before any aggregation happens.
    """
    suite = load_suite(suite_path)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows, report, samples = run_suite(
        suite.scenarios, suite.planners, suite.trials_per_pair, parallelism
    )
    (out / "rows.csv").write_text(rows_to_csv(rows), encoding="utf-8")
    (out / "report.txt").write_text(format_report(report), encoding="utf-8")
    for sid, scenario in suite.scenarios:
        labeled = []
        for pid in suite.planners:
            visited = samples.get((sid, pid))
            if visited:
                labeled.append((pid, PlannedPath(tuple(visited), scenario.map.resolution)))
        if labeled:
            (out / f"trajectories_{sid}.svg").write_text(
                plot_trajectories(scenario, labeled), encoding="utf-8"
            )
    return rows, report


# --- trajectory plots -------------------------------------------------------

_PALETTE = ("#d62728", "#1f77b4", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#17becf")


def plot_trajectories(
    scenario: Scenario, paths: Sequence[tuple[str, PlannedPath]]
) -> str:
    """Render the map plus labeled trajectories as a deterministic SVG string.

    Occupied cells are dark, unknown cells grey; each path is a polyline
    through cell centers with a legend entry. Equal inputs give identical
    bytes, so plots can be diffed across runs.

    Raises:
        EmptyPathList: no paths were given.
    """
    if not paths:
        raise EmptyPathList("at least one labeled path is required")
    grid = scenario.map
    cell = 8 if max(grid.width, grid.height) <= 64 else 4
    legend_h = 16 * len(paths) + 8
    width_px = grid.width * cell
    height_px = grid.height * cell + legend_h
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width_px}" height="{height_px}" '
        f'viewBox="0 0 {width_px} {height_px}">',
        f'<rect x="0" y="0" width="{width_px}" height="{height_px}" fill="#ffffff"/>',
    ]
    # run-length merge per row keeps the file small on big maps
    for y in range(grid.height):
        x = 0
        while x < grid.width:
            state = grid.cells[y * grid.width + x]
            if state is CellState.FREE:
                x += 1
                continue
            x0 = x
            while x < grid.width and grid.cells[y * grid.width + x] is state:
                x += 1
            fill = "#333333" if state is CellState.OCCUPIED else "#bbbbbb"
            out.append(
                f'<rect x="{x0 * cell}" y="{y * cell}" width="{(x - x0) * cell}" '
                f'height="{cell}" fill="{fill}"/>'
            )
    for i, (label, path) in enumerate(paths):
        color = _PALETTE[i % len(_PALETTE)]
        pts = " ".join(
            f"{(p[0] + 0.5) * cell:g},{(p[1] + 0.5) * cell:g}" for p in path.waypoints
        )
        out.append(
            f'<polyline points="{pts}" fill="none" stroke="{color}" '
            f'stroke-width="{max(cell // 4, 1)}" stroke-opacity="0.85"/>'
        )
    sx, sy = (scenario.start[0] + 0.5) * cell, (scenario.start[1] + 0.5) * cell
    gx, gy = (scenario.goal[0] + 0.5) * cell, (scenario.goal[1] + 0.5) * cell
    out.append(f'<circle cx="{sx:g}" cy="{sy:g}" r="{cell * 0.6:g}" fill="none" stroke="#000000" stroke-width="2"/>')
    out.append(f'<circle cx="{gx:g}" cy="{gy:g}" r="{cell * 0.6:g}" fill="#000000"/>')
    for i, (label, _) in enumerate(paths):
        color = _PALETTE[i % len(_PALETTE)]
        ly = grid.height * cell + 14 + 16 * i
        out.append(f'<rect x="4" y="{ly - 8}" width="18" height="4" fill="{color}"/>')
        out.append(
            f'<text x="28" y="{ly}" font-family="monospace" font-size="12" fill="#000000">{label}</text>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"
