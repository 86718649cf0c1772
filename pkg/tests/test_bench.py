import csv
import hashlib
import io

import pytest

import gridground.bench as bench
from gridground.bench import (
    CORRECTNESS_NOTE,
    CSV_HEADER,
    REFERENCE_NOTE,
    TrialPlanner,
    TrialResult,
    aggregate,
    format_report,
    fullpath_mock_reply,
    fullpath_oracle_reply,
    load_suite,
    plot_trajectories,
    register_planner,
    rows_to_csv,
    run_suite,
    run_suite_file,
    run_trial,
    trial_seed,
)
from gridground.classical import PlannedPath, astar, path_length
from gridground.errors import ConfigError, EmptyPathList, UnknownPlanner
from gridground.gridmap import GridPose
from gridground.grounded import Instruction
from gridground.simulator import Scenario

from conftest import grid_from_rows, open_grid


def corridor_scenario(**over):
    g = grid_from_rows([
        "#######",
        "#.....#",
        "#######",
    ])
    fields = dict(map=g, start=GridPose(1, 1), goal=GridPose(5, 1),
                  instruction_text="walk the corridor")
    fields.update(over)
    return Scenario(**fields)


def room_scenario():
    g = grid_from_rows([
        "#######",
        "#.....#",
        "#.....#",
        "#######",
    ])
    return Scenario(map=g, start=GridPose(1, 1), goal=GridPose(5, 2),
                    instruction_text="cross the room")


CORRIDOR_MAP_TEXT = "7 3 1.0\n#######\n#.....#\n#######\n"


def write_suite(tmp_path, planners=("astar",), trials=1):
    (tmp_path / "c.map").write_text(CORRIDOR_MAP_TEXT)
    (tmp_path / "case.yaml").write_text(
        "version: scenario_v1\n"
        "map_file: c.map\n"
        "start: [1, 1]\n"
        "goal: [5, 1]\n"
        "instruction_text: walk\n"
    )
    suite = tmp_path / "suite.yaml"
    planner_lines = "".join(f"  - {p}\n" for p in planners)
    suite.write_text(
        "version: suite_v1\n"
        f"planners:\n{planner_lines}"
        f"trials_per_pair: {trials}\n"
        "scenarios:\n"
        "  - id: corridor\n"
        "    file: case.yaml\n"
    )
    return suite


class TestTrialSeed:
    def test_sha256_prefix_big_endian(self):
        digest = hashlib.sha256(b"corridor|astar|0").digest()
        assert trial_seed("corridor", "astar", 0) == int.from_bytes(digest[:4], "big")

    def test_distinct_over_inputs(self):
        seeds = {
            trial_seed(sid, pid, i)
            for sid in ("a", "b") for pid in ("x", "y") for i in range(3)
        }
        assert len(seeds) == 12

    def test_stable_across_calls(self):
        assert trial_seed("s", "p", 5) == trial_seed("s", "p", 5)


class TestCsv:
    def test_header_frozen(self):
        assert CSV_HEADER == (
            "planner_id,scenario_id,seed,planning_time_ms,scorer_wall_time_ms,"
            "correct,path_length_m,replan_count"
        )

    def test_row_rendering(self):
        rows = [TrialResult("astar", "s", 7, 1.23456, 0.0, True, 4.0, 1),
                TrialResult("rrt", "s", 8, 0.5, 2.25, False, 0.0, 0)]
        text = rows_to_csv(rows)
        lines = text.splitlines()
        assert lines[0] == CSV_HEADER
        assert lines[1] == "astar,s,7,1.235,0.000,true,4.000000,1"
        assert lines[2] == "rrt,s,8,0.500,2.250,false,0.000000,0"
        assert text.endswith("\n") and "\r" not in text

    def test_parses_back_with_csv_module(self):
        rows = [TrialResult("astar", "s", 1, 0.0, 0.0, True, 1.0, 0)]
        parsed = list(csv.DictReader(io.StringIO(rows_to_csv(rows))))
        assert parsed[0]["planner_id"] == "astar"
        assert parsed[0]["correct"] == "true"


class TestAggregate:
    def rows(self):
        return [
            TrialResult("astar", "s", 1, 10.0, 0.0, True, 4.0, 0),
            TrialResult("astar", "s", 2, 20.0, 0.0, True, 6.0, 0),
            TrialResult("astar", "s", 3, 60.0, 0.0, False, 0.0, 0),
            TrialResult("grounded:mock", "s", 4, 1.0, 9.0, False, 0.0, 1),
        ]

    def test_per_planner_stats(self):
        report = aggregate(self.rows())
        st = report.per_planner["astar"]
        assert st.trials == 3
        assert st.correct_rate == pytest.approx(2 / 3)
        assert st.mean_planning_time_ms == pytest.approx(30.0)
        assert st.median_planning_time_ms == pytest.approx(20.0)
        assert st.mean_path_length_m == pytest.approx(5.0)  # correct trials only

    def test_no_correct_trials_mean_path_none(self):
        report = aggregate(self.rows())
        assert report.per_planner["grounded:mock"].mean_path_length_m is None

    def test_first_appearance_order(self):
        report = aggregate(self.rows())
        assert list(report.per_planner) == ["astar", "grounded:mock"]

    def test_header_carries_both_notes(self):
        report = aggregate(self.rows())
        assert report.header == f"{CORRECTNESS_NOTE}\n{REFERENCE_NOTE}"


class TestFormatReport:
    def test_layout_and_disclaimers(self):
        text = format_report(aggregate([
            TrialResult("astar", "s", 1, 10.0, 0.0, True, 4.0, 0),
            TrialResult("astar", "s", 2, 30.0, 0.0, False, 0.0, 0),
        ]))
        assert text.startswith("benchmark report\n")
        assert REFERENCE_NOTE in text
        assert CORRECTNESS_NOTE in text
        assert "NOT reproduction targets" in text
        header = "planner            trials  correct    mean_ms  median_ms  mean_path_m"
        assert header in text
        assert "  50.00%" in text

    def test_dash_for_missing_mean_path(self):
        text = format_report(aggregate([
            TrialResult("rrt", "s", 1, 1.0, 0.0, False, 0.0, 0),
        ]))
        assert text.rstrip().endswith("-")


class TestRunTrial:
    def test_astar_corridor(self):
        row = run_trial(corridor_scenario(), "astar", seed=3, scenario_id="c1")
        assert row.planner_id == "astar" and row.scenario_id == "c1" and row.seed == 3
        assert row.correct is True
        assert row.path_length_m == pytest.approx(4.0)
        assert row.replan_count == 0
        assert row.scorer_wall_time_ms == 0.0
        assert row.planning_time_ms >= 0.0

    def test_default_scenario_id(self):
        assert run_trial(corridor_scenario(), "astar", 0).scenario_id == "scenario"

    def test_grounded_mock_tracks_scorer_time(self):
        row = run_trial(corridor_scenario(), "grounded:mock", seed=0)
        assert row.correct is True
        assert row.scorer_wall_time_ms > 0.0

    def test_grounded_oracle_matches_astar_length(self):
        sc = room_scenario()
        oracle = run_trial(sc, "grounded:oracle", 0)
        classical = run_trial(sc, "astar", 0)
        assert oracle.correct and classical.correct
        assert oracle.path_length_m == pytest.approx(classical.path_length_m)

    def test_rrt_corridor(self):
        row = run_trial(corridor_scenario(), "rrt", seed=1)
        assert row.correct is True

    def test_fullpath_oracle(self):
        row = run_trial(corridor_scenario(), "fullpath:oracle", 0)
        assert row.correct and row.path_length_m == pytest.approx(4.0)

    def test_fullpath_mock_collides_on_walls(self):
        g = grid_from_rows(["..#.."])
        sc = Scenario(map=g, start=GridPose(0, 0), goal=GridPose(4, 0),
                      instruction_text="x")
        row = run_trial(sc, "fullpath:mock", 0)
        assert row.correct is False
        assert row.path_length_m == pytest.approx(1.0)  # stopped at the wall

    def test_unknown_planner_propagates(self):
        with pytest.raises(UnknownPlanner, match="registered"):
            run_trial(corridor_scenario(), "definitely-not-a-planner", 0)

    def test_failing_trial_recorded_not_raised(self):
        sc = corridor_scenario(instruction_text="")  # fails validation inside execute
        row = run_trial(sc, "astar", 5)
        assert row == TrialResult("astar", "scenario", 5, 0.0, 0.0, False, 0.0, 0)

    def test_unreachable_goal_zeroed(self):
        g = grid_from_rows([
            ".#.",
            ".#.",
            ".#.",
        ])
        sc = Scenario(map=g, start=GridPose(0, 0), goal=GridPose(2, 2),
                      instruction_text="x")
        row = run_trial(sc, "astar", 0)
        assert row.correct is False and row.path_length_m == 0.0

    def test_registered_planner_available(self):
        class Straight:
            def plan(self, grid, start, goal, instruction_text):
                p = astar(grid, start, goal)
                return list(p.waypoints) if p else None

            replan = plan

        register_planner("test:straight", lambda sc, seed: TrialPlanner(Straight()))
        try:
            assert run_trial(corridor_scenario(), "test:straight", 0).correct
        finally:
            del bench._REGISTRY["test:straight"]

    def test_registered_crashing_planner_zeroed(self):
        class Boom:
            def plan(self, grid, start, goal, instruction_text):
                raise RuntimeError("kaput")

            replan = plan

        register_planner("test:boom", lambda sc, seed: TrialPlanner(Boom()))
        try:
            row = run_trial(corridor_scenario(), "test:boom", 0)
            assert row.correct is False and row.planning_time_ms == 0.0
        finally:
            del bench._REGISTRY["test:boom"]


class TestFullpathReplies:
    def test_mock_staircase_x_then_y(self):
        g = open_grid(5, 5)
        reply = fullpath_mock_reply(g, GridPose(1, 3), Instruction("x", GridPose(3, 1)))
        assert reply == "path: (1,3) (2,3) (3,3) (3,2) (3,1)"

    def test_mock_handles_negative_direction(self):
        g = open_grid(4, 4)
        reply = fullpath_mock_reply(g, GridPose(3, 0), Instruction("x", GridPose(1, 0)))
        assert reply == "path: (3,0) (2,0) (1,0)"

    def test_oracle_renders_astar(self):
        g = grid_from_rows([
            "#######",
            "#.....#",
            "#######",
        ])
        reply = fullpath_oracle_reply(g, GridPose(1, 1), Instruction("x", GridPose(5, 1)))
        assert reply == "path: (1,1) (2,1) (3,1) (4,1) (5,1)"

    def test_oracle_reports_no_route(self):
        g = grid_from_rows([".#.", ".#.", ".#."])
        reply = fullpath_oracle_reply(g, GridPose(0, 0), Instruction("x", GridPose(2, 2)))
        assert reply == "no route found"

    def test_no_route_trial_is_clean_failure(self):
        g = grid_from_rows([".#.", ".#.", ".#."])
        sc = Scenario(map=g, start=GridPose(0, 0), goal=GridPose(2, 2),
                      instruction_text="x")
        row = run_trial(sc, "fullpath:oracle", 0)
        assert row.correct is False and row.replan_count == 0


def nontiming(row):
    return (row.planner_id, row.scenario_id, row.seed, row.correct,
            round(row.path_length_m, 9), row.replan_count)


class TestRunSuite:
    def scenarios(self):
        return [("corridor", corridor_scenario()), ("room", room_scenario())]

    def test_task_order_and_seeds(self):
        rows, report, samples = run_suite(self.scenarios(), ["astar", "rrt"], 2)
        keys = [(r.scenario_id, r.planner_id) for r in rows]
        assert keys == [
            ("corridor", "astar"), ("corridor", "astar"),
            ("corridor", "rrt"), ("corridor", "rrt"),
            ("room", "astar"), ("room", "astar"),
            ("room", "rrt"), ("room", "rrt"),
        ]
        for row, idx in zip(rows, [0, 1] * 4):
            assert row.seed == trial_seed(row.scenario_id, row.planner_id, idx)

    def test_deterministic_nontiming_columns(self):
        a, _, _ = run_suite(self.scenarios(), ["astar", "rrt", "grounded:mock"], 2)
        b, _, _ = run_suite(self.scenarios(), ["astar", "rrt", "grounded:mock"], 2)
        assert [nontiming(r) for r in a] == [nontiming(r) for r in b]

    def test_parallel_matches_serial(self):
        serial, _, _ = run_suite(self.scenarios(), ["astar", "grounded:mock"], 2)
        parallel, _, _ = run_suite(self.scenarios(), ["astar", "grounded:mock"], 2,
                                   parallelism=3)
        assert [nontiming(r) for r in serial] == [nontiming(r) for r in parallel]

    def test_samples_are_trial_zero_trajectories(self):
        rows, _, samples = run_suite([("corridor", corridor_scenario())], ["astar"], 3)
        assert set(samples) == {("corridor", "astar")}
        assert [tuple(p) for p in samples[("corridor", "astar")]] == [
            (1, 1), (2, 1), (3, 1), (4, 1), (5, 1),
        ]

    @pytest.mark.parametrize("scenarios,planners,trials", [
        ([], ["astar"], 1),
        ([("c", None)], [], 1),
        ([("c", None)], ["astar"], 0),
    ])
    def test_config_errors(self, scenarios, planners, trials):
        if scenarios and scenarios[0][1] is None:
            scenarios = [("c", corridor_scenario())]
        with pytest.raises(ConfigError):
            run_suite(scenarios, planners, trials)

    def test_unknown_planner_checked_up_front(self):
        with pytest.raises(UnknownPlanner):
            run_suite([("c", corridor_scenario())], ["astar", "nope"], 1)


class TestSuiteFiles:
    def test_load_suite(self, tmp_path):
        suite = load_suite(write_suite(tmp_path, planners=("astar", "grounded:mock"), trials=2))
        assert suite.planners == ["astar", "grounded:mock"]
        assert suite.trials_per_pair == 2
        assert suite.scenarios[0][0] == "corridor"
        assert suite.scenarios[0][1].goal == GridPose(5, 1)

    @pytest.mark.parametrize("text,msg", [
        ("version: suite_v2\n", "version"),
        ("planners: [astar]\ntrials_per_pair: 1\nscenarios: []\nversion: suite_v1\n", "scenarios"),
        ("planners: []\ntrials_per_pair: 1\nscenarios: [{id: a, file: f}]\nversion: suite_v1\n", "planners"),
        ("planners: [astar]\ntrials_per_pair: 0\nscenarios: [{id: a, file: f}]\nversion: suite_v1\n",
         "trials_per_pair"),
        ("planners: [astar]\ntrials_per_pair: true\nscenarios: [{id: a, file: f}]\nversion: suite_v1\n",
         "trials_per_pair"),
        ("planners: [astar]\ntrials_per_pair: 1\nscenarios: [{id: a}]\nversion: suite_v1\n",
         "id.*file|file"),
        ("planners: [astar\n", "cannot read|version"),
    ])
    def test_rejections(self, tmp_path, text, msg):
        path = tmp_path / "suite.yaml"
        path.write_text(text)
        with pytest.raises(ConfigError, match=msg):
            load_suite(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="cannot read"):
            load_suite(tmp_path / "absent.yaml")

    def test_run_suite_file_outputs(self, tmp_path):
        suite = write_suite(tmp_path, planners=("astar", "grounded:mock"), trials=2)
        out = tmp_path / "out"
        rows, report = run_suite_file(suite, out)
        assert len(rows) == 4
        csv_lines = (out / "rows.csv").read_text().splitlines()
        assert csv_lines[0] == CSV_HEADER
        assert len(csv_lines) == 5
        report_text = (out / "report.txt").read_text()
        assert "benchmark report" in report_text and REFERENCE_NOTE in report_text
        svg = (out / "trajectories_corridor.svg").read_text()
        assert svg.startswith("<svg ") and svg.rstrip().endswith("</svg>")
        assert "astar" in svg and "grounded:mock" in svg


class TestPlotTrajectories:
    def test_requires_paths(self):
        with pytest.raises(EmptyPathList):
            plot_trajectories(corridor_scenario(), [])

    def test_small_map_geometry(self):
        sc = corridor_scenario()
        path = PlannedPath(tuple(GridPose(x, 1) for x in range(1, 6)), 1.0)
        svg = plot_trajectories(sc, [("astar", path)])
        assert 'width="56"' in svg  # 7 cells * 8 px
        assert '<polyline points="12,12 20,12 28,12 36,12 44,12"' in svg
        # full wall rows merge into one rect each
        assert '<rect x="0" y="0" width="56" height="8" fill="#333333"/>' in svg
        # start marker hollow, goal marker filled
        assert 'fill="none" stroke="#000000"' in svg
        assert '<circle cx="44" cy="12" r="4.8" fill="#000000"/>' in svg
        assert ">astar</text>" in svg

    def test_large_map_uses_small_cells(self):
        g = open_grid(80, 10)
        sc = Scenario(map=g, start=GridPose(0, 0), goal=GridPose(79, 9),
                      instruction_text="x")
        svg = plot_trajectories(sc, [("p", PlannedPath((GridPose(0, 0), GridPose(1, 0)), 1.0))])
        assert 'width="320"' in svg  # 80 cells * 4 px

    def test_unknown_cells_grey(self):
        g = grid_from_rows(["?..", "..."])
        sc = Scenario(map=g, start=GridPose(1, 0), goal=GridPose(2, 1),
                      instruction_text="x")
        svg = plot_trajectories(sc, [("p", PlannedPath((GridPose(1, 0), GridPose(2, 0)), 1.0))])
        assert 'fill="#bbbbbb"' in svg

    def test_deterministic_bytes(self):
        sc = corridor_scenario()
        path = PlannedPath(tuple(GridPose(x, 1) for x in range(1, 6)), 1.0)
        assert plot_trajectories(sc, [("a", path)]) == plot_trajectories(sc, [("a", path)])

    def test_legend_cycles_palette(self):
        sc = corridor_scenario()
        path = PlannedPath((GridPose(1, 1), GridPose(2, 1)), 1.0)
        svg = plot_trajectories(sc, [(f"p{i}", path) for i in range(3)])
        assert svg.count("<text") == 3
        assert 'stroke="#d62728"' in svg and 'stroke="#1f77b4"' in svg
