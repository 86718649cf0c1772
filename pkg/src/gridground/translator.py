"""Prompt rendering and reply parsing for chat-based planning (grammar_v1).

Serializers are byte-deterministic: equal inputs produce identical text.
Parsers are total: any input either parses or raises MalformedReply, never
anything else.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import TYPE_CHECKING, Sequence

from .errors import MalformedReply, OverlappingMarkers
from .gridmap import GridPose, OccupancyGrid

if TYPE_CHECKING:
    from .grounded import Instruction

GRAMMAR_VERSION = "grammar_v1"

SYSTEM_TEXT = (
    f"You are a navigation assistant for a 2-D occupancy grid ({GRAMMAR_VERSION}). "
    "Grid characters: '.' free, '#' occupied, '?' unknown, 'R' robot, 'G' goal. "
    "Coordinates are (x,y): x is the column, y is the row, (0,0) is the top-left "
    "cell and y grows downward. "
    "Answer with exactly the reply line requested and nothing else."
)


@dataclass(frozen=True)
class StepPrompt:
    system_text: str
    user_text: str


@dataclass(frozen=True)
class CoordinateReply:
    waypoints: tuple[GridPose, ...]


def _render_map(grid: OccupancyGrid, state: GridPose, goal: GridPose) -> str:
    if GridPose(*state) == GridPose(*goal):
        raise OverlappingMarkers(
            f"robot and goal both at ({state[0]},{state[1]}); a trivially solved "
            "query must be handled before prompt construction"
        )
    rows = []
    for y in range(grid.height):
        row = [c.value for c in grid.cells[y * grid.width:(y + 1) * grid.width]]
        rows.append(row)
    rows[state[1]][state[0]] = "R"
    rows[goal[1]][goal[0]] = "G"
    return "\n".join("".join(r) for r in rows)


def serialize_step_prompt(
    grid: OccupancyGrid,
    state: GridPose,
    instruction: "Instruction",
    candidates: Sequence[GridPose],
) -> StepPrompt:
    """Render the single-step scoring prompt.

    The user text holds exactly one map block (header line ``map <w>x<h>``
    then the grid with R/G markers), the instruction, and the four candidate
    moves in up/right/left/down order. Candidates may lie outside the grid
    or on blocked cells; they are printed as raw coordinates either way.

    Raises:
        OverlappingMarkers: state and goal are the same cell.
    """
    goal = instruction.goal
    c_up, c_right, c_left, c_down = candidates
    user_text = (
        f"map {grid.width}x{grid.height}\n"
        f"{_render_map(grid, state, goal)}\n"
        f"\n"
        f"Instruction: {instruction.text}\n"
        f"\n"
        f"The robot R is at ({state[0]},{state[1]}). The goal G is at ({goal[0]},{goal[1]}).\n"
        f"Candidate moves:\n"
        f"  up -> ({c_up[0]},{c_up[1]})\n"
        f"  right -> ({c_right[0]},{c_right[1]})\n"
        f"  left -> ({c_left[0]},{c_left[1]})\n"
        f"  down -> ({c_down[0]},{c_down[1]})\n"
        f"Rate each candidate with a non-negative score for being the best next step.\n"
        f"Reply with exactly one line: scores: <up> <right> <left> <down>\n"
    )
    return StepPrompt(SYSTEM_TEXT, user_text)


def serialize_fullpath_prompt(
    grid: OccupancyGrid, start: GridPose, instruction: "Instruction"
) -> StepPrompt:
    """Render the whole-path prompt; the reply grammar is a path: line."""
    goal = instruction.goal
    user_text = (
        f"map {grid.width}x{grid.height}\n"
        f"{_render_map(grid, start, goal)}\n"
        f"\n"
        f"Instruction: {instruction.text}\n"
        f"\n"
        f"The robot R is at ({start[0]},{start[1]}). The goal G is at ({goal[0]},{goal[1]}).\n"
        f"Plan a complete route from R to G moving only up, right, left, or down "
        f"through free cells.\n"
        f"Reply with exactly one line: path: (x1,y1) (x2,y2) ...\n"
    )
    return StepPrompt(SYSTEM_TEXT, user_text)


_NUMBER_RE = re.compile(r"(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?")
_PAIR_RE = re.compile(r"\(\s*(\d+)\s*,\s*(\d+)\s*\)")
_PAIR_LINE_RE = re.compile(r"\s*(?:\(\s*\d+\s*,\s*\d+\s*\)\s*)+")


def _as_text(reply: object) -> str:
    if isinstance(reply, bytes):
        return reply.decode("utf-8", errors="replace")
    if isinstance(reply, str):
        return reply
    raise MalformedReply(f"reply must be text, got {type(reply).__name__}")


def parse_action_scores(reply: str | bytes) -> tuple[float, float, float, float]:
    """Extract four scores from the last ``scores:`` line of a reply.

    Tolerates arbitrary surrounding prose; when several scores lines are
    present the last one wins. The line must carry exactly four unsigned
    finite decimal numbers, whitespace-separated.

    Raises:
        MalformedReply: no scores line, wrong arity, or a bad number. The
            exception carries the raw reply.
    """
    text = _as_text(reply)
    lines = [ln for ln in text.splitlines() if ln.lstrip().startswith("scores:")]
    if not lines:
        raise MalformedReply("no scores line found", reply=text)
    payload = lines[-1].lstrip()[len("scores:"):]
    tokens = payload.split()
    if len(tokens) != 4:
        raise MalformedReply(
            f"expected 4 scores, found {len(tokens)}", reply=text
        )
    values = []
    for tok in tokens:
        if not _NUMBER_RE.fullmatch(tok):
            raise MalformedReply(f"bad score token {tok!r}", reply=text)
        v = float(tok)
        if not math.isfinite(v):
            raise MalformedReply(f"non-finite score {tok!r}", reply=text)
        values.append(v)
    return (values[0], values[1], values[2], values[3])


def format_action_scores(scores: Sequence[float]) -> str:
    """Render a scores reply line at six significant digits."""
    if len(scores) != 4:
        raise ValueError(f"expected 4 scores, got {len(scores)}")
    rendered = []
    for v in scores:
        v = float(v)
        if not math.isfinite(v) or v < 0:
            raise ValueError(f"scores must be finite and non-negative, got {v!r}")
        rendered.append(f"{v + 0.0:.6g}")  # +0.0 normalizes -0.0
    return "scores: " + " ".join(rendered)


def parse_coordinate_list(reply: str | bytes) -> CoordinateReply:
    """Extract waypoints from the last ``path:`` line of a reply.

    Accepts ``(x,y)`` pairs separated by whitespace. Cell validity and step
    adjacency are deliberately not checked here; the simulator validates
    executed paths so bad model output stays measurable.

    Raises:
        MalformedReply: no path line, an empty one, or stray tokens on it.
    """
    text = _as_text(reply)
    lines = [ln for ln in text.splitlines() if ln.lstrip().startswith("path:")]
    if not lines:
        raise MalformedReply("no path line found", reply=text)
    payload = lines[-1].lstrip()[len("path:"):]
    if not _PAIR_LINE_RE.fullmatch(payload):
        raise MalformedReply(
            "path line must be whitespace-separated (x,y) pairs", reply=text
        )
    waypoints = tuple(GridPose(int(x), int(y)) for x, y in _PAIR_RE.findall(payload))
    return CoordinateReply(waypoints)


def format_coordinate_list(waypoints: Sequence[GridPose]) -> str:
    """Render a path reply line (inverse of parse_coordinate_list)."""
    if not waypoints:
        raise ValueError("waypoint list must be non-empty")
    return "path: " + " ".join(f"({p[0]},{p[1]})" for p in waypoints)
