"""Classical grid planners: A*, a uniform-cost oracle, and RRT.

Costs are measured in cells: 1 per cardinal step, sqrt(2) per diagonal step.
path_length converts to meters via the grid resolution.
"""

from __future__ import annotations

import heapq
import math
import random
from dataclasses import dataclass
from itertools import count

from .errors import EmptyPath, InvalidEndpoint, InvalidParams
from .gridmap import CellState, Connectivity, GridPose, OccupancyGrid, neighbors

SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class PlannedPath:
    """A sequence of grid waypoints plus the resolution they were planned at."""

    waypoints: tuple[GridPose, ...]
    resolution: float


def path_length(path: PlannedPath) -> float:
    """Sum of Euclidean segment lengths in meters.

    Raises:
        EmptyPath: the path has no waypoints.
    """
    if not path.waypoints:
        raise EmptyPath("path has no waypoints")
    total = 0.0
    for a, b in zip(path.waypoints, path.waypoints[1:]):
        total += math.hypot(b[0] - a[0], b[1] - a[1])
    return total * path.resolution


def path_cost_cells(path: PlannedPath) -> float:
    """Path cost in cell units (1 per cardinal step, sqrt(2) per diagonal)."""
    if not path.waypoints:
        raise EmptyPath("path has no waypoints")
    total = 0.0
    for a, b in zip(path.waypoints, path.waypoints[1:]):
        total += SQRT2 if a[0] != b[0] and a[1] != b[1] else 1.0
    return total


def _check_endpoints(grid: OccupancyGrid, start: GridPose, goal: GridPose) -> None:
    for name, p in (("start", start), ("goal", goal)):
        if not grid.in_bounds(p[0], p[1]):
            raise InvalidEndpoint(f"{name} ({p[0]},{p[1]}) outside {grid.width}x{grid.height} grid")
        if grid.cells[p[1] * grid.width + p[0]] is not CellState.FREE:
            raise InvalidEndpoint(f"{name} ({p[0]},{p[1]}) is not a free cell")


def astar(
    grid: OccupancyGrid,
    start: GridPose,
    goal: GridPose,
    connectivity: Connectivity = Connectivity.FOUR,
) -> PlannedPath | None:
    """Deterministic A* over the grid.

    Uses the Manhattan heuristic under four-connectivity and the octile
    heuristic under eight-connectivity; both are admissible for the step
    costs above. Open-list ties break on lowest f, then lowest h, then
    insertion order, which makes repeated runs byte-identical.

    Returns:
        The optimal path, or None when the goal is unreachable.

    Raises:
        InvalidEndpoint: start or goal out of bounds or not Free.
    """
    _check_endpoints(grid, start, goal)
    start, goal = GridPose(*start), GridPose(*goal)
    if start == goal:
        return PlannedPath((start,), grid.resolution)

    if connectivity is Connectivity.FOUR:
        def h(p: GridPose) -> float:
            return abs(p.x - goal.x) + abs(p.y - goal.y)
    else:
        def h(p: GridPose) -> float:
            dx, dy = abs(p.x - goal.x), abs(p.y - goal.y)
            return max(dx, dy) + (SQRT2 - 1.0) * min(dx, dy)

    tick = count()
    g: dict[GridPose, float] = {start: 0.0}
    parent: dict[GridPose, GridPose] = {}
    open_heap: list[tuple[float, float, int, GridPose]] = [(h(start), h(start), next(tick), start)]
    closed: set[GridPose] = set()

    while open_heap:
        _, _, _, cur = heapq.heappop(open_heap)
        if cur in closed:
            continue
        closed.add(cur)
        if cur == goal:
            path = [cur]
            while path[-1] != start:
                path.append(parent[path[-1]])
            path.reverse()
            return PlannedPath(tuple(path), grid.resolution)
        for nb in neighbors(grid, cur, connectivity):
            if nb in closed:
                continue
            step = SQRT2 if nb.x != cur.x and nb.y != cur.y else 1.0
            ng = g[cur] + step
            if ng < g.get(nb, math.inf):
                g[nb] = ng
                parent[nb] = cur
                hn = h(nb)
                heapq.heappush(open_heap, (ng + hn, hn, next(tick), nb))
    return None


def dijkstra_oracle(
    grid: OccupancyGrid,
    start: GridPose,
    goal: GridPose,
    connectivity: Connectivity = Connectivity.FOUR,
) -> float | None:
    """Exhaustive uniform-cost search; returns the optimal cost in cells.

    Heuristic-free reference used to cross-check astar in tests. Returns
    None when the goal is unreachable.
    """
    _check_endpoints(grid, start, goal)
    start, goal = GridPose(*start), GridPose(*goal)
    dist: dict[GridPose, float] = {start: 0.0}
    settled: set[GridPose] = set()
    tick = count()
    pq: list[tuple[float, int, GridPose]] = [(0.0, next(tick), start)]
    while pq:
        d, _, cur = heapq.heappop(pq)
        if cur in settled:
            continue
        settled.add(cur)
        for nb in neighbors(grid, cur, connectivity):
            if nb in settled:
                continue
            step = SQRT2 if nb.x != cur.x and nb.y != cur.y else 1.0
            nd = d + step
            if nd < dist.get(nb, math.inf):
                dist[nb] = nd
                heapq.heappush(pq, (nd, next(tick), nb))
    return dist[goal] if goal in settled else None


def distance_field(
    grid: OccupancyGrid, goal: GridPose, connectivity: Connectivity = Connectivity.FOUR
) -> list[float]:
    """Cost-to-goal for every cell, row-major; unreachable cells hold inf.

    BFS under four-connectivity (all steps cost 1), Dijkstra otherwise.
    A blocked or out-of-bounds goal yields an all-inf field.
    """
    field = [math.inf] * (grid.width * grid.height)
    if not grid.in_bounds(goal[0], goal[1]):
        return field
    if grid.cells[goal[1] * grid.width + goal[0]] is not CellState.FREE:
        return field
    goal = GridPose(*goal)
    if connectivity is Connectivity.FOUR:
        from collections import deque

        field[goal.y * grid.width + goal.x] = 0.0
        queue = deque([goal])
        while queue:
            cur = queue.popleft()
            d = field[cur.y * grid.width + cur.x]
            for nb in neighbors(grid, cur, Connectivity.FOUR):
                idx = nb.y * grid.width + nb.x
                if field[idx] == math.inf:
                    field[idx] = d + 1.0
                    queue.append(nb)
        return field
    tick = count()
    field[goal.y * grid.width + goal.x] = 0.0
    pq: list[tuple[float, int, GridPose]] = [(0.0, next(tick), goal)]
    settled: set[GridPose] = set()
    while pq:
        d, _, cur = heapq.heappop(pq)
        if cur in settled:
            continue
        settled.add(cur)
        for nb in neighbors(grid, cur, connectivity):
            step = SQRT2 if nb.x != cur.x and nb.y != cur.y else 1.0
            idx = nb.y * grid.width + nb.x
            if d + step < field[idx]:
                field[idx] = d + step
                heapq.heappush(pq, (d + step, next(tick), nb))
    return field


# --- RRT ---


@dataclass
class RrtParams:
    """Tuning knobs for rrt; defaults follow the documented contract."""

    step_size: float = 3.0
    goal_bias: float = 0.05
    max_iterations: int = 5000
    goal_tolerance: float = 1.0
    seed: int = 0


@dataclass
class RrtTree:
    """Grown tree exposed for edge-level inspection in tests."""

    points: list[tuple[float, float]]
    parents: list[int]
    accepted: int | None  # index of the node that reached the goal region


Point = tuple[float, float]


def _cell_of(p: Point) -> GridPose:
    return GridPose(int(math.floor(p[0])), int(math.floor(p[1])))


def _center(c: GridPose) -> Point:
    return (c[0] + 0.5, c[1] + 0.5)


def _traverse(p0: Point, p1: Point, supercover: bool) -> list[GridPose]:
    # Amanatides-Woo grid walk. With supercover=True an exact corner
    # crossing contributes both side cells (every touched cell appears);
    # otherwise the walk steps x first so consecutive cells stay 4-adjacent.
    x, y = _cell_of(p0)
    xe, ye = _cell_of(p1)
    cells = [GridPose(x, y)]
    dx, dy = p1[0] - p0[0], p1[1] - p0[1]
    step_x = 1 if dx > 0 else -1 if dx < 0 else 0
    step_y = 1 if dy > 0 else -1 if dy < 0 else 0
    if step_x > 0:
        t_max_x = (x + 1 - p0[0]) / dx
    elif step_x < 0:
        t_max_x = (x - p0[0]) / dx
    else:
        t_max_x = math.inf
    if step_y > 0:
        t_max_y = (y + 1 - p0[1]) / dy
    elif step_y < 0:
        t_max_y = (y - p0[1]) / dy
    else:
        t_max_y = math.inf
    t_delta_x = abs(1.0 / dx) if dx else math.inf
    t_delta_y = abs(1.0 / dy) if dy else math.inf

    cap = abs(xe - x) + abs(ye - y) + 4
    for _ in range(cap):
        if (x, y) == (xe, ye):
            break
        if min(t_max_x, t_max_y) >= 1.0:
            break  # next crossing sits at or past the endpoint
        if t_max_x < t_max_y:
            x += step_x
            t_max_x += t_delta_x
        elif t_max_y < t_max_x:
            y += step_y
            t_max_y += t_delta_y
        else:
            # exact corner crossing
            if supercover:
                cells.append(GridPose(x + step_x, y))
                cells.append(GridPose(x, y + step_y))
            else:
                cells.append(GridPose(x + step_x, y))
            x += step_x
            y += step_y
            t_max_x += t_delta_x
            t_max_y += t_delta_y
        cells.append(GridPose(x, y))
    if (x, y) != (xe, ye):
        # Endpoint lies exactly on a boundary of the current cell; its floor
        # cell was never entered by a crossing below t=1. Bridge to it, going
        # through the x-side cell first when the endpoint is a corner so the
        # non-supercover walk stays 4-adjacent.
        if x != xe and y != ye:
            cells.append(GridPose(xe, y))
            if supercover:
                cells.append(GridPose(x, ye))
        cells.append(GridPose(xe, ye))
    return cells


def supercover_cells(p0: Point, p1: Point) -> list[GridPose]:
    """Every cell the segment touches, side cells included at corner crossings."""
    return _traverse(p0, p1, supercover=True)


def chain_cells(p0: Point, p1: Point) -> list[GridPose]:
    """Cells along the segment as a 4-adjacent chain (subset of the supercover)."""
    return _traverse(p0, p1, supercover=False)


def _edge_free(grid: OccupancyGrid, p0: Point, p1: Point) -> bool:
    for c in supercover_cells(p0, p1):
        if not grid.in_bounds(c.x, c.y):
            return False
        if grid.cells[c.y * grid.width + c.x] is not CellState.FREE:
            return False
    return True


def grow_rrt_tree(
    grid: OccupancyGrid, start: GridPose, goal: GridPose, params: RrtParams
) -> RrtTree:
    """Grow the tree until a node lands in the goal region or iterations run out.

    One RNG stream seeded from params.seed is consumed in a fixed order per
    iteration: the free-space sample (x then y per rejection attempt), then
    the goal-bias coin. Every accepted edge passes the supercover check.
    """
    if not (params.step_size > 0):
        raise InvalidParams(f"step_size must be > 0, got {params.step_size}")
    if not (0.0 <= params.goal_bias <= 1.0):
        raise InvalidParams(f"goal_bias must be in [0, 1], got {params.goal_bias}")
    if params.max_iterations < 1:
        raise InvalidParams(f"max_iterations must be >= 1, got {params.max_iterations}")
    if params.goal_tolerance < 0:
        raise InvalidParams(f"goal_tolerance must be >= 0, got {params.goal_tolerance}")
    _check_endpoints(grid, start, goal)

    rng = random.Random(params.seed)
    goal_c = _center(GridPose(*goal))
    tree = RrtTree(points=[_center(GridPose(*start))], parents=[-1], accepted=None)

    if GridPose(*start) == GridPose(*goal):
        tree.accepted = 0
        return tree
    if math.dist(tree.points[0], goal_c) <= params.goal_tolerance and _edge_free(
        grid, tree.points[0], goal_c
    ):
        tree.accepted = 0
        return tree

    for _ in range(params.max_iterations):
        while True:
            sx = rng.uniform(0.0, grid.width)
            sy = rng.uniform(0.0, grid.height)
            c = _cell_of((sx, sy))
            if grid.in_bounds(c.x, c.y) and grid.cells[c.y * grid.width + c.x] is CellState.FREE:
                break
        target: Point = goal_c if rng.random() < params.goal_bias else (sx, sy)

        best_i, best_d = 0, math.inf
        for i, p in enumerate(tree.points):
            d = math.dist(p, target)
            if d < best_d:
                best_i, best_d = i, d
        near = tree.points[best_i]
        if best_d < 1e-9:
            continue
        if best_d <= params.step_size:
            new_p = target
        else:
            f = params.step_size / best_d
            new_p = (near[0] + (target[0] - near[0]) * f, near[1] + (target[1] - near[1]) * f)
        if not _edge_free(grid, near, new_p):
            continue
        tree.points.append(new_p)
        tree.parents.append(best_i)
        if math.dist(new_p, goal_c) <= params.goal_tolerance and _edge_free(grid, new_p, goal_c):
            tree.accepted = len(tree.points) - 1
            return tree
    return tree


def rrt(
    grid: OccupancyGrid, start: GridPose, goal: GridPose, params: RrtParams | None = None
) -> PlannedPath | None:
    """Rapidly-exploring random tree planner, deterministic per seed.

    The winning branch is re-discretized into a 4-adjacent chain of free
    cells (at an exact corner crossing the chain steps through a side cell
    that the supercover check already proved free), so the result satisfies
    the same adjacency contract as four-connected A* output.

    Returns:
        A path from start to goal, or None when no tree node reached the
        goal region within max_iterations.
    """
    params = params or RrtParams()
    tree = grow_rrt_tree(grid, start, goal, params)
    if tree.accepted is None:
        return None
    start, goal = GridPose(*start), GridPose(*goal)
    if start == goal:
        return PlannedPath((start,), grid.resolution)

    branch: list[int] = []
    i = tree.accepted
    while i != -1:
        branch.append(i)
        i = tree.parents[i]
    branch.reverse()
    points = [tree.points[i] for i in branch] + [_center(goal)]

    waypoints: list[GridPose] = [start]
    for a, b in zip(points, points[1:]):
        for c in chain_cells(a, b):
            if c != waypoints[-1]:
                waypoints.append(c)
    return PlannedPath(tuple(waypoints), grid.resolution)
