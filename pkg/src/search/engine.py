"""Best-path search from a destination to the committed flow tree"""

import heapq
import logging
import math
from dataclasses import dataclass, replace
from typing import Dict, FrozenSet, List, Optional, Sequence, Set, Tuple

from src.grid.models import Cell
from src.search.context import (
    CandidatePath,
    Penalty,
    SearchContext,
    direction_code,
    penalized_length,
)
from src.utils.constants import D8_OFFSETS, LOGGER_NAME
from src.utils.errors import DestinationUnreachableError, SearchError

logger = logging.getLogger(LOGGER_NAME)

STRAIGHT_ANGLE = 180.0


@dataclass(frozen=True)
class _Label:
    """Best known arrival at a cell"""
    g: float
    sa: float
    pred: Optional[Cell]
    orthogonal: float
    diagonal: float

    def key(self) -> Tuple[float, float, Tuple[int, int]]:
        return (self.g, self.sa, self.pred if self.pred is not None else (-1, -1))


def _vector(code: int) -> Tuple[int, int]:
    """D8 code as an (east, north) vector"""
    dr, dc = D8_OFFSETS[code]
    return (dc, dr)


def angle_between(u: Tuple[float, float], v: Tuple[float, float]) -> float:
    """Angle in degrees between two plane vectors, rounded to 1e-9"""
    norm = math.hypot(*u) * math.hypot(*v)
    if norm == 0:
        raise SearchError("angle undefined for a zero vector")
    cosine = (u[0] * v[0] + u[1] * v[1]) / norm
    return round(math.degrees(math.acos(max(-1.0, min(1.0, cosine)))), 9)


def flow_in_angle(ctx: SearchContext, incoming: Tuple[float, float], flow_in: Cell) -> float:
    """Angle between the arriving path and the tree's downstream direction at flow_in

    incoming points from flow_in back toward the arriving path; the origin has
    no downstream direction and always yields 180 degrees.
    """
    code = ctx.downstream_dir.get(flow_in)
    if flow_in == ctx.origin or code is None:
        return STRAIGHT_ANGLE
    return angle_between(incoming, _vector(code))


def _hangs_from(ctx: SearchContext, cell: Cell) -> bool:
    """True when the run above cell reaches a destination leaf without a node"""
    while True:
        upstream = ctx.upstream.get(cell, ())
        if not upstream:
            return True
        if len(upstream) > 1:
            return False
        cell = upstream[0]
        if ctx.upstream.get(cell) and ctx.grid.destination_at(cell) is not None:
            return False


def _existing_branch_acute(ctx: SearchContext, flow_in: Cell) -> bool:
    """True when joining would leave an existing hang run with an acute angle"""
    if flow_in == ctx.origin or ctx.grid.destination_at(flow_in) is not None:
        return False
    upstream = ctx.upstream.get(flow_in, ())
    code = ctx.downstream_dir.get(flow_in)
    if len(upstream) != 1 or code is None or not _hangs_from(ctx, flow_in):
        return False
    above = upstream[0]
    incoming = (above[1] - flow_in[1], above[0] - flow_in[0])
    return angle_between(incoming, _vector(code)) <= ctx.params.t_a


def terminal_penalties(ctx: SearchContext, previous: Optional[Cell], flow_in: Cell,
                       sub_pl1: float) -> FrozenSet[Penalty]:
    """Penalties incurred by joining the tree at flow_in coming from previous"""
    penalties = set()
    if ctx.params.acute_penalty and previous is not None:
        incoming = (previous[1] - flow_in[1], previous[0] - flow_in[0])
        if flow_in_angle(ctx, incoming, flow_in) <= ctx.params.t_a or _existing_branch_acute(ctx, flow_in):
            penalties.add(Penalty.ACUTE_ANGLE)
    if ctx.params.short_edge_penalty and sub_pl1 <= ctx.params.t_d:
        penalties.add(Penalty.SHORT_HANG_EDGE)
    return frozenset(penalties)


def evaluate_path(ctx: SearchContext, destination_id: str, cells: Sequence[Cell],
                  fallback: bool = False) -> CandidatePath:
    """Score a cell sequence ending on the committed tree"""
    cells = tuple(cells)
    if not cells:
        raise SearchError("a candidate path needs at least one cell")
    flow_in = cells[-1]
    if flow_in not in ctx.committed:
        raise SearchError(f"path for '{destination_id}' does not end on the tree")

    orthogonal = diagonal = sa = 0.0
    for a, b in zip(cells, cells[1:]):
        code = direction_code(a, b)
        o, d = ctx.step_units(a, b, code)
        orthogonal += o
        diagonal += d
        sa += ctx.move_weight(a, b, code)

    sub_pl1 = ctx.length(orthogonal, diagonal)
    sub_pl2 = ctx.committed[flow_in]
    previous = cells[-2] if len(cells) > 1 else None
    penalties = terminal_penalties(ctx, previous, flow_in, sub_pl1)
    return CandidatePath(
        destination_id=destination_id,
        cells=cells,
        flow_in=flow_in,
        sub_pl1=sub_pl1,
        sub_pl2=sub_pl2,
        penalties=penalties,
        pl=penalized_length(sub_pl1, sub_pl2, len(penalties), ctx.params),
        direction_weight=sa,
        fallback=fallback,
    )


def _trace(labels: Dict[Cell, _Label], arrival: _Label, terminal: Cell) -> Tuple[Cell, ...]:
    cells: List[Cell] = [terminal]
    cell = arrival.pred
    while cell is not None:
        cells.append(cell)
        cell = labels[cell].pred
    cells.reverse()
    return tuple(cells)


def _search(ctx: SearchContext, start: Cell, destination_id: str,
            restrict: bool) -> Optional[CandidatePath]:
    """Dijkstra from start that treats committed cells as goals

    Every committed cell reached is scored with its best arrival; the
    frontier stops once no unsettled goal can beat the best path length.
    """
    passable_tree = not ctx.params.exclude_committed
    labels: Dict[Cell, _Label] = {start: _Label(0.0, 0.0, None, 0.0, 0.0)}
    arrivals: Dict[Cell, _Label] = {}
    settled: Set[Cell] = set()
    scored: Set[Cell] = set()
    heap: List[Tuple[float, float, Cell, bool]] = [(0.0, 0.0, start, False)]
    best: Optional[Tuple[Tuple[float, float, Cell], CandidatePath]] = None

    while heap:
        g, sa, cell, terminal = heapq.heappop(heap)
        if best is not None and g > best[0][0]:
            break

        if terminal:
            arrival = arrivals[cell]
            if cell in scored or (g, sa) != (arrival.g, arrival.sa):
                continue
            scored.add(cell)
            candidate = evaluate_path(ctx, destination_id, _trace(labels, arrival, cell))
            rank = (candidate.pl, candidate.direction_weight, cell)
            if best is None or rank < best[0]:
                best = (rank, candidate)
            continue

        label = labels[cell]
        if cell in settled or (g, sa) != (label.g, label.sa):
            continue
        settled.add(cell)

        for nbr, code in ctx.moves(cell, start, destination_id, restrict):
            o, d = ctx.step_units(cell, nbr, code)
            orthogonal, diagonal = label.orthogonal + o, label.diagonal + d
            reached = _Label(
                ctx.length(orthogonal, diagonal),
                label.sa + ctx.move_weight(cell, nbr, code),
                cell,
                orthogonal,
                diagonal,
            )

            if nbr in ctx.committed and nbr != start:
                known = arrivals.get(nbr)
                if nbr not in scored and (known is None or reached.key() < known.key()):
                    arrivals[nbr] = reached
                    heapq.heappush(heap, (reached.g, reached.sa, nbr, True))
                if not passable_tree:
                    continue

            if nbr in settled:
                continue
            known = labels.get(nbr)
            if known is None or reached.key() < known.key():
                labels[nbr] = reached
                heapq.heappush(heap, (reached.g, reached.sa, nbr, False))

    return best[1] if best is not None else None


def _truncate_at_tree(ctx: SearchContext, candidate: CandidatePath) -> CandidatePath:
    """Cut a path that runs over the tree back to its first committed cell"""
    for index, cell in enumerate(candidate.cells[1:], start=1):
        if cell in ctx.committed:
            if index == len(candidate.cells) - 1:
                return candidate
            logger.debug(
                f"Path for '{candidate.destination_id}' crosses the tree at {cell}; truncating"
            )
            return evaluate_path(
                ctx, candidate.destination_id, candidate.cells[:index + 1], candidate.fallback
            )
    return candidate


def find_best_path(ctx: SearchContext, start: Cell,
                   destination_id: Optional[str] = None) -> CandidatePath:
    """Least penalized-length path from a destination cell to the tree

    Searches the restricted directions first and falls back to all eight
    when that reaches no flow-in cell.

    Raises:
        DestinationUnreachableError: no committed cell can be reached
    """
    destination_id = destination_id or ctx.grid.destination_at(start)
    if destination_id is None:
        raise SearchError(f"cell {start} does not host a destination")

    if start in ctx.committed:
        return evaluate_path(ctx, destination_id, (start,))

    restrict = ctx.params.restrict_directions
    candidate = _search(ctx, start, destination_id, restrict)
    if candidate is None and restrict:
        logger.warning(
            f"No flow-in cell within the search directions of '{destination_id}'; "
            f"retrying with all directions"
        )
        candidate = _search(ctx, start, destination_id, False)
        if candidate is not None:
            candidate = replace(candidate, fallback=True)
    if candidate is None:
        raise DestinationUnreachableError(destination_id)

    if not ctx.params.exclude_committed:
        candidate = _truncate_at_tree(ctx, candidate)
    return candidate
