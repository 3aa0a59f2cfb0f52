"""Layout quality metrics"""

import logging
import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Any, Dict, FrozenSet, Iterable, List, Sequence, Set, Tuple

import numpy as np
from tabulate import tabulate

from src.grid.models import Cell, NodeSet
from src.layout.network import FlowNetwork
from src.render.accumulation import EdgeGeometry, EdgeKind
from src.utils.constants import D8_OFFSETS, LOGGER_NAME, METRIC_SETTINGS, SQRT2

logger = logging.getLogger(LOGGER_NAME)

REPORT_NOTE = (
    "Lengths are measured on raw (unsmoothed) cell-center polylines; "
    "Cv uses the population standard deviation."
)


@dataclass(frozen=True)
class MetricsReport:
    tl: float
    el: Tuple[float, ...]
    el_min: float
    threshold_counts: Dict[float, int]
    cv: float
    c_aa: int
    c_pc: int
    c_o: int
    edges: int = 0
    hang_edges: int = 0
    fallbacks: Tuple[str, ...] = field(default_factory=tuple)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'TL': self.tl,
            'EL': list(self.el),
            'EL_min': self.el_min,
            'EL_below': {_threshold_key(t): n for t, n in self.threshold_counts.items()},
            'Cv': self.cv,
            'C_aa': self.c_aa,
            'C_pc': self.c_pc,
            'C_o': self.c_o,
            'edges': self.edges,
            'hang_edges': self.hang_edges,
            'fallbacks': list(self.fallbacks),
            'note': REPORT_NOTE,
        }

    def as_table(self, tablefmt: str = "github") -> str:
        """Rows in the order TL, EL_min, n(EL < t)..., Cv, C_aa, C_pc, C_o"""
        rows: List[Tuple[str, Any]] = [
            ("TL", f"{self.tl:.1f}"),
            ("EL_min", f"{self.el_min:.1f}"),
        ]
        for t in sorted(self.threshold_counts, reverse=True):
            rows.append((f"n(EL < {_threshold_key(t)})", self.threshold_counts[t]))
        rows += [
            ("Cv (%)", f"{self.cv:.2f}"),
            ("C_aa", self.c_aa),
            ("C_pc", self.c_pc),
            ("C_o", self.c_o),
        ]
        return f"{REPORT_NOTE}\n" + tabulate(rows, headers=["Metric", "Value"], tablefmt=tablefmt)


def _threshold_key(t: float) -> str:
    return f"{t:g}"


def coefficient_of_variation(values: Sequence[float]) -> float:
    """Population std / mean in percent; 0 for an empty or zero-mean sample"""
    if not values:
        return 0.0
    data = np.asarray(values, dtype=float)
    mean = data.mean()
    if mean == 0:
        return 0.0
    return float(data.std() / mean * 100.0)


def tree_length(net: FlowNetwork) -> float:
    """Unweighted length of every committed downstream step"""
    total = 0.0
    for code in net.downstream_dir.values():
        total += SQRT2 if code % 2 else 1.0
    return total * net.grid.resolution


def _angle(u: Tuple[int, int], v: Tuple[int, int]) -> float:
    cosine = (u[0] * v[0] + u[1] * v[1]) / (math.hypot(*u) * math.hypot(*v))
    return round(math.degrees(math.acos(max(-1.0, min(1.0, cosine)))), 9)


def acute_angle_count(net: FlowNetwork, edges: Iterable[EdgeGeometry], t_a: float) -> int:
    """Hang edges whose angle to the downstream branch at their end is <= t_a"""
    count = 0
    for edge in edges:
        if edge.kind is not EdgeKind.HANG or edge.start == edge.end or edge.end == net.origin:
            continue
        junction = edge.end
        code = net.downstream_dir.get(junction)
        if code is None:
            continue
        previous = edge.cells[-2]
        dr, dc = D8_OFFSETS[code]
        incoming = (previous[1] - junction[1], previous[0] - junction[0])
        if _angle(incoming, (dc, dr)) <= t_a:
            count += 1
    return count


# Exact predicates on integer (col, row) lattice coordinates

def _orientation(p: Cell, q: Cell, r: Cell) -> int:
    value = (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])
    return (value > 0) - (value < 0)


def _on_segment(p: Cell, q: Cell, r: Cell) -> bool:
    """r lies within the bounding box of p-q (call only when collinear)"""
    return min(p[0], q[0]) <= r[0] <= max(p[0], q[0]) and min(p[1], q[1]) <= r[1] <= max(p[1], q[1])


def _segments_meet(p1: Cell, p2: Cell, q1: Cell, q2: Cell, shared: FrozenSet[Cell]) -> bool:
    """True when two segments intersect anywhere except at one shared endpoint"""
    o1 = _orientation(p1, p2, q1)
    o2 = _orientation(p1, p2, q2)
    o3 = _orientation(q1, q2, p1)
    o4 = _orientation(q1, q2, p2)
    if o1 * o2 < 0 and o3 * o4 < 0:
        return True

    touches: Set[Cell] = set()
    if o1 == 0 and _on_segment(p1, p2, q1):
        touches.add(q1)
    if o2 == 0 and _on_segment(p1, p2, q2):
        touches.add(q2)
    if o3 == 0 and _on_segment(q1, q2, p1):
        touches.add(p1)
    if o4 == 0 and _on_segment(q1, q2, p2):
        touches.add(p2)
    if not touches:
        return False
    return not (len(touches) == 1 and touches <= shared)


def _lattice(edge: EdgeGeometry) -> List[Cell]:
    return [(c[1], c[0]) for c in edge.cells]


def _box(points: Sequence[Cell]) -> Tuple[int, int, int, int]:
    xs = [p[0] for p in points]
    ys = [p[1] for p in points]
    return min(xs), min(ys), max(xs), max(ys)


def _boxes_overlap(a: Tuple[int, int, int, int], b: Tuple[int, int, int, int]) -> bool:
    return a[0] <= b[2] and b[0] <= a[2] and a[1] <= b[3] and b[1] <= a[3]


def crossing_count(edges: Sequence[EdgeGeometry]) -> int:
    """Pairs of distinct edges whose polylines meet away from a shared endpoint"""
    lines = [(_lattice(e), e) for e in edges if e.start != e.end]
    boxes = [_box(points) for points, _ in lines]
    count = 0
    for (i, (a, ea)), (j, (b, eb)) in combinations(enumerate(lines), 2):
        if not _boxes_overlap(boxes[i], boxes[j]):
            continue
        shared = frozenset(
            (c[1], c[0]) for c in {ea.start, ea.end} & {eb.start, eb.end}
        )
        if any(
            _segments_meet(p1, p2, q1, q2, shared)
            for p1, p2 in zip(a, a[1:])
            for q1, q2 in zip(b, b[1:])
        ):
            count += 1
    return count


def _point_segment_distance(p: Tuple[float, float], a: Tuple[float, float],
                            b: Tuple[float, float]) -> float:
    dx, dy = b[0] - a[0], b[1] - a[1]
    length2 = dx * dx + dy * dy
    if length2 == 0:
        return math.dist(p, a)
    t = max(0.0, min(1.0, ((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / length2))
    return math.dist(p, (a[0] + t * dx, a[1] + t * dy))


def overlap_count(edges: Sequence[EdgeGeometry], net: FlowNetwork, nodes: NodeSet,
                  tolerance: float = METRIC_SETTINGS['OVERLAP_TOLERANCE']) -> int:
    """Node markers lying on an edge that does not belong to them

    A destination owns its hang edge; the origin owns the edges ending at it.
    Distances are in cells, so tolerance 0.5 means Rs/2.
    """
    grid = net.grid
    markers: List[Tuple[str, Cell]] = [(nodes.origin_id, grid.origin_cell)]
    markers += sorted(grid.destination_cells.items())

    count = 0
    for node_id, cell in markers:
        point = (float(cell[1]), float(cell[0]))
        for edge in edges:
            if edge.start == edge.end:
                continue
            if cell == grid.origin_cell and edge.end == cell:
                continue
            if edge.destination_id == node_id:
                continue
            lattice = _lattice(edge)
            if any(_point_segment_distance(point, a, b) < tolerance
                   for a, b in zip(lattice, lattice[1:])):
                count += 1
                break
    return count


def compute(net: FlowNetwork, edges: Sequence[EdgeGeometry], nodes: NodeSet,
            thresholds: Sequence[float] = METRIC_SETTINGS['EL_THRESHOLDS'],
            t_a: float = 120.0, fallbacks: Sequence[str] = ()) -> MetricsReport:
    """All quality measures of a finished layout"""
    hang = [e for e in edges if e.kind is EdgeKind.HANG]
    el = tuple(sorted(e.length for e in hang))
    report = MetricsReport(
        tl=float(sum(e.length for e in edges)),
        el=el,
        el_min=el[0] if el else 0.0,
        threshold_counts={float(t): sum(1 for x in el if x < t) for t in thresholds},
        cv=coefficient_of_variation(el),
        c_aa=acute_angle_count(net, edges, t_a),
        c_pc=crossing_count(edges),
        c_o=overlap_count(edges, net, nodes),
        edges=len(edges),
        hang_edges=len(hang),
        fallbacks=tuple(fallbacks),
    )
    logger.info(
        f"Metrics: TL={report.tl:.6g} EL_min={report.el_min:.6g} Cv={report.cv:.2f}% "
        f"C_aa={report.c_aa} C_pc={report.c_pc} C_o={report.c_o}"
    )
    return report
