"""Flow accumulation over the committed tree and its split into edges"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple

from src.grid.builder import cell_center
from src.grid.models import Cell, NodeSet, Point
from src.layout.network import FlowNetwork
from src.utils.constants import LOGGER_NAME

logger = logging.getLogger(LOGGER_NAME)


class EdgeKind(str, Enum):
    HANG = "HangEdge"           # starts at a destination leaf
    NON_HANG = "NonHangEdge"


@dataclass(frozen=True)
class EdgeGeometry:
    """Maximal run of tree cells between two nodes, listed upstream to downstream"""
    kind: EdgeKind
    cells: Tuple[Cell, ...]
    polyline: Tuple[Point, ...]
    volume: float
    destination_id: Optional[str] = None

    @property
    def start(self) -> Cell:
        return self.cells[0]

    @property
    def end(self) -> Cell:
        return self.cells[-1]

    @property
    def length(self) -> float:
        """Unweighted polyline length in map units"""
        return sum(math.dist(a, b) for a, b in zip(self.polyline, self.polyline[1:]))

    def to_dict(self) -> Dict[str, Any]:
        return {
            'kind': self.kind.value,
            'cells': [list(c) for c in self.cells],
            'volume': self.volume,
            'length': self.length,
            'destination': self.destination_id,
        }


def _hosted_volumes(net: FlowNetwork, nodes: NodeSet) -> Dict[Cell, float]:
    hosted: Dict[Cell, float] = {}
    for dest in nodes.destinations:
        cell = net.grid.destination_cells.get(dest.id)
        if cell is not None and net.is_committed(cell):
            hosted[cell] = hosted.get(cell, 0.0) + dest.volume
    return hosted


def accumulate(net: FlowNetwork, nodes: NodeSet) -> Dict[Cell, float]:
    """Volume passing through every committed cell, summed leaves first"""
    volume = {cell: 0.0 for cell in sorted(net.committed_cells)}
    for cell, v in _hosted_volumes(net, nodes).items():
        volume[cell] += v

    waiting = {cell: len(net.upstream(cell)) for cell in volume}
    ready = sorted((cell for cell, n in waiting.items() if n == 0), reverse=True)
    while ready:
        cell = ready.pop()
        below = net.downstream_cell(cell)
        if below is None:
            continue
        volume[below] += volume[cell]
        waiting[below] -= 1
        if waiting[below] == 0:
            ready.append(below)

    logger.debug(f"Accumulated {volume[net.origin]:.6g} at the origin over {len(volume)} cells")
    return volume


def _is_node(net: FlowNetwork, cell: Cell, hosted: Dict[Cell, float]) -> bool:
    return cell == net.origin or cell in hosted or len(net.upstream(cell)) >= 2


def edge_extract(net: FlowNetwork, accum: Dict[Cell, float]) -> List[EdgeGeometry]:
    """
    Split the tree at the origin, junctions and destination cells

    A destination cell that other paths pass through gets a zero-length
    hang edge carrying its own volume (its accumulation minus its inflow).
    """
    grid = net.grid
    hosted = {
        cell: accum[cell] - sum(accum[u] for u in net.upstream(cell))
        for cell in grid.destination_cells.values()
        if net.is_committed(cell)
    }

    edges: List[EdgeGeometry] = []
    for start in sorted(net.committed_cells):
        if start == net.origin:
            continue
        leaf = not net.upstream(start)
        if not leaf and not _is_node(net, start, hosted):
            continue

        cells = [start]
        while True:
            below = net.downstream_cell(cells[-1])
            cells.append(below)
            if _is_node(net, below, hosted):
                break

        dest_id = grid.destination_at(start)
        edges.append(EdgeGeometry(
            kind=EdgeKind.HANG if leaf else EdgeKind.NON_HANG,
            cells=tuple(cells),
            polyline=tuple(cell_center(grid, c) for c in cells),
            volume=accum[cells[-2]],
            destination_id=dest_id if leaf else None,
        ))

        if not leaf and start in hosted:
            point = cell_center(grid, start)
            edges.append(EdgeGeometry(
                kind=EdgeKind.HANG,
                cells=(start, start),
                polyline=(point, point),
                volume=hosted[start],
                destination_id=dest_id,
            ))

    edges.sort(key=lambda e: (e.start, e.kind is EdgeKind.NON_HANG, e.end))
    logger.debug(
        f"Extracted {len(edges)} edges "
        f"({sum(e.kind is EdgeKind.HANG for e in edges)} hang edges)"
    )
    return edges
