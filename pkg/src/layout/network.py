"""Committed flow tree"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from types import MappingProxyType
from typing import Any, Dict, FrozenSet, List, Mapping, Optional, Tuple

from src.grid.models import Cell, GridSpace
from src.search.context import CandidatePath, Penalty, direction_code, step_cost
from src.utils.constants import D8_OFFSETS, LOGGER_NAME
from src.utils.errors import SearchError, StaleCandidateError

logger = logging.getLogger(LOGGER_NAME)


class PathType(str, Enum):
    TYPE1 = "Type1"   # joins at the origin
    TYPE2 = "Type2"   # joins an existing path


@dataclass(frozen=True)
class CommittedPath:
    """A candidate path after it was added to the network"""
    destination_id: str
    cells: Tuple[Cell, ...]
    flow_in: Cell
    path_type: PathType
    pl: float
    importance: float
    penalties: FrozenSet[Penalty]
    iteration: int
    fallback: bool = False

    def to_dict(self) -> Dict[str, Any]:
        return {
            'destination': self.destination_id,
            'cells': [list(c) for c in self.cells],
            'flow_in': list(self.flow_in),
            'type': self.path_type.value,
            'pl': self.pl,
            'importance': self.importance,
            'penalties': sorted(p.value for p in self.penalties),
            'iteration': self.iteration,
            'fallback': self.fallback,
        }


@dataclass(frozen=True, eq=False)
class FlowNetwork:
    """Tree of committed cells rooted at the origin cell

    Every committed cell but the origin has exactly one downstream neighbor;
    downstream_length is the weighted distance to the origin along the tree.
    """
    grid: GridSpace
    downstream_dir: Mapping[Cell, int]
    downstream_length: Mapping[Cell, float]
    paths: Tuple[CommittedPath, ...] = ()
    upstream_map: Mapping[Cell, Tuple[Cell, ...]] = field(init=False, default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, 'downstream_dir', MappingProxyType(dict(self.downstream_dir)))
        object.__setattr__(self, 'downstream_length', MappingProxyType(dict(self.downstream_length)))
        object.__setattr__(self, 'paths', tuple(self.paths))

        upstream: Dict[Cell, List[Cell]] = {cell: [] for cell in self.downstream_length}
        for cell in self.downstream_dir:
            upstream[self.downstream_cell(cell)].append(cell)
        object.__setattr__(
            self, 'upstream_map',
            MappingProxyType({cell: tuple(sorted(cells)) for cell, cells in upstream.items()}),
        )

    @classmethod
    def initial(cls, grid: GridSpace) -> 'FlowNetwork':
        """Network holding only the origin cell"""
        return cls(grid=grid, downstream_dir={}, downstream_length={grid.origin_cell: 0.0})

    @property
    def origin(self) -> Cell:
        return self.grid.origin_cell

    @property
    def committed_cells(self) -> FrozenSet[Cell]:
        return frozenset(self.downstream_length)

    def is_committed(self, cell: Cell) -> bool:
        return cell in self.downstream_length

    def downstream_cell(self, cell: Cell) -> Optional[Cell]:
        code = self.downstream_dir.get(cell)
        if code is None:
            return None
        dr, dc = D8_OFFSETS[code]
        return (cell[0] + dr, cell[1] + dc)

    def upstream(self, cell: Cell) -> Tuple[Cell, ...]:
        return self.upstream_map.get(cell, ())

    @property
    def connected_destinations(self) -> FrozenSet[str]:
        return frozenset(p.destination_id for p in self.paths)

    def route(self, cell: Cell) -> List[Cell]:
        """Cells from a committed cell down to the origin"""
        if not self.is_committed(cell):
            raise SearchError(f"cell {cell} is not on the network")
        cells = [cell]
        while cells[-1] != self.origin:
            cells.append(self.downstream_cell(cells[-1]))
        return cells

    def incorporate(self, path: CandidatePath, path_type: PathType, importance: float,
                    iteration: int) -> 'FlowNetwork':
        """Return a new network with the path's cells committed

        Raises:
            StaleCandidateError: the path no longer ends on the tree or overlaps it
        """
        if path.destination_id in self.connected_destinations:
            raise StaleCandidateError(f"destination '{path.destination_id}' is already connected")
        if not self.is_committed(path.flow_in) or path.cells[-1] != path.flow_in:
            raise StaleCandidateError(f"flow-in cell {path.flow_in} is not on the network")
        overlap = [cell for cell in path.cells[:-1] if self.is_committed(cell)]
        if overlap:
            raise StaleCandidateError(
                f"path for '{path.destination_id}' overlaps committed cells {overlap}"
            )

        downstream_dir = dict(self.downstream_dir)
        downstream_length = dict(self.downstream_length)
        for cell, below in reversed(list(zip(path.cells, path.cells[1:]))):
            downstream_dir[cell] = direction_code(cell, below)
            downstream_length[cell] = downstream_length[below] + step_cost(self.grid, cell, below)

        committed = CommittedPath(
            destination_id=path.destination_id,
            cells=path.cells,
            flow_in=path.flow_in,
            path_type=path_type,
            pl=path.pl,
            importance=importance,
            penalties=path.penalties,
            iteration=iteration,
            fallback=path.fallback,
        )
        logger.debug(
            f"Iteration {iteration}: committed '{path.destination_id}' "
            f"({path_type.value}, {len(path.cells)} cells, flow-in {path.flow_in})"
        )
        return FlowNetwork(
            grid=self.grid,
            downstream_dir=downstream_dir,
            downstream_length=downstream_length,
            paths=self.paths + (committed,),
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            'cells': len(self.downstream_length),
            'paths': [p.to_dict() for p in self.paths],
        }
