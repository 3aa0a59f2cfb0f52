"""Search context, candidate paths and the per-step quantities of the maze search"""

import math
from dataclasses import dataclass, field
from enum import Enum
from types import MappingProxyType
from typing import Any, Dict, FrozenSet, Iterable, Iterator, Mapping, Optional, Tuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from src.config.settings import ResolvedParams
from src.grid.models import Cell, GridSpace, NodeSet
from src.utils.constants import D8_CODES, D8_OFFSETS, SQRT2
from src.utils.errors import NotAdjacentError, SearchError

ALL_DIRECTIONS: Tuple[int, ...] = tuple(range(8))


class Penalty(str, Enum):
    ACUTE_ANGLE = "AcuteAngle"
    SHORT_HANG_EDGE = "ShortHangEdge"


@dataclass(frozen=True)
class CandidatePath:
    """A route from a destination cell to the cell where it joins the tree"""
    destination_id: str
    cells: Tuple[Cell, ...]
    flow_in: Cell
    sub_pl1: float
    sub_pl2: float
    penalties: FrozenSet[Penalty]
    pl: float
    direction_weight: float = 0.0
    fallback: bool = False

    @property
    def start(self) -> Cell:
        return self.cells[0]

    def to_dict(self) -> Dict[str, Any]:
        return {
            'destination': self.destination_id,
            'cells': [list(c) for c in self.cells],
            'flow_in': list(self.flow_in),
            'sub_pl1': self.sub_pl1,
            'sub_pl2': self.sub_pl2,
            'penalties': sorted(p.value for p in self.penalties),
            'pl': self.pl,
            'fallback': self.fallback,
        }


def is_diagonal(code: int) -> bool:
    return code % 2 == 1


def direction_code(a: Cell, b: Cell) -> int:
    """D8 code of the step a -> b"""
    try:
        return D8_CODES[(b[0] - a[0], b[1] - a[1])]
    except KeyError:
        raise NotAdjacentError(f"cells {a} and {b} are not 8-neighbors") from None


def step_cost(gs: GridSpace, a: Cell, b: Cell) -> float:
    """Weighted distance between two neighboring cells"""
    code = direction_code(a, b)
    base = 0.5 * gs.resolution * gs.delta(a) + 0.5 * gs.resolution * gs.delta(b)
    return SQRT2 * base if is_diagonal(code) else base


def direction_sector(angle: float) -> FrozenSet[int]:
    """Three D8 codes around a clockwise angle from the east axis"""
    angle = round(angle % 360.0, 9) % 360.0
    z = int(math.floor(angle / 45.0)) % 8
    return frozenset({(z - 1) % 8, z, (z + 1) % 8})


def clockwise_angle(source: Cell, toward: Cell) -> float:
    """Clockwise angle in degrees from east to the ray source -> toward"""
    dx = toward[1] - source[1]
    dy = toward[0] - source[0]
    return math.degrees(-math.atan2(dy, dx)) % 360.0


def search_directions(source: Cell, toward: Cell) -> FrozenSet[int]:
    if source == toward:
        raise SearchError(f"search direction undefined for identical cells {source}")
    return direction_sector(clockwise_angle(source, toward))


def potential_accumulation(gs: GridSpace, nodes: NodeSet, k: int) -> np.ndarray:
    """Sum of destination volumes in the (2k+1)^2 window of every cell"""
    if k < 0:
        raise ValueError("k must be nonnegative")
    volumes = np.zeros(gs.shape, dtype=float)
    for dest in nodes.destinations:
        volumes[gs.destination_cells[dest.id]] += dest.volume
    padded = np.pad(volumes, k)
    windows = sliding_window_view(padded, (2 * k + 1, 2 * k + 1))
    return windows.sum(axis=(2, 3))


def direction_weight(pf_c: float, pf_n: float, d_cn: float, t_f: float) -> float:
    """Cost-like direction weight; lower is explored first"""
    difference = pf_c - pf_n
    if difference > 0:
        return (difference + t_f) / d_cn
    return t_f / d_cn


def penalized_length(sub_pl1: float, sub_pl2: float, penalty_count: int,
                     params: ResolvedParams) -> float:
    """PL = subPL1 + omega * subPL2 + PL_pen per violated constraint"""
    return sub_pl1 + params.omega * sub_pl2 + params.pl_pen * penalty_count


@dataclass(frozen=True, eq=False)
class SearchContext:
    """Read-only state shared by every search of one layout iteration

    committed maps each tree cell to its weighted distance to the origin;
    downstream_dir holds the D8 code of every committed cell but the origin.
    """
    grid: GridSpace
    params: ResolvedParams
    pf: np.ndarray
    committed: Mapping[Cell, float]
    downstream_dir: Mapping[Cell, int] = field(default_factory=dict)
    upstream: Mapping[Cell, Tuple[Cell, ...]] = field(default_factory=dict)
    zone_owners: Mapping[Cell, FrozenSet[str]] = field(default_factory=dict)

    def __post_init__(self):
        origin = self.grid.origin_cell
        if self.committed.get(origin) != 0:
            raise SearchError("origin cell must be committed with downstream length 0")
        if (self.pf < 0).any():
            raise SearchError("potential accumulation must be nonnegative")
        for name in ('committed', 'downstream_dir', 'upstream', 'zone_owners'):
            object.__setattr__(self, name, MappingProxyType(dict(getattr(self, name))))

    @classmethod
    def create(cls, grid: GridSpace, params: ResolvedParams, pf: np.ndarray,
               committed: Mapping[Cell, float],
               downstream_dir: Optional[Mapping[Cell, int]] = None,
               upstream: Optional[Mapping[Cell, Iterable[Cell]]] = None) -> 'SearchContext':
        """Context with destination exclusion zones of radius k_rc3"""
        zones: Dict[Cell, set] = {}
        if params.exclude_destinations:
            radius = params.k_rc3
            for dest_id, (row, col) in grid.destination_cells.items():
                for r in range(row - radius, row + radius + 1):
                    for c in range(col - radius, col + radius + 1):
                        if grid.in_bounds((r, c)):
                            zones.setdefault((r, c), set()).add(dest_id)
        return cls(
            grid=grid,
            params=params,
            pf=pf,
            committed=dict(committed),
            downstream_dir=dict(downstream_dir or {}),
            upstream={cell: tuple(sorted(cells)) for cell, cells in (upstream or {}).items()},
            zone_owners={cell: frozenset(owners) for cell, owners in zones.items()},
        )

    @property
    def origin(self) -> Cell:
        return self.grid.origin_cell

    def downstream_cell(self, cell: Cell) -> Optional[Cell]:
        code = self.downstream_dir.get(cell)
        if code is None:
            return None
        dr, dc = D8_OFFSETS[code]
        return (cell[0] + dr, cell[1] + dc)

    def is_blocked(self, cell: Cell, start: Cell, destination_id: Optional[str]) -> bool:
        """Obstacles and the exclusion zones of other destinations"""
        if self.grid.obstacle[cell]:
            return True
        if cell == start or cell == self.origin:
            return False
        owners = self.zone_owners.get(cell)
        if not owners:
            return False
        return bool(owners - {destination_id})

    def _cuts_tree_edge(self, cell: Cell, dr: int, dc: int) -> bool:
        a = (cell[0] + dr, cell[1])
        b = (cell[0], cell[1] + dc)
        if a not in self.committed or b not in self.committed:
            return False
        return self.downstream_cell(a) == b or self.downstream_cell(b) == a

    def moves(self, cell: Cell, start: Cell, destination_id: Optional[str],
              restrict: bool) -> Iterator[Tuple[Cell, int]]:
        """Admissible steps out of a cell, in increasing D8 code"""
        if restrict and cell != self.origin:
            codes = sorted(search_directions(cell, self.origin))
        else:
            codes = ALL_DIRECTIONS
        for code in codes:
            dr, dc = D8_OFFSETS[code]
            nbr = (cell[0] + dr, cell[1] + dc)
            if not self.grid.in_bounds(nbr):
                continue
            if self.is_blocked(nbr, start, destination_id):
                continue
            if is_diagonal(code) and self.params.exclude_committed and self._cuts_tree_edge(cell, dr, dc):
                continue
            yield nbr, code

    def step_units(self, a: Cell, b: Cell, code: int) -> Tuple[float, float]:
        """(orthogonal, diagonal) weight units of a step; length = Rs/2 * (o + sqrt2 * d)"""
        units = self.grid.delta(a) + self.grid.delta(b)
        return (0.0, units) if is_diagonal(code) else (units, 0.0)

    def length(self, orthogonal: float, diagonal: float) -> float:
        return 0.5 * self.grid.resolution * (orthogonal + SQRT2 * diagonal)

    def move_weight(self, a: Cell, b: Cell, code: int) -> float:
        """Direction weight of a step, or 0 when direction weights are switched off"""
        if not self.params.accumulation_weights:
            return 0.0
        orthogonal, diagonal = self.step_units(a, b, code)
        return direction_weight(
            float(self.pf[a]), float(self.pf[b]), self.length(orthogonal, diagonal), self.params.t_f
        )
