"""Domain models for the rasterized mapping space"""

from dataclasses import dataclass, field
from enum import Enum
from types import MappingProxyType
from typing import Dict, Any, Iterator, List, Mapping, Optional, Tuple

import numpy as np
from shapely.geometry.base import BaseGeometry

from src.utils.errors import NodeSetError, InputError, OutOfExtentError

Point = Tuple[float, float]
Cell = Tuple[int, int]  # (row, col), row 0 at the southern edge


@dataclass(frozen=True)
class Destination:
    """A destination point and the volume flowing to it"""
    id: str
    position: Point
    volume: float

    def to_dict(self) -> Dict[str, Any]:
        return {'id': self.id, 'x': self.position[0], 'y': self.position[1], 'volume': self.volume}


@dataclass(frozen=True)
class NodeSet:
    """Origin point plus weighted destinations"""
    origin: Point
    destinations: Tuple[Destination, ...]
    origin_id: str = "origin"

    def __post_init__(self):
        object.__setattr__(self, 'destinations', tuple(self.destinations))
        if not self.destinations:
            raise NodeSetError("at least one destination is required")

        ids = [d.id for d in self.destinations]
        if len(set(ids)) != len(ids) or self.origin_id in ids:
            raise NodeSetError("node ids must be unique")

        for dest in self.destinations:
            if not dest.volume > 0:
                raise NodeSetError(f"destination '{dest.id}' has nonpositive volume {dest.volume}")

        seen: Dict[Point, str] = {}
        for node_id, position in self.points():
            key = (float(position[0]), float(position[1]))
            if key in seen:
                raise NodeSetError(f"'{node_id}' and '{seen[key]}' share position {key}")
            seen[key] = node_id

    def points(self) -> Iterator[Tuple[str, Point]]:
        """Origin first, then destinations in input order"""
        yield self.origin_id, self.origin
        for dest in self.destinations:
            yield dest.id, dest.position

    @property
    def total_volume(self) -> float:
        return float(sum(d.volume for d in self.destinations))

    @property
    def max_volume(self) -> float:
        return float(max(d.volume for d in self.destinations))

    def to_dict(self) -> Dict[str, Any]:
        return {
            'origin': {'id': self.origin_id, 'x': self.origin[0], 'y': self.origin[1]},
            'destinations': [d.to_dict() for d in self.destinations],
        }


@dataclass(frozen=True)
class Region:
    """Base-map polygon; a delta makes it a weighted region"""
    geometry: BaseGeometry
    delta: Optional[float] = None
    name: Optional[str] = None


@dataclass(frozen=True)
class RegionSet:
    """Base-map regions and obstacle geometries"""
    regions: Tuple[Region, ...] = ()
    obstacles: Tuple[BaseGeometry, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, 'regions', tuple(self.regions))
        object.__setattr__(self, 'obstacles', tuple(self.obstacles))
        for region in self.regions:
            if region.geometry.geom_type not in ('Polygon', 'MultiPolygon'):
                raise InputError(f"region '{region.name}' must be a polygon, got {region.geometry.geom_type}")
            if not region.geometry.is_valid:
                raise InputError(f"region '{region.name}' is not a simple polygon")
            if region.delta is not None and not region.delta > 0:
                raise InputError(f"region '{region.name}' has nonpositive delta {region.delta}")
        for obstacle in self.obstacles:
            if not obstacle.is_valid:
                raise InputError(f"obstacle {obstacle.geom_type} is not a simple geometry")

    @property
    def weighted_regions(self) -> List[Region]:
        return [r for r in self.regions if r.delta is not None]


class CellKind(Enum):
    NORMAL = "normal"
    OBSTACLE = "obstacle"


class RoleKind(Enum):
    PLAIN = "plain"
    ORIGIN = "origin"
    DESTINATION = "destination"


@dataclass(frozen=True)
class CellRole:
    kind: RoleKind
    destination_id: Optional[str] = None


PLAIN_ROLE = CellRole(RoleKind.PLAIN)


@dataclass(frozen=True, eq=False)
class GridSpace:
    """Immutable raster of the mapping space

    Arrays are indexed [row, col]; row 0 lies at y0 (south), col 0 at x0 (west).
    """
    resolution: float
    x0: float
    y0: float
    ncols: int
    nrows: int
    obstacle: np.ndarray
    weight: np.ndarray
    origin_cell: Cell
    destination_cells: Mapping[str, Cell]
    cell_roles: Mapping[Cell, CellRole] = field(init=False, default_factory=dict)

    def __post_init__(self):
        shape = (self.nrows, self.ncols)
        if self.obstacle.shape != shape or self.weight.shape != shape:
            raise ValueError(f"grid arrays must have shape {shape}")
        obstacle = np.array(self.obstacle, dtype=bool)
        weight = np.array(self.weight, dtype=float)
        obstacle.setflags(write=False)
        weight.setflags(write=False)
        object.__setattr__(self, 'obstacle', obstacle)
        object.__setattr__(self, 'weight', weight)
        object.__setattr__(self, 'destination_cells', MappingProxyType(dict(self.destination_cells)))

        roles = {self.origin_cell: CellRole(RoleKind.ORIGIN)}
        for dest_id, cell in self.destination_cells.items():
            roles[cell] = CellRole(RoleKind.DESTINATION, dest_id)
        object.__setattr__(self, 'cell_roles', MappingProxyType(roles))

    @property
    def extent(self) -> Tuple[float, float, float, float]:
        """(xmin, ymin, xmax, ymax) in map units"""
        return (
            self.x0,
            self.y0,
            self.x0 + self.ncols * self.resolution,
            self.y0 + self.nrows * self.resolution,
        )

    @property
    def shape(self) -> Tuple[int, int]:
        return (self.nrows, self.ncols)

    def in_bounds(self, cell: Cell) -> bool:
        return 0 <= cell[0] < self.nrows and 0 <= cell[1] < self.ncols

    def check_cell(self, cell: Cell) -> None:
        if not self.in_bounds(cell):
            raise OutOfExtentError(f"cell {cell} outside {self.nrows}x{self.ncols} grid")

    def kind(self, cell: Cell) -> CellKind:
        self.check_cell(cell)
        return CellKind.OBSTACLE if self.obstacle[cell] else CellKind.NORMAL

    def delta(self, cell: Cell) -> float:
        return float(self.weight[cell])

    def role(self, cell: Cell) -> CellRole:
        self.check_cell(cell)
        return self.cell_roles.get(cell, PLAIN_ROLE)

    def destination_at(self, cell: Cell) -> Optional[str]:
        return self.cell_roles.get(cell, PLAIN_ROLE).destination_id

    @property
    def obstacle_count(self) -> int:
        return int(self.obstacle.sum())

    def to_dict(self) -> Dict[str, Any]:
        return {
            'resolution': self.resolution,
            'extent': list(self.extent),
            'ncols': self.ncols,
            'nrows': self.nrows,
            'obstacle_cells': self.obstacle_count,
            'origin_cell': list(self.origin_cell),
            'destination_cells': {k: list(v) for k, v in sorted(self.destination_cells.items())},
        }
