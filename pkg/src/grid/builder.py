"""Rasterize the mapping space into a GridSpace"""

import logging
import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np
from shapely.geometry import Point as ShapelyPoint, box
from shapely.geometry.base import BaseGeometry
from shapely.ops import unary_union
from shapely.prepared import prep

from src.grid.models import Cell, GridSpace, NodeSet, Point, RegionSet
from src.utils.constants import GRID_SETTINGS, LOGGER_NAME
from src.utils.errors import (
    GridError,
    OutOfExtentError,
    PointInObstacleError,
    ResolutionError,
    ResolutionTooCoarseError,
)

logger = logging.getLogger(LOGGER_NAME)

EXTENT_POINTS = "points"
EXTENT_REGIONS = "regions"


@dataclass(frozen=True)
class GridConfig:
    """How the raster is laid over the map"""
    extent_mode: str = EXTENT_POINTS
    resolution: Optional[float] = None
    refine_resolution: bool = False


def compute_resolution(nodes: NodeSet) -> float:
    """Rs = mean of the closest 5% point pairs / 4 (at least one pair)"""
    coords = np.array([p for _, p in nodes.points()], dtype=float)
    if len(coords) < 2:
        raise ResolutionError("at least two points are needed to compute a resolution")

    rows, cols = np.triu_indices(len(coords), k=1)
    distances = np.hypot(*(coords[rows] - coords[cols]).T)
    distances.sort()

    if distances[0] <= 0:
        raise ResolutionError("duplicate points give a zero resolution")

    n_pairs = max(1, math.ceil(round(GRID_SETTINGS['PAIR_FRACTION'] * len(distances), 9)))
    ave_min_d = float(distances[:n_pairs].mean())
    return ave_min_d / GRID_SETTINGS['RESOLUTION_DIVISOR']


def _axis_cells(span: float, resolution: float) -> int:
    return max(1, math.ceil(span / resolution - GRID_SETTINGS['CEIL_TOLERANCE']))


def cell_center(gs: GridSpace, cell: Cell) -> Point:
    """Map coordinates of the center of a cell"""
    gs.check_cell(cell)
    row, col = cell
    return (
        gs.x0 + (col + 0.5) * gs.resolution,
        gs.y0 + (row + 0.5) * gs.resolution,
    )


def _axis_index(offset: float, resolution: float, count: int) -> Optional[int]:
    scaled = offset / resolution
    tolerance = GRID_SETTINGS['CEIL_TOLERANCE'] * max(1, count)
    if scaled < -tolerance or scaled > count + tolerance:
        return None
    # Boundary points resolve to the lower index
    return min(max(math.ceil(scaled) - 1, 0), count - 1)


def locate_cell(gs: GridSpace, point: Point) -> Cell:
    """Cell containing a point; shared boundaries go to the lower index"""
    col = _axis_index(point[0] - gs.x0, gs.resolution, gs.ncols)
    row = _axis_index(point[1] - gs.y0, gs.resolution, gs.nrows)
    if row is None or col is None:
        raise OutOfExtentError(f"point {point} outside grid extent {gs.extent}")
    return (row, col)


def _grid_extent(nodes: NodeSet, regions: Optional[RegionSet], mode: str,
                 resolution: float) -> Tuple[float, float, int, int]:
    if mode == EXTENT_POINTS:
        coords = np.array([p for _, p in nodes.points()], dtype=float)
        xmin, ymin = coords.min(axis=0) - resolution / 2
        xmax, ymax = coords.max(axis=0) + resolution / 2
    elif mode == EXTENT_REGIONS:
        if regions is None or not regions.regions:
            raise GridError("extent mode 'regions' requires at least one region")
        xmin, ymin, xmax, ymax = unary_union([r.geometry for r in regions.regions]).bounds
    else:
        raise GridError(f"unknown extent mode '{mode}'")

    ncols = _axis_cells(xmax - xmin, resolution)
    nrows = _axis_cells(ymax - ymin, resolution)
    return float(xmin), float(ymin), ncols, nrows


def _cell_box(x0: float, y0: float, resolution: float, row: int, col: int):
    return box(
        x0 + col * resolution,
        y0 + row * resolution,
        x0 + (col + 1) * resolution,
        y0 + (row + 1) * resolution,
    )


def _cell_range(lo: float, hi: float, origin: float, resolution: float, count: int) -> range:
    first = max(int(math.floor((lo - origin) / resolution)) - 1, 0)
    last = min(int(math.ceil((hi - origin) / resolution)) + 1, count)
    return range(first, last)


def _mask_obstacle(mask: np.ndarray, geometry: BaseGeometry, x0: float, y0: float,
                   resolution: float) -> None:
    """Mark every cell whose square the geometry reaches

    Polygons that only touch a cell's boundary leave it open; points and
    lines on a boundary close every cell they touch.
    """
    prepared = prep(geometry)
    areal = geometry.geom_type in ('Polygon', 'MultiPolygon')
    nrows, ncols = mask.shape
    gxmin, gymin, gxmax, gymax = geometry.bounds

    for row in _cell_range(gymin, gymax, y0, resolution, nrows):
        for col in _cell_range(gxmin, gxmax, x0, resolution, ncols):
            cell = _cell_box(x0, y0, resolution, row, col)
            if not prepared.intersects(cell):
                continue
            if areal and cell.touches(geometry):
                continue
            mask[row, col] = True


def _weight_cells(weight: np.ndarray, regions: RegionSet, x0: float, y0: float,
                  resolution: float) -> None:
    """Cells whose center lies in a weighted region take its delta (max on overlap)"""
    nrows, ncols = weight.shape
    for region in regions.weighted_regions:
        prepared = prep(region.geometry)
        gxmin, gymin, gxmax, gymax = region.geometry.bounds
        for row in _cell_range(gymin, gymax, y0, resolution, nrows):
            for col in _cell_range(gxmin, gxmax, x0, resolution, ncols):
                center = ShapelyPoint(x0 + (col + 0.5) * resolution, y0 + (row + 0.5) * resolution)
                if prepared.covers(center):
                    weight[row, col] = max(weight[row, col], region.delta)


def _assemble(nodes: NodeSet, regions: Optional[RegionSet], mode: str,
              resolution: float) -> GridSpace:
    x0, y0, ncols, nrows = _grid_extent(nodes, regions, mode, resolution)

    obstacle = np.zeros((nrows, ncols), dtype=bool)
    weight = np.full((nrows, ncols), GRID_SETTINGS['DEFAULT_DELTA'], dtype=float)
    if regions is not None:
        for geometry in regions.obstacles:
            _mask_obstacle(obstacle, geometry, x0, y0, resolution)
        _weight_cells(weight, regions, x0, y0, resolution)

    # Locate points against a provisional grid with the final geometry
    trial = GridSpace(
        resolution=resolution, x0=x0, y0=y0, ncols=ncols, nrows=nrows,
        obstacle=obstacle, weight=weight, origin_cell=(0, 0), destination_cells={},
    )
    occupied: Dict[Cell, str] = {}
    located: List[Tuple[str, Cell]] = []
    for node_id, position in nodes.points():
        cell = locate_cell(trial, position)
        if cell in occupied:
            raise ResolutionTooCoarseError(occupied[cell], node_id, cell)
        if obstacle[cell]:
            raise PointInObstacleError(node_id, cell)
        occupied[cell] = node_id
        located.append((node_id, cell))

    origin_cell = located[0][1]
    destination_cells = dict(located[1:])
    return GridSpace(
        resolution=resolution, x0=x0, y0=y0, ncols=ncols, nrows=nrows,
        obstacle=obstacle, weight=weight,
        origin_cell=origin_cell, destination_cells=destination_cells,
    )


def build_grid(nodes: NodeSet, regions: Optional[RegionSet] = None,
               cfg: Optional[GridConfig] = None) -> GridSpace:
    """Build the flat-surface raster for a node set and optional base map"""
    cfg = cfg or GridConfig()
    resolution = cfg.resolution if cfg.resolution is not None else compute_resolution(nodes)
    if not resolution > 0:
        raise ResolutionError(f"resolution must be positive, got {resolution}")

    refinements = GRID_SETTINGS['MAX_REFINEMENTS'] if cfg.refine_resolution else 0
    for attempt in range(refinements + 1):
        try:
            gs = _assemble(nodes, regions, cfg.extent_mode, resolution)
            logger.info(
                f"Grid built: {gs.nrows}x{gs.ncols} cells at Rs={gs.resolution:.6g}, "
                f"{gs.obstacle_count} obstacle cells"
            )
            return gs
        except ResolutionTooCoarseError as e:
            if attempt == refinements:
                logger.error(f"Grid build failed: {e}")
                raise
            logger.warning(f"{e}; halving Rs to {resolution / 2:.6g}")
            resolution /= 2

    raise GridError("unreachable")  # pragma: no cover
