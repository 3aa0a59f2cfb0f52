"""Edge widths, curve smoothing and the SVG map document"""

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import ujson
from lxml import etree
from shapely.geometry import MultiPolygon, Polygon

from src.grid.builder import cell_center
from src.grid.models import Cell, GridSpace, NodeSet, Point, RegionSet
from src.render.accumulation import EdgeGeometry
from src.utils.constants import APP_NAME, APP_VERSION, LOGGER_NAME, RENDER_SETTINGS
from src.utils.errors import ConservationError, OutputError

logger = logging.getLogger(LOGGER_NAME)

SVG_NS = "http://www.w3.org/2000/svg"
CONSERVATION_SLACK = 1e-9


def _tag(name: str) -> str:
    return f"{{{SVG_NS}}}{name}"


def fmt(value: float) -> str:
    text = RENDER_SETTINGS['NUMBER_FORMAT'].format(value)
    return "0.000000" if text == "-0.000000" else text


def width(fv: float, fv_sum: float, w_max: float, w_min: float) -> float:
    """Stroke width of an edge carrying fv out of fv_sum, sine of the volume share"""
    if not fv_sum > 0:
        raise ValueError(f"total volume must be positive, got {fv_sum}")
    if fv > fv_sum * (1 + CONSERVATION_SLACK):
        raise ConservationError(f"edge volume {fv} exceeds total volume {fv_sum}")
    ratio = min(max(fv / fv_sum, 0.0), 1.0)
    return math.sin(ratio * math.pi / 2) * (w_max - w_min) + w_min


def simplify(cells: Sequence[Cell]) -> List[Cell]:
    """Drop cells in the middle of straight runs; endpoints are kept"""
    if len(cells) <= 2:
        return list(cells)
    kept = [cells[0]]
    for before, cell, after in zip(cells, cells[1:], cells[2:]):
        if (cell[0] - before[0], cell[1] - before[1]) != (after[0] - cell[0], after[1] - cell[1]):
            kept.append(cell)
    kept.append(cells[-1])
    return kept


def _midpoint(a: Point, b: Point) -> Point:
    return ((a[0] + b[0]) / 2, (a[1] + b[1]) / 2)


@dataclass(frozen=True)
class Curve:
    """Path of line and quadratic Bezier segments

    segments holds ('L', end) and ('Q', control, end) tuples after a move to start.
    """
    start: Point
    segments: Tuple[Tuple[Any, ...], ...]

    @property
    def end(self) -> Point:
        return self.segments[-1][-1] if self.segments else self.start

    def sample(self, per_segment: int = 16) -> List[Point]:
        """Dense points along the curve, start and end included"""
        points = [self.start]
        current = self.start
        for segment in self.segments:
            if segment[0] == 'L':
                end = segment[1]
                for i in range(1, per_segment + 1):
                    t = i / per_segment
                    points.append((current[0] + t * (end[0] - current[0]),
                                   current[1] + t * (end[1] - current[1])))
            else:
                _, control, end = segment
                for i in range(1, per_segment + 1):
                    points.append(quadratic_point(current, control, end, i / per_segment))
            current = segment[-1]
        return points

    def to_path_data(self, transform: 'CanvasTransform') -> str:
        parts = ["M {} {}".format(*map(fmt, transform.apply(self.start)))]
        for segment in self.segments:
            coords = " ".join(" ".join(map(fmt, transform.apply(p))) for p in segment[1:])
            parts.append(f"{segment[0]} {coords}")
        return " ".join(parts)


def quadratic_point(p0: Point, p1: Point, p2: Point, t: float) -> Point:
    u = 1 - t
    return (
        u * u * p0[0] + 2 * u * t * p1[0] + t * t * p2[0],
        u * u * p0[1] + 2 * u * t * p1[1] + t * t * p2[1],
    )


def smooth(points: Sequence[Point]) -> Curve:
    """Corner-cutting quadratic Beziers through the midpoints of the polyline

    Endpoints stay exact; each interior vertex becomes the control point of
    a segment between the midpoints of its two incident legs.
    """
    if len(points) < 2:
        raise ValueError("smoothing needs at least two points")
    points = [tuple(p) for p in points]
    if len(points) == 2:
        return Curve(points[0], (('L', points[1]),))

    segments: List[Tuple[Any, ...]] = [('L', _midpoint(points[0], points[1]))]
    for i in range(1, len(points) - 1):
        segments.append(('Q', points[i], _midpoint(points[i], points[i + 1])))
    segments.append(('L', points[-1]))
    return Curve(points[0], tuple(segments))


@dataclass(frozen=True)
class CanvasTransform:
    """Map units to millimetres with y pointing down"""
    xmin: float
    ymax: float
    scale: float
    margin: float
    width_mm: float
    height_mm: float

    @classmethod
    def fit(cls, extent: Tuple[float, float, float, float], canvas_width_mm: float,
            margin: float = RENDER_SETTINGS['CANVAS_MARGIN_MM']) -> 'CanvasTransform':
        xmin, ymin, xmax, ymax = extent
        scale = (canvas_width_mm - 2 * margin) / (xmax - xmin)
        return cls(
            xmin=xmin,
            ymax=ymax,
            scale=scale,
            margin=margin,
            width_mm=canvas_width_mm,
            height_mm=(ymax - ymin) * scale + 2 * margin,
        )

    def apply(self, point: Point) -> Point:
        return (
            self.margin + (point[0] - self.xmin) * self.scale,
            self.margin + (self.ymax - point[1]) * self.scale,
        )


@dataclass(frozen=True)
class RenderedEdge:
    geometry: EdgeGeometry
    width: float
    curve: Curve

    def to_dict(self) -> Dict[str, Any]:
        return {
            'kind': self.geometry.kind.value,
            'Ev': self.geometry.volume,
            'length': self.geometry.length,
            'width': self.width,
            'endpoints': [list(self.geometry.start), list(self.geometry.end)],
            'destination': self.geometry.destination_id,
        }


@dataclass(frozen=True)
class NodeMarker:
    id: str
    position: Point
    origin: bool = False


@dataclass(frozen=True)
class RenderedMap:
    """Everything emit_svg draws, already in draw order"""
    edges: Tuple[RenderedEdge, ...]
    nodes: Tuple[NodeMarker, ...]
    transform: CanvasTransform
    regions: Tuple[Tuple[Any, bool], ...] = ()   # (polygon, weighted)
    obstacles: Tuple[Any, ...] = ()
    stroke_color: str = RENDER_SETTINGS['STROKE_COLOR']
    metadata: Dict[str, Any] = field(default_factory=dict)


def build_map(grid: GridSpace, nodes: NodeSet, edges: Sequence[EdgeGeometry],
              w_max: float, w_min: float,
              regions: Optional[RegionSet] = None,
              canvas_width_mm: float = RENDER_SETTINGS['CANVAS_WIDTH_MM'],
              stroke_color: str = RENDER_SETTINGS['STROKE_COLOR'],
              draw_thin_first: bool = False,
              show_regions: bool = True) -> RenderedMap:
    """Assign widths and curves to edges and order them for drawing"""
    fv_sum = nodes.total_volume
    rendered = []
    for edge in edges:
        if edge.start == edge.end:
            points = list(edge.polyline)
        else:
            points = [cell_center(grid, c) for c in simplify(edge.cells)]
        rendered.append(RenderedEdge(
            geometry=edge,
            width=width(edge.volume, fv_sum, w_max, w_min),
            curve=smooth(points),
        ))

    # Thick first so thin edges stay visible on top
    rendered.sort(key=lambda e: (e.width if draw_thin_first else -e.width, e.geometry.start, e.geometry.end))

    markers = [NodeMarker(nodes.origin_id, cell_center(grid, grid.origin_cell), origin=True)]
    for dest in sorted(nodes.destinations, key=lambda d: d.id):
        markers.append(NodeMarker(dest.id, cell_center(grid, grid.destination_cells[dest.id])))

    backdrop: List[Tuple[Any, bool]] = []
    obstacles: List[Any] = []
    if regions is not None and show_regions:
        backdrop = [(r.geometry, r.delta is not None) for r in regions.regions]
        obstacles = [g for g in regions.obstacles if isinstance(g, (Polygon, MultiPolygon))]

    return RenderedMap(
        edges=tuple(rendered),
        nodes=tuple(markers),
        transform=CanvasTransform.fit(grid.extent, canvas_width_mm),
        regions=tuple(backdrop),
        obstacles=tuple(obstacles),
        stroke_color=stroke_color,
        metadata={'edges': len(rendered), 'total_volume': fv_sum},
    )


def _polygon_path(geometry: Any, transform: CanvasTransform) -> str:
    polygons = geometry.geoms if isinstance(geometry, MultiPolygon) else [geometry]
    parts = []
    for polygon in polygons:
        for ring in [polygon.exterior, *polygon.interiors]:
            coords = [transform.apply(p) for p in list(ring.coords)[:-1]]
            head, *rest = coords
            parts.append(
                f"M {fmt(head[0])} {fmt(head[1])} "
                + " ".join(f"L {fmt(x)} {fmt(y)}" for x, y in rest)
                + " Z"
            )
    return " ".join(parts)


def emit_svg(rendered: RenderedMap) -> bytes:
    """Serialize the map: regions beneath edges, node markers on top"""
    t = rendered.transform
    root = etree.Element(
        _tag("svg"),
        nsmap={None: SVG_NS},
        version="1.1",
        width=f"{fmt(t.width_mm)}mm",
        height=f"{fmt(t.height_mm)}mm",
        viewBox=f"0 0 {fmt(t.width_mm)} {fmt(t.height_mm)}",
    )
    root.append(etree.Comment(f" {APP_NAME} {APP_VERSION} "))

    regions = etree.SubElement(root, _tag("g"), id="regions")
    for geometry, weighted in rendered.regions:
        etree.SubElement(
            regions, _tag("path"),
            d=_polygon_path(geometry, t),
            fill=RENDER_SETTINGS['WEIGHTED_REGION_FILL' if weighted else 'REGION_FILL'],
            stroke="none",
        )
    for geometry in rendered.obstacles:
        etree.SubElement(
            regions, _tag("path"),
            d=_polygon_path(geometry, t),
            fill=RENDER_SETTINGS['OBSTACLE_FILL'],
            stroke="none",
        )

    edges = etree.SubElement(
        root, _tag("g"), id="edges", fill="none", stroke=rendered.stroke_color,
        **{"stroke-linecap": "round", "stroke-linejoin": "round"},
    )
    for edge in rendered.edges:
        etree.SubElement(
            edges, _tag("path"),
            d=edge.curve.to_path_data(t),
            **{
                "stroke-width": fmt(edge.width),
                "data-kind": edge.geometry.kind.value,
                "data-volume": fmt(edge.geometry.volume),
            },
        )

    nodes = etree.SubElement(root, _tag("g"), id="nodes")
    for marker in rendered.nodes:
        x, y = t.apply(marker.position)
        etree.SubElement(
            nodes, _tag("circle"),
            id=f"node-{marker.id}",
            cx=fmt(x),
            cy=fmt(y),
            r=fmt(RENDER_SETTINGS['NODE_RADIUS_MM'] * (1.5 if marker.origin else 1.0)),
            fill=RENDER_SETTINGS['ORIGIN_COLOR' if marker.origin else 'NODE_COLOR'],
        )

    return etree.tostring(root, pretty_print=True, xml_declaration=True, encoding="UTF-8")


def sidecar(rendered: RenderedMap) -> Dict[str, Any]:
    """Per-edge summary written next to the map document"""
    ordered = sorted(rendered.edges, key=lambda e: (e.geometry.start, e.geometry.end))
    return {
        'edges': [e.to_dict() for e in ordered],
        'total_volume': rendered.metadata.get('total_volume'),
    }


def write_map(rendered: RenderedMap, path: Union[str, Path]) -> Path:
    """Write the SVG document and its JSON sidecar; returns the sidecar path"""
    path = Path(path)
    side = path.with_suffix('.edges.json')
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(emit_svg(rendered))
        side.write_text(ujson.dumps(sidecar(rendered), sort_keys=True, indent=2), encoding='utf-8')
    except OSError as e:
        logger.error(f"Failed to write map {path}: {e}")
        raise OutputError(f"cannot write map {path}: {e}") from e
    logger.info(f"Wrote map {path} ({len(rendered.edges)} edges) and {side.name}")
    return side
