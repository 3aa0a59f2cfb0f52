"""Node CSV and region GeoJSON readers"""

import csv
import io
import logging
import math
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import ujson
from shapely.errors import GeometryTypeError
from shapely.geometry import shape

from src.grid.models import Destination, NodeSet, Region, RegionSet
from src.utils.constants import LOGGER_NAME
from src.utils.errors import InputError, NodeSetError, ParseError

logger = logging.getLogger(LOGGER_NAME)

NODE_COLUMNS = ('id', 'x', 'y', 'volume', 'role')
ROLE_ORIGIN = 'origin'
ROLE_DESTINATION = 'destination'
KIND_REGION = 'region'
KIND_OBSTACLE = 'obstacle'


def _number(raw: Optional[str], column: str, source: str, line: int) -> float:
    try:
        value = float((raw or '').strip())
    except ValueError:
        raise ParseError(source, f"line {line}", f"{column} '{raw}' is not a number") from None
    if not math.isfinite(value):
        raise ParseError(source, f"line {line}", f"{column} '{raw}' is not finite")
    return value


def parse_nodes(text: str, source: str = "<nodes>") -> NodeSet:
    """
    Parse `id,x,y,volume,role` rows into a NodeSet

    Args:
        text: CSV content with a header row
        source: Name used in error messages

    Raises:
        ParseError: malformed row, bad volume or not exactly one origin
    """
    reader = csv.DictReader(io.StringIO(text.lstrip("\ufeff")))
    header = [h.strip().lower() for h in (reader.fieldnames or [])]
    missing = [c for c in NODE_COLUMNS if c not in header]
    if missing:
        raise ParseError(source, "line 1", f"missing columns: {', '.join(missing)}")
    reader.fieldnames = header

    origins: List[tuple] = []
    destinations: List[Destination] = []
    for row in reader:
        line = reader.line_num
        if None in row:
            raise ParseError(source, f"line {line}", "too many fields")
        node_id = (row['id'] or '').strip()
        if not node_id:
            raise ParseError(source, f"line {line}", "empty id")
        role = (row['role'] or ROLE_DESTINATION).strip().lower()
        position = (_number(row['x'], 'x', source, line), _number(row['y'], 'y', source, line))

        if role == ROLE_ORIGIN:
            origins.append((node_id, position, line))
        elif role == ROLE_DESTINATION:
            volume = _number(row['volume'], 'volume', source, line)
            if not volume > 0:
                raise ParseError(source, f"line {line}", f"volume must be positive, got {row['volume']}")
            destinations.append(Destination(node_id, position, volume))
        else:
            raise ParseError(source, f"line {line}", f"unknown role '{row['role']}'")

    if len(origins) != 1:
        where = ", ".join(f"line {o[2]}" for o in origins) or None
        raise ParseError(source, where, f"exactly one origin required, found {len(origins)}")

    origin_id, origin, _ = origins[0]
    try:
        nodes = NodeSet(origin=origin, destinations=tuple(destinations), origin_id=origin_id)
    except NodeSetError as e:
        raise ParseError(source, None, str(e)) from e
    logger.info(f"Read {len(destinations)} destinations from {source}")
    return nodes


def parse_regions(text: str, source: str = "<regions>") -> RegionSet:
    """
    Parse a GeoJSON FeatureCollection whose features carry `kind`

    `kind` is "region" (optional numeric `delta` and `name`) or "obstacle".

    Raises:
        ParseError: invalid JSON, geometry or kind
    """
    try:
        data = ujson.loads(text)
    except ValueError as e:
        raise ParseError(source, None, f"invalid JSON: {e}") from e
    if not isinstance(data, dict) or data.get('type') != 'FeatureCollection':
        raise ParseError(source, None, "expected a GeoJSON FeatureCollection")

    regions: List[Region] = []
    obstacles: List[Any] = []
    for index, feature in enumerate(data.get('features') or []):
        where = f"feature {index}"
        properties: Dict[str, Any] = (feature or {}).get('properties') or {}
        kind = str(properties.get('kind', '')).strip().lower()
        try:
            geometry = shape(feature['geometry'])
        except (KeyError, TypeError, ValueError, AttributeError, GeometryTypeError) as e:
            raise ParseError(source, where, f"invalid geometry: {e}") from e
        if geometry.is_empty:
            raise ParseError(source, where, "empty geometry")

        if kind == KIND_OBSTACLE:
            obstacles.append(geometry)
        elif kind == KIND_REGION:
            delta = properties.get('delta')
            if delta is not None:
                try:
                    delta = float(delta)
                except (TypeError, ValueError):
                    raise ParseError(source, where, f"delta '{delta}' is not a number") from None
            regions.append(Region(geometry=geometry, delta=delta, name=properties.get('name')))
        else:
            raise ParseError(source, where, f"unknown kind '{properties.get('kind')}'")

    try:
        region_set = RegionSet(regions=tuple(regions), obstacles=tuple(obstacles))
    except InputError as e:
        raise ParseError(source, None, str(e)) from e
    logger.info(f"Read {len(regions)} regions and {len(obstacles)} obstacles from {source}")
    return region_set


def _read(path: Union[str, Path]) -> str:
    try:
        return Path(path).read_text(encoding='utf-8')
    except (OSError, UnicodeDecodeError) as e:
        raise InputError(f"cannot read {path}: {e}") from e


def read_nodes(path: Union[str, Path]) -> NodeSet:
    return parse_nodes(_read(path), str(path))


def read_regions(path: Union[str, Path]) -> RegionSet:
    return parse_regions(_read(path), str(path))
