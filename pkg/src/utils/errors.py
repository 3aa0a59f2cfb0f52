"""Exception hierarchy for FlowGrid"""

from typing import Optional


class FlowGridError(Exception):
    """Base class for every error raised by the pipeline"""

    exit_code_key = 'UNEXPECTED'


class ConfigError(FlowGridError):
    """Invalid run configuration"""

    exit_code_key = 'INPUT'


class InputError(FlowGridError):
    """Invalid input data"""

    exit_code_key = 'INPUT'


class ParseError(InputError):
    """Malformed CSV row or GeoJSON feature"""

    def __init__(self, source: str, location: Optional[str], message: str):
        self.source = source
        self.location = location
        where = f"{source}:{location}" if location else source
        super().__init__(f"{where}: {message}")


class NodeSetError(InputError):
    """Node set violates its invariants"""


class GridError(FlowGridError):
    """Grid could not be built"""

    exit_code_key = 'GRID'


class ResolutionError(GridError):
    """Resolution cannot be computed"""


class ResolutionTooCoarseError(GridError):
    """Two input points fall into the same cell"""

    def __init__(self, first: str, second: str, cell):
        self.first = first
        self.second = second
        self.cell = cell
        super().__init__(f"resolution too coarse: '{first}' and '{second}' share cell {cell}")


class PointInObstacleError(GridError):
    """An origin or destination lies in an obstacle cell"""

    def __init__(self, node_id: str, cell):
        self.node_id = node_id
        self.cell = cell
        super().__init__(f"point '{node_id}' falls in obstacle cell {cell}")


class OutOfExtentError(GridError):
    """A point or cell lies outside the grid"""


class SearchError(FlowGridError):
    """Path search failed"""

    exit_code_key = 'LAYOUT'


class NotAdjacentError(SearchError):
    """Two cells are not 8-neighbors"""


class DestinationUnreachableError(SearchError):
    """No flow-in cell can be reached from a destination"""

    def __init__(self, destination_id: str):
        self.destination_id = destination_id
        super().__init__(f"destination unreachable: '{destination_id}'")


class StaleCandidateError(SearchError):
    """Candidate path conflicts with the current network"""


class ConservationError(FlowGridError):
    """Edge volume exceeds the total volume"""

    exit_code_key = 'OUTPUT'


class OutputError(FlowGridError):
    """Map, metrics or run log could not be written"""

    exit_code_key = 'OUTPUT'
