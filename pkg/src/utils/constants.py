"""Constants for FlowGrid"""

import math
from pathlib import Path

# Version info
APP_VERSION = "1.0.0"

APP_NAME = "FlowGrid"
APP_DESCRIPTION = "Crossing-free one-to-many flow map layout on a flat raster"

# Logger name shared by every module
LOGGER_NAME = 'FlowGrid'

SQRT2 = math.sqrt(2.0)

# D8 direction encoding: 0 = East, increasing clockwise in 45 degree steps.
# Offsets are (d_row, d_col); rows grow northward (row 0 is the southern edge),
# so "South" is a row decrement.
D8_OFFSETS = {
    0: (0, 1),     # E
    1: (-1, 1),    # SE
    2: (-1, 0),    # S
    3: (-1, -1),   # SW
    4: (0, -1),    # W
    5: (1, -1),    # NW
    6: (1, 0),     # N
    7: (1, 1),     # NE
}
D8_CODES = {offset: code for code, offset in D8_OFFSETS.items()}

# Grid modelling
GRID_SETTINGS = {
    'PAIR_FRACTION': 0.05,        # share of closest point pairs averaged for Rs
    'RESOLUTION_DIVISOR': 4.0,    # Rs = AveMinD / 4
    'CEIL_TOLERANCE': 1e-9,       # slack when counting cells along an axis
    'MAX_REFINEMENTS': 8,         # halvings allowed by refine_resolution
    'DEFAULT_DELTA': 1.0,         # traversal weight outside weighted regions
}

# Defaults for RunConfig
SEARCH_DEFAULTS = {
    'OMEGA': 0.65,                # weight of the reused downstream length
    'K': 4,                       # Pf window half-width
    'K_RC3': 0,                   # exclusion radius around other destinations
    'T_A': 120.0,                 # acute flow-in angle threshold, degrees
    'T_D': SQRT2,                 # minimum hang edge length, units of Rs
    'PL_PEN': 20.0,               # penalty per violated constraint, units of Rs
    'G_IM': 10000.0,              # Type 1 importance bonus, units of Rs
}

# Rendering
RENDER_SETTINGS = {
    'W_MAX': 2.0,                 # mm at nominal scale
    'W_MIN': 0.1,                 # mm, human visual resolution
    'CANVAS_WIDTH_MM': 200.0,
    'CANVAS_MARGIN_MM': 5.0,
    'STROKE_COLOR': '#1f4e79',
    'NODE_COLOR': '#c0392b',
    'ORIGIN_COLOR': '#000000',
    'REGION_FILL': '#eeeeee',
    'WEIGHTED_REGION_FILL': '#cfe2f3',
    'OBSTACLE_FILL': '#f4cccc',
    'NODE_RADIUS_MM': 0.8,
    'NUMBER_FORMAT': '{:.6f}',
}

# Metrics
METRIC_SETTINGS = {
    'EL_THRESHOLDS': (100000.0, 70000.0, 40000.0, 20000.0),   # map units
    'OVERLAP_TOLERANCE': 0.5,     # cells; a node lies on a path closer than Rs/2
}

# CLI exit codes
EXIT_CODES = {
    'OK': 0,
    'UNEXPECTED': 1,
    'INPUT': 2,
    'GRID': 3,
    'LAYOUT': 4,
    'OUTPUT': 5,
}

# Strategy switches exposed by the ablation study
STRATEGIES = {
    'st1': 'Penalty for acute flow-in angles',
    'st2': 'Penalty for short hang edges',
    'st3': 'Search directions restricted toward the origin',
    'st4': 'Direction weights from potential flow accumulation',
    'st5': 'Committed paths excluded from the search range',
    'st6': 'Other destinations excluded from the search range',
    'st7': 'Type 1 paths ranked first',
}

# Path Configuration
BASE_DIR = Path(__file__).resolve().parent.parent.parent
LOG_DIR = BASE_DIR / "logs"
