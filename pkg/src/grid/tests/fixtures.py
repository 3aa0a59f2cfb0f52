"""Grid and network builders shared by the test suites"""

from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from src.config.settings import ResolvedParams, RunConfig
from src.grid.models import Cell, Destination, GridSpace, NodeSet
from src.layout.engine import build_context
from src.layout.network import FlowNetwork, PathType
from src.search.context import CandidatePath, SearchContext, potential_accumulation

RS = 10.0


def center(cell: Cell, rs: float = RS) -> Tuple[float, float]:
    return ((cell[1] + 0.5) * rs, (cell[0] + 0.5) * rs)


def make_case(nrows: int, ncols: int, origin: Cell,
              destinations: Dict[str, Tuple[Cell, float]],
              obstacles: Iterable[Cell] = (),
              weights: Optional[Dict[Cell, float]] = None,
              rs: float = RS) -> Tuple[GridSpace, NodeSet]:
    """GridSpace at (0, 0) with points on the centers of the given cells"""
    obstacle = np.zeros((nrows, ncols), dtype=bool)
    for cell in obstacles:
        obstacle[cell] = True
    weight = np.ones((nrows, ncols), dtype=float)
    for cell, delta in (weights or {}).items():
        weight[cell] = delta

    grid = GridSpace(
        resolution=rs, x0=0.0, y0=0.0, ncols=ncols, nrows=nrows,
        obstacle=obstacle, weight=weight, origin_cell=origin,
        destination_cells={d: cell for d, (cell, _) in destinations.items()},
    )
    nodes = NodeSet(
        origin=center(origin, rs),
        destinations=tuple(
            Destination(d, center(cell, rs), volume) for d, (cell, volume) in destinations.items()
        ),
    )
    return grid, nodes


def params_for(nodes: NodeSet, rs: float = RS, **overrides) -> ResolvedParams:
    return RunConfig(**overrides).resolve(nodes, rs)


def tree_from_paths(grid: GridSpace, paths: Sequence[Sequence[Cell]]) -> FlowNetwork:
    """Commit hand-drawn paths in order; each must end on the tree built so far"""
    net = FlowNetwork.initial(grid)
    for iteration, cells in enumerate(paths, start=1):
        cells = tuple(cells)
        destination_id = grid.destination_at(cells[0]) or f"path{iteration}"
        candidate = CandidatePath(destination_id, cells, cells[-1], 0.0, 0.0, frozenset(), 0.0)
        path_type = PathType.TYPE1 if cells[-1] == grid.origin_cell else PathType.TYPE2
        net = net.incorporate(candidate, path_type, 0.0, iteration)
    return net


def context_for(grid: GridSpace, nodes: NodeSet, net: Optional[FlowNetwork] = None,
                **overrides) -> SearchContext:
    params = params_for(nodes, grid.resolution, **overrides)
    pf = potential_accumulation(grid, nodes, params.k)
    return build_context(grid, net or FlowNetwork.initial(grid), pf, params)


def check_tree(net: FlowNetwork) -> None:
    """Assert the committed cells form one tree rooted at the origin"""
    cells = net.committed_cells
    assert net.origin in cells
    assert net.origin not in net.downstream_dir
    assert len(net.downstream_dir) == len(cells) - 1
    for cell in cells:
        assert not net.grid.obstacle[cell]
        seen = set()
        while cell != net.origin:
            assert cell not in seen
            seen.add(cell)
            cell = net.downstream_cell(cell)
            assert cell in cells


def random_case(seed: int, size_range: Sequence[int] = (12, 16),
                dest_range: Sequence[int] = (3, 6),
                obstacle_share: float = 0.04) -> Tuple[GridSpace, NodeSet]:
    """
    Random fixture whose special cells are pairwise at Chebyshev distance >= 2

    Obstacles and destinations then never form a wall, so every destination
    can reach the tree.
    """
    rng = np.random.default_rng(seed)
    nrows = int(rng.integers(size_range[0], size_range[1] + 1))
    ncols = int(rng.integers(size_range[0], size_range[1] + 1))
    n_dest = int(rng.integers(dest_range[0], dest_range[1] + 1))
    n_obstacles = int(obstacle_share * nrows * ncols)

    taken: List[Cell] = []

    def free(cell: Cell) -> bool:
        return all(max(abs(cell[0] - t[0]), abs(cell[1] - t[1])) >= 2 for t in taken)

    def place() -> Cell:
        while True:
            cell = (int(rng.integers(0, nrows)), int(rng.integers(0, ncols)))
            if free(cell):
                taken.append(cell)
                return cell

    origin = place()
    destinations = {
        f"d{i:02d}": (place(), float(rng.integers(10, 500))) for i in range(n_dest)
    }
    obstacles = []
    for _ in range(n_obstacles):
        cell = (int(rng.integers(0, nrows)), int(rng.integers(0, ncols)))
        if free(cell):
            taken.append(cell)
            obstacles.append(cell)
    return make_case(nrows, ncols, origin, destinations, obstacles)


BRANCHING_DESTINATIONS = {
    'D': ((2, 1), 40.0),
    'F': ((8, 2), 30.0),
    'H': ((6, 0), 20.0),
    'I': ((8, 6), 100.0),
    'J': ((6, 8), 180.0),
}
BRANCHING_PATHS = [
    [(8, 6), (7, 6), (6, 6), (5, 5), (4, 4), (3, 4), (2, 4), (1, 4), (0, 4)],
    [(6, 8), (6, 7), (6, 6)],
    [(8, 2), (7, 2), (6, 2), (5, 3), (4, 4)],
    [(6, 0), (6, 1), (6, 2)],
    [(2, 1), (2, 2), (2, 3), (2, 4)],
]


def branching_case() -> Tuple[FlowNetwork, NodeSet]:
    """Five destinations meeting at four junctions on a 9x9 grid"""
    grid, nodes = make_case(9, 9, (0, 4), BRANCHING_DESTINATIONS)
    return tree_from_paths(grid, BRANCHING_PATHS), nodes
