"""Iterative flow-direction assignment: route the most important destination first"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from tqdm import tqdm

from src.config.settings import ResolvedParams
from src.grid.models import GridSpace, NodeSet
from src.layout.network import FlowNetwork, PathType
from src.layout.run_log import IterationRecord, RunLog
from src.search.context import CandidatePath, SearchContext, potential_accumulation
from src.search.engine import find_best_path
from src.utils.constants import LOGGER_NAME
from src.utils.errors import SearchError

logger = logging.getLogger(LOGGER_NAME)


@dataclass(frozen=True)
class LayoutResult:
    network: FlowNetwork
    potential: np.ndarray
    records: Tuple[IterationRecord, ...]

    @property
    def fallbacks(self) -> List[str]:
        return [r.destination_id for r in self.records if r.fallback]


def classify_path(path: CandidatePath, net: FlowNetwork) -> PathType:
    """Type1 iff the path joins the tree at the origin"""
    return PathType.TYPE1 if path.flow_in == net.origin else PathType.TYPE2


def path_importance(path: CandidatePath, path_type: PathType, params: ResolvedParams) -> float:
    """Selection score; params.g_im is already in map units"""
    if path_type is PathType.TYPE1 and params.type1_first:
        return path.pl + params.g_im
    return path.pl


def build_context(grid: GridSpace, net: FlowNetwork, pf: np.ndarray,
                  params: ResolvedParams) -> SearchContext:
    """Snapshot of the network for one iteration of searches"""
    return SearchContext.create(
        grid=grid,
        params=params,
        pf=pf,
        committed=net.downstream_length,
        downstream_dir=net.downstream_dir,
        upstream=net.upstream_map,
    )


def _selection_key(item: Tuple[CandidatePath, PathType, float]) -> Tuple[float, float, str]:
    path, _, importance = item
    return (-importance, -path.pl, path.destination_id)


def _search_all(ctx: SearchContext, grid: GridSpace, pending: Sequence[str],
                executor: Optional[ThreadPoolExecutor]) -> List[CandidatePath]:
    def search(destination_id: str) -> CandidatePath:
        return find_best_path(ctx, grid.destination_cells[destination_id], destination_id)

    if executor is None:
        return [search(d) for d in pending]
    return list(executor.map(search, pending))


def assign_all(grid: GridSpace, nodes: NodeSet, params: ResolvedParams,
               run_log: Optional[RunLog] = None, threads: int = 1,
               progress: bool = False,
               on_commit: Optional[Callable[[FlowNetwork], None]] = None) -> LayoutResult:
    """
    Route every destination into one tree rooted at the origin cell

    Args:
        grid: Grid space with origin and destination cells
        nodes: Node set the grid was built from
        params: Resolved search parameters
        run_log: Receives one record per iteration
        threads: Worker threads for the per-iteration candidate searches
        progress: Show a tqdm bar over iterations
        on_commit: Called with the network after every commit

    Raises:
        DestinationUnreachableError: some destination cannot reach the tree
    """
    run_log = run_log if run_log is not None else RunLog()
    pf = potential_accumulation(grid, nodes, params.k)
    network = FlowNetwork.initial(grid)
    pending = sorted(grid.destination_cells)
    records: List[IterationRecord] = []

    executor = ThreadPoolExecutor(max_workers=threads) if threads > 1 else None
    bar = tqdm(total=len(pending), desc="Routing", unit="dest", disable=not progress)
    try:
        iteration = 0
        while pending:
            iteration += 1
            ctx = build_context(grid, network, pf, params)
            candidates = _search_all(ctx, grid, pending, executor)

            scored = []
            for candidate in candidates:
                path_type = classify_path(candidate, network)
                scored.append((candidate, path_type, path_importance(candidate, path_type, params)))
            scored.sort(key=_selection_key)
            chosen, path_type, importance = scored[0]

            network = network.incorporate(chosen, path_type, importance, iteration)
            record = IterationRecord(
                iteration=iteration,
                destination_id=chosen.destination_id,
                pl=chosen.pl,
                path_type=path_type.value,
                penalties=sorted(p.value for p in chosen.penalties),
                flow_in=chosen.flow_in,
                importance=importance,
                fallback=chosen.fallback,
                candidates=len(candidates),
            )
            records.append(record)
            run_log.append(record)
            logger.debug(
                f"Iteration {iteration}: '{chosen.destination_id}' {path_type.value} "
                f"PL={chosen.pl:.6g} importance={importance:.6g} of {len(candidates)} candidates"
            )

            pending.remove(chosen.destination_id)
            bar.update(1)
            if on_commit is not None:
                on_commit(network)
    except SearchError as e:
        logger.error(f"Layout failed at iteration {iteration}: {e}")
        raise
    finally:
        bar.close()
        if executor is not None:
            executor.shutdown(wait=True)

    logger.info(
        f"Assigned {len(network.paths)} paths over {len(network.committed_cells)} cells "
        f"({sum(r.fallback for r in records)} direction fallbacks)"
    )
    return LayoutResult(network=network, potential=pf, records=tuple(records))
