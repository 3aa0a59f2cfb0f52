"""End-to-end pipeline: grid, layout, render, metrics"""

import logging
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Union

import ujson

from src.config.settings import ResolvedParams, RunConfig
from src.grid.builder import build_grid
from src.grid.models import Cell, GridSpace, NodeSet, RegionSet
from src.ingest.readers import read_nodes, read_regions
from src.layout.engine import LayoutResult, assign_all
from src.layout.run_log import RunLog
from src.metrics.report import MetricsReport, compute
from src.render.accumulation import EdgeGeometry, accumulate, edge_extract
from src.render.svg import RenderedMap, build_map, write_map
from src.utils.constants import APP_NAME, APP_VERSION, LOGGER_NAME
from src.utils.errors import FlowGridError, OutputError

logger = logging.getLogger(LOGGER_NAME)


@dataclass(frozen=True)
class RunResult:
    grid: GridSpace
    params: ResolvedParams
    layout: LayoutResult
    accumulation: Dict[Cell, float]
    edges: List[EdgeGeometry]
    rendered: RenderedMap
    metrics: MetricsReport


def execute(nodes: NodeSet, regions: Optional[RegionSet], cfg: RunConfig,
            run_log: Optional[RunLog] = None) -> RunResult:
    """Run every stage in memory"""
    started = time.perf_counter()
    grid = build_grid(nodes, regions, cfg.grid_config())
    params = cfg.resolve(nodes, grid.resolution)
    layout = assign_all(
        grid, nodes, params,
        run_log=run_log, threads=cfg.threads, progress=cfg.progress,
    )

    accumulation = accumulate(layout.network, nodes)
    edges = edge_extract(layout.network, accumulation)
    rendered = build_map(
        grid, nodes, edges,
        w_max=cfg.w_max,
        w_min=cfg.w_min,
        regions=regions,
        canvas_width_mm=cfg.canvas_width_mm,
        stroke_color=cfg.stroke_color,
        draw_thin_first=cfg.draw_thin_first,
        show_regions=cfg.show_regions,
    )
    metrics = compute(
        layout.network, edges, nodes,
        thresholds=cfg.el_thresholds, t_a=cfg.t_a, fallbacks=layout.fallbacks,
    )
    logger.info(f"Pipeline finished in {time.perf_counter() - started:.2f}s")
    return RunResult(
        grid=grid,
        params=params,
        layout=layout,
        accumulation=accumulation,
        edges=edges,
        rendered=rendered,
        metrics=metrics,
    )


def metrics_document(result: RunResult, cfg: RunConfig) -> Dict:
    return {
        'generator': f"{APP_NAME} {APP_VERSION}",
        'grid': result.grid.to_dict(),
        'config': cfg.to_dict(),
        'metrics': result.metrics.to_dict(),
    }


def write_metrics(result: RunResult, cfg: RunConfig, path: Union[str, Path]) -> None:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(
            ujson.dumps(metrics_document(result, cfg), sort_keys=True, indent=2) + "\n",
            encoding='utf-8',
        )
    except OSError as e:
        logger.error(f"Failed to write metrics {path}: {e}")
        raise OutputError(f"cannot write metrics {path}: {e}") from e


def run(nodes_path: Union[str, Path], cfg: RunConfig,
        regions_path: Optional[Union[str, Path]] = None,
        out: Optional[Union[str, Path]] = None,
        metrics_path: Optional[Union[str, Path]] = None,
        log_path: Optional[Union[str, Path]] = None) -> RunResult:
    """
    Read inputs, run the pipeline and write the requested outputs

    Args:
        nodes_path: Node CSV
        cfg: Run configuration
        regions_path: Optional region/obstacle GeoJSON
        out: SVG map path; the edge sidecar is written next to it
        metrics_path: Metrics JSON path
        log_path: Run log (JSON lines) path
    """
    try:
        nodes = read_nodes(nodes_path)
        regions = read_regions(regions_path) if regions_path is not None else None
        with RunLog(log_path) as run_log:
            result = execute(nodes, regions, cfg, run_log)
        if out is not None:
            write_map(result.rendered, out)
        if metrics_path is not None:
            write_metrics(result, cfg, metrics_path)
        return result
    except FlowGridError as e:
        logger.error(f"Run failed ({type(e).__name__}): {e}")
        raise
