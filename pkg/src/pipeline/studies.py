"""Ablation matrix and single-parameter sweeps over the pipeline"""

from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence

from tabulate import tabulate

from src.config.settings import RunConfig, with_overrides
from src.grid.models import NodeSet, RegionSet
from src.metrics.report import MetricsReport
from src.pipeline.runner import execute
from src.utils.constants import STRATEGIES
from src.utils.logger import get_logger

SWEEP_PARAMS = ('omega', 'k', 't_a', 't_d', 'k_rc3', 'pl_pen')
STUDY_COLUMNS = ["Run", "TL", "EL_min", "Cv (%)", "C_aa", "C_pc", "C_o", "Fallbacks"]


@dataclass(frozen=True)
class StudyRow:
    label: str
    metrics: MetricsReport

    def cells(self) -> List[Any]:
        m = self.metrics
        return [
            self.label, f"{m.tl:.1f}", f"{m.el_min:.1f}", f"{m.cv:.2f}",
            m.c_aa, m.c_pc, m.c_o, len(m.fallbacks),
        ]

    def to_dict(self) -> Dict[str, Any]:
        return {'label': self.label, 'metrics': self.metrics.to_dict()}


def ablation(nodes: NodeSet, regions: Optional[RegionSet], cfg: RunConfig,
             strategies: Sequence[str] = tuple(STRATEGIES)) -> List[StudyRow]:
    """The full run followed by one run per disabled strategy"""
    log = get_logger("studies", study="ablation")
    rows = [StudyRow("full", execute(nodes, regions, cfg).metrics)]
    for name in strategies:
        log.info(f"Ablation: {name} off ({STRATEGIES[name]})")
        variant = with_overrides(cfg, **{name: False})
        rows.append(StudyRow(f"{name} off", execute(nodes, regions, variant).metrics))
    return rows


def sweep(nodes: NodeSet, regions: Optional[RegionSet], cfg: RunConfig,
          param: str, values: Sequence[Any]) -> List[StudyRow]:
    """One run per value of a single parameter"""
    if param not in SWEEP_PARAMS:
        raise ValueError(f"cannot sweep '{param}'; choose from {', '.join(SWEEP_PARAMS)}")
    log = get_logger("studies", study="sweep", param=param)
    rows = []
    for value in values:
        log.info(f"Sweep: {param}={value}")
        variant = with_overrides(cfg, **{param: value})
        rows.append(StudyRow(f"{param}={value}", execute(nodes, regions, variant).metrics))
    return rows


def study_table(rows: Sequence[StudyRow], tablefmt: str = "github") -> str:
    return tabulate([r.cells() for r in rows], headers=STUDY_COLUMNS, tablefmt=tablefmt)
