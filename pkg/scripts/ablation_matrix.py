"""Print the strategy ablation matrix for one node set

Runs the full configuration and then each strategy switched off on its own
(st1 ... st7), and prints TL, EL_min, Cv, C_aa, C_pc and C_o per run.

Usage:
  python scripts/ablation_matrix.py --nodes nodes.csv [--regions map.geojson]
                                    [--config key=value ...] [--json matrix.json]
"""

import argparse
import logging
import sys
from pathlib import Path

import ujson

sys.path.append(str(Path(__file__).resolve().parent.parent))

from src.config.settings import get_settings, load_overrides  # noqa: E402
from src.ingest.readers import read_nodes, read_regions  # noqa: E402
from src.pipeline.studies import ablation, study_table  # noqa: E402
from src.utils.constants import EXIT_CODES, LOGGER_NAME  # noqa: E402
from src.utils.errors import FlowGridError  # noqa: E402
from src.utils.logger import setup_logging  # noqa: E402

logger = logging.getLogger(LOGGER_NAME)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--nodes", required=True, type=Path)
    parser.add_argument("--regions", type=Path)
    parser.add_argument("--config", action="append", default=[], metavar="FILE|KEY=VALUE")
    parser.add_argument("--json", type=Path, help="Also write the matrix as JSON")
    args = parser.parse_args()

    setup_logging(logging.WARNING)
    try:
        cfg = get_settings(**load_overrides(args.config))
        nodes = read_nodes(args.nodes)
        regions = read_regions(args.regions) if args.regions else None
        rows = ablation(nodes, regions, cfg)
    except FlowGridError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return EXIT_CODES[e.exit_code_key]

    print(study_table(rows))
    if args.json:
        args.json.write_text(ujson.dumps([r.to_dict() for r in rows], sort_keys=True, indent=2), encoding='utf-8')
    return EXIT_CODES['OK']


if __name__ == "__main__":
    sys.exit(main())
