"""FlowGrid command line

Examples:
  python flowgrid.py run --nodes nodes.csv --out map.svg --metrics metrics.json --log run.jsonl
  python flowgrid.py run --nodes nodes.csv --regions map.geojson --config omega=0.35 --st6 off
  python flowgrid.py ablate --nodes nodes.csv
  python flowgrid.py sweep --nodes nodes.csv --param omega --values 0.35 0.65 1.0
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

from src.config.settings import RunConfig, get_settings, load_overrides
from src.ingest.readers import read_nodes, read_regions
from src.pipeline.runner import run
from src.pipeline.studies import SWEEP_PARAMS, ablation, study_table, sweep
from src.utils.constants import APP_DESCRIPTION, APP_NAME, APP_VERSION, EXIT_CODES, LOG_DIR, LOGGER_NAME, STRATEGIES
from src.utils.errors import FlowGridError
from src.utils.logger import setup_logging

logger = logging.getLogger(LOGGER_NAME)


def _switch(value: str) -> bool:
    lowered = value.strip().lower()
    if lowered in ('on', 'true', '1', 'yes'):
        return True
    if lowered in ('off', 'false', '0', 'no'):
        return False
    raise argparse.ArgumentTypeError(f"expected on|off, got '{value}'")


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--nodes", required=True, type=Path, help="Node CSV: id,x,y,volume,role")
    parser.add_argument("--regions", type=Path, help="GeoJSON with region/obstacle features")
    parser.add_argument(
        "--config", action="append", default=[], metavar="FILE|KEY=VALUE",
        help="YAML file or key=value override of a RunConfig field (repeatable)",
    )
    for name, description in STRATEGIES.items():
        parser.add_argument(f"--{name}", type=_switch, metavar="on|off", help=description)
    parser.add_argument("--threads", type=int, help="Worker threads for candidate searches")
    parser.add_argument("--verbose", "-v", action="store_true", help="Debug logging")
    parser.add_argument(
        "--log-dir", type=Path, nargs="?", const=LOG_DIR,
        help=f"Directory for rotating diagnostic logs (default when given bare: {LOG_DIR.name}/)",
    )
    parser.add_argument("--json-logs", action="store_true", help="JSON records in the --log-dir files")


def create_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="flowgrid",
        description=f"{APP_NAME} {APP_VERSION}: {APP_DESCRIPTION}",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog=__doc__,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_parser = sub.add_parser("run", help="Lay out one flow map")
    _add_common(run_parser)
    run_parser.add_argument("--out", type=Path, help="SVG map document")
    run_parser.add_argument("--metrics", type=Path, help="Metrics JSON")
    run_parser.add_argument("--log", type=Path, help="Run log (JSON lines)")
    run_parser.add_argument("--table", action="store_true", help="Print the metrics table")

    ablate_parser = sub.add_parser("ablate", help="Full run plus one run per disabled strategy")
    _add_common(ablate_parser)

    sweep_parser = sub.add_parser("sweep", help="One run per value of a parameter")
    _add_common(sweep_parser)
    sweep_parser.add_argument("--param", required=True, choices=SWEEP_PARAMS)
    sweep_parser.add_argument("--values", required=True, nargs="+", help="Values to try")
    return parser


def build_config(args: argparse.Namespace) -> RunConfig:
    """Environment, then --config items, then explicit flags"""
    overrides: Dict[str, Any] = load_overrides(args.config)
    for name in STRATEGIES:
        value = getattr(args, name, None)
        if value is not None:
            overrides[name] = value
    if args.threads is not None:
        overrides['threads'] = args.threads
    return get_settings(**overrides)


def main(argv: Optional[List[str]] = None) -> int:
    args = create_parser().parse_args(argv)
    setup_logging(
        logging.DEBUG if args.verbose else logging.INFO,
        json_logging=args.json_logs,
        log_dir=args.log_dir,
    )

    try:
        logger.info(f"Starting {APP_NAME} v{APP_VERSION} ({args.command})")
        cfg = build_config(args)

        if args.command == "run":
            result = run(
                args.nodes, cfg,
                regions_path=args.regions,
                out=args.out,
                metrics_path=args.metrics,
                log_path=args.log,
            )
            if args.table or (args.out is None and args.metrics is None):
                print(result.metrics.as_table())
            return EXIT_CODES['OK']

        nodes = read_nodes(args.nodes)
        regions = read_regions(args.regions) if args.regions is not None else None
        if args.command == "ablate":
            rows = ablation(nodes, regions, cfg)
        else:
            rows = sweep(nodes, regions, cfg, args.param, args.values)
        print(study_table(rows))
        return EXIT_CODES['OK']

    except FlowGridError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return EXIT_CODES[e.exit_code_key]
    except KeyboardInterrupt:
        logger.info("Interrupted by user")
        return EXIT_CODES['UNEXPECTED']
    except Exception as e:
        logger.critical(f"Unexpected error: {e}", exc_info=True)
        return EXIT_CODES['UNEXPECTED']


if __name__ == "__main__":
    sys.exit(main())
