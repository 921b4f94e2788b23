import argparse
import logging

from pdae.config import get_settings
from pdae.services import sweep

logger = logging.getLogger(__name__)

NAME = "sweep"


def register(subparsers) -> argparse.ArgumentParser:
    p = subparsers.add_parser(NAME, help="run a table of solves from a JSON config")
    p.add_argument("config", help="bundled table (table1, table2) or path to a JSON config")
    p.add_argument("--format", choices=sorted(sweep.FORMATTERS), default=None,
                   help="overrides the config's output_format")
    p.add_argument("--output", default=None, help="write results to this file instead of stdout")
    p.set_defaults(handler=run)
    return p


def run(args: argparse.Namespace) -> int:
    settings = get_settings()
    config = sweep.load_config(args.config, tolerance_factor=settings.tolerance_factor)
    workers = settings.workers if args.workers is None else args.workers
    fmt = args.format or config.output_format

    results = sweep.run_sweep(config, workers=workers, pivot_tol=settings.pivot_tol)
    text = sweep.FORMATTERS[fmt](results)
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="") as f:
            f.write(text)
        logger.info("wrote %d rows to %s", len(results), args.output)
    else:
        print(text, end="")
    return sweep.sweep_exit_code(results)
