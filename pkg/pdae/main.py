import argparse
import logging
import sys
from typing import List, Optional

from pydantic import ValidationError

from pdae.commands import COMMANDS
from pdae.config import get_settings
from pdae.services.errors import NumericalError, PdaeError, PreconditionError, UnsupportedOperationError

logger = logging.getLogger("pdae")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERICAL = 2
EXIT_VERIFICATION = 3


class CliParser(argparse.ArgumentParser):
    """argparse with usage errors mapped to exit code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> CliParser:
    parser = CliParser(prog="pdae", description="Spline-collocation solver and diagnostics for linear PDAE systems")
    parser.add_argument("--log-level", default=None,
                        choices=["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"])
    parser.add_argument("--workers", type=int, default=None, help="process pool size for sweeps")
    subparsers = parser.add_subparsers(dest="command", required=True)

    # -------------------------
    # include every command
    # -------------------------
    for command in COMMANDS:
        command.register(subparsers)
    return parser


def _exit_code_for(exc: Exception) -> int:
    if isinstance(exc, (NumericalError, PreconditionError)):
        return EXIT_NUMERICAL
    if isinstance(exc, (ValidationError, ValueError, UnsupportedOperationError)):
        return EXIT_USAGE
    return EXIT_NUMERICAL


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    try:
        settings = get_settings()
    except ValidationError as exc:
        print(f"pdae: invalid PDAE_ settings: {exc}", file=sys.stderr)
        return EXIT_USAGE

    logging.basicConfig(
        level=args.log_level or settings.log_level.upper(),
        stream=sys.stderr,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    if args.workers is not None and args.workers < 1:
        print("pdae: --workers must be >= 1", file=sys.stderr)
        return EXIT_USAGE

    try:
        return args.handler(args)
    except (PdaeError, ValueError) as exc:
        code = _exit_code_for(exc)
        logger.debug("command %s failed", args.command, exc_info=True)
        print(f"pdae {args.command}: {exc}", file=sys.stderr)
        return code


if __name__ == "__main__":
    sys.exit(main())
