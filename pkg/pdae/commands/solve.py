import argparse
import csv
import io
import logging

from pdae.config import get_settings
from pdae.models import GridSpec, SolveReport
from pdae.services.problem import get_problem
from pdae.services.solver import STRIDES, march

logger = logging.getLogger(__name__)

NAME = "solve"
REPORT_COLUMNS = [
    "delta_u", "max_solution_norm", "cells_solved", "clamped_cells", "wall_time",
    "n1", "n2", "m1", "m2", "h", "tau", "r", "stride",
]


def register(subparsers) -> argparse.ArgumentParser:
    p = subparsers.add_parser(NAME, help="solve one built-in problem on one grid")
    p.add_argument("--example", required=True, help="built-in problem: 1, 2 or demo")
    p.add_argument("--h", type=float, required=True)
    p.add_argument("--tau", type=float, required=True)
    p.add_argument("--m1", type=int, required=True)
    p.add_argument("--m2", type=int, required=True)
    p.add_argument("--x0", type=float, default=None)
    p.add_argument("--X", type=float, default=None)
    p.add_argument("--t0", type=float, default=None)
    p.add_argument("--T", type=float, default=None)
    p.add_argument("--format", choices=["table", "json", "csv"], default="table")
    p.add_argument("--pivot-tol", type=float, default=None)
    p.add_argument("--stride", choices=list(STRIDES), default="cell",
                   help="cell: advance one cell per solve; node: advance one grid step per solve")
    p.set_defaults(handler=run)
    return p


def format_report(report: SolveReport, fmt: str) -> str:
    # -------------------------
    # json / csv keep full precision
    # -------------------------
    if fmt == "json":
        return report.json(indent=2) + "\n"
    data = report.dict()
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(REPORT_COLUMNS)
        writer.writerow(["" if data[c] is None else repr(data[c]) if isinstance(data[c], float) else data[c]
                         for c in REPORT_COLUMNS])
        return buf.getvalue()

    delta = "n/a" if report.delta_u is None else f"{report.delta_u:.2e}"
    lines = [
        f"delta_u            {delta}",
        f"max_solution_norm  {report.max_solution_norm:.6g}",
        f"grid               n1={report.n1} n2={report.n2} h={report.h:g} tau={report.tau:g} r={report.r:g}",
        f"cells              {report.cells_solved} ({report.clamped_cells} clamped), m1={report.m1} m2={report.m2} stride={report.stride}",
        f"wall_time          {report.wall_time:.3f}s",
    ]
    lines += [f"warning            {w}" for w in report.warnings]
    return "\n".join(lines) + "\n"


def run(args: argparse.Namespace) -> int:
    settings = get_settings()
    problem = get_problem(args.example)
    x0, X, t0, T = problem.domain
    domain = (
        x0 if args.x0 is None else args.x0,
        X if args.X is None else args.X,
        t0 if args.t0 is None else args.t0,
        T if args.T is None else args.T,
    )
    if domain != problem.domain:
        problem = get_problem(args.example, domain=domain)
    grid = GridSpec(x0=domain[0], X=domain[1], t0=domain[2], T=domain[3], h=args.h, tau=args.tau)
    pivot_tol = settings.pivot_tol if args.pivot_tol is None else args.pivot_tol

    _, report = march(problem, grid, args.m1, args.m2, pivot_tol=pivot_tol, corner_tol=settings.corner_tol, stride=args.stride)
    print(format_report(report, args.format), end="")
    return 0
