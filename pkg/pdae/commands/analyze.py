import argparse

from pdae.config import get_settings
from pdae.models import PENCIL_JSON_FIELDS, GridSpec
from pdae.services import pencil
from pdae.services.problem import get_problem

NAME = "analyze"


def register(subparsers) -> argparse.ArgumentParser:
    p = subparsers.add_parser(NAME, help="pencil diagnostics for a built-in problem (JSON)")
    p.add_argument("--example", required=True, help="built-in problem: 1, 2 or demo")
    p.add_argument("--samples", type=int, default=None, help="number of interior sample points")
    p.add_argument("--m1", type=int, default=2)
    p.add_argument("--m2", type=int, default=2)
    p.add_argument("--h", type=float, default=0.1)
    p.add_argument("--tau", type=float, default=0.1)
    p.add_argument("--full", action="store_true", help="also emit mu_x, status and warnings")
    p.set_defaults(handler=run)
    return p


def run(args: argparse.Namespace) -> int:
    settings = get_settings()
    k = settings.samples if args.samples is None else args.samples
    if k < 1:
        raise ValueError("--samples must be >= 1")
    problem = get_problem(args.example)
    x0, X, t0, T = problem.domain
    grid = GridSpec(x0=x0, X=X, t0=t0, T=T, h=args.h, tau=args.tau)

    report = pencil.analyze(
        problem, grid, args.m1, args.m2, k=k,
        cluster_tol=settings.cluster_tol, rank_tol=settings.rank_tol,
    )
    if args.full:
        print(report.json(indent=2))
    else:
        print(report.json(include=PENCIL_JSON_FIELDS, indent=2))
    return 0
