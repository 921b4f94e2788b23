import argparse

from pdae.services import theory

NAME = "verify"


def register(subparsers) -> argparse.ArgumentParser:
    p = subparsers.add_parser(NAME, help="numeric checks of the scheme's auxiliary identities")
    p.add_argument("--m-max", type=int, default=8)
    p.add_argument("--json", action="store_true", help="print the full report as JSON")
    p.set_defaults(handler=run)
    return p


def _status(ok: bool) -> str:
    return "pass" if ok else "FAIL"


def run(args: argparse.Namespace) -> int:
    report = theory.run_theory_checks(m_max=args.m_max)

    print(f"el19      {_status(report.el19_passed)}  residual={report.el19_residual:.3e}")
    orders = ", ".join(
        f"m={f.m}:{'exact' if f.fitted_order is None else format(f.fitted_order, '.2f')}"
        for f in report.lemma3_orders
    )
    print(f"lemma3    {_status(report.lemma3_passed)}  orders [{orders}]")
    minima = ", ".join(f"m={s.m}:{s.min_re:.4f}{'' if s.required else '*'}" for s in report.gamma_spectra)
    print(f"gamma     {_status(report.gamma_passed)}  min Re(eig) [{minima}]")
    print(f"note      {report.sign_convention_note}")
    print(f"note      {report.gamma_note} (* = not required)")
    if args.json:
        print(report.json(indent=2))
    return 0 if report.passed else 3
