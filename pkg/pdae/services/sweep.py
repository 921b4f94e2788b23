import csv
import io
import json
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from typing import Dict, List, Optional

from pdae.models import SweepConfig, SweepResultRow, SweepRow
from pdae.services.errors import PdaeError
from pdae.services.linalg import DEFAULT_PIVOT_TOL
from pdae.services.problem import get_problem
from pdae.services.solver import march

logger = logging.getLogger(__name__)

BASE_DIR = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))  # pdae/
DATA_DIR = os.path.join(BASE_DIR, "data")
BUNDLED = {
    "table1": os.path.join(DATA_DIR, "table1.json"),
    "table2": os.path.join(DATA_DIR, "table2.json"),
}

COLUMNS = ["N", "h", "tau", "t0", "T", "x0", "X", "m1", "m2", "delta_u"]
INT_COLUMNS = {"m1", "m2"}


# -------------------------
# Config loading
# -------------------------
def load_config(source: str, tolerance_factor: Optional[float] = None) -> SweepConfig:
    """
    Bundled table name ("table1", "table2") or a path to a JSON config.
    tolerance_factor fills in for configs that do not set their own.
    """
    path = BUNDLED.get(source, source)
    if not os.path.exists(path):
        raise ValueError(f"sweep config not found: {source}")
    with open(path, "r", encoding="utf-8") as f:
        try:
            raw = json.load(f)
        except json.JSONDecodeError as exc:
            raise ValueError(f"sweep config {source} is not valid JSON: {exc}") from exc
    if tolerance_factor is not None and isinstance(raw, dict):
        raw.setdefault("tolerance_factor", tolerance_factor)
    return SweepConfig.parse_obj(raw)


# -------------------------
# Running rows
# -------------------------
def within_tolerance(delta_u: float, expected: float, factor: float) -> bool:
    return expected / factor <= delta_u <= expected * factor


def run_row(row: SweepRow, tolerance_factor: float = 3.0, pivot_tol: float = DEFAULT_PIVOT_TOL) -> SweepResultRow:
    result = SweepResultRow(
        N=row.label, h=row.h, tau=row.tau, t0=row.t0, T=row.T, x0=row.x0, X=row.X,
        m1=row.m1, m2=row.m2, expected_delta_u=row.expected_delta_u,
    )
    try:
        problem = get_problem(row.example, domain=(row.x0, row.X, row.t0, row.T))
        _, report = march(problem, row.grid(), row.m1, row.m2, pivot_tol=pivot_tol, stride=row.stride)
    except PdaeError as exc:
        logger.error("row %s failed: %s", row.label, exc)
        result.error = str(exc)
        return result

    result.delta_u = report.delta_u
    if row.expected_delta_u is not None and report.delta_u is not None:
        result.within_tolerance = within_tolerance(report.delta_u, row.expected_delta_u, tolerance_factor)
    logger.info("row %s: delta_u=%s expected=%s", row.label, report.delta_u, row.expected_delta_u)
    return result


def run_sweep(config: SweepConfig, workers: int = 1, pivot_tol: float = DEFAULT_PIVOT_TOL) -> List[SweepResultRow]:
    """Results come back in config order whatever the completion order."""
    if workers < 1:
        raise ValueError("workers must be >= 1")
    factor = config.tolerance_factor
    if workers == 1 or len(config.rows) == 1:
        return [run_row(row, factor, pivot_tol) for row in config.rows]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(run_row, row, factor, pivot_tol) for row in config.rows]
        return [f.result() for f in futures]


def sweep_exit_code(results: List[SweepResultRow]) -> int:
    if any(r.error is not None for r in results):
        return 2
    if any(r.within_tolerance is False for r in results):
        return 3
    return 0


# -------------------------
# Output formats
# -------------------------
def _record(row: SweepResultRow) -> Dict[str, object]:
    data = row.dict()
    return {col: data[col] for col in COLUMNS}


def format_csv(results: List[SweepResultRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(COLUMNS)
    for row in results:
        rec = _record(row)
        writer.writerow(["" if rec[c] is None else repr(rec[c]) if isinstance(rec[c], float) else rec[c]
                         for c in COLUMNS])
    return buf.getvalue()


def parse_csv(text: str) -> List[Dict[str, object]]:
    """Inverse of format_csv."""
    rows = []
    for raw in csv.DictReader(io.StringIO(text)):
        rec: Dict[str, object] = {}
        for col in COLUMNS:
            value = raw[col]
            if col == "N":
                rec[col] = int(value) if value.lstrip("-").isdigit() else value
            elif value == "":
                rec[col] = None
            elif col in INT_COLUMNS:
                rec[col] = int(value)
            else:
                rec[col] = float(value)
        rows.append(rec)
    return rows


def format_json(results: List[SweepResultRow]) -> str:
    return json.dumps([_record(r) for r in results], indent=2)


def _fmt_delta(value: Optional[float]) -> str:
    return "-" if value is None else f"{value:.2e}"


def format_table(results: List[SweepResultRow]) -> str:
    header = f"{'N':>4} {'h':>8} {'tau':>8} {'t0':>4} {'T':>4} {'x0':>4} {'X':>4} {'m1':>3} {'m2':>3} {'delta_u':>10} {'expected':>10}  status"
    lines = [header, "-" * len(header)]
    for r in results:
        if r.error is not None:
            status = "error"
        elif r.within_tolerance is None:
            status = ""
        else:
            status = "ok" if r.within_tolerance else "out of tolerance"
        lines.append(
            f"{str(r.N):>4} {r.h:>8g} {r.tau:>8g} {r.t0:>4g} {r.T:>4g} {r.x0:>4g} {r.X:>4g} "
            f"{r.m1:>3d} {r.m2:>3d} {_fmt_delta(r.delta_u):>10} {_fmt_delta(r.expected_delta_u):>10}  {status}"
        )
    return "\n".join(lines) + "\n"


FORMATTERS = {
    "table": format_table,
    "csv": format_csv,
    "json": format_json,
}
