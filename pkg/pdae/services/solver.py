import logging
import time
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple

import numpy as np

from pdae.models import GridSpec, SolveReport
from pdae.services.errors import (
    InstabilityError,
    PreconditionError,
    SingularCellError,
    SingularMatrixError,
    UnsupportedOperationError,
)
from pdae.services.linalg import DEFAULT_PIVOT_TOL, lu_solve
from pdae.services.problem import PdaeProblem, check_corner_compatibility
from pdae.services.stencil import MAX_DEGREE, StencilTable, build_stencil

logger = logging.getLogger(__name__)

# "cell": advance a whole cell (m1, m2) per solve; "node": advance one grid
# step, so each node is overwritten by every later cell that covers it
STRIDES = ("cell", "node")


@dataclass
class SolutionGrid:
    n1: int
    n2: int
    n: int
    values: np.ndarray = field(repr=False)
    filled: np.ndarray = field(repr=False)

    @classmethod
    def empty(cls, n1: int, n2: int, n: int) -> "SolutionGrid":
        return cls(
            n1=n1, n2=n2, n=n,
            values=np.zeros((n1 + 1, n2 + 1, n)),
            filled=np.zeros((n1 + 1, n2 + 1), dtype=bool),
        )

    def set(self, i: int, j: int, v) -> None:
        self.values[i, j] = v
        self.filled[i, j] = True

    def get(self, i: int, j: int) -> np.ndarray:
        if not self.filled[i, j]:
            raise PreconditionError(f"grid node ({i}, {j}) has not been computed")
        return self.values[i, j]

    @property
    def complete(self) -> bool:
        return bool(np.all(self.filled))


@dataclass
class CellSystem:
    """
    Collocation system of one cell with base node (i, j). Unknown blocks are
    ordered l1-major, l2-minor: block (l1-1)*m2 + (l2-1) holds v[i+l1, j+l2].
    """
    i: int
    j: int
    order: int
    matrix: np.ndarray = field(repr=False)
    rhs: np.ndarray = field(repr=False)
    node_map: List[Tuple[int, int]]


@dataclass
class ConvergenceResult:
    order: Optional[float]
    steps: List[float]
    errors: List[float]

    @property
    def exact(self) -> bool:
        return self.order is None


# -------------------------
# Grid setup
# -------------------------
def initial_grid(problem: PdaeProblem, grid: GridSpec) -> SolutionGrid:
    sol = SolutionGrid.empty(grid.n1, grid.n2, problem.n)
    for i in range(grid.n1 + 1):
        sol.set(i, 0, problem.phi(grid.x(i)))
    for j in range(1, grid.n2 + 1):
        sol.set(0, j, problem.psi(grid.t(j)))
    return sol


def _cell_bases(count: int, size: int, step: Optional[int] = None) -> List[Tuple[int, bool]]:
    """
    Base indices stepping by `step` (default `size`); a trailing partial cell
    is shifted back to end at `count`.
    """
    step = size if step is None else step
    bases = [(b, False) for b in range(0, count - size + 1, step)]
    last_end = bases[-1][0] + size
    if last_end < count:
        bases.append((count - size, True))
    return bases


# -------------------------
# Cell assembly + solve
# -------------------------
def assemble_cell(
    problem: PdaeProblem,
    grid: GridSpec,
    st1: StencilTable,
    st2: StencilTable,
    i: int,
    j: int,
    sol: SolutionGrid,
) -> CellSystem:
    m1, m2, n = st1.m, st2.m, problem.n
    if i < 0 or j < 0 or i + m1 > grid.n1 or j + m2 > grid.n2:
        raise PreconditionError(f"cell (i={i}, j={j}) of size {m1}x{m2} leaves the grid")

    # known layers: bottom (i+l1, j) and left (i, j+l2)
    bottom = [sol.get(i + l1, j) for l1 in range(1, m1 + 1)]
    left = [sol.get(i, j + l2) for l2 in range(1, m2 + 1)]

    order = m1 * m2 * n
    matrix = np.zeros((order, order))
    rhs = np.zeros(order)
    gbar, gbar0 = st1.gamma, st1.gamma0
    g, g0 = st2.gamma, st2.gamma0

    def block(l1: int, l2: int) -> slice:
        k = (l1 - 1) * m2 + (l2 - 1)
        return slice(k * n, (k + 1) * n)

    node_map = []
    for l1 in range(1, m1 + 1):
        x = grid.x(i + l1)
        for l2 in range(1, m2 + 1):
            t = grid.t(j + l2)
            node_map.append((i + l1, j + l2))
            a_tau = problem.A(x, t) / grid.tau
            b_h = problem.B(x, t) / grid.h
            rows = block(l1, l2)
            for l3 in range(1, m2 + 1):
                matrix[rows, block(l1, l3)] += g[l2 - 1, l3 - 1] * a_tau
            for l3 in range(1, m1 + 1):
                matrix[rows, block(l3, l2)] += gbar[l1 - 1, l3 - 1] * b_h
            matrix[rows, block(l1, l2)] += problem.C(x, t)
            rhs[rows] = (
                problem.f(x, t)
                - g0[l2 - 1] * (a_tau @ bottom[l1 - 1])
                - gbar0[l1 - 1] * (b_h @ left[l2 - 1])
            )
    return CellSystem(i=i, j=j, order=order, matrix=matrix, rhs=rhs, node_map=node_map)


def solve_cell(cell: CellSystem, pivot_tol: float = DEFAULT_PIVOT_TOL) -> List[np.ndarray]:
    try:
        v = lu_solve(cell.matrix, cell.rhs, pivot_tol)
    except SingularMatrixError as exc:
        raise SingularCellError(cell.i, cell.j, exc.pivot_index) from exc
    n = cell.order // len(cell.node_map)
    return [v[k * n:(k + 1) * n] for k in range(len(cell.node_map))]


# -------------------------
# March over the grid
# -------------------------
def march(
    problem: PdaeProblem,
    grid: GridSpec,
    m1: int,
    m2: int,
    pivot_tol: float = DEFAULT_PIVOT_TOL,
    progress: Optional[Callable[[int, int], None]] = None,
    corner_tol: float = 1e-9,
    stride: str = "cell",
) -> Tuple[SolutionGrid, SolveReport]:
    if stride not in STRIDES:
        raise ValueError(f"stride must be one of {', '.join(STRIDES)}, got {stride!r}")
    for name, m, count in (("m1", m1, grid.n1), ("m2", m2, grid.n2)):
        if not 1 <= m <= MAX_DEGREE:
            raise ValueError(f"{name} must be in 1..{MAX_DEGREE}, got {m}")
        if m > count:
            raise ValueError(f"{name}={m} exceeds the number of grid steps {count}")

    start = time.perf_counter()
    st1, st2 = build_stencil(m1), build_stencil(m2)
    check_corner_compatibility(problem, grid.x0, grid.t0, corner_tol)
    sol = initial_grid(problem, grid)
    logger.info("march %s: n1=%d n2=%d m1=%d m2=%d r=%g stride=%s", problem.name, grid.n1, grid.n2, m1, m2, grid.r, stride)

    cells = 0
    clamped = 0
    step1, step2 = (m1, m2) if stride == "cell" else (1, 1)
    x_bases = _cell_bases(grid.n1, m1, step1)
    for jb, j_clamped in _cell_bases(grid.n2, m2, step2):
        for ib, i_clamped in x_bases:
            cell = assemble_cell(problem, grid, st1, st2, ib, jb, sol)
            values = solve_cell(cell, pivot_tol)
            for (gi, gj), v in zip(cell.node_map, values):
                if not np.all(np.isfinite(v)):
                    raise InstabilityError(ib, jb)
                sol.set(gi, gj, v)
            cells += 1
            if i_clamped or j_clamped:
                clamped += 1
            logger.debug("cell (%d, %d) solved", ib, jb)
            if progress is not None:
                progress(ib, jb)

    warnings = []
    if clamped:
        warnings.append(
            f"{clamped} clamped cell(s): grid steps ({grid.n1}, {grid.n2}) not divisible by ({m1}, {m2})"
        )
        logger.warning(warnings[-1])

    delta_u = error_norm(sol, problem, grid) if problem.exact is not None else None
    wall = time.perf_counter() - start
    report = SolveReport(
        delta_u=delta_u,
        max_solution_norm=solution_norm(sol),
        cells_solved=cells,
        clamped_cells=clamped,
        wall_time=wall,
        warnings=warnings,
        n1=grid.n1, n2=grid.n2, m1=m1, m2=m2,
        h=grid.h, tau=grid.tau, r=grid.r,
        stride=stride,
    )
    logger.info("march %s done: %d cells in %.2fs, delta_u=%s", problem.name, cells, wall, delta_u)
    return sol, report


# -------------------------
# Norms + convergence
# -------------------------
def solution_norm(sol: SolutionGrid) -> float:
    return float(np.max(np.abs(sol.values)))


def error_norm(sol: SolutionGrid, problem: PdaeProblem, grid: GridSpec) -> float:
    """C(U_delta) distance: max over nodes of the max-abs component error."""
    if problem.exact is None:
        raise UnsupportedOperationError(f"problem {problem.name!r} has no exact solution")
    if not sol.complete:
        raise PreconditionError("solution grid is not fully computed")
    worst = 0.0
    for i in range(grid.n1 + 1):
        x = grid.x(i)
        for j in range(grid.n2 + 1):
            diff = np.max(np.abs(sol.values[i, j] - problem.exact(x, grid.t(j))))
            worst = max(worst, float(diff))
    return worst


def refine_grid(grid: GridSpec, axis: str = "both", factor: float = 2.0) -> GridSpec:
    if axis not in ("x", "t", "both"):
        raise ValueError("axis must be x, t or both")
    h = grid.h / factor if axis in ("x", "both") else grid.h
    tau = grid.tau / factor if axis in ("t", "both") else grid.tau
    return GridSpec(x0=grid.x0, X=grid.X, t0=grid.t0, T=grid.T, h=h, tau=tau)


def convergence_slope(
    problem: PdaeProblem,
    m1: int,
    m2: int,
    base_grid: GridSpec,
    refinements: int = 2,
    axis: str = "both",
    exact_tol: float = 1e-12,
    stride: str = "cell",
) -> ConvergenceResult:
    """
    Least-squares slope of log(delta_u) against log(step) over the base grid and
    `refinements` successive halvings of the chosen step(s).
    """
    if refinements < 2:
        raise ValueError("at least 2 refinements are needed")
    grid = base_grid
    steps, errors = [], []
    for level in range(refinements + 1):
        if level:
            grid = refine_grid(grid, axis)
        _, report = march(problem, grid, m1, m2, stride=stride)
        if report.delta_u is None:
            raise UnsupportedOperationError(f"problem {problem.name!r} has no exact solution")
        steps.append(grid.tau if axis == "t" else grid.h)
        errors.append(report.delta_u)

    usable = [(s, e) for s, e in zip(steps, errors) if e > exact_tol]
    if len(usable) < 2:
        logger.info("convergence run reproduces the exact solution; order undefined")
        return ConvergenceResult(order=None, steps=steps, errors=errors)
    log_s = np.log([s for s, _ in usable])
    log_e = np.log([e for _, e in usable])
    slope = float(np.polyfit(log_s, log_e, 1)[0])
    return ConvergenceResult(order=slope, steps=steps, errors=errors)
