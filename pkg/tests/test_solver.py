import numpy as np
import pytest

from pdae.models import GridSpec
from pdae.services.errors import PreconditionError, SingularCellError, UnsupportedOperationError
from pdae.services.problem import get_problem
from pdae.services.solver import (
    SolutionGrid,
    assemble_cell,
    convergence_slope,
    error_norm,
    initial_grid,
    march,
    refine_grid,
    solve_cell,
)
from pdae.services.stencil import build_stencil


# -------------------------
# Grid handling
# -------------------------
def test_grid_spec_derives_counts():
    grid = GridSpec(h=0.1, tau=0.05, X=2.0)
    assert (grid.n1, grid.n2) == (20, 20)
    assert grid.r == pytest.approx(0.5)
    assert grid.x(3) == pytest.approx(0.3)


@pytest.mark.parametrize("kwargs", [
    {"h": 0.0, "tau": 0.1},
    {"h": 0.3, "tau": 0.1},
    {"h": 0.1, "tau": 0.1, "X": -1.0},
])
def test_grid_spec_rejects_bad_steps(kwargs):
    with pytest.raises(ValueError):
        GridSpec(**kwargs)


def test_boundary_layers_are_assigned_exactly(demo, coarse_grid):
    sol, _ = march(demo, coarse_grid, 2, 2)
    for j in range(coarse_grid.n2 + 1):
        assert np.array_equal(sol.values[0, j], demo.psi(coarse_grid.t(j)))
    for i in range(coarse_grid.n1 + 1):
        assert np.array_equal(sol.values[i, 0], demo.phi(coarse_grid.x(i)))


def test_unfilled_node_is_a_precondition_error():
    sol = SolutionGrid.empty(2, 2, 1)
    with pytest.raises(PreconditionError):
        sol.get(1, 1)


# -------------------------
# Cells
# -------------------------
def test_cell_needs_left_and_bottom_layers(demo):
    grid = GridSpec(h=0.25, tau=0.25)
    sol = initial_grid(demo, grid)
    st = build_stencil(2)
    # left layer x = x_2 has not been computed yet
    with pytest.raises(PreconditionError):
        assemble_cell(demo, grid, st, st, 2, 0, sol)


def test_cell_system_shape_and_ordering(demo):
    grid = GridSpec(h=0.25, tau=0.25)
    sol = initial_grid(demo, grid)
    cell = assemble_cell(demo, grid, build_stencil(2), build_stencil(3), 0, 0, sol)
    assert cell.order == 2 * 3 * demo.n
    assert cell.matrix.shape == (12, 12)
    assert cell.node_map[:4] == [(1, 1), (1, 2), (1, 3), (2, 1)]


def test_cell_outside_grid(demo):
    grid = GridSpec(h=0.25, tau=0.25)
    sol = initial_grid(demo, grid)
    st = build_stencil(3)
    with pytest.raises(PreconditionError):
        assemble_cell(demo, grid, st, st, 2, 0, sol)


def test_singular_cell_reports_coordinates(zero_problem):
    grid = GridSpec(h=0.5, tau=0.5)
    sol = initial_grid(zero_problem, grid)
    st = build_stencil(1)
    cell = assemble_cell(zero_problem, grid, st, st, 0, 0, sol)
    with pytest.raises(SingularCellError) as info:
        solve_cell(cell)
    assert (info.value.i, info.value.j) == (0, 0)
    assert "cell (i=0, j=0)" in str(info.value)


def test_cell_reads_only_its_left_and_bottom_layers(demo, coarse_grid):
    sol, _ = march(demo, coarse_grid, 2, 2)
    st = build_stencil(2)
    before = assemble_cell(demo, coarse_grid, st, st, 2, 2, sol)
    # nodes off the two known layers: the cell's own unknowns and an older layer
    for node in [(3, 3), (4, 4), (1, 2), (2, 1), (5, 5)]:
        sol.values[node] += 7.0
    after = assemble_cell(demo, coarse_grid, st, st, 2, 2, sol)
    assert np.array_equal(before.rhs, after.rhs)
    assert np.array_equal(before.matrix, after.matrix)

    sol.values[3, 2] += 7.0
    changed = assemble_cell(demo, coarse_grid, st, st, 2, 2, sol)
    assert not np.array_equal(before.rhs, changed.rhs)


# -------------------------
# March
# -------------------------
@pytest.mark.parametrize("m1,m2", [(1, 1), (2, 2), (3, 2), (2, 4)])
def test_linear_solution_is_reproduced(linear_problem, m1, m2):
    grid = GridSpec(h=0.125, tau=0.125)
    _, report = march(linear_problem, grid, m1, m2)
    assert report.delta_u < 1e-10


def test_clamped_cells_are_counted_and_exact(linear_problem):
    grid = GridSpec(h=0.1, tau=0.1)
    _, report = march(linear_problem, grid, 3, 4)
    assert report.clamped_cells > 0
    assert any("clamped" in w for w in report.warnings)
    assert report.delta_u < 1e-10


def test_divisible_grid_has_no_clamping(demo, coarse_grid):
    _, report = march(demo, coarse_grid, 2, 5)
    assert report.clamped_cells == 0
    assert report.cells_solved == 5 * 2
    assert report.warnings == []


def test_march_is_deterministic(demo, coarse_grid):
    a, _ = march(demo, coarse_grid, 3, 3)
    b, _ = march(demo, coarse_grid, 3, 3)
    assert np.array_equal(a.values, b.values)


def test_progress_callback_sees_every_cell(demo, coarse_grid):
    seen = []
    _, report = march(demo, coarse_grid, 2, 2, progress=lambda i, j: seen.append((i, j)))
    assert len(seen) == report.cells_solved == 25
    assert seen[0] == (0, 0)


@pytest.mark.parametrize("m1,m2", [(1, 1), (2, 2), (3, 2)])
def test_node_stride_reproduces_linear_solution(linear_problem, m1, m2):
    grid = GridSpec(h=0.125, tau=0.125)
    _, report = march(linear_problem, grid, m1, m2, stride="node")
    assert report.delta_u < 1e-10
    assert report.stride == "node"


def test_node_stride_steps_one_layer_at_a_time(demo, coarse_grid):
    seen = []
    _, report = march(demo, coarse_grid, 3, 2, stride="node", progress=lambda i, j: seen.append((i, j)))
    assert report.cells_solved == (10 - 3 + 1) * (10 - 2 + 1)
    assert report.clamped_cells == 0
    assert seen[:3] == [(0, 0), (1, 0), (2, 0)]
    assert seen[-1] == (7, 8)


def test_node_stride_with_unit_cells_matches_cell_stride(demo, coarse_grid):
    a, _ = march(demo, coarse_grid, 1, 1)
    b, _ = march(demo, coarse_grid, 1, 1, stride="node")
    assert np.array_equal(a.values, b.values)


def test_unknown_stride(demo, coarse_grid):
    with pytest.raises(ValueError):
        march(demo, coarse_grid, 2, 2, stride="diagonal")


@pytest.mark.parametrize("m1,m2", [(0, 2), (2, 11), (11, 2), (2, 20)])
def test_march_rejects_bad_degrees(demo, coarse_grid, m1, m2):
    with pytest.raises(ValueError):
        march(demo, coarse_grid, m1, m2)


def test_singular_problem_fails_at_first_cell(zero_problem, coarse_grid):
    with pytest.raises(SingularCellError) as info:
        march(zero_problem, coarse_grid, 2, 2)
    assert (info.value.i, info.value.j) == (0, 0)


def test_error_norm_without_exact(zero_problem):
    grid = GridSpec(h=0.5, tau=0.5)
    sol = initial_grid(zero_problem, grid)
    with pytest.raises(UnsupportedOperationError):
        error_norm(sol, zero_problem, grid)


def test_error_norm_needs_complete_grid(demo):
    grid = GridSpec(h=0.5, tau=0.5)
    with pytest.raises(PreconditionError):
        error_norm(initial_grid(demo, grid), demo, grid)


def test_higher_degree_is_more_accurate(demo, coarse_grid):
    _, low = march(demo, coarse_grid, 2, 2)
    _, high = march(demo, coarse_grid, 5, 5)
    assert high.delta_u < low.delta_u / 10


def test_solution_stays_bounded_under_refinement(demo):
    norm = max(np.max(np.abs(demo.exact(x, t))) for x in np.linspace(0, 1, 11) for t in np.linspace(0, 1, 11))
    grid = GridSpec(h=0.1, tau=0.1)
    for _ in range(2):
        _, report = march(demo, grid, 2, 2)
        assert report.max_solution_norm <= 2 * norm
        grid = refine_grid(grid)


# -------------------------
# Convergence
# -------------------------
def test_refine_grid():
    grid = refine_grid(GridSpec(h=0.1, tau=0.2), axis="t")
    assert (grid.h, grid.tau, grid.n1, grid.n2) == (0.1, 0.1, 10, 10)
    with pytest.raises(ValueError):
        refine_grid(grid, axis="z")


def test_convergence_order_demo(demo):
    result = convergence_slope(demo, 2, 2, GridSpec(h=0.1, tau=0.1), refinements=2)
    assert result.order > 1.5
    assert result.errors[0] > result.errors[1] > result.errors[2]


def test_convergence_exact_solution_has_no_order(linear_problem):
    result = convergence_slope(linear_problem, 2, 2, GridSpec(h=0.25, tau=0.25))
    assert result.exact
    assert result.order is None


@pytest.mark.slow
def test_convergence_order_example1(example1):
    result = convergence_slope(example1, 2, 2, GridSpec(h=0.1, tau=0.1), refinements=2)
    assert result.order == pytest.approx(2.0, abs=0.5)


# -------------------------
# Published error levels
# -------------------------
@pytest.mark.slow
@pytest.mark.parametrize("name,h,m,expected,factor", [
    ("2", 0.1, 2, 3.54e-2, 3.0),
    ("2", 0.1, 3, 3.34e-3, 3.0),
    ("2", 0.1, 4, 3.23e-4, 3.0),
    ("2", 0.01, 2, 3.23e-4, 3.0),
    ("1", 0.1, 2, 2.07e-2, 2.0),
    ("1", 0.1, 3, 1.96e-3, 2.0),
    ("1", 0.1, 4, 1.91e-4, 2.0),
    ("1", 0.1, 5, 1.91e-5, 3.0),
    ("1", 0.01, 2, 1.96e-4, 2.0),
    ("1", 0.005, 2, 4.95e-5, 2.0),
])
def test_published_error_levels(name, h, m, expected, factor):
    problem = get_problem(name)
    _, report = march(problem, GridSpec(h=h, tau=h), m, m, stride="node")
    assert expected / factor <= report.delta_u <= expected * factor


# -------------------------
# Built-in examples
# -------------------------
@pytest.mark.slow
def test_convergence_order_example1_cubic(example1):
    result = convergence_slope(example1, 3, 3, GridSpec(h=0.1, tau=0.1), refinements=2)
    assert result.order == pytest.approx(3.0, abs=0.5)


@pytest.mark.slow
@pytest.mark.parametrize("name", ["1", "2"])
def test_examples_stay_bounded_and_improve_under_refinement(name):
    problem = get_problem(name)
    nodes = np.linspace(0, 1, 21)
    norm = max(np.max(np.abs(problem.exact(x, t))) for x in nodes for t in nodes)
    grid = GridSpec(h=0.1, tau=0.1)
    errors = []
    for _ in range(3):
        _, report = march(problem, grid, 2, 2)
        assert report.max_solution_norm <= 2 * norm
        errors.append(report.delta_u)
        grid = refine_grid(grid)
    assert errors[0] > errors[1] > errors[2]
