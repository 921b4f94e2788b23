import logging
import math
from dataclasses import dataclass
from typing import Callable, Dict, Optional, Tuple

import numpy as np

from pdae.services.errors import UnsupportedOperationError
from pdae.services.linalg import inv

logger = logging.getLogger(__name__)

MatrixFn = Callable[[float, float], np.ndarray]
VectorFn = Callable[[float, float], np.ndarray]


@dataclass(frozen=True)
class CanonicalData:
    """
    Block data of the canonical pencil diag{E_d, M, E_p} + lam*diag{J, E_l, N}
    together with the transforms P, Q taking A + lam*B to it.
    M and N are None when identically zero.
    """
    d: int
    l: int
    p: int
    P: MatrixFn
    Q: MatrixFn
    J: MatrixFn
    M: Optional[MatrixFn] = None
    N: Optional[MatrixFn] = None

    def __post_init__(self):
        if min(self.d, self.l, self.p) < 0:
            raise ValueError("canonical block sizes must be non-negative")


@dataclass(frozen=True)
class PdaeProblem:
    """A(x,t) u_t + B(x,t) u_x + C(x,t) u = f, u(x0,t) = psi(t), u(x,t0) = phi(x)."""
    name: str
    n: int
    A: MatrixFn
    B: MatrixFn
    C: MatrixFn
    f: VectorFn
    psi: Callable[[float], np.ndarray]
    phi: Callable[[float], np.ndarray]
    exact: Optional[VectorFn] = None
    exact_dx: Optional[VectorFn] = None
    exact_dt: Optional[VectorFn] = None
    canonical: Optional[CanonicalData] = None
    domain: Tuple[float, float, float, float] = (0.0, 1.0, 0.0, 1.0)

    def __post_init__(self):
        if self.canonical is not None:
            c = self.canonical
            if c.d + c.l + c.p != self.n:
                raise ValueError(f"canonical blocks d+l+p={c.d + c.l + c.p} do not match n={self.n}")


def pde_residual(problem: PdaeProblem, x: float, t: float) -> float:
    """Max-abs residual of the system at (x, t) for the analytic exact solution."""
    if problem.exact is None or problem.exact_dx is None or problem.exact_dt is None:
        raise UnsupportedOperationError(f"problem {problem.name!r} has no analytic derivatives")
    res = (
        problem.A(x, t) @ problem.exact_dt(x, t)
        + problem.B(x, t) @ problem.exact_dx(x, t)
        + problem.C(x, t) @ problem.exact(x, t)
        - problem.f(x, t)
    )
    return float(np.max(np.abs(res)))


def check_corner_compatibility(problem: PdaeProblem, x0: float, t0: float, tol: float = 1e-9) -> float:
    gap = float(np.max(np.abs(problem.psi(t0) - problem.phi(x0))))
    if gap > tol:
        logger.warning("boundary data disagree at corner (%g, %g): |psi - phi| = %.3e", x0, t0, gap)
    return gap


def _with_boundary(name: str, n: int, exact: VectorFn, **kwargs) -> PdaeProblem:
    # boundary data always come from the exact solution for the built-in problems
    x0, _, t0, _ = kwargs.get("domain", (0.0, 1.0, 0.0, 1.0))
    return PdaeProblem(
        name=name,
        n=n,
        psi=lambda t: exact(x0, t),
        phi=lambda x: exact(x, t0),
        exact=exact,
        **kwargs,
    )


# ---------------------------------------------------------
# Example 1: 6x6 system with a pencil satisfying rank-degree
# ---------------------------------------------------------
def _ex1_A(x, t):
    a = np.zeros((6, 6))
    a[0, 0] = 1.0
    a[0, 3] = 1.0
    a[1, 4] = math.exp(x * t)
    a[3, 0] = 1.0 + x * t
    a[4, 2] = 1.0
    return a


def _ex1_B(x, t):
    b = np.zeros((6, 6))
    b[1, 4] = math.exp(math.sin(x + t))
    b[2, 5] = 1.0
    b[3, 0] = x * t
    b[5, 1] = 1.0
    return b


def _ex1_C(x, t):
    c = np.zeros((6, 6))
    c[1, 4] = 2.0 * x * t
    c[2, 5] = x + t
    c[3, 0] = 1.0
    c[4, 2] = 1.0
    return c


def _ex1_u(x, t):
    ext = math.exp(x * t)
    th = x + t
    return np.array([x, ext, math.exp(th), x * t, 1.0, ext + th])


def _ex1_ux(x, t):
    ext = math.exp(x * t)
    return np.array([1.0, t * ext, math.exp(x + t), t, 0.0, t * ext + 1.0])


def _ex1_ut(x, t):
    ext = math.exp(x * t)
    return np.array([0.0, x * ext, math.exp(x + t), x, 0.0, x * ext + 1.0])


def _ex1_f(x, t):
    # derived from the exact solution (the printed right-hand side does not satisfy it)
    ext = math.exp(x * t)
    th = x + t
    return np.array([
        x,
        2.0 * x * t,
        t * ext + 1.0 + th * (ext + th),
        x * (1.0 + t),
        2.0 * math.exp(th),
        t * ext,
    ])


def _ex1_P(x, t):
    p = np.zeros((6, 6))
    p[0, 1] = 1.0 / math.exp(x * t)
    p[1, 3] = 1.0 / (1.0 + x * t)
    p[2, 2] = 1.0
    p[3, 5] = 1.0
    p[4, 4] = 1.0
    p[5, 0] = 1.0
    return p


_EX1_Q = np.array([
    [0, 1, 0, 0, 0, 0],
    [0, 0, 0, 1, 0, 0],
    [0, 0, 0, 0, 1, 0],
    [0, -1, 0, 0, 0, 1],
    [1, 0, 0, 0, 0, 0],
    [0, 0, 1, 0, 0, 0],
], dtype=float)


def _ex1_J(x, t):
    return np.diag([math.exp(math.sin(x + t)) / math.exp(x * t), x * t / (1.0 + x * t)])


def example1() -> PdaeProblem:
    canonical = CanonicalData(
        d=2, l=2, p=2,
        P=_ex1_P,
        Q=lambda x, t: _EX1_Q.copy(),
        J=_ex1_J,
    )
    return _with_boundary(
        "example1", 6, _ex1_u,
        A=_ex1_A, B=_ex1_B, C=_ex1_C, f=_ex1_f,
        exact_dx=_ex1_ux, exact_dt=_ex1_ut,
        canonical=canonical,
    )


# ---------------------------------------------------------
# Example 2: 7x7 system already in canonical form
# ---------------------------------------------------------
def _ex2_J(x, t):
    e = math.exp(x + t)
    a = 1.0 + t * math.exp(x)
    j = np.zeros((5, 5))
    j[:3, :3] = [[e, 1.0, 0.0], [0.0, e, 1.0], [0.0, 0.0, e]]
    j[3:, 3:] = [[a, 1.0], [0.0, a]]
    return j


def _ex2_A(x, t):
    return np.diag([1.0, 1.0, 1.0, 1.0, 1.0, 0.0, 1.0])


def _ex2_B(x, t):
    b = np.zeros((7, 7))
    b[:5, :5] = _ex2_J(x, t)
    b[5, 5] = 1.0
    return b


def _ex2_C(x, t):
    e = math.exp(x + t)
    th = x + t
    return np.array([
        [x * x + t, 0.0, 1.0, 1.0 + x * t, -e, 0.0, 0.0],
        [0.0, x * x, x * t, 0.0, 0.0, 1.0, th],
        [1.0, 0.0, 0.0, 0.0, 1.0, x * t, 0.0],
        [0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [x * e, 1.0, x * x * t, 0.0, th, 0.0, 0.0],
        [0.0, 0.0, e, 0.0, 0.0, 1.0, 0.0],
    ])


def _ex2_f(x, t):
    e = math.exp(x + t)
    th = x + t
    return np.array([
        e * e + (x * x + t) * e + 2 * x * t + (1 + x * t) * (x - t) + 1,
        e + 2 * t + x ** 3 + x * x * t + 3 * x * x * t * t + x * math.exp(t) + x ** 3 * t + 1,
        (2 * t + 1) * e + 2 * x + x * x * t * math.exp(t) + 1,
        2 * x * t + t * math.exp(x),
        0.0,
        x * e * e + math.exp(t) + 2 * th + 2 * x ** 3 * t * t,
        x * x + 2 * x * t * e + x * math.exp(t),
    ])


def _ex2_u(x, t):
    return np.array([math.exp(x + t), x + t, 2 * x * t, x - t, 1.0, x * math.exp(t), x * x * t])


def _ex2_ux(x, t):
    return np.array([math.exp(x + t), 1.0, 2 * t, 1.0, 0.0, math.exp(t), 2 * x * t])


def _ex2_ut(x, t):
    return np.array([math.exp(x + t), 1.0, 2 * x, -1.0, 0.0, x * math.exp(t), x * x])


def example2() -> PdaeProblem:
    eye = np.eye(7)
    canonical = CanonicalData(
        d=5, l=1, p=1,
        P=lambda x, t: eye.copy(),
        Q=lambda x, t: eye.copy(),
        J=_ex2_J,
    )
    return _with_boundary(
        "example2", 7, _ex2_u,
        A=_ex2_A, B=_ex2_B, C=_ex2_C, f=_ex2_f,
        exact_dx=_ex2_ux, exact_dt=_ex2_ut,
        canonical=canonical,
    )


# ---------------------------------------------------------
# Nondegenerate demo: 2x2 strictly hyperbolic, manufactured solution
# ---------------------------------------------------------
def _demo_A(x, t):
    return np.array([[1.0 + 0.5 * x * t, 0.2], [0.0, 1.0]])


def _demo_B(x, t):
    return np.array([[2.0, 0.0], [0.1 * t, 0.5 + 0.25 * x]])


def _demo_C(x, t):
    return np.array([[0.5, 0.1 * x], [-0.2, t]])


def _demo_u(x, t):
    return np.array([math.sin(x + t) + math.exp(-x * t), math.cos(2 * x - t) + x * t * t])


def _demo_ux(x, t):
    return np.array([math.cos(x + t) - t * math.exp(-x * t), -2 * math.sin(2 * x - t) + t * t])


def _demo_ut(x, t):
    return np.array([math.cos(x + t) - x * math.exp(-x * t), math.sin(2 * x - t) + 2 * x * t])


def _demo_f(x, t):
    return _demo_A(x, t) @ _demo_ut(x, t) + _demo_B(x, t) @ _demo_ux(x, t) + _demo_C(x, t) @ _demo_u(x, t)


def nondegenerate_demo() -> PdaeProblem:
    canonical = CanonicalData(
        d=2, l=0, p=0,
        P=lambda x, t: inv(_demo_A(x, t)),
        Q=lambda x, t: np.eye(2),
        J=lambda x, t: inv(_demo_A(x, t)) @ _demo_B(x, t),
    )
    return _with_boundary(
        "demo", 2, _demo_u,
        A=_demo_A, B=_demo_B, C=_demo_C, f=_demo_f,
        exact_dx=_demo_ux, exact_dt=_demo_ut,
        canonical=canonical,
    )


PROBLEMS: Dict[str, Callable[[], PdaeProblem]] = {
    "1": example1,
    "2": example2,
    "demo": nondegenerate_demo,
}


def get_problem(name: str, domain: Optional[Tuple[float, float, float, float]] = None) -> PdaeProblem:
    """
    Built-in problem by name ("1", "2", "demo"). When a domain is given, the
    boundary data are re-anchored at its left and bottom edges.
    """
    key = str(name).strip().lower()
    if key not in PROBLEMS:
        raise ValueError(f"unknown example {name!r}: expected one of {sorted(PROBLEMS)}")
    problem = PROBLEMS[key]()
    if domain is None or tuple(domain) == problem.domain:
        return problem
    x0, _, t0, _ = domain
    exact = problem.exact
    return PdaeProblem(
        name=problem.name, n=problem.n,
        A=problem.A, B=problem.B, C=problem.C, f=problem.f,
        psi=lambda t: exact(x0, t),
        phi=lambda x: exact(x, t0),
        exact=exact, exact_dx=problem.exact_dx, exact_dt=problem.exact_dt,
        canonical=problem.canonical,
        domain=tuple(float(v) for v in domain),
    )
