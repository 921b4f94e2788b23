"""
Advisory diagnostics on the pencil A(x,t) + lam*B(x,t).

Nothing here blocks a solve: a failed check is reported with status "warn".
"""
import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from pdae.models import GridSpec, PencilReport, RootRecord, SampleRecord
from pdae.services.errors import NumericalError, UnsupportedOperationError
from pdae.services.linalg import DEFAULT_RANK_TOL, det, eig_small, lu_solve, poly_roots, rank
from pdae.services.problem import CanonicalData, PdaeProblem
from pdae.services.theory import POSITIVE_SPECTRUM_MAX_DEGREE, gamma_eigenvalues

logger = logging.getLogger(__name__)

DEFAULT_CLUSTER_TOL = 1e-6
TRIM_TOL = 1e-9

Point = Tuple[float, float]


@dataclass(frozen=True)
class RootCluster:
    value: complex
    mult: int


# -------------------------
# Characteristic polynomial
# -------------------------
def pencil_poly(A: np.ndarray, B: np.ndarray, trim_tol: float = TRIM_TOL) -> np.ndarray:
    """
    Ascending coefficients of det(A + lam*B), recovered from determinants at
    n+1 Chebyshev-spaced lam on [-2, 2] by a Vandermonde solve.
    """
    n = A.shape[0]
    k = np.arange(n + 1)
    lams = 2.0 * np.cos((2 * k + 1) * math.pi / (2 * (n + 1)))
    dets = np.array([det(A + lam * B) for lam in lams])
    vander = np.vander(lams, n + 1, increasing=True)
    coeffs = lu_solve(vander, dets)

    size = max(1.0, float(np.max(np.abs(A))) + 2.0 * float(np.max(np.abs(B))))
    biggest = float(np.max(np.abs(coeffs)))
    if biggest <= 1e-12 * size ** n:
        raise NumericalError("pencil is identically singular: det(A + lam*B) vanishes for all lam")
    last = n
    while last > 0 and abs(coeffs[last]) <= trim_tol * biggest:
        last -= 1
    return coeffs[: last + 1]


def char_poly(problem: PdaeProblem, x: float, t: float, trim_tol: float = TRIM_TOL) -> np.ndarray:
    return pencil_poly(problem.A(x, t), problem.B(x, t), trim_tol)


def cluster_roots(roots: Sequence[complex], tol: float = DEFAULT_CLUSTER_TOL) -> List[RootCluster]:
    """
    Greedy clustering of computed roots. A k-fold root comes back split by
    about tol**(1/k), so a root joins a cluster of size s when it lies within
    tol**(1/(s+1)) (relative to max(1, |centroid|)) of the cluster's centroid.
    """
    if tol <= 0:
        raise ValueError("cluster tolerance must be positive")
    clusters: List[List[complex]] = []
    for z in sorted(roots, key=lambda c: (c.real, c.imag)):
        best, best_dist = None, None
        for members in clusters:
            centroid = sum(members) / len(members)
            radius = tol ** (1.0 / (len(members) + 1)) * max(1.0, abs(centroid))
            dist = abs(z - centroid)
            if dist <= radius and (best_dist is None or dist < best_dist):
                best, best_dist = members, dist
        if best is None:
            clusters.append([z])
        else:
            best.append(z)
    out = [RootCluster(value=complex(sum(c) / len(c)), mult=len(c)) for c in clusters]
    return sorted(out, key=lambda c: (c.value.real, c.value.imag))


def char_roots(
    problem: PdaeProblem, x: float, t: float, cluster_tol: float = DEFAULT_CLUSTER_TOL
) -> List[RootCluster]:
    clusters = cluster_roots(poly_roots(char_poly(problem, x, t)), cluster_tol)
    for c in clusters:
        if abs(c.value.imag) > cluster_tol:
            logger.warning("non-real characteristic root %s at (%g, %g)", c.value, x, t)
    return clusters


def has_real_roots(clusters: Sequence[RootCluster], tol: float = DEFAULT_CLUSTER_TOL) -> bool:
    return all(abs(c.value.imag) <= tol for c in clusters)


# -------------------------
# Rank-degree criterion
# -------------------------
def _rank_degree_at(problem: PdaeProblem, x: float, t: float, rank_tol: float) -> Tuple[int, int, int, bool, bool]:
    A, B = problem.A(x, t), problem.B(x, t)
    rank_a, rank_b = rank(A, rank_tol), rank(B, rank_tol)
    degree = len(pencil_poly(A, B)) - 1
    swapped_degree = len(pencil_poly(B, A)) - 1
    return rank_a, rank_b, degree, rank_b == degree, rank_a == swapped_degree


def rank_degree_check(
    problem: PdaeProblem, sample_points: Sequence[Point], rank_tol: float = DEFAULT_RANK_TOL
) -> Tuple[bool, bool]:
    """(rank B == deg det(A + lam B), rank A == deg det(B + mu A)) at every sample."""
    if not sample_points:
        raise ValueError("rank_degree_check needs at least one sample point")
    b_ok, a_ok = True, True
    for x, t in sample_points:
        _, _, _, b_here, a_here = _rank_degree_at(problem, x, t, rank_tol)
        b_ok &= b_here
        a_ok &= a_here
    return b_ok, a_ok


# -------------------------
# Canonical equivalence
# -------------------------
def _require_canonical(problem: PdaeProblem) -> CanonicalData:
    if problem.canonical is None:
        raise UnsupportedOperationError(f"problem {problem.name!r} has no canonical data")
    return problem.canonical


def canonical_pencil(canonical: CanonicalData, x: float, t: float, lam: float) -> np.ndarray:
    d, l, p = canonical.d, canonical.l, canonical.p
    n = d + l + p
    a = np.zeros((n, n))
    b = np.zeros((n, n))
    a[:d, :d] = np.eye(d)
    a[d + l:, d + l:] = np.eye(p)
    if canonical.M is not None:
        a[d:d + l, d:d + l] = canonical.M(x, t)
    if d:
        b[:d, :d] = canonical.J(x, t)
    b[d:d + l, d:d + l] = np.eye(l)
    if canonical.N is not None:
        b[d + l:, d + l:] = canonical.N(x, t)
    return a + lam * b


def canonical_equivalence_residual(
    problem: PdaeProblem, samples: Sequence[Point], lambda_samples: Sequence[float]
) -> float:
    """max over samples x lambdas of ||P (A + lam B) Q - canonical pencil||_inf."""
    canonical = _require_canonical(problem)
    worst = 0.0
    for x, t in samples:
        P, Q = canonical.P(x, t), canonical.Q(x, t)
        A, B = problem.A(x, t), problem.B(x, t)
        for lam in lambda_samples:
            diff = P @ (A + lam * B) @ Q - canonical_pencil(canonical, x, t, lam)
            worst = max(worst, float(np.max(np.abs(diff))))
    return worst


# -------------------------
# Spectral conditions on the scheme
# -------------------------
def j_eigenvalues(problem: PdaeProblem, x: float, t: float) -> np.ndarray:
    canonical = _require_canonical(problem)
    if canonical.d == 0:
        return np.zeros(0, dtype=complex)
    return eig_small(canonical.J(x, t))


def separation_from_eigs(xi_gbar: np.ndarray, xi_g: np.ndarray, xi_j: np.ndarray, r: float) -> float:
    """min |r*xi_gbar*xi_J + xi_g| over all triples (inf for an empty set)."""
    if not (len(xi_gbar) and len(xi_g) and len(xi_j)):
        return math.inf
    vals = r * xi_gbar[:, None, None] * xi_j[None, None, :] + xi_g[None, :, None]
    return float(np.min(np.abs(vals)))


def mu_from_eigs(xi_gbar: np.ndarray, xi_j: np.ndarray, r: float, m2: int) -> float:
    """max |exp(-k*r*xi_gbar*xi_J)| for k = 1..m2 (0 for an empty set)."""
    if not (len(xi_gbar) and len(xi_j)):
        return 0.0
    k = np.arange(1, m2 + 1)
    expo = -(k[:, None, None] * r * xi_gbar[None, :, None] * xi_j[None, None, :]).real
    return float(np.max(np.exp(expo)))


def mu_x_from_eigs(xi_g: np.ndarray, xi_j: np.ndarray, r: float, m1: int) -> float:
    """max |exp(-(k/r)*xi_g/xi_J)| for k = 1..m1; zero xi_J entries are skipped."""
    xi_j = xi_j[np.abs(xi_j) > 1e-14]
    if not (len(xi_g) and len(xi_j)):
        return 0.0
    k = np.arange(1, m1 + 1)
    expo = -(k[:, None, None] / r * xi_g[None, :, None] / xi_j[None, None, :]).real
    return float(np.max(np.exp(expo)))


def lemma2_separation(problem: PdaeProblem, grid: GridSpec, m1: int, m2: int, samples: Sequence[Point]) -> float:
    xi_gbar, xi_g = gamma_eigenvalues(m1), gamma_eigenvalues(m2)
    worst = math.inf
    for x, t in samples:
        worst = min(worst, separation_from_eigs(xi_gbar, xi_g, j_eigenvalues(problem, x, t), grid.r))
    return worst


def mu_spectral_radius(problem: PdaeProblem, grid: GridSpec, m1: int, m2: int, samples: Sequence[Point]) -> float:
    xi_gbar = gamma_eigenvalues(m1)
    worst = 0.0
    for x, t in samples:
        worst = max(worst, mu_from_eigs(xi_gbar, j_eigenvalues(problem, x, t), grid.r, m2))
    return worst


def mu_x_spectral_radius(problem: PdaeProblem, grid: GridSpec, m1: int, m2: int, samples: Sequence[Point]) -> float:
    xi_g = gamma_eigenvalues(m2)
    worst = 0.0
    for x, t in samples:
        worst = max(worst, mu_x_from_eigs(xi_g, j_eigenvalues(problem, x, t), grid.r, m1))
    return worst


def xi_j_min(problem: PdaeProblem, samples: Sequence[Point]) -> float:
    """Smallest real part of the J eigenvalues over the samples (inf when d = 0)."""
    worst = math.inf
    for x, t in samples:
        xi = j_eigenvalues(problem, x, t)
        if len(xi):
            worst = min(worst, float(np.min(xi.real)))
    return worst


# -------------------------
# Sampling + full report
# -------------------------
def sample_lattice(x0: float, X: float, t0: float, T: float, k: int = 25) -> List[Point]:
    """Uniform q x q lattice strictly inside the rectangle, q = ceil(sqrt(k))."""
    if k < 1:
        raise ValueError("need at least one sample")
    q = int(math.ceil(math.sqrt(k)))
    xs = [x0 + (a + 1) * (X - x0) / (q + 1) for a in range(q)]
    ts = [t0 + (b + 1) * (T - t0) / (q + 1) for b in range(q)]
    return [(x, t) for x in xs for t in ts]


def boundary_samples(x0: float, X: float, t0: float, T: float, k: int = 25) -> List[Point]:
    """Points on the left and bottom edges at the lattice coordinates."""
    q = int(math.ceil(math.sqrt(k)))
    xs = [x0 + a * (X - x0) / (q + 1) for a in range(q + 2)]
    ts = [t0 + b * (T - t0) / (q + 1) for b in range(q + 2)]
    return [(x, t0) for x in xs] + [(x0, t) for t in ts[1:]]


def _finite_or_none(value: float) -> Optional[float]:
    return value if math.isfinite(value) else None


def analyze(
    problem: PdaeProblem,
    grid: GridSpec,
    m1: int,
    m2: int,
    k: int = 25,
    cluster_tol: float = DEFAULT_CLUSTER_TOL,
    rank_tol: float = DEFAULT_RANK_TOL,
    seed: int = 0,
) -> PencilReport:
    samples = sample_lattice(grid.x0, grid.X, grid.t0, grid.T, k)
    warnings: List[str] = []

    records = []
    patterns = set()
    for x, t in samples:
        rank_a, rank_b, degree, b_ok, a_ok = _rank_degree_at(problem, x, t, rank_tol)
        clusters = char_roots(problem, x, t, cluster_tol)
        if not has_real_roots(clusters, cluster_tol):
            warnings.append(f"non-real characteristic roots at ({x:g}, {t:g})")
        patterns.add(tuple(sorted(c.mult for c in clusters)))
        records.append(SampleRecord(
            x=x, t=t, rank_a=rank_a, rank_b=rank_b, degree=degree,
            roots=[RootRecord(re=c.value.real, im=c.value.imag, mult=c.mult) for c in clusters],
            rank_degree_b=b_ok, rank_degree_a=a_ok,
        ))
        logger.debug("sample (%g, %g): rank A=%d rank B=%d degree=%d", x, t, rank_a, rank_b, degree)

    multiplicity_constant = len(patterns) == 1
    if not multiplicity_constant:
        warnings.append(f"root multiplicities vary across samples: {sorted(patterns)}")

    separation, mu, mu_x, xi_min, residual = math.inf, 0.0, None, math.inf, None
    if problem.canonical is not None:
        separation = lemma2_separation(problem, grid, m1, m2, samples)
        mu = mu_spectral_radius(problem, grid, m1, m2, samples)
        mu_x = mu_x_spectral_radius(problem, grid, m1, m2, samples)
        xi_min = xi_j_min(problem, samples + boundary_samples(grid.x0, grid.X, grid.t0, grid.T, k))
        rng = np.random.default_rng(seed)
        lambdas = list(rng.uniform(-2.0, 2.0, size=3))
        residual = canonical_equivalence_residual(problem, samples, lambdas)
        if separation <= 1e-12:
            warnings.append("separation condition fails: r*xi_gbar*xi_J + xi_g vanishes at a sample")
        if mu >= 1.0:
            warnings.append(f"spectral radius mu = {mu:.6g} is not below 1")
        if max(m1, m2) > POSITIVE_SPECTRUM_MAX_DEGREE:
            warnings.append(
                f"m1={m1}, m2={m2}: gamma_m has eigenvalues with negative real part "
                f"for m > {POSITIVE_SPECTRUM_MAX_DEGREE}, so mu >= 1 is expected"
            )
        if xi_min <= 1e-12:
            warnings.append(f"J has eigenvalues with non-positive real part (min {xi_min:.3g})")
    else:
        warnings.append("no canonical data: separation, mu and equivalence checks skipped")

    rank_degree_b = all(r.rank_degree_b for r in records)
    rank_degree_a = all(r.rank_degree_a for r in records)
    if not rank_degree_b:
        warnings.append("rank B differs from deg det(A + lam*B) at some sample")
    for w in warnings:
        logger.warning(w)
    return PencilReport(
        samples=records,
        rank_degree_b=rank_degree_b,
        rank_degree_a=rank_degree_a,
        multiplicity_constant=multiplicity_constant,
        lemma2_min_separation=_finite_or_none(separation),
        mu=mu,
        xi_j_min=_finite_or_none(xi_min),
        canonical_residual=residual,
        mu_x=mu_x,
        status="warn" if warnings else "pass",
        warnings=warnings,
    )
