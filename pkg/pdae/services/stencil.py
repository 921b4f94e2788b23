import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb, factorial
from typing import List

import numpy as np

logger = logging.getLogger(__name__)

MAX_DEGREE = 10


@dataclass(frozen=True)
class StencilTable:
    """
    Differentiation weights of the degree-m interpolating polynomial on the
    equidistant nodes 0..m, evaluated at nodes 1..m.

    full_weights[s-1, l3] is the weight of node l3 in the derivative at node s.
    gamma0 is column 0 (the diagonal of the gamma^0 matrix), gamma the rest.
    """
    m: int
    full_weights: np.ndarray
    gamma0: np.ndarray
    gamma: np.ndarray


def _check_degree(m: int) -> None:
    if not isinstance(m, (int, np.integer)) or m < 1 or m > MAX_DEGREE:
        raise ValueError(f"stencil degree must be an integer in 1..{MAX_DEGREE}, got {m!r}")


def _check_indices(m: int, s: int, l3: int = 0) -> None:
    _check_degree(m)
    if not 1 <= s <= m:
        raise ValueError(f"evaluation node s={s} outside 1..{m}")
    if not 0 <= l3 <= m:
        raise ValueError(f"source node l3={l3} outside 0..{m}")


# -------------------------
# Exact weights
# -------------------------
def _node_product_coeffs(m: int, skip: int) -> List[int]:
    """Ascending integer coefficients of prod_{nu != skip} (sigma - nu), nu = 0..m."""
    coeffs = [1]
    for nu in range(m + 1):
        if nu == skip:
            continue
        # multiply by (sigma - nu)
        shifted = [0] + coeffs
        scaled = [-nu * c for c in coeffs] + [0]
        coeffs = [a + b for a, b in zip(shifted, scaled)]
    return coeffs


def exact_weight(m: int, s: int, l3: int) -> Fraction:
    _check_indices(m, s, l3)
    coeffs = _node_product_coeffs(m, l3)
    # derivative evaluated at sigma = s
    deriv_at_s = sum(k * c * s ** (k - 1) for k, c in enumerate(coeffs) if k > 0)
    sign = -1 if (m + l3) % 2 else 1
    return Fraction(sign * comb(m, l3) * deriv_at_s, factorial(m))


def stencil_weight(m: int, s: int, l3: int) -> float:
    return float(exact_weight(m, s, l3))


@lru_cache(maxsize=None)
def build_stencil(m: int) -> StencilTable:
    _check_degree(m)
    full = np.array(
        [[stencil_weight(m, s, l3) for l3 in range(m + 1)] for s in range(1, m + 1)],
        dtype=float,
    )
    full.setflags(write=False)
    gamma0 = full[:, 0].copy()
    gamma = full[:, 1:].copy()
    gamma0.setflags(write=False)
    gamma.setflags(write=False)
    logger.debug("built stencil table m=%d", m)
    return StencilTable(m=int(m), full_weights=full, gamma0=gamma0, gamma=gamma)


# -------------------------
# Independent oracle
# -------------------------
def lagrange_derivative_oracle(m: int, s: int) -> np.ndarray:
    """
    Derivative at node s of each Lagrange basis polynomial on nodes 0..m, by
    the product rule in floating point. Off the diagonal only the term that
    drops the factor (sigma - s) is nonzero at sigma = s.
    """
    _check_indices(m, s)
    nodes = np.arange(m + 1, dtype=float)
    weights = np.empty(m + 1)
    for l3 in range(m + 1):
        others = np.delete(nodes, l3)
        if l3 == s:
            weights[l3] = np.sum(1.0 / (l3 - others))
        else:
            rest = others[others != s]
            weights[l3] = np.prod((s - rest) / (l3 - rest)) / (l3 - s)
    return weights
