"""
Dense kernels used by the solver and the diagnostics.

Matrices are plain numpy arrays; the factorizations and the eigenvalue
iteration are written here on top of them. Orders stay small (cell systems of
order m1*m2*n, eigenproblems of order <= 24).
"""
import logging
import math
from typing import Tuple

import numpy as np

from pdae.services.errors import NumericalError, SingularMatrixError

logger = logging.getLogger(__name__)

MAX_EIG_ORDER = 24
DEFAULT_PIVOT_TOL = 1e-12
DEFAULT_RANK_TOL = 1e-8


def as_dense(M, name: str = "matrix") -> np.ndarray:
    """Validate M as a finite 2-D array and return it as a numpy array."""
    arr = np.asarray(M)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {arr.shape}")
    if not np.issubdtype(arr.dtype, np.number):
        raise ValueError(f"{name} must be numeric, got dtype {arr.dtype}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")
    if not np.iscomplexobj(arr):
        arr = arr.astype(float, copy=False)
    return arr


def _as_square(M, name: str = "matrix") -> np.ndarray:
    arr = as_dense(M, name)
    if arr.shape[0] != arr.shape[1]:
        raise ValueError(f"{name} must be square, got shape {arr.shape}")
    return arr


# -------------------------
# LU with partial pivoting
# -------------------------
def lu_factor(M, pivot_tol: float = DEFAULT_PIVOT_TOL) -> Tuple[np.ndarray, np.ndarray, float]:
    """
    Returns (lu, perm, sign): unit-lower L below the diagonal of lu, U on and
    above it, rows of M permuted by perm, sign = det(permutation).
    """
    a = _as_square(M).copy()
    n = a.shape[0]
    scale = float(np.max(np.abs(a))) if a.size else 0.0
    threshold = pivot_tol * scale
    perm = np.arange(n)
    sign = 1.0
    for k in range(n):
        p = k + int(np.argmax(np.abs(a[k:, k])))
        pivot = float(abs(a[p, k]))
        if pivot == 0.0 or pivot < threshold:
            raise SingularMatrixError(k, pivot)
        if p != k:
            a[[k, p]] = a[[p, k]]
            perm[[k, p]] = perm[[p, k]]
            sign = -sign
        a[k + 1:, k] /= a[k, k]
        a[k + 1:, k + 1:] -= np.outer(a[k + 1:, k], a[k, k + 1:])
    return a, perm, sign


def lu_substitute(lu: np.ndarray, perm: np.ndarray, rhs) -> np.ndarray:
    b = np.asarray(rhs)
    n = lu.shape[0]
    if b.shape[0] != n:
        raise ValueError(f"rhs has {b.shape[0]} rows, matrix order is {n}")
    x = b[perm].astype(np.result_type(lu, b, float), copy=True)
    for i in range(n):
        x[i] -= lu[i, :i] @ x[:i]
    for i in range(n - 1, -1, -1):
        x[i] = (x[i] - lu[i, i + 1:] @ x[i + 1:]) / lu[i, i]
    return x


def lu_solve(M, rhs, pivot_tol: float = DEFAULT_PIVOT_TOL) -> np.ndarray:
    lu, perm, _ = lu_factor(M, pivot_tol)
    return lu_substitute(lu, perm, rhs)


def det(M) -> float:
    """Determinant as the signed product of the LU pivots (0.0 for an exact zero pivot)."""
    try:
        lu, _, sign = lu_factor(M, pivot_tol=0.0)
    except SingularMatrixError:
        return 0.0
    return sign * np.prod(np.diag(lu))


def inv(M, pivot_tol: float = DEFAULT_PIVOT_TOL) -> np.ndarray:
    a = _as_square(M)
    return lu_solve(a, np.eye(a.shape[0], dtype=a.dtype), pivot_tol)


# -------------------------
# Rank (complete pivoting)
# -------------------------
def rank(M, tol: float = DEFAULT_RANK_TOL) -> int:
    if tol <= 0:
        raise ValueError("rank tolerance must be positive")
    a = as_dense(M).copy()
    rows, cols = a.shape
    largest = None
    r = 0
    for k in range(min(rows, cols)):
        sub = np.abs(a[k:, k:])
        p, q = np.unravel_index(int(np.argmax(sub)), sub.shape)
        val = float(sub[p, q])
        if largest is None:
            largest = val
            if largest == 0.0:
                return 0
        if val <= tol * largest:
            break
        p += k
        q += k
        a[[k, p]] = a[[p, k]]
        a[:, [k, q]] = a[:, [q, k]]
        a[k + 1:, k:] -= np.outer(a[k + 1:, k] / a[k, k], a[k, k:])
        r += 1
    return r


# -------------------------
# Eigenvalues: balance, Hessenberg, shifted QR
# -------------------------
def _balance(a: np.ndarray) -> np.ndarray:
    radix = 2.0
    sqrdx = radix * radix
    n = a.shape[0]
    done = False
    while not done:
        done = True
        for i in range(n):
            c = float(np.sum(np.abs(a[:, i])) - abs(a[i, i]))
            r = float(np.sum(np.abs(a[i, :])) - abs(a[i, i]))
            if c == 0.0 or r == 0.0:
                continue
            g = r / radix
            f = 1.0
            s = c + r
            while c < g:
                f *= radix
                c *= sqrdx
            g = r * radix
            while c > g:
                f /= radix
                c /= sqrdx
            if (c + r) / f < 0.95 * s:
                done = False
                a[i, :] /= f
                a[:, i] *= f
    return a


def hessenberg(M) -> np.ndarray:
    """Householder reduction to upper Hessenberg form (similarity transform)."""
    h = _as_square(M).astype(float, copy=True)
    n = h.shape[0]
    for k in range(n - 2):
        x = h[k + 1:, k].copy()
        alpha = float(np.linalg.norm(x))
        if alpha == 0.0:
            continue
        v = x
        v[0] += math.copysign(alpha, x[0])
        v /= np.linalg.norm(v)
        h[k + 1:, :] -= 2.0 * np.outer(v, v @ h[k + 1:, :])
        h[:, k + 1:] -= 2.0 * np.outer(h[:, k + 1:] @ v, v)
        h[k + 2:, k] = 0.0
    return h


def _hqr(h: np.ndarray, max_iter: int) -> np.ndarray:
    """Francis double-shift QR on an upper Hessenberg matrix (1-based port)."""
    n = h.shape[0]
    a = [[0.0] * (n + 1)] + [[0.0] + [float(v) for v in row] for row in h]
    wr = [0.0] * (n + 1)
    wi = [0.0] * (n + 1)

    anorm = 0.0
    for i in range(1, n + 1):
        for j in range(max(i - 1, 1), n + 1):
            anorm += abs(a[i][j])
    nn = n
    t = 0.0
    x = y = w = 0.0
    while nn >= 1:
        its = 0
        while True:
            l = 1
            for ll in range(nn, 1, -1):
                s = abs(a[ll - 1][ll - 1]) + abs(a[ll][ll])
                if s == 0.0:
                    s = anorm
                if abs(a[ll][ll - 1]) + s == s:
                    a[ll][ll - 1] = 0.0
                    l = ll
                    break
            x = a[nn][nn]
            if l == nn:
                wr[nn] = x + t
                wi[nn] = 0.0
                nn -= 1
            else:
                y = a[nn - 1][nn - 1]
                w = a[nn][nn - 1] * a[nn - 1][nn]
                if l == nn - 1:
                    p = 0.5 * (y - x)
                    q = p * p + w
                    z = math.sqrt(abs(q))
                    x += t
                    if q >= 0.0:
                        z = p + math.copysign(z, p)
                        wr[nn - 1] = wr[nn] = x + z
                        if z:
                            wr[nn] = x - w / z
                        wi[nn - 1] = wi[nn] = 0.0
                    else:
                        wr[nn - 1] = wr[nn] = x + p
                        wi[nn] = z
                        wi[nn - 1] = -z
                    nn -= 2
                else:
                    if its == max_iter:
                        raise NumericalError(f"QR iteration did not converge after {max_iter} sweeps")
                    if its and its % 10 == 0:
                        # exceptional shift
                        t += x
                        for i in range(1, nn + 1):
                            a[i][i] -= x
                        s = abs(a[nn][nn - 1]) + abs(a[nn - 1][nn - 2])
                        y = x = 0.75 * s
                        w = -0.4375 * s * s
                    its += 1
                    m = nn - 2
                    while m >= l:
                        z = a[m][m]
                        r = x - z
                        s = y - z
                        p = (r * s - w) / a[m + 1][m] + a[m][m + 1]
                        q = a[m + 1][m + 1] - z - r - s
                        r = a[m + 2][m + 1]
                        s = abs(p) + abs(q) + abs(r)
                        p /= s
                        q /= s
                        r /= s
                        if m == l:
                            break
                        u = abs(a[m][m - 1]) * (abs(q) + abs(r))
                        v = abs(p) * (abs(a[m - 1][m - 1]) + abs(z) + abs(a[m + 1][m + 1]))
                        if u + v == v:
                            break
                        m -= 1
                    for i in range(m + 2, nn + 1):
                        a[i][i - 2] = 0.0
                        if i != m + 2:
                            a[i][i - 3] = 0.0
                    for k in range(m, nn):
                        if k != m:
                            p = a[k][k - 1]
                            q = a[k + 1][k - 1]
                            r = 0.0
                            if k != nn - 1:
                                r = a[k + 2][k - 1]
                            x = abs(p) + abs(q) + abs(r)
                            if x != 0.0:
                                p /= x
                                q /= x
                                r /= x
                        s = math.copysign(math.sqrt(p * p + q * q + r * r), p)
                        if s != 0.0:
                            if k == m:
                                if l != m:
                                    a[k][k - 1] = -a[k][k - 1]
                            else:
                                a[k][k - 1] = -s * x
                            p += s
                            x = p / s
                            y = q / s
                            z = r / s
                            q /= p
                            r /= p
                            for j in range(k, nn + 1):
                                p = a[k][j] + q * a[k + 1][j]
                                if k != nn - 1:
                                    p += r * a[k + 2][j]
                                    a[k + 2][j] -= p * z
                                a[k + 1][j] -= p * y
                                a[k][j] -= p * x
                            mmin = nn if nn < k + 3 else k + 3
                            for i in range(l, mmin + 1):
                                p = x * a[i][k] + y * a[i][k + 1]
                                if k != nn - 1:
                                    p += z * a[i][k + 2]
                                    a[i][k + 2] -= p * r
                                a[i][k + 1] -= p * q
                                a[i][k] -= p
            if not l < nn - 1:
                break
    return np.array([complex(wr[i], wi[i]) for i in range(1, n + 1)])


def eig_small(M, max_iter: int = 60) -> np.ndarray:
    """
    Eigenvalues of a real square matrix of order <= 24, sorted by (real, imag).
    """
    a = _as_square(M)
    if np.iscomplexobj(a):
        raise ValueError("eig_small expects a real matrix")
    n = a.shape[0]
    if n > MAX_EIG_ORDER:
        raise ValueError(f"eig_small supports order <= {MAX_EIG_ORDER}, got {n}")
    if n == 0:
        return np.zeros(0, dtype=complex)
    h = hessenberg(_balance(a.astype(float, copy=True)))
    vals = _hqr(h, max_iter)
    return np.array(sorted(vals, key=lambda z: (round(z.real, 12), z.imag)))


# -------------------------
# Matrix exponential
# -------------------------
def mat_exp(M, max_terms: int = 30) -> np.ndarray:
    """Scaling and squaring with a truncated Taylor series."""
    a = _as_square(M)
    n = a.shape[0]
    if n > MAX_EIG_ORDER:
        raise ValueError(f"mat_exp supports order <= {MAX_EIG_ORDER}, got {n}")
    norm = float(np.max(np.sum(np.abs(a), axis=1))) if n else 0.0
    squarings = 0
    if norm > 0.5:
        squarings = int(math.ceil(math.log2(norm / 0.5)))
    scaled = a / (2.0 ** squarings)
    result = np.eye(n, dtype=np.result_type(a, float))
    term = np.eye(n, dtype=result.dtype)
    for k in range(1, max_terms + 1):
        term = term @ scaled / k
        result = result + term
        if np.max(np.abs(term)) <= np.finfo(float).eps * np.max(np.abs(result)):
            break
    for _ in range(squarings):
        result = result @ result
    return result


# -------------------------
# Polynomial roots
# -------------------------
def trim_coefficients(coeffs, tol: float) -> np.ndarray:
    c = np.asarray(coeffs, dtype=float).ravel()
    scale = float(np.max(np.abs(c))) if c.size else 0.0
    if scale == 0.0 or not np.isfinite(scale):
        raise NumericalError("degenerate polynomial: all coefficients vanish")
    last = c.size - 1
    while last > 0 and abs(c[last]) <= tol * scale:
        last -= 1
    return c[: last + 1]


def poly_roots(coeffs, tol: float = 1e-12) -> np.ndarray:
    """Roots of sum(coeffs[k] * z**k) via the companion matrix."""
    c = trim_coefficients(coeffs, tol)
    degree = c.size - 1
    if degree == 0:
        return np.zeros(0, dtype=complex)
    companion = np.zeros((degree, degree))
    companion[1:, :-1] = np.eye(degree - 1)
    companion[:, -1] = -c[:-1] / c[-1]
    return eig_small(companion)
