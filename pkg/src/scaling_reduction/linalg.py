"""Dense solves that accept arrays of dual numbers.

Plain float systems go straight to numpy.  A system carrying a perturbation is
split into its value and tangent parts with respect to the outermost tag, and
the tangent is recovered by differentiating the defining equations, so the
result is the exact derivative of the float solve.
"""

from __future__ import annotations

import numpy as np

from .dual import combine, max_tag, primal, real_array, tangent

CONDITION_LIMIT = 1e12


class SingularSystemError(np.linalg.LinAlgError):
    def __init__(self, message: str, point=None):
        super().__init__(message)
        self.point = point


def condition_number(matrix) -> float:
    return float(np.linalg.cond(real_array(matrix)))


def ensure_well_conditioned(matrix, what: str, point=None, limit: float = CONDITION_LIMIT):
    cond = condition_number(matrix)
    if not np.isfinite(cond) or cond > limit:
        raise SingularSystemError(f"{what}: condition number {cond:.3e} exceeds {limit:.0e}", point)
    return cond


def solve(a, b):
    """Solve ``a x = b`` (LU with partial pivoting at the float level)."""
    tag = max(max_tag(a), max_tag(b))
    if tag == 0:
        return np.linalg.solve(np.asarray(a, dtype=float), np.asarray(b, dtype=float))
    a0, a1 = primal(a, tag), tangent(a, tag)
    b0, b1 = primal(b, tag), tangent(b, tag)
    x0 = solve(a0, b0)
    x1 = solve(a0, b1 - _matmul(a1, x0))
    return combine(tag, x0, x1)


def inverse(a):
    n = np.shape(a)[0]
    return solve(a, np.eye(n))


def lstsq(a, b):
    """Least-squares solution of a full-column-rank system via QR."""
    tag = max(max_tag(a), max_tag(b))
    if tag == 0:
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        q, r = np.linalg.qr(a)
        return np.linalg.solve(r, q.T @ b)
    a0, a1 = primal(a, tag), tangent(a, tag)
    b0, b1 = primal(b, tag), tangent(b, tag)
    x0 = lstsq(a0, b0)
    residual = b0 - _matmul(a0, x0)
    # differentiate the normal equations a^T a x = a^T b
    x1 = lstsq(a0, b1 - _matmul(a1, x0))
    correction = solve(_matmul(a0.T, a0), _matmul(a1.T, residual))
    return combine(tag, x0, x1 + correction)


def _matmul(a, b):
    a = np.asarray(a)
    b = np.asarray(b)
    if a.dtype == object or b.dtype == object:
        return np.dot(a.astype(object), b.astype(object))
    return a @ b
