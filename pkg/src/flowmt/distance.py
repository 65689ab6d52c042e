"""Normalized distance between flowshop instances.

Two instances whose matrices differ only by a positive scale and a uniform
shift rank every schedule identically, so the distance from task Q to task P
is measured against the whole family {t*P + b*E : t > 0} after mean-centering
both matrices. The result is the angle-based value in [0, 1]: 0 means the
tasks are equivalent up to scale/shift, 1 means no usable similarity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import DegenerateFitError, JobIndexError, ParameterError, ShapeError
from .instance import ProblemMatrix

__all__ = [
    "CenteredMatrix",
    "DistanceResult",
    "center",
    "optimal_scale_shift",
    "itdm",
    "zero_pad",
    "cos_theta_lower_bound",
]


def _as_array(matrix) -> np.ndarray:
    if isinstance(matrix, ProblemMatrix):
        return matrix.p.astype(np.float64)
    arr = np.asarray(matrix, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ShapeError(f"expected a 2-D matrix, got shape {arr.shape}")
    return arr


@dataclass
class CenteredMatrix:
    """A matrix with its grand mean removed, plus the Frobenius norm."""

    values: np.ndarray
    frobenius: float


@dataclass
class DistanceResult:
    d: float        # normalized distance in [0, 1]
    t_star: float   # optimal scale, >= 0
    b_star: float   # optimal uniform shift
    cos_theta: float


def center(matrix) -> CenteredMatrix:
    """Subtract the grand mean from every entry."""
    arr = _as_array(matrix)
    centered = arr - arr.mean()
    return CenteredMatrix(centered, float(np.linalg.norm(centered)))


def optimal_scale_shift(Q, P) -> tuple[float, float]:
    """Best (t, b) with t >= 0 minimizing ||Q - t*P - b*E||_F.

    Least squares in t uses the regressor's (P's) second moment, so a
    constant P leaves the fit undefined.
    """
    q = _as_array(Q)
    p = _as_array(P)
    if q.shape != p.shape:
        raise ShapeError(f"shape mismatch {q.shape} vs {p.shape}")
    nm = q.size
    sum_q = q.sum()
    sum_p = p.sum()
    denom = nm * (p * p).sum() - sum_p * sum_p
    if denom <= 0:
        raise DegenerateFitError("reference matrix is constant; scale is undefined")
    t0 = (nm * (q * p).sum() - sum_q * sum_p) / denom
    t_star = max(t0, 0.0)
    b_star = (sum_q - t_star * sum_p) / nm
    return float(t_star), float(b_star)


def itdm(Q, P) -> DistanceResult:
    """Normalized inter-task distance from task Q to task P's scale/shift family.

    Computed from the angle between the centered matrices as
    sin / (1 + cos), the algebraic twin of sqrt(2 / (1 + cos) - 1) with the
    sine taken from the actual fit residual, so exact family members come out
    at working precision instead of sqrt-amplified rounding noise. When
    cos <= 0 or either matrix is constant the nearest family member is the
    origin: d = 1 with t* = 0.
    """
    q = _as_array(Q)
    p = _as_array(P)
    if q.shape != p.shape:
        raise ShapeError(f"shape mismatch {q.shape} vs {p.shape}")
    qc = center(q)
    pc = center(p)
    if qc.frobenius == 0.0 or pc.frobenius == 0.0:
        # A constant matrix ranks all schedules equally: no direction to match.
        return DistanceResult(d=1.0, t_star=0.0, b_star=float(q.mean()), cos_theta=0.0)
    dot = float((pc.values * qc.values).sum())
    cos = max(-1.0, min(1.0, dot / (pc.frobenius * qc.frobenius)))
    if cos <= 0.0:
        # Nearest point on the nonnegative ray is the origin.
        return DistanceResult(d=1.0, t_star=0.0, b_star=float(q.mean()), cos_theta=cos)
    t_star, b_star = optimal_scale_shift(q, p)
    residual = float(np.linalg.norm(qc.values - (dot / pc.frobenius**2) * pc.values))
    sin = residual / qc.frobenius
    d = min(1.0, sin / (1.0 + cos))
    return DistanceResult(d=d, t_star=t_star, b_star=b_star, cos_theta=cos)


def zero_pad(eat, n: int) -> ProblemMatrix:
    """Expand a compact auxiliary task back to n rows, zero-filling non-critical jobs.

    Padding does not change any schedule's makespan over the selected jobs, so
    the padded matrix is the size-matched stand-in used for distance work.
    """
    sub = eat.submatrix
    out = np.zeros((n, sub.m), dtype=np.int64)
    for row, job in zip(sub.p, eat.selected):
        if not 1 <= job <= n:
            raise JobIndexError(f"critical job {job} outside 1..{n}")
        out[job - 1] = row
    return ProblemMatrix(out)


def cos_theta_lower_bound(P, S: Iterable[int]) -> float:
    """Closed-form floor on cos(theta) between a padded critical-row task and P.

    Value: (m / (2*(n*m - 1))) * (n * ||Q||_F^2 / ||P||_F^2 - g), where Q keeps
    only the rows in S. Larger selected-row energy raises the floor, which is
    why top squared-sum rows are the best critical set.
    """
    p = _as_array(P)
    n, m = p.shape
    if n * m == 1:
        raise ParameterError("bound undefined for a 1x1 instance")
    jobs = sorted(set(S))
    if not jobs:
        raise ParameterError("critical set must be non-empty")
    for job in jobs:
        if not 1 <= job <= n:
            raise JobIndexError(f"critical job {job} outside 1..{n}")
    g = len(jobs)
    p_sq = (p * p).sum()
    q_sq = sum((p[job - 1] * p[job - 1]).sum() for job in jobs)
    return float((m / (2.0 * (n * m - 1))) * (n * q_sq / p_sq - g))
