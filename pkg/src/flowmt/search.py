"""Constructive and improvement heuristics: NEH insertion, INSERT local search,
and a simulated-annealing refiner for small auxiliary tasks."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import InvalidPermutationError, ParameterError
from .instance import ProblemMatrix, _makespan_unchecked

__all__ = ["SearchBudget", "neh", "insert_local_search", "solve_eat"]


@dataclass
class SearchBudget:
    ls_intensity: int = 50
    sa_iterations: int = 10000
    rng_seed: int = 0

    def __post_init__(self):
        if self.ls_intensity < 0 or self.sa_iterations < 0:
            raise ParameterError("search budgets must be nonnegative")


def neh(matrix: ProblemMatrix, priority: Sequence[int]) -> list[int]:
    """Insert jobs in the given priority order, each at its best position.

    Position ties keep the latest slot, so on a single machine (where every
    slot ties) the result is the priority order itself. With priority sorted
    by descending row sum this is the classic NEH construction.
    """
    jobs = list(priority)
    if sorted(jobs) != list(range(1, matrix.n + 1)):
        raise InvalidPermutationError("priority must order every job exactly once")
    rows = matrix.rows()
    m = matrix.m
    seq: list[int] = []
    for job in jobs:
        best_pos = 0
        best_cmax = None
        for pos in range(len(seq) + 1):
            cand = seq[:pos] + [job] + seq[pos:]
            cmax = _makespan_unchecked(rows, m, cand)
            if best_cmax is None or cmax <= best_cmax:
                best_cmax = cmax
                best_pos = pos
        seq.insert(best_pos, job)
    return seq


def _intensity(budget) -> int:
    return budget.ls_intensity if isinstance(budget, SearchBudget) else int(budget)


def _sa_iters(budget) -> int:
    return budget.sa_iterations if isinstance(budget, SearchBudget) else int(budget)


def insert_local_search(
    matrix: ProblemMatrix,
    perm: Sequence[int],
    budget,
    rng,
    restrict: Iterable[int] | None = None,
) -> list[int]:
    """Random INSERT walk: repeatedly pick two distinct jobs and move the
    later-positioned one directly before the earlier one.

    Runs for the budgeted number of iterations and returns the best sequence
    seen, the input included, so the result never evaluates worse. When
    ``restrict`` is given, both sampled jobs come from that subset.
    """
    iterations = _intensity(budget)
    cur = list(perm)
    eligible = None
    if restrict is not None:
        members = set(restrict)
        eligible = [i for i, job in enumerate(cur) if job in members]
        if len(eligible) < 2:
            return cur
    if len(cur) < 2:
        return cur

    rows = matrix.rows()
    m = matrix.m
    best = list(cur)
    best_val = _makespan_unchecked(rows, m, cur)
    for _ in range(iterations):
        if eligible is None:
            i, j = rng.sample(range(len(cur)), 2)
        else:
            i, j = rng.sample(eligible, 2)
        if i > j:
            i, j = j, i
        job = cur.pop(j)
        cur.insert(i, job)
        val = _makespan_unchecked(rows, m, cur)
        if val < best_val:
            best_val = val
            best = list(cur)
        if eligible is not None:
            members_positions = [k for k, job_ in enumerate(cur) if job_ in members]
            eligible = members_positions
    return best


def solve_eat(submatrix: ProblemMatrix, budget, rng) -> list[int]:
    """Near-optimal schedule for a compact task: NEH seed plus annealing.

    The seed orders jobs by descending row sum. Annealing proposes random
    reinsertion moves under geometric cooling from T0 = m * mean(p) / 10 down
    to T0 / 100, accepting uphill moves with probability exp(-delta / T).
    Returns the best schedule seen, never worse than the seed.
    """
    rows_sums = [(sum(row), job) for job, row in enumerate(submatrix.rows(), start=1)]
    priority = [job for _, job in sorted(rows_sums, key=lambda t: (-t[0], t[1]))]
    seed = neh(submatrix, priority)
    iterations = _sa_iters(budget)
    g = len(seed)
    if iterations == 0 or g < 2:
        return seed

    rows = submatrix.rows()
    m = submatrix.m
    cur = list(seed)
    cur_val = _makespan_unchecked(rows, m, cur)
    best = list(cur)
    best_val = cur_val
    t0 = m * (submatrix.p.mean() / 10.0)
    if t0 <= 0.0:
        t0 = 1.0
    alpha = 0.01 ** (1.0 / iterations)
    temp = t0
    for _ in range(iterations):
        a = rng.randrange(g)
        b = rng.randrange(g - 1)
        if b >= a:
            b += 1
        cand = list(cur)
        job = cand.pop(a)
        cand.insert(b, job)
        val = _makespan_unchecked(rows, m, cand)
        delta = val - cur_val
        if delta <= 0 or rng.random() < math.exp(-delta / temp):
            cur = cand
            cur_val = val
            if val < best_val:
                best_val = val
                best = list(cand)
        temp *= alpha
    return best
