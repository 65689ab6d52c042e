"""Flowshop instances: processing-time matrices, makespan evaluation and file I/O.

Jobs and machines are numbered from 1 in every public interface. Processing
times are nonnegative integers and all makespan arithmetic stays in Python
ints, so no tolerance is ever involved.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import (
    EmptyScheduleError,
    InvalidPermutationError,
    JobIndexError,
    ParameterError,
    ParseError,
)

__all__ = [
    "ProblemMatrix",
    "Instance",
    "makespan",
    "lower_bound",
    "parse_instance",
    "write_instance",
    "generate_taillard",
]


@dataclass
class ProblemMatrix:
    """An n x m matrix of processing times; row i holds job i's times."""

    p: np.ndarray
    _rows: list | None = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        arr = np.asarray(self.p, dtype=np.int64)
        if arr.ndim != 2:
            raise ParameterError(f"processing-time matrix must be 2-D, got shape {arr.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ParameterError("matrix needs at least one job and one machine")
        if (arr < 0).any():
            raise ParameterError("processing times must be nonnegative")
        self.p = arr

    @property
    def n(self) -> int:
        return self.p.shape[0]

    @property
    def m(self) -> int:
        return self.p.shape[1]

    def rows(self) -> list:
        """Processing times as plain nested lists (fast row lookup in hot loops)."""
        if self._rows is None:
            self._rows = self.p.tolist()
        return self._rows

    def job_row(self, job: int) -> list:
        return self.rows()[job - 1]


@dataclass
class Instance:
    """A named benchmark instance with optional best-known makespan."""

    matrix: ProblemMatrix
    name: str = ""
    best_known: int | None = None
    seed: int | None = None

    def __post_init__(self):
        if self.best_known is not None:
            lb = lower_bound(self.matrix)
            if self.best_known < lb:
                raise ParameterError(
                    f"best_known {self.best_known} below trivial lower bound {lb}"
                )

    @property
    def n(self) -> int:
        return self.matrix.n

    @property
    def m(self) -> int:
        return self.matrix.m


def _check_permutation(n: int, perm: Sequence[int]) -> None:
    if len(perm) == 0:
        raise EmptyScheduleError("cannot evaluate an empty schedule")
    seen = set()
    for job in perm:
        if not 1 <= job <= n:
            raise JobIndexError(f"job {job} outside 1..{n}")
        if job in seen:
            raise InvalidPermutationError(f"job {job} appears more than once")
        seen.add(job)


def makespan(matrix: ProblemMatrix, perm: Sequence[int]) -> int:
    """Completion time of the last listed job on the last machine.

    Accepts partial permutations: only the listed jobs are scheduled, in the
    given order, under the usual flowshop recursion.
    """
    _check_permutation(matrix.n, perm)
    return _makespan_unchecked(matrix.rows(), matrix.m, perm)


def _makespan_unchecked(rows: list, m: int, perm: Sequence[int]) -> int:
    # Rolling completion-time array over machines; c[j] is the completion
    # time of the most recent job on machine j+1.
    c = [0] * m
    for job in perm:
        row = rows[job - 1]
        t = c[0] + row[0]
        c[0] = t
        for j in range(1, m):
            cj = c[j]
            if cj > t:
                t = cj
            t += row[j]
            c[j] = t
    return c[m - 1]


def lower_bound(matrix: ProblemMatrix) -> int:
    """max(max job row sum, max machine column sum); never above the optimum."""
    p = matrix.p
    return int(max(p.sum(axis=1).max(), p.sum(axis=0).max()))


# ---------------------------------------------------------------------------
# File formats.
#
# canonical: line 1 "n m", then n job-major lines of m integers.
# taillard:  line 1 "n m [seed [upper [lower]]]" (extra tokens ignored),
#            then m machine-major lines of n integers.
# The writer emits canonical format only.
# ---------------------------------------------------------------------------


def _parse_int(token: str, line_no: int, col_no: int) -> int:
    try:
        value = int(token)
    except ValueError:
        raise ParseError(f"non-numeric token {token!r}", line_no, col_no) from None
    return value


def _data_lines(text: str):
    for line_no, raw in enumerate(text.splitlines(), start=1):
        if raw.strip():
            yield line_no, raw.split()


def parse_instance(data: bytes | str, fmt: str = "canonical", name: str = "") -> Instance:
    """Parse instance text in ``canonical`` or ``taillard`` format."""
    text = data.decode() if isinstance(data, (bytes, bytearray)) else data
    if fmt not in ("canonical", "taillard"):
        raise ParameterError(f"unknown format {fmt!r}")
    lines = list(_data_lines(text))
    if not lines:
        raise ParseError("empty instance file", 1)

    head_no, head = lines[0]
    if len(head) < 2:
        raise ParseError("header needs at least 'n m'", head_no)
    if fmt == "canonical" and len(head) != 2:
        raise ParseError("canonical header must be exactly 'n m'", head_no)
    n = _parse_int(head[0], head_no, 1)
    m = _parse_int(head[1], head_no, 2)
    if n < 1 or m < 1:
        raise ParseError(f"invalid dimensions {n} x {m}", head_no)

    seed = best_known = None
    if fmt == "taillard":
        if len(head) >= 3:
            seed = _parse_int(head[2], head_no, 3)
        if len(head) >= 4:
            best_known = _parse_int(head[3], head_no, 4)

    expect_rows = n if fmt == "canonical" else m
    expect_cols = m if fmt == "canonical" else n
    body = lines[1:]
    if len(body) != expect_rows:
        raise ParseError(
            f"expected {expect_rows} data lines, found {len(body)}",
            body[-1][0] if body else head_no,
        )

    values = np.empty((expect_rows, expect_cols), dtype=np.int64)
    for r, (line_no, tokens) in enumerate(body):
        if len(tokens) != expect_cols:
            raise ParseError(
                f"expected {expect_cols} values, found {len(tokens)}", line_no
            )
        for cidx, tok in enumerate(tokens, start=1):
            v = _parse_int(tok, line_no, cidx)
            if v < 0:
                raise ParseError(f"negative processing time {v}", line_no, cidx)
            values[r, cidx - 1] = v

    p = values if fmt == "canonical" else values.T.copy()
    return Instance(ProblemMatrix(p), name=name, best_known=best_known, seed=seed)


def write_instance(instance: Instance) -> str:
    """Serialize in canonical (job-major) format."""
    mat = instance.matrix
    out = [f"{mat.n} {mat.m}"]
    for row in mat.rows():
        out.append(" ".join(str(v) for v in row))
    return "\n".join(out) + "\n"


# Minimal-standard LCG used by the classic flowshop benchmark generator:
# x <- 16807 * x mod (2^31 - 1), times uniform on [1, 99], drawn machine-major.
_LCG_MOD = 2**31 - 1
_LCG_MULT = 16807


def generate_taillard(n: int, m: int, seed: int, name: str | None = None) -> Instance:
    """Deterministically regenerate a benchmark instance from its time seed."""
    if not 1 <= seed <= 2**31 - 2:
        raise ParameterError(f"seed {seed} outside [1, 2^31-2]")
    if n < 1 or m < 1:
        raise ParameterError("need n >= 1 and m >= 1")
    state = seed
    p = np.empty((n, m), dtype=np.int64)
    for j in range(m):
        for i in range(n):
            state = (_LCG_MULT * state) % _LCG_MOD
            p[i, j] = 1 + int((state / _LCG_MOD) * 99)
    return Instance(
        ProblemMatrix(p),
        name=name if name is not None else f"gen{n}x{m}s{seed}",
        seed=seed,
    )


def random_instance(n: int, m: int, rng, low: int = 1, high: int = 99, name: str = "") -> Instance:
    """Uniform random instance from a caller-owned rng (test/experiment helper)."""
    p = np.array([[rng.randint(low, high) for _ in range(m)] for _ in range(n)], dtype=np.int64)
    return Instance(ProblemMatrix(p), name=name)
