"""Learning valuations from sampled coalitions.

Simple fractional games are recovered exactly: every sample containing agent
i is one linear equation over i's unknown arc indicators (the sum of
indicators over the other members equals value * size, an integer), and the
per-agent systems are solved in exact arithmetic. A packed GF(2) elimination
handles the common case, because full rank mod 2 implies full rational rank
and the unique 0/1 solution can then be replayed against the raw integer
equations; systems that are rank-deficient mod 2 fall back to exact rational
elimination to decide the true rank. Floats never touch a rank decision.

Anonymous games are learned by direct tabulation: one observed (agent, size)
pair fixes that table entry forever, and a second observation disagreeing
with the first aborts learning, since the model promises exact values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from .distributions import SizeInterval, delta_bound
from .errors import (
    EmptyIntervalError,
    InconsistentSampleError,
    LearningError,
    UnderdeterminedError,
)
from .games import Coalition, SimpleFHG, bits_of

__all__ = [
    "SampleRecord",
    "draw_samples",
    "fhg_sample_size",
    "learn_fhg",
    "anon_sample_size",
    "LearnedAnonymous",
    "learn_anonymous",
    "mean_confidence_m",
    "default_alpha",
    "estimate_interval",
]


@dataclass(frozen=True)
class SampleRecord:
    """One observed coalition with each member's valuation of it."""

    coalition: Coalition
    member_values: Mapping[int, object] = field(default_factory=dict)

    def __post_init__(self):
        if set(self.member_values) != set(self.coalition.members()):
            raise ValueError("member_values must be keyed exactly by the coalition members")


def draw_samples(game, dist, m: int, rng) -> list[SampleRecord]:
    """Draw m coalitions from ``dist`` and evaluate them for their members."""
    records = []
    for _ in range(m):
        c = dist.sample(rng)
        records.append(SampleRecord(c, {i: game.value(i, c) for i in c}))
    return records


def fhg_sample_size(n: int, delta: float) -> int:
    """Samples sufficient to recover a simple fractional game exactly with
    confidence 1 - delta under uniform coalition sampling."""
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    return math.ceil(16 * math.log(n / delta)) + 4 * n


def _rhs_as_int(value, size: int) -> int:
    """Neighbor count encoded by a sampled average; exact for rationals and
    recoverable from float64 because the denominator is the coalition size."""
    if isinstance(value, Fraction) or isinstance(value, int):
        scaled = Fraction(value) * size
        if scaled.denominator != 1:
            raise InconsistentSampleError(
                f"value {value} of a size-{size} coalition is not a multiple of 1/{size}"
            )
        k = scaled.numerator
    else:
        k = round(value * size)
        if abs(value * size - k) > 1e-6:
            raise InconsistentSampleError(
                f"value {value} of a size-{size} coalition is not a multiple of 1/{size}"
            )
    if not 0 <= k <= size:
        raise InconsistentSampleError(f"value {value} outside [0, 1] for size {size}")
    return k


def _solve_gf2(packed_rows: list[int], ncols: int):
    """Reduce rows of (coeff bits | rhs bit at position ncols) over GF(2).

    Returns (solution_bits, True) when the system has full column rank and is
    consistent mod 2, else (None, full_rank_flag).
    """
    pivots: dict[int, int] = {}
    consistent = True
    for row in packed_rows:
        for c in sorted(pivots):
            if row >> c & 1:
                row ^= pivots[c]
        if row == 0:
            continue
        low = row & -row
        c = low.bit_length() - 1
        if c == ncols:
            consistent = False
            continue
        pivots[c] = row
    full_rank = len(pivots) == ncols
    if not (full_rank and consistent):
        return None, full_rank
    # Back-substitute to reduced form; solution bit c = rhs bit of pivot row c.
    cols = sorted(pivots, reverse=True)
    for c in cols:
        row = pivots[c]
        for c2 in cols:
            if c2 > c and row >> c2 & 1:
                row ^= pivots[c2]
        pivots[c] = row
    solution = 0
    for c, row in pivots.items():
        if row >> ncols & 1:
            solution |= 1 << c
    return solution, True


def _solve_rational(rows: list[tuple[int, int]], ncols: int):
    """Exact Gauss-Jordan over Fractions.

    ``rows`` holds (column-space coefficient bitmask, integer rhs). Returns
    the unique solution as a list of Fractions when the rank is ncols, None
    when the system is underdetermined, and raises on inconsistency.
    """
    matrix = [
        [Fraction(bits >> c & 1) for c in range(ncols)] + [Fraction(rhs)]
        for bits, rhs in rows
    ]
    rank = 0
    pivot_cols = []
    for c in range(ncols):
        pivot = next((r for r in range(rank, len(matrix)) if matrix[r][c] != 0), None)
        if pivot is None:
            continue
        matrix[rank], matrix[pivot] = matrix[pivot], matrix[rank]
        inv = 1 / matrix[rank][c]
        matrix[rank] = [x * inv for x in matrix[rank]]
        for r in range(len(matrix)):
            if r != rank and matrix[r][c] != 0:
                factor = matrix[r][c]
                matrix[r] = [x - factor * y for x, y in zip(matrix[r], matrix[rank])]
        pivot_cols.append(c)
        rank += 1
    for r in range(rank, len(matrix)):
        if matrix[r][ncols] != 0:
            raise InconsistentSampleError("sampled equations are mutually inconsistent")
    if rank < ncols:
        return None
    solution = [Fraction(0)] * ncols
    for r, c in enumerate(pivot_cols):
        solution[c] = matrix[r][ncols]
    return solution


def learn_fhg(n: int, samples: Sequence[SampleRecord]) -> SimpleFHG:
    """Recover the adjacency matrix of a simple fractional game exactly.

    Raises UnderdeterminedError listing every agent whose system has rational
    rank below n-1, and InconsistentSampleError when the equations admit no
    0/1 arc assignment (the samples were not produced by a simple game).
    """
    rows_by_agent: list[list[tuple[int, int]]] = [[] for _ in range(n)]
    for rec in samples:
        smask = rec.coalition.mask
        size = rec.coalition.size
        if smask >> n:
            raise ValueError(f"sample references agents outside [0, {n})")
        for i, v in rec.member_values.items():
            rows_by_agent[i].append((smask & ~(1 << i), _rhs_as_int(v, size)))
    adj_masks = [0] * n
    underdetermined = []
    for i in range(n):
        cols = [j for j in range(n) if j != i]
        col_pos = {j: c for c, j in enumerate(cols)}
        ncols = n - 1
        col_rows = []
        for mask, rhs in rows_by_agent[i]:
            bits = 0
            for j in bits_of(mask):
                bits |= 1 << col_pos[j]
            col_rows.append((bits, rhs))
        solution_bits, _ = _solve_gf2(
            [bits | (rhs & 1) << ncols for bits, rhs in col_rows], ncols
        )
        if solution_bits is not None:
            candidate = _unpack_columns(solution_bits, cols)
            if _replays(rows_by_agent[i], candidate):
                adj_masks[i] = candidate
                continue
            raise InconsistentSampleError(
                f"agent {i}: equations have full rank but no 0/1 arc assignment"
            )
        solution = _solve_rational(col_rows, ncols)
        if solution is None:
            underdetermined.append(i)
            continue
        if any(x not in (0, 1) for x in solution):
            raise InconsistentSampleError(
                f"agent {i}: unique rational solution is not 0/1-valued"
            )
        bits = 0
        for c, x in enumerate(solution):
            if x == 1:
                bits |= 1 << c
        adj_masks[i] = _unpack_columns(bits, cols)
    if underdetermined:
        raise UnderdeterminedError(underdetermined)
    return SimpleFHG(n, adj_masks)


def _unpack_columns(bits: int, cols: list[int]) -> int:
    out = 0
    for c, j in enumerate(cols):
        if bits >> c & 1:
            out |= 1 << j
    return out


def _replays(rows: list[tuple[int, int]], adj_candidate: int) -> bool:
    """Check a candidate out-neighbor mask against every raw integer equation."""
    return all((adj_candidate & mask).bit_count() == rhs for mask, rhs in rows)


def anon_sample_size(n: int, delta: float, eps: float, lam: float) -> int:
    """Samples sufficient to learn all valuations at sizes inside the
    high-probability window, with confidence 1 - delta."""
    if not 0 < delta < 1 or not 0 < eps < 1:
        raise ValueError("delta and eps must lie in (0, 1)")
    if lam < 1:
        raise ValueError("ratio bound must be >= 1")
    return math.ceil(2 * lam * (1 + lam) * n * n * math.log(n * n / delta) / eps)


class LearnedAnonymous:
    """Partial anonymous valuation table plus the sampled-size mean."""

    __slots__ = ("n", "m", "_vals", "_size_sum")

    def __init__(self, n: int):
        self.n = n
        self.m = 0
        self._vals: list[dict[int, float]] = [{} for _ in range(n)]
        self._size_sum = 0

    def has_size(self, i: int, s: int) -> bool:
        return s in self._vals[i]

    def value_of_size(self, i: int, s: int) -> float:
        try:
            return self._vals[i][s]
        except KeyError:
            raise LearningError(
                f"agent {i}'s value at size {s} was never observed"
            ) from None

    @property
    def mu_hat(self) -> float:
        if self.m == 0:
            raise LearningError("mean size estimate undefined: no samples")
        return self._size_sum / self.m

    def known_table(self) -> list[list[bool]]:
        return [[s in self._vals[i] for s in range(1, self.n + 1)] for i in range(self.n)]

    def sizes_known_for_all(self) -> tuple[int, ...]:
        return tuple(
            s for s in range(1, self.n + 1) if all(s in self._vals[i] for i in range(self.n))
        )

    def __repr__(self) -> str:
        known = sum(len(v) for v in self._vals)
        return f"LearnedAnonymous(n={self.n}, m={self.m}, known={known}/{self.n * self.n})"


def learn_anonymous(n: int, samples: Sequence[SampleRecord]) -> LearnedAnonymous:
    """Tabulate exact per-size values from samples and the mean sampled size."""
    learned = LearnedAnonymous(n)
    for rec in samples:
        s = rec.coalition.size
        if rec.coalition.mask >> n:
            raise ValueError(f"sample references agents outside [0, {n})")
        learned.m += 1
        learned._size_sum += s
        for i, v in rec.member_values.items():
            v = float(v)
            existing = learned._vals[i].get(s)
            if existing is None:
                learned._vals[i][s] = v
            elif existing != v:
                raise InconsistentSampleError(
                    f"agent {i} reported {existing!r} and {v!r} for size {s}"
                )
    return learned


def mean_confidence_m(n: int, alpha: float, delta: float) -> int:
    """Samples sufficient for the size-mean estimate to land within alpha of
    the true mean with confidence 1 - delta."""
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    return math.ceil(n * n * math.log(2 / delta) / (2 * alpha * alpha))


def default_alpha(n: int, lam: float) -> float:
    return min(1 / (2 * math.sqrt(n)), n / (lam + 1))


def estimate_interval(
    learned: LearnedAnonymous, lam: float, eps: float, alpha: float | None = None
) -> SizeInterval:
    """Window of sizes certainly covering the high-probability size window.

    Widens the ideal window by the mean-estimation slack alpha on both ends,
    then keeps only the integer sizes that were learned for every agent.
    Raises EmptyIntervalError when nothing survives.
    """
    n = learned.n
    if alpha is None:
        alpha = default_alpha(n, lam)
    mu = learned.mu_hat
    delta = delta_bound(lam, eps, n)
    ends = [
        (1 - delta) * (mu - alpha),
        (1 - delta) * (mu + alpha),
        (1 + delta) * (mu - alpha),
        (1 + delta) * (mu + alpha),
    ]
    lo, hi = min(ends), max(ends)
    known = set(learned.sizes_known_for_all())
    sizes = tuple(s for s in range(1, n + 1) if lo < s < hi and s in known)
    if not sizes:
        raise EmptyIntervalError(
            f"no fully-learned size lies in ({lo:.3f}, {hi:.3f}); "
            f"learned-for-all sizes: {sorted(known)}"
        )
    return SizeInterval(lo, hi, sizes)
