"""Exact and statistical verification of core-blocking behaviour.

The exact counters sweep every non-empty coalition as a bitmask in Gray-code
order: each step flips one agent in or out, so the coalition size and the
per-agent neighbor counts are maintained incrementally instead of being
recomputed, and the per-coalition blocking test short-circuits on the first
member who fails to improve. Anonymous games are cheaper still: for each
size s, the agents that would strictly improve form one precomputed bitmask,
and a coalition blocks iff it is a subset of the mask for its size.

Counts are split by coalition size, which is exactly what distribution-
weighted blocking mass needs. Fractions and masses are exact rationals.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

from .distributions import (
    AdversarialBounded,
    FamilyUniform,
    SizeInterval,
    SizeTilted,
    UniformCoalitions,
)
from .games import (
    AnonymousHG,
    Coalition,
    Partition,
    SimpleFHG,
    bits_of,
    mask_of,
)
from .limits import check_bell_guard, check_subset_guard

__all__ = [
    "BlockingReport",
    "exact_blocking",
    "exact_blocking_mass",
    "McEstimate",
    "mc_blocking",
    "blocker_predicate",
    "audit_green_anonymous",
    "SpLemmaReport",
    "check_sp_lemmas",
    "certify_empty_core",
    "find_core_stable_partition",
    "has_blocker",
    "iter_set_partitions",
    "partition_from_assignment",
    "GrDecomposition",
    "gr_decomposition",
]

WITNESS_CAP = 100


@dataclass(frozen=True)
class BlockingReport:
    """Exact census of the core-blocking coalitions of one partition."""

    total_coalitions: int
    blocking_count: int
    fraction: Fraction
    mass: Fraction | None = None
    witnesses: tuple[Coalition, ...] = ()
    blocking_by_size: tuple[int, ...] = ()


@dataclass(frozen=True)
class McEstimate:
    """Monte-Carlo blocking probability with a Hoeffding confidence radius."""

    samples: int
    hits: int
    p_hat: float
    ci_halfwidth: float


def _fhg_partition_context(game: SimpleFHG, partition: Partition):
    """Per-agent (neighbors in current block, current block size)."""
    num = []
    den = []
    for i in range(game.n):
        block = partition.block_of(i)
        num.append((game.adj_masks[i] & block.mask).bit_count())
        den.append(block.size)
    return num, den


def _anon_improve_masks(game: AnonymousHG, partition: Partition) -> list[int]:
    """improve[s] = bitmask of agents strictly better off at size s."""
    n = game.n
    current = [game.value_of_size(i, partition.size_of(i)) for i in range(n)]
    improve = [0] * (n + 1)
    for s in range(1, n + 1):
        m = 0
        for i in range(n):
            if game.value_of_size(i, s) > current[i]:
                m |= 1 << i
        improve[s] = m
    return improve


def blocker_predicate(game, partition: Partition) -> Callable[[int], bool]:
    """Return an exact mask -> bool test of the core-blocking condition."""
    if isinstance(game, SimpleFHG):
        adj = game.adj_masks
        num, den = _fhg_partition_context(game, partition)

        def pred(mask: int) -> bool:
            size = mask.bit_count()
            m = mask
            while m:
                low = m & -m
                i = low.bit_length() - 1
                if (adj[i] & mask).bit_count() * den[i] <= num[i] * size:
                    return False
                m ^= low
            return True

        return pred
    improve = _anon_improve_masks(game, partition)

    def pred(mask: int) -> bool:
        return mask & ~improve[mask.bit_count()] == 0

    return pred


def _enumerate_fhg(game: SimpleFHG, partition: Partition, witness_cap: int):
    n = game.n
    adj = game.adj_masks
    num, den = _fhg_partition_context(game, partition)
    in_neighbors = [[] for _ in range(n)]
    for i in range(n):
        for j in bits_of(adj[i]):
            in_neighbors[j].append(i)
    cnt = [0] * n  # |S & N_i| for the current S, maintained incrementally
    counts = [0] * (n + 1)
    witnesses = []
    mask = 0
    size = 0
    for k in range(1, 1 << n):
        j = (k & -k).bit_length() - 1  # Gray code: bit j flips at step k
        bit = 1 << j
        if mask & bit:
            size -= 1
            for t in in_neighbors[j]:
                cnt[t] -= 1
        else:
            size += 1
            for t in in_neighbors[j]:
                cnt[t] += 1
        mask ^= bit
        m = mask
        while m:
            low = m & -m
            i = low.bit_length() - 1
            if cnt[i] * den[i] <= num[i] * size:
                break
            m ^= low
        else:
            counts[size] += 1
            if len(witnesses) < witness_cap:
                witnesses.append(mask)
    return counts, witnesses


def _enumerate_anon(game: AnonymousHG, partition: Partition, witness_cap: int):
    n = game.n
    improve = _anon_improve_masks(game, partition)
    bad = [~m for m in improve]  # agents NOT improving at each size
    counts = [0] * (n + 1)
    witnesses = []
    mask = 0
    size = 0
    for k in range(1, 1 << n):
        bit = 1 << ((k & -k).bit_length() - 1)
        size += -1 if mask & bit else 1
        mask ^= bit
        if mask & bad[size] == 0:
            counts[size] += 1
            if len(witnesses) < witness_cap:
                witnesses.append(mask)
    return counts, witnesses


def _blocking_counts(game, partition: Partition, witness_cap: int):
    check_subset_guard(game.n)
    if isinstance(game, SimpleFHG):
        return _enumerate_fhg(game, partition, witness_cap)
    if isinstance(game, AnonymousHG):
        return _enumerate_anon(game, partition, witness_cap)
    raise TypeError(f"cannot enumerate blockers of {type(game).__name__}")


def exact_blocking(
    game, partition: Partition, dist=None, witness_cap: int = WITNESS_CAP
) -> BlockingReport:
    """Enumerate every non-empty coalition and count the core-blocking ones.

    The fraction is over all 2^n - 1 coalitions. When ``dist`` is given the
    report also carries the exact probability mass of the blocking set under
    it. Guarded by the enumeration limit.
    """
    counts, witness_masks = _blocking_counts(game, partition, witness_cap)
    total = (1 << game.n) - 1
    blocking = sum(counts)
    mass = None
    if dist is not None:
        mass = exact_blocking_mass(game, partition, dist, _counts=counts)
    return BlockingReport(
        total_coalitions=total,
        blocking_count=blocking,
        fraction=Fraction(blocking, total),
        mass=mass,
        witnesses=tuple(Coalition(m) for m in witness_masks),
        blocking_by_size=tuple(counts),
    )


def exact_blocking_mass(game, partition: Partition, dist, _counts=None) -> Fraction:
    """Exact probability that a coalition drawn from ``dist`` core-blocks.

    Size-symmetric distributions reuse the per-size blocking census; an
    explicit-support distribution is integrated by walking its support, which
    needs no enumeration guard; the two-level family distribution combines
    both.
    """
    if isinstance(dist, (UniformCoalitions, SizeTilted)):
        counts = _counts
        if counts is None:
            counts, _ = _blocking_counts(game, partition, 0)
        return sum(
            (counts[s] * dist.unit_mass_of_size(s) for s in range(1, game.n + 1)),
            Fraction(0),
        )
    if isinstance(dist, FamilyUniform):
        pred = blocker_predicate(game, partition)
        hits = sum(1 for c in dist.support if pred(c.mask))
        return Fraction(hits, len(dist.support))
    if isinstance(dist, AdversarialBounded):
        counts = _counts
        if counts is None:
            counts, _ = _blocking_counts(game, partition, 0)
        total_blockers = sum(counts)
        pred = blocker_predicate(game, partition)
        family_hits = sum(1 for c in dist.family if pred(c.mask))
        return family_hits * dist.p + (total_blockers - family_hits) * dist.p / dist.lam
    raise TypeError(f"cannot compute blocking mass under {type(dist).__name__}")


def mc_blocking(
    game_or_oracle,
    partition: Partition | None,
    dist,
    m: int,
    delta: float = 0.05,
    seed: int | None = None,
    rng: random.Random | None = None,
) -> McEstimate:
    """Estimate the blocking probability from m independent draws.

    ``game_or_oracle`` is a game (paired with ``partition``) or any callable
    taking a Coalition and returning truth. The confidence radius is the
    two-sided Hoeffding half-width sqrt(ln(2/delta) / (2m)).
    """
    if m < 1:
        raise ValueError("need at least one sample")
    if rng is None:
        rng = random.Random(seed)
    if callable(game_or_oracle):
        oracle = game_or_oracle
        hits = sum(1 for _ in range(m) if oracle(dist.sample(rng)))
    else:
        if partition is None:
            raise ValueError("a partition is required when passing a game")
        pred = blocker_predicate(game_or_oracle, partition)
        hits = sum(1 for _ in range(m) if pred(dist.sample(rng).mask))
    return McEstimate(
        samples=m,
        hits=hits,
        p_hat=hits / m,
        ci_halfwidth=math.sqrt(math.log(2 / delta) / (2 * m)),
    )


def audit_green_anonymous(view, partition: Partition, sizes) -> list[int]:
    """Agents whose block size attains their maximum value over ``sizes``.

    Such agents cannot strictly improve in any coalition whose size stays
    inside ``sizes``, so coalitions containing them block only from outside
    the window.
    """
    size_list = tuple(sorted(sizes.sizes if isinstance(sizes, SizeInterval) else sizes))
    size_set = set(size_list)
    green = []
    for i in range(view.n):
        top = max(view.value_of_size(i, s) for s in size_list)
        s = partition.size_of(i)
        if s in size_set and view.value_of_size(i, s) == top:
            green.append(i)
    return green


@dataclass(frozen=True)
class SpLemmaReport:
    """Structural audit of a single-peaked packing against full enumeration.

    Checks that no blocker touches the at-peak agents placed in full-size
    blocks, that no window-sized blocker mixes the before-peak and after-peak
    camps, and that the number of window-sized blockers stays below the
    2^(3n/4 + 1) ceiling.
    """

    ok: bool
    blockers: int
    blockers_in_window: int
    window_bound: float
    count_ok: bool
    at_peak_violations: tuple[Coalition, ...] = ()
    mixing_violations: tuple[Coalition, ...] = ()


def check_sp_lemmas(
    game: AnonymousHG, partition: Partition, sizes, trace
) -> SpLemmaReport:
    """Enumerate all blockers and audit the single-peaked packing's lemmas."""
    n = game.n
    check_subset_guard(n)
    size_set = set(sizes.sizes if isinstance(sizes, SizeInterval) else sizes)
    at_mask = mask_of(trace.at_in_star)
    before_mask = mask_of(trace.before_in_star)
    after_mask = mask_of(trace.after_in_star)
    improve = _anon_improve_masks(game, partition)
    bad = [~m for m in improve]
    at_violations = []
    mixing_violations = []
    blockers = 0
    in_window = 0
    mask = 0
    size = 0
    for k in range(1, 1 << n):
        bit = 1 << ((k & -k).bit_length() - 1)
        size += -1 if mask & bit else 1
        mask ^= bit
        if mask & bad[size]:
            continue
        blockers += 1
        if mask & at_mask and len(at_violations) < WITNESS_CAP:
            at_violations.append(Coalition(mask))
        if size in size_set:
            in_window += 1
            if (
                mask & before_mask
                and mask & after_mask
                and len(mixing_violations) < WITNESS_CAP
            ):
                mixing_violations.append(Coalition(mask))
    bound = 2.0 ** (3 * n / 4 + 1)
    count_ok = in_window <= bound
    return SpLemmaReport(
        ok=not at_violations and not mixing_violations and count_ok,
        blockers=blockers,
        blockers_in_window=in_window,
        window_bound=bound,
        count_ok=count_ok,
        at_peak_violations=tuple(at_violations),
        mixing_violations=tuple(mixing_violations),
    )


def iter_set_partitions(n: int):
    """Yield every partition of [0, n) as a restricted-growth assignment.

    The assignment list is reused across iterations; copy it if you keep it.
    """
    if n <= 0:
        yield []
        return
    a = [0] * n
    m = [0] * n  # m[k] = max(a[0..k])
    while True:
        yield a
        k = n - 1
        while k > 0 and a[k] == m[k - 1] + 1:
            k -= 1
        if k == 0:
            return
        a[k] += 1
        m[k] = m[k - 1] if m[k - 1] >= a[k] else a[k]
        for j in range(k + 1, n):
            a[j] = 0
            m[j] = m[k]


def partition_from_assignment(assignment, n: int) -> Partition:
    """Build a Partition from agent -> block-label, labels in first-seen order."""
    masks: dict[int, int] = {}
    for i, label in enumerate(assignment):
        masks[label] = masks.get(label, 0) | 1 << i
    return Partition([Coalition(m) for m in masks.values()], n)


def has_blocker(game, partition: Partition) -> bool:
    """Existence of a core-blocking coalition, without a full census.

    For anonymous games this is closed-form: a blocker of size s exists iff
    at least s agents strictly improve at size s. Fractional games fall back
    to a guarded early-exit scan.
    """
    n = game.n
    if isinstance(game, AnonymousHG):
        improve = _anon_improve_masks(game, partition)
        return any(improve[s].bit_count() >= s for s in range(1, n + 1))
    check_subset_guard(n)
    pred = blocker_predicate(game, partition)
    return any(pred(mask) for mask in range(1, 1 << n))


def _anon_stable_sweep(game: AnonymousHG) -> Partition | None:
    """Set-partition sweep specialized for anonymous games.

    Blocking depends only on each agent's current block size, so the
    per-partition test packs, for every agent, the sizes she would strictly
    prefer into 4-bit lanes and adds them up: lane s then holds the improver
    count at size s, and the partition is stable iff every lane stays below
    its size. This is exactly the generic sweep's answer, computed without
    building Partition objects.
    """
    n = game.n
    rows = [[game.value_of_size(i, s) for s in range(1, n + 1)] for i in range(n)]
    # better[i][c] = bitmask over sizes s the agent strictly prefers to c
    better = []
    for i in range(n):
        row = rows[i]
        per_cur = [0]  # index by current size, 1-based
        for c in range(1, n + 1):
            mask = 0
            vc = row[c - 1]
            for s in range(1, n + 1):
                if row[s - 1] > vc:
                    mask |= 1 << (s - 1)
            per_cur.append(mask)
        better.append(per_cur)
    # 4-bit-lane expansion of 7..12-bit masks; counts never exceed n <= 15
    expand = [0] * (1 << n)
    for mask in range(1, 1 << n):
        low = mask & -mask
        expand[mask] = expand[mask ^ low] | 1 << (4 * (low.bit_length() - 1))
    lane_limit = [0] + [s << (4 * (s - 1)) for s in range(1, n + 1)]
    counts = [0] * n
    for assignment in iter_set_partitions(n):
        for b in range(n):
            counts[b] = 0
        for label in assignment:
            counts[label] += 1
        acc = 0
        for i in range(n):
            acc += expand[better[i][counts[assignment[i]]]]
        for s in range(1, n + 1):
            if acc >> (4 * (s - 1)) & 15 >= s:
                break
        else:
            return partition_from_assignment(assignment, n)
    return None


def find_core_stable_partition(game) -> Partition | None:
    """First partition (in restricted-growth order) admitting no blocker."""
    check_bell_guard(game.n)
    if isinstance(game, AnonymousHG) and game.n <= 15:
        return _anon_stable_sweep(game)
    for assignment in iter_set_partitions(game.n):
        partition = partition_from_assignment(assignment, game.n)
        if not has_blocker(game, partition):
            return partition
    return None


def certify_empty_core(game) -> bool:
    """True iff every partition of the agents admits a core-blocking coalition.

    Sweeps all set partitions, so it is gated by the Bell guard.
    """
    return find_core_stable_partition(game) is None


@dataclass(frozen=True)
class GrDecomposition:
    """Exact split of the blocking census around a guaranteed agent set."""

    total_coalitions: int
    avoiding_gr: int  # all coalitions disjoint from the set
    blockers_avoiding: int
    blockers_meeting: int

    @property
    def blockers(self) -> int:
        return self.blockers_avoiding + self.blockers_meeting


def gr_decomposition(game, partition: Partition, gr_agents) -> GrDecomposition:
    """Count blockers split by whether they touch ``gr_agents``.

    The blocking fraction is then bounded by P(coalition avoids the set) plus
    the fraction of blockers meeting it, and the census here makes both terms
    exact.
    """
    n = game.n
    check_subset_guard(n)
    gr_mask = mask_of(gr_agents)
    pred = blocker_predicate(game, partition)
    avoiding = 0
    blockers_avoiding = 0
    blockers_meeting = 0
    for mask in range(1, 1 << n):
        hits_gr = bool(mask & gr_mask)
        if not hits_gr:
            avoiding += 1
        if pred(mask):
            if hits_gr:
                blockers_meeting += 1
            else:
                blockers_avoiding += 1
    return GrDecomposition(
        total_coalitions=(1 << n) - 1,
        avoiding_gr=avoiding,
        blockers_avoiding=blockers_avoiding,
        blockers_meeting=blockers_meeting,
    )
