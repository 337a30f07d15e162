"""Instance generators, empty-core search, and extension constructions.

The extenders lift a small instance to any agent count while preserving an
empty core and a small always-relevant coalition family: the fractional
extension glues a fresh clique beside the base graph with no cross arcs, and
the single-peaked extension pushes all new sizes below every base agent's
current minimum while giving the new agents strictly size-increasing values.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .errors import EpsfcError
from .games import (
    AnonymousHG,
    Coalition,
    Partition,
    SimpleFHG,
    SinglePeakedCertificate,
    check_single_peaked,
)
from .limits import check_bell_guard, check_subset_guard
from .stabilizers import stabilize_anonymous
from .verification import certify_empty_core, has_blocker, partition_from_assignment

__all__ = [
    "random_fhg",
    "random_anon",
    "random_anon_sp",
    "random_partition",
    "EmptyCoreSearch",
    "find_empty_core_sp",
    "extend_fhg",
    "extend_anon_sp",
    "adversarial_family",
]


def _rng_of(seed) -> random.Random:
    return seed if isinstance(seed, random.Random) else random.Random(seed)


def random_fhg(n: int, p: float, seed) -> SimpleFHG:
    """Directed Erdos-Renyi graph: each off-diagonal arc present w.p. ``p``.

    Arcs are drawn row-major with the diagonal skipped, so a fixed seed gives
    a bit-identical game.
    """
    if not 0 <= p <= 1:
        raise ValueError("arc probability must lie in [0, 1]")
    rng = _rng_of(seed)
    masks = []
    for i in range(n):
        row = 0
        for j in range(n):
            if j != i and rng.random() < p:
                row |= 1 << j
        masks.append(row)
    return SimpleFHG(n, masks)


def random_anon(n: int, seed) -> AnonymousHG:
    """Anonymous game with i.i.d. uniform per-(agent, size) values."""
    rng = _rng_of(seed)
    return AnonymousHG([[rng.random() for _ in range(n)] for _ in range(n)])


def random_anon_sp(n: int, seed) -> tuple[AnonymousHG, SinglePeakedCertificate]:
    """Anonymous game single-peaked in the natural ordering.

    Each agent draws a peak uniformly from [1, n] and n distinct values; the
    largest sits at the peak and the rest are split at random between the
    two sides, strictly decreasing away from the peak. Splitting at random
    reaches every unimodal profile, not only the distance-symmetric ones;
    that breadth matters because empty-core instances exist among general
    unimodal profiles but not among the distance-symmetric ones at small n.
    """
    rng = _rng_of(seed)
    table = []
    for _ in range(n):
        peak = rng.randrange(1, n + 1)
        values = sorted((rng.random() for _ in range(n)), reverse=True)
        top, rest = values[0], values[1:]
        rng.shuffle(rest)
        left = sorted(rest[: peak - 1], reverse=True)  # sizes peak-1 .. 1
        right = sorted(rest[peak - 1 :], reverse=True)  # sizes peak+1 .. n
        row = [0.0] * n
        row[peak - 1] = top
        for d, v in enumerate(left):
            row[peak - 2 - d] = v
        for d, v in enumerate(right):
            row[peak + d] = v
        table.append(row)
    game = AnonymousHG(table)
    certificate = check_single_peaked(game)
    if not isinstance(certificate, SinglePeakedCertificate):
        raise AssertionError(f"generator produced a non-unimodal row: {certificate}")
    return game, certificate


def random_partition(n: int, seed) -> Partition:
    """Seeded random partition via a random restricted-growth string."""
    rng = _rng_of(seed)
    labels = []
    top = -1
    for _ in range(n):
        r = rng.randrange(top + 2)
        labels.append(r)
        top = max(top, r)
    return partition_from_assignment(labels, n)


@dataclass(frozen=True)
class EmptyCoreSearch:
    """Outcome of the rejection search for an empty-core instance."""

    game: AnonymousHG | None
    certificate: SinglePeakedCertificate | None
    attempts: int

    @property
    def found(self) -> bool:
        return self.game is not None


def _quick_core_candidates(game: AnonymousHG):
    """Cheap partitions worth testing before a full set-partition sweep."""
    n = game.n
    yield Partition.singletons(n)
    yield Partition.grand(n)
    by_peak: dict[int, list[int]] = {}
    for i in range(n):
        by_peak.setdefault(game.peak(i), []).append(i)
    blocks = []
    for peak in sorted(by_peak):
        agents = by_peak[peak]
        blocks.extend(agents[k : k + peak] for k in range(0, len(agents), peak))
    yield Partition.from_blocks(blocks, n)
    partition, _ = stabilize_anonymous(game, range(1, n + 1))
    yield partition


def find_empty_core_sp(
    n: int = 7, max_attempts: int = 100_000, seed=0
) -> EmptyCoreSearch:
    """Search random single-peaked instances for one with an empty core.

    Instances whose core is visibly non-empty are rejected by a handful of
    candidate partitions before paying for the certified full sweep. The
    search is best-effort: a not-found result after ``max_attempts`` is a
    normal outcome, reported with the attempt count.
    """
    if n > 10:
        raise EpsfcError("empty-core search is limited to n <= 10")
    check_bell_guard(n)
    root = _rng_of(seed)
    for attempt in range(1, max_attempts + 1):
        game, certificate = random_anon_sp(n, root.getrandbits(64))
        if any(not has_blocker(game, p) for p in _quick_core_candidates(game)):
            continue
        if certify_empty_core(game):
            return EmptyCoreSearch(game, certificate, attempt)
    return EmptyCoreSearch(None, None, max_attempts)


def extend_fhg(base: SimpleFHG, n: int) -> SimpleFHG:
    """Block-diagonal extension: base graph plus a fresh complete digraph.

    Base agents keep their arcs and value the newcomers 0; the newcomers form
    a clique among themselves and value all base agents 0.
    """
    if n <= base.n:
        raise ValueError(f"extension size {n} must exceed the base size {base.n}")
    new_block = ((1 << n) - 1) ^ ((1 << base.n) - 1)
    masks = list(base.adj_masks)
    for i in range(base.n, n):
        masks.append(new_block ^ (1 << i))
    return SimpleFHG(n, masks)


def extend_anon_sp(
    base: AnonymousHG, n: int
) -> tuple[AnonymousHG, SinglePeakedCertificate]:
    """Single-peaked extension in the natural ordering.

    Base agents keep their values on the base sizes and rank every new size
    strictly below their current minimum, decreasing in size; new agents get
    strictly increasing values, peaking at the grand size.
    """
    base_check = check_single_peaked(base)
    if not isinstance(base_check, SinglePeakedCertificate):
        raise ValueError(f"base game is not single-peaked in the natural ordering: {base_check}")
    if n <= base.n:
        raise ValueError(f"extension size {n} must exceed the base size {base.n}")
    table = []
    for i in range(base.n):
        row = [base.value_of_size(i, s) for s in range(1, base.n + 1)]
        floor = min(row)
        row.extend(floor - k for k in range(1, n - base.n + 1))
        table.append(row)
    for _ in range(base.n, n):
        table.append([float(s) for s in range(1, n + 1)])
    game = AnonymousHG(table)
    certificate = check_single_peaked(game)
    if not isinstance(certificate, SinglePeakedCertificate):
        raise AssertionError("extension broke unimodality")
    return game, certificate


def adversarial_family(n: int, base_n: int) -> list[Coalition]:
    """All non-empty subsets of the base block plus the newcomer block.

    This is the family that always contains a blocker for extensions of an
    empty-core base; it has 2^base_n coalitions, so materializing it is
    gated by the enumeration guard.
    """
    if not 0 < base_n < n:
        raise ValueError("need 0 < base_n < n")
    check_subset_guard(base_n, "adversarial family materialization")
    family = [Coalition(mask) for mask in range(1, 1 << base_n)]
    family.append(Coalition(((1 << n) - 1) ^ ((1 << base_n) - 1)))
    return family
