"""Sampleable coalition distributions with exact point masses.

Every distribution here assigns probability to the non-empty subsets of the
agent set [0, n); the empty set carries no mass. Point masses are exact
rationals so that family masses, means, and tail windows can be checked
without floating-point slack.

Sampling takes an explicit ``random.Random``: callers own seeding, and
parallel users hand one independent stream to each worker. All randomness is
consumed through ``randrange`` so draws are reproducible bit-for-bit for a
fixed seed.

The ratio-bounded family is realized through per-size weights: tilting only
by size keeps the max/min point-mass ratio exact and equal to
max(g)/min(g), and sampling O(n), where a general table over 2^n coalitions
would be infeasible.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Iterable, Sequence

from .errors import UnboundedLambdaError
from .games import Coalition

__all__ = [
    "UniformCoalitions",
    "SizeTilted",
    "FamilyUniform",
    "AdversarialBounded",
    "SizeInterval",
    "family_uniform",
    "adversarial_bounded",
    "lambda_of",
    "mean_size",
    "bartlett_bounds",
    "delta_bound",
    "size_interval",
    "mean_size_bounds",
]


def _as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        # Exact: every float is a dyadic rational.
        return Fraction(x)
    raise TypeError(f"cannot interpret {x!r} as an exact rational")


def _uniform_subset_mask(rng, n: int, s: int) -> int:
    """Uniform s-subset of [0, n) by partial Fisher-Yates; consumes randrange only."""
    idx = list(range(n))
    mask = 0
    for k in range(s):
        j = rng.randrange(k, n)
        idx[k], idx[j] = idx[j], idx[k]
        mask |= 1 << idx[k]
    return mask


class UniformCoalitions:
    """Uniform distribution over all 2^n - 1 non-empty coalitions."""

    __slots__ = ("n", "total")

    def __init__(self, n: int):
        if n < 1:
            raise ValueError("need at least one agent")
        self.n = n
        self.total = (1 << n) - 1

    def sample(self, rng) -> Coalition:
        return Coalition(rng.randrange(1, 1 << self.n))

    def point_mass(self, coalition: Coalition) -> Fraction:
        if coalition.size == 0 or coalition.mask >> self.n:
            return Fraction(0)
        return Fraction(1, self.total)

    def unit_mass_of_size(self, s: int) -> Fraction:
        return Fraction(1, self.total)

    def lambda_bound(self) -> Fraction:
        return Fraction(1)

    def size_pmf(self) -> tuple[Fraction, ...]:
        """Mass of each size, indexed 1..n at positions 1..n (index 0 unused)."""
        return (Fraction(0),) + tuple(
            Fraction(comb(self.n, s), self.total) for s in range(1, self.n + 1)
        )

    def spec(self) -> dict:
        return {"kind": "uniform"}

    def __repr__(self) -> str:
        return f"UniformCoalitions(n={self.n})"


class SizeTilted:
    """P(S) proportional to a strictly positive per-size weight g(|S|).

    A size s is drawn with probability g(s)*C(n, s)/Z, then a uniform
    s-subset is drawn. Size selection uses exact integer cumulative weights
    over a common denominator, so no mass is lost to rounding.
    """

    __slots__ = ("n", "g", "_z", "_cum", "_total")

    def __init__(self, n: int, size_weights: Sequence):
        if len(size_weights) != n:
            raise ValueError(f"expected {n} size weights, got {len(size_weights)}")
        g = tuple(_as_fraction(w) for w in size_weights)
        if any(w <= 0 for w in g):
            raise ValueError("all size weights must be strictly positive")
        self.n = n
        self.g = g
        weights = [g[s - 1] * comb(n, s) for s in range(1, n + 1)]
        self._z = sum(weights, Fraction(0))
        den = math.lcm(*(w.denominator for w in weights))
        ints = [w.numerator * (den // w.denominator) for w in weights]
        cum = []
        acc = 0
        for w in ints:
            acc += w
            cum.append(acc)
        self._cum = cum
        self._total = acc

    def sample(self, rng) -> Coalition:
        k = rng.randrange(self._total)
        s = bisect_right(self._cum, k) + 1
        return Coalition(_uniform_subset_mask(rng, self.n, s))

    def point_mass(self, coalition: Coalition) -> Fraction:
        if coalition.size == 0 or coalition.mask >> self.n:
            return Fraction(0)
        return self.g[coalition.size - 1] / self._z

    def unit_mass_of_size(self, s: int) -> Fraction:
        return self.g[s - 1] / self._z

    def lambda_bound(self) -> Fraction:
        return max(self.g) / min(self.g)

    def size_pmf(self) -> tuple[Fraction, ...]:
        return (Fraction(0),) + tuple(
            self.g[s - 1] * comb(self.n, s) / self._z for s in range(1, self.n + 1)
        )

    def spec(self) -> dict:
        weights = [
            w.numerator if w.denominator == 1 else float(w) for w in self.g
        ]
        return {"kind": "size_tilted", "g": weights}

    def __repr__(self) -> str:
        return f"SizeTilted(n={self.n}, lambda={float(self.lambda_bound()):g})"


class FamilyUniform:
    """Uniform distribution over an explicit list of coalitions.

    Coalitions outside the support have zero mass, so no finite point-mass
    ratio bounds this distribution; ``lambda_bound`` refuses accordingly.
    """

    __slots__ = ("n", "support", "_mask_set")

    def __init__(self, support: Iterable, n: int | None = None):
        coalitions = tuple(
            c if isinstance(c, Coalition) else Coalition.from_members(c) for c in support
        )
        if not coalitions:
            raise ValueError("support must be non-empty")
        if any(c.size == 0 for c in coalitions):
            raise ValueError("support coalitions must be non-empty")
        masks = [c.mask for c in coalitions]
        if len(set(masks)) != len(masks):
            raise ValueError("support contains duplicate coalitions")
        if n is not None and any(m >> n for m in masks):
            raise ValueError(f"support references agents outside [0, {n})")
        self.support = coalitions
        self._mask_set = frozenset(masks)
        self.n = n if n is not None else max(m.bit_length() for m in masks)

    def sample(self, rng) -> Coalition:
        return self.support[rng.randrange(len(self.support))]

    def point_mass(self, coalition: Coalition) -> Fraction:
        if coalition.mask in self._mask_set:
            return Fraction(1, len(self.support))
        return Fraction(0)

    def lambda_bound(self) -> Fraction:
        raise UnboundedLambdaError(
            "a family-uniform distribution puts zero mass off its support; "
            "no finite point-mass ratio bounds it"
        )

    def size_pmf(self) -> tuple[Fraction, ...]:
        counts = [0] * (self.n + 1)
        for c in self.support:
            counts[c.size] += 1
        k = len(self.support)
        return tuple(Fraction(c, k) for c in counts)

    def spec(self) -> dict:
        return {
            "kind": "family",
            "support": [[i + 1 for i in c.members()] for c in self.support],
        }

    def __repr__(self) -> str:
        return f"FamilyUniform(n={self.n}, support_size={len(self.support)})"


class AdversarialBounded:
    """Two-level distribution: mass p on an explicit family, p/lambda off it.

    p solves |F|*p + (2^n - 1 - |F|)*p/lambda = 1 exactly, i.e.
    p = lambda / (|F|*(lambda - 1) + 2^n - 1), so each family coalition is
    exactly ``lambda`` times more likely than each coalition outside it.
    Sampling never enumerates 2^n subsets: a Bernoulli choice picks the
    family or its complement by exact mass, then a uniform member within.
    """

    __slots__ = ("n", "family", "lam", "p", "_mask_set", "_branch_num", "_branch_den")

    def __init__(self, family: Iterable, n: int, lam):
        lam = _as_fraction(lam)
        if lam < 1:
            raise ValueError("ratio bound must be >= 1")
        coalitions = tuple(
            c if isinstance(c, Coalition) else Coalition.from_members(c) for c in family
        )
        if any(c.size == 0 for c in coalitions):
            raise ValueError("family coalitions must be non-empty")
        full = (1 << n) - 1
        if any(c.mask & ~full for c in coalitions):
            raise ValueError(f"family references agents outside [0, {n})")
        masks = [c.mask for c in coalitions]
        if len(set(masks)) != len(masks):
            raise ValueError("family contains duplicate coalitions")
        self.n = n
        self.family = coalitions
        self.lam = lam
        total = full
        f = len(coalitions)
        self.p = lam / (f * (lam - 1) + total)
        self._mask_set = frozenset(masks)
        family_mass = f * self.p
        self._branch_num = family_mass.numerator
        self._branch_den = family_mass.denominator

    def sample(self, rng) -> Coalition:
        if self.family and rng.randrange(self._branch_den) < self._branch_num:
            return self.family[rng.randrange(len(self.family))]
        while True:
            mask = rng.randrange(1, 1 << self.n)
            if mask not in self._mask_set:
                return Coalition(mask)

    def point_mass(self, coalition: Coalition) -> Fraction:
        if coalition.size == 0 or coalition.mask >> self.n:
            return Fraction(0)
        if coalition.mask in self._mask_set:
            return self.p
        return self.p / self.lam

    def lambda_bound(self) -> Fraction:
        f = len(self.family)
        if f == 0 or f == (1 << self.n) - 1:
            return Fraction(1)
        return self.lam

    def size_pmf(self) -> tuple[Fraction, ...]:
        in_family = [0] * (self.n + 1)
        for c in self.family:
            in_family[c.size] += 1
        pmf = [Fraction(0)]
        for s in range(1, self.n + 1):
            pmf.append(
                in_family[s] * self.p + (comb(self.n, s) - in_family[s]) * self.p / self.lam
            )
        return tuple(pmf)

    def spec(self) -> dict:
        lam = self.lam
        return {
            "kind": "adversarial",
            "family": [[i + 1 for i in c.members()] for c in self.family],
            "lambda": lam.numerator if lam.denominator == 1 else float(lam),
        }

    def __repr__(self) -> str:
        return (
            f"AdversarialBounded(n={self.n}, family_size={len(self.family)}, "
            f"lambda={float(self.lam):g})"
        )


def family_uniform(support: Iterable, n: int | None = None) -> FamilyUniform:
    """Uniform distribution over an explicit, duplicate-free coalition list."""
    return FamilyUniform(support, n=n)


def adversarial_bounded(family: Iterable, n: int, lam) -> AdversarialBounded:
    """Ratio-bounded distribution concentrating on ``family``; see the class."""
    return AdversarialBounded(family, n, lam)


def lambda_of(dist) -> Fraction:
    """Exact max/min point-mass ratio of ``dist``; raises if it has none."""
    return dist.lambda_bound()


def mean_size(dist) -> Fraction:
    """Exact expected coalition size under ``dist``."""
    pmf = dist.size_pmf()
    return sum((s * pmf[s] for s in range(1, len(pmf))), Fraction(0))


def bartlett_bounds(a, lam):
    """Sandwich on the mass of a family covering an ``a`` fraction of the space.

    For a distribution whose point-mass ratios are bounded by ``lam``, a
    family containing ``a * 2^n`` of the 2^n subsets has mass between
    a/(a + lam*(1-a)) and lam*a/(lam*a + 1 - a). With lam = 1 both ends
    collapse to ``a``. Exact when called with Fractions, float otherwise.
    """
    if not 0 <= a <= 1:
        raise ValueError("family fraction must lie in [0, 1]")
    if lam < 1:
        raise ValueError("ratio bound must be >= 1")
    lo = a / (a + lam * (1 - a))
    hi = lam * a / (lam * a + 1 - a)
    return lo, hi


def delta_bound(lam, eps: float, n: int) -> float:
    """Relative half-width of the size window capturing all but eps/2 mass."""
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    if lam < 1:
        raise ValueError("ratio bound must be >= 1")
    return math.sqrt(3 * (lam + 1) * math.log(4 / eps) / n)


@dataclass(frozen=True)
class SizeInterval:
    """An open real interval (lo, hi) together with the integer coalition
    sizes from [1, n] strictly inside it."""

    lo: float
    hi: float
    sizes: tuple[int, ...]

    def __contains__(self, s: int) -> bool:
        return s in self.sizes

    def __len__(self) -> int:
        return len(self.sizes)


def size_interval(mu, lam, eps: float, n: int) -> SizeInterval:
    """The open window ((1-delta)*mu, (1+delta)*mu) around the mean size.

    A coalition drawn from any distribution with point-mass ratios bounded by
    ``lam`` and mean size ``mu`` has size inside this window with probability
    at least 1 - eps/2.
    """
    delta = delta_bound(lam, eps, n)
    lo = (1 - delta) * mu
    hi = (1 + delta) * mu
    sizes = tuple(s for s in range(1, n + 1) if lo < s < hi)
    return SizeInterval(float(lo), float(hi), sizes)


def mean_size_bounds(n: int, lam) -> tuple[Fraction, Fraction]:
    """Exact bounds (n/(lam+1), lam*n/(lam+1)) on the mean coalition size."""
    lam = _as_fraction(lam)
    if lam < 1:
        raise ValueError("ratio bound must be >= 1")
    return Fraction(n) / (lam + 1), lam * n / (lam + 1)
