import math
import random
from fractions import Fraction

import pytest

from epsfc import (
    AnonymousHG,
    Coalition,
    GuardError,
    Partition,
    SimpleFHG,
    SizeTilted,
    UniformCoalitions,
    adversarial_bounded,
    audit_green_anonymous,
    bartlett_bounds,
    blocks,
    certify_empty_core,
    check_single_peaked,
    check_sp_lemmas,
    exact_blocking,
    exact_blocking_mass,
    family_uniform,
    find_core_stable_partition,
    gr_decomposition,
    has_blocker,
    iter_set_partitions,
    mc_blocking,
    mean_size,
    size_interval,
    stabilize_anonymous,
    stabilize_fhg,
    stabilize_single_peaked,
)
from epsfc.verification import blocker_predicate, partition_from_assignment
from oracles import (
    anon_blocking_count_closed_form,
    naive_anon_blocking_count,
    naive_fhg_blocking_count,
)
from epsfc.instances import random_anon, random_anon_sp, random_fhg, random_partition


def complete_digraph(n):
    return SimpleFHG.from_matrix([[1 if i != j else 0 for j in range(n)] for i in range(n)])


class TestExactBlocking:
    def test_grand_coalition_of_complete_graph(self):
        g = complete_digraph(6)
        report = exact_blocking(g, Partition.grand(6))
        assert report.blocking_count == 0
        assert report.fraction == 0

    def test_mutual_pair_vs_singletons(self):
        g = SimpleFHG.from_matrix([[0, 1], [1, 0]])
        report = exact_blocking(g, Partition.singletons(2))
        assert report.total_coalitions == 3
        assert report.blocking_count == 1
        assert report.fraction == Fraction(1, 3)
        assert report.witnesses == (Coalition.of(0, 1),)

    @pytest.mark.parametrize("seed", range(6))
    def test_fhg_matches_naive_oracle(self, seed):
        rng = random.Random(seed)
        n = rng.randrange(5, 10)
        g = random_fhg(n, rng.choice([0.2, 0.5, 0.8]), rng.getrandbits(32))
        p = random_partition(n, rng.getrandbits(32))
        report = exact_blocking(g, p)
        naive = naive_fhg_blocking_count(
            g.matrix(), [sorted(b.members()) for b in p.blocks]
        )
        assert report.blocking_count == naive
        assert report.fraction == Fraction(naive, 2**n - 1)

    @pytest.mark.parametrize("seed", range(6))
    def test_anon_matches_naive_and_closed_form(self, seed):
        rng = random.Random(100 + seed)
        n = rng.randrange(5, 10)
        g = random_anon(n, rng.getrandbits(32))
        p = random_partition(n, rng.getrandbits(32))
        report = exact_blocking(g, p)
        block_lists = [sorted(b.members()) for b in p.blocks]
        assert report.blocking_count == naive_anon_blocking_count(g.table(), block_lists)
        assert report.blocking_count == anon_blocking_count_closed_form(
            g.table(), block_lists
        )

    def test_incremental_census_matches_direct_predicate_scan(self):
        # the Gray-code sweep and the stateless predicate must agree mask-by-mask
        rng = random.Random(8)
        for game_maker in (
            lambda: random_fhg(8, rng.uniform(0.2, 0.8), rng.getrandbits(32)),
            lambda: random_anon(8, rng.getrandbits(32)),
        ):
            for _ in range(5):
                g = game_maker()
                p = random_partition(8, rng.getrandbits(32))
                pred = blocker_predicate(g, p)
                direct = sum(1 for m in range(1, 1 << 8) if pred(m))
                assert exact_blocking(g, p).blocking_count == direct

    def test_by_size_totals(self):
        g = random_fhg(8, 0.5, 5)
        p = Partition.singletons(8)
        report = exact_blocking(g, p)
        assert sum(report.blocking_by_size) == report.blocking_count
        # every witness actually blocks
        for w in report.witnesses:
            assert blocks(g, w, p)

    def test_witness_cap(self):
        g = SimpleFHG.from_matrix(
            [[1 if i != j else 0 for j in range(10)] for i in range(10)]
        )
        report = exact_blocking(g, Partition.singletons(10), witness_cap=7)
        assert len(report.witnesses) == 7
        assert report.blocking_count > 7

    def test_guard(self, monkeypatch):
        monkeypatch.setenv("EPSFC_MAX_N", "6")
        g = random_fhg(7, 0.5, 1)
        with pytest.raises(GuardError):
            exact_blocking(g, Partition.singletons(7))


class TestBlockingMass:
    def test_uniform_mass_equals_fraction(self):
        g = random_fhg(9, 0.4, 11)
        p = random_partition(9, 3)
        report = exact_blocking(g, p, dist=UniformCoalitions(9))
        assert report.mass == report.fraction

    def test_constant_tilt_equals_fraction(self):
        g = random_anon(7, 2)
        p = random_partition(7, 5)
        d = SizeTilted(7, [3] * 7)
        assert exact_blocking_mass(g, p, d) == exact_blocking(g, p).fraction

    def test_tilted_mass_from_point_masses(self):
        g = random_fhg(7, 0.5, 9)
        p = random_partition(7, 7)
        d = SizeTilted(7, [1, 2, 3, 4, 3, 2, 1])
        pred = blocker_predicate(g, p)
        brute = sum(
            (d.point_mass(Coalition(m)) for m in range(1, 1 << 7) if pred(m)),
            Fraction(0),
        )
        assert exact_blocking_mass(g, p, d) == brute

    def test_family_mass(self):
        g = SimpleFHG.from_matrix([[0, 1], [1, 0]])
        p = Partition.singletons(2)
        d = family_uniform([Coalition.of(0, 1), Coalition.of(0)], n=2)
        assert exact_blocking_mass(g, p, d) == Fraction(1, 2)

    def test_adversarial_mass_from_point_masses(self):
        g = random_anon(6, 8)
        p = random_partition(6, 9)
        fam = [Coalition(m) for m in range(1, 1 << 3)]
        d = adversarial_bounded(fam, 6, 5)
        pred = blocker_predicate(g, p)
        brute = sum(
            (d.point_mass(Coalition(m)) for m in range(1, 1 << 6) if pred(m)),
            Fraction(0),
        )
        assert exact_blocking_mass(g, p, d) == brute


class TestMcBlocking:
    def test_zero_blockers_always_zero(self):
        g = complete_digraph(8)
        est = mc_blocking(g, Partition.grand(8), UniformCoalitions(8), 2000, seed=1)
        assert est.hits == 0 and est.p_hat == 0.0

    def test_halfwidth_scaling(self):
        g = random_fhg(6, 0.5, 3)
        p = Partition.singletons(6)
        d = UniformCoalitions(6)
        a = mc_blocking(g, p, d, 1000, delta=0.05, seed=2)
        b = mc_blocking(g, p, d, 4000, delta=0.05, seed=2)
        assert a.ci_halfwidth == pytest.approx(2 * b.ci_halfwidth)
        assert a.ci_halfwidth == pytest.approx(math.sqrt(math.log(2 / 0.05) / 2000))

    def test_converges_to_exact_mass(self):
        g = random_fhg(10, 0.35, 17)
        p = random_partition(10, 23)
        d = UniformCoalitions(10)
        exact = float(exact_blocking_mass(g, p, d))
        for m in (1000, 10_000, 100_000):
            est = mc_blocking(g, p, d, m, delta=0.01, seed=5)
            assert abs(est.p_hat - exact) <= est.ci_halfwidth

    def test_oracle_callable(self):
        d = UniformCoalitions(5)
        est = mc_blocking(lambda c: c.size == 2, None, d, 5000, seed=9)
        assert est.p_hat == pytest.approx(10 / 31, abs=0.03)

    def test_seeded_determinism(self):
        g = random_anon(7, 1)
        p = random_partition(7, 1)
        d = UniformCoalitions(7)
        assert mc_blocking(g, p, d, 500, seed=4) == mc_blocking(g, p, d, 500, seed=4)


class TestGreenAudit:
    def test_all_green_when_at_argmax(self):
        row = [0.1, 0.9, 0.5, 0.2]
        g = AnonymousHG([row] * 4)
        p = Partition.from_blocks([[0, 1], [2, 3]], 4)
        assert audit_green_anonymous(g, p, [1, 2, 3]) == [0, 1, 2, 3]

    def test_singleton_window(self):
        g = random_anon(6, 3)
        p = Partition.from_blocks([[0, 1], [2, 3], [4], [5]], 6)
        green = audit_green_anonymous(g, p, [2])
        assert green == [i for i in range(6) if p.size_of(i) == 2]

    def test_out_of_window_block_not_green(self):
        row = [1.0, 0.5, 0.2]
        g = AnonymousHG([row] * 3)
        p = Partition.grand(3)
        assert audit_green_anonymous(g, p, [1, 2]) == []

    def test_construction_green_count_matches_trace(self):
        rng = random.Random(31)
        for _ in range(15):
            n = rng.randrange(5, 12)
            g = random_anon(n, rng.getrandbits(32))
            sizes = sorted(rng.sample(range(1, n + 1), rng.randrange(2, min(6, n + 1))))
            partition, trace = stabilize_anonymous(g, sizes)
            assert tuple(audit_green_anonymous(g, partition, sizes)) == trace.green_agents


class TestSpLemmas:
    def _window(self, n):
        d = UniformCoalitions(n)
        return size_interval(float(mean_size(d)), 1, 0.1, n)

    @pytest.mark.parametrize("seed", range(5))
    def test_construction_passes(self, seed):
        n = 10
        g, cert = random_anon_sp(n, 400 + seed)
        window = self._window(n)
        partition, trace = stabilize_single_peaked(g, cert, window)
        report = check_sp_lemmas(g, partition, window, trace)
        assert report.ok
        assert report.blockers_in_window <= report.window_bound

    def test_corrupted_partition_reports_witness(self):
        n = 8
        g, cert = random_anon_sp(n, 77)
        window = self._window(n)
        partition, trace = stabilize_single_peaked(g, cert, window)
        # swap one at-peak agent into the remainder-most block
        if trace.at_in_star and len(partition.blocks) > 1:
            a = trace.at_in_star[0]
            other = next(
                b for b in partition.blocks if a not in b
            )
            b_agent = other.members()[0]
            swapped = []
            for blk in partition.blocks:
                ms = set(blk.members())
                if a in ms:
                    ms = ms - {a} | {b_agent}
                elif b_agent in ms:
                    ms = ms - {b_agent} | {a}
                swapped.append(sorted(ms))
            corrupted = Partition.from_blocks(swapped, n)
            report = check_sp_lemmas(g, corrupted, window, trace)
            if not report.ok:
                assert report.at_peak_violations or report.mixing_violations

    def test_uniform_peaks_no_window_blockers(self):
        row = [0.2, 1.0, 0.6, 0.3, 0.1]
        g = AnonymousHG([row] * 5)
        cert = check_single_peaked(g)
        partition, trace = stabilize_single_peaked(g, cert, [2])
        report = check_sp_lemmas(g, partition, [2], trace)
        assert report.ok
        assert report.blockers_in_window == 0


class TestEmptyCore:
    def test_complete_graph_not_empty(self):
        assert not certify_empty_core(complete_digraph(6))

    def test_universal_peak_grand_stable(self):
        g = AnonymousHG([[float(s) for s in range(1, 6)] for _ in range(5)])
        assert not certify_empty_core(g)
        assert find_core_stable_partition(g) == Partition.grand(5)

    def test_fast_sweep_matches_generic(self):
        rng = random.Random(55)
        for _ in range(40):
            n = rng.randrange(4, 7)
            g = random_anon(n, rng.getrandbits(32))
            fast = find_core_stable_partition(g)
            generic = None
            for assignment in iter_set_partitions(n):
                p = partition_from_assignment(assignment, n)
                if not has_blocker(g, p):
                    generic = p
                    break
            assert (fast is None) == (generic is None)
            if fast is not None:
                assert fast == generic

    def test_has_blocker_matches_enumeration(self):
        rng = random.Random(66)
        for _ in range(30):
            n = rng.randrange(4, 8)
            g = random_anon(n, rng.getrandbits(32))
            p = random_partition(n, rng.getrandbits(32))
            pred = blocker_predicate(g, p)
            direct = any(pred(m) for m in range(1, 1 << n))
            assert has_blocker(g, p) == direct

    def test_zero_fraction_iff_core_stable(self):
        rng = random.Random(71)
        for _ in range(20):
            n = rng.randrange(4, 8)
            g = random_fhg(n, rng.random(), rng.getrandbits(32))
            p = random_partition(n, rng.getrandbits(32))
            assert (exact_blocking(g, p).fraction == 0) == (not has_blocker(g, p))

    def test_bell_guard(self, monkeypatch):
        monkeypatch.setenv("EPSFC_MAX_N", "5")
        with pytest.raises(GuardError):
            certify_empty_core(random_anon(6, 1))


class TestSetPartitions:
    def test_bell_counts(self):
        bell = [1, 1, 2, 5, 15, 52, 203, 877, 4140, 21147]
        for n in range(1, 10):
            assert sum(1 for _ in iter_set_partitions(n)) == bell[n]

    def test_assignments_are_restricted_growth(self):
        for a in iter_set_partitions(5):
            assert a[0] == 0
            for k in range(1, 5):
                assert 0 <= a[k] <= max(a[:k]) + 1

    def test_all_distinct(self):
        seen = {tuple(a) for a in iter_set_partitions(6)}
        assert len(seen) == 203


class TestGrDecomposition:
    def test_identity_and_bound(self):
        rng = random.Random(14)
        sizes = [rng.randrange(6, 12) for _ in range(9)] + [20]
        for n in sizes:
            g = random_fhg(n, rng.uniform(0.2, 0.8), rng.getrandbits(32))
            partition, trace = stabilize_fhg(g)
            dec = gr_decomposition(g, partition, trace.gr)
            report = exact_blocking(g, partition)
            total = dec.total_coalitions
            # decomposition identity
            assert dec.blockers == report.blocking_count
            # closed form for the avoiding count
            gsz = len(trace.gr)
            assert dec.avoiding_gr == 2 ** (n - gsz) - 1
            # the bound the decomposition certifies
            assert report.fraction <= Fraction(dec.avoiding_gr, total) + Fraction(
                dec.blockers_meeting, total
            )

    def test_lemma7_style_bound(self):
        # blocking mass <= P(size outside window) + ratio-bound tail at 2^-greens
        rng = random.Random(21)
        for _ in range(10):
            n = rng.randrange(8, 13)
            g = random_anon(n, rng.getrandbits(32))
            d = UniformCoalitions(n)
            window = size_interval(float(mean_size(d)), 1, 0.2, n)
            partition, trace = stabilize_anonymous(g, window)
            green = audit_green_anonymous(g, partition, window)
            mass = exact_blocking_mass(g, partition, d)
            pmf = d.size_pmf()
            outside = sum(
                (pmf[s] for s in range(1, n + 1) if s not in window), Fraction(0)
            )
            _, hi = bartlett_bounds(Fraction(1, 2 ** len(green)), Fraction(1))
            assert mass <= outside + hi
