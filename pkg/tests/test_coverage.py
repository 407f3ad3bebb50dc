"""Tests for edge coverage accounting and corpus minimization.

Covers:
- Hit-count bucket quantization boundaries
- EdgeTrace construction and validation
- Coverage map accumulation and novelty deltas
- Relative coverage improvement arithmetic
- Greedy corpus minimization against a brute-force reference
"""

from __future__ import annotations

from random import Random

import pytest

from llmfuzz.coverage import (
    BUCKET_VALUES,
    MAP_SIZE,
    CminEntry,
    CoverageDelta,
    CoverageMap,
    EdgeTrace,
    accumulate,
    bucketize,
    cmin_select,
    coverage_improvement,
)
from llmfuzz.errors import UndefinedBaseline


def greedy_reference(entries: list[CminEntry]) -> list[CminEntry]:
    """Independent reimplementation of the minimization policy.

    Visit candidates in descending distinct-edge-count order, ties
    broken by seed id; keep crash-flagged entries unconditionally and
    any entry contributing an uncovered (edge, bucket) pair.
    """
    ordered = sorted(entries, key=lambda e: (-len(e.trace.hits), e.seed_id))
    covered: set[tuple[int, int]] = set()
    kept = []
    for entry in ordered:
        pairs = set(entry.trace.bucketed().items())
        if entry.keep_always or not pairs <= covered:
            kept.append(entry)
            covered |= pairs
    return kept


def pair_union(entries: list[CminEntry]) -> set[tuple[int, int]]:
    """All (edge, bucket) pairs present across a corpus."""
    pairs: set[tuple[int, int]] = set()
    for entry in entries:
        pairs |= set(entry.trace.bucketed().items())
    return pairs


class TestBucketize:
    """Tests for hit-count bucket quantization."""

    def test_boundary_table(self) -> None:
        """Each count range maps onto its expected bucket value."""
        expected = {
            1: 1,
            2: 2,
            3: 3,
            4: 4,
            5: 4,
            7: 4,
            8: 8,
            15: 8,
            16: 16,
            31: 16,
            32: 32,
            127: 32,
            128: 128,
            255: 128,
            100000: 128,
        }
        for count, bucket in expected.items():
            assert bucketize(count) == bucket

    def test_values_are_the_published_ladder(self) -> None:
        """Bucket values follow the classic greybox 8-step ladder."""
        assert BUCKET_VALUES == (1, 2, 3, 4, 8, 16, 32, 128)

    def test_rejects_non_positive_counts(self) -> None:
        """Zero and negative hit counts are contract violations."""
        with pytest.raises(ValueError):
            bucketize(0)
        with pytest.raises(ValueError):
            bucketize(-3)

    def test_every_output_is_a_bucket_value(self) -> None:
        """Random counts always land on a value from the ladder."""
        rng = Random(11)
        for _ in range(500):
            assert bucketize(rng.randrange(1, 1 << 20)) in BUCKET_VALUES


class TestEdgeTrace:
    """Tests for the raw execution trace container."""

    def test_bucketed_quantizes_each_edge(self) -> None:
        """bucketed() applies the ladder per edge."""
        trace = EdgeTrace({0: 1, 7: 5, 42: 200})
        assert trace.bucketed() == {0: 1, 7: 4, 42: 128}

    def test_edge_ids(self) -> None:
        """edge_ids() reports the distinct edges regardless of counts."""
        trace = EdgeTrace({3: 9, 1: 1})
        assert trace.edge_ids() == frozenset({1, 3})

    def test_empty_trace_rejected(self) -> None:
        """Traces always carry at least one edge."""
        with pytest.raises(ValueError):
            EdgeTrace({})

    def test_out_of_range_edge_rejected(self) -> None:
        """Edge ids live inside the fixed-size map."""
        with pytest.raises(ValueError):
            EdgeTrace({MAP_SIZE: 1})
        with pytest.raises(ValueError):
            EdgeTrace({-1: 1})

    def test_non_positive_count_rejected(self) -> None:
        """Hit counts are strictly positive."""
        with pytest.raises(ValueError):
            EdgeTrace({5: 0})


class TestAccumulate:
    """Tests for folding traces into a coverage map."""

    def test_fresh_trace_counts_everything(self) -> None:
        """All edges of the first trace are new."""
        cov = CoverageMap()
        delta = accumulate(cov, EdgeTrace({1: 1, 2: 5}))
        assert delta.new_edges == 2
        assert delta.new_buckets == 2
        assert delta.interesting

    def test_replay_adds_nothing(self) -> None:
        """Folding an identical trace twice yields a null delta."""
        cov = CoverageMap()
        trace = EdgeTrace({10: 3, 20: 1})
        accumulate(cov, trace)
        delta = accumulate(cov, trace)
        assert delta.new_edges == 0
        assert delta.new_buckets == 0
        assert not delta.interesting

    def test_bucket_escalation_is_interesting(self) -> None:
        """A known edge in a new count bucket still registers."""
        cov = CoverageMap()
        accumulate(cov, EdgeTrace({10: 1}))
        delta = accumulate(cov, EdgeTrace({10: 100}))
        assert delta.new_edges == 0
        assert delta.new_buckets == 1
        assert delta.interesting

    def test_map_statistics(self) -> None:
        """edge_count / pair_count / membership reflect what was folded."""
        cov = CoverageMap()
        accumulate(cov, EdgeTrace({10: 1, 11: 1}))
        accumulate(cov, EdgeTrace({10: 100}))
        assert cov.edge_count == 2
        assert cov.pair_count == 3
        assert (10, 1) in cov
        assert (10, 32) in cov
        assert (10, 2) not in cov
        assert (12, 1) not in cov
        assert cov.edge_ids() == frozenset({10, 11})

    def test_random_replay_property(self) -> None:
        """Any already-folded trace replays to a null delta."""
        rng = Random(99)
        for _ in range(50):
            cov = CoverageMap()
            hits = {rng.randrange(MAP_SIZE): rng.randrange(1, 300) for _ in range(rng.randrange(1, 12))}
            trace = EdgeTrace(hits)
            first = accumulate(cov, trace)
            again = accumulate(cov, trace)
            assert first.interesting
            assert not again.interesting


class TestCoverageImprovement:
    """Tests for the relative edge-growth metric."""

    def test_published_growth_figure(self) -> None:
        """7687 -> 9555 edges grows by (9555-7687)/7687 = 24.30%."""
        value = coverage_improvement(7687, 9555)
        assert abs(value - 0.2430) < 0.0001

    def test_small_growth_figure(self) -> None:
        """6339 -> 6408 edges is a 1.09% improvement."""
        value = coverage_improvement(6339, 6408)
        assert abs(value - 0.0109) < 0.0001

    def test_shrinking_map_goes_negative(self) -> None:
        """A smaller final map yields a negative value, not a clamp."""
        assert coverage_improvement(100, 50) == -0.5

    def test_zero_baseline_is_undefined(self) -> None:
        """Improvement over an empty map has no defined value."""
        with pytest.raises(UndefinedBaseline):
            coverage_improvement(0, 10)

    def test_negative_counts_rejected(self) -> None:
        """Edge counts can never be negative."""
        with pytest.raises(ValueError):
            coverage_improvement(-1, 10)
        with pytest.raises(ValueError):
            coverage_improvement(10, -1)


class TestCminSelect:
    """Tests for greedy corpus minimization."""

    def test_subset_seed_dropped(self) -> None:
        """A seed wholly covered by a larger one is removed."""
        big = CminEntry("id:000001", EdgeTrace({1: 1, 2: 1, 3: 1}))
        small = CminEntry("id:000002", EdgeTrace({2: 1}))
        kept = cmin_select([small, big])
        assert [e.seed_id for e in kept] == ["id:000001"]

    def test_crash_seed_always_survives(self) -> None:
        """keep_always entries stay even with zero novel coverage."""
        big = CminEntry("id:000001", EdgeTrace({1: 1, 2: 1}))
        crash = CminEntry("id:000002", EdgeTrace({1: 1}), keep_always=True)
        kept = cmin_select([big, crash])
        assert {e.seed_id for e in kept} == {"id:000001", "id:000002"}

    def test_tie_broken_by_seed_id(self) -> None:
        """Equal-size candidates are visited in lexicographic order."""
        a = CminEntry("id:000002", EdgeTrace({1: 1}))
        b = CminEntry("id:000001", EdgeTrace({2: 1}))
        kept = cmin_select([a, b])
        assert [e.seed_id for e in kept] == ["id:000001", "id:000002"]

    def test_bucket_difference_keeps_both(self) -> None:
        """Same edge in different count buckets is novel coverage."""
        cold = CminEntry("id:000001", EdgeTrace({1: 1, 2: 1}))
        hot = CminEntry("id:000002", EdgeTrace({1: 100}))
        kept = cmin_select([cold, hot])
        assert {e.seed_id for e in kept} == {"id:000001", "id:000002"}

    def test_empty_corpus(self) -> None:
        """Minimizing nothing yields nothing."""
        assert cmin_select([]) == []

    def test_matches_greedy_reference_on_random_corpora(self) -> None:
        """Output equals the brute-force reference on 100 random corpora."""
        rng = Random(4242)
        for _ in range(100):
            entries = []
            for idx in range(rng.randrange(1, 11)):
                hits = {
                    rng.randrange(40): rng.choice((1, 2, 5, 40, 200))
                    for _ in range(rng.randrange(1, 8))
                }
                entries.append(
                    CminEntry(
                        seed_id=f"id:{idx:06d}",
                        trace=EdgeTrace(hits),
                        keep_always=rng.random() < 0.1,
                    )
                )
            kept = cmin_select(entries)
            reference = greedy_reference(entries)
            assert [e.seed_id for e in kept] == [e.seed_id for e in reference]
            assert pair_union(kept) == pair_union(entries)

    def test_deterministic(self) -> None:
        """Same corpus in, same selection out."""
        rng = Random(7)
        entries = [
            CminEntry(f"id:{i:06d}", EdgeTrace({rng.randrange(20): 1 for _ in range(3)} or {0: 1}))
            for i in range(8)
        ]
        first = [e.seed_id for e in cmin_select(entries)]
        second = [e.seed_id for e in cmin_select(entries)]
        assert first == second
