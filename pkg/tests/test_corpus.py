"""Tests for seed storage, queue naming, and the seed pool.

Covers:
- Content digests and duplicate suppression
- Queue and chat-candidate file naming round trips
- Atomic writes and directory reads
- Pool admission, selection, persistence, and the import scan
- Queue statistics and the import-ratio metric
"""

from __future__ import annotations

from pathlib import Path
from random import Random

import pytest

from llmfuzz.corpus import (
    QueueStats,
    Seed,
    SeedOrigin,
    SeedPool,
    ai_candidate_name,
    atomic_write,
    import_ratio,
    load_pool,
    parse_ai_name,
    parse_queue_name,
    queue_entry_name,
    read_corpus_dir,
    seed_digest,
)
from llmfuzz.coverage import CoverageDelta, EdgeTrace, accumulate
from llmfuzz.errors import EmptyPool, UndefinedRatio
from llmfuzz.harness import Verdict
from llmfuzz.targets import SAMPLE_INPUTS, get_target

from conftest import build_pool

NEW = CoverageDelta(new_edges=1, new_buckets=1)
STALE = CoverageDelta(new_edges=0, new_buckets=0)


class TestSeedDigest:
    """Tests for content digests."""

    def test_known_sha256(self) -> None:
        """The digest is plain sha256 hex."""
        assert seed_digest(b"hello") == (
            "2cf24dba5fb0a30e26e83b2ac5b9e29e1b161e5c1fa7425e73043362938b9824"
        )

    def test_distinct_content_distinct_digest(self) -> None:
        """Different bytes give different digests."""
        assert seed_digest(b"a") != seed_digest(b"b")


class TestQueueNaming:
    """Tests for queue entry file names."""

    def test_initial_seed_name(self) -> None:
        """Seeds without a parent use the none marker."""
        assert queue_entry_name(0, None, SeedOrigin.INITIAL) == "id:000000,src:none,origin:initial"

    def test_child_seed_name(self) -> None:
        """Derived seeds carry their parent id."""
        assert queue_entry_name(17, 3, SeedOrigin.FUZZER) == "id:000017,src:000003,origin:fuzzer"

    def test_round_trip(self) -> None:
        """parse inverts format for every origin."""
        for origin in SeedOrigin:
            for parent in (None, 0, 999999):
                name = queue_entry_name(42, parent, origin)
                assert parse_queue_name(name) == (42, parent, origin)

    def test_foreign_name_rejected(self) -> None:
        """Files not named by this module raise ValueError."""
        with pytest.raises(ValueError):
            parse_queue_name("random-file.txt")
        with pytest.raises(ValueError):
            parse_queue_name("id:1,src:none,origin:initial")


class TestAiNaming:
    """Tests for chat-candidate file names."""

    def test_name_format(self) -> None:
        """Candidate names carry sequence, source, and temperature."""
        assert ai_candidate_name(5, 12, 1.5) == "ai:00000005,src:000012,t:1.50"

    def test_round_trip(self) -> None:
        """parse inverts format across a range of values."""
        rng = Random(8)
        for _ in range(100):
            cid = rng.randrange(10**8)
            src = rng.randrange(10**6)
            temp = round(rng.uniform(0, 2), 2)
            assert parse_ai_name(ai_candidate_name(cid, src, temp)) == (cid, src, temp)

    def test_foreign_name_rejected(self) -> None:
        """Queue-style names are not candidate names."""
        with pytest.raises(ValueError):
            parse_ai_name("id:000000,src:none,origin:initial")


class TestAtomicWrite:
    """Tests for crash-safe file writes."""

    def test_content_written(self, tmp_path: Path) -> None:
        """The target file holds exactly the given bytes."""
        path = tmp_path / "entry"
        atomic_write(path, b"payload")
        assert path.read_bytes() == b"payload"

    def test_no_temp_files_left(self, tmp_path: Path) -> None:
        """The scratch file disappears after the rename."""
        atomic_write(tmp_path / "entry", b"x")
        names = [p.name for p in tmp_path.iterdir()]
        assert names == ["entry"]

    def test_overwrite(self, tmp_path: Path) -> None:
        """Writing twice leaves the second payload."""
        path = tmp_path / "entry"
        atomic_write(path, b"one")
        atomic_write(path, b"two")
        assert path.read_bytes() == b"two"


class TestReadCorpusDir:
    """Tests for directory ingestion."""

    def test_sorted_pairs(self, tmp_path: Path) -> None:
        """Files come back as (name, bytes) sorted by name."""
        (tmp_path / "b").write_bytes(b"2")
        (tmp_path / "a").write_bytes(b"1")
        assert read_corpus_dir(tmp_path) == [("a", b"1"), ("b", b"2")]

    def test_hidden_files_skipped(self, tmp_path: Path) -> None:
        """Dotfiles and in-flight temp writes are invisible."""
        (tmp_path / ".tmp-123").write_bytes(b"partial")
        (tmp_path / "real").write_bytes(b"data")
        assert read_corpus_dir(tmp_path) == [("real", b"data")]


class TestPoolAdmission:
    """Tests for seed admission control."""

    def test_interesting_seed_admitted(self) -> None:
        """Novel coverage plus novel content enters the queue."""
        pool = SeedPool()
        seed = pool.add_if_interesting(b"a", SeedOrigin.INITIAL, NEW)
        assert seed is not None
        assert seed.id == 0
        assert len(pool.seeds) == 1

    def test_duplicate_content_rejected(self) -> None:
        """The same bytes never enter twice, whatever the delta says."""
        pool = SeedPool()
        pool.add_if_interesting(b"a", SeedOrigin.INITIAL, NEW)
        assert pool.add_if_interesting(b"a", SeedOrigin.FUZZER, NEW) is None
        assert len(pool.seeds) == 1

    def test_stale_coverage_rejected(self) -> None:
        """No new (edge, bucket) pair means no admission."""
        pool = SeedPool()
        assert pool.add_if_interesting(b"a", SeedOrigin.FUZZER, STALE) is None

    def test_ids_are_dense(self) -> None:
        """Admitted seeds get consecutive ids."""
        pool = SeedPool()
        for i, data in enumerate((b"a", b"b", b"c")):
            seed = pool.add_if_interesting(data, SeedOrigin.FUZZER, NEW)
            assert seed is not None and seed.id == i

    def test_admission_mirrored_to_disk(self, tmp_path: Path) -> None:
        """With an out_dir, queue files appear under queue/."""
        pool = SeedPool(out_dir=tmp_path / "out")
        pool.add_if_interesting(b"a", SeedOrigin.INITIAL, NEW)
        names = [p.name for p in pool.queue_dir.iterdir()]
        assert names == ["id:000000,src:none,origin:initial"]

    def test_crash_dedup_and_mirror(self, tmp_path: Path) -> None:
        """Crashes dedup by digest and land under crashes/."""
        pool = SeedPool(out_dir=tmp_path / "out")
        assert pool.add_crash(b"boom", SeedOrigin.FUZZER) is not None
        assert pool.add_crash(b"boom", SeedOrigin.FUZZER) is None
        assert len(list(pool.crashes_dir.iterdir())) == 1


class TestPoolSelection:
    """Tests for seed scheduling."""

    def test_pick_random_from_empty_pool(self) -> None:
        """Selection from nothing is an error."""
        with pytest.raises(EmptyPool):
            SeedPool().pick_random(Random(1))
        with pytest.raises(EmptyPool):
            SeedPool().next_round_robin()

    def test_pick_random_is_seeded(self) -> None:
        """The same rng state picks the same seed."""
        pool = SeedPool()
        for data in (b"a", b"b", b"c", b"d"):
            pool.add_if_interesting(data, SeedOrigin.FUZZER, NEW)
        picks_one = [pool.pick_random(Random(5)).id for _ in range(10)]
        picks_two = [pool.pick_random(Random(5)).id for _ in range(10)]
        assert picks_one == picks_two

    def test_round_robin_cycles(self) -> None:
        """Round-robin walks the queue in order and wraps."""
        pool = SeedPool()
        for data in (b"a", b"b", b"c"):
            pool.add_if_interesting(data, SeedOrigin.FUZZER, NEW)
        ids = [pool.next_round_robin().id for _ in range(7)]
        assert ids == [0, 1, 2, 0, 1, 2, 0]

    def test_all_data_matches_queue(self) -> None:
        """all_data exposes seed payloads in admission order."""
        pool = SeedPool()
        for data in (b"a", b"b"):
            pool.add_if_interesting(data, SeedOrigin.FUZZER, NEW)
        assert list(pool.all_data()) == [b"a", b"b"]


class TestPoolPersistence:
    """Tests for saving and reloading a pool."""

    def test_load_pool_round_trip(self, tmp_path: Path) -> None:
        """A reloaded pool reproduces seeds, ids, and coverage."""
        out = tmp_path / "out"
        pool, cov = build_pool("toy-xml", out_dir=out)
        harness = get_target("toy-xml")

        reloaded = load_pool(out, harness)
        assert [s.id for s in reloaded.seeds] == [s.id for s in pool.seeds]
        assert [s.data for s in reloaded.seeds] == [s.data for s in pool.seeds]
        assert reloaded.map.edge_ids() == cov.edge_ids()

    def test_reload_preserves_origins(self, tmp_path: Path) -> None:
        """Seed origins survive the disk round trip."""
        out = tmp_path / "out"
        pool, _ = build_pool("toy-xml", out_dir=out)
        reloaded = load_pool(out, get_target("toy-xml"))
        assert [s.origin for s in reloaded.seeds] == [s.origin for s in pool.seeds]


class TestScanAndImport:
    """Tests for harvesting the chat candidate directory."""

    def test_novel_candidate_imported(self, tmp_path: Path) -> None:
        """A candidate with new coverage joins the queue as ai origin."""
        pool, _ = build_pool("toy-xml", out_dir=tmp_path / "out")
        harness = get_target("toy-xml")
        before = len(pool.seeds)

        pool.save_ai_candidate(b"<fresh><thing>value</thing></fresh>", src_id=0, temperature=1.0)
        admitted = pool.scan_and_import(harness)
        assert admitted == 1
        assert len(pool.seeds) == before + 1
        assert pool.seeds[-1].origin is SeedOrigin.AI

    def test_each_file_considered_once(self, tmp_path: Path) -> None:
        """A second scan does not reprocess already-seen files."""
        pool, _ = build_pool("toy-xml", out_dir=tmp_path / "out")
        harness = get_target("toy-xml")
        pool.save_ai_candidate(b"<fresh><thing>value</thing></fresh>", src_id=0, temperature=1.0)
        assert pool.scan_and_import(harness) == 1
        assert pool.scan_and_import(harness) == 0

    def test_duplicate_candidates_dedup_at_import(self, tmp_path: Path) -> None:
        """Identical payloads yield at most one admission."""
        pool, _ = build_pool("toy-xml", out_dir=tmp_path / "out")
        harness = get_target("toy-xml")
        for _ in range(5):
            pool.save_ai_candidate(b"<fresh><thing>value</thing></fresh>", src_id=0, temperature=1.0)
        assert len(list(pool.ai_queue_dir.iterdir())) == 5
        assert pool.scan_and_import(harness) == 1

    def test_foreign_files_ignored(self, tmp_path: Path) -> None:
        """Files with unknown names are skipped, not imported."""
        pool, _ = build_pool("toy-xml", out_dir=tmp_path / "out")
        (pool.ai_queue_dir / "README").write_bytes(b"<a/>")
        assert pool.scan_and_import(get_target("toy-xml")) == 0

    def test_crashing_candidate_recorded(self, tmp_path: Path) -> None:
        """A candidate that crashes the target lands in crashes/."""
        pool, _ = build_pool("toy-script", out_dir=tmp_path / "out")
        harness = get_target("toy-script")
        pool.save_ai_candidate(b"crash();\n", src_id=0, temperature=1.0)
        pool.scan_and_import(harness)
        assert len(pool.crashes) == 1


class TestQueueStats:
    """Tests for pool accounting and the import-ratio metric."""

    def test_import_ratio_published_figure(self) -> None:
        """348 imports in a queue of 1856 is 18.75%."""
        stats = QueueStats(queue_len=1856, imported_from_ai=348)
        assert abs(import_ratio(stats) - 0.1875) < 0.0001

    def test_import_ratio_zero_imports(self) -> None:
        """No imports means a 0% ratio."""
        stats = QueueStats(queue_len=10, imported_from_ai=0)
        assert import_ratio(stats) == 0.0

    def test_import_ratio_empty_queue_undefined(self) -> None:
        """The ratio has no value for an empty queue."""
        with pytest.raises(UndefinedRatio):
            import_ratio(QueueStats(queue_len=0, imported_from_ai=0))

    def test_pool_stats_track_origin(self, tmp_path: Path) -> None:
        """Pool statistics count ai-origin admissions."""
        pool, _ = build_pool("toy-xml", out_dir=tmp_path / "out")
        pool.save_ai_candidate(b"<fresh><thing>value</thing></fresh>", src_id=0, temperature=1.0)
        pool.scan_and_import(get_target("toy-xml"))
        stats = pool.stats()
        assert stats.imported_from_ai == 1
        assert stats.queue_len == len(pool.seeds)

    def test_valid_fraction(self) -> None:
        """The queue validity fraction uses the format oracle."""
        pool = SeedPool()
        pool.add_if_interesting(b"<a/>", SeedOrigin.INITIAL, NEW)
        pool.add_if_interesting(b"<broken", SeedOrigin.FUZZER, NEW)
        assert pool.valid_fraction("xml") == 0.5
