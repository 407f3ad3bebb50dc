"""Seed pools: admission, on-disk queues, and the ai_queue import path.

A pool owns the coverage map for one campaign.  Candidate inputs are
admitted only when their trace adds a new (edge, bucket) pair; admitted
seeds are written to ``<out>/queue/`` with self-describing filenames so
a pool can be reloaded from disk.  Chat-generated candidates travel
through ``<out>/ai_queue/`` as files and are imported by scanning that
directory, which keeps the byte-mutation loop and the chat loop
decoupled.

All files are written to a temporary name first and atomically renamed
into place, so a concurrent scanner never observes a partial seed.
"""

from __future__ import annotations

import hashlib
import logging
import os
import re
import tempfile
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterator, Optional, Sequence

from .coverage import CoverageDelta, CoverageMap, accumulate
from .errors import EmptyPool, UndefinedRatio
from .harness import TargetHarness, Verdict

logger = logging.getLogger(__name__)


class SeedOrigin(Enum):
    INITIAL = "initial"
    FUZZER = "fuzzer"
    AI = "ai"


@dataclass(frozen=True)
class Seed:
    """One admitted corpus entry."""

    id: int
    data: bytes
    digest: str
    origin: SeedOrigin
    parent_id: Optional[int] = None
    found_at: float = 0.0


@dataclass(frozen=True)
class QueueStats:
    """Counts used for the import-ratio metric."""

    queue_len: int
    imported_from_ai: int


def import_ratio(stats: QueueStats) -> float:
    """Fraction of the queue that arrived through the ai_queue.

    Raises UndefinedRatio when the queue is empty.
    """
    if stats.queue_len == 0:
        raise UndefinedRatio("import ratio over an empty queue")
    return stats.imported_from_ai / stats.queue_len


def seed_digest(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


# Queue entries name themselves: id, parent seed (or none), and origin.
_QUEUE_NAME_RE = re.compile(r"^id:(\d{6}),src:(none|\d{6}),origin:(initial|fuzzer|ai)$")
# ai_queue candidates record their source seed and sampling temperature.
_AI_NAME_RE = re.compile(r"^ai:(\d{8}),src:(\d{6}),t:(\d+\.\d{2})$")


def queue_entry_name(seed_id: int, parent_id: Optional[int], origin: SeedOrigin) -> str:
    src = "none" if parent_id is None else f"{parent_id:06d}"
    return f"id:{seed_id:06d},src:{src},origin:{origin.value}"


def parse_queue_name(name: str) -> tuple[int, Optional[int], SeedOrigin]:
    """Invert queue_entry_name; raises ValueError on foreign filenames."""
    match = _QUEUE_NAME_RE.match(name)
    if match is None:
        raise ValueError(f"not a queue entry name: {name!r}")
    parent = None if match.group(2) == "none" else int(match.group(2), 10)
    return int(match.group(1), 10), parent, SeedOrigin(match.group(3))


def ai_candidate_name(candidate_id: int, src_id: int, temperature: float) -> str:
    return f"ai:{candidate_id:08d},src:{src_id:06d},t:{temperature:.2f}"


def parse_ai_name(name: str) -> tuple[int, int, float]:
    """Invert ai_candidate_name; raises ValueError on foreign filenames."""
    match = _AI_NAME_RE.match(name)
    if match is None:
        raise ValueError(f"not an ai_queue entry name: {name!r}")
    return int(match.group(1), 10), int(match.group(2), 10), float(match.group(3))


def atomic_write(path: Path, data: bytes) -> None:
    """Write via a sibling temp file and rename, so readers never see partials."""
    fd, tmp_name = tempfile.mkstemp(prefix=".tmp-", dir=path.parent)
    try:
        with os.fdopen(fd, "wb") as handle:
            handle.write(data)
        os.replace(tmp_name, path)
    except BaseException:
        try:
            os.unlink(tmp_name)
        except OSError:
            pass
        raise


def read_corpus_dir(path: Path) -> list[tuple[str, bytes]]:
    """All regular files in a directory as (name, bytes), sorted by name.

    Hidden files (dotfiles, in-flight temp writes) are skipped.
    """
    out = []
    for entry in sorted(path.iterdir()):
        if entry.name.startswith(".") or not entry.is_file():
            continue
        out.append((entry.name, entry.read_bytes()))
    return out


class SeedPool:
    """Admission-controlled corpus plus its coverage map.

    With an out_dir, admitted seeds and crashes are mirrored to
    ``queue/``, ``crashes/``; chat candidates go to ``ai_queue/``.
    Without one the pool is memory-only (handy for tests and sweeps).
    """

    def __init__(self, out_dir: Optional[Path] = None) -> None:
        self.out_dir = Path(out_dir) if out_dir is not None else None
        self.map = CoverageMap()
        self.seeds: list[Seed] = []
        self.crashes: list[Seed] = []
        self._datas: list[bytes] = []
        self._digests: set[str] = set()
        self._imported_from_ai = 0
        self._imported_names: set[str] = set()
        self._next_ai_id = 0
        self._rr_index = 0
        if self.out_dir is not None:
            for sub in ("queue", "ai_queue", "crashes"):
                (self.out_dir / sub).mkdir(parents=True, exist_ok=True)

    # -- paths ---------------------------------------------------------

    @property
    def queue_dir(self) -> Path:
        assert self.out_dir is not None
        return self.out_dir / "queue"

    @property
    def ai_queue_dir(self) -> Path:
        assert self.out_dir is not None
        return self.out_dir / "ai_queue"

    @property
    def crashes_dir(self) -> Path:
        assert self.out_dir is not None
        return self.out_dir / "crashes"

    # -- admission -----------------------------------------------------

    def add_if_interesting(
        self,
        data: bytes,
        origin: SeedOrigin,
        delta: CoverageDelta,
        parent_id: Optional[int] = None,
        found_at: float = 0.0,
    ) -> Optional[Seed]:
        """Admit data if it is novel by digest and its delta found new pairs.

        The caller has already executed the input and folded its trace
        into the pool's map; this only decides queue membership.
        """
        digest = seed_digest(data)
        if digest in self._digests:
            return None
        if not delta.interesting:
            return None
        seed = Seed(
            id=len(self.seeds),
            data=data,
            digest=digest,
            origin=origin,
            parent_id=parent_id,
            found_at=found_at,
        )
        self.seeds.append(seed)
        self._datas.append(data)
        self._digests.add(digest)
        if origin is SeedOrigin.AI:
            self._imported_from_ai += 1
        if self.out_dir is not None:
            atomic_write(self.queue_dir / queue_entry_name(seed.id, parent_id, origin), data)
        return seed

    def add_crash(
        self,
        data: bytes,
        origin: SeedOrigin,
        parent_id: Optional[int] = None,
        found_at: float = 0.0,
    ) -> Optional[Seed]:
        """Record a crashing input, deduplicated by content digest."""
        digest = seed_digest(data)
        if any(c.digest == digest for c in self.crashes):
            return None
        crash = Seed(
            id=len(self.crashes),
            data=data,
            digest=digest,
            origin=origin,
            parent_id=parent_id,
            found_at=found_at,
        )
        self.crashes.append(crash)
        if self.out_dir is not None:
            atomic_write(self.crashes_dir / queue_entry_name(crash.id, parent_id, origin), data)
        return crash

    # -- selection -----------------------------------------------------

    def pick_random(self, rng) -> Seed:
        """Uniform random seed; raises EmptyPool when nothing is queued."""
        if not self.seeds:
            raise EmptyPool("cannot pick from an empty pool")
        return self.seeds[rng.randrange(len(self.seeds))]

    def next_round_robin(self) -> Seed:
        """Cycle through seeds in admission order; raises EmptyPool when empty."""
        if not self.seeds:
            raise EmptyPool("cannot pick from an empty pool")
        seed = self.seeds[self._rr_index % len(self.seeds)]
        self._rr_index += 1
        return seed

    def __len__(self) -> int:
        return len(self.seeds)

    def __iter__(self) -> Iterator[Seed]:
        return iter(self.seeds)

    def all_data(self) -> Sequence[bytes]:
        """Live view of queued seed bytes, in admission order."""
        return self._datas

    # -- chat candidate handoff -----------------------------------------

    def save_ai_candidate(self, data: bytes, src_id: int, temperature: float) -> Path:
        """Drop one chat-generated candidate into ai_queue for later import."""
        assert self.out_dir is not None, "ai_queue requires an out_dir"
        name = ai_candidate_name(self._next_ai_id, src_id, temperature)
        self._next_ai_id += 1
        path = self.ai_queue_dir / name
        atomic_write(path, data)
        return path

    def scan_and_import(self, harness: TargetHarness, found_at: float = 0.0) -> int:
        """Execute new ai_queue files and admit the interesting ones.

        Each file is considered exactly once per pool, even across
        calls; unreadable files are skipped with a warning and retried
        on a later scan.  Returns the number of seeds admitted.
        """
        assert self.out_dir is not None, "scan_and_import requires an out_dir"
        admitted = 0
        for entry in sorted(self.ai_queue_dir.iterdir()):
            name = entry.name
            if name.startswith(".") or name in self._imported_names:
                continue
            try:
                candidate_id, src_id, _temp = parse_ai_name(name)
            except ValueError:
                logger.warning("ignoring foreign file in ai_queue: %s", name)
                self._imported_names.add(name)
                continue
            try:
                data = entry.read_bytes()
            except OSError as err:
                logger.warning("skipping unreadable ai_queue file %s: %s", name, err)
                continue
            self._imported_names.add(name)
            result = harness.run(data)
            delta = accumulate(self.map, result.trace)
            if result.verdict is Verdict.CRASH:
                self.add_crash(data, SeedOrigin.AI, parent_id=src_id, found_at=found_at)
            if self.add_if_interesting(
                data, SeedOrigin.AI, delta, parent_id=src_id, found_at=found_at
            ) is not None:
                admitted += 1
        return admitted

    # -- accounting ------------------------------------------------------

    def stats(self) -> QueueStats:
        return QueueStats(queue_len=len(self.seeds), imported_from_ai=self._imported_from_ai)

    def valid_fraction(self, format_name: str) -> float:
        """valid_ratio over the queued seed bytes."""
        from .validate import valid_ratio

        return valid_ratio([seed.data for seed in self.seeds], format_name)


def load_pool(out_dir: Path, harness: TargetHarness) -> SeedPool:
    """Rebuild a pool by replaying a queue directory in id order.

    Runtime-only metadata (found_at timestamps) is not persisted, so
    reloaded seeds carry found_at 0.0.  Entry ids are reassigned
    densely in replay order, which preserves the original ids for any
    queue written by this module.
    """
    pool = SeedPool(out_dir=out_dir)
    entries = []
    for name, data in read_corpus_dir(pool.queue_dir):
        try:
            seed_id, parent_id, origin = parse_queue_name(name)
        except ValueError:
            logger.warning("ignoring foreign file in queue: %s", name)
            continue
        entries.append((seed_id, parent_id, origin, data))
    entries.sort(key=lambda item: item[0])
    for seed_id, parent_id, origin, data in entries:
        result = harness.run(data)
        delta = accumulate(pool.map, result.trace)
        pool.add_if_interesting(data, origin, delta, parent_id=parent_id)
    for name, _data in read_corpus_dir(pool.ai_queue_dir):
        pool._imported_names.add(name)
        try:
            candidate_id, _src, _temp = parse_ai_name(name)
        except ValueError:
            continue
        pool._next_ai_id = max(pool._next_ai_id, candidate_id + 1)
    return pool
