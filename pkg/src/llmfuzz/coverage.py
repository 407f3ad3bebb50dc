"""Edge-coverage accounting: hit-count bucketing, map accumulation, minimization.

Raw execution traces map edge ids to hit counts.  Counts are collapsed
into coarse buckets before they touch the global coverage map, so loop
iteration noise does not masquerade as progress.  A trace is interesting
only if it contributes an (edge, bucket) pair the map has not seen.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .errors import UndefinedBaseline

# Number of addressable edge ids; traces must stay inside [0, MAP_SIZE).
MAP_SIZE = 65536

# Bucket alphabet, one value per hit-count range:
#   1->[1]  2->[2]  3->[3]  4->[4,7]  8->[8,15]  16->[16,31]  32->[32,127]  128->[128,..]
BUCKET_VALUES = (1, 2, 3, 4, 8, 16, 32, 128)


def bucketize(count: int) -> int:
    """Collapse a raw hit count into its bucket value."""
    if count < 1:
        raise ValueError(f"hit count must be >= 1, got {count}")
    if count <= 3:
        return count
    if count < 8:
        return 4
    if count < 16:
        return 8
    if count < 32:
        return 16
    if count < 128:
        return 32
    return 128


@dataclass(frozen=True)
class EdgeTrace:
    """One execution's raw coverage: edge id -> hit count.

    Edge ids live in [0, MAP_SIZE); hit counts are positive.  Traces are
    never empty: every harness emits at least its entry edge.
    """

    hits: Mapping[int, int]

    def __post_init__(self) -> None:
        if not self.hits:
            raise ValueError("trace must contain at least one edge")
        for edge, count in self.hits.items():
            if not 0 <= edge < MAP_SIZE:
                raise ValueError(f"edge id {edge} outside [0, {MAP_SIZE})")
            if count < 1:
                raise ValueError(f"edge {edge} has non-positive hit count {count}")

    def bucketed(self) -> dict[int, int]:
        """Edge id -> bucket value for this trace."""
        return {edge: bucketize(count) for edge, count in self.hits.items()}

    def edge_ids(self) -> frozenset[int]:
        return frozenset(self.hits)


@dataclass(frozen=True)
class CoverageDelta:
    """What a single trace added to a map."""

    new_edges: int
    new_buckets: int

    @property
    def interesting(self) -> bool:
        return self.new_buckets > 0


@dataclass
class CoverageMap:
    """Global (edge, bucket) pairs observed so far."""

    seen: dict[int, set[int]] = field(default_factory=dict)

    @property
    def edge_count(self) -> int:
        return len(self.seen)

    @property
    def pair_count(self) -> int:
        return sum(len(buckets) for buckets in self.seen.values())

    def edge_ids(self) -> frozenset[int]:
        return frozenset(self.seen)

    def __contains__(self, pair: tuple[int, int]) -> bool:
        edge, bucket = pair
        return bucket in self.seen.get(edge, ())


def accumulate(cov_map: CoverageMap, trace: EdgeTrace) -> CoverageDelta:
    """Fold a trace into the map; report how much was new.

    A new edge always implies at least one new bucket, so
    ``delta.interesting`` is the single admission signal.
    """
    new_edges = 0
    new_buckets = 0
    seen = cov_map.seen
    for edge, count in trace.hits.items():
        bucket = bucketize(count)
        buckets = seen.get(edge)
        if buckets is None:
            seen[edge] = {bucket}
            new_edges += 1
            new_buckets += 1
        elif bucket not in buckets:
            buckets.add(bucket)
            new_buckets += 1
    return CoverageDelta(new_edges=new_edges, new_buckets=new_buckets)


def coverage_improvement(initial_edges: int, final_edges: int) -> float:
    """Relative edge growth (final - initial) / initial.

    Undefined for an empty baseline; a shrinking map yields a negative
    value rather than being clamped.
    """
    if initial_edges < 0 or final_edges < 0:
        raise ValueError("edge counts must be non-negative")
    if initial_edges == 0:
        raise UndefinedBaseline("cannot compute improvement over zero initial edges")
    return (final_edges - initial_edges) / initial_edges


@dataclass(frozen=True)
class CminEntry:
    """Minimization candidate: a seed id, its trace, and a keep flag.

    ``keep_always`` marks crashing seeds, which survive minimization
    regardless of coverage overlap.
    """

    seed_id: str
    trace: EdgeTrace
    keep_always: bool = False


def cmin_select(entries: Sequence[CminEntry]) -> list[CminEntry]:
    """Greedy corpus minimization over bucketed (edge, bucket) pairs.

    Candidates are visited in descending distinct-edge-count order, ties
    broken lexicographically by seed id.  A candidate is kept if it is
    crash-flagged or covers a pair no kept seed covers yet.  The kept
    subset always covers exactly the union of all input pairs.
    """
    ordered = sorted(entries, key=lambda e: (-len(e.trace.hits), e.seed_id))
    covered: set[tuple[int, int]] = set()
    kept: list[CminEntry] = []
    for entry in ordered:
        pairs = {(edge, bucket) for edge, bucket in entry.trace.bucketed().items()}
        if entry.keep_always or not pairs <= covered:
            kept.append(entry)
            covered |= pairs
    return kept
