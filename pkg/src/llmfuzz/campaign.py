"""Campaign orchestration: fuzzing loops, temperature sweeps, ablations.

A campaign runs two logical workers against one target: the byte-
mutation loop (round-robin over the queue, one havoc mutant per step)
and, for the chat-augmented baselines, a free-running chat worker that
is paced purely by provider latency.  They communicate only through
the ai_queue directory, which the fuzz side scans every sync interval
and once more at the deadline.

Campaigns accept an injectable virtual clock.  With one, the whole
campaign becomes a single-threaded event simulation: executions cost a
fixed virtual duration, chat calls cost their simulated latency, and a
fixed rng seed reproduces every byte of the report.  Without one, the
chat worker runs on a real thread against the wall clock.
"""

from __future__ import annotations

import json
import hashlib
import logging
import shlex
import threading
import time
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from random import Random
from typing import Callable, Optional, Sequence, Union

from .corpus import SeedOrigin, SeedPool, atomic_write, read_corpus_dir
from .coverage import CoverageMap, accumulate, coverage_improvement
from .harness import TargetHarness, Verdict
from .metrics import SweepCell, SweepReport, unique_ratio
from .mutate_byte import havoc, load_dictionary
from .mutate_chat import MutationRecord, build_prompt, mutate_once, parse_response
from .providers import (
    ChatRequestConfig,
    Endpoint,
    GenerationProvider,
    HttpProvider,
    MockProvider,
    PromptVariant,
    make_request,
)
from .targets import SAMPLE_INPUTS, get_target
from .validate import VALIDATORS, valid_ratio

logger = logging.getLogger(__name__)

# virtual cost of one target execution, seconds
DEFAULT_EXEC_COST_S = 0.001
DEFAULT_SYNC_INTERVAL_S = 30.0
# chat failures tolerated before the campaign degrades to fuzz-only
_MAX_CONSECUTIVE_PROVIDER_FAILURES = 3
# floor for scheduling the next chat call after a failed one
_FAILED_CALL_MIN_ADVANCE_S = 0.25


class Baseline(Enum):
    AFL_ONLY = "afl"
    CHATFUZZ = "chatfuzz"
    CHATFUZZ_F = "chatfuzz-f"
    CHATFUZZ_C = "chatfuzz-c"
    CHATFUZZ_CF = "chatfuzz-cf"


# Fixed mapping from chat-augmented baseline to (endpoint, prompt variant).
BASELINES: dict[Baseline, tuple[Endpoint, PromptVariant]] = {
    Baseline.CHATFUZZ: (Endpoint.COMPLETION, PromptVariant.AI),
    Baseline.CHATFUZZ_F: (Endpoint.COMPLETION, PromptVariant.AI_NOFORM),
    Baseline.CHATFUZZ_C: (Endpoint.CHAT, PromptVariant.AI),
    Baseline.CHATFUZZ_CF: (Endpoint.CHAT, PromptVariant.AI_NOFORM),
}


class ProviderKind(Enum):
    MOCK = "mock"
    HTTP = "http"


class VirtualClock:
    """Deterministic time source advanced by the event loop."""

    def __init__(self, start: float = 0.0) -> None:
        self._now = start

    def now(self) -> float:
        return self._now

    def advance_to(self, t: float) -> None:
        if t > self._now:
            self._now = t


@dataclass(frozen=True)
class CampaignConfig:
    """Everything one campaign needs; see cli for the flag spellings."""

    target: str
    duration_s: float
    rng_seed: int = 0
    baseline: Baseline = Baseline.CHATFUZZ
    provider: ProviderKind = ProviderKind.MOCK
    request_cfg: ChatRequestConfig = field(default_factory=ChatRequestConfig)
    sync_interval_s: float = DEFAULT_SYNC_INTERVAL_S
    initial_corpus: Optional[Path] = None
    out_dir: Optional[Path] = None
    exec_cost_s: float = DEFAULT_EXEC_COST_S
    chat_rate_limit_s: Optional[float] = None
    dictionary: Optional[Path] = None
    model_name: Optional[str] = None
    provider_timeout_s: float = 30.0
    format_name: Optional[str] = None  # only consulted for cmd: targets


@dataclass(frozen=True)
class CampaignReport:
    """Final accounting for one campaign."""

    target: str
    baseline: Baseline
    duration_s: float
    rng_seed: int
    edges: int
    queue_len: int
    imported_from_ai: int
    crashes: int
    valid_ratio_queue: Optional[float]
    timeline: tuple[tuple[float, int], ...]
    chat_calls: int
    chat_failures: int
    degraded: bool

    @property
    def import_ratio(self) -> Optional[float]:
        if self.queue_len == 0:
            return None
        return self.imported_from_ai / self.queue_len

    def to_dict(self) -> dict:
        return {
            "target": self.target,
            "baseline": self.baseline.value,
            "duration_s": self.duration_s,
            "rng_seed": self.rng_seed,
            "edges": self.edges,
            "queue_len": self.queue_len,
            "imported_from_ai": self.imported_from_ai,
            "import_ratio": self.import_ratio,
            "crashes": self.crashes,
            "valid_ratio_queue": self.valid_ratio_queue,
            "timeline": [[t, e] for t, e in self.timeline],
            "chat_calls": self.chat_calls,
            "chat_failures": self.chat_failures,
            "degraded": self.degraded,
        }

    def digest(self) -> str:
        """Content digest of the full report; equal digests, equal runs."""
        blob = json.dumps(self.to_dict(), sort_keys=True).encode("utf-8")
        return hashlib.md5(blob).hexdigest()


def resolve_target(name: str, format_name: Optional[str] = None) -> TargetHarness:
    """Bundled target by name, or an external one via ``cmd:<command>``."""
    if name.startswith("cmd:"):
        from .harness import CommandTarget

        command = shlex.split(name[4:])
        if not command:
            raise ValueError("cmd: target needs a command")
        return CommandTarget(
            name=Path(command[0]).name,
            format_name=format_name or "text",
            command=command,
        )
    return get_target(name)


def make_provider(config: CampaignConfig) -> GenerationProvider:
    if config.provider is ProviderKind.MOCK:
        return MockProvider(seed=config.rng_seed)
    return HttpProvider(timeout_s=config.provider_timeout_s)


def _load_initial_corpus(config: CampaignConfig) -> list[bytes]:
    if config.initial_corpus is not None:
        docs = [data for _name, data in read_corpus_dir(Path(config.initial_corpus))]
    else:
        docs = list(SAMPLE_INPUTS.get(config.target, ()))
    if not docs:
        raise ValueError("initial corpus is empty")
    return docs


def _queue_valid_ratio(pool: SeedPool, format_name: str) -> Optional[float]:
    if format_name not in VALIDATORS or not pool.seeds:
        return None
    return pool.valid_fraction(format_name)


class _CampaignState:
    """Mutable innards shared by the virtual and real campaign drivers."""

    def __init__(
        self,
        config: CampaignConfig,
        harness: TargetHarness,
        provider: Optional[GenerationProvider],
    ) -> None:
        self.config = config
        self.harness = harness
        self.provider = provider
        self.pool = SeedPool(out_dir=config.out_dir)
        self.fuzz_rng = Random(config.rng_seed * 3 + 1)
        self.chat_rng = Random(config.rng_seed * 3 + 2)
        self.dictionary = (
            load_dictionary(config.dictionary) if config.dictionary is not None else None
        )
        self.timeline: list[tuple[float, int]] = []
        self.chat_calls = 0
        self.chat_failures = 0
        self.consecutive_failures = 0
        self.degraded = False
        endpoint_variant = BASELINES.get(config.baseline)
        self.endpoint = endpoint_variant[0] if endpoint_variant else None
        self.variant = endpoint_variant[1] if endpoint_variant else None

    @property
    def chat_enabled(self) -> bool:
        return (
            self.config.baseline is not Baseline.AFL_ONLY
            and self.provider is not None
            and not self.degraded
        )

    def run_initial_corpus(self, now: float) -> None:
        for data in sorted(_load_initial_corpus(self.config)):
            result = self.harness.run(data)
            delta = accumulate(self.pool.map, result.trace)
            if result.verdict is Verdict.CRASH:
                self.pool.add_crash(data, SeedOrigin.INITIAL, found_at=now)
            self.pool.add_if_interesting(data, SeedOrigin.INITIAL, delta, found_at=now)
        self.mark_timeline(now)

    def mark_timeline(self, now: float) -> None:
        edges = self.pool.map.edge_count
        if not self.timeline or edges > self.timeline[-1][1]:
            self.timeline.append((now, edges))

    def fuzz_step(self, now: float) -> None:
        seed = self.pool.next_round_robin()
        others = self.pool.all_data() if len(self.pool) > 1 else None
        mutant = havoc(seed.data, self.fuzz_rng, self.dictionary, others)
        result = self.harness.run(mutant)
        delta = accumulate(self.pool.map, result.trace)
        if result.verdict is Verdict.CRASH:
            self.pool.add_crash(mutant, SeedOrigin.FUZZER, parent_id=seed.id, found_at=now)
        self.pool.add_if_interesting(
            mutant, SeedOrigin.FUZZER, delta, parent_id=seed.id, found_at=now
        )
        if delta.new_edges:
            self.mark_timeline(now)

    def chat_step(self) -> MutationRecord:
        record = mutate_once(
            self.pool,
            self.provider,
            self.variant,
            self.endpoint,
            self.config.request_cfg,
            None,
            self.chat_rng,
            format_name=self.harness.format_name,
            model_name=self.config.model_name,
        )
        self.chat_calls += 1
        if record.error:
            self.chat_failures += 1
            self.consecutive_failures += 1
            if self.consecutive_failures >= _MAX_CONSECUTIVE_PROVIDER_FAILURES:
                self.degraded = True
                logger.warning(
                    "provider failed %d times in a row (%s); continuing without the chat mutator",
                    self.consecutive_failures,
                    record.error,
                )
        else:
            self.consecutive_failures = 0
        return record

    def sync(self, now: float) -> None:
        if self.pool.out_dir is not None:
            admitted = self.pool.scan_and_import(self.harness, found_at=now)
            if admitted:
                self.mark_timeline(now)
            self.write_stats(now)

    def write_stats(self, now: float) -> None:
        if self.pool.out_dir is None:
            return
        snapshot = self.report(now).to_dict()
        snapshot["t"] = now
        blob = json.dumps(snapshot, sort_keys=True, indent=2).encode("utf-8")
        atomic_write(self.pool.out_dir / "stats.json", blob)

    def report(self, now: float) -> CampaignReport:
        stats = self.pool.stats()
        return CampaignReport(
            target=self.config.target,
            baseline=self.config.baseline,
            duration_s=self.config.duration_s,
            rng_seed=self.config.rng_seed,
            edges=self.pool.map.edge_count,
            queue_len=stats.queue_len,
            imported_from_ai=stats.imported_from_ai,
            crashes=len(self.pool.crashes),
            valid_ratio_queue=_queue_valid_ratio(self.pool, self.harness.format_name),
            timeline=tuple(self.timeline),
            chat_calls=self.chat_calls,
            chat_failures=self.chat_failures,
            degraded=self.degraded,
        )


def _run_virtual(state: _CampaignState, clock: VirtualClock) -> CampaignReport:
    config = state.config
    start = clock.now()
    deadline = start + config.duration_s
    state.run_initial_corpus(start)

    fuzz_next = start
    chat_next = start if state.chat_enabled else None
    sync_next = start + config.sync_interval_s

    while True:
        # order at equal timestamps: import/snapshot, then chat, then fuzz
        candidates: list[tuple[float, int]] = [(sync_next, 0), (fuzz_next, 2)]
        if chat_next is not None and state.chat_enabled:
            candidates.append((chat_next, 1))
        when, kind = min(candidates)
        if when >= deadline:
            break
        clock.advance_to(when)
        if kind == 0:
            state.sync(when)
            sync_next = when + config.sync_interval_s
        elif kind == 1:
            record = state.chat_step()
            advance = record.latency_s
            if record.error:
                advance = max(advance, _FAILED_CALL_MIN_ADVANCE_S)
            if config.chat_rate_limit_s is not None:
                advance = max(advance, config.chat_rate_limit_s)
            chat_next = when + advance
        else:
            state.fuzz_step(when)
            fuzz_next = when + config.exec_cost_s

    clock.advance_to(deadline)
    state.sync(deadline)
    return state.report(deadline)


def _run_real(state: _CampaignState) -> CampaignReport:
    config = state.config
    start = time.monotonic()
    deadline = start + config.duration_s
    state.run_initial_corpus(0.0)

    stop = threading.Event()

    def chat_worker() -> None:
        while not stop.is_set() and state.chat_enabled:
            record = state.chat_step()
            if config.chat_rate_limit_s is not None:
                wait = config.chat_rate_limit_s - record.latency_s
                if wait > 0:
                    stop.wait(wait)

    worker: Optional[threading.Thread] = None
    if state.chat_enabled:
        worker = threading.Thread(target=chat_worker, name="chat-mutator", daemon=True)
        worker.start()

    sync_next = start + config.sync_interval_s
    while True:
        now = time.monotonic()
        if now >= deadline:
            break
        if now >= sync_next:
            state.sync(now - start)
            sync_next += config.sync_interval_s
        state.fuzz_step(now - start)

    stop.set()
    if worker is not None:
        worker.join(timeout=config.provider_timeout_s + 5.0)
    state.sync(config.duration_s)
    return state.report(config.duration_s)


def run_campaign(
    config: CampaignConfig,
    clock: Optional[VirtualClock] = None,
    provider: Optional[GenerationProvider] = None,
) -> CampaignReport:
    """Run one campaign to its deadline and assemble the report.

    With a VirtualClock the run is a deterministic single-threaded
    simulation; otherwise the chat worker runs on a real thread.  An
    explicit provider overrides the one named in the config (used by
    tests to inject failures).
    """
    harness = resolve_target(config.target, config.format_name)
    if config.baseline is Baseline.AFL_ONLY:
        chosen_provider = None
    else:
        if config.out_dir is None:
            raise ValueError("chat-augmented baselines need an out_dir for the ai_queue handoff")
        chosen_provider = provider if provider is not None else make_provider(config)
    state = _CampaignState(config, harness, chosen_provider)
    if clock is not None:
        return _run_virtual(state, clock)
    return _run_real(state)


# ---------------------------------------------------------------------------
# temperature sweep
# ---------------------------------------------------------------------------

SWEEP_TEMPERATURES = tuple(round(0.25 * i, 2) for i in range(9))


def run_sweep(
    target: str,
    temps: Sequence[float],
    per_point_duration: float,
    provider: GenerationProvider,
    initial_corpus: Optional[Sequence[bytes]] = None,
    variant: PromptVariant = PromptVariant.AI,
    endpoint: Endpoint = Endpoint.COMPLETION,
    request_cfg: Optional[ChatRequestConfig] = None,
    rng_seed: int = 0,
) -> SweepReport:
    """Chat-mutator-only temperature sweep.

    Per temperature: generate candidates for per_point_duration of
    simulated provider time (no byte mutator, no import feedback), then
    score the batch: unique ratio, valid ratio, and coverage
    improvement of a fresh map seeded with the initial corpus.
    """
    harness = resolve_target(target)
    fmt = harness.format_name
    docs = list(initial_corpus) if initial_corpus is not None else list(SAMPLE_INPUTS[target])
    if not docs:
        raise ValueError("initial corpus is empty")
    base_cfg = request_cfg or ChatRequestConfig()
    pick_rng = Random(rng_seed * 7 + 5)

    cells = []
    for temperature in temps:
        cfg = replace(base_cfg, temperature=float(temperature))
        candidates: list[bytes] = []
        elapsed = 0.0
        while elapsed < per_point_duration:
            sample = docs[pick_rng.randrange(len(docs))]
            payload = build_prompt(variant, endpoint, fmt, sample)
            response = provider.generate(make_request(payload, cfg))
            candidates.extend(parse_response(response.choices))
            elapsed += response.latency_s

        pool_map_initial, pool_map_final = _sweep_coverage(harness, docs, candidates)
        cells.append(
            SweepCell(
                program=target,
                temperature=float(temperature),
                unique_ratio=unique_ratio(candidates),
                valid_ratio=valid_ratio(candidates, fmt) if fmt in VALIDATORS else 0.0,
                cov_improvement=coverage_improvement(pool_map_initial, pool_map_final),
            )
        )
    return SweepReport(cells=tuple(cells))


def _sweep_coverage(
    harness: TargetHarness,
    initial_docs: Sequence[bytes],
    candidates: Sequence[bytes],
) -> tuple[int, int]:
    cov = CoverageMap()
    for doc in sorted(initial_docs):
        accumulate(cov, harness.run(doc).trace)
    initial_edges = cov.edge_count
    for doc in candidates:
        accumulate(cov, harness.run(doc).trace)
    return initial_edges, cov.edge_count


# ---------------------------------------------------------------------------
# prompt ablation
# ---------------------------------------------------------------------------

ABLATION_VARIANTS = (PromptVariant.AI, PromptVariant.AI_NOINPUT, PromptVariant.AI_NOFORM)


@dataclass(frozen=True)
class AblationRow:
    variant: PromptVariant
    edges: int
    vs_ai: float


@dataclass(frozen=True)
class AblationTable:
    target: str
    endpoint: Endpoint
    rows: tuple[AblationRow, ...]

    def edges_by_variant(self) -> dict[PromptVariant, int]:
        return {row.variant: row.edges for row in self.rows}


def run_ablation(
    target: str,
    endpoint: Endpoint,
    duration: float,
    provider: Union[GenerationProvider, Callable[[], GenerationProvider]],
    initial_corpus: Optional[Sequence[bytes]] = None,
    request_cfg: Optional[ChatRequestConfig] = None,
    rng_seed: int = 0,
) -> AblationTable:
    """Chat-only campaigns differing only in prompt variant.

    Each variant runs with identical rng seed and time budget; new
    seeds are imported immediately so later prompts can feed on them.
    Pass a provider factory to give every variant a fresh, identically
    seeded provider (required for paired comparisons with the mock).
    """
    harness = resolve_target(target)
    fmt = harness.format_name
    docs = list(initial_corpus) if initial_corpus is not None else list(SAMPLE_INPUTS[target])
    if not docs:
        raise ValueError("initial corpus is empty")
    base_cfg = request_cfg or ChatRequestConfig()
    provider_factory: Callable[[], GenerationProvider]
    if callable(provider):
        provider_factory = provider
    else:
        provider_factory = lambda: provider  # noqa: E731 - single shared instance

    edges: dict[PromptVariant, int] = {}
    for variant in ABLATION_VARIANTS:
        edges[variant] = _run_chat_only(
            harness, docs, variant, endpoint, duration, provider_factory(), base_cfg, rng_seed
        )

    ai_edges = edges[PromptVariant.AI]
    rows = tuple(
        AblationRow(
            variant=variant,
            edges=edges[variant],
            vs_ai=(edges[variant] - ai_edges) / ai_edges if ai_edges else 0.0,
        )
        for variant in ABLATION_VARIANTS
    )
    return AblationTable(target=target, endpoint=endpoint, rows=rows)


def _run_chat_only(
    harness: TargetHarness,
    initial_docs: Sequence[bytes],
    variant: PromptVariant,
    endpoint: Endpoint,
    duration: float,
    provider: GenerationProvider,
    cfg: ChatRequestConfig,
    rng_seed: int,
) -> int:
    pool = SeedPool(out_dir=None)
    for data in sorted(initial_docs):
        result = harness.run(data)
        delta = accumulate(pool.map, result.trace)
        pool.add_if_interesting(data, SeedOrigin.INITIAL, delta)
    pick_rng = Random(rng_seed * 11 + 3)

    elapsed = 0.0
    while elapsed < duration:
        seed = pool.pick_random(pick_rng)
        sample = seed.data if variant is not PromptVariant.AI_NOINPUT else None
        payload = build_prompt(variant, endpoint, harness.format_name, sample)
        response = provider.generate(make_request(payload, cfg))
        elapsed += response.latency_s
        for data in parse_response(response.choices):
            result = harness.run(data)
            delta = accumulate(pool.map, result.trace)
            pool.add_if_interesting(data, SeedOrigin.AI, delta, parent_id=seed.id)
    return pool.map.edge_count
