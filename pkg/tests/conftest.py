"""Shared fixtures and provider stubs for the test suite.

Provides:
- Canonical sample documents per target format
- Seed pools pre-populated from the bundled sample corpora
- Deterministic provider stubs (constant output, always failing, spy)
"""

from __future__ import annotations

from pathlib import Path
from typing import Optional

import pytest

from llmfuzz.corpus import SeedOrigin, SeedPool
from llmfuzz.coverage import CoverageMap, accumulate
from llmfuzz.providers import (
    FinishReason,
    GenerationRequest,
    GenerationResponse,
    MockProvider,
)
from llmfuzz.errors import ProviderUnavailable
from llmfuzz.targets import SAMPLE_INPUTS, get_target


@pytest.fixture
def xml_sample() -> bytes:
    """First bundled toy-xml sample document."""
    return SAMPLE_INPUTS["toy-xml"][0]


@pytest.fixture
def xml_harness():
    """In-process harness for the toy-xml target."""
    return get_target("toy-xml")


def build_pool(
    target_name: str,
    out_dir: Optional[Path] = None,
) -> tuple[SeedPool, CoverageMap]:
    """Pool seeded with a target's bundled samples, plus its coverage map."""
    harness = get_target(target_name)
    pool = SeedPool(out_dir=out_dir)
    for data in SAMPLE_INPUTS[target_name]:
        result = harness.run(data)
        delta = accumulate(pool.map, result.trace)
        pool.add_if_interesting(data, SeedOrigin.INITIAL, delta)
    return pool, pool.map


@pytest.fixture
def xml_pool(tmp_path: Path) -> SeedPool:
    """Disk-backed pool holding the toy-xml samples."""
    pool, _ = build_pool("toy-xml", out_dir=tmp_path / "out")
    return pool


@pytest.fixture
def memory_pool() -> SeedPool:
    """In-memory pool holding the toy-xml samples."""
    pool, _ = build_pool("toy-xml")
    return pool


class ConstantProvider:
    """Provider stub that answers every request with the same choices."""

    def __init__(self, choices: tuple[str, ...], latency_s: float = 0.01) -> None:
        self.choices = choices
        self.latency_s = latency_s
        self.calls = 0

    def generate(self, request: GenerationRequest) -> GenerationResponse:
        self.calls += 1
        return GenerationResponse(
            choices=self.choices,
            latency_s=self.latency_s,
            finish_reasons=tuple(FinishReason.STOP for _ in self.choices),
        )


class FailingProvider:
    """Provider stub that raises ProviderUnavailable on every call."""

    def __init__(self) -> None:
        self.calls = 0

    def generate(self, request: GenerationRequest) -> GenerationResponse:
        self.calls += 1
        raise ProviderUnavailable("stub outage")


class SpyProvider:
    """Wraps a MockProvider and counts how often it is consulted."""

    def __init__(self, seed: int = 0) -> None:
        self.inner = MockProvider(seed=seed)
        self.calls = 0

    def generate(self, request: GenerationRequest) -> GenerationResponse:
        self.calls += 1
        return self.inner.generate(request)
