"""Chat-mutation round: prompt construction, response parsing, emission.

One mutation round picks a random queue seed, renders it into a prompt
for the configured endpoint, asks the provider for n completions, and
drops every parsed candidate into the ai_queue directory as a file.
Import back into the fuzzing queue happens elsewhere (corpus scan), so
a slow or flaky provider never blocks the byte-mutation loop.

Three prompt variants control what the model is told: the full variant
names the format and shows the seed, one variant withholds the seed,
and one withholds the format name.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from pathlib import Path
from random import Random
from typing import Optional

from .corpus import SeedPool, ai_candidate_name, atomic_write, parse_ai_name
from .errors import MissingSample, ProviderProtocolError, ProviderUnavailable, UnexpectedSample
from .providers import (
    ChatRequestConfig,
    Endpoint,
    GenerationProvider,
    PromptPayload,
    PromptVariant,
    make_request,
)


def build_prompt(
    variant: PromptVariant,
    endpoint: Endpoint,
    format_name: str,
    sample: Optional[bytes] = None,
) -> PromptPayload:
    """Render one of the six (variant x endpoint) prompt templates.

    The sample is required for the variants that show an example and
    forbidden for the one that does not (MissingSample /
    UnexpectedSample).  The returned payload's format_name is None for
    the format-withholding variant, mirroring what the model was told.
    """
    wants_sample = variant in (PromptVariant.AI, PromptVariant.AI_NOFORM)
    if wants_sample and sample is None:
        raise MissingSample(f"variant {variant.value} requires a sample input")
    if not wants_sample and sample is not None:
        raise UnexpectedSample(f"variant {variant.value} does not take a sample input")

    sample_text = sample.decode("latin-1") if sample is not None else None
    payload_format = None if variant is PromptVariant.AI_NOFORM else format_name

    if endpoint is Endpoint.CHAT:
        if variant is PromptVariant.AI:
            system = f"You are a {format_name} file generator"
            user = (
                f"Here is an example {format_name} file, generate another one.\n"
                + sample_text
            )
        elif variant is PromptVariant.AI_NOINPUT:
            system = f"You are a {format_name} file generator"
            user = f"Generate a {format_name} file."
        else:
            system = "You are a file generator"
            user = "Here is an example file, generate another one.\n" + sample_text
        return PromptPayload(
            endpoint=endpoint,
            system_text=system,
            user_text=user,
            format_name=payload_format,
            sample=sample,
        )

    if variant is PromptVariant.AI:
        prompt = sample_text + f"\nAnd here is another {format_name} file like above: "
    elif variant is PromptVariant.AI_NOINPUT:
        prompt = f"Here is a {format_name} file: "
    else:
        prompt = sample_text + "\nAnd here is another one like above: "
    return PromptPayload(
        endpoint=endpoint,
        prompt_text=prompt,
        format_name=payload_format,
        sample=sample,
    )


def _extract_fence(text: str) -> Optional[str]:
    """Interior of the first complete ``` fence, or None."""
    open_idx = text.find("```")
    if open_idx < 0:
        return None
    rest = text[open_idx + 3 :]
    close_idx = rest.find("```")
    if close_idx < 0:
        return None
    interior = rest[:close_idx]
    first_line, newline, remainder = interior.partition("\n")
    # a bare word on the opening fence line is a language tag, not content
    if newline and first_line.strip() and " " not in first_line.strip():
        return remainder
    return interior


def parse_response(choices) -> list[bytes]:
    """Choice texts -> candidate byte strings, order preserved.

    Each choice is whitespace-stripped; if it carries a fenced code
    block the first fence's interior is used instead.  Empty results
    are dropped.
    """
    candidates: list[bytes] = []
    for text in choices:
        body = text.strip()
        fence = _extract_fence(body)
        if fence is not None:
            body = fence.strip()
        if body:
            candidates.append(body.encode("utf-8"))
    return candidates


@dataclass(frozen=True)
class MutationRecord:
    """Accounting for one chat-mutation round."""

    source_seed_id: int
    request_config: ChatRequestConfig
    latency_s: float
    choices_returned: int
    seeds_emitted: int
    error: str = ""


def _next_candidate_id(ai_queue_dir: Path) -> int:
    next_id = 0
    for entry in ai_queue_dir.iterdir():
        try:
            candidate_id, _src, _temp = parse_ai_name(entry.name)
        except ValueError:
            continue
        next_id = max(next_id, candidate_id + 1)
    return next_id


def mutate_once(
    pool: SeedPool,
    provider: GenerationProvider,
    variant: PromptVariant,
    endpoint: Endpoint,
    cfg: ChatRequestConfig,
    ai_queue_dir: Optional[Path],
    rng: Random,
    format_name: str,
    model_name: Optional[str] = None,
) -> MutationRecord:
    """One chat-mutation round against a random seed from the pool.

    Candidates are written to ai_queue_dir (default: the pool's own
    ai_queue).  Provider failures are absorbed into the record rather
    than raised, so a driving loop can keep running and count failures.
    Duplicates are written anyway; dedup happens at import time.
    """
    seed = pool.pick_random(rng)
    sample = seed.data if variant in (PromptVariant.AI, PromptVariant.AI_NOFORM) else None
    payload = build_prompt(variant, endpoint, format_name, sample)
    request = make_request(payload, cfg, model_name)

    start = time.perf_counter()
    try:
        response = provider.generate(request)
    except (ProviderUnavailable, ProviderProtocolError) as err:
        return MutationRecord(
            source_seed_id=seed.id,
            request_config=cfg,
            latency_s=time.perf_counter() - start,
            choices_returned=0,
            seeds_emitted=0,
            error=str(err) or err.__class__.__name__,
        )

    candidates = parse_response(response.choices)
    temperature = cfg.resolved_temperature(endpoint)

    use_pool_queue = pool.out_dir is not None and (
        ai_queue_dir is None or Path(ai_queue_dir) == pool.ai_queue_dir
    )
    if use_pool_queue:
        for data in candidates:
            pool.save_ai_candidate(data, src_id=seed.id, temperature=temperature)
    else:
        target_dir = Path(ai_queue_dir)
        target_dir.mkdir(parents=True, exist_ok=True)
        next_id = _next_candidate_id(target_dir)
        for offset, data in enumerate(candidates):
            name = ai_candidate_name(next_id + offset, seed.id, temperature)
            atomic_write(target_dir / name, data)

    return MutationRecord(
        source_seed_id=seed.id,
        request_config=cfg,
        latency_s=response.latency_s,
        choices_returned=len(response.choices),
        seeds_emitted=len(candidates),
    )
