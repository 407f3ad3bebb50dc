"""Generation providers: a deterministic mock model and an HTTP client.

The mock provider stands in for a hosted generative model so sweeps
and campaigns run offline and bit-reproducibly.  Its temperature
behavior is shaped to the qualitative regime such models exhibit:
at temperature 0 it parrots its sample, rising temperature first
diversifies output through structure-preserving edits of the parsed
sample, and past 1.0 an increasing fraction of outputs picks up
character-level corruption.  All randomness flows through one caller-
supplied rng stream, so a fixed seed reproduces every byte.

The HTTP provider speaks the OpenAI-compatible wire shape (chat and
completion endpoints) so it can point at any compatible server.
"""

from __future__ import annotations

import copy
import math
import os
import time
from dataclasses import dataclass
from enum import Enum
from random import Random
from typing import Callable, Optional, Protocol, Sequence

import requests

from .errors import ProviderProtocolError, ProviderUnavailable
from .validate import (
    AssignStmt,
    BinOp,
    BoolLit,
    CallExpr,
    FnStmt,
    IfStmt,
    JsonError,
    LetStmt,
    NameExpr,
    NumberLit,
    Program,
    ReturnStmt,
    ScriptError,
    StringLit,
    UnaryOp,
    WhileStmt,
    XmlElement,
    XmlError,
    parse_json,
    parse_script,
    parse_xml,
    serialize_json,
    serialize_script,
    serialize_xml,
    sniff_format,
)


class Endpoint(Enum):
    CHAT = "chat"
    COMPLETION = "completion"


class PromptVariant(Enum):
    AI = "AI"
    AI_NOINPUT = "AI_noINPUT"
    AI_NOFORM = "AI_noFORM"


class FinishReason(Enum):
    STOP = "stop"
    LENGTH = "length"
    ERROR = "error"


DEFAULT_TEMPERATURE = {Endpoint.CHAT: 1.50, Endpoint.COMPLETION: 1.25}
DEFAULT_MODEL = {Endpoint.CHAT: "gpt-3.5-turbo", Endpoint.COMPLETION: "text-curie-001"}

# latency model: c0 + c1 * max_tokens + c2 * n, then +/-5% jitter
_LATENCY_CONSTANTS = {
    Endpoint.CHAT: (0.2, 0.004, 0.05),
    Endpoint.COMPLETION: (0.1, 0.002, 0.02),
}

# the mock model's context window, in its 4-chars-per-token accounting
MOCK_CONTEXT_TOKENS = 4096
# per-character mutation rate once a choice is selected for corruption
MOCK_CORRUPT_CHAR_RATE = 0.05


@dataclass(frozen=True)
class ChatRequestConfig:
    """Sampling knobs sent with every generation request."""

    max_tokens: int = 256
    n: int = 20
    temperature: Optional[float] = None

    def __post_init__(self) -> None:
        if self.max_tokens < 1:
            raise ValueError(f"max_tokens must be >= 1, got {self.max_tokens}")
        if not 1 <= self.n <= 128:
            raise ValueError(f"n must be in [1, 128], got {self.n}")
        if self.temperature is not None and not 0.0 <= self.temperature <= 2.0:
            raise ValueError(f"temperature must be in [0, 2], got {self.temperature}")

    def resolved_temperature(self, endpoint: Endpoint) -> float:
        if self.temperature is not None:
            return self.temperature
        return DEFAULT_TEMPERATURE[endpoint]


@dataclass(frozen=True)
class PromptPayload:
    """A rendered prompt plus the metadata the mock model feeds on.

    Chat payloads carry (system_text, user_text); completion payloads
    carry prompt_text.  format_name is None when the prompt withheld
    the format, and sample is None when it withheld the example input.
    """

    endpoint: Endpoint
    system_text: Optional[str] = None
    user_text: Optional[str] = None
    prompt_text: Optional[str] = None
    format_name: Optional[str] = None
    sample: Optional[bytes] = None


@dataclass(frozen=True)
class GenerationRequest:
    payload: PromptPayload
    cfg: ChatRequestConfig
    endpoint: Endpoint
    model_name: str


def make_request(
    payload: PromptPayload,
    cfg: ChatRequestConfig,
    model_name: Optional[str] = None,
) -> GenerationRequest:
    """Bundle a payload and config, defaulting the model per endpoint."""
    return GenerationRequest(
        payload=payload,
        cfg=cfg,
        endpoint=payload.endpoint,
        model_name=model_name or DEFAULT_MODEL[payload.endpoint],
    )


@dataclass(frozen=True)
class GenerationResponse:
    choices: tuple[str, ...]
    latency_s: float
    finish_reasons: tuple[FinishReason, ...]


class GenerationProvider(Protocol):
    def generate(self, request: GenerationRequest) -> GenerationResponse: ...


# ---------------------------------------------------------------------------
# mock model: vocabulary and canonical instances
# ---------------------------------------------------------------------------

# Word pool for renames and fresh scalars.  Deliberately disjoint from
# every bundled target's recognized schema vocabulary: the mock can only
# produce schema words by copying them out of the sample it was shown.
GENERIC_WORDS = (
    "alpha", "beta", "gamma", "delta", "omega", "record", "field", "values",
    "extra", "kind", "node", "leaf", "branch", "stone", "river", "cloud",
    "paper", "light", "sound", "color", "shape", "north", "south", "track",
    "layer", "point", "block", "frame", "panel", "badge", "token", "wire",
)

_CANONICAL_INSTANCES = {
    "xml": (
        '<record>\n  <field kind="plain">alpha</field>\n'
        '  <field kind="bold">beta</field>\n</record>\n'
    ),
    "json": '{"record": "alpha", "values": [1, 2, 3], "extra": true}',
    "script": (
        "let alpha = 1;\nfn blend(left, right) {\n  return left + right;\n}\n"
        "alpha = blend(alpha, 2);\n"
    ),
    "text": "alpha beta gamma\ndelta epsilon\n",
}


def canonical_instance(format_name: Optional[str]) -> str:
    """The document the mock emits when no sample is supplied."""
    if format_name in _CANONICAL_INSTANCES:
        return _CANONICAL_INSTANCES[format_name]
    return _CANONICAL_INSTANCES["text"]


def _sample_to_text(sample: bytes) -> str:
    try:
        return sample.decode("utf-8")
    except UnicodeDecodeError:
        return sample.decode("latin-1")


def _pick_word(rng: Random, local: Sequence[str]) -> str:
    if local and rng.random() < 0.5:
        return local[rng.randrange(len(local))]
    return GENERIC_WORDS[rng.randrange(len(GENERIC_WORDS))]


def _fresh_text(rng: Random) -> str:
    word = _pick_word(rng, ())
    if rng.random() < 0.6:
        return f"{word} {rng.randrange(0, 1_000_000)}"
    return word


def _fresh_name(rng: Random, local: Sequence[str], sep: str) -> str:
    """Identifier for a rename or insertion.

    Half the time reuse nearby vocabulary, otherwise mint a suffixed
    form so successive renames rarely retrace an earlier name.
    """
    if rng.random() < 0.5:
        return _pick_word(rng, local)
    return f"{_pick_word(rng, ())}{sep}{rng.randrange(10_000)}"


def _fresh_scalar(rng: Random):
    roll = rng.random()
    if roll < 0.35:
        return rng.randrange(0, 1_000_000)
    if roll < 0.55:
        return round(rng.uniform(0, 10_000), 3)
    if roll < 0.85:
        return _fresh_text(rng)
    if roll < 0.95:
        return rng.random() < 0.5
    return None


# ---------------------------------------------------------------------------
# mock model: structure-preserving edits per format
# ---------------------------------------------------------------------------


def _xml_node_list(root: XmlElement) -> list[tuple[XmlElement, Optional[XmlElement]]]:
    out: list[tuple[XmlElement, Optional[XmlElement]]] = []
    work: list[tuple[XmlElement, Optional[XmlElement]]] = [(root, None)]
    while work:
        node, parent = work.pop()
        out.append((node, parent))
        for child in node.elements():
            work.append((child, node))
    return out


def _edit_xml_tree(root: XmlElement, k: int, rng: Random) -> XmlElement:
    # every iteration must change the document; an op that cannot apply
    # at the chosen spot falls back to one that always can
    for _ in range(k):
        nodes = _xml_node_list(root)
        local_names = [node.name for node, _ in nodes]
        local_attrs = [name for node, _ in nodes for name, _ in node.attrs]
        node, parent = nodes[rng.randrange(len(nodes))]
        op = rng.randrange(6)
        if op == 3:
            inner = [(n, p) for n, p in nodes if p is not None]
            if inner:
                node, parent = inner[rng.randrange(len(inner))]
                idx = parent.children.index(node)
                parent.children.insert(idx + 1, copy.deepcopy(node))
                continue
            op = 2
        if op == 4:
            leaves = [
                (n, p)
                for n, p in nodes
                if p is not None and not any(isinstance(c, XmlElement) for c in n.children)
            ]
            if leaves and len(nodes) > 4:
                node, parent = leaves[rng.randrange(len(leaves))]
                parent.children.remove(node)
                continue
            op = 2
        if op == 0:
            new_name = _fresh_name(rng, local_names, "-")
            while new_name == node.name:
                new_name = _fresh_name(rng, local_names, "-")
            node.name = new_name
        elif op == 1:
            text_slots = [i for i, c in enumerate(node.children) if isinstance(c, str)]
            if text_slots:
                slot = text_slots[rng.randrange(len(text_slots))]
                word = _fresh_text(rng)
                while word == node.children[slot]:
                    word = _fresh_text(rng)
                node.children[slot] = word
            else:
                node.children.append(_fresh_text(rng))
        elif op == 2:
            name = _fresh_name(rng, local_attrs, "-")
            value = str(_fresh_scalar(rng))
            node.attrs.append((name, value))
        elif op == 5:
            wrapper = XmlElement(name=_pick_word(rng, local_names), children=[node])
            if parent is None:
                root = wrapper
            else:
                parent.children[parent.children.index(node)] = wrapper
    return root


def _json_slots(box: list) -> list[tuple[object, object]]:
    """(container, key) pairs for every value, including the root box."""
    out: list[tuple[object, object]] = [(box, 0)]
    work = [box[0]]
    while work:
        node = work.pop()
        if isinstance(node, dict):
            for key, child in node.items():
                out.append((node, key))
                work.append(child)
        elif isinstance(node, list):
            for idx, child in enumerate(node):
                out.append((node, idx))
                work.append(child)
    return out


def _edit_json_value(value, k: int, rng: Random):
    box = [value]
    # every iteration must change the document; ops that cannot apply at
    # the chosen spot fall back to the always-applicable wrap
    for _ in range(k):
        slots = _json_slots(box)
        container, key = slots[rng.randrange(len(slots))]
        current = container[key]
        local_keys = [
            key2 for cont, key2 in slots if isinstance(cont, dict) and isinstance(key2, str)
        ]
        op = rng.randrange(6)
        if op == 0 and isinstance(container, dict):
            fresh = _fresh_name(rng, local_keys, "-")
            while fresh == key:
                fresh = _fresh_name(rng, local_keys, "-")
            container[fresh] = container.pop(key)
        elif op == 1 and not isinstance(current, (dict, list)):
            fresh = _fresh_scalar(rng)
            while fresh == current:
                fresh = _fresh_scalar(rng)
            container[key] = fresh
        elif op == 2 and isinstance(current, dict):
            current[_pick_word(rng, local_keys)] = _fresh_scalar(rng)
        elif op == 2 and isinstance(current, list):
            current.insert(rng.randrange(len(current) + 1), _fresh_scalar(rng))
        elif op == 3 and isinstance(container, list):
            container.insert(key + 1, copy.deepcopy(current))
        elif op == 3 and isinstance(container, dict):
            fresh = _fresh_name(rng, local_keys, "-")
            while fresh == key:
                fresh = _fresh_name(rng, local_keys, "-")
            container[fresh] = copy.deepcopy(current)
        elif (
            op == 4
            and container is not box
            and len(slots) > 4
            and not isinstance(current, (dict, list))
        ):
            del container[key]
        else:
            container[key] = [current]
    return box[0]


def _script_walk(program: Program):
    """Collect mutation points: statement slots, name sites, exprs."""
    slots: list[tuple[list, int]] = []
    names: list[object] = []
    numbers: list[NumberLit] = []
    strings: list[StringLit] = []
    binops: list[BinOp] = []
    conds: list[object] = []

    def expr(node) -> None:
        work = [node]
        while work:
            cur = work.pop()
            if isinstance(cur, NumberLit):
                numbers.append(cur)
            elif isinstance(cur, StringLit):
                strings.append(cur)
            elif isinstance(cur, NameExpr):
                names.append(cur)
            elif isinstance(cur, UnaryOp):
                work.append(cur.operand)
            elif isinstance(cur, BinOp):
                binops.append(cur)
                work.append(cur.left)
                work.append(cur.right)
            elif isinstance(cur, CallExpr):
                work.append(cur.func)
                work.extend(cur.args)

    def block(body: list) -> None:
        for idx, stmt in enumerate(body):
            slots.append((body, idx))
            if isinstance(stmt, (LetStmt, AssignStmt)):
                names.append(stmt)
                expr(stmt.value)
            elif isinstance(stmt, IfStmt):
                conds.append(stmt)
                expr(stmt.cond)
                block(stmt.then_body)
                if stmt.else_body is not None:
                    block(stmt.else_body)
            elif isinstance(stmt, WhileStmt):
                conds.append(stmt)
                expr(stmt.cond)
                block(stmt.body)
            elif isinstance(stmt, FnStmt):
                names.append(stmt)
                names.append(("params", stmt))
                block(stmt.body)
            elif isinstance(stmt, ReturnStmt):
                if stmt.value is not None:
                    expr(stmt.value)
            else:
                expr(stmt.value)

    block(program.body)
    return slots, names, numbers, strings, binops, conds


def _script_name_of(site) -> Optional[str]:
    if isinstance(site, NameExpr):
        return site.name
    if isinstance(site, (LetStmt, AssignStmt, FnStmt)):
        return site.name
    return None


def _rename_script_everywhere(names: list, old: str, new: str) -> None:
    for site in names:
        if isinstance(site, tuple):
            _tag, fn = site
            fn.params = [new if p == old else p for p in fn.params]
        elif site.name == old:
            site.name = new


_ALL_BINOPS = ("||", "&&", "==", "!=", "<", ">", "<=", ">=", "+", "-", "*", "/", "%")


def _rename_targets(names: list) -> list[tuple]:
    """(apply, old_name) pairs for every renameable identifier site."""
    out = []
    for site in names:
        if isinstance(site, tuple):
            fn = site[1]
            for pidx, param in enumerate(fn.params):
                out.append((fn.params, pidx, param))
        else:
            out.append((site, None, site.name))
    return out


def _edit_script_tree(program: Program, k: int, rng: Random) -> Program:
    # every iteration must change the program; ops without a usable spot
    # fall back to the always-applicable statement duplication
    for _ in range(k):
        slots, names, numbers, strings, binops, conds = _script_walk(program)
        local = sorted({n for site in names if (n := _script_name_of(site)) is not None})
        op = rng.randrange(7)
        applied = True
        if op == 0 and names:
            targets = _rename_targets(names)
            holder, pidx, old = targets[rng.randrange(len(targets))]
            new_name = _fresh_name(rng, local, "_")
            while new_name == old:
                new_name = _fresh_name(rng, local, "_")
            if rng.random() < 0.5:
                _rename_script_everywhere(names, old, new_name)
            elif pidx is None:
                holder.name = new_name
            else:
                holder[pidx] = new_name
        elif op == 1 and numbers:
            lit = numbers[rng.randrange(len(numbers))]
            fresh = (
                str(rng.randrange(0, 1_000_000))
                if rng.random() < 0.7
                else f"{rng.uniform(0, 10_000):.3f}"
            )
            while fresh == lit.raw:
                fresh = str(rng.randrange(0, 1_000_000))
            lit.raw = fresh
        elif op in (1, 2) and strings:
            lit = strings[rng.randrange(len(strings))]
            fresh = _fresh_text(rng)
            while fresh == lit.value:
                fresh = _fresh_text(rng)
            lit.value = fresh
        elif op == 4:
            removable = [
                (body, idx)
                for body, idx in slots
                if not isinstance(body[idx], (IfStmt, WhileStmt, FnStmt))
                and (body is not program.body or len(program.body) > 1)
            ]
            if len(slots) > 3 and removable:
                body, idx = removable[rng.randrange(len(removable))]
                del body[idx]
            else:
                applied = False
        elif op == 5:
            body, idx = slots[rng.randrange(len(slots))]
            body[idx] = IfStmt(cond=BoolLit(True), then_body=[body[idx]], else_body=None)
        elif op == 6 and binops:
            site = binops[rng.randrange(len(binops))]
            fresh = _ALL_BINOPS[rng.randrange(len(_ALL_BINOPS))]
            while fresh == site.op:
                fresh = _ALL_BINOPS[rng.randrange(len(_ALL_BINOPS))]
            site.op = fresh
        elif op == 6 and conds:
            stmt = conds[rng.randrange(len(conds))]
            stmt.cond = UnaryOp(op="!", operand=stmt.cond)
        else:
            applied = False
        if not applied:
            body, idx = slots[rng.randrange(len(slots))]
            body.insert(idx + 1, copy.deepcopy(body[idx]))
    return program


def _edit_text(text: str, k: int, rng: Random) -> str:
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        lines = [""]
    for _ in range(k):
        op = rng.randrange(4)
        idx = rng.randrange(len(lines))
        if op == 0:
            lines.insert(idx + 1, lines[idx])
        elif op == 1 and len(lines) > 1:
            del lines[idx]
        elif op == 2:
            words = lines[idx].split(" ")
            words[rng.randrange(len(words))] = _pick_word(rng, ())
            lines[idx] = " ".join(words)
        else:
            lines[idx] = lines[idx] + " " + _pick_word(rng, ())
    return "\n".join(lines) + "\n"


def _raw_edit(text: str, k: int, rng: Random) -> str:
    chars = list(text)
    for _ in range(k):
        if not chars:
            chars.append(chr(rng.randrange(0x21, 0x7F)))
            continue
        roll = rng.random()
        pos = rng.randrange(len(chars))
        if roll < 0.6:
            chars[pos] = chr(rng.randrange(0x21, 0x7F))
        elif roll < 0.8:
            del chars[pos]
        else:
            chars.insert(pos, chr(rng.randrange(0x21, 0x7F)))
    return "".join(chars)


def _structured_variant(base_text: str, format_name: str, k: int, rng: Random) -> Optional[str]:
    """k structure-preserving edits of base_text, or None if unparseable."""
    try:
        if format_name == "xml":
            root, declaration = parse_xml(base_text)
            root = _edit_xml_tree(root, k, rng)
            return serialize_xml(root, declaration)
        if format_name == "json":
            value = parse_json(base_text)
            value = _edit_json_value(value, k, rng)
            return serialize_json(value)
        if format_name == "script":
            program = parse_script(base_text)
            program = _edit_script_tree(program, k, rng)
            return serialize_script(program)
        return _edit_text(base_text, k, rng)
    except (XmlError, JsonError, ScriptError):
        return None
    except RecursionError:
        return None


def _corrupt(text: str, rng: Random) -> str:
    out: list[str] = []
    for ch in text:
        if rng.random() >= MOCK_CORRUPT_CHAR_RATE:
            out.append(ch)
            continue
        roll = rng.random()
        if roll < 0.6:
            out.append(chr(rng.randrange(0x21, 0x7F)))
        elif roll < 0.8:
            continue
        else:
            out.append(ch)
            out.append(chr(rng.randrange(0x21, 0x7F)))
    return "".join(out)


def mock_p_dup(temperature: float) -> float:
    return min(1.0, max(0.0, 1.0 - temperature / 1.25))


def mock_p_corrupt(temperature: float) -> float:
    return min(0.4, max(0.0, (temperature - 1.0) / 2.5))


def mock_generate(
    sample: Optional[bytes],
    format_name: Optional[str],
    cfg: ChatRequestConfig,
    rng: Random,
    endpoint: Endpoint = Endpoint.COMPLETION,
) -> GenerationResponse:
    """Deterministic generative stand-in.

    Per choice: emit the sample verbatim with probability p_dup(t);
    otherwise apply k = 1 + floor(4t) structure-preserving edits to the
    parsed sample (or to a canonical instance when no sample is given),
    then with probability p_corrupt(t) mangle characters.  A sample the
    format grammar cannot parse degrades to raw character edits.
    Choice count is capped by a simulated context window, and choices
    longer than max_tokens are truncated with finish_reason "length".
    """
    temperature = cfg.resolved_temperature(endpoint)
    p_dup = mock_p_dup(temperature)
    p_corrupt = mock_p_corrupt(temperature)
    k = 1 + math.floor(4 * temperature)

    if sample is not None:
        base_text = _sample_to_text(sample)
        fmt = format_name if format_name is not None else sniff_format(base_text)
    else:
        fmt = format_name if format_name is not None else "text"
        base_text = canonical_instance(fmt)

    prompt_tokens = math.ceil((len(base_text) + 64) / 4)
    budget = MOCK_CONTEXT_TOKENS - prompt_tokens

    choices: list[str] = []
    reasons: list[FinishReason] = []
    for _ in range(cfg.n):
        if budget <= 0:
            break
        if rng.random() < p_dup:
            text = base_text
        else:
            text = _structured_variant(base_text, fmt, k, rng)
            if text is None:
                text = _raw_edit(base_text, k, rng)
        if p_corrupt > 0.0 and rng.random() < p_corrupt:
            text = _corrupt(text, rng)
        reason = FinishReason.STOP
        limit = cfg.max_tokens * 4
        if len(text) > limit:
            text = text[:limit]
            reason = FinishReason.LENGTH
        cost = max(1, math.ceil(len(text) / 4))
        if cost > budget:
            break
        budget -= cost
        choices.append(text)
        reasons.append(reason)

    c0, c1, c2 = _LATENCY_CONSTANTS[endpoint]
    latency = (c0 + c1 * cfg.max_tokens + c2 * cfg.n) * (1.0 + rng.uniform(-0.05, 0.05))
    return GenerationResponse(
        choices=tuple(choices),
        latency_s=latency,
        finish_reasons=tuple(reasons),
    )


class MockProvider:
    """Offline provider wrapping mock_generate with one owned rng stream."""

    def __init__(self, seed: int = 0) -> None:
        self._rng = Random(seed)

    def generate(self, request: GenerationRequest) -> GenerationResponse:
        return mock_generate(
            request.payload.sample,
            request.payload.format_name,
            request.cfg,
            self._rng,
            endpoint=request.endpoint,
        )


# ---------------------------------------------------------------------------
# HTTP provider
# ---------------------------------------------------------------------------

DEFAULT_BASE_URL = "https://api.openai.com"
DEFAULT_PROVIDER_TIMEOUT_S = 30.0

_RETRY_ATTEMPTS = 4
_RETRY_BACKOFF_BASE_S = 1.0


def render_http_body(request: GenerationRequest) -> tuple[str, dict]:
    """(url path, JSON body) for a request, matching the wire contract."""
    cfg = request.cfg
    common = {
        "model": request.model_name,
        "max_tokens": cfg.max_tokens,
        "n": cfg.n,
        "temperature": cfg.resolved_temperature(request.endpoint),
    }
    if request.endpoint is Endpoint.CHAT:
        body = {
            "model": common["model"],
            "messages": [
                {"role": "system", "content": request.payload.system_text or ""},
                {"role": "user", "content": request.payload.user_text or ""},
            ],
            "max_tokens": common["max_tokens"],
            "n": common["n"],
            "temperature": common["temperature"],
        }
        return "/v1/chat/completions", body
    body = {
        "model": common["model"],
        "prompt": request.payload.prompt_text or "",
        "max_tokens": common["max_tokens"],
        "n": common["n"],
        "temperature": common["temperature"],
    }
    return "/v1/completions", body


def _parse_http_choices(data: dict, endpoint: Endpoint) -> tuple[list[str], list[FinishReason]]:
    try:
        raw_choices = data["choices"]
        texts: list[str] = []
        reasons: list[FinishReason] = []
        for choice in raw_choices:
            if endpoint is Endpoint.CHAT:
                texts.append(choice["message"]["content"])
            else:
                texts.append(choice["text"])
            finish = choice.get("finish_reason", "stop")
            if finish == "stop":
                reasons.append(FinishReason.STOP)
            elif finish == "length":
                reasons.append(FinishReason.LENGTH)
            else:
                reasons.append(FinishReason.ERROR)
        return texts, reasons
    except (KeyError, TypeError) as err:
        raise ProviderProtocolError(f"malformed provider response: {err!r}") from err


class HttpProvider:
    """OpenAI-compatible client with bounded retry on 429/5xx.

    Base URL and key come from OPENAI_BASE_URL / OPENAI_API_KEY unless
    given explicitly.  The sleep callable is injectable for tests.
    """

    def __init__(
        self,
        base_url: Optional[str] = None,
        api_key: Optional[str] = None,
        timeout_s: float = DEFAULT_PROVIDER_TIMEOUT_S,
        session: Optional[requests.Session] = None,
        sleep: Callable[[float], None] = time.sleep,
    ) -> None:
        self.base_url = (base_url or os.environ.get("OPENAI_BASE_URL") or DEFAULT_BASE_URL).rstrip("/")
        self.api_key = api_key if api_key is not None else os.environ.get("OPENAI_API_KEY", "")
        self.timeout_s = timeout_s
        self.session = session or requests.Session()
        self._sleep = sleep

    def generate(self, request: GenerationRequest) -> GenerationResponse:
        path, body = render_http_body(request)
        url = self.base_url + path
        headers = {
            "Authorization": f"Bearer {self.api_key}",
            "Content-Type": "application/json",
        }
        start = time.perf_counter()
        last_failure = "no attempt made"
        for attempt in range(_RETRY_ATTEMPTS):
            if attempt > 0:
                self._sleep(_RETRY_BACKOFF_BASE_S * (2 ** (attempt - 1)))
            try:
                response = self.session.post(url, json=body, headers=headers, timeout=self.timeout_s)
            except requests.RequestException as err:
                last_failure = f"transport error: {err}"
                continue
            status = response.status_code
            if status == 429 or status >= 500:
                last_failure = f"HTTP {status}"
                continue
            if status >= 400:
                raise ProviderUnavailable(f"HTTP {status} from {url} (not retryable)")
            try:
                data = response.json()
            except ValueError as err:
                raise ProviderProtocolError(f"response body is not JSON: {err}") from err
            texts, reasons = _parse_http_choices(data, request.endpoint)
            latency = time.perf_counter() - start
            return GenerationResponse(
                choices=tuple(texts),
                latency_s=latency,
                finish_reasons=tuple(reasons),
            )
        raise ProviderUnavailable(f"giving up on {url} after {_RETRY_ATTEMPTS} attempts: {last_failure}")
