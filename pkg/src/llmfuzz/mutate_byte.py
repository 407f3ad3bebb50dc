"""Stacked byte-level mutations (the classic havoc stage).

Each call applies a stack of 1..8 operations drawn uniformly from the
available op table: bit flip, random byte, small arithmetic, boundary
("interesting") value overwrite, chunk delete, chunk duplicate, token
insert/overwrite from an optional dictionary, and splice against
another corpus entry.  Dictionary and splice ops only enter the table
when material for them exists, keeping the remaining ops uniform.

There is deliberately no deterministic walking stage; this mutator is
pure havoc.  Outputs never exceed MAX_INPUT_SIZE, and an empty buffer
degrades every op to a one-byte insert so the mutator cannot get stuck.
"""

from __future__ import annotations

from pathlib import Path
from random import Random
from typing import Optional, Sequence, Union

from .errors import DictionaryParseError

MAX_INPUT_SIZE = 1 << 20

# Boundary values that historically shake out off-by-one and sign bugs.
INTERESTING_8 = (0, 1, 16, 32, 64, 100, 127, 128, 255)
INTERESTING_16 = (0, 1, 256, 512, 1000, 1024, 4096, 32767, 32768, 65535)

_ARITH_MAX = 35
_CHUNK_MAX = 64
_STACK_MIN, _STACK_MAX = 1, 8


def _op_bit_flip(buf: bytearray, rng: Random) -> None:
    pos = rng.randrange(len(buf))
    buf[pos] ^= 1 << rng.randrange(8)


def _op_byte_set(buf: bytearray, rng: Random) -> None:
    buf[rng.randrange(len(buf))] = rng.randrange(256)


def _op_byte_arith(buf: bytearray, rng: Random) -> None:
    pos = rng.randrange(len(buf))
    delta = rng.randrange(1, _ARITH_MAX + 1)
    if rng.random() < 0.5:
        delta = -delta
    buf[pos] = (buf[pos] + delta) & 0xFF


def _op_interesting(buf: bytearray, rng: Random) -> None:
    if len(buf) >= 2 and rng.random() < 0.5:
        pos = rng.randrange(len(buf) - 1)
        value = rng.choice(INTERESTING_16)
        buf[pos] = value & 0xFF
        buf[pos + 1] = (value >> 8) & 0xFF
    else:
        buf[rng.randrange(len(buf))] = rng.choice(INTERESTING_8)


def _op_chunk_delete(buf: bytearray, rng: Random) -> None:
    length = rng.randrange(1, min(len(buf), _CHUNK_MAX) + 1)
    start = rng.randrange(len(buf) - length + 1)
    del buf[start : start + length]


def _op_chunk_duplicate(buf: bytearray, rng: Random) -> None:
    length = rng.randrange(1, min(len(buf), _CHUNK_MAX) + 1)
    start = rng.randrange(len(buf) - length + 1)
    chunk = buf[start : start + length]
    at = rng.randrange(len(buf) + 1)
    buf[at:at] = chunk


def havoc(
    data: bytes,
    rng: Random,
    dictionary: Optional[Sequence[bytes]] = None,
    others: Optional[Sequence[bytes]] = None,
) -> bytes:
    """One havoc round: 1..8 stacked random mutations of data."""
    buf = bytearray(data)
    ops = ["bit_flip", "byte_set", "byte_arith", "interesting", "chunk_delete", "chunk_duplicate"]
    if dictionary:
        ops.extend(["dict_insert", "dict_overwrite"])
    if others:
        ops.append("splice")

    for _ in range(rng.randrange(_STACK_MIN, _STACK_MAX + 1)):
        if not buf:
            buf.append(rng.randrange(256))
            continue
        op = rng.choice(ops)
        if op == "bit_flip":
            _op_bit_flip(buf, rng)
        elif op == "byte_set":
            _op_byte_set(buf, rng)
        elif op == "byte_arith":
            _op_byte_arith(buf, rng)
        elif op == "interesting":
            _op_interesting(buf, rng)
        elif op == "chunk_delete":
            _op_chunk_delete(buf, rng)
        elif op == "chunk_duplicate":
            if len(buf) < MAX_INPUT_SIZE:
                _op_chunk_duplicate(buf, rng)
        elif op == "dict_insert":
            token = dictionary[rng.randrange(len(dictionary))]
            at = rng.randrange(len(buf) + 1)
            buf[at:at] = token
        elif op == "dict_overwrite":
            token = dictionary[rng.randrange(len(dictionary))]
            if len(token) <= len(buf):
                at = rng.randrange(len(buf) - len(token) + 1)
                buf[at : at + len(token)] = token
        else:  # splice
            other = others[rng.randrange(len(others))]
            if other:
                keep = rng.randrange(1, len(buf) + 1)
                take = rng.randrange(len(other))
                buf = buf[:keep] + bytearray(other[take:])
        if len(buf) > MAX_INPUT_SIZE:
            del buf[MAX_INPUT_SIZE:]

    return bytes(buf)


# ---------------------------------------------------------------------------
# dictionary files
# ---------------------------------------------------------------------------

_HEX_DIGITS = "0123456789abcdefABCDEF"


def _unescape_token(raw: str, line_no: int) -> bytes:
    out = bytearray()
    i = 0
    n = len(raw)
    while i < n:
        ch = raw[i]
        if ch != "\\":
            out.extend(ch.encode("latin-1"))
            i += 1
            continue
        if i + 1 >= n:
            raise DictionaryParseError(line_no, "dangling backslash in token")
        esc = raw[i + 1]
        if esc == "\\":
            out.append(0x5C)
            i += 2
        elif esc == '"':
            out.append(0x22)
            i += 2
        elif esc == "x":
            if i + 3 >= n or raw[i + 2] not in _HEX_DIGITS or raw[i + 3] not in _HEX_DIGITS:
                raise DictionaryParseError(line_no, "\\x escape needs two hex digits")
            out.append(int(raw[i + 2 : i + 4], 16))
            i += 4
        else:
            raise DictionaryParseError(line_no, f"unknown escape \\{esc}")
    return bytes(out)


def parse_dictionary(text: str) -> list[bytes]:
    """Parse token definitions, one ``name="value"`` per line.

    Blank lines and ``#`` comments are skipped.  Values support \\\\,
    \\" and \\xNN escapes.  Returns token byte strings in file order.
    """
    tokens: list[bytes] = []
    for line_no, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        eq = stripped.find("=")
        if eq < 0:
            raise DictionaryParseError(line_no, "expected name=\"value\"")
        value = stripped[eq + 1 :].strip()
        if len(value) < 2 or value[0] != '"' or value[-1] != '"':
            raise DictionaryParseError(line_no, "token value must be double-quoted")
        body = value[1:-1]
        # an interior unescaped quote means the line had trailing junk
        j = 0
        while j < len(body):
            if body[j] == "\\":
                j += 2
                continue
            if body[j] == '"':
                raise DictionaryParseError(line_no, "unescaped quote inside token")
            j += 1
        tokens.append(_unescape_token(body, line_no))
    return tokens


def load_dictionary(path: Union[str, Path]) -> list[bytes]:
    """Read and parse a dictionary file."""
    return parse_dictionary(Path(path).read_text(encoding="latin-1"))
