"""Bundled instrumented toy parsers.

Each target consumes raw bytes and reports a verdict plus an edge
trace.  Traces are two-stage by construction: parse-stage edges are
emitted only when a consumption step succeeds (so inputs that fail to
parse can never reach an edge that accepted inputs cannot), and
deep-stage edges are emitted only after a complete successful parse,
keyed on structural properties of the parsed document.  Structural
edges are the currency that rewards a mutator for producing valid,
*different* documents rather than byte noise.

The rich targets (xml, json, script) gate their deep stage on a fixed
schema vocabulary, the way real consumers branch on known field names:
a known tag/key/identifier earns an edge of its own plus combination
edges (name x child count, name x value kind, name x role), while
unrecognized names all share one bucket.  Inputs that keep the corpus
vocabulary while varying structure therefore reach far more of the map
than inputs with random names.  toy-checksum has no such vocabulary
and almost no deep stage at all.

Edge ids are target-local; campaigns never mix targets in one map.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Union

from .errors import UnknownTarget
from .harness import InProcessTarget, Verdict

# ---------------------------------------------------------------------------
# shared helpers
# ---------------------------------------------------------------------------


class _Trace:
    """Mutable edge hit accumulator; always contains the entry edge."""

    __slots__ = ("hits",)

    def __init__(self) -> None:
        self.hits: dict[int, int] = {0: 1}

    def hit(self, edge: int) -> None:
        self.hits[edge] = self.hits.get(edge, 0) + 1


def _fnv1a(data: bytes) -> int:
    """32-bit FNV-1a; deterministic across processes, unlike hash()."""
    h = 0x811C9DC5
    for byte in data:
        h = ((h ^ byte) * 0x01000193) & 0xFFFFFFFF
    return h


def _log2_bucket(n: int) -> int:
    """Bucket a positive count: 1,2,3-4,5-8,9-16,17-32,33-64,65+ -> 0..7."""
    for idx, upper in enumerate((1, 2, 4, 8, 16, 32, 64)):
        if n <= upper:
            return idx
    return 7


def _len_bucket(n: int) -> int:
    """Bucket a length: <8, <32, <128, >=128 -> 0..3."""
    if n < 8:
        return 0
    if n < 32:
        return 1
    if n < 128:
        return 2
    return 3


# ---------------------------------------------------------------------------
# toy-xml
# ---------------------------------------------------------------------------

_X_WS = " \t\r\n"
_X_NAME_STOP = frozenset(_X_WS + "<>/=\"'")

# Deep-stage vocabulary: tags and attribute names the target "knows".
XML_SCHEMA_TAGS = (
    "catalog", "book", "title", "price", "author", "note", "to", "from",
    "body", "item", "list", "entry", "chapter", "section", "meta", "header",
)
XML_SCHEMA_ATTRS = ("id", "lang", "priority", "class", "type", "href", "ref", "key")
_X_TAG_IDX = {tag: i for i, tag in enumerate(XML_SCHEMA_TAGS)}
_X_ATTR_IDX = {attr: i for i, attr in enumerate(XML_SCHEMA_ATTRS)}

# parse stage
_X_DECL, _X_OPEN, _X_ATTR, _X_SELF, _X_CLOSE, _X_TEXT, _X_WSRUN, _X_OK = 1, 2, 3, 4, 5, 6, 7, 8
# deep stage bases
_X_DEPTH = 16          # 16..23: max nesting depth
_X_COUNT = 24          # 24..31: element count bucket
_X_TAG = 32            # 32..47: known tag seen
_X_TAGOTHER = 48       # unknown tag seen
_X_TAGKIDS = 50        # 50..113: known tag x child-element count (0,1,2,3+)
_X_TAGATTR = 114       # 114..145: known tag x has-attributes
_X_PAIR = 146          # 146..193: known parent>child pair hash
_X_ANAME = 194         # 194..201: known attribute name
_X_ANAMEOTHER = 202    # unknown attribute name
_X_TEXTLEN = 203       # 203..206: text run length bucket
_X_FLAG = 207          # 207..211: structure flags
_X_TEXTHASH = 212      # 212..1235: known tag x text content hash
_X_AVALHASH = 1236     # 1236..1491: known attribute x value hash

_XmlNode = list  # [name, attrs, children]; strings are text children


def toy_xml(data: bytes) -> tuple[Verdict, dict[int, int], str]:
    """Instrumented parser for the five-rule xml dialect."""
    tr = _Trace()
    text = data.decode("latin-1")
    n = len(text)
    pos = 0

    while pos < n and text[pos] in _X_WS:
        pos += 1
    if text.startswith("<?", pos):
        end = text.find("?>", pos + 2)
        if end < 0:
            return Verdict.PARSE_ERROR, tr.hits, "rule 1: eof in declaration"
        tr.hit(_X_DECL)
        pos = end + 2

    stack: list[_XmlNode] = []
    root: Optional[_XmlNode] = None

    while pos < n:
        if text[pos] != "<":
            start = pos
            while pos < n and text[pos] != "<":
                pos += 1
            run = text[start:pos]
            stripped = run.strip(_X_WS)
            if stack:
                stack[-1][2].append(run)
                tr.hit(_X_TEXT if stripped else _X_WSRUN)
            elif stripped:
                return Verdict.PARSE_ERROR, tr.hits, "rule 4: text outside root"
            else:
                tr.hit(_X_WSRUN)
            continue

        if pos + 1 >= n:
            return Verdict.PARSE_ERROR, tr.hits, "rule 1: eof in markup"
        nxt = text[pos + 1]

        if nxt == "?":
            return Verdict.PARSE_ERROR, tr.hits, "rule 4: declaration after content"

        if nxt == "/":
            pos += 2
            start = pos
            while pos < n and text[pos] not in _X_NAME_STOP:
                pos += 1
            name = text[start:pos]
            if not name:
                return Verdict.PARSE_ERROR, tr.hits, "rule 3: empty closing tag"
            while pos < n and text[pos] in _X_WS:
                pos += 1
            if pos >= n:
                return Verdict.PARSE_ERROR, tr.hits, "rule 1: eof in closing tag"
            if text[pos] != ">":
                return Verdict.PARSE_ERROR, tr.hits, "rule 3: malformed closing tag"
            pos += 1
            if not stack:
                if root is not None:
                    return Verdict.PARSE_ERROR, tr.hits, "rule 4: close after root"
                return Verdict.PARSE_ERROR, tr.hits, "rule 3: stray closing tag"
            if stack[-1][0] != name:
                if stack[-1][0].lower() == name.lower():
                    return Verdict.PARSE_ERROR, tr.hits, "rule 2: tag case mismatch"
                return Verdict.PARSE_ERROR, tr.hits, "rule 3: mismatched closing tag"
            tr.hit(_X_CLOSE)
            node = stack.pop()
            if not stack:
                root = node
            continue

        pos += 1
        start = pos
        while pos < n and text[pos] not in _X_NAME_STOP:
            pos += 1
        name = text[start:pos]
        if not name:
            return Verdict.PARSE_ERROR, tr.hits, "rule 3: empty tag name"
        node: _XmlNode = [name, [], []]

        self_closing = False
        while True:
            while pos < n and text[pos] in _X_WS:
                pos += 1
            if pos >= n:
                return Verdict.PARSE_ERROR, tr.hits, "rule 1: eof in tag"
            ch = text[pos]
            if ch == "/":
                if pos + 1 >= n:
                    return Verdict.PARSE_ERROR, tr.hits, "rule 1: eof in tag"
                if text[pos + 1] != ">":
                    return Verdict.PARSE_ERROR, tr.hits, "rule 5: stray '/' in tag"
                pos += 2
                self_closing = True
                break
            if ch == ">":
                pos += 1
                break
            if ch in "='\"":
                return Verdict.PARSE_ERROR, tr.hits, "rule 5: attribute syntax"
            astart = pos
            while pos < n and text[pos] not in _X_NAME_STOP:
                pos += 1
            attr = text[astart:pos]
            while pos < n and text[pos] in _X_WS:
                pos += 1
            if pos >= n:
                return Verdict.PARSE_ERROR, tr.hits, "rule 1: eof in tag"
            if text[pos] != "=":
                return Verdict.PARSE_ERROR, tr.hits, "rule 5: attribute missing value"
            pos += 1
            while pos < n and text[pos] in _X_WS:
                pos += 1
            if pos >= n:
                return Verdict.PARSE_ERROR, tr.hits, "rule 1: eof in tag"
            quote = text[pos]
            if quote not in "'\"":
                return Verdict.PARSE_ERROR, tr.hits, "rule 5: unquoted attribute value"
            end = text.find(quote, pos + 1)
            if end < 0:
                return Verdict.PARSE_ERROR, tr.hits, "rule 1: eof in attribute value"
            node[1].append((attr, text[pos + 1 : end]))
            tr.hit(_X_ATTR)
            pos = end + 1
            if pos < n and text[pos] not in _X_WS and text[pos] not in "/>":
                return Verdict.PARSE_ERROR, tr.hits, "rule 5: attributes not separated"

        tr.hit(_X_SELF if self_closing else _X_OPEN)
        if not stack:
            if root is not None:
                return Verdict.PARSE_ERROR, tr.hits, "rule 4: multiple roots"
            if self_closing:
                root = node
            else:
                stack.append(node)
        else:
            stack[-1][2].append(node)
            if not self_closing:
                stack.append(node)

    if stack:
        return Verdict.PARSE_ERROR, tr.hits, "rule 1: unclosed element"
    if root is None:
        return Verdict.PARSE_ERROR, tr.hits, "rule 4: no root element"

    tr.hit(_X_OK)
    _xml_deep(root, tr)
    return Verdict.ACCEPTED, tr.hits, ""


def _xml_deep(root: _XmlNode, tr: _Trace) -> None:
    max_depth = 0
    count = 0
    if root[1]:
        tr.hit(_X_FLAG + 4)
    work: list[tuple[_XmlNode, int, Optional[str]]] = [(root, 1, None)]
    while work:
        node, depth, parent = work.pop()
        name, attrs, children = node
        count += 1
        max_depth = max(max_depth, depth)
        child_elems = sum(1 for child in children if not isinstance(child, str))
        tag_idx = _X_TAG_IDX.get(name)
        if tag_idx is None:
            tr.hit(_X_TAGOTHER)
        else:
            tr.hit(_X_TAG + tag_idx)
            tr.hit(_X_TAGKIDS + tag_idx * 4 + min(child_elems, 3))
            tr.hit(_X_TAGATTR + tag_idx * 2 + (1 if attrs else 0))
            if parent is not None and parent in _X_TAG_IDX:
                tr.hit(_X_PAIR + _fnv1a(f"{parent}>{name}".encode("latin-1")) % 48)
        for aname, avalue in attrs:
            attr_idx = _X_ATTR_IDX.get(aname)
            if attr_idx is None:
                tr.hit(_X_ANAMEOTHER)
            else:
                tr.hit(_X_ANAME + attr_idx)
                tr.hit(_X_AVALHASH + attr_idx * 32 + _fnv1a(avalue.encode("latin-1")) % 32)
            if len(avalue) > 8:
                tr.hit(_X_FLAG + 2)
            if any(c.isdigit() for c in avalue):
                tr.hit(_X_FLAG + 3)
        has_text = False
        for child in children:
            if isinstance(child, str):
                body = child.strip(_X_WS)
                if body:
                    has_text = True
                    tr.hit(_X_TEXTLEN + _len_bucket(len(child)))
                    if tag_idx is not None:
                        tr.hit(_X_TEXTHASH + tag_idx * 64 + _fnv1a(body.encode("latin-1")) % 64)
            else:
                work.append((child, depth + 1, name))
        if child_elems > 1:
            tr.hit(_X_FLAG + 0)
        if has_text and child_elems:
            tr.hit(_X_FLAG + 1)
    tr.hit(_X_DEPTH + min(max_depth, 7))
    tr.hit(_X_COUNT + _log2_bucket(count))


# ---------------------------------------------------------------------------
# toy-json
# ---------------------------------------------------------------------------

_J_WSSET = " \t\r\n"

# Deep-stage vocabulary: object keys the target "knows".
JSON_SCHEMA_KEYS = (
    "name", "items", "sku", "qty", "open", "city", "pop", "id",
    "type", "tags", "meta", "count", "label", "price", "active", "user",
)
_J_KEY_IDX = {key: i for i, key in enumerate(JSON_SCHEMA_KEYS)}

# parse stage
(_J_OBJ, _J_KEY, _J_OBJEND, _J_ARR, _J_ELEM, _J_ARREND, _J_STR, _J_NUM,
 _J_TRUE, _J_FALSE, _J_NULL, _J_ESC, _J_UESC, _J_FRAC, _J_EXP, _J_OK) = range(1, 17)
# deep stage bases
_J_DEPTH = 32          # 32..39: max nesting depth
_J_COUNT = 40          # 40..47: node count bucket
_J_KEYED = 48          # 48..63: known key seen
_J_KEYOTHER = 64       # unknown key seen
_J_KEYKIND = 65        # 65..160: known key x value kind
_J_ROOT = 161          # 161..166: root value kind
_J_STRLEN = 167        # 167..170: string length bucket
_J_NUMF = 171          # 171..175: number shape flags
_J_PAIRS = 176         # 176..187: container kind x child kind
_J_FLAG = 188          # 188..190: structure flags
_J_VALHASH = 191       # 191..446: known key x scalar value hash

_JSON_MAX_DEPTH = 64
_J_ESCMAP = {'"': '"', "\\": "\\", "/": "/", "b": "\b", "f": "\f", "n": "\n", "r": "\r", "t": "\t"}


class _JsonFail(Exception):
    pass


class _JsonRun:
    """Instrumented strict-json recursive descent."""

    def __init__(self, text: str, tr: _Trace) -> None:
        self.text = text
        self.n = len(text)
        self.pos = 0
        self.tr = tr

    def fail(self, message: str) -> Exception:
        return _JsonFail(f"offset {self.pos}: {message}")

    def ws(self) -> None:
        while self.pos < self.n and self.text[self.pos] in _J_WSSET:
            self.pos += 1

    def top(self):
        value = self.value(0)
        self.ws()
        if self.pos < self.n:
            raise self.fail("trailing data")
        return value

    def value(self, depth: int):
        self.ws()
        if self.pos >= self.n:
            raise self.fail("unexpected end")
        ch = self.text[self.pos]
        if ch == "{":
            if depth >= _JSON_MAX_DEPTH:
                raise self.fail("too deep")
            return self.obj(depth)
        if ch == "[":
            if depth >= _JSON_MAX_DEPTH:
                raise self.fail("too deep")
            return self.arr(depth)
        if ch == '"':
            out = self.string()
            self.tr.hit(_J_STR)
            return out
        if ch == "-" or "0" <= ch <= "9":
            return self.number()
        for lit, val, edge in (("true", True, _J_TRUE), ("false", False, _J_FALSE), ("null", None, _J_NULL)):
            if self.text.startswith(lit, self.pos):
                self.pos += len(lit)
                self.tr.hit(edge)
                return val
        raise self.fail(f"unexpected character {ch!r}")

    def obj(self, depth: int) -> dict:
        self.pos += 1
        self.tr.hit(_J_OBJ)
        out: dict = {}
        self.ws()
        if self.pos < self.n and self.text[self.pos] == "}":
            self.pos += 1
            self.tr.hit(_J_OBJEND)
            return out
        while True:
            self.ws()
            if self.pos >= self.n or self.text[self.pos] != '"':
                raise self.fail("expected key")
            key = self.string()
            self.tr.hit(_J_KEY)
            self.ws()
            if self.pos >= self.n or self.text[self.pos] != ":":
                raise self.fail("expected ':'")
            self.pos += 1
            out[key] = self.value(depth + 1)
            self.ws()
            if self.pos >= self.n:
                raise self.fail("unterminated object")
            ch = self.text[self.pos]
            self.pos += 1
            if ch == "}":
                self.tr.hit(_J_OBJEND)
                return out
            if ch != ",":
                self.pos -= 1
                raise self.fail("expected ',' or '}'")

    def arr(self, depth: int) -> list:
        self.pos += 1
        self.tr.hit(_J_ARR)
        out: list = []
        self.ws()
        if self.pos < self.n and self.text[self.pos] == "]":
            self.pos += 1
            self.tr.hit(_J_ARREND)
            return out
        while True:
            out.append(self.value(depth + 1))
            self.tr.hit(_J_ELEM)
            self.ws()
            if self.pos >= self.n:
                raise self.fail("unterminated array")
            ch = self.text[self.pos]
            self.pos += 1
            if ch == "]":
                self.tr.hit(_J_ARREND)
                return out
            if ch != ",":
                self.pos -= 1
                raise self.fail("expected ',' or ']'")

    def string(self) -> str:
        self.pos += 1
        out: list[str] = []
        while True:
            if self.pos >= self.n:
                raise self.fail("unterminated string")
            ch = self.text[self.pos]
            if ch == '"':
                self.pos += 1
                return "".join(out)
            if ch == "\\":
                self.pos += 1
                if self.pos >= self.n:
                    raise self.fail("unterminated escape")
                esc = self.text[self.pos]
                if esc in _J_ESCMAP:
                    out.append(_J_ESCMAP[esc])
                    self.pos += 1
                    self.tr.hit(_J_ESC)
                elif esc == "u":
                    hexpart = self.text[self.pos + 1 : self.pos + 5]
                    if len(hexpart) != 4 or any(c not in "0123456789abcdefABCDEF" for c in hexpart):
                        raise self.fail("bad unicode escape")
                    out.append(chr(int(hexpart, 16)))
                    self.pos += 5
                    self.tr.hit(_J_UESC)
                else:
                    raise self.fail("bad escape")
            elif ord(ch) < 0x20:
                raise self.fail("control character in string")
            else:
                out.append(ch)
                self.pos += 1

    def number(self):
        text, n = self.text, self.n
        start = self.pos
        if text[self.pos] == "-":
            self.pos += 1
        if self.pos >= n or not "0" <= text[self.pos] <= "9":
            raise self.fail("bad number")
        if text[self.pos] == "0":
            self.pos += 1
            if self.pos < n and "0" <= text[self.pos] <= "9":
                raise self.fail("leading zero")
        else:
            while self.pos < n and "0" <= text[self.pos] <= "9":
                self.pos += 1
        is_float = False
        if self.pos < n and text[self.pos] == ".":
            self.pos += 1
            if self.pos >= n or not "0" <= text[self.pos] <= "9":
                raise self.fail("bad fraction")
            while self.pos < n and "0" <= text[self.pos] <= "9":
                self.pos += 1
            is_float = True
            self.tr.hit(_J_FRAC)
        if self.pos < n and text[self.pos] in "eE":
            self.pos += 1
            if self.pos < n and text[self.pos] in "+-":
                self.pos += 1
            if self.pos >= n or not "0" <= text[self.pos] <= "9":
                raise self.fail("bad exponent")
            while self.pos < n and "0" <= text[self.pos] <= "9":
                self.pos += 1
            is_float = True
            self.tr.hit(_J_EXP)
        self.tr.hit(_J_NUM)
        raw = text[start : self.pos]
        return float(raw) if is_float else int(raw)


def toy_json(data: bytes) -> tuple[Verdict, dict[int, int], str]:
    """Instrumented parser for the strict json dialect."""
    tr = _Trace()
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError:
        return Verdict.PARSE_ERROR, tr.hits, "invalid utf-8"
    run = _JsonRun(text, tr)
    try:
        value = run.top()
    except _JsonFail as err:
        return Verdict.PARSE_ERROR, tr.hits, str(err)
    tr.hit(_J_OK)
    _json_deep(value, tr)
    return Verdict.ACCEPTED, tr.hits, ""


_J_KIND = {dict: 0, list: 1, str: 2, int: 3, float: 3, bool: 4, type(None): 5}


def _json_kind(value) -> int:
    if isinstance(value, bool):
        return 4
    if isinstance(value, dict):
        return 0
    if isinstance(value, list):
        return 1
    if isinstance(value, str):
        return 2
    if value is None:
        return 5
    return 3


def _json_deep(value, tr: _Trace) -> None:
    max_depth = 0
    count = 0
    tr.hit(_J_ROOT + _json_kind(value))
    work: list[tuple[object, int, Optional[int]]] = [(value, 0, None)]
    while work:
        node, depth, container = work.pop()
        count += 1
        max_depth = max(max_depth, depth)
        kind = _json_kind(node)
        if container is not None:
            tr.hit(_J_PAIRS + container * 6 + kind)
        if kind == 0:
            if not node:
                tr.hit(_J_FLAG + 0)
            for key, child in node.items():
                key_idx = _J_KEY_IDX.get(key)
                if key_idx is None:
                    tr.hit(_J_KEYOTHER)
                else:
                    tr.hit(_J_KEYED + key_idx)
                    tr.hit(_J_KEYKIND + key_idx * 6 + _json_kind(child))
                    if not isinstance(child, (dict, list)):
                        blob = repr(child).encode("latin-1", "replace")
                        tr.hit(_J_VALHASH + key_idx * 16 + _fnv1a(blob) % 16)
                work.append((child, depth + 1, 0))
        elif kind == 1:
            if not node:
                tr.hit(_J_FLAG + 1)
            for child in node:
                work.append((child, depth + 1, 1))
        elif kind == 2:
            tr.hit(_J_STRLEN + _len_bucket(len(node)))
            if any(ord(c) > 0x7F for c in node):
                tr.hit(_J_FLAG + 2)
        elif kind == 3:
            if node < 0:
                tr.hit(_J_NUMF + 0)
            if node == 0:
                tr.hit(_J_NUMF + 1)
            if abs(node) > 1e6:
                tr.hit(_J_NUMF + 2)
            tr.hit(_J_NUMF + (3 if isinstance(node, float) else 4))
    tr.hit(_J_DEPTH + min(max_depth, 7))
    tr.hit(_J_COUNT + _log2_bucket(count))


# ---------------------------------------------------------------------------
# toy-script
# ---------------------------------------------------------------------------

_S_KEYWORDS = frozenset({"let", "if", "else", "while", "fn", "return", "true", "false"})
_S_TWO_OPS = ("==", "!=", "<=", ">=", "&&", "||")
_S_ONE_OPS = frozenset("+-*/%<>=!(){};,")
_S_ESCAPES = frozenset('"\\nt')
_S_MAX_DEPTH = 64

# Deep-stage vocabulary: identifiers the target "knows".
SCRIPT_SCHEMA_NAMES = (
    "total", "add", "a", "b", "greeting", "shout", "word", "loud",
    "count", "sum", "value", "result", "flag", "index", "step", "main",
)
_S_NAME_IDX = {name: i for i, name in enumerate(SCRIPT_SCHEMA_NAMES)}

# parse stage
(_S_IDENT, _S_NUMTOK, _S_STRTOK, _S_KWTOK, _S_OPTOK, _S_LET, _S_ASSIGN, _S_IF,
 _S_ELSE, _S_WHILE, _S_FN, _S_RETURN, _S_EXPRSTMT, _S_BLOCK, _S_CALL, _S_PAREN,
 _S_UNARY, _S_BINOP, _S_OK) = range(1, 20)
_S_CRASH = 30
# deep stage bases
_S_STMT = 32           # 32..38: statement kind
_S_OP = 39             # 39..51: binary operator kind
_S_UOP = 52            # 52..53: unary operator kind
_S_LIT = 54            # 54..57: literal kind (int, float, string, bool)
_S_NAME = 58           # 58..73: known identifier seen
_S_NAMEOTHER = 74      # unknown identifier seen
_S_ROLE = 75           # 75..138: known identifier x role (let/assign/decl/call)
_S_ARITY = 139         # 139..142: call arity bucket
_S_BDEPTH = 143        # 143..148: block nesting depth
_S_NSTMT = 149         # 149..152: statement count bucket
_S_FLAG = 153          # 153..157: literal shape flags
_S_VALHASH = 158       # 158..285: known name x bound literal hash

_S_ROLE_LET, _S_ROLE_ASSIGN, _S_ROLE_DECL, _S_ROLE_CALL = 0, 1, 2, 3

_S_BINOP_IDX = {op: i for i, op in enumerate(("||", "&&", "==", "!=", "<", ">", "<=", ">=", "+", "-", "*", "/", "%"))}


class _ScriptFail(Exception):
    pass


class _PlantedCrash(Exception):
    pass


def _script_lex(text: str, tr: _Trace) -> list[tuple[str, str, int]]:
    tokens: list[tuple[str, str, int]] = []
    pos = 0
    n = len(text)
    while pos < n:
        ch = text[pos]
        if ch in " \t\r\n":
            pos += 1
            continue
        if ch.isalpha() or ch == "_":
            start = pos
            while pos < n and (text[pos].isalnum() or text[pos] == "_"):
                pos += 1
            word = text[start:pos]
            if word in _S_KEYWORDS:
                tokens.append(("keyword", word, start))
                tr.hit(_S_KWTOK)
            else:
                tokens.append(("ident", word, start))
                tr.hit(_S_IDENT)
            continue
        if ch.isdigit():
            start = pos
            while pos < n and text[pos].isdigit():
                pos += 1
            if pos < n and text[pos] == ".":
                pos += 1
                if pos >= n or not text[pos].isdigit():
                    raise _ScriptFail(f"offset {pos}: digit required after '.'")
                while pos < n and text[pos].isdigit():
                    pos += 1
            tokens.append(("number", text[start:pos], start))
            tr.hit(_S_NUMTOK)
            continue
        if ch == '"':
            start = pos
            pos += 1
            while True:
                if pos >= n:
                    raise _ScriptFail(f"offset {pos}: unterminated string")
                c = text[pos]
                if c == '"':
                    pos += 1
                    break
                if c == "\n":
                    raise _ScriptFail(f"offset {pos}: newline in string")
                if c == "\\":
                    if pos + 1 >= n or text[pos + 1] not in _S_ESCAPES:
                        raise _ScriptFail(f"offset {pos}: bad escape")
                    pos += 2
                else:
                    pos += 1
            tokens.append(("string", text[start:pos], start))
            tr.hit(_S_STRTOK)
            continue
        if text[pos : pos + 2] in _S_TWO_OPS:
            tokens.append(("op", text[pos : pos + 2], pos))
            tr.hit(_S_OPTOK)
            pos += 2
            continue
        if ch in _S_ONE_OPS:
            tokens.append(("op", ch, pos))
            tr.hit(_S_OPTOK)
            pos += 1
            continue
        raise _ScriptFail(f"offset {pos}: unexpected character {ch!r}")
    tokens.append(("eof", "", n))
    return tokens


def _script_nesting_ok(tokens: list[tuple[str, str, int]]) -> bool:
    depth = 0
    run = 0
    for kind, word, _ in tokens:
        if kind != "op":
            run = 0
            continue
        if word in "({":
            depth += 1
            if depth > _S_MAX_DEPTH:
                return False
        elif word in ")}":
            depth = max(0, depth - 1)
        if word in ("!", "-"):
            run += 1
            if run > _S_MAX_DEPTH:
                return False
        else:
            run = 0
    return True


class _ScriptRun:
    """Instrumented recursive descent for the script dialect.

    AST nodes are plain tuples tagged by their first element.
    """

    _LEVELS = (("||",), ("&&",), ("==", "!="), ("<", ">", "<=", ">="), ("+", "-"), ("*", "/", "%"))

    def __init__(self, tokens: list[tuple[str, str, int]], tr: _Trace) -> None:
        self.tokens = tokens
        self.idx = 0
        self.tr = tr

    def peek(self) -> tuple[str, str, int]:
        return self.tokens[self.idx]

    def take_op(self, op: str) -> None:
        kind, word, pos = self.tokens[self.idx]
        if kind != "op" or word != op:
            raise _ScriptFail(f"offset {pos}: expected '{op}'")
        self.idx += 1

    def at_op(self, op: str) -> bool:
        kind, word, _ = self.tokens[self.idx]
        return kind == "op" and word == op

    def program(self) -> list:
        if self.peek()[0] == "eof":
            raise _ScriptFail("offset 0: empty program")
        body = []
        while self.peek()[0] != "eof":
            body.append(self.stmt())
        return body

    def stmt(self):
        kind, word, pos = self.peek()
        if kind == "keyword" and word == "let":
            self.idx += 1
            nkind, name, npos = self.peek()
            if nkind != "ident":
                raise _ScriptFail(f"offset {npos}: expected name after 'let'")
            self.idx += 1
            self.take_op("=")
            value = self.expr()
            self.take_op(";")
            self.tr.hit(_S_LET)
            return ("let", name, value)
        if kind == "keyword" and word == "if":
            return self.if_stmt()
        if kind == "keyword" and word == "while":
            self.idx += 1
            self.take_op("(")
            cond = self.expr()
            self.take_op(")")
            body = self.block()
            self.tr.hit(_S_WHILE)
            return ("while", cond, body)
        if kind == "keyword" and word == "fn":
            self.idx += 1
            nkind, name, npos = self.peek()
            if nkind != "ident":
                raise _ScriptFail(f"offset {npos}: expected function name")
            self.idx += 1
            self.take_op("(")
            params = []
            if not self.at_op(")"):
                while True:
                    pkind, pname, ppos = self.peek()
                    if pkind != "ident":
                        raise _ScriptFail(f"offset {ppos}: expected parameter")
                    params.append(pname)
                    self.idx += 1
                    if self.at_op(","):
                        self.idx += 1
                        continue
                    break
            self.take_op(")")
            body = self.block()
            self.tr.hit(_S_FN)
            return ("fn", name, params, body)
        if kind == "keyword" and word == "return":
            self.idx += 1
            if self.at_op(";"):
                self.idx += 1
                self.tr.hit(_S_RETURN)
                return ("return", None)
            value = self.expr()
            self.take_op(";")
            self.tr.hit(_S_RETURN)
            return ("return", value)
        if kind == "keyword" and word == "else":
            raise _ScriptFail(f"offset {pos}: 'else' without 'if'")
        if kind == "ident" and self.tokens[self.idx + 1][:2] == ("op", "="):
            self.idx += 2
            value = self.expr()
            self.take_op(";")
            self.tr.hit(_S_ASSIGN)
            return ("assign", word, value)
        value = self.expr()
        self.take_op(";")
        self.tr.hit(_S_EXPRSTMT)
        return ("exprstmt", value)

    def if_stmt(self):
        self.idx += 1
        self.take_op("(")
        cond = self.expr()
        self.take_op(")")
        then_body = self.block()
        else_body = None
        kind, word, _ = self.peek()
        if kind == "keyword" and word == "else":
            self.idx += 1
            nkind, nword, _ = self.peek()
            if nkind == "keyword" and nword == "if":
                else_body = [self.if_stmt()]
            else:
                else_body = self.block()
            self.tr.hit(_S_ELSE)
        self.tr.hit(_S_IF)
        return ("if", cond, then_body, else_body)

    def block(self) -> list:
        self.take_op("{")
        body = []
        while not self.at_op("}"):
            if self.peek()[0] == "eof":
                raise _ScriptFail(f"offset {self.peek()[2]}: unterminated block")
            body.append(self.stmt())
        self.idx += 1
        self.tr.hit(_S_BLOCK)
        return body

    def expr(self):
        return self.binary(0)

    def binary(self, level: int):
        if level >= len(self._LEVELS):
            return self.unary()
        node = self.binary(level + 1)
        ops = self._LEVELS[level]
        while True:
            kind, word, _ = self.peek()
            if kind != "op" or word not in ops:
                return node
            self.idx += 1
            right = self.binary(level + 1)
            self.tr.hit(_S_BINOP)
            node = ("bin", word, node, right)

    def unary(self):
        kind, word, _ = self.peek()
        if kind == "op" and word in ("!", "-"):
            self.idx += 1
            operand = self.unary()
            self.tr.hit(_S_UNARY)
            return ("unary", word, operand)
        return self.postfix()

    def postfix(self):
        node = self.primary()
        while self.at_op("("):
            self.idx += 1
            args = []
            if not self.at_op(")"):
                while True:
                    args.append(self.expr())
                    if self.at_op(","):
                        self.idx += 1
                        continue
                    break
            self.take_op(")")
            self.tr.hit(_S_CALL)
            node = ("call", node, args)
        return node

    def primary(self):
        kind, word, pos = self.peek()
        if kind == "number":
            self.idx += 1
            return ("num", word)
        if kind == "string":
            self.idx += 1
            return ("str", word)
        if kind == "ident":
            self.idx += 1
            return ("name", word)
        if kind == "keyword" and word in ("true", "false"):
            self.idx += 1
            return ("bool", word == "true")
        if kind == "op" and word == "(":
            self.idx += 1
            node = self.expr()
            self.take_op(")")
            self.tr.hit(_S_PAREN)
            return node
        raise _ScriptFail(f"offset {pos}: unexpected token {word!r}")


class _ScriptWalk:
    """Deep-stage walk over a parsed program; may hit the planted fault."""

    def __init__(self, tr: _Trace) -> None:
        self.tr = tr
        self.stmt_total = 0

    def program(self, body: list) -> None:
        self.stmts(body, 0)
        self.tr.hit(_S_NSTMT + min(_log2_bucket(self.stmt_total), 3))

    def stmts(self, body: list, depth: int) -> None:
        self.tr.hit(_S_BDEPTH + min(depth, 5))
        for stmt in body:
            self.stmt(stmt, depth)

    def stmt(self, stmt, depth: int) -> None:
        self.stmt_total += 1
        tag = stmt[0]
        if tag == "let":
            self.tr.hit(_S_STMT + 0)
            self.name(stmt[1], _S_ROLE_LET)
            self.bound_literal(stmt[1], stmt[2])
            self.expr(stmt[2])
        elif tag == "assign":
            self.tr.hit(_S_STMT + 1)
            self.name(stmt[1], _S_ROLE_ASSIGN)
            self.bound_literal(stmt[1], stmt[2])
            self.expr(stmt[2])
        elif tag == "if":
            self.tr.hit(_S_STMT + 2)
            self.expr(stmt[1])
            self.stmts(stmt[2], depth + 1)
            if stmt[3] is not None:
                self.stmts(stmt[3], depth + 1)
        elif tag == "while":
            self.tr.hit(_S_STMT + 3)
            self.expr(stmt[1])
            self.stmts(stmt[2], depth + 1)
        elif tag == "fn":
            self.tr.hit(_S_STMT + 4)
            self.name(stmt[1], _S_ROLE_DECL)
            for param in stmt[2]:
                self.name(param, _S_ROLE_DECL)
            self.stmts(stmt[3], depth + 1)
        elif tag == "return":
            self.tr.hit(_S_STMT + 5)
            if stmt[1] is not None:
                self.expr(stmt[1])
        else:
            self.tr.hit(_S_STMT + 6)
            self.expr(stmt[1])

    def name(self, name: str, role: Optional[int] = None) -> None:
        idx = _S_NAME_IDX.get(name)
        if idx is None:
            self.tr.hit(_S_NAMEOTHER)
            return
        self.tr.hit(_S_NAME + idx)
        if role is not None:
            self.tr.hit(_S_ROLE + idx * 4 + role)

    def bound_literal(self, name: str, value) -> None:
        idx = _S_NAME_IDX.get(name)
        if idx is not None and value[0] in ("num", "str"):
            blob = value[1].encode("latin-1", "replace")
            self.tr.hit(_S_VALHASH + idx * 8 + _fnv1a(blob) % 8)

    def expr(self, root) -> None:
        # iterative walk: long binary chains build left-deep trees far
        # past the recursion limit
        work = [root]
        while work:
            node = work.pop()
            tag = node[0]
            if tag == "num":
                raw = node[1]
                self.tr.hit(_S_LIT + (1 if "." in raw else 0))
                value = float(raw)
                if value == 0:
                    self.tr.hit(_S_FLAG + 2)
                if value > 1000:
                    self.tr.hit(_S_FLAG + 3)
            elif tag == "str":
                self.tr.hit(_S_LIT + 2)
                body = node[1][1:-1]
                if not body:
                    self.tr.hit(_S_FLAG + 0)
                if len(body) > 8:
                    self.tr.hit(_S_FLAG + 1)
                if " " in body:
                    self.tr.hit(_S_FLAG + 4)
            elif tag == "bool":
                self.tr.hit(_S_LIT + 3)
            elif tag == "name":
                self.name(node[1])
            elif tag == "unary":
                self.tr.hit(_S_UOP + (0 if node[1] == "!" else 1))
                work.append(node[2])
            elif tag == "bin":
                self.tr.hit(_S_OP + _S_BINOP_IDX[node[1]])
                work.append(node[2])
                work.append(node[3])
            elif tag == "call":
                func, args = node[1], node[2]
                self.tr.hit(_S_ARITY + min(len(args), 3))
                if func[0] == "name":
                    self.name(func[1], _S_ROLE_CALL)
                    if func[1] == "crash":
                        self.tr.hit(_S_CRASH)
                        raise _PlantedCrash("call to crash()")
                    work.extend(args)
                else:
                    work.append(func)
                    work.extend(args)


def toy_script(data: bytes) -> tuple[Verdict, dict[int, int], str]:
    """Instrumented parser and walker for the script dialect.

    Contains one planted fault: executing a call to ``crash()`` raises a
    simulated crash after a successful parse.
    """
    tr = _Trace()
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError:
        return Verdict.PARSE_ERROR, tr.hits, "invalid utf-8"
    try:
        tokens = _script_lex(text, tr)
        if not _script_nesting_ok(tokens):
            return Verdict.PARSE_ERROR, tr.hits, "too deeply nested"
        body = _ScriptRun(tokens, tr).program()
    except _ScriptFail as err:
        return Verdict.PARSE_ERROR, tr.hits, str(err)
    tr.hit(_S_OK)
    try:
        _ScriptWalk(tr).program(body)
    except _PlantedCrash as err:
        return Verdict.CRASH, tr.hits, str(err)
    return Verdict.ACCEPTED, tr.hits, ""


# ---------------------------------------------------------------------------
# toy-checksum
# ---------------------------------------------------------------------------

_C_HEX = frozenset(b"0123456789abcdef")

# parse stage: presence bits, each recorded at most once per document
_C_LINE, _C_DIGEST, _C_SEPTEXT, _C_SEPBIN, _C_NAME, _C_FINALNL, _C_OK = 1, 2, 3, 4, 5, 6, 7
# deep stage bases
_C_NLINES, _C_NAMELEN, _C_FLAG = 16, 20, 24


def toy_checksum(data: bytes) -> tuple[Verdict, dict[int, int], str]:
    """Instrumented parser for md5sum-style checksum lists.

    Deliberately shallow: every branch is a presence bit rather than a
    counter, so beyond well-formedness there is almost no structure to
    discover and generated inputs rarely pay off here.
    """
    tr = _Trace()
    seen: set[int] = set()

    def once(edge: int) -> None:
        if edge not in seen:
            seen.add(edge)
            tr.hit(edge)

    lines = data.split(b"\n")
    if lines and lines[-1] == b"":
        lines.pop()
        once(_C_FINALNL)
    if not lines:
        return Verdict.PARSE_ERROR, tr.hits, "no lines"

    names: list[bytes] = []
    any_binary = False
    for idx, line in enumerate(lines, start=1):
        if len(line) < 35:
            return Verdict.PARSE_ERROR, tr.hits, f"line {idx}: too short"
        if any(b not in _C_HEX for b in line[:32]):
            return Verdict.PARSE_ERROR, tr.hits, f"line {idx}: bad digest"
        once(_C_DIGEST)
        if line[32:33] != b" ":
            return Verdict.PARSE_ERROR, tr.hits, f"line {idx}: bad separator"
        mode = line[33:34]
        if mode == b" ":
            once(_C_SEPTEXT)
        elif mode == b"*":
            once(_C_SEPBIN)
            any_binary = True
        else:
            return Verdict.PARSE_ERROR, tr.hits, f"line {idx}: bad mode"
        name = line[34:]
        if any(b < 0x20 for b in name):
            return Verdict.PARSE_ERROR, tr.hits, f"line {idx}: control byte in filename"
        once(_C_NAME)
        once(_C_LINE)
        names.append(name)

    once(_C_OK)
    once(_C_NLINES + min(_log2_bucket(len(names)), 3))
    for name in names:
        once(_C_NAMELEN + _len_bucket(len(name)))
    if any(b"." in name for name in names):
        once(_C_FLAG + 0)
    if any_binary:
        once(_C_FLAG + 1)
    if any(b" " in name for name in names):
        once(_C_FLAG + 2)
    return Verdict.ACCEPTED, tr.hits, ""


# ---------------------------------------------------------------------------
# registry
# ---------------------------------------------------------------------------

_TARGET_FNS: dict[str, tuple[str, Callable[[bytes], tuple[Verdict, dict[int, int], str]]]] = {
    "toy-xml": ("xml", toy_xml),
    "toy-json": ("json", toy_json),
    "toy-script": ("script", toy_script),
    "toy-checksum": ("checksum", toy_checksum),
}

TARGET_NAMES = tuple(sorted(_TARGET_FNS))

# Small dialect-valid documents for demos and starter corpora.
SAMPLE_INPUTS: dict[str, tuple[bytes, ...]] = {
    "toy-xml": (
        b'<catalog>\n  <book id="1" lang="en">\n    <title>Meditations</title>\n'
        b"    <price>9.50</price>\n  </book>\n  <book id=\"2\" lang=\"fr\">\n"
        b"    <title>Essais</title>\n  </book>\n</catalog>\n",
        b'<?xml version="1.0"?>\n<note priority="high">\n  <to>Ada</to>\n'
        b"  <from>Charles</from>\n  <body>Bring the engine diagrams.</body>\n</note>\n",
    ),
    "toy-json": (
        b'{"name": "inventory", "items": [{"sku": "a-1", "qty": 4}, {"sku": "b-2", "qty": 0}], "open": true}',
        b'[{"city": "Lyon", "pop": 522000}, {"city": "Nantes", "pop": 320000}, null]',
    ),
    "toy-script": (
        b'let total = 0;\nfn add(a, b) {\n  return a + b;\n}\nwhile (total < 10) {\n'
        b"  total = add(total, 2);\n}\nif (total == 10) {\n  total = 0;\n} else {\n  total = 1;\n}\n",
        b'let greeting = "hello";\nfn shout(word) {\n  return word + "!";\n}\nlet loud = shout(greeting);\n',
    ),
    "toy-checksum": (
        b"d41d8cd98f00b204e9800998ecf8427e  a.c\n",
        b"7f138a09169b250e9dcb378140907378  notes.txt\n"
        b"9e107d9d372bb6826bd81d3542a419d6 *archive.bin\n",
        b"c4ca4238a0b923820dcc509a6f75849b  readme.md\n"
        b"c81e728d9d4c2f636f067f89cc14862c  build log.txt\n"
        b"eccbc87e4b5ce2fe28308fd9f2a7baf3 *dist/upstream-mirror/toolchain-sysroot.tar\n"
        b"a87ff679a2f3e71d9181a67b7542122c  Makefile\n",
        b"e4da3b7fbbce2345d7772b0674a318d5  src/main.c\n"
        b"1679091c5a880faf6fb5e6087eb1b2dc  src/util.c\n"
        b"8f14e45fceea167a5a36dedd4bea2543  src/util.h\n"
        b"c9f0f895fb98ab9159f51fd0297e236d  include/api/public-header-with-a-deliberately-"
        b"long-stable-install-path/version-2.11.3/generated/bindings/manifest_entry_record.h\n"
        b"45c48cce2e2d7fbdea1afc51c7c6ad26  docs/CHANGELOG\n"
        b"d3d9446802a44259755d38e6d163e820 *bin/tool\n"
        b"6512bd43d9caa6e02c990b0a82652dca  LICENSE\n"
        b"c20ad4d76fe97759aa27a0c99bff6710  README\n",
    ),
}


def get_target(name: str) -> InProcessTarget:
    """Look up a bundled target by name; raises UnknownTarget."""
    try:
        format_name, fn = _TARGET_FNS[name]
    except KeyError:
        raise UnknownTarget(f"no such target {name!r} (available: {', '.join(TARGET_NAMES)})") from None
    return InProcessTarget(name=name, format_name=format_name, fn=fn)


def list_targets() -> list[tuple[str, str]]:
    """All bundled targets as (name, input format name) pairs."""
    return [(name, _TARGET_FNS[name][0]) for name in TARGET_NAMES]
