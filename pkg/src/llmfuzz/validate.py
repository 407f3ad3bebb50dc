"""Input-format dialects: parsers, serializers, and validity oracles.

Each bundled target format (xml, json, script, checksum) gets a strict
parser used three ways: the ``validate_*`` oracles wrap it to judge
fuzzer output, the mock generation backend edits the parsed tree to
produce structure-preserving variants, and tests cross-check it against
the independently written instrumented parsers.

Validators are total: any byte string yields a verdict, never an
exception.  Failure attribution is first-failure-in-document-order.
"""

from __future__ import annotations

import json as _stdjson
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

from .errors import UndefinedRatio

# ---------------------------------------------------------------------------
# shared result type
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ValidationResult:
    """Verdict for one input: validity, violated rule (xml only), detail."""

    ok: bool
    rule: Optional[int] = None
    detail: str = ""

    def __bool__(self) -> bool:
        return self.ok


# ---------------------------------------------------------------------------
# xml dialect
#
# Checked rules, attributed by number:
#   1  every open tag is eventually closed (self-closing allowed);
#      any end-of-input inside markup or with open elements
#   2  tag names are case-sensitive; a close tag matching only
#      case-insensitively is a rule-2 violation
#   3  proper nesting: close tag must match the innermost open element;
#      also malformed close tags and stray closes before a root exists
#   4  exactly one root element; no content outside it; a declaration is
#      only permitted before the root
#   5  attributes are name="value" with quoted values; any malformed
#      attribute area
#
# The dialect is byte-level (latin-1), has no comments, CDATA or entity
# handling, and permits any tag-name character outside whitespace and
# the markup specials.
# ---------------------------------------------------------------------------

_XML_WS = " \t\r\n"
_XML_NAME_STOP = frozenset(_XML_WS + "<>/=\"'")


class XmlError(Exception):
    """Parse failure with rule attribution and position."""

    def __init__(self, rule: int, pos: int, message: str) -> None:
        super().__init__(message)
        self.rule = rule
        self.pos = pos


@dataclass
class XmlElement:
    """Element node: tag name, ordered attributes, mixed children."""

    name: str
    attrs: list[tuple[str, str]] = field(default_factory=list)
    children: list[Union["XmlElement", str]] = field(default_factory=list)

    def elements(self) -> list["XmlElement"]:
        return [c for c in self.children if isinstance(c, XmlElement)]


def _scan_xml_name(text: str, pos: int) -> tuple[str, int]:
    start = pos
    n = len(text)
    while pos < n and text[pos] not in _XML_NAME_STOP:
        pos += 1
    return text[start:pos], pos


def _skip_xml_ws(text: str, pos: int) -> int:
    n = len(text)
    while pos < n and text[pos] in _XML_WS:
        pos += 1
    return pos


def parse_xml(text: str) -> tuple[XmlElement, Optional[str]]:
    """Parse a document; return (root element, declaration or None).

    Raises XmlError with the first violated rule in document order.
    """
    n = len(text)
    declaration: Optional[str] = None

    pos = _skip_xml_ws(text, 0)
    if text.startswith("<?", pos):
        end = text.find("?>", pos + 2)
        if end < 0:
            raise XmlError(1, n, "end of input inside declaration")
        declaration = text[pos : end + 2]
        pos = end + 2

    stack: list[XmlElement] = []
    root: Optional[XmlElement] = None

    while pos < n:
        ch = text[pos]
        if ch != "<":
            start = pos
            while pos < n and text[pos] != "<":
                pos += 1
            run = text[start:pos]
            if stack:
                stack[-1].children.append(run)
            elif run.strip(_XML_WS):
                raise XmlError(4, start, "text outside the root element")
            continue

        if pos + 1 >= n:
            raise XmlError(1, pos, "end of input inside markup")
        nxt = text[pos + 1]

        if nxt == "?":
            raise XmlError(4, pos, "declaration only permitted before the root element")

        if nxt == "/":
            name, pos = _scan_xml_name(text, pos + 2)
            if not name:
                raise XmlError(3, pos, "closing tag with empty name")
            pos = _skip_xml_ws(text, pos)
            if pos >= n:
                raise XmlError(1, pos, "end of input inside closing tag")
            if text[pos] != ">":
                raise XmlError(3, pos, "malformed closing tag")
            pos += 1
            if not stack:
                if root is not None:
                    raise XmlError(4, pos, "closing tag after the root element")
                raise XmlError(3, pos, f"closing tag </{name}> with no open element")
            open_name = stack[-1].name
            if open_name != name:
                if open_name.lower() == name.lower():
                    raise XmlError(2, pos, f"tag case mismatch: <{open_name}> closed by </{name}>")
                raise XmlError(3, pos, f"<{open_name}> closed by </{name}>")
            closed = stack.pop()
            if not stack:
                root = closed
            continue

        name, pos = _scan_xml_name(text, pos + 1)
        if not name:
            raise XmlError(3, pos, "tag with empty name")
        element = XmlElement(name=name)

        while True:
            pos = _skip_xml_ws(text, pos)
            if pos >= n:
                raise XmlError(1, pos, f"end of input inside <{name}>")
            ch = text[pos]
            if ch == "/":
                if pos + 1 >= n:
                    raise XmlError(1, pos, f"end of input inside <{name}>")
                if text[pos + 1] != ">":
                    raise XmlError(5, pos, "stray '/' inside tag")
                pos += 2
                self_closing = True
                break
            if ch == ">":
                pos += 1
                self_closing = False
                break
            if ch in "='\"":
                raise XmlError(5, pos, "attribute syntax error")
            attr, pos = _scan_xml_name(text, pos)
            pos = _skip_xml_ws(text, pos)
            if pos >= n:
                raise XmlError(1, pos, f"end of input inside <{name}>")
            if text[pos] != "=":
                raise XmlError(5, pos, f"attribute '{attr}' missing '=value'")
            pos = _skip_xml_ws(text, pos + 1)
            if pos >= n:
                raise XmlError(1, pos, f"end of input inside <{name}>")
            quote = text[pos]
            if quote not in "'\"":
                raise XmlError(5, pos, f"attribute '{attr}' value must be quoted")
            end = text.find(quote, pos + 1)
            if end < 0:
                raise XmlError(1, n, "end of input inside attribute value")
            element.attrs.append((attr, text[pos + 1 : end]))
            pos = end + 1
            if pos < n and text[pos] not in _XML_WS and text[pos] not in "/>":
                raise XmlError(5, pos, "missing whitespace between attributes")

        if not stack:
            if root is not None:
                raise XmlError(4, pos, "more than one root element")
            if self_closing:
                root = element
            else:
                stack.append(element)
        else:
            stack[-1].children.append(element)
            if not self_closing:
                stack.append(element)

    if stack:
        raise XmlError(1, n, f"unclosed element <{stack[-1].name}>")
    if root is None:
        raise XmlError(4, n, "document has no root element")
    return root, declaration


def validate_xml(data: bytes) -> ValidationResult:
    """Judge a byte string against the five-rule xml dialect."""
    text = data.decode("latin-1")
    try:
        parse_xml(text)
    except XmlError as err:
        return ValidationResult(ok=False, rule=err.rule, detail=str(err))
    return ValidationResult(ok=True)


def _quote_attr(value: str) -> str:
    if '"' not in value:
        return f'"{value}"'
    if "'" not in value:
        return f"'{value}'"
    return '"{}"'.format(value.replace('"', ""))


def serialize_xml(element: XmlElement, declaration: Optional[str] = None) -> str:
    """Render an element tree back to dialect-valid text."""
    parts: list[str] = []
    if declaration:
        parts.append(declaration)
        parts.append("\n")
    _serialize_xml_into(element, parts)
    return "".join(parts)


def _serialize_xml_into(element: XmlElement, parts: list[str]) -> None:
    attrs = "".join(f" {k}={_quote_attr(v)}" for k, v in element.attrs)
    if not element.children:
        parts.append(f"<{element.name}{attrs}/>")
        return
    parts.append(f"<{element.name}{attrs}>")
    for child in element.children:
        if isinstance(child, XmlElement):
            _serialize_xml_into(child, parts)
        else:
            # raw '<' in text would change the parse; degrade it
            parts.append(child.replace("<", "("))
    parts.append(f"</{element.name}>")


# ---------------------------------------------------------------------------
# json dialect (strict: utf-8, no trailing commas or comments, no
# NaN/Infinity, no leading zeros, control chars forbidden in strings)
# ---------------------------------------------------------------------------

JSON_MAX_DEPTH = 64

_JSON_WS = " \t\r\n"
_JSON_ESCAPES = {'"': '"', "\\": "\\", "/": "/", "b": "\b", "f": "\f", "n": "\n", "r": "\r", "t": "\t"}


class JsonError(Exception):
    """Strict-json parse failure at a character offset."""

    def __init__(self, pos: int, message: str) -> None:
        super().__init__(f"offset {pos}: {message}")
        self.pos = pos


class _JsonParser:
    def __init__(self, text: str) -> None:
        self.text = text
        self.pos = 0
        self.n = len(text)

    def parse(self):
        value = self._value(0)
        self._skip_ws()
        if self.pos < self.n:
            raise JsonError(self.pos, "trailing data after document")
        return value

    def _skip_ws(self) -> None:
        while self.pos < self.n and self.text[self.pos] in _JSON_WS:
            self.pos += 1

    def _value(self, depth: int):
        self._skip_ws()
        if self.pos >= self.n:
            raise JsonError(self.pos, "unexpected end of input")
        ch = self.text[self.pos]
        if ch == "{":
            return self._object(depth)
        if ch == "[":
            return self._array(depth)
        if ch == '"':
            return self._string()
        if ch == "-" or ch.isdigit():
            return self._number()
        for literal, value in (("true", True), ("false", False), ("null", None)):
            if self.text.startswith(literal, self.pos):
                self.pos += len(literal)
                return value
        raise JsonError(self.pos, f"unexpected character {ch!r}")

    def _object(self, depth: int) -> dict:
        if depth >= JSON_MAX_DEPTH:
            raise JsonError(self.pos, "document too deeply nested")
        self.pos += 1
        obj: dict = {}
        self._skip_ws()
        if self.pos < self.n and self.text[self.pos] == "}":
            self.pos += 1
            return obj
        while True:
            self._skip_ws()
            if self.pos >= self.n or self.text[self.pos] != '"':
                raise JsonError(self.pos, "expected object key")
            key = self._string()
            self._skip_ws()
            if self.pos >= self.n or self.text[self.pos] != ":":
                raise JsonError(self.pos, "expected ':' after key")
            self.pos += 1
            obj[key] = self._value(depth + 1)
            self._skip_ws()
            if self.pos >= self.n:
                raise JsonError(self.pos, "unterminated object")
            ch = self.text[self.pos]
            self.pos += 1
            if ch == "}":
                return obj
            if ch != ",":
                raise JsonError(self.pos - 1, "expected ',' or '}' in object")

    def _array(self, depth: int) -> list:
        if depth >= JSON_MAX_DEPTH:
            raise JsonError(self.pos, "document too deeply nested")
        self.pos += 1
        arr: list = []
        self._skip_ws()
        if self.pos < self.n and self.text[self.pos] == "]":
            self.pos += 1
            return arr
        while True:
            arr.append(self._value(depth + 1))
            self._skip_ws()
            if self.pos >= self.n:
                raise JsonError(self.pos, "unterminated array")
            ch = self.text[self.pos]
            self.pos += 1
            if ch == "]":
                return arr
            if ch != ",":
                raise JsonError(self.pos - 1, "expected ',' or ']' in array")

    def _string(self) -> str:
        self.pos += 1
        out: list[str] = []
        while True:
            if self.pos >= self.n:
                raise JsonError(self.pos, "unterminated string")
            ch = self.text[self.pos]
            if ch == '"':
                self.pos += 1
                return "".join(out)
            if ch == "\\":
                self.pos += 1
                if self.pos >= self.n:
                    raise JsonError(self.pos, "unterminated escape")
                esc = self.text[self.pos]
                if esc in _JSON_ESCAPES:
                    out.append(_JSON_ESCAPES[esc])
                    self.pos += 1
                elif esc == "u":
                    hexpart = self.text[self.pos + 1 : self.pos + 5]
                    if len(hexpart) != 4 or any(c not in "0123456789abcdefABCDEF" for c in hexpart):
                        raise JsonError(self.pos, "malformed \\u escape")
                    out.append(chr(int(hexpart, 16)))
                    self.pos += 5
                else:
                    raise JsonError(self.pos, f"invalid escape '\\{esc}'")
            elif ord(ch) < 0x20:
                raise JsonError(self.pos, "raw control character in string")
            else:
                out.append(ch)
                self.pos += 1

    def _number(self):
        start = self.pos
        text, n = self.text, self.n
        if self.pos < n and text[self.pos] == "-":
            self.pos += 1
        if self.pos >= n or not text[self.pos].isdigit():
            raise JsonError(self.pos, "malformed number")
        if text[self.pos] == "0":
            self.pos += 1
            if self.pos < n and text[self.pos].isdigit():
                raise JsonError(self.pos, "leading zero in number")
        else:
            while self.pos < n and text[self.pos].isdigit():
                self.pos += 1
        is_float = False
        if self.pos < n and text[self.pos] == ".":
            is_float = True
            self.pos += 1
            if self.pos >= n or not text[self.pos].isdigit():
                raise JsonError(self.pos, "malformed fraction")
            while self.pos < n and text[self.pos].isdigit():
                self.pos += 1
        if self.pos < n and text[self.pos] in "eE":
            is_float = True
            self.pos += 1
            if self.pos < n and text[self.pos] in "+-":
                self.pos += 1
            if self.pos >= n or not text[self.pos].isdigit():
                raise JsonError(self.pos, "malformed exponent")
            while self.pos < n and text[self.pos].isdigit():
                self.pos += 1
        raw = text[start : self.pos]
        return float(raw) if is_float else int(raw)


def parse_json(data: Union[bytes, str]):
    """Parse strict json; raises JsonError on any deviation."""
    if isinstance(data, bytes):
        try:
            text = data.decode("utf-8")
        except UnicodeDecodeError as err:
            raise JsonError(err.start, "invalid utf-8") from None
    else:
        text = data
    return _JsonParser(text).parse()


def serialize_json(value) -> str:
    """Render a value tree back to dialect-valid text."""
    return _stdjson.dumps(value, ensure_ascii=True)


def validate_json(data: bytes) -> ValidationResult:
    try:
        parse_json(data)
    except JsonError as err:
        return ValidationResult(ok=False, detail=str(err))
    return ValidationResult(ok=True)


# ---------------------------------------------------------------------------
# script dialect: a small statement language
#
#   program := stmt+
#   stmt    := 'let' IDENT '=' expr ';'
#            | IDENT '=' expr ';'
#            | 'if' '(' expr ')' block ('else' (block | if-stmt))?
#            | 'while' '(' expr ')' block
#            | 'fn' IDENT '(' params? ')' block
#            | 'return' expr? ';'
#            | expr ';'
#   block   := '{' stmt* '}'
#
# Expressions use C-style precedence: || && == != < > <= >= + - * / %
# with unary ! and -, calls, parentheses; literals are integers, floats,
# double-quoted single-line strings, true and false.
# ---------------------------------------------------------------------------

# Nesting caps are enforced on the token stream before parsing: bracket
# depth over '(' '{' / ')' '}' and runs of consecutive prefix operators
# ('!' / '-') may not exceed this.  Token-level rules keep the two
# independent parser implementations trivially in agreement.
SCRIPT_MAX_DEPTH = 64

SCRIPT_KEYWORDS = frozenset({"let", "if", "else", "while", "fn", "return", "true", "false"})

_SCRIPT_TWO_CHAR_OPS = ("==", "!=", "<=", ">=", "&&", "||")
_SCRIPT_ONE_CHAR_OPS = frozenset("+-*/%<>=!(){};,")
_SCRIPT_STRING_ESCAPES = {'"': '"', "\\": "\\", "n": "\n", "t": "\t"}


class ScriptError(Exception):
    """Lex or parse failure at a character offset."""

    def __init__(self, pos: int, message: str) -> None:
        super().__init__(f"offset {pos}: {message}")
        self.pos = pos


@dataclass(frozen=True)
class Token:
    kind: str  # ident | number | string | op | keyword | eof
    text: str
    pos: int


def tokenize_script(text: str) -> list[Token]:
    tokens: list[Token] = []
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
            kind = "keyword" if word in SCRIPT_KEYWORDS else "ident"
            tokens.append(Token(kind, word, start))
            continue
        if ch.isdigit():
            start = pos
            while pos < n and text[pos].isdigit():
                pos += 1
            if pos < n and text[pos] == ".":
                pos += 1
                if pos >= n or not text[pos].isdigit():
                    raise ScriptError(pos, "digit required after decimal point")
                while pos < n and text[pos].isdigit():
                    pos += 1
            tokens.append(Token("number", text[start:pos], start))
            continue
        if ch == '"':
            start = pos
            pos += 1
            while True:
                if pos >= n:
                    raise ScriptError(pos, "unterminated string")
                c = text[pos]
                if c == '"':
                    pos += 1
                    break
                if c == "\n":
                    raise ScriptError(pos, "newline inside string")
                if c == "\\":
                    if pos + 1 >= n or text[pos + 1] not in _SCRIPT_STRING_ESCAPES:
                        raise ScriptError(pos, "invalid string escape")
                    pos += 2
                else:
                    pos += 1
            tokens.append(Token("string", text[start:pos], start))
            continue
        two = text[pos : pos + 2]
        if two in _SCRIPT_TWO_CHAR_OPS:
            tokens.append(Token("op", two, pos))
            pos += 2
            continue
        if ch in _SCRIPT_ONE_CHAR_OPS:
            tokens.append(Token("op", ch, pos))
            pos += 1
            continue
        raise ScriptError(pos, f"unexpected character {ch!r}")
    tokens.append(Token("eof", "", n))
    return tokens


def check_script_nesting(tokens: list[Token]) -> None:
    """Reject token streams whose nesting could exhaust the parser.

    Raises ScriptError if bracket depth or a prefix-operator run exceeds
    SCRIPT_MAX_DEPTH.  Mismatched brackets are left to the parser.
    """
    depth = 0
    run = 0
    for tok in tokens:
        if tok.kind == "op":
            if tok.text in "({":
                depth += 1
                if depth > SCRIPT_MAX_DEPTH:
                    raise ScriptError(tok.pos, "too deeply nested")
            elif tok.text in ")}":
                depth = max(0, depth - 1)
            if tok.text in ("!", "-"):
                run += 1
                if run > SCRIPT_MAX_DEPTH:
                    raise ScriptError(tok.pos, "prefix operator chain too long")
            else:
                run = 0
        else:
            run = 0


def unescape_script_string(lexeme: str) -> str:
    """Decode a quoted string token's lexeme to its value."""
    out: list[str] = []
    i = 1
    end = len(lexeme) - 1
    while i < end:
        ch = lexeme[i]
        if ch == "\\":
            out.append(_SCRIPT_STRING_ESCAPES[lexeme[i + 1]])
            i += 2
        else:
            out.append(ch)
            i += 1
    return "".join(out)


def escape_script_string(value: str) -> str:
    out = ['"']
    for ch in value:
        if ch == '"':
            out.append('\\"')
        elif ch == "\\":
            out.append("\\\\")
        elif ch == "\n":
            out.append("\\n")
        elif ch == "\t":
            out.append("\\t")
        else:
            out.append(ch)
    out.append('"')
    return "".join(out)


# AST nodes; expressions carry no positions, the validator only needs shape.


@dataclass
class NumberLit:
    raw: str


@dataclass
class StringLit:
    value: str


@dataclass
class BoolLit:
    value: bool


@dataclass
class NameExpr:
    name: str


@dataclass
class UnaryOp:
    op: str
    operand: "Expr"


@dataclass
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass
class CallExpr:
    func: "Expr"
    args: list["Expr"]


Expr = Union[NumberLit, StringLit, BoolLit, NameExpr, UnaryOp, BinOp, CallExpr]


@dataclass
class LetStmt:
    name: str
    value: Expr


@dataclass
class AssignStmt:
    name: str
    value: Expr


@dataclass
class IfStmt:
    cond: Expr
    then_body: list["Stmt"]
    else_body: Optional[list["Stmt"]]


@dataclass
class WhileStmt:
    cond: Expr
    body: list["Stmt"]


@dataclass
class FnStmt:
    name: str
    params: list[str]
    body: list["Stmt"]


@dataclass
class ReturnStmt:
    value: Optional[Expr]


@dataclass
class ExprStmt:
    value: Expr


Stmt = Union[LetStmt, AssignStmt, IfStmt, WhileStmt, FnStmt, ReturnStmt, ExprStmt]


@dataclass
class Program:
    body: list[Stmt]


# binary precedence, loosest first
_BIN_LEVELS = (("||",), ("&&",), ("==", "!="), ("<", ">", "<=", ">="), ("+", "-"), ("*", "/", "%"))


class _ScriptParser:
    def __init__(self, tokens: list[Token]) -> None:
        self.tokens = tokens
        self.idx = 0

    @property
    def cur(self) -> Token:
        return self.tokens[self.idx]

    def _advance(self) -> Token:
        tok = self.tokens[self.idx]
        self.idx += 1
        return tok

    def _expect_op(self, op: str) -> None:
        tok = self.cur
        if tok.kind != "op" or tok.text != op:
            raise ScriptError(tok.pos, f"expected '{op}'")
        self.idx += 1

    def _at_op(self, op: str) -> bool:
        return self.cur.kind == "op" and self.cur.text == op

    def parse_program(self) -> Program:
        body: list[Stmt] = []
        if self.cur.kind == "eof":
            raise ScriptError(0, "empty program")
        while self.cur.kind != "eof":
            body.append(self.parse_stmt())
        return Program(body)

    def parse_stmt(self) -> Stmt:
        tok = self.cur
        if tok.kind == "keyword":
            if tok.text == "let":
                return self._parse_let()
            if tok.text == "if":
                return self._parse_if()
            if tok.text == "while":
                return self._parse_while()
            if tok.text == "fn":
                return self._parse_fn()
            if tok.text == "return":
                return self._parse_return()
            if tok.text == "else":
                raise ScriptError(tok.pos, "'else' without 'if'")
            # true/false fall through as expression heads
        if tok.kind == "ident":
            nxt = self.tokens[self.idx + 1]
            if nxt.kind == "op" and nxt.text == "=":
                self.idx += 2
                value = self.parse_expr()
                self._expect_op(";")
                return AssignStmt(tok.text, value)
        value = self.parse_expr()
        self._expect_op(";")
        return ExprStmt(value)

    def _parse_let(self) -> LetStmt:
        self.idx += 1
        tok = self.cur
        if tok.kind != "ident":
            raise ScriptError(tok.pos, "expected name after 'let'")
        self.idx += 1
        self._expect_op("=")
        value = self.parse_expr()
        self._expect_op(";")
        return LetStmt(tok.text, value)

    def _parse_if(self) -> IfStmt:
        self.idx += 1
        self._expect_op("(")
        cond = self.parse_expr()
        self._expect_op(")")
        then_body = self.parse_block()
        else_body: Optional[list[Stmt]] = None
        if self.cur.kind == "keyword" and self.cur.text == "else":
            self.idx += 1
            if self.cur.kind == "keyword" and self.cur.text == "if":
                else_body = [self._parse_if()]
            else:
                else_body = self.parse_block()
        return IfStmt(cond, then_body, else_body)

    def _parse_while(self) -> WhileStmt:
        self.idx += 1
        self._expect_op("(")
        cond = self.parse_expr()
        self._expect_op(")")
        return WhileStmt(cond, self.parse_block())

    def _parse_fn(self) -> FnStmt:
        self.idx += 1
        tok = self.cur
        if tok.kind != "ident":
            raise ScriptError(tok.pos, "expected function name")
        self.idx += 1
        self._expect_op("(")
        params: list[str] = []
        if not self._at_op(")"):
            while True:
                ptok = self.cur
                if ptok.kind != "ident":
                    raise ScriptError(ptok.pos, "expected parameter name")
                params.append(ptok.text)
                self.idx += 1
                if self._at_op(","):
                    self.idx += 1
                    continue
                break
        self._expect_op(")")
        return FnStmt(tok.text, params, self.parse_block())

    def _parse_return(self) -> ReturnStmt:
        self.idx += 1
        if self._at_op(";"):
            self.idx += 1
            return ReturnStmt(None)
        value = self.parse_expr()
        self._expect_op(";")
        return ReturnStmt(value)

    def parse_block(self) -> list[Stmt]:
        self._expect_op("{")
        body: list[Stmt] = []
        while not self._at_op("}"):
            if self.cur.kind == "eof":
                raise ScriptError(self.cur.pos, "unterminated block")
            body.append(self.parse_stmt())
        self.idx += 1
        return body

    def parse_expr(self) -> Expr:
        return self._parse_binary(0)

    def _parse_binary(self, level: int) -> Expr:
        if level >= len(_BIN_LEVELS):
            return self._parse_unary()
        expr = self._parse_binary(level + 1)
        ops = _BIN_LEVELS[level]
        while self.cur.kind == "op" and self.cur.text in ops:
            op = self._advance().text
            right = self._parse_binary(level + 1)
            expr = BinOp(op, expr, right)
        return expr

    def _parse_unary(self) -> Expr:
        if self.cur.kind == "op" and self.cur.text in ("!", "-"):
            op = self._advance().text
            return UnaryOp(op, self._parse_unary())
        return self._parse_postfix()

    def _parse_postfix(self) -> Expr:
        expr = self._parse_primary()
        while self._at_op("("):
            self.idx += 1
            args: list[Expr] = []
            if not self._at_op(")"):
                while True:
                    args.append(self.parse_expr())
                    if self._at_op(","):
                        self.idx += 1
                        continue
                    break
            self._expect_op(")")
            expr = CallExpr(expr, args)
        return expr

    def _parse_primary(self) -> Expr:
        tok = self.cur
        if tok.kind == "number":
            self.idx += 1
            return NumberLit(tok.text)
        if tok.kind == "string":
            self.idx += 1
            return StringLit(unescape_script_string(tok.text))
        if tok.kind == "ident":
            self.idx += 1
            return NameExpr(tok.text)
        if tok.kind == "keyword" and tok.text in ("true", "false"):
            self.idx += 1
            return BoolLit(tok.text == "true")
        if self._at_op("("):
            self.idx += 1
            expr = self.parse_expr()
            self._expect_op(")")
            return expr
        raise ScriptError(tok.pos, f"unexpected token {tok.text!r}")


def parse_script(data: Union[bytes, str]) -> Program:
    """Parse a script; raises ScriptError on any lex or syntax fault."""
    if isinstance(data, bytes):
        try:
            text = data.decode("utf-8")
        except UnicodeDecodeError as err:
            raise ScriptError(err.start, "invalid utf-8") from None
    else:
        text = data
    tokens = tokenize_script(text)
    check_script_nesting(tokens)
    return _ScriptParser(tokens).parse_program()


def validate_script(data: bytes) -> ValidationResult:
    try:
        parse_script(data)
    except ScriptError as err:
        return ValidationResult(ok=False, detail=str(err))
    return ValidationResult(ok=True)


_EXPR_PRECEDENCE = {op: level for level, ops in enumerate(_BIN_LEVELS) for op in ops}
_UNARY_LEVEL = len(_BIN_LEVELS)


def _serialize_expr(expr: Expr, parent_level: int) -> str:
    if isinstance(expr, NumberLit):
        return expr.raw
    if isinstance(expr, StringLit):
        return escape_script_string(expr.value)
    if isinstance(expr, BoolLit):
        return "true" if expr.value else "false"
    if isinstance(expr, NameExpr):
        return expr.name
    if isinstance(expr, UnaryOp):
        inner = _serialize_expr(expr.operand, _UNARY_LEVEL)
        text = f"{expr.op}{inner}"
        return text if parent_level <= _UNARY_LEVEL else f"({text})"
    if isinstance(expr, BinOp):
        level = _EXPR_PRECEDENCE[expr.op]
        left = _serialize_expr(expr.left, level)
        right = _serialize_expr(expr.right, level + 1)
        text = f"{left} {expr.op} {right}"
        return text if level >= parent_level else f"({text})"
    if isinstance(expr, CallExpr):
        func = _serialize_expr(expr.func, _UNARY_LEVEL + 1)
        args = ", ".join(_serialize_expr(a, 0) for a in expr.args)
        return f"{func}({args})"
    raise TypeError(f"unknown expression node {expr!r}")


def _serialize_stmt(stmt: Stmt, indent: int) -> str:
    pad = "  " * indent
    if isinstance(stmt, LetStmt):
        return f"{pad}let {stmt.name} = {_serialize_expr(stmt.value, 0)};"
    if isinstance(stmt, AssignStmt):
        return f"{pad}{stmt.name} = {_serialize_expr(stmt.value, 0)};"
    if isinstance(stmt, IfStmt):
        text = f"{pad}if ({_serialize_expr(stmt.cond, 0)}) {_serialize_block(stmt.then_body, indent)}"
        if stmt.else_body is not None:
            text += f" else {_serialize_block(stmt.else_body, indent)}"
        return text
    if isinstance(stmt, WhileStmt):
        return f"{pad}while ({_serialize_expr(stmt.cond, 0)}) {_serialize_block(stmt.body, indent)}"
    if isinstance(stmt, FnStmt):
        params = ", ".join(stmt.params)
        return f"{pad}fn {stmt.name}({params}) {_serialize_block(stmt.body, indent)}"
    if isinstance(stmt, ReturnStmt):
        if stmt.value is None:
            return f"{pad}return;"
        return f"{pad}return {_serialize_expr(stmt.value, 0)};"
    if isinstance(stmt, ExprStmt):
        return f"{pad}{_serialize_expr(stmt.value, 0)};"
    raise TypeError(f"unknown statement node {stmt!r}")


def _serialize_block(body: list[Stmt], indent: int) -> str:
    if not body:
        return "{ }"
    inner = "\n".join(_serialize_stmt(s, indent + 1) for s in body)
    return "{\n" + inner + "\n" + "  " * indent + "}"


def serialize_script(program: Program) -> str:
    """Render a program back to dialect-valid source."""
    return "\n".join(_serialize_stmt(s, 0) for s in program.body) + "\n"


# ---------------------------------------------------------------------------
# checksum-list dialect (md5sum output): per line, 32 lowercase hex
# digits, a space, a space (text mode) or '*' (binary mode), then a
# non-empty filename of printable bytes
# ---------------------------------------------------------------------------

_HEX_DIGITS = frozenset(b"0123456789abcdef")


def validate_checksum(data: bytes) -> ValidationResult:
    lines = data.split(b"\n")
    if lines and lines[-1] == b"":
        lines.pop()
    if not lines:
        return ValidationResult(ok=False, detail="no checksum lines")
    for idx, line in enumerate(lines, start=1):
        if len(line) < 35:
            return ValidationResult(ok=False, detail=f"line {idx}: too short")
        digest, sep_a, mode, name = line[:32], line[32:33], line[33:34], line[34:]
        if any(b not in _HEX_DIGITS for b in digest):
            return ValidationResult(ok=False, detail=f"line {idx}: digest must be 32 lowercase hex digits")
        if sep_a != b" ":
            return ValidationResult(ok=False, detail=f"line {idx}: missing separator space")
        if mode not in (b" ", b"*"):
            return ValidationResult(ok=False, detail=f"line {idx}: mode must be ' ' or '*'")
        if any(b < 0x20 for b in name):
            return ValidationResult(ok=False, detail=f"line {idx}: control byte in filename")
    return ValidationResult(ok=True)


# ---------------------------------------------------------------------------
# format sniffing (used when a prompt carries no format hint)
# ---------------------------------------------------------------------------


def sniff_format(text: str) -> str:
    """Best-effort format guess: json, xml, script, or raw text."""
    try:
        parse_json(text)
        return "json"
    except JsonError:
        pass
    try:
        parse_xml(text)
        return "xml"
    except XmlError:
        pass
    try:
        parse_script(text)
        return "script"
    except ScriptError:
        pass
    return "text"


VALIDATORS = {
    "xml": validate_xml,
    "json": validate_json,
    "script": validate_script,
    "checksum": validate_checksum,
}


def valid_ratio(documents: Sequence[bytes], format_name: str) -> float:
    """Fraction of documents the named format's validator accepts.

    Raises UndefinedRatio for an empty document list and KeyError for an
    unknown format name.
    """
    if not documents:
        raise UndefinedRatio("valid ratio over zero documents")
    validator = VALIDATORS[format_name]
    accepted = sum(1 for doc in documents if validator(doc).ok)
    return accepted / len(documents)
