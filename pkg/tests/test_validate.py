"""Tests for the format validity oracles.

Covers:
- XML dialect: reference documents, per-rule attribution, parse/serialize
- JSON dialect: agreement with the stdlib parser, depth cap
- Script dialect: statement grammar, keywords, nesting cap
- Checksum-list dialect
- Aggregate valid-ratio metric
"""

from __future__ import annotations

import json
from random import Random

import pytest

from llmfuzz.errors import UndefinedRatio
from llmfuzz.validate import (
    JSON_MAX_DEPTH,
    SCRIPT_KEYWORDS,
    SCRIPT_MAX_DEPTH,
    VALIDATORS,
    parse_json,
    parse_xml,
    serialize_json,
    serialize_xml,
    valid_ratio,
    validate_checksum,
    validate_json,
    validate_script,
    validate_xml,
)

# A nested document mixing text and child elements at the same level.
MIXED_CONTENT_DOC = b"""<doc>
  <clean> </clean>
  <dirty> A B </dirty>
  <mixed>
     A
     <clean> </clean>
     B
     <dirty> A B </dirty>
     C
  </mixed>
</doc>"""

# A same-shaped sibling of the document above with fresh text values.
MIXED_CONTENT_VARIANT = b"""<doc>
  <clean> </clean>
  <dirty> X Y Z </dirty>
  <mixed>
    X
    <clean> </clean>
    Y
    <dirty> X Y Z </dirty>
    Z
  </mixed>
</doc>"""

# A catalog document with a declaration, repeated records, and text leaves.
BOOK_CATALOG_DOC = b"""<?xml version="1.0" encoding="UTF-8"?>
<books>
  <book>
    <title>The Great Gatsby</title>
    <author>F. Scott Fitzgerald</author>
    <genre>Drama</genre>
  </book>
  <book>
    <title>Pride and Prejudice</title>
    <author>Jane Austen</author>
    <genre>Romance</genre>
  </book>
</books>"""


class TestXmlReferenceDocuments:
    """The well-formed reference documents all validate."""

    def test_mixed_content_doc_is_valid(self) -> None:
        """Nested mixed-content document passes all five rules."""
        result = validate_xml(MIXED_CONTENT_DOC)
        assert result.ok
        assert result.rule is None

    def test_mixed_content_variant_is_valid(self) -> None:
        """The same-shaped variant document is also well formed."""
        assert validate_xml(MIXED_CONTENT_VARIANT).ok

    def test_book_catalog_is_valid(self) -> None:
        """Catalog with declaration and repeated records is well formed."""
        assert validate_xml(BOOK_CATALOG_DOC).ok


class TestXmlRuleAttribution:
    """Each well-formedness rule owns a minimal failing fixture."""

    def test_rule_1_unclosed_element(self) -> None:
        """An element left open at end of input violates rule 1."""
        result = validate_xml(b"<a>")
        assert not result.ok
        assert result.rule == 1

    def test_rule_2_case_mismatch(self) -> None:
        """A close tag differing only by case violates rule 2."""
        result = validate_xml(b"<a></A>")
        assert not result.ok
        assert result.rule == 2

    def test_rule_3_bad_nesting(self) -> None:
        """Closing an outer element before the inner violates rule 3."""
        result = validate_xml(b"<a><b></a></b>")
        assert not result.ok
        assert result.rule == 3

    def test_rule_4_two_roots(self) -> None:
        """A second root element violates rule 4."""
        result = validate_xml(b"<a/><b/>")
        assert not result.ok
        assert result.rule == 4

    def test_rule_5_unquoted_attribute(self) -> None:
        """An unquoted attribute value violates rule 5."""
        result = validate_xml(b'<a x=1/>')
        assert not result.ok
        assert result.rule == 5

    def test_result_is_falsy_on_failure(self) -> None:
        """ValidationResult supports boolean checks directly."""
        assert not validate_xml(b"<a>")
        assert validate_xml(b"<a/>")


class TestXmlParseAndSerialize:
    """Structural parse results and the round trip back to bytes."""

    def test_parse_exposes_structure(self) -> None:
        """Tag names, attributes and children are all reachable."""
        root, declaration = parse_xml('<note lang="en"><to>Tove</to><from>Jani</from></note>')
        assert declaration is None
        assert root.name == "note"
        assert ("lang", "en") in root.attrs
        names = [child.name for child in root.elements()]
        assert names == ["to", "from"]

    def test_parse_returns_declaration(self) -> None:
        """A leading declaration is captured separately from the tree."""
        root, declaration = parse_xml(BOOK_CATALOG_DOC.decode("latin-1"))
        assert root.name == "books"
        assert declaration is not None
        assert declaration.startswith("<?xml")

    def test_serialize_round_trip(self) -> None:
        """Serialized output re-parses to an equivalent tree."""
        root, declaration = parse_xml(MIXED_CONTENT_DOC.decode("latin-1"))
        text = serialize_xml(root, declaration)
        again, _ = parse_xml(text)
        assert again.name == root.name
        assert [c.name for c in again.elements()] == [c.name for c in root.elements()]
        assert validate_xml(text.encode("latin-1")).ok

    def test_declaration_only_before_root(self) -> None:
        """A declaration after the root element is rejected."""
        result = validate_xml(b'<a/><?xml version="1.0"?>')
        assert not result.ok
        assert result.rule == 4

    def test_self_closing_and_empty_pair(self) -> None:
        """Both empty-element spellings are accepted."""
        assert validate_xml(b"<a/>").ok
        assert validate_xml(b"<a></a>").ok


class TestJsonDialect:
    """JSON oracle versus the stdlib parser."""

    VALID_DOCS = [
        b"null",
        b"true",
        b"-12.5e3",
        b'"text"',
        b"[]",
        b"[1, 2, 3]",
        b'{"a": 1}',
        b'{"a": {"b": [null, false, "x"]}}',
        b'  {"padded": 1}  ',
    ]

    INVALID_DOCS = [
        b"",
        b"{",
        b"[1,]",
        b'{"a": 1,}',
        b"'single'",
        b"{a: 1}",
        b"[1 2]",
        b"01",
        b"+1",
        b"nul",
        b'"unterminated',
        b"[1] tail",
    ]

    def test_agreement_with_stdlib_on_fixtures(self) -> None:
        """Both oracles agree on every fixture in both lists."""
        for doc in self.VALID_DOCS:
            assert validate_json(doc).ok
            json.loads(doc.decode())
        for doc in self.INVALID_DOCS:
            assert not validate_json(doc).ok
            with pytest.raises(json.JSONDecodeError):
                json.loads(doc.decode())

    def test_agreement_with_stdlib_on_mutants(self) -> None:
        """Random byte edits of a valid document never split the oracles."""
        rng = Random(31337)
        base = bytearray(b'{"name": "tool", "tags": ["a", "b"], "size": 12}')
        for _ in range(400):
            mutant = bytearray(base)
            for _ in range(rng.randrange(1, 4)):
                pos = rng.randrange(len(mutant))
                mutant[pos] = rng.randrange(32, 127)
            data = bytes(mutant)
            try:
                json.loads(data.decode("latin-1"))
                stdlib_ok = True
            except (json.JSONDecodeError, ValueError, RecursionError):
                stdlib_ok = False
            assert validate_json(data).ok == stdlib_ok

    def test_depth_cap(self) -> None:
        """Nesting is accepted up to the cap and rejected past it."""
        ok_doc = b"[" * JSON_MAX_DEPTH + b"1" + b"]" * JSON_MAX_DEPTH
        deep_doc = b"[" * (JSON_MAX_DEPTH + 1) + b"1" + b"]" * (JSON_MAX_DEPTH + 1)
        assert validate_json(ok_doc).ok
        assert not validate_json(deep_doc).ok

    def test_parse_and_serialize_round_trip(self) -> None:
        """parse_json and serialize_json invert each other."""
        doc = b'{"a": [1, true, null], "b": "x"}'
        value = parse_json(doc)
        again = parse_json(serialize_json(value))
        assert again == value

    def test_duplicate_keys_last_wins(self) -> None:
        """Duplicate object keys resolve the same way as the stdlib."""
        doc = b'{"k": 1, "k": 2}'
        assert validate_json(doc).ok
        assert parse_json(doc) == json.loads(doc.decode())


class TestScriptDialect:
    """Statement-oriented script grammar."""

    def test_simple_program_is_valid(self) -> None:
        """Declarations, calls and control flow parse."""
        program = b"""let x = 1;
fn work(n) {
  if (n > 0) {
    return n;
  }
  return 0;
}
work(x);
"""
        assert validate_script(program).ok

    def test_keyword_set(self) -> None:
        """The reserved words include the core statement keywords."""
        for word in ("let", "fn", "if", "else", "while", "return"):
            assert word in SCRIPT_KEYWORDS

    def test_unbalanced_brace_rejected(self) -> None:
        """A dangling block is a syntax error."""
        assert not validate_script(b"fn f() { return 1;").ok

    def test_missing_semicolon_rejected(self) -> None:
        """Statements must be terminated."""
        assert not validate_script(b"let x = 1").ok

    def test_depth_cap(self) -> None:
        """Block nesting past the cap is rejected."""
        deep = b"if (x) {" * (SCRIPT_MAX_DEPTH + 1) + b"}" * (SCRIPT_MAX_DEPTH + 1)
        assert not validate_script(deep).ok

    def test_empty_program_rejected(self) -> None:
        """An empty buffer is not a program."""
        assert not validate_script(b"").ok


class TestChecksumDialect:
    """Checksum-list oracle."""

    def test_single_line_is_valid(self) -> None:
        """Digest, separator, mode flag and name make a valid line."""
        line = b"d41d8cd98f00b204e9800998ecf8427e  file.txt\n"
        assert validate_checksum(line).ok

    def test_binary_mode_flag(self) -> None:
        """The * mode flag is accepted."""
        assert validate_checksum(b"d41d8cd98f00b204e9800998ecf8427e *file.bin\n").ok

    def test_short_digest_rejected(self) -> None:
        """A digest shorter than 32 hex chars fails."""
        assert not validate_checksum(b"d41d8cd9  file.txt\n").ok

    def test_uppercase_digest_rejected(self) -> None:
        """Digest hex must be lowercase."""
        assert not validate_checksum(b"D41D8CD98F00B204E9800998ECF8427E  file.txt\n").ok

    def test_missing_trailing_newline_tolerated(self) -> None:
        """A final line without its newline still validates."""
        assert validate_checksum(b"d41d8cd98f00b204e9800998ecf8427e  file.txt").ok

    def test_control_byte_in_name_rejected(self) -> None:
        """Filenames may not contain control bytes."""
        assert not validate_checksum(b"d41d8cd98f00b204e9800998ecf8427e  fi\x01le\n").ok

    def test_empty_input_rejected(self) -> None:
        """Zero lines is not a checksum list."""
        assert not validate_checksum(b"").ok


class TestValidRatio:
    """Aggregate validity fraction over a document batch."""

    def test_fraction(self) -> None:
        """Two valid of four gives 0.5."""
        docs = [b"<a/>", b"<b></b>", b"<c>", b"oops"]
        assert valid_ratio(docs, "xml") == 0.5

    def test_empty_batch_is_undefined(self) -> None:
        """No documents, no ratio."""
        with pytest.raises(UndefinedRatio):
            valid_ratio([], "xml")

    def test_unknown_format_rejected(self) -> None:
        """Format names are restricted to the registered oracles."""
        with pytest.raises(KeyError):
            valid_ratio([b"x"], "yaml")

    def test_validators_registry(self) -> None:
        """Every registered oracle accepts bytes and returns a result."""
        for name, fn in VALIDATORS.items():
            result = fn(b"probe")
            assert hasattr(result, "ok")
