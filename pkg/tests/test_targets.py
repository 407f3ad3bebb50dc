"""Tests for the bundled instrumented toy parsers.

Covers:
- Registry lookup and error handling
- Sample corpora acceptance and trace determinism
- Error-path coverage staying inside the accepted-path edge universe
- Content-sensitive deep edges for the structured formats
- Deliberate shallowness of the checksum target
- The planted crash in the script walker
"""

from __future__ import annotations

from random import Random

import pytest

from llmfuzz.errors import UnknownTarget
from llmfuzz.harness import Verdict
from llmfuzz.targets import SAMPLE_INPUTS, TARGET_NAMES, get_target


def mutate_bytes(data: bytes, rng: Random) -> bytes:
    """A few random byte substitutions, insertions, or deletions."""
    buf = bytearray(data)
    for _ in range(rng.randrange(1, 5)):
        choice = rng.random()
        if choice < 0.5 and buf:
            buf[rng.randrange(len(buf))] = rng.randrange(256)
        elif choice < 0.75:
            buf.insert(rng.randrange(len(buf) + 1), rng.randrange(256))
        elif buf:
            del buf[rng.randrange(len(buf))]
    return bytes(buf)


class TestRegistry:
    """Tests for target lookup."""

    def test_four_bundled_targets(self) -> None:
        """The bundle ships exactly the four toy parsers."""
        assert TARGET_NAMES == ("toy-checksum", "toy-json", "toy-script", "toy-xml")

    def test_lookup_returns_harness(self) -> None:
        """A resolved target carries its name and format."""
        harness = get_target("toy-xml")
        assert harness.name == "toy-xml"
        assert harness.format_name == "xml"

    def test_unknown_name_rejected(self) -> None:
        """Lookup failure raises the dedicated error."""
        with pytest.raises(UnknownTarget):
            get_target("toy-yaml")

    def test_sample_inputs_cover_every_target(self) -> None:
        """Each bundled target ships at least one sample document."""
        for name in TARGET_NAMES:
            assert len(SAMPLE_INPUTS[name]) >= 1


class TestSampleCorpora:
    """Bundled samples against their own parsers."""

    def test_all_samples_accepted(self) -> None:
        """Every sample document parses cleanly."""
        for name in TARGET_NAMES:
            harness = get_target(name)
            for doc in SAMPLE_INPUTS[name]:
                result = harness.run(doc)
                assert result.verdict is Verdict.ACCEPTED, (name, doc)

    def test_traces_are_deterministic(self) -> None:
        """Re-running an input reproduces the exact trace."""
        for name in TARGET_NAMES:
            harness = get_target(name)
            for doc in SAMPLE_INPUTS[name]:
                first = harness.run(doc).trace.hits
                second = harness.run(doc).trace.hits
                assert first == second

    def test_entry_edge_always_present(self) -> None:
        """Every trace contains edge 0, even for garbage input."""
        for name in TARGET_NAMES:
            harness = get_target(name)
            assert 0 in harness.run(b"\xff\xfe garbage").trace.hits
            for doc in SAMPLE_INPUTS[name]:
                assert 0 in harness.run(doc).trace.hits

    def test_wall_time_recorded(self) -> None:
        """Executions report a non-negative wall time."""
        harness = get_target("toy-xml")
        result = harness.run(SAMPLE_INPUTS["toy-xml"][0])
        assert result.wall_time >= 0.0


class TestErrorPathContainment:
    """Rejected inputs never reach edges that accepted inputs cannot."""

    @pytest.mark.parametrize("name", list(TARGET_NAMES))
    def test_error_edges_subset_of_accept_edges(self, name: str) -> None:
        """Edges on parse-error runs stay inside the accepted universe."""
        harness = get_target(name)
        rng = Random(hash(name) & 0xFFFF)

        accept_union: set[int] = set()
        error_union: set[int] = set()
        for doc in SAMPLE_INPUTS[name]:
            accept_union |= harness.run(doc).trace.edge_ids()

        for doc in SAMPLE_INPUTS[name]:
            for _ in range(300):
                mutant = mutate_bytes(doc, rng)
                result = harness.run(mutant)
                if result.verdict is Verdict.ACCEPTED:
                    accept_union |= result.trace.edge_ids()
                elif result.verdict is Verdict.PARSE_ERROR:
                    error_union |= result.trace.edge_ids()

        assert error_union, f"{name}: no parse errors among mutants"
        assert error_union <= accept_union
        assert error_union < accept_union


class TestContentSensitiveEdges:
    """Structured formats expose edges that react to leaf values."""

    def test_xml_text_change_moves_edges(self) -> None:
        """Changing element text lands in a different coverage slot."""
        harness = get_target("toy-xml")
        doc = SAMPLE_INPUTS["toy-xml"][0]
        changed = doc.replace(b"Meditations", b"Contemplations")
        before = harness.run(doc).trace.edge_ids()
        after = harness.run(changed).trace.edge_ids()
        assert before != after

    def test_xml_attribute_change_moves_edges(self) -> None:
        """Changing an attribute value lands in a different slot."""
        harness = get_target("toy-xml")
        doc = SAMPLE_INPUTS["toy-xml"][0]
        changed = doc.replace(b'lang="en"', b'lang="de"')
        assert harness.run(doc).trace.edge_ids() != harness.run(changed).trace.edge_ids()

    def test_json_value_change_moves_edges(self) -> None:
        """Changing a scalar under a known key shifts coverage."""
        harness = get_target("toy-json")
        before = harness.run(b'{"name": "alpha"}').trace.edge_ids()
        after = harness.run(b'{"name": "omega"}').trace.edge_ids()
        assert before != after

    def test_script_literal_change_moves_edges(self) -> None:
        """Changing a bound literal shifts coverage."""
        harness = get_target("toy-script")
        before = harness.run(b"let total = 1;\n").trace.edge_ids()
        after = harness.run(b"let total = 2;\n").trace.edge_ids()
        assert before != after

    def test_script_has_broad_edge_space(self) -> None:
        """The script walker exposes a wide deep-edge universe."""
        harness = get_target("toy-script")
        union: set[int] = set()
        for doc in SAMPLE_INPUTS["toy-script"]:
            union |= harness.run(doc).trace.edge_ids()
        assert len(union) >= 40


class TestChecksumShallowness:
    """The checksum target deliberately offers little to discover."""

    def test_digest_content_is_invisible(self) -> None:
        """Two different digests over the same name trace identically."""
        harness = get_target("toy-checksum")
        a = harness.run(b"d41d8cd98f00b204e9800998ecf8427e  a.c\n")
        b = harness.run(b"aaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaa  a.c\n")
        assert a.trace.hits == b.trace.hits

    def test_samples_saturate_the_edge_space(self) -> None:
        """1000 random mutants find no edge the samples missed."""
        harness = get_target("toy-checksum")
        rng = Random(2024)
        universe: set[int] = set()
        for doc in SAMPLE_INPUTS["toy-checksum"]:
            universe |= harness.run(doc).trace.edge_ids()
        for doc in SAMPLE_INPUTS["toy-checksum"]:
            for _ in range(250):
                mutant = mutate_bytes(doc, rng)
                assert harness.run(mutant).trace.edge_ids() <= universe

    def test_presence_bits_do_not_count(self) -> None:
        """Repeating a line leaves each presence edge at count 1."""
        harness = get_target("toy-checksum")
        line = b"d41d8cd98f00b204e9800998ecf8427e  a.c\n"
        trace = harness.run(line * 3).trace
        parse_bits = [edge for edge in trace.hits if 1 <= edge <= 7]
        assert parse_bits
        for edge in parse_bits:
            assert trace.hits[edge] == 1


class TestPlantedCrash:
    """The script walker's deliberate fault."""

    def test_crash_call_crashes(self) -> None:
        """A program invoking crash() yields a crash verdict."""
        result = get_target("toy-script").run(b"crash();\n")
        assert result.verdict is Verdict.CRASH

    def test_crash_requires_execution(self) -> None:
        """Merely naming crash in a string literal does not fire."""
        result = get_target("toy-script").run(b'let s = "crash()";\n')
        assert result.verdict is Verdict.ACCEPTED

    def test_crash_trace_still_reported(self) -> None:
        """The crash verdict still carries the coverage gathered."""
        result = get_target("toy-script").run(b"crash();\n")
        assert len(result.trace.hits) > 1
