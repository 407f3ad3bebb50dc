"""Target execution: verdicts, trace exchange, in-process and subprocess adapters.

A harness turns one input byte string into a verdict plus an edge
trace.  Bundled toy parsers run in-process; arbitrary external parsers
are driven through a subprocess adapter that exchanges traces through a
file named by the TRACE_OUT environment variable, one ``%06u:%u``
edge:count line per edge.
"""

from __future__ import annotations

import os
import subprocess
import tempfile
import time
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Callable, Protocol

from .coverage import MAP_SIZE, EdgeTrace

# External targets get this long to finish before the run is flagged.
DEFAULT_TIMEOUT_S = 1.0

# Every trace contains the entry edge, so even an input rejected before
# the first parse step produces coverage.
ENTRY_EDGE = 0


class Verdict(Enum):
    ACCEPTED = "accepted"
    PARSE_ERROR = "parse_error"
    CRASH = "crash"


@dataclass(frozen=True)
class ExecResult:
    """Outcome of one target execution."""

    verdict: Verdict
    trace: EdgeTrace
    wall_time: float = 0.0
    timed_out: bool = False
    detail: str = ""


class TargetHarness(Protocol):
    """Anything that can execute inputs and report coverage."""

    name: str
    format_name: str

    def run(self, data: bytes) -> ExecResult: ...


def format_trace(hits: dict[int, int]) -> str:
    """Serialize a trace to the wire format, sorted by edge id."""
    return "".join(f"{edge:06d}:{count}\n" for edge, count in sorted(hits.items()))


def parse_trace(text: str) -> dict[int, int]:
    """Parse wire-format trace lines; malformed lines are skipped.

    An empty or wholly unreadable trace degrades to the bare entry edge
    so downstream code never sees an empty trace.
    """
    hits: dict[int, int] = {}
    for line in text.splitlines():
        edge_part, sep, count_part = line.partition(":")
        if not sep:
            continue
        try:
            edge = int(edge_part, 10)
            count = int(count_part, 10)
        except ValueError:
            continue
        if 0 <= edge < MAP_SIZE and count >= 1:
            hits[edge] = hits.get(edge, 0) + count
    if not hits:
        hits[ENTRY_EDGE] = 1
    return hits


@dataclass
class InProcessTarget:
    """Adapter around a bundled parser function.

    The wrapped callable takes raw bytes and returns
    (verdict, edge hit dict, detail message).
    """

    name: str
    format_name: str
    fn: Callable[[bytes], tuple[Verdict, dict[int, int], str]]

    def run(self, data: bytes) -> ExecResult:
        start = time.perf_counter()
        verdict, hits, detail = self.fn(data)
        elapsed = time.perf_counter() - start
        return ExecResult(verdict=verdict, trace=EdgeTrace(hits), wall_time=elapsed, detail=detail)


@dataclass
class CommandTarget:
    """Adapter around an external parser binary.

    The command is invoked as ``cmd... <input-file>`` with TRACE_OUT
    pointing at a scratch trace file.  Exit status 0 means accepted,
    any other ordinary exit means parse error, death by signal means
    crash, and exceeding the timeout is a crash with the timeout flag.
    """

    name: str
    format_name: str
    command: list[str]
    timeout_s: float = DEFAULT_TIMEOUT_S

    def run(self, data: bytes) -> ExecResult:
        with tempfile.TemporaryDirectory(prefix="llmfuzz-exec-") as scratch:
            input_path = Path(scratch) / "input"
            trace_path = Path(scratch) / "trace"
            input_path.write_bytes(data)
            env = dict(os.environ, TRACE_OUT=str(trace_path))
            timed_out = False
            start = time.perf_counter()
            try:
                proc = subprocess.run(
                    [*self.command, str(input_path)],
                    env=env,
                    capture_output=True,
                    timeout=self.timeout_s,
                )
                returncode: int | None = proc.returncode
            except subprocess.TimeoutExpired:
                timed_out = True
                returncode = None
            elapsed = time.perf_counter() - start

            try:
                hits = parse_trace(trace_path.read_text(errors="replace"))
            except OSError:
                hits = {ENTRY_EDGE: 1}

        if timed_out:
            return ExecResult(Verdict.CRASH, EdgeTrace(hits), wall_time=elapsed, timed_out=True, detail="timeout")
        if returncode == 0:
            return ExecResult(Verdict.ACCEPTED, EdgeTrace(hits), wall_time=elapsed)
        if returncode is not None and returncode < 0:
            return ExecResult(Verdict.CRASH, EdgeTrace(hits), wall_time=elapsed, detail=f"signal {-returncode}")
        return ExecResult(Verdict.PARSE_ERROR, EdgeTrace(hits), wall_time=elapsed, detail=f"exit {returncode}")
