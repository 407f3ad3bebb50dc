"""Exception types shared across the fuzzing toolkit.

Raising a dedicated type per failure mode keeps the CLI's exit-code
mapping and the library's error contracts explicit instead of leaking
bare ValueErrors from deep inside a campaign.
"""

from __future__ import annotations


class LlmFuzzError(Exception):
    """Base class for all toolkit errors."""


class UndefinedBaseline(LlmFuzzError):
    """Coverage improvement requested against an initial edge count of zero."""


class UndefinedRatio(LlmFuzzError):
    """Import ratio requested for an empty queue."""


class UndefinedStats(LlmFuzzError):
    """Summary statistics requested for an empty sample."""


class MissingCell(LlmFuzzError):
    """Rank table input contains a missing (NaN) improvement cell."""


class EmptyPool(LlmFuzzError):
    """Seed selection attempted on a pool with no seeds."""


class UnknownTarget(LlmFuzzError):
    """Target name not present in the registry."""


class DictionaryParseError(LlmFuzzError):
    """Token dictionary file is malformed.

    Carries the 1-based line number of the offending entry.
    """

    def __init__(self, line_no: int, message: str) -> None:
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class MissingSample(LlmFuzzError):
    """Prompt variant requires a sample seed but none was provided."""


class UnexpectedSample(LlmFuzzError):
    """Prompt variant takes no sample seed but one was provided."""


class ProviderUnavailable(LlmFuzzError):
    """Generation backend kept failing after retries (or refused outright)."""


class ProviderProtocolError(LlmFuzzError):
    """Generation backend answered with a malformed or incomplete payload."""
