"""Coverage-guided greybox fuzzing with a chat-model mutation stage.

The package bundles four instrumented toy parsers, a byte-level havoc
mutator, prompt construction for chat/completion endpoints, a
deterministic mock generation backend plus an HTTP one, validity
oracles for each input format, campaign orchestration under a real or
virtual clock, and the metrics used to compare configurations.
"""

__version__ = "0.1.0"
