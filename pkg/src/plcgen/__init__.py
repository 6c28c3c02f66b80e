"""Generation, checking, and model-based verification of IEC 61131-3 Structured Text."""

__version__ = "0.1.0"

DEFAULT_SEED = 42
