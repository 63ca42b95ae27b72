"""Deterministic corpus preparation and evaluation toolkit for Irish LM pretraining.

The package turns raw Irish text (plain text, ``.vert`` vertical files,
CoNLL-U) into filtered, tokenized, masked-LM pretraining instances, builds
subword vocabularies, and scores downstream artifacts (dependency parses,
cloze predictions, verbal MWE identification).
"""

from gaprep.errors import ConfigError, DataError, GaprepError

__version__ = "0.1.0"

__all__ = ["GaprepError", "ConfigError", "DataError", "__version__"]
