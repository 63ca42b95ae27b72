"""Rule-based word tokenizer with a pluggable interface.

Splits on whitespace, then detaches sentence punctuation inside each chunk.
Irish contractions ("d'ith") and mutation prefixes ("n-éan") survive because
apostrophes and hyphens are not in the detachable punctuation set.  URLs,
decimal numbers and listed abbreviations stay single tokens.

Any ``str -> list[str]`` function can replace this module through the
pretokenized passthrough (`pretokenized_surfaces`), used by the CLI's
``--pretokenized`` flag.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from gaprep.corpus import Token
from gaprep.errors import ConfigError

DEFAULT_PUNCTUATION = '.,!?;:"()[]{}'
_URL_PREFIXES = ("http://", "https://", "www.")


@dataclass(frozen=True)
class TokenizerRuleSet:
    apostrophe_prefixes: frozenset[str] = frozenset({"d'", "b'", "m'", "n'"})
    mutation_prefixes: frozenset[str] = frozenset({"n-", "t-", "h-"})
    url_pattern: str = r"(?:https?://|www\.)\S+"
    abbreviation_list: frozenset[str] = frozenset({"m.sh.", "srl.", "etc.", "lch."})
    punctuation: str = DEFAULT_PUNCTUATION

    def __post_init__(self):
        for prefix in list(self.apostrophe_prefixes) + list(self.mutation_prefixes):
            if not prefix.endswith(("'", "-")):
                raise ConfigError(f"tokenizer prefix must end with ' or -: {prefix!r}")


DEFAULT_RULES = TokenizerRuleSet()

_SPLITTER_CACHE: dict[str, tuple[re.Pattern, re.Pattern]] = {}
_CHUNK_RE = re.compile(r"\S+")


def _splitters(punctuation: str) -> tuple[re.Pattern, re.Pattern]:
    try:
        return _SPLITTER_CACHE[punctuation]
    except KeyError:
        cls = re.escape(punctuation)
        # Decimal numbers first so "." and "," between digits do not split.
        piece_re = re.compile(rf"\d+(?:[.,]\d+)*|[{cls}]|[^{cls}]+")
        punct_re = re.compile(rf"[{cls}]")
        _SPLITTER_CACHE[punctuation] = (piece_re, punct_re)
        return piece_re, punct_re


def _split_chunk(chunk: str, rules: TokenizerRuleSet) -> list[str]:
    piece_re, punct_re = _splitters(rules.punctuation)
    if punct_re.search(chunk) is None:
        return [chunk]
    if chunk in rules.abbreviation_list:
        return [chunk]
    if chunk.startswith(_URL_PREFIXES):
        # Peel trailing punctuation off the URL; the rest stays glued.
        core = chunk.rstrip(rules.punctuation)
        if core.startswith(_URL_PREFIXES) and core not in _URL_PREFIXES:
            return [core] + list(chunk[len(core):])
    return piece_re.findall(chunk)


def tokenize_surfaces(line: str, rules: TokenizerRuleSet = DEFAULT_RULES) -> list[str]:
    """Token surfaces only (no spans); the pipeline's fast path."""
    out: list[str] = []
    for chunk in line.split():
        out.extend(_split_chunk(chunk, rules))
    return out


def tokenize(line: str, rules: TokenizerRuleSet = DEFAULT_RULES) -> list[Token]:
    """Tokenize one line into Tokens whose spans are byte offsets into ``line``."""
    tokens: list[Token] = []
    byte_pos = 0
    char_pos = 0
    for match in _CHUNK_RE.finditer(line):
        start, end = match.span()
        if start > char_pos:
            byte_pos += len(line[char_pos:start].encode("utf-8"))
        cursor = byte_pos
        for piece in _split_chunk(match.group(), rules):
            blen = len(piece.encode("utf-8"))
            tokens.append(Token(piece, (cursor, cursor + blen)))
            cursor += blen
        byte_pos += len(match.group().encode("utf-8"))
        char_pos = end
    return tokens


def detokenize(tokens) -> str:
    """Join token surfaces with single spaces (original spacing is not recovered)."""
    return " ".join(t.surface if isinstance(t, Token) else t for t in tokens)


def pretokenized_surfaces(line: str) -> list[str]:
    """Passthrough for externally tokenized input: whitespace split only."""
    return line.split()
