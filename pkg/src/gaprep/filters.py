"""Sentence- and document-level corpus filters with per-rule accounting.

Four modes:

* ``no-filter``: passthrough.
* ``document-filter``: WikiBERT-style whole-document heuristics.
* ``opusfilter-basic``: per-sentence length / long-word / HTML-tag /
  punctuation-ratio / digit-ratio filters.
* ``opusfilter-basic-char-lang``: the basic filters plus Latin-script and
  dual-engine language-ID checks.

Character ratios are computed over non-whitespace characters.  Punctuation
means Unicode general category P*, digits category N*; both documented sets
are materialized once into delete-tables so counting runs at C speed.
"""

from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

from gaprep.corpus import Document, Sentence
from gaprep.errors import ConfigError
from gaprep.langid import LangIdResult, LanguageProfile, classify_nb, classify_rank

MODES = ("no-filter", "document-filter", "opusfilter-basic", "opusfilter-basic-char-lang")

RULE_LENGTH = "LengthFilter"
RULE_LONG_WORD = "LongWordFilter"
RULE_HTML = "HTMLTagFilter"
RULE_PUNCT = "PunctuationFilter"
RULE_DIGITS = "DigitsFilter"
RULE_SCRIPT = "CharacterScoreFilter"
RULE_LANGID = "LanguageIDFilter"
RULE_DOC_MIN_SENTS = "MinSentencesFilter"
RULE_DOC_ALPHA = "AlphabeticRatioFilter"
RULE_DOC_CLEAN = "CleanSentenceRatioFilter"

_HTML_TAG_RE = re.compile(r"<[a-zA-Z!/][^>]*>")


@dataclass(frozen=True)
class FilterConfig:
    mode: str = "opusfilter-basic"
    max_words: int = 512
    max_word_chars: int = 40
    punct_ratio: float = 0.60
    digit_ratio: float = 0.60
    langid_threshold: float = 0.80
    target_language: str = "ga"
    langid_conjunctive: bool = True  # both engines must clear the threshold
    # document-filter knobs
    min_sentences: int = 3
    min_alpha_ratio: float = 0.5
    min_clean_fraction: float = 0.4

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError(f"unknown filter mode {self.mode!r} (expected one of {MODES})")
        for name in ("punct_ratio", "digit_ratio"):
            value = getattr(self, name)
            if not 0 < value <= 1:
                raise ConfigError(f"{name} must be in (0, 1]: {value}")
        if self.max_words <= 0 or self.max_word_chars <= 0 or self.langid_threshold <= 0:
            raise ConfigError("filter thresholds must be positive")

    @classmethod
    def from_dict(cls, raw: dict) -> "FilterConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"unknown filter config keys: {sorted(unknown)}")
        return cls(**raw)


@dataclass(frozen=True, slots=True)
class FilterDecision:
    keep: bool
    rule: str | None = None  # first rejecting rule when dropped


@lru_cache(maxsize=1)
def _char_tables() -> dict[str, dict[int, None]]:
    """Delete-tables for str.translate: punctuation, digits, alpha, non-Latin alpha."""
    punct: dict[int, None] = {}
    digit: dict[int, None] = {}
    alpha: dict[int, None] = {}
    nonlatin: dict[int, None] = {}
    for cp in range(0x110000):
        ch = chr(cp)
        cat = unicodedata.category(ch)
        head = cat[0]
        if head == "P":
            punct[cp] = None
        elif head == "N":
            digit[cp] = None
        if ch.isalpha():
            alpha[cp] = None
            if not unicodedata.name(ch, "").startswith("LATIN"):
                nonlatin[cp] = None
    return {"punct": punct, "digit": digit, "alpha": alpha, "nonlatin": nonlatin}


def _count_deleted(text: str, table: dict[int, None]) -> int:
    return len(text) - len(text.translate(table))


def basic_verdict(surfaces: Sequence[str], cfg: FilterConfig) -> str | None:
    """First failing basic rule for a tokenized sentence, or None to keep."""
    if len(surfaces) > cfg.max_words:
        return RULE_LENGTH
    total_chars = 0
    for tok in surfaces:
        if len(tok) > cfg.max_word_chars:
            return RULE_LONG_WORD
        total_chars += len(tok)
    text = " ".join(surfaces)
    if _HTML_TAG_RE.search(text):
        return RULE_HTML
    if total_chars:
        tables = _char_tables()
        if _count_deleted(text, tables["punct"]) / total_chars > cfg.punct_ratio:
            return RULE_PUNCT
        if _count_deleted(text, tables["digit"]) / total_chars > cfg.digit_ratio:
            return RULE_DIGITS
    return None


def langid_passes(results: Iterable[LangIdResult], cfg: FilterConfig) -> bool:
    """Threshold logic for the language-ID rule, isolated for boundary testing."""
    hits = [r.language == cfg.target_language and r.confidence > cfg.langid_threshold for r in results]
    if not hits:
        raise ConfigError("language-ID filter invoked without engine results")
    return all(hits) if cfg.langid_conjunctive else any(hits)


@dataclass
class LangIdEngines:
    """The two language-ID engines bound to a shared profile set."""

    profiles: list[LanguageProfile]

    def __post_init__(self):
        if not self.profiles:
            raise ConfigError("language-ID engines need at least one trained profile")

    def results(self, text: str) -> tuple[LangIdResult, LangIdResult]:
        return classify_nb(text, self.profiles), classify_rank(text, self.profiles)


def char_lang_verdict(surfaces: Sequence[str], cfg: FilterConfig, engines: LangIdEngines) -> str | None:
    verdict = basic_verdict(surfaces, cfg)
    if verdict is not None:
        return verdict
    text = " ".join(surfaces)
    if _count_deleted(text, _char_tables()["nonlatin"]) > 0:
        return RULE_SCRIPT
    if not langid_passes(engines.results(text), cfg):
        return RULE_LANGID
    return None


def filter_sentence_basic(sentence: Sentence, cfg: FilterConfig) -> FilterDecision:
    if cfg.mode not in ("opusfilter-basic", "opusfilter-basic-char-lang"):
        raise ConfigError(f"sentence filtering requires an opusfilter mode, got {cfg.mode!r}")
    rule = basic_verdict(sentence.surfaces(), cfg)
    return FilterDecision(rule is None, rule)


def filter_sentence_char_lang(sentence: Sentence, cfg: FilterConfig, engines: LangIdEngines) -> FilterDecision:
    if engines is None:
        raise ConfigError("opusfilter-basic-char-lang requires language profiles")
    rule = char_lang_verdict(sentence.surfaces(), cfg, engines)
    return FilterDecision(rule is None, rule)


def document_verdict(sentence_surfaces: Sequence[Sequence[str]], cfg: FilterConfig) -> str | None:
    """First failing document rule, or None to keep."""
    if len(sentence_surfaces) < cfg.min_sentences:
        return RULE_DOC_MIN_SENTS
    alpha_table = _char_tables()["alpha"]
    total = alpha = 0
    for surfaces in sentence_surfaces:
        text = "".join(surfaces)
        total += len(text)
        alpha += _count_deleted(text, alpha_table)
    if total == 0 or alpha / total < cfg.min_alpha_ratio:
        return RULE_DOC_ALPHA
    clean = sum(1 for surfaces in sentence_surfaces if basic_verdict(surfaces, cfg) is None)
    if clean / len(sentence_surfaces) < cfg.min_clean_fraction:
        return RULE_DOC_CLEAN
    return None


def filter_document(document: Document, cfg: FilterConfig) -> FilterDecision:
    rule = document_verdict([s.surfaces() for s in document.sentences], cfg)
    return FilterDecision(rule is None, rule)


@dataclass
class FilterReport:
    mode: str
    input_sentences: int = 0
    input_tokens: int = 0
    kept_sentences: int = 0
    kept_tokens: int = 0
    input_documents: int = 0
    kept_documents: int = 0
    drops_by_rule: dict[str, int] = field(default_factory=dict)

    @property
    def dropped_sentences(self) -> int:
        return self.input_sentences - self.kept_sentences

    @property
    def dropped_tokens(self) -> int:
        return self.input_tokens - self.kept_tokens

    def record(self, n_tokens: int, rule: str | None) -> None:
        self.input_sentences += 1
        self.input_tokens += n_tokens
        if rule is None:
            self.kept_sentences += 1
            self.kept_tokens += n_tokens
        else:
            self.drops_by_rule[rule] = self.drops_by_rule.get(rule, 0) + 1

    def merge(self, other: "FilterReport") -> "FilterReport":
        if other.mode != self.mode:
            raise ConfigError("cannot merge filter reports from different modes")
        merged = FilterReport(
            self.mode,
            self.input_sentences + other.input_sentences,
            self.input_tokens + other.input_tokens,
            self.kept_sentences + other.kept_sentences,
            self.kept_tokens + other.kept_tokens,
            self.input_documents + other.input_documents,
            self.kept_documents + other.kept_documents,
            dict(self.drops_by_rule),
        )
        for rule, count in other.drops_by_rule.items():
            merged.drops_by_rule[rule] = merged.drops_by_rule.get(rule, 0) + count
        return merged

    def as_dict(self) -> dict:
        return {
            "mode": self.mode,
            "documents": {"input": self.input_documents, "kept": self.kept_documents},
            "sentences": {
                "input": self.input_sentences,
                "kept": self.kept_sentences,
                "dropped": self.dropped_sentences,
            },
            "tokens": {
                "input": self.input_tokens,
                "kept": self.kept_tokens,
                "dropped": self.dropped_tokens,
            },
            "drops_by_rule": dict(sorted(self.drops_by_rule.items())),
        }


def _surface_doc(document: Document) -> list[list[str]]:
    return [s.surfaces() for s in document.sentences]


def run_filters(
    documents: Iterable[Document],
    cfg: FilterConfig,
    engines: LangIdEngines | None = None,
) -> tuple[list[Document], FilterReport]:
    """Apply the configured mode to a document stream.

    Returns the kept documents (with surviving sentences in the opusfilter
    modes) and an exact accounting report.
    """
    report = FilterReport(cfg.mode)
    kept_docs: list[Document] = []

    if cfg.mode == "opusfilter-basic-char-lang" and engines is None:
        raise ConfigError("opusfilter-basic-char-lang requires language profiles")

    for doc in documents:
        report.input_documents += 1
        if cfg.mode == "no-filter":
            for sent in doc.sentences:
                report.record(len(sent.tokens), None)
            kept_docs.append(doc)
            report.kept_documents += 1
            continue

        if cfg.mode == "document-filter":
            rule = document_verdict(_surface_doc(doc), cfg)
            for sent in doc.sentences:
                report.record(len(sent.tokens), rule)
            if rule is None:
                kept_docs.append(doc)
                report.kept_documents += 1
            continue

        kept_sents = []
        for sent in doc.sentences:
            if cfg.mode == "opusfilter-basic":
                rule = basic_verdict(sent.surfaces(), cfg)
            else:
                rule = char_lang_verdict(sent.surfaces(), cfg, engines)
            report.record(len(sent.tokens), rule)
            if rule is None:
                kept_sents.append(sent)
        if kept_sents:
            kept_docs.append(Document(tuple(kept_sents), doc.source))
            report.kept_documents += 1

    return kept_docs, report
