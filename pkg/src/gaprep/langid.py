"""Character n-gram language identification with two independent engines.

Both engines consume byte n-grams (n = 1..4 over the UTF-8 encoding) from
the same trained profiles:

* `classify_nb`: multinomial naive Bayes with add-alpha smoothing
  (alpha = 0.5); confidence is the softmax-normalized posterior.
* `classify_rank`: rank-order (out-of-place) distance between the top-K
  frequency rank lists (K = 300).  The document's rank list is restricted to
  grams known to at least one profile, since grams unknown everywhere carry
  no signal.  Document ranks are rescaled to the profile scale and offsets
  within K/2 count as in-place (rank order from a single sentence is noisy);
  a gram absent from the profile list costs the full K.  Confidence =
  1 - best distance / worst-case distance, the worst case being every
  document gram maximally out of place (|doc list| * K).

Seed profiles for Irish (ga) and English (en) are trained on bundled text
the first time they are requested.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from importlib import resources
from typing import Iterable

from gaprep.errors import ConfigError, DataError

ALPHA = 0.5
MAX_ORDER = 4
RANK_K = 300


@dataclass(frozen=True, slots=True)
class LangIdResult:
    language: str
    confidence: float

    def __post_init__(self):
        if not 0.0 <= self.confidence <= 1.0:
            raise DataError(f"confidence out of range: {self.confidence}")


@dataclass
class LanguageProfile:
    language: str
    ngram_logprobs: dict[bytes, float] = field(default_factory=dict)
    prior: float = 0.0  # log prior; 0.0 everywhere = uniform over profiles
    counts: dict[bytes, int] = field(default_factory=dict)
    unk_logprob: dict[int, float] = field(default_factory=dict)  # per order

    def rank_list(self) -> dict[bytes, int]:
        """Gram -> rank over the top-K grams (count desc, shorter first, bytes asc)."""
        top = sorted(self.counts.items(), key=lambda kv: (-kv[1], len(kv[0]), kv[0]))[:RANK_K]
        return {gram: rank for rank, (gram, _) in enumerate(top)}

    def to_json(self) -> str:
        payload = {
            "format_version": 1,
            "language": self.language,
            "prior": self.prior,
            "alpha": ALPHA,
            "counts": {gram.hex(): c for gram, c in sorted(self.counts.items())},
        }
        return json.dumps(payload, indent=0, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "LanguageProfile":
        raw = json.loads(text)
        if raw.get("format_version") != 1:
            raise DataError(f"unsupported profile format version: {raw.get('format_version')!r}")
        counts = {bytes.fromhex(k): int(v) for k, v in raw["counts"].items()}
        return _finalize_profile(raw["language"], counts, prior=float(raw.get("prior", 0.0)))


def _byte_ngrams(text: str) -> Iterable[bytes]:
    data = text.encode("utf-8")
    n_bytes = len(data)
    for order in range(1, MAX_ORDER + 1):
        for i in range(n_bytes - order + 1):
            yield data[i : i + order]


def _finalize_profile(language: str, counts: dict[bytes, int], prior: float = 0.0) -> LanguageProfile:
    totals: dict[int, int] = {}
    vocab: dict[int, int] = {}
    for gram, c in counts.items():
        order = len(gram)
        totals[order] = totals.get(order, 0) + c
        vocab[order] = vocab.get(order, 0) + 1
    logprobs: dict[bytes, float] = {}
    unk: dict[int, float] = {}
    for order in range(1, MAX_ORDER + 1):
        total = totals.get(order, 0)
        # One shared unknown-gram slot keeps each order's distribution normalized.
        denom = total + ALPHA * (vocab.get(order, 0) + 1)
        unk[order] = math.log(ALPHA / denom) if denom else 0.0
        for gram, c in counts.items():
            if len(gram) == order:
                logprobs[gram] = math.log((c + ALPHA) / denom)
    return LanguageProfile(
        language=language, ngram_logprobs=logprobs, prior=prior, counts=counts, unk_logprob=unk
    )


def train_profile(corpus: Iterable[str], language: str) -> LanguageProfile:
    """Count byte n-grams over the corpus sentences and build a smoothed profile."""
    counts: dict[bytes, int] = {}
    seen = False
    for sentence in corpus:
        seen = True
        for gram in _byte_ngrams(sentence):
            counts[gram] = counts.get(gram, 0) + 1
    if not seen:
        raise DataError(f"cannot train language profile for {language!r} on an empty corpus")
    return _finalize_profile(language, counts)


def nb_posteriors(sentence: str, profiles: list[LanguageProfile]) -> dict[str, float]:
    """Softmax-normalized naive-Bayes posteriors per language."""
    if not profiles:
        raise ConfigError("classify called without language profiles")
    scores = {}
    for prof in profiles:
        score = prof.prior
        lp = prof.ngram_logprobs
        unk = prof.unk_logprob
        for gram in _byte_ngrams(sentence):
            score += lp.get(gram, unk[len(gram)])
        scores[prof.language] = score
    peak = max(scores.values())
    expd = {lang: math.exp(s - peak) for lang, s in scores.items()}
    z = sum(expd.values())
    return {lang: v / z for lang, v in expd.items()}


def classify_nb(sentence: str, profiles: list[LanguageProfile]) -> LangIdResult:
    post = nb_posteriors(sentence, profiles)
    language = max(sorted(post), key=lambda lang: post[lang])
    return LangIdResult(language, post[language])


def _document_rank_list(sentence: str, profiles: list[LanguageProfile]) -> dict[bytes, int]:
    known = set()
    for prof in profiles:
        known.update(prof.rank_list())
    counts: dict[bytes, int] = {}
    for gram in _byte_ngrams(sentence):
        if gram in known:
            counts[gram] = counts.get(gram, 0) + 1
    top = sorted(counts.items(), key=lambda kv: (-kv[1], len(kv[0]), kv[0]))[:RANK_K]
    return {gram: rank for rank, (gram, _) in enumerate(top)}


def classify_rank(sentence: str, profiles: list[LanguageProfile]) -> LangIdResult:
    """Cavnar-Trenkle style out-of-place classification."""
    if not profiles:
        raise ConfigError("classify called without language profiles")
    doc_ranks = _document_rank_list(sentence, profiles)
    if not doc_ranks:
        language = min(prof.language for prof in profiles)
        return LangIdResult(language, 1.0 / len(profiles))
    scale = len(doc_ranks)
    tolerance = RANK_K // 2
    worst_case = scale * RANK_K
    best_lang = None
    best_dist = None
    for prof in sorted(profiles, key=lambda p: p.language):
        ranks = prof.rank_list()
        dist = 0
        for gram, doc_rank in doc_ranks.items():
            prof_rank = ranks.get(gram)
            if prof_rank is None:
                dist += RANK_K
            else:
                offset = abs(doc_rank * RANK_K // scale - prof_rank)
                dist += max(0, min(RANK_K, offset) - tolerance)
        if best_dist is None or dist < best_dist:
            best_lang = prof.language
            best_dist = dist
    return LangIdResult(best_lang, 1.0 - best_dist / worst_case)


_SEED_CACHE: dict[str, LanguageProfile] = {}


def seed_profile(language: str) -> LanguageProfile:
    """Profile trained on the bundled seed corpus for ``ga`` or ``en``."""
    if language not in _SEED_CACHE:
        try:
            text = resources.files("gaprep.data").joinpath(f"seed_{language}.txt").read_text("utf-8")
        except FileNotFoundError as exc:
            raise ConfigError(f"no bundled seed corpus for language {language!r}") from exc
        lines = [line for line in text.splitlines() if line.strip()]
        _SEED_CACHE[language] = train_profile(lines, language)
    return _SEED_CACHE[language]


def default_profiles() -> list[LanguageProfile]:
    return [seed_profile("ga"), seed_profile("en")]
