"""Cloze-test harness: original-token accuracy, length bins, manual judgments.

Items mask one Irish pronoun (é / í / iad, possibly a subword form) in a
4-77 token string.  Judgments are human classifications into the exclusive
categories match / mismatch / copy / gibberish; they are inputs, never
computed here.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass
from typing import IO, Iterable, Sequence

from gaprep.errors import DataError

PRONOUNS = ("é", "í", "iad")
ALLOWED_ORIGINALS = frozenset(PRONOUNS) | frozenset("##" + p for p in PRONOUNS)
CATEGORIES = ("match", "mismatch", "copy", "gibberish")

MIN_TOKENS, MAX_TOKENS = 4, 77
BINS = (("short", 4, 10), ("medium", 11, 20), ("long", 21, 77))


@dataclass(frozen=True)
class ClozeItem:
    text: tuple[str, ...]
    masked_index: int
    original: str

    def __post_init__(self):
        n = len(self.text)
        if not MIN_TOKENS <= n <= MAX_TOKENS:
            raise DataError(f"cloze item must have {MIN_TOKENS}-{MAX_TOKENS} tokens, got {n}")
        if not 0 <= self.masked_index < n:
            raise DataError(f"masked index {self.masked_index} outside item of {n} tokens")
        if self.original not in ALLOWED_ORIGINALS:
            raise DataError(f"original token {self.original!r} is not an allowed pronoun form")


@dataclass(frozen=True)
class ClozeJudgment:
    category: str

    def __post_init__(self):
        if self.category not in CATEGORIES:
            raise DataError(f"unknown judgment category {self.category!r}")


def read_items(fh: IO[str]) -> list[ClozeItem]:
    items = []
    for line_no, line in enumerate(fh, start=1):
        if not line.strip():
            continue
        try:
            raw = json.loads(line)
        except json.JSONDecodeError as exc:
            raise DataError(f"bad JSONL item: {exc.msg}", line=line_no) from exc
        items.append(
            ClozeItem(tuple(raw["text"]), int(raw["masked_index"]), raw["original"])
        )
    return items


def read_predictions(fh: IO[str]) -> list[str]:
    preds = []
    for line_no, line in enumerate(fh, start=1):
        if not line.strip():
            continue
        try:
            raw = json.loads(line)
        except json.JSONDecodeError as exc:
            raise DataError(f"bad JSONL prediction: {exc.msg}", line=line_no) from exc
        preds.append(raw["prediction"] if isinstance(raw, dict) else str(raw))
    return preds


def read_judgments(fh: IO[str]) -> list[ClozeJudgment]:
    out = []
    for line_no, line in enumerate(fh, start=1):
        if not line.strip():
            continue
        try:
            raw = json.loads(line)
        except json.JSONDecodeError as exc:
            raise DataError(f"bad JSONL judgment: {exc.msg}", line=line_no) from exc
        out.append(ClozeJudgment(raw["category"] if isinstance(raw, dict) else str(raw)))
    return out


def score_original(items: Sequence[ClozeItem], predictions: Sequence[str]) -> int:
    """How many predictions equal the original masked token exactly."""
    if len(items) != len(predictions):
        raise DataError(f"{len(items)} items but {len(predictions)} predictions")
    return sum(1 for item, pred in zip(items, predictions) if pred == item.original)


def bin_of(item: ClozeItem) -> str:
    n = len(item.text)
    for name, lo, hi in BINS:
        if lo <= n <= hi:
            return name
    raise DataError(f"item of {n} tokens falls outside all bins")


def bin_by_length(items: Iterable[ClozeItem]) -> dict[str, list[ClozeItem]]:
    """Partition items into short (4-10), medium (11-20), long (21-77) bins."""
    out: dict[str, list[ClozeItem]] = {name: [] for name, _, _ in BINS}
    for item in items:
        out[bin_of(item)].append(item)
    return out


def binned_accuracy(items: Sequence[ClozeItem], judgments: Sequence[ClozeJudgment]) -> dict[str, float]:
    """Percentage of ``match`` judgments per length bin, rounded to 2 decimals."""
    if len(items) != len(judgments):
        raise DataError(f"{len(items)} items but {len(judgments)} judgments")
    totals: Counter = Counter()
    matches: Counter = Counter()
    for item, judgment in zip(items, judgments):
        name = bin_of(item)
        totals[name] += 1
        if judgment.category == "match":
            matches[name] += 1
    return {
        name: round(100 * matches[name] / totals[name], 2) if totals[name] else 0.0
        for name, _, _ in BINS
    }


def tally_judgments(judgments: Iterable[ClozeJudgment]) -> dict[str, int]:
    counts = Counter(j.category for j in judgments)
    return {category: counts.get(category, 0) for category in CATEGORIES}


def baseline_predict(items: Sequence[ClozeItem], corpus_frequencies: dict[str, int]) -> list[str]:
    """Constant baseline: the corpus-most-frequent allowed pronoun for every item.

    Ties break toward the earlier entry of the pronoun list.
    """
    best = max(PRONOUNS, key=lambda p: (corpus_frequencies.get(p, 0), -PRONOUNS.index(p)))
    return [best] * len(items)


def report(
    items: Sequence[ClozeItem],
    predictions: Sequence[str],
    judgments: Sequence[ClozeJudgment] | None = None,
) -> dict:
    """JSON report: original-token count, judgment tallies, binned accuracy."""
    out: dict = {
        "items": len(items),
        "original_token_predictions": score_original(items, predictions),
    }
    if judgments is not None:
        out["judgments"] = tally_judgments(judgments)
        out["accuracy_by_length"] = binned_accuracy(items, judgments)
    return out
