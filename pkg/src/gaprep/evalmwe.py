"""PARSEME ``.cupt`` ingestion, gappy BIO tagging, and span-level P/R/F1.

The MWE column annotates each token with span memberships: ``*`` (or ``_``)
for none, ``1:VID`` for the first mention of span 1 with its category, and
plain ``1`` for subsequent members; ``;`` separates multiple memberships.

The BIO scheme uses B-cat/I-cat for contiguous spans; a member that directly
follows a gap takes lowercase ``i-cat``, and a span that starts inside
another span's gap takes lowercase ``b-cat`` (its later members lowercase
``i-cat``).  BIO cannot encode token-level overlaps, so a span sharing a
token with an earlier-starting span is dropped and counted as a warning.
"""

from __future__ import annotations

import statistics
from dataclasses import dataclass, field
from typing import IO, Sequence

from gaprep.errors import DataError


@dataclass(frozen=True)
class MweAnnotation:
    mwe_id: int
    category: str
    member_token_ids: tuple[int, ...]  # 1-based, ordered, possibly gappy

    def __post_init__(self):
        if self.mwe_id <= 0:
            raise DataError(f"MWE id must be positive, got {self.mwe_id}")
        if not self.member_token_ids:
            raise DataError("MWE span must have at least one member token")

    @property
    def key(self) -> tuple[str, tuple[int, ...]]:
        return (self.category, tuple(sorted(self.member_token_ids)))


@dataclass
class CuptSentence:
    forms: list[str]
    annotations: list[MweAnnotation] = field(default_factory=list)


def _parse_mwe_column(value: str) -> list[tuple[int, str | None]]:
    """[(span id, category or None), ...] for one token's MWE column."""
    value = value.strip()
    if value in ("*", "_", ""):
        return []
    memberships = []
    for part in value.split(";"):
        if ":" in part:
            num, _, cat = part.partition(":")
            if not cat:
                raise DataError(f"empty MWE category in {value!r}")
        else:
            num, cat = part, None
        try:
            span_id = int(num)
        except ValueError as exc:
            raise DataError(f"bad MWE span id in {value!r}") from exc
        memberships.append((span_id, cat))
    return memberships


def read_cupt(path: str) -> list[CuptSentence]:
    """Parse a CoNLL-U-plus file whose final column carries MWE annotations."""
    try:
        fh = open(path, encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read cupt file {path}: {exc}") from exc

    sentences: list[CuptSentence] = []
    forms: list[str] = []
    spans: dict[int, dict] = {}
    with fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if line.startswith("#"):
                continue
            if not line:
                if forms:
                    sentences.append(_finish_sentence(forms, spans, line_no))
                    forms, spans = [], {}
                continue
            cols = line.split("\t")
            if len(cols) < 2:
                raise DataError("cupt token line needs at least ID, FORM and the MWE column", line=line_no)
            token_id = cols[0]
            if "-" in token_id or "." in token_id:
                continue  # ranges and empty nodes carry no MWE membership
            try:
                idx = int(token_id)
            except ValueError as exc:
                raise DataError(f"cannot parse token id {token_id!r}", line=line_no) from exc
            forms.append(cols[1])
            try:
                memberships = _parse_mwe_column(cols[-1])
            except DataError as exc:
                raise DataError(str(exc), line=line_no) from None
            for span_id, cat in memberships:
                entry = spans.setdefault(span_id, {"category": None, "members": []})
                entry["members"].append(idx)
                if cat is not None:
                    if entry["category"] is not None:
                        raise DataError(
                            f"span {span_id} declares its category twice", line=line_no
                        )
                    entry["category"] = cat
        if forms:
            sentences.append(_finish_sentence(forms, spans, 0))
    return sentences


def _finish_sentence(forms: list[str], spans: dict[int, dict], line_no: int) -> CuptSentence:
    annotations = []
    for span_id in sorted(spans):
        entry = spans[span_id]
        if entry["category"] is None:
            raise DataError(f"span {span_id} has members but no category", line=line_no or None)
        annotations.append(
            MweAnnotation(span_id, entry["category"], tuple(entry["members"]))
        )
    return CuptSentence(list(forms), annotations)


def to_bio(sentence: CuptSentence) -> tuple[list[str], int]:
    """(tags, dropped span count) for one sentence.

    Spans are placed earliest-start-first; any span whose members collide
    with an already placed span is dropped (BIO cannot encode overlap).
    """
    n = len(sentence.forms)
    tags = ["O"] * n
    claimed: set[int] = set()
    dropped = 0
    placed: list[MweAnnotation] = []

    for ann in sorted(sentence.annotations, key=lambda a: (min(a.member_token_ids), a.mwe_id)):
        members = sorted(ann.member_token_ids)
        if any(m < 1 or m > n for m in members):
            raise DataError(f"span {ann.mwe_id} references token outside sentence of {n}")
        if any(m in claimed for m in members):
            dropped += 1
            continue
        # lowercase when this span starts inside an earlier span's gap
        inside_gap = any(
            min(p.member_token_ids) < members[0] < max(p.member_token_ids) for p in placed
        )
        b_tag = ("b-" if inside_gap else "B-") + ann.category
        tags[members[0] - 1] = b_tag
        prev = members[0]
        for m in members[1:]:
            if m == prev + 1 and not inside_gap:
                tags[m - 1] = "I-" + ann.category
            else:
                tags[m - 1] = "i-" + ann.category
            prev = m
        claimed.update(members)
        placed.append(ann)
    return tags, dropped


def from_bio(tags: Sequence[str]) -> list[MweAnnotation]:
    """Reconstruct spans from tags; inverse of `to_bio` for non-overlapping input."""
    outer: dict | None = None
    inner: dict | None = None
    finished: list[dict] = []

    def close(span: dict | None) -> None:
        if span is not None:
            finished.append(span)

    for pos, tag in enumerate(tags, start=1):
        if tag == "O":
            continue
        if len(tag) < 3 or tag[1] != "-":
            raise DataError(f"malformed BIO tag {tag!r}")
        kind, category = tag[0], tag[2:]
        if kind == "B":
            close(outer)
            close(inner)
            inner = None
            outer = {"category": category, "members": [pos]}
        elif kind == "b":
            close(inner)
            inner = {"category": category, "members": [pos]}
        elif kind == "I":
            if outer is None or outer["category"] != category:
                raise DataError(f"I-{category} tag without an open span at token {pos}")
            outer["members"].append(pos)
        elif kind == "i":
            if inner is not None and inner["category"] == category and inner["members"][-1] == pos - 1:
                inner["members"].append(pos)
            elif outer is not None and outer["category"] == category:
                outer["members"].append(pos)
            elif inner is not None and inner["category"] == category:
                inner["members"].append(pos)
            else:
                raise DataError(f"i-{category} tag without an open span at token {pos}")
        else:
            raise DataError(f"malformed BIO tag {tag!r}")
    close(outer)
    close(inner)
    finished.sort(key=lambda s: s["members"][0])
    return [
        MweAnnotation(i + 1, span["category"], tuple(span["members"]))
        for i, span in enumerate(finished)
    ]


def f1_score(precision: float, recall: float) -> float:
    if precision + recall == 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


def score_spans(
    gold: Sequence[Sequence[MweAnnotation]], pred: Sequence[Sequence[MweAnnotation]]
) -> tuple[float, float, float]:
    """Exact-match span scoring: P, R, F1 over (member set, category) identity."""
    if len(gold) != len(pred):
        raise DataError(f"{len(gold)} gold sentences but {len(pred)} predicted")
    n_gold = n_pred = correct = 0
    for gold_anns, pred_anns in zip(gold, pred):
        gold_keys = {a.key for a in gold_anns}
        pred_keys = {a.key for a in pred_anns}
        n_gold += len(gold_keys)
        n_pred += len(pred_keys)
        correct += len(gold_keys & pred_keys)
    precision = correct / n_pred if n_pred else 0.0
    recall = correct / n_gold if n_gold else 0.0
    return precision, recall, f1_score(precision, recall)


def seed_sweep_report(per_seed_scores: Sequence[tuple[float, float, float]]) -> dict:
    """Min/median/max of P, R, F1 over a sweep of runs (box-plot friendly)."""
    if not per_seed_scores:
        raise DataError("seed sweep report needs at least one run")
    out = {}
    for i, name in enumerate(("precision", "recall", "f1")):
        values = [s[i] for s in per_seed_scores]
        out[name] = {
            "min": min(values),
            "median": statistics.median(values),
            "max": max(values),
        }
    return out
