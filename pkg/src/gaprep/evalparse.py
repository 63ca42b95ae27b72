"""CoNLL-U reading and dependency evaluation (UPOS, XPOS, FEATS, UAS, LAS).

Scoring follows the official shared-task evaluator's semantics: the
concatenated characters of gold and system tokens must match, words align
by identical character spans (longest common subsequence of lowercased
forms inside multiword-token spans), FEATS keep only universal features,
and deprel subtypes are ignored.  Scores are percentages.
"""

from __future__ import annotations

import statistics
import unicodedata
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from gaprep.errors import DataError

ID, FORM, LEMMA, UPOS, XPOS, FEATS, HEAD, DEPREL, DEPS, MISC = range(10)

UNIVERSAL_FEATURES = {
    "PronType", "NumType", "Poss", "Reflex", "Foreign", "Abbr", "Gender",
    "Animacy", "Number", "Case", "Definite", "Degree", "VerbForm", "Mood",
    "Tense", "Aspect", "Voice", "Evident", "Polarity", "Person", "Polite",
}


@dataclass(eq=False)
class ConlluWord:
    id: int
    form: str
    lemma: str
    upos: str
    xpos: str
    feats: str
    head: int
    deprel: str
    span: tuple[int, int] = (0, 0)  # char offsets into the file's token stream
    is_multiword: bool = False
    mwt_form: str = ""  # surface of the whole range, set on its first word only
    parent: "ConlluWord | None" = field(default=None, repr=False)

    @property
    def eval_feats(self) -> str:
        return "|".join(
            sorted(f for f in self.feats.split("|") if f.split("=", 1)[0] in UNIVERSAL_FEATURES)
        )

    @property
    def eval_deprel(self) -> str:
        return self.deprel.split(":", 1)[0]


def _strip_spaces(form: str) -> str:
    return "".join(ch for ch in form if unicodedata.category(ch) != "Zs")


def _validate_tree(words: list[ConlluWord], line_no: int) -> None:
    n = len(words)
    roots = 0
    for w in words:
        if not 0 <= w.head <= n:
            raise DataError(f"HEAD {w.head} outside sentence of {n} words", line=line_no)
        if w.head == 0:
            roots += 1
    if roots != 1:
        raise DataError(f"sentence must have exactly one root, found {roots}", line=line_no)
    for w in words:
        w.parent = None if w.head == 0 else words[w.head - 1]
    for w in words:
        seen = set()
        node = w
        while node is not None:
            if id(node) in seen:
                raise DataError("cycle in dependency tree", line=line_no)
            seen.add(id(node))
            node = node.parent


def read_conllu(path: str) -> list[list[ConlluWord]]:
    """Parse a CoNLL-U file into sentences of words.

    Comments are skipped, multiword-token lines contribute the surface
    characters (their word rows share the range's span), and empty nodes
    (decimal ids) are ignored.
    """
    sentences: list[list[ConlluWord]] = []
    current: list[ConlluWord] = []
    char_index = 0
    mwt_until = 0
    mwt_span: tuple[int, int] = (0, 0)
    mwt_form = ""
    sent_start_line = 1

    try:
        fh = open(path, encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read CoNLL-U file {path}: {exc}") from exc

    with fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if line.startswith("#"):
                continue
            if not line:
                if current:
                    _validate_tree(current, sent_start_line)
                    sentences.append(current)
                    current = []
                mwt_until = 0  # ranges never span sentences
                continue
            if not current:
                sent_start_line = line_no
            cols = line.split("\t")
            if len(cols) != 10:
                raise DataError(
                    f"expected 10 tab-separated columns, found {len(cols)}", line=line_no
                )
            word_id = cols[ID]
            if "." in word_id:
                continue  # empty node
            form = _strip_spaces(cols[FORM])
            if "-" in word_id:
                first, _, last = word_id.partition("-")
                try:
                    mwt_from, mwt_to = int(first), int(last)
                except ValueError as exc:
                    raise DataError(f"cannot parse token id {word_id!r}", line=line_no) from exc
                mwt_until = mwt_to
                mwt_span = (char_index, char_index + len(form))
                mwt_form = form
                char_index += len(form)
                continue
            try:
                idx = int(word_id)
            except ValueError as exc:
                raise DataError(f"cannot parse word id {word_id!r}", line=line_no) from exc
            try:
                head = int(cols[HEAD])
            except ValueError as exc:
                raise DataError(f"cannot parse HEAD {cols[HEAD]!r}", line=line_no) from exc
            in_mwt = idx <= mwt_until
            if in_mwt:
                span = mwt_span
                surface = mwt_form
                mwt_form = ""  # only the range's first word carries the surface
            else:
                span = (char_index, char_index + len(form))
                surface = ""
                char_index += len(form)
            current.append(
                ConlluWord(
                    id=idx,
                    form=form,
                    lemma=cols[LEMMA],
                    upos=cols[UPOS],
                    xpos=cols[XPOS],
                    feats=cols[FEATS],
                    head=head,
                    deprel=cols[DEPREL],
                    span=span,
                    is_multiword=in_mwt,
                    mwt_form=surface,
                )
            )
        if current:
            _validate_tree(current, sent_start_line)
            sentences.append(current)
    return sentences


@dataclass(frozen=True)
class MetricScore:
    precision: float
    recall: float
    f1: float


@dataclass(frozen=True)
class EvalScores:
    upos: MetricScore
    xpos: MetricScore
    feats: MetricScore
    uas: MetricScore
    las: MetricScore

    def as_dict(self) -> dict:
        return {
            name: {
                "precision": round(metric.precision, 2),
                "recall": round(metric.recall, 2),
                "f1": round(metric.f1, 2),
            }
            for name, metric in (
                ("upos", self.upos), ("xpos", self.xpos), ("feats", self.feats),
                ("uas", self.uas), ("las", self.las),
            )
        }


def _char_stream(sentences: list[list[ConlluWord]]) -> str:
    """Concatenated surface characters, counting each multiword range once."""
    parts: list[str] = []
    for sent in sentences:
        for w in sent:
            if w.is_multiword:
                parts.append(w.mwt_form)  # non-empty on the range's first word only
            else:
                parts.append(w.form)
    return "".join(parts)


def _lcs_align(gold: list[ConlluWord], system: list[ConlluWord]) -> list[tuple[ConlluWord, ConlluWord]]:
    g_keys = [w.form.lower() for w in gold]
    s_keys = [w.form.lower() for w in system]
    rows = len(g_keys)
    cols = len(s_keys)
    table = [[0] * (cols + 1) for _ in range(rows + 1)]
    for i in range(rows - 1, -1, -1):
        for j in range(cols - 1, -1, -1):
            if g_keys[i] == s_keys[j]:
                table[i][j] = table[i + 1][j + 1] + 1
            else:
                table[i][j] = max(table[i + 1][j], table[i][j + 1])
    matches = []
    i = j = 0
    while i < rows and j < cols:
        if g_keys[i] == s_keys[j]:
            matches.append((gold[i], system[j]))
            i += 1
            j += 1
        elif table[i + 1][j] >= table[i][j + 1]:
            i += 1
        else:
            j += 1
    return matches


def _multiword_spans(gold_words: list[ConlluWord], system_words: list[ConlluWord]) -> list[tuple[int, int]]:
    spans = sorted(w.span for w in gold_words + system_words if w.is_multiword)
    merged: list[tuple[int, int]] = []
    for span in spans:
        if merged and span[0] < merged[-1][1]:
            if span[1] > merged[-1][1]:
                merged[-1] = (merged[-1][0], span[1])
        else:
            merged.append(span)
    return merged


def _align_words(
    gold_words: list[ConlluWord], system_words: list[ConlluWord]
) -> list[tuple[ConlluWord, ConlluWord]]:
    alignment: list[tuple[ConlluWord, ConlluWord]] = []
    spans = _multiword_spans(gold_words, system_words)
    gi = si = 0

    def plain_align(limit: int | None) -> None:
        nonlocal gi, si
        while gi < len(gold_words) and si < len(system_words):
            g, s = gold_words[gi], system_words[si]
            if limit is not None and g.span[0] >= limit and s.span[0] >= limit:
                return
            if g.span == s.span and not g.is_multiword and not s.is_multiword:
                alignment.append((g, s))
                gi += 1
                si += 1
            elif g.span[0] <= s.span[0]:
                gi += 1
            else:
                si += 1

    for span_start, span_end in spans:
        plain_align(span_start)
        g_block = []
        while gi < len(gold_words) and gold_words[gi].span[1] <= span_end:
            g_block.append(gold_words[gi])
            gi += 1
        s_block = []
        while si < len(system_words) and system_words[si].span[1] <= span_end:
            s_block.append(system_words[si])
            si += 1
        alignment.extend(_lcs_align(g_block, s_block))
    plain_align(None)
    return alignment


def evaluate(gold: list[list[ConlluWord]], system: list[list[ConlluWord]]) -> EvalScores:
    """Score system against gold with official alignment semantics."""
    gold_words = [w for sent in gold for w in sent]
    system_words = [w for sent in system for w in sent]
    if not gold_words or not system_words:
        raise DataError("evaluation requires non-empty gold and system files")

    gold_chars = _char_stream(gold)
    system_chars = _char_stream(system)
    if gold_chars != system_chars:
        if len(gold_chars) != len(system_chars):
            detail = f"{len(gold_chars)} vs {len(system_chars)} characters"
        else:
            i = next(i for i, (g, s) in enumerate(zip(gold_chars, system_chars)) if g != s)
            detail = f"first difference at character {i}: {gold_chars[i]!r} vs {system_chars[i]!r}"
        raise DataError("concatenated gold and system tokens differ: " + detail)

    matched = _align_words(gold_words, system_words)
    aligned_gold = {id(s): g for g, s in matched}

    def head_key(word: ConlluWord, system_side: bool):
        parent = word.parent
        if parent is None:
            return None
        if not system_side:
            return id(parent)
        gold_parent = aligned_gold.get(id(parent))
        return id(gold_parent) if gold_parent is not None else "unaligned"

    def score(correct: int) -> MetricScore:
        g_total, s_total = len(gold_words), len(system_words)
        precision = correct / s_total if s_total else 0.0
        recall = correct / g_total if g_total else 0.0
        f1 = 2 * correct / (g_total + s_total) if g_total + s_total else 0.0
        return MetricScore(100 * precision, 100 * recall, 100 * f1)

    counts = {"upos": 0, "xpos": 0, "feats": 0, "uas": 0, "las": 0}
    for g, s in matched:
        if g.upos == s.upos:
            counts["upos"] += 1
        if g.xpos == s.xpos:
            counts["xpos"] += 1
        if g.eval_feats == s.eval_feats:
            counts["feats"] += 1
        heads_match = head_key(g, False) == head_key(s, True)
        if heads_match:
            counts["uas"] += 1
            if g.eval_deprel == s.eval_deprel:
                counts["las"] += 1

    return EvalScores(
        upos=score(counts["upos"]),
        xpos=score(counts["xpos"]),
        feats=score(counts["feats"]),
        uas=score(counts["uas"]),
        las=score(counts["las"]),
    )


def median_report(scores: Sequence[EvalScores]) -> dict:
    """Per-metric medians over several runs (e.g. five fine-tuning seeds)."""
    if not scores:
        raise DataError("median report needs at least one score set")
    out = {}
    for name in ("upos", "xpos", "feats", "uas", "las"):
        metrics = [getattr(s, name) for s in scores]
        out[name] = {
            "precision": statistics.median(m.precision for m in metrics),
            "recall": statistics.median(m.recall for m in metrics),
            "f1": statistics.median(m.f1 for m in metrics),
        }
    return out


def render_table(scores: EvalScores) -> str:
    """Aligned text table in the model-results layout (metric columns, F1 values)."""
    names = ("UPOS", "XPOS", "FEATS", "UAS", "LAS")
    values = [scores.upos.f1, scores.xpos.f1, scores.feats.f1, scores.uas.f1, scores.las.f1]
    header = " | ".join(f"{n:>6}" for n in names)
    row = " | ".join(f"{v:6.1f}" for v in values)
    return header + "\n" + row
