"""Recursive best-split sentence boundary detection for multi-sentence segments.

Candidate split points sit after sentence-ending punctuation tokens (with
extra candidates around quotes, closing brackets, punctuation runs and
heading enumerations).  Candidates pass a battery of rejection rules; the
survivors are scored to keep the two halves balanced in character length
while honouring trigger preferences and penalising splits after decimal
numbers.  The best survivor splits the segment in two and the procedure
recurses into both halves until no candidate survives.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace

END_PUNCT = {".", "?", "!"}
OPEN_BRACKETS = {"(": ")", "[": "]", "{": "}", "<": ">"}
CLOSE_BRACKETS = {v: k for k, v in OPEN_BRACKETS.items()}
QUOTE_TOKENS = {'"', "'", "“", "”", "‘", "’", "«", "»", "``", "''"}

# Triggers, from plain sentence-ending punctuation to the preferred extras.
TRIGGER_PERIOD = "period"
TRIGGER_QUESTION = "question"
TRIGGER_EXCLAMATION = "exclamation"
TRIGGER_POST_QUOTE = "post-quote"
TRIGGER_POST_BRACKET = "post-bracket"
TRIGGER_POST_RUN = "post-run"
TRIGGER_PRE_ENUM = "pre-enumeration"

_PREFERRED = (TRIGGER_POST_QUOTE, TRIGGER_POST_BRACKET, TRIGGER_POST_RUN, TRIGGER_PRE_ENUM)

_DECIMAL_RE = re.compile(r"\d+(?:[.,]\d+)*")
_ROMAN_RE = re.compile(r"M{0,3}(CM|CD|D?C{0,3})(XC|XL|L?X{0,3})(IX|IV|V?I{0,3})")
_ENUM_INNER_RE = re.compile(r"[A-Za-z]|[ivxlcdm]+|[IVXLCDM]+")

ABBREVIATIONS = {"DR", "Prof", "nDr"}
NUMBERED_LABELS = {"No", "Vol", "Iml"}

REJECT_LEFT_NO_LETTERS = "left-no-letters-and-short"
REJECT_RIGHT_NO_LETTERS = "right-no-letters-and-short-or-ellipsis"
REJECT_RIGHT_LOWERCASE = "right-first-letter-lowercase"
REJECT_LEFT_ROMAN = "left-roman-numeral-only"
REJECT_INSIDE_BRACKETS = "inside-brackets-near-split"
REJECT_ABBREVIATION = "abbreviation"
REJECT_NUMBERED_LABEL = "numbered-label-before-decimal"


@dataclass(frozen=True, slots=True)
class SplitCandidate:
    index: int  # split position: left = tokens[:index], right = tokens[index:]
    trigger: str
    punct_index: int  # position of the ./?/! token this candidate belongs to
    preference_score: float = 0.0


@dataclass(frozen=True)
class SegmenterConfig:
    short_half_max_chars: int = 12
    bracket_window_tokens: int = 5
    # Penalty for splitting after "N ." keyed by the digit count of N;
    # digit counts beyond the largest key cost nothing.
    small_number_penalty_curve: dict[int, float] = field(
        default_factory=lambda: {1: 0.75, 2: 0.5, 3: 0.25}
    )
    trigger_preferences: dict[str, float] = field(
        default_factory=lambda: {
            TRIGGER_POST_QUOTE: 0.5,
            TRIGGER_POST_BRACKET: 0.5,
            TRIGGER_POST_RUN: 0.5,
            TRIGGER_PRE_ENUM: 0.5,
        }
    )
    # Bonus for the legal-article enumeration exception ("Airteagal 40. 3 . 2 .").
    enumeration_exception_bonus: float = 0.5

    def __post_init__(self):
        if self.short_half_max_chars <= 0 or self.bracket_window_tokens <= 0:
            raise ValueError("segmenter thresholds must be positive")

    @classmethod
    def from_dict(cls, raw: dict) -> "SegmenterConfig":
        cfg = cls()
        fields = {}
        if "short_half_max_chars" in raw:
            fields["short_half_max_chars"] = int(raw["short_half_max_chars"])
        if "bracket_window_tokens" in raw:
            fields["bracket_window_tokens"] = int(raw["bracket_window_tokens"])
        if "small_number_penalty_curve" in raw:
            fields["small_number_penalty_curve"] = {
                int(k): float(v) for k, v in raw["small_number_penalty_curve"].items()
            }
        if "trigger_preferences" in raw:
            prefs = dict(cfg.trigger_preferences)
            prefs.update({str(k): float(v) for k, v in raw["trigger_preferences"].items()})
            fields["trigger_preferences"] = prefs
        if "enumeration_exception_bonus" in raw:
            fields["enumeration_exception_bonus"] = float(raw["enumeration_exception_bonus"])
        return replace(cfg, **fields)


DEFAULT_CONFIG = SegmenterConfig()


def is_roman_numeral(token: str) -> bool:
    """Uppercase Roman numeral validated by standard composition rules."""
    if not token or set(token) - set("IVXLCDM"):
        return False
    return _ROMAN_RE.fullmatch(token) is not None


def is_decimal_number(token: str) -> bool:
    return _DECIMAL_RE.fullmatch(token) is not None


def _is_ellipsis(tokens: list[str]) -> bool:
    if not tokens:
        return False
    if all(t == "…" for t in tokens):
        return True
    return len(tokens) >= 2 and all(t == "." for t in tokens)


def _char_len(tokens: list[str]) -> int:
    # Includes the single separating spaces of the serialized form.
    if not tokens:
        return 0
    return sum(len(t) for t in tokens) + len(tokens) - 1


def _has_letters(tokens: list[str]) -> bool:
    return any(ch.isalpha() for tok in tokens for ch in tok)


def find_candidates(tokens: list[str]) -> list[SplitCandidate]:
    """All candidate split points, strictly inside the segment.

    When several heuristics propose the same index, the preferred trigger
    wins over the plain punctuation trigger.
    """
    n = len(tokens)
    by_index: dict[int, SplitCandidate] = {}

    def add(index: int, trigger: str, punct_index: int) -> None:
        if not 0 < index < n:
            return
        old = by_index.get(index)
        if old is not None and old.trigger in _PREFERRED:
            return
        if old is None or trigger in _PREFERRED:
            by_index[index] = SplitCandidate(index, trigger, punct_index)

    base_trigger = {".": TRIGGER_PERIOD, "?": TRIGGER_QUESTION, "!": TRIGGER_EXCLAMATION}
    first_fullstop = None
    for i, tok in enumerate(tokens):
        if tok not in END_PUNCT:
            continue
        if tok == "." and first_fullstop is None:
            first_fullstop = i
        add(i + 1, base_trigger[tok], i)
        nxt = i + 1
        # punctuation followed by two quote tokens: split between the quotes
        if nxt + 1 < n and tokens[nxt] in QUOTE_TOKENS and tokens[nxt + 1] in QUOTE_TOKENS:
            add(nxt + 1, TRIGGER_POST_QUOTE, i)
        # punctuation followed by a closing bracket: split after the bracket
        if nxt < n and tokens[nxt] in CLOSE_BRACKETS:
            add(nxt + 1, TRIGGER_POST_BRACKET, i)
        # ? or ! followed by more of the same: split after the run
        if tok in "?!" and nxt < n and tokens[nxt] == tok:
            end = nxt
            while end < n and tokens[end] == tok:
                end += 1
            add(end, TRIGGER_POST_RUN, i)

    # Heading enumeration: first full-stop of the segment directly after "1",
    # with tokens before the "1" and no list-style comma/semicolon before it.
    if first_fullstop is not None and first_fullstop >= 2:
        before = tokens[first_fullstop - 1]
        if before == "1" and tokens[first_fullstop - 2] not in {",", ";"}:
            add(first_fullstop - 1, TRIGGER_PRE_ENUM, first_fullstop)

    return [by_index[i] for i in sorted(by_index)]


def _skip_bracketed_enumeration(tokens: list[str], start: int) -> int:
    """Skip a leading '( a )' / '(iv)' style enumeration; returns new start index."""
    if start < len(tokens):
        tok = tokens[start]
        if len(tok) >= 3 and tok[0] == "(" and tok[-1] == ")":
            if _ENUM_INNER_RE.fullmatch(tok[1:-1]):
                return start + 1
    if start + 2 < len(tokens) and tokens[start] == "(" and tokens[start + 2] == ")":
        if _ENUM_INNER_RE.fullmatch(tokens[start + 1]):
            return start + 3
    return start


def _first_letter(tokens: list[str], start: int) -> str | None:
    for tok in tokens[start:]:
        for ch in tok:
            if ch.isalpha():
                return ch
    return None


def _bracket_rejection(tokens: list[str], index: int, window: int) -> bool:
    """True when the split sits inside brackets whose ends are near the split."""
    stack: list[tuple[str, int]] = []
    for i in range(index):
        tok = tokens[i]
        if tok in OPEN_BRACKETS:
            stack.append((tok, i))
        elif tok in CLOSE_BRACKETS and stack and stack[-1][0] == CLOSE_BRACKETS[tok]:
            stack.pop()
    if not stack:
        return False
    open_tok, open_pos = stack[-1]
    want = OPEN_BRACKETS[open_tok]
    depth = 0
    close_pos = None
    for i in range(index, len(tokens)):
        tok = tokens[i]
        if tok == open_tok:
            depth += 1
        elif tok == want:
            if depth == 0:
                close_pos = i
                break
            depth -= 1
    if close_pos is None:
        return False  # never closed: not verifiably inside brackets
    return (index - open_pos) <= window or (close_pos - index + 1) <= window


def reject(candidate: SplitCandidate, tokens: list[str], cfg: SegmenterConfig = DEFAULT_CONFIG) -> str | None:
    """Name of the first rejection rule matching the candidate, or None."""
    idx = candidate.index
    left = tokens[:idx]
    right = tokens[idx:]

    if not _has_letters(left) and _char_len(left) <= cfg.short_half_max_chars:
        return REJECT_LEFT_NO_LETTERS

    if not _has_letters(right) and (
        _char_len(right) <= cfg.short_half_max_chars or _is_ellipsis(right)
    ):
        return REJECT_RIGHT_NO_LETTERS

    first = _first_letter(right, _skip_bracketed_enumeration(right, 0))
    if first is not None and first.islower():
        return REJECT_RIGHT_LOWERCASE

    if len(left) == 2 and left[1] == "." and is_roman_numeral(left[0]):
        return REJECT_LEFT_ROMAN

    if _bracket_rejection(tokens, idx, cfg.bracket_window_tokens):
        return REJECT_INSIDE_BRACKETS

    p = candidate.punct_index
    if tokens[p] == ".":
        if p >= 1 and tokens[p - 1] in ABBREVIATIONS:
            return REJECT_ABBREVIATION
        if (
            p >= 1
            and tokens[p - 1] in NUMBERED_LABELS
            and p + 1 < len(tokens)
            and is_decimal_number(tokens[p + 1])
        ):
            return REJECT_NUMBERED_LABEL

    return None


def _enumeration_exception(tokens: list[str], candidate: SplitCandidate) -> bool:
    """Legal-article pattern: NAME token ending "." then "N . N ." split after the
    first separated full-stop (the trailing number starts the next enumeration)."""
    p = candidate.punct_index
    # pattern anchored so that tokens[p] is the first separated full-stop:
    # tokens[p-3] = "Airteagal", tokens[p-2] ends with ".", tokens[p-1] = number,
    # tokens[p] = ".", tokens[p+1] = number, tokens[p+2] = "."
    if candidate.index != p + 1 or tokens[p] != ".":
        return False
    if p < 3 or p + 2 >= len(tokens):
        return False
    return (
        tokens[p - 3] == "Airteagal"
        and len(tokens[p - 2]) > 1
        and tokens[p - 2].endswith(".")
        and is_decimal_number(tokens[p - 1])
        and is_decimal_number(tokens[p + 1])
        and tokens[p + 2] == "."
    )


def score(candidate: SplitCandidate, tokens: list[str], cfg: SegmenterConfig = DEFAULT_CONFIG) -> float:
    """Balance term + trigger preference - decimal-number penalty."""
    left_len = _char_len(tokens[: candidate.index])
    right_len = _char_len(tokens[candidate.index:])
    total = left_len + right_len
    balance = -abs(left_len - right_len) / total if total else 0.0

    preference = cfg.trigger_preferences.get(candidate.trigger, 0.0)
    penalty = 0.0
    p = candidate.punct_index
    # The decimal penalty concerns splits *after* a full-stop that follows a
    # number; the pre-enumeration candidate splits before it and is exempt.
    if tokens[p] == "." and candidate.index > p:
        if _enumeration_exception(tokens, candidate):
            preference += cfg.enumeration_exception_bonus
        elif p >= 1 and is_decimal_number(tokens[p - 1]):
            digits = sum(ch.isdigit() for ch in tokens[p - 1])
            penalty = cfg.small_number_penalty_curve.get(digits, 0.0)
    return balance + preference - penalty


def segment(tokens: list[str], cfg: SegmenterConfig = DEFAULT_CONFIG) -> list[list[str]]:
    """Recursively split a token list into sentences.

    Concatenating the result always reproduces the input exactly.  Ties in
    score break toward the lowest split index for determinism.
    """
    if not tokens:
        return []
    survivors = [c for c in find_candidates(tokens) if reject(c, tokens, cfg) is None]
    if not survivors:
        return [tokens]
    best = max(survivors, key=lambda c: (score(c, tokens, cfg), -c.index))
    return segment(tokens[: best.index], cfg) + segment(tokens[best.index:], cfg)
