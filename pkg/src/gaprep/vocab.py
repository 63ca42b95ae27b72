"""Subword vocabulary induction: WordPiece, unigram-LM, conversion, union.

The WordPiece trainer grows a character alphabet by likelihood-ratio pair
merging (score = freq(ab) / (freq(a) * freq(b))).  The unigram trainer runs
EM over a substring lattice and prunes the lowest-contribution pieces until
the target size is reached.  Both are deterministic: ties break on sorted
order and no randomness is involved.

Vocabulary files are BERT-compatible: one entry per line, UTF-8, the line
number is the id, with [PAD] [UNK] [CLS] [SEP] [MASK] first.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import IO, Iterable

from gaprep.errors import ConfigError, DataError

SPECIALS = ("[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]")
UNK = "[UNK]"
CONTINUATION = "##"
WORD_MARKER = "▁"  # SentencePiece-style word-initial marker

MIN_CHAR_FREQ = 2  # rarer characters fall back to [UNK]


@dataclass
class Vocabulary:
    entries: list[str]
    continuation_prefix: str = CONTINUATION
    _index: dict[str, int] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if tuple(self.entries[: len(SPECIALS)]) != SPECIALS:
            raise DataError(f"vocabulary must start with the special tokens {SPECIALS}")
        self._index = {}
        for i, entry in enumerate(self.entries):
            if entry in self._index:
                raise DataError(f"duplicate vocabulary entry: {entry!r}")
            self._index[entry] = i

    @classmethod
    def from_pieces(cls, pieces: Iterable[str], continuation_prefix: str = CONTINUATION) -> "Vocabulary":
        entries = list(SPECIALS)
        seen = set(entries)
        for piece in pieces:
            if piece not in seen:
                entries.append(piece)
                seen.add(piece)
        return cls(entries, continuation_prefix)

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, piece: str) -> bool:
        return piece in self._index

    def id_of(self, piece: str) -> int:
        return self._index[piece]

    def save(self, fh: IO[str]) -> None:
        for entry in self.entries:
            fh.write(entry + "\n")

    @classmethod
    def load(cls, fh: IO[str]) -> "Vocabulary":
        entries = [line.rstrip("\n") for line in fh if line.rstrip("\n")]
        return cls(entries)


@dataclass
class UnigramModel:
    """Subword pieces with log probabilities; marker pieces are word-initial."""

    pieces: dict[str, float]

    def __post_init__(self):
        total = sum(math.exp(lp) for lp in self.pieces.values())
        if abs(total - 1.0) > 1e-6:
            raise DataError(f"unigram piece probabilities must sum to 1, got {total}")


def _word_frequencies(corpus: Iterable[str]) -> Counter:
    freq: Counter = Counter()
    for sentence in corpus:
        freq.update(sentence.split())
    return freq


def train_wordpiece(corpus: Iterable[str], size: int) -> Vocabulary:
    """Pair-merge WordPiece training down from a character alphabet."""
    word_freq = _word_frequencies(corpus)
    if not word_freq:
        raise DataError("cannot train a vocabulary on an empty corpus")

    char_freq: Counter = Counter()
    for word, freq in word_freq.items():
        for ch in word:
            char_freq[ch] += freq
    alphabet = {ch for ch, freq in char_freq.items() if freq >= MIN_CHAR_FREQ}

    pieces = sorted(alphabet) + sorted(CONTINUATION + ch for ch in alphabet)
    base = len(SPECIALS) + len(pieces)
    if size < base:
        raise ConfigError(f"vocabulary size {size} is below alphabet+specials minimum {base}")

    # Word encodings over the current pieces; words with out-of-alphabet
    # characters are unrepresentable and tokenize to [UNK] later.
    encodings: list[tuple[list[str], int]] = []
    for word in sorted(word_freq):
        if all(ch in alphabet for ch in word):
            enc = [word[0]] + [CONTINUATION + ch for ch in word[1:]]
            encodings.append((enc, word_freq[word]))

    piece_counts: Counter = Counter()
    pair_counts: Counter = Counter()
    pair_words: dict[tuple[str, str], set[int]] = {}
    for wi, (enc, freq) in enumerate(encodings):
        for piece in enc:
            piece_counts[piece] += freq
        for pair in zip(enc, enc[1:]):
            pair_counts[pair] += freq
            pair_words.setdefault(pair, set()).add(wi)

    entries = set(pieces)
    order: list[str] = list(pieces)

    while len(SPECIALS) + len(order) < size and pair_counts:
        best_pair = None
        best_score = None
        for pair, pfreq in pair_counts.items():
            if pfreq <= 0:
                continue
            score = pfreq / (piece_counts[pair[0]] * piece_counts[pair[1]])
            if best_score is None or score > best_score or (score == best_score and pair < best_pair):
                best_pair = pair
                best_score = score
        if best_pair is None:
            break
        a, b = best_pair
        merged = a + b[len(CONTINUATION):]

        for wi in sorted(pair_words.get(best_pair, ())):
            enc, freq = encodings[wi]
            for piece in enc:
                piece_counts[piece] -= freq
            for pair in zip(enc, enc[1:]):
                pair_counts[pair] -= freq
                if pair_counts[pair] <= 0:
                    del pair_counts[pair]
                words = pair_words.get(pair)
                if words is not None:
                    words.discard(wi)
                    if not words:
                        del pair_words[pair]
            new_enc: list[str] = []
            i = 0
            while i < len(enc):
                if i + 1 < len(enc) and enc[i] == a and enc[i + 1] == b:
                    new_enc.append(merged)
                    i += 2
                else:
                    new_enc.append(enc[i])
                    i += 1
            encodings[wi] = (new_enc, freq)
            for piece in new_enc:
                piece_counts[piece] += freq
            for pair in zip(new_enc, new_enc[1:]):
                pair_counts[pair] += freq
                pair_words.setdefault(pair, set()).add(wi)

        if merged not in entries:
            entries.add(merged)
            order.append(merged)

    return Vocabulary.from_pieces(order)


def _logsumexp(values: list[float]) -> float:
    peak = max(values)
    if peak == float("-inf"):
        return peak
    return peak + math.log(sum(math.exp(v - peak) for v in values))


def _em_round(
    words: list[tuple[str, int]], logprobs: dict[str, float], max_len: int
) -> dict[str, float]:
    """One E-step: expected piece counts over all segmentations of all words."""
    expected: dict[str, float] = {}
    for word, freq in words:
        n = len(word)
        alpha = [float("-inf")] * (n + 1)
        alpha[0] = 0.0
        for j in range(1, n + 1):
            vals = []
            for i in range(max(0, j - max_len), j):
                lp = logprobs.get(word[i:j])
                if lp is not None and alpha[i] != float("-inf"):
                    vals.append(alpha[i] + lp)
            if vals:
                alpha[j] = _logsumexp(vals)
        if alpha[n] == float("-inf"):
            continue
        beta = [float("-inf")] * (n + 1)
        beta[n] = 0.0
        for i in range(n - 1, -1, -1):
            vals = []
            for j in range(i + 1, min(n, i + max_len) + 1):
                lp = logprobs.get(word[i:j])
                if lp is not None and beta[j] != float("-inf"):
                    vals.append(lp + beta[j])
            if vals:
                beta[i] = _logsumexp(vals)
        for i in range(n):
            for j in range(i + 1, min(n, i + max_len) + 1):
                lp = logprobs.get(word[i:j])
                if lp is None or alpha[i] == float("-inf") or beta[j] == float("-inf"):
                    continue
                gamma = math.exp(alpha[i] + lp + beta[j] - alpha[n])
                piece = word[i:j]
                expected[piece] = expected.get(piece, 0.0) + freq * gamma
    return expected


def _normalize(counts: dict[str, float]) -> dict[str, float]:
    log_total = math.log(sum(counts.values()))
    return {p: math.log(c) - log_total for p, c in counts.items() if c > 0}


def train_unigram(
    corpus: Iterable[str],
    size: int,
    seed_factor: int = 10,
    max_piece_len: int = 16,
    keep_ratio: float = 0.75,
    em_iterations: int = 2,
) -> UnigramModel:
    """EM-trained unigram LM over a pruned substring inventory.

    Words carry the word-initial marker, so pieces starting with it are
    word-initial.  Pruning drops the pieces with the lowest expected usage,
    keeping ``keep_ratio`` per round; single characters are never pruned so
    every trainable word stays representable.
    """
    word_freq = _word_frequencies(corpus)
    if not word_freq:
        raise DataError("cannot train a vocabulary on an empty corpus")
    marked = Counter()
    for word, freq in word_freq.items():
        marked[WORD_MARKER + word] += freq
    words = sorted(marked.items())

    substring_freq: Counter = Counter()
    singles: set[str] = set()
    for word, freq in words:
        n = len(word)
        for i in range(n):
            singles.add(word[i])
            for j in range(i + 1, min(n, i + max_piece_len) + 1):
                substring_freq[word[i:j]] += freq

    if size < len(SPECIALS) + len(singles):
        raise ConfigError(f"vocabulary size {size} is below alphabet+specials minimum")

    budget = max(seed_factor * size, len(singles))
    ranked = sorted(substring_freq.items(), key=lambda kv: (-kv[1], len(kv[0]), kv[0]))
    inventory = sorted({piece for piece, _ in ranked[:budget]} | singles)

    # Initialize probabilities proportional to raw substring frequency.
    # (Iteration stays sorted so float summation order is reproducible.)
    logprobs = _normalize({p: float(substring_freq[p]) for p in inventory})

    target = size - len(SPECIALS)
    while True:
        expected: dict[str, float] = {}
        for _ in range(em_iterations):
            expected = _em_round(words, logprobs, max_piece_len)
            logprobs = _normalize(expected)
        if len(logprobs) <= target:
            break
        keep = max(target, int(len(logprobs) * keep_ratio))
        ranked_pieces = sorted(
            logprobs, key=lambda p: (-expected.get(p, 0.0), len(p), p)
        )
        protected = singles & set(logprobs)
        chosen = sorted(set(ranked_pieces[:keep]) | protected)
        if len(chosen) >= len(logprobs):
            # Nothing pruned (all survivors are protected): keep the best
            # `target` non-single pieces and stop.
            non_single = [p for p in ranked_pieces if p not in singles]
            chosen = sorted(set(non_single[: max(0, target - len(protected))]) | protected)
            logprobs = _normalize({p: expected[p] for p in chosen if expected.get(p, 0) > 0})
            break
        logprobs = _normalize({p: expected[p] for p in chosen if expected.get(p, 0) > 0})

    ordered = sorted(logprobs.items(), key=lambda kv: (-kv[1], kv[0]))
    return UnigramModel(dict(ordered))


def viterbi_segment(word: str, model: UnigramModel, max_piece_len: int = 16) -> list[str]:
    """Most probable segmentation; ties prefer the longer trailing piece."""
    n = len(word)
    best = [float("-inf")] * (n + 1)
    back: list[tuple[int, str] | None] = [None] * (n + 1)
    best[0] = 0.0
    for j in range(1, n + 1):
        for i in range(max(0, j - max_piece_len), j):
            lp = model.pieces.get(word[i:j])
            if lp is None or best[i] == float("-inf"):
                continue
            cand = best[i] + lp
            if cand > best[j] or (cand == best[j] and back[j] is not None and i < back[j][0]):
                best[j] = cand
                back[j] = (i, word[i:j])
    if back[n] is None:
        return [UNK]
    pieces: list[str] = []
    j = n
    while j > 0:
        i, piece = back[j]
        pieces.append(piece)
        j = i
    return pieces[::-1]


def convert_sp_to_wp(model: UnigramModel) -> Vocabulary:
    """Map marker-style unigram pieces onto WordPiece conventions.

    Marker-initial pieces lose the marker and stay word-initial; all other
    pieces gain the continuation prefix.  Duplicates after mapping collapse,
    first (most probable) wins; a bare marker piece maps to nothing.
    """
    mapped: list[str] = []
    for piece in model.pieces:
        if piece.startswith(WORD_MARKER):
            out = piece[len(WORD_MARKER):]
        else:
            out = CONTINUATION + piece
        if out and out != CONTINUATION:
            mapped.append(out)
    return Vocabulary.from_pieces(mapped)


def union_vocab(a: Vocabulary, b: Vocabulary) -> Vocabulary:
    """Set union preserving a's order, then b's novel entries."""
    if a.continuation_prefix != b.continuation_prefix:
        raise ConfigError(
            "cannot union vocabularies with different continuation conventions: "
            f"{a.continuation_prefix!r} vs {b.continuation_prefix!r}"
        )
    seen = set(a.entries)
    entries = list(a.entries)
    for entry in b.entries:
        if entry not in seen:
            entries.append(entry)
            seen.add(entry)
    return Vocabulary(entries, a.continuation_prefix)


def wp_tokenize(word: str, vocab: Vocabulary) -> list[str]:
    """Greedy longest-prefix-match WordPiece tokenization of one word."""
    if not word:
        return []
    pieces: list[str] = []
    start = 0
    n = len(word)
    while start < n:
        end = n
        found = None
        while end > start:
            sub = word[start:end]
            if start > 0:
                sub = vocab.continuation_prefix + sub
            if sub in vocab:
                found = sub
                break
            end -= 1
        if found is None:
            return [UNK]
        pieces.append(found)
        start = end
    return pieces
