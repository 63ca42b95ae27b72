"""Masked-LM + next-sentence-prediction pretraining instances.

Follows the classic BERT data pipeline: sentence pairs packed up to the
sequence length, 50% random-next pairs, whole-word masking (continuation
pieces masked together with their word), 80/10/10 mask/random/keep split.
All randomness comes from the portable PCG32 generator, so the same seed
yields byte-identical shards everywhere.  One deliberate difference from
the reference pipeline: a masking probability of 0 produces zero masked
positions instead of a floor of one.

Binary shard format (little-endian), one length-prefixed record per
instance::

    u16 n_tokens | n_tokens * u32 token_ids | n_tokens * u8 segment_ids
    u16 n_masked | n_masked * u32 positions | n_masked * u32 label_ids
    u8 is_random_next
"""

from __future__ import annotations

import hashlib
import json
import struct
from dataclasses import dataclass, field, replace
from typing import IO, Iterable, Iterator

from gaprep.errors import ConfigError, DataError
from gaprep.rng import Pcg32
from gaprep.vocab import CONTINUATION, SPECIALS, Vocabulary, wp_tokenize

CLS, SEP, MASK = "[CLS]", "[SEP]", "[MASK]"


@dataclass(frozen=True)
class GenConfig:
    seed: int = 12345
    max_seq_len: int = 128
    mask_prob: float = 0.15
    max_predictions: int | None = None  # default: 20 at 128, 80 at 512
    dupe_factor: int = 10
    short_seq_prob: float = 0.1

    def __post_init__(self):
        if not 0.0 <= self.mask_prob <= 1.0 or not 0.0 <= self.short_seq_prob <= 1.0:
            raise ConfigError("probabilities must lie in [0, 1]")
        if self.max_seq_len < 8:
            raise ConfigError("max_seq_len too small")
        if self.dupe_factor < 1:
            raise ConfigError("dupe_factor must be >= 1")

    @property
    def predictions_cap(self) -> int:
        if self.max_predictions is not None:
            return self.max_predictions
        return 80 if self.max_seq_len >= 512 else 20

    @classmethod
    def from_dict(cls, raw: dict) -> "GenConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"unknown pretraining config keys: {sorted(unknown)}")
        return cls(**raw)


@dataclass(frozen=True)
class PretrainInstance:
    token_ids: tuple[int, ...]
    segment_ids: tuple[int, ...]
    masked_positions: tuple[int, ...]
    masked_labels: tuple[int, ...]
    is_random_next: bool

    def __post_init__(self):
        if len(self.token_ids) != len(self.segment_ids):
            raise DataError("token/segment id length mismatch")
        if len(self.masked_positions) != len(self.masked_labels):
            raise DataError("masked positions/labels length mismatch")
        if any(b <= a for a, b in zip(self.masked_positions, self.masked_positions[1:])):
            raise DataError("masked positions must be strictly increasing")


def _subword_document(doc_sentences: Iterable[list[str]], vocab: Vocabulary, cache: dict) -> list[list[str]]:
    out = []
    for sentence in doc_sentences:
        pieces: list[str] = []
        for word in sentence:
            got = cache.get(word)
            if got is None:
                got = wp_tokenize(word, vocab)
                cache[word] = got
            pieces.extend(got)
        if pieces:
            out.append(pieces)
    return out


def _truncate_pair(tokens_a: list[str], tokens_b: list[str], max_num_tokens: int, rng: Pcg32) -> None:
    while len(tokens_a) + len(tokens_b) > max_num_tokens:
        trunc = tokens_a if len(tokens_a) > len(tokens_b) else tokens_b
        if rng.random() < 0.5:
            del trunc[0]
        else:
            trunc.pop()


def _mask_tokens(
    tokens: list[str], cfg: GenConfig, vocab: Vocabulary, rng: Pcg32
) -> tuple[list[str], list[int], list[str]]:
    """Whole-word masking: continuation pieces join their word's group."""
    cand_groups: list[list[int]] = []
    for i, token in enumerate(tokens):
        if token in (CLS, SEP):
            continue
        if cand_groups and token.startswith(CONTINUATION):
            cand_groups[-1].append(i)
        else:
            cand_groups.append([i])
    rng.shuffle(cand_groups)

    num_to_predict = min(cfg.predictions_cap, int(round(len(tokens) * cfg.mask_prob)))
    out = list(tokens)
    picked: list[int] = []
    covered: set[int] = set()
    for group in cand_groups:
        if len(picked) >= num_to_predict:
            break
        if len(picked) + len(group) > num_to_predict:
            continue
        if any(i in covered for i in group):
            continue
        for i in group:
            covered.add(i)
            if rng.random() < 0.8:
                out[i] = MASK
            elif rng.random() < 0.5:
                pass  # keep the original token
            else:
                out[i] = vocab.entries[rng.randbelow(len(vocab.entries))]
            picked.append(i)
    picked.sort()
    return out, picked, [tokens[i] for i in picked]


def _instances_from_document(
    all_docs: list[list[list[str]]],
    doc_index: int,
    cfg: GenConfig,
    vocab: Vocabulary,
    rng: Pcg32,
) -> Iterator[PretrainInstance]:
    document = all_docs[doc_index]
    max_num_tokens = cfg.max_seq_len - 3
    target_seq_length = max_num_tokens
    if rng.random() < cfg.short_seq_prob:
        target_seq_length = rng.randint(2, max_num_tokens)

    current_chunk: list[list[str]] = []
    current_length = 0
    i = 0
    while i < len(document):
        segment = document[i]
        current_chunk.append(segment)
        current_length += len(segment)
        if i == len(document) - 1 or current_length >= target_seq_length:
            if current_chunk:
                a_end = 1
                if len(current_chunk) >= 2:
                    a_end = rng.randint(1, len(current_chunk) - 1)
                tokens_a: list[str] = []
                for seg in current_chunk[:a_end]:
                    tokens_a.extend(seg)

                tokens_b: list[str] = []
                if len(current_chunk) == 1 or rng.random() < 0.5:
                    is_random_next = True
                    target_b_length = target_seq_length - len(tokens_a)
                    random_doc_index = doc_index
                    for _ in range(10):
                        random_doc_index = rng.randint(0, len(all_docs) - 1)
                        if random_doc_index != doc_index:
                            break
                    random_doc = all_docs[random_doc_index]
                    random_start = rng.randint(0, len(random_doc) - 1)
                    for j in range(random_start, len(random_doc)):
                        tokens_b.extend(random_doc[j])
                        if len(tokens_b) >= target_b_length:
                            break
                    # unused tail sentences go back into the stream
                    i -= len(current_chunk) - a_end
                else:
                    is_random_next = False
                    for seg in current_chunk[a_end:]:
                        tokens_b.extend(seg)

                _truncate_pair(tokens_a, tokens_b, max_num_tokens, rng)
                if tokens_a and tokens_b:
                    tokens = [CLS] + tokens_a + [SEP] + tokens_b + [SEP]
                    segment_ids = [0] * (len(tokens_a) + 2) + [1] * (len(tokens_b) + 1)
                    masked, positions, labels = _mask_tokens(tokens, cfg, vocab, rng)
                    unk = vocab.id_of("[UNK]")
                    yield PretrainInstance(
                        token_ids=tuple(vocab.id_of(t) if t in vocab else unk for t in masked),
                        segment_ids=tuple(segment_ids),
                        masked_positions=tuple(positions),
                        masked_labels=tuple(vocab.id_of(t) if t in vocab else unk for t in labels),
                        is_random_next=is_random_next,
                    )
            current_chunk = []
            current_length = 0
        i += 1


def build_instances(
    documents: Iterable[Iterable[list[str]]],
    vocab: Vocabulary,
    cfg: GenConfig,
    shard_index: int = 0,
) -> list[PretrainInstance]:
    """Generate instances for one shard of tokenized documents.

    ``documents`` is a stream of documents, each a list of tokenized
    sentences (lists of word surfaces).  The RNG is seeded with
    ``cfg.seed + shard_index`` so shards can be produced independently.
    """
    for special in SPECIALS:
        if special not in vocab:
            raise ConfigError(f"vocabulary is missing special token {special}")
    cache: dict[str, list[str]] = {}
    all_docs = []
    for doc in documents:
        subword_doc = _subword_document(doc, vocab, cache)
        if subword_doc:
            all_docs.append(subword_doc)
    if not all_docs:
        return []

    rng = Pcg32(cfg.seed + shard_index)
    instances: list[PretrainInstance] = []
    for _ in range(cfg.dupe_factor):
        for doc_index in range(len(all_docs)):
            instances.extend(_instances_from_document(all_docs, doc_index, cfg, vocab, rng))
    rng.shuffle(instances)
    return instances


def write_shard(instances: Iterable[PretrainInstance], fh: IO[bytes]) -> int:
    count = 0
    for inst in instances:
        n = len(inst.token_ids)
        m = len(inst.masked_positions)
        fh.write(struct.pack("<H", n))
        fh.write(struct.pack(f"<{n}I", *inst.token_ids))
        fh.write(struct.pack(f"<{n}B", *inst.segment_ids))
        fh.write(struct.pack("<H", m))
        if m:
            fh.write(struct.pack(f"<{m}I", *inst.masked_positions))
            fh.write(struct.pack(f"<{m}I", *inst.masked_labels))
        fh.write(struct.pack("<B", 1 if inst.is_random_next else 0))
        count += 1
    return count


def read_shard(fh: IO[bytes]) -> Iterator[PretrainInstance]:
    def take(fmt: str) -> tuple:
        size = struct.calcsize(fmt)
        blob = fh.read(size)
        if len(blob) != size:
            raise DataError("truncated pretraining shard")
        return struct.unpack(fmt, blob)

    while True:
        head = fh.read(2)
        if not head:
            return
        if len(head) != 2:
            raise DataError("truncated pretraining shard")
        (n,) = struct.unpack("<H", head)
        token_ids = take(f"<{n}I")
        segment_ids = take(f"<{n}B")
        (m,) = take("<H")
        positions = take(f"<{m}I") if m else ()
        labels = take(f"<{m}I") if m else ()
        (rand_next,) = take("<B")
        yield PretrainInstance(token_ids, segment_ids, positions, labels, bool(rand_next))


def instance_digest(inst: PretrainInstance) -> str:
    payload = json.dumps(
        {
            "token_ids": list(inst.token_ids),
            "segment_ids": list(inst.segment_ids),
            "masked_positions": list(inst.masked_positions),
            "masked_labels": list(inst.masked_labels),
            "is_random_next": inst.is_random_next,
        },
        sort_keys=True,
    ).encode("utf-8")
    return hashlib.sha256(payload).hexdigest()


def instance_to_json(inst: PretrainInstance) -> str:
    return json.dumps(
        {
            "token_ids": list(inst.token_ids),
            "segment_ids": list(inst.segment_ids),
            "masked_positions": list(inst.masked_positions),
            "masked_labels": list(inst.masked_labels),
            "is_random_next": inst.is_random_next,
        },
        sort_keys=True,
    )


def config_with_seed(cfg: GenConfig, seed: int) -> GenConfig:
    return replace(cfg, seed=seed)
