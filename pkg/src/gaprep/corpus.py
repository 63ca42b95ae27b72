"""Core corpus data model: tokens, sentences, documents, manifest, stats.

The on-disk interchange format is UTF-8 plain text, one sentence per line,
tokens separated by single spaces, documents separated by one blank line.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import IO, Iterable, Iterator

from gaprep.errors import ConfigError, DataError

MANIFEST_FORMATS = ("plain", "vert", "conllu")


@dataclass(frozen=True, slots=True)
class Token:
    """One surface token plus its byte span within the source line."""

    surface: str
    span: tuple[int, int]

    def __post_init__(self):
        if not self.surface or self.surface.split() != [self.surface]:
            raise DataError(f"token surface must be non-empty and whitespace-free: {self.surface!r}")
        if self.span[0] < 0 or self.span[0] > self.span[1]:
            raise DataError(f"invalid token span {self.span}")


@dataclass(frozen=True, slots=True)
class Sentence:
    tokens: tuple[Token, ...]
    doc_id: str
    corpus_id: str

    def __post_init__(self):
        if not self.tokens:
            raise DataError("sentence must contain at least one token")
        prev_end = -1
        for tok in self.tokens:
            if tok.span[0] <= prev_end:
                raise DataError("token spans must be strictly increasing within a sentence")
            prev_end = tok.span[1]

    def surfaces(self) -> list[str]:
        return [t.surface for t in self.tokens]

    def text(self) -> str:
        return " ".join(t.surface for t in self.tokens)


@dataclass(frozen=True, slots=True)
class SourceMeta:
    corpus_name: str
    license_tag: str = ""
    origin_path: str = ""


@dataclass(frozen=True, slots=True)
class Document:
    sentences: tuple[Sentence, ...]
    source: SourceMeta

    def __post_init__(self):
        doc_ids = {s.doc_id for s in self.sentences}
        if len(doc_ids) > 1:
            raise DataError(f"document mixes sentences from multiple doc_ids: {sorted(doc_ids)}")

    @property
    def doc_id(self) -> str:
        return self.sentences[0].doc_id if self.sentences else ""


@dataclass(frozen=True, slots=True)
class CorpusStats:
    sentence_count: int = 0
    token_count: int = 0
    bytes: int = 0

    def __post_init__(self):
        if min(self.sentence_count, self.token_count, self.bytes) < 0:
            raise DataError("corpus stats must be non-negative")

    def __add__(self, other: "CorpusStats") -> "CorpusStats":
        return CorpusStats(
            self.sentence_count + other.sentence_count,
            self.token_count + other.token_count,
            self.bytes + other.bytes,
        )

    @property
    def size_mb(self) -> float:
        # Decimal megabytes: bytes / 1,000,000.
        return self.bytes / 1_000_000

    def as_dict(self) -> dict:
        return {
            "sentences": self.sentence_count,
            "tokens": self.token_count,
            "bytes": self.bytes,
            "size_mb": round(self.size_mb, 3),
        }


@dataclass(frozen=True, slots=True)
class ManifestEntry:
    name: str
    paths: tuple[str, ...]
    format: str
    license_tag: str = ""


@dataclass(frozen=True)
class Manifest:
    """Mapping corpus name -> input description, loaded from a JSON file."""

    entries: dict[str, ManifestEntry] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.entries)

    def __getitem__(self, name: str) -> ManifestEntry:
        return self.entries[name]

    def __contains__(self, name: str) -> bool:
        return name in self.entries

    def names(self) -> list[str]:
        return list(self.entries)


def load_manifest(path: str) -> Manifest:
    """Load and validate a corpus manifest.

    Schema::

        {"corpora": [
            {"name": "wikipedia", "paths": ["wiki.txt"],
             "format": "plain", "license": "CC BY-SA 3.0"},
            ...
        ]}

    ``format`` is one of ``plain`` (raw text, blank line = document break),
    ``vert`` (vertical file with structural markup) or ``conllu``.
    """
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read manifest {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"malformed manifest {path}: {exc.msg} at line {exc.lineno}, column {exc.colno}"
        ) from exc

    if not isinstance(raw, dict) or not isinstance(raw.get("corpora"), list):
        raise ConfigError(f"manifest {path} must be an object with a 'corpora' list")

    entries: dict[str, ManifestEntry] = {}
    for item in raw["corpora"]:
        if not isinstance(item, dict) or "name" not in item:
            raise ConfigError(f"manifest entry without a name: {item!r}")
        name = item["name"]
        if name in entries:
            raise ConfigError(f"duplicate corpus name in manifest: {name!r}")
        fmt = item.get("format", "plain")
        if fmt not in MANIFEST_FORMATS:
            raise ConfigError(f"corpus {name!r}: unknown format {fmt!r} (expected one of {MANIFEST_FORMATS})")
        paths = item.get("paths", [])
        if isinstance(paths, str):
            paths = [paths]
        entries[name] = ManifestEntry(
            name=name,
            paths=tuple(paths),
            format=fmt,
            license_tag=item.get("license", ""),
        )
    return Manifest(entries)


def sentence_from_surfaces(surfaces: Iterable[str], doc_id: str, corpus_id: str) -> Sentence:
    """Build a Sentence whose spans are byte offsets into the space-joined line."""
    tokens = []
    offset = 0
    for surf in surfaces:
        if tokens:
            offset += 1  # single separating space
        blen = len(surf.encode("utf-8"))
        tokens.append(Token(surf, (offset, offset + blen)))
        offset += blen
    return Sentence(tuple(tokens), doc_id=doc_id, corpus_id=corpus_id)


def line_stats(line: str) -> tuple[int, int]:
    """(token count, UTF-8 byte length incl. trailing newline) of one sentence line."""
    return len(line.split()), len(line.encode("utf-8")) + 1


def compute_stats(documents: Iterable[Document]) -> CorpusStats:
    """Aggregate sentence/token/byte counts over a document stream.

    Byte size is the size of the serialized plain-text form: each sentence
    line (tokens joined by single spaces) plus one newline byte.  Blank
    document-separator lines are not counted.
    """
    sents = toks = nbytes = 0
    for doc in documents:
        for sent in doc.sentences:
            sents += 1
            toks += len(sent.tokens)
            nbytes += len(sent.text().encode("utf-8")) + 1
    return CorpusStats(sents, toks, nbytes)


def write_plain(documents: Iterable[Document], fh: IO[str]) -> None:
    """Serialize documents as one-sentence-per-line text, blank line between docs."""
    first = True
    for doc in documents:
        if not first:
            fh.write("\n")
        first = False
        for sent in doc.sentences:
            fh.write(sent.text())
            fh.write("\n")


def read_plain(fh: IO[str], corpus_id: str, doc_prefix: str = "doc") -> Iterator[Document]:
    """Read the plain interchange format back into Document objects.

    Lines are split on whitespace; blank lines separate documents.
    """
    meta = SourceMeta(corpus_name=corpus_id)
    sentences: list[Sentence] = []
    doc_idx = 0
    for line in fh:
        line = line.rstrip("\n")
        if not line.strip():
            if sentences:
                yield Document(tuple(sentences), meta)
                doc_idx += 1
                sentences = []
            continue
        doc_id = f"{doc_prefix}{doc_idx}"
        sentences.append(sentence_from_surfaces(line.split(), doc_id=doc_id, corpus_id=corpus_id))
    if sentences:
        yield Document(tuple(sentences), meta)
