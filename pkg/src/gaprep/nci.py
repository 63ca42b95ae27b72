"""Entity normalization and reading for NCI-style ``.vert`` vertical files.

A ``.vert`` file carries one token per line (tab-separated attributes, the
token itself in column 1) with SGML-style structural markup (``<doc>``,
``<p>``, ``<s>`` ...).  Tokens inside ``<s>``...``</s>`` form one segment.
Legacy exports tokenize HTML entities into separate tokens; `normalize_entities`
rewrites them back to characters, re-running all passes until the token
stream no longer changes.
"""

from __future__ import annotations

from typing import Iterator

from gaprep.errors import DataError

# Named entities split over three tokens: "&", name, ";".
NAMED_ENTITIES = {
    "quot": '"',
    "lt": "<",
    "gt": ">",
    "amp": "&",
}

# Numeric entities split over three tokens: "&", "#N", ";".  The code points
# follow Windows-1252 (147/148 are the curly quotes; the rest coincide with
# Latin-1).
NUMERIC_ENTITIES = {
    "38": "&",
    "60": "<",
    "147": "“",
    "148": "”",
    "205": "Í",  # Í
    "218": "Ú",  # Ú
    "225": "á",  # á
    "233": "é",  # é
    "237": "í",  # í
    "243": "ó",  # ó
    "250": "ú",  # ú
}


def _one_pass(tokens: list[str]) -> list[str]:
    """Single left-to-right, non-overlapping rewrite pass."""
    out: list[str] = []
    i = 0
    n = len(tokens)
    while i < n:
        tok = tokens[i]
        if tok == "&quot;":
            out.append('"')
            i += 1
            continue
        if tok == "&" and i + 2 < n and tokens[i + 2] == ";":
            middle = tokens[i + 1]
            if middle in NAMED_ENTITIES:
                out.append(NAMED_ENTITIES[middle])
                i += 3
                continue
            if middle.startswith("#") and middle[1:] in NUMERIC_ENTITIES:
                out.append(NUMERIC_ENTITIES[middle[1:]])
                i += 3
                continue
        out.append(tok)
        i += 1
    return out


def normalize_entities(tokens: list[str]) -> list[str]:
    """Rewrite tokenized HTML entities, repeating until a full pass changes nothing.

    Unknown entities (including unknown numeric codes) pass through unchanged,
    as do ``\\x\\x13`` artifacts and any token that is not part of an entity
    pattern.
    """
    current = list(tokens)
    # Each productive pass shrinks the stream or rewrites an "&quot;" token
    # (which can never re-trigger), so this terminates.
    for _ in range(len(tokens) + 2):
        nxt = _one_pass(current)
        if nxt == current:
            return nxt
        current = nxt
    return current


class VertReader:
    """Segment iterator over a ``.vert`` file.

    Markup lines (starting with ``<``) are consumed as boundaries.  ``<s>``
    opens a segment and ``</s>`` closes it; any other markup also closes an
    open segment.  A token line whose first column contains internal
    whitespace yields multiple tokens.  Token lines with an empty first
    column are skipped and counted in `skipped_empty`.
    """

    def __init__(self, path: str):
        self.path = path
        self.skipped_empty = 0

    def segments(self) -> Iterator[list[str]]:
        for _, segment in self.documents_flat():
            yield segment

    def documents_flat(self) -> Iterator[tuple[int, list[str]]]:
        """Yield (document index, segment tokens). ``<doc>`` markup bumps the index."""
        try:
            fh = open(self.path, encoding="utf-8")
        except OSError as exc:
            raise DataError(f"cannot read vert file {self.path}: {exc}") from exc
        with fh:
            doc_idx = 0
            seen_doc = False
            current: list[str] = []
            for line in fh:
                line = line.rstrip("\n")
                if line.startswith("<"):
                    if current:
                        yield doc_idx, current
                        current = []
                    tag = line[1:].split(None, 1)[0].rstrip(">") if len(line) > 1 else ""
                    if tag == "doc":
                        if seen_doc:
                            doc_idx += 1
                        seen_doc = True
                    continue
                first_col = line.split("\t", 1)[0]
                if not first_col.strip():
                    if line.strip():  # a token line, but with empty column 1
                        self.skipped_empty += 1
                    continue
                # All whitespace counts as a token separator ("go leor" -> 2 tokens).
                current.extend(first_col.split())
            if current:
                yield doc_idx, current


def read_vert(path: str) -> Iterator[list[str]]:
    """Yield segments (token lists) from a ``.vert`` file in document order."""
    return VertReader(path).segments()
