import io
import json
from pathlib import Path

import pytest

from gaprep.corpus import (
    CorpusStats,
    Document,
    Sentence,
    SourceMeta,
    Token,
    compute_stats,
    line_stats,
    load_manifest,
    read_plain,
    sentence_from_surfaces,
    write_plain,
)
from gaprep.errors import ConfigError, DataError

FIXTURES = Path(__file__).parent / "fixtures"


def make_doc(sentences, corpus="test", doc_id="d0"):
    sents = tuple(sentence_from_surfaces(s, doc_id=doc_id, corpus_id=corpus) for s in sentences)
    return Document(sents, SourceMeta(corpus_name=corpus))


class TestTokenInvariants:
    def test_valid(self):
        tok = Token("Tá", (0, 3))
        assert tok.surface == "Tá"

    def test_rejects_whitespace(self):
        with pytest.raises(DataError):
            Token("go leor", (0, 7))

    def test_rejects_empty(self):
        with pytest.raises(DataError):
            Token("", (0, 0))

    def test_rejects_bad_span(self):
        with pytest.raises(DataError):
            Token("a", (3, 1))


class TestSentenceInvariants:
    def test_non_empty(self):
        with pytest.raises(DataError):
            Sentence((), doc_id="d", corpus_id="c")

    def test_spans_strictly_increasing(self):
        toks = (Token("a", (0, 1)), Token("b", (0, 1)))
        with pytest.raises(DataError):
            Sentence(toks, doc_id="d", corpus_id="c")

    def test_document_doc_id_consistency(self):
        s1 = sentence_from_surfaces(["a"], doc_id="d1", corpus_id="c")
        s2 = sentence_from_surfaces(["b"], doc_id="d2", corpus_id="c")
        with pytest.raises(DataError):
            Document((s1, s2), SourceMeta(corpus_name="c"))


class TestManifest:
    def test_minimal(self, tmp_path):
        path = tmp_path / "m.json"
        path.write_text(json.dumps({"corpora": [{"name": "wikipedia", "format": "plain"}]}))
        manifest = load_manifest(str(path))
        assert len(manifest) == 1
        assert manifest["wikipedia"].format == "plain"

    def test_six_paper_corpora(self, tmp_path):
        names = ["conll17", "imt", "nci", "oscar", "paracrawl", "wikipedia"]
        path = tmp_path / "m.json"
        path.write_text(json.dumps({"corpora": [{"name": n, "format": "plain"} for n in names]}))
        manifest = load_manifest(str(path))
        assert len(manifest) == 6
        assert manifest.names() == names

    def test_duplicate_name_rejected(self, tmp_path):
        path = tmp_path / "m.json"
        path.write_text(json.dumps({"corpora": [{"name": "nci"}, {"name": "nci"}]}))
        with pytest.raises(ConfigError, match="duplicate"):
            load_manifest(str(path))

    def test_malformed_json_reports_location(self, tmp_path):
        path = tmp_path / "m.json"
        path.write_text('{"corpora": [}')
        with pytest.raises(ConfigError, match=r"line \d+, column \d+"):
            load_manifest(str(path))

    def test_unknown_format_rejected(self, tmp_path):
        path = tmp_path / "m.json"
        path.write_text(json.dumps({"corpora": [{"name": "x", "format": "tfrecord"}]}))
        with pytest.raises(ConfigError):
            load_manifest(str(path))


class TestComputeStats:
    def test_empty_stream(self):
        assert compute_stats([]) == CorpusStats(0, 0, 0)

    def test_hand_counted(self):
        doc = make_doc([["a", "bb", "c"], ["dd", "e", "ff", "g"]])
        stats = compute_stats([doc])
        assert stats.sentence_count == 2
        assert stats.token_count == 7
        # "a bb c\n" = 7 bytes, "dd e ff g\n" = 10 bytes
        assert stats.bytes == 17

    def test_additivity(self):
        doc_a = make_doc([["x", "y"]], doc_id="a")
        doc_b = make_doc([["zz"], ["w", "w", "w"]], doc_id="b")
        combined = compute_stats([doc_a, doc_b])
        assert combined == compute_stats([doc_a]) + compute_stats([doc_b])

    def test_golden_mini_corpus(self):
        golden = json.loads((FIXTURES / "goldens.json").read_text())["mini_prepared_stats"]
        with open(FIXTURES / "mini_prepared.txt", encoding="utf-8") as fh:
            docs = list(read_plain(fh, corpus_id="mini"))
        stats = compute_stats(docs)
        assert stats.sentence_count == golden["sentences"]
        assert stats.token_count == golden["tokens"]
        assert stats.bytes == golden["bytes"]

    def test_size_mb_decimal(self):
        assert CorpusStats(1, 1, 2_500_000).size_mb == 2.5

    def test_token_count_at_least_sentences(self):
        with open(FIXTURES / "mini_prepared.txt", encoding="utf-8") as fh:
            stats = compute_stats(read_plain(fh, corpus_id="mini"))
        assert stats.token_count >= stats.sentence_count > 0


class TestRoundTrip:
    def test_write_read_identity(self):
        docs = [
            make_doc([["Tá", "sé", "fuar", "."], ["Ceart", "go", "leor", "."]], doc_id="d0"),
            make_doc([["Slán", "!"]], doc_id="d1"),
        ]
        buf = io.StringIO()
        write_plain(docs, buf)
        buf.seek(0)
        back = list(read_plain(buf, corpus_id="test"))
        assert [[s.surfaces() for s in d.sentences] for d in back] == [
            [s.surfaces() for s in d.sentences] for d in docs
        ]

    def test_line_stats_helper(self):
        assert line_stats("Tá sé") == (2, 8)  # á and é are 2 UTF-8 bytes each, +1 newline
