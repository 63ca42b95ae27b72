import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gaprep.errors import ConfigError
from gaprep.tokenizer import (
    DEFAULT_RULES,
    TokenizerRuleSet,
    detokenize,
    pretokenized_surfaces,
    tokenize,
    tokenize_surfaces,
)


class TestBasics:
    def test_simple_sentence(self):
        assert tokenize_surfaces("Tá sé fuar.") == ["Tá", "sé", "fuar", "."]

    def test_apostrophe_contraction_stays(self):
        assert tokenize_surfaces("d'ith sé") == ["d'ith", "sé"]

    def test_mutation_prefix_stays(self):
        assert tokenize_surfaces("na n-éan") == ["na", "n-éan"]

    def test_empty_line(self):
        assert tokenize_surfaces("") == []

    def test_punct_detached(self):
        assert tokenize_surfaces('Dúirt sí: "slán" (agus [imigh]).') == [
            "Dúirt", "sí", ":", '"', "slán", '"', "(", "agus", "[", "imigh", "]", ")", "."
        ]

    def test_decimal_number_single_token(self):
        assert tokenize_surfaces("Tá 3.14 agus 1,000.5 ann.") == [
            "Tá", "3.14", "agus", "1,000.5", "ann", "."
        ]

    def test_trailing_period_after_number_detaches(self):
        assert tokenize_surfaces("Bliain 2021.") == ["Bliain", "2021", "."]

    def test_url_single_token(self):
        assert tokenize_surfaces("Féach https://example.ie/ga anois") == [
            "Féach", "https://example.ie/ga", "anois"
        ]

    def test_url_trailing_punct_detaches(self):
        assert tokenize_surfaces("Féach www.example.ie.") == ["Féach", "www.example.ie", "."]

    def test_abbreviation_protected(self):
        assert tokenize_surfaces("úlla, oráistí, m.sh. torthaí") == [
            "úlla", ",", "oráistí", ",", "m.sh.", "torthaí"
        ]


class TestSpans:
    def test_byte_spans(self):
        toks = tokenize("Tá sé")
        assert [(t.surface, t.span) for t in toks] == [("Tá", (0, 3)), ("sé", (4, 7))]

    def test_spans_reconstruct_chunks(self):
        line = "Bhí (ceist)."
        data = line.encode("utf-8")
        for tok in tokenize(line):
            assert data[tok.span[0]:tok.span[1]].decode("utf-8") == tok.surface

    def test_spans_with_multibyte_and_extra_spaces(self):
        line = "  Tá   sé\t fuar. "
        data = line.encode("utf-8")
        for tok in tokenize(line):
            assert data[tok.span[0]:tok.span[1]].decode("utf-8") == tok.surface


class TestDetokenize:
    def test_join(self):
        assert detokenize(["a", "b"]) == "a b"

    def test_empty(self):
        assert detokenize([]) == ""

    def test_accepts_tokens(self):
        assert detokenize(tokenize("Tá sé")) == "Tá sé"


class TestRuleSet:
    def test_prefix_validation(self):
        with pytest.raises(ConfigError):
            TokenizerRuleSet(apostrophe_prefixes=frozenset({"dx"}))

    def test_custom_punctuation(self):
        rules = TokenizerRuleSet(punctuation=".")
        assert tokenize_surfaces("a,b.", rules) == ["a,b", "."]


class TestPretokenized:
    def test_passthrough(self):
        assert pretokenized_surfaces("go leor  ama") == ["go", "leor", "ama"]


WORD_CHARS = st.sampled_from("aábcdeéfghiílmnoóprstuú'-")
TOKEN_TEXT = st.text(alphabet=st.sampled_from("aábcdeéfg .,!?;:\"()[]{}0123456789"), max_size=60)


class TestProperties:
    @given(TOKEN_TEXT)
    @settings(max_examples=300, deadline=None)
    def test_no_characters_lost(self, line):
        tokens = tokenize_surfaces(line)
        assert "".join(tokens) == "".join(line.split())
        assert all(tok == tok.strip() and tok for tok in tokens)

    @given(TOKEN_TEXT)
    @settings(max_examples=200, deadline=None)
    def test_idempotent_on_tokenized_text(self, line):
        once = tokenize_surfaces(line)
        again = tokenize_surfaces(detokenize(once))
        assert again == once

    @given(TOKEN_TEXT)
    @settings(max_examples=100, deadline=None)
    def test_detokenize_fixpoint(self, line):
        tokens = tokenize_surfaces(line)
        assert detokenize(tokenize_surfaces(detokenize(tokens))) == detokenize(tokens)
