import io
import json
import math
import random
from pathlib import Path

import pytest

from gaprep.errors import ConfigError, DataError
from gaprep.vocab import (
    SPECIALS,
    UNK,
    UnigramModel,
    Vocabulary,
    WORD_MARKER,
    convert_sp_to_wp,
    train_unigram,
    train_wordpiece,
    union_vocab,
    viterbi_segment,
    wp_tokenize,
)

FIXTURES = Path(__file__).parent / "fixtures"


def fixture_lines():
    return [l for l in (FIXTURES / "mini_prepared.txt").read_text("utf-8").splitlines() if l.strip()]


class TestVocabulary:
    def test_specials_lead(self):
        v = Vocabulary.from_pieces(["abc"])
        assert tuple(v.entries[:5]) == SPECIALS
        assert v.id_of("[PAD]") == 0

    def test_duplicate_rejected(self):
        with pytest.raises(DataError):
            Vocabulary(list(SPECIALS) + ["a", "a"])

    def test_save_load_round_trip(self):
        v = Vocabulary.from_pieces(["tá", "##á", "sé"])
        buf = io.StringIO()
        v.save(buf)
        buf.seek(0)
        assert Vocabulary.load(buf).entries == v.entries


class TestTrainWordpiece:
    def test_single_merge_trace(self):
        # alphabet {a, ##a}; one merge produces "aa"
        v = train_wordpiece(["aa aa aa"], size=len(SPECIALS) + 2 + 1)
        assert v.entries[len(SPECIALS):] == ["a", "##a", "aa"]

    def test_character_vocabulary_at_minimum_size(self):
        v = train_wordpiece(["ab ab"], size=len(SPECIALS) + 4)
        assert v.entries[len(SPECIALS):] == ["a", "b", "##a", "##b"]

    def test_size_too_small(self):
        with pytest.raises(ConfigError):
            train_wordpiece(["abcd abcd"], size=len(SPECIALS) + 1)

    def test_golden_fixture_vocab(self):
        golden = json.loads((FIXTURES / "goldens.json").read_text())["wordpiece_200_entries"]
        v = train_wordpiece(fixture_lines(), 200)
        assert v.entries == golden

    def test_deterministic(self):
        a = train_wordpiece(fixture_lines(), 150)
        b = train_wordpiece(fixture_lines(), 150)
        assert a.entries == b.entries

    def test_singleton_characters_fall_to_unk(self):
        # "Ω" occurs once: below the frequency-2 alphabet cutoff
        v = train_wordpiece(["abc abc Ωabc"], size=60)
        assert "Ω" not in v.entries
        assert wp_tokenize("Ωabc", v) == [UNK]


class TestTrainUnigram:
    def test_abab_prefers_joint_piece(self):
        model = train_unigram(["abab abab abab ab"], size=40)
        assert model.pieces["ab"] > model.pieces["a"] + model.pieces["b"]

    def test_probabilities_sum_to_one(self):
        model = train_unigram(fixture_lines(), 120)
        assert abs(sum(math.exp(lp) for lp in model.pieces.values()) - 1.0) < 1e-6

    def test_viterbi_golden(self):
        golden = json.loads((FIXTURES / "goldens.json").read_text())["unigram_200_viterbi_heldout"]
        model = train_unigram(fixture_lines(), 200)
        pieces = [viterbi_segment(WORD_MARKER + w, model) for w in golden["line"].split()]
        assert pieces == golden["pieces"]

    def test_target_size_respected(self):
        model = train_unigram(fixture_lines(), 120)
        assert len(model.pieces) <= 120 - len(SPECIALS)

    def test_empty_corpus(self):
        with pytest.raises(DataError):
            train_unigram([], 100)


class TestConvert:
    def test_marker_mapping(self):
        model = UnigramModel({WORD_MARKER + "foo": math.log(0.6), "bar": math.log(0.4)})
        v = convert_sp_to_wp(model)
        assert v.entries[len(SPECIALS):] == ["foo", "##bar"]

    def test_marker_distinction_preserved(self):
        model = UnigramModel({WORD_MARKER + "a": math.log(0.5), "a": math.log(0.5)})
        v = convert_sp_to_wp(model)
        assert v.entries[len(SPECIALS):] == ["a", "##a"]

    def test_bare_marker_skipped(self):
        model = UnigramModel({WORD_MARKER: math.log(0.5), "x": math.log(0.5)})
        v = convert_sp_to_wp(model)
        assert v.entries[len(SPECIALS):] == ["##x"]

    def test_duplicates_collapse_first_wins(self):
        model = UnigramModel(
            {WORD_MARKER + "a": math.log(0.4), "a": math.log(0.35), WORD_MARKER + "##a": math.log(0.25)}
        )
        v = convert_sp_to_wp(model)
        assert v.entries.count("##a") == 1

    def test_fixture_agreement_at_least_99_percent(self):
        model = train_unigram(fixture_lines(), 200)
        converted = convert_sp_to_wp(model)
        words = sorted({w for line in fixture_lines() for w in line.split()})
        agree = total = 0
        for word in words:
            sp = viterbi_segment(WORD_MARKER + word, model)
            if UNK in sp:
                continue
            mapped = [p[len(WORD_MARKER):] if p.startswith(WORD_MARKER) else "##" + p for p in sp]
            mapped = [p for p in mapped if p and p != "##"]
            total += 1
            agree += mapped == wp_tokenize(word, converted)
        assert total > 0
        assert agree / total >= 0.99


class TestUnion:
    def test_membership(self):
        a = Vocabulary.from_pieces(["x", "y"])
        b = Vocabulary.from_pieces(["y", "z"])
        u = union_vocab(a, b)
        assert u.entries[len(SPECIALS):] == ["x", "y", "z"]

    def test_idempotent(self):
        a = Vocabulary.from_pieces(["x", "y"])
        assert union_vocab(a, a).entries == a.entries

    def test_commutative_as_set(self):
        a = Vocabulary.from_pieces(["x", "y"])
        b = Vocabulary.from_pieces(["z", "y"])
        assert set(union_vocab(a, b).entries) == set(union_vocab(b, a).entries)

    def test_size_bound(self):
        rng = random.Random(31)
        pool = [f"p{i}" for i in range(40)] + [f"##p{i}" for i in range(40)]
        for _ in range(100):
            a = Vocabulary.from_pieces(sorted(rng.sample(pool, rng.randrange(1, 30))))
            b = Vocabulary.from_pieces(sorted(rng.sample(pool, rng.randrange(1, 30))))
            u = union_vocab(a, b)
            assert len(u) <= len(a) + len(b)
            assert set(u.entries) == set(a.entries) | set(b.entries)

    def test_incompatible_continuation(self):
        a = Vocabulary.from_pieces(["x"])
        b = Vocabulary(list(SPECIALS) + ["y"], continuation_prefix="@@")
        with pytest.raises(ConfigError):
            union_vocab(a, b)


class TestWpTokenize:
    def test_greedy_longest_match(self):
        v = Vocabulary.from_pieces(["foo", "##bar"])
        assert wp_tokenize("foobar", v) == ["foo", "##bar"]

    def test_whole_word(self):
        v = Vocabulary.from_pieces(["focal"])
        assert wp_tokenize("focal", v) == ["focal"]

    def test_unknown_char(self):
        v = Vocabulary.from_pieces(["f", "##o"])
        assert wp_tokenize("fox", v) == [UNK]

    def test_reconstruction_property(self):
        v = train_wordpiece(fixture_lines(), 200)
        for line in fixture_lines():
            for word in line.split():
                pieces = wp_tokenize(word, v)
                if UNK in pieces:
                    continue
                rebuilt = pieces[0] + "".join(p[2:] for p in pieces[1:])
                assert rebuilt == word
