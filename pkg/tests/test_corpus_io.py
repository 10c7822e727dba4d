import random
from fractions import Fraction

import pytest

from sluaug.core import Corpus, LabeledExample, Utterance
from sluaug.corpus_io import (
    FormatError,
    InsufficientData,
    SplitSpec,
    corpus_stats,
    emit_corpus,
    load_corpus,
    parse_corpus,
    round_half_up,
    sample_split,
    save_corpus,
)

THREE_BLOCKS = """\
# intent = BookRestaurant
book\tO
a\tO
bistro\tB-restaurant_type

# act = GetWeather ( city = oslo )

what
a
day
"""


class TestLoad:
    def test_three_block_file(self):
        corpus = parse_corpus(THREE_BLOCKS)
        assert len(corpus.paired) == 1
        assert len(corpus.acts_only) == 1
        assert len(corpus.utterances_only) == 1
        assert corpus.paired[0].intent == "BookRestaurant"
        assert corpus.acts_only[0].intent == "GetWeather"
        assert corpus.utterances_only[0].tokens == ("what", "a", "day")

    def test_wrong_arity_block(self):
        with pytest.raises(FormatError):
            parse_corpus("# intent = X\na\tO\nb\tO\tO\n")

    def test_tokens_without_header_and_with_tags_rejected(self):
        with pytest.raises(FormatError):
            parse_corpus("a\tO\n")

    def test_header_without_tag_column_rejected(self):
        with pytest.raises(FormatError):
            parse_corpus("# intent = X\na\nb\n")

    def test_bio_violation_is_an_error_not_a_repair(self):
        with pytest.raises(FormatError):
            parse_corpus("# intent = X\na\tO\nb\tI-city\n")

    def test_bad_mr_line(self):
        with pytest.raises(FormatError):
            parse_corpus("# act = NoDelims\n")

    def test_multiline_act_block_rejected(self):
        with pytest.raises(FormatError):
            parse_corpus("# act = X ( )\nextra\tO\n")

    def test_load_save_round_trip(self, tmp_path):
        corpus = parse_corpus(THREE_BLOCKS)
        path = tmp_path / "corpus.txt"
        save_corpus(corpus, path)
        assert load_corpus(path) == corpus

    def test_emit_parse_identity(self, rng):
        from sluaug.toybench import build_toy_benchmark

        corpus = build_toy_benchmark(seed=3, train_size=25, unlabeled_size=10).train
        assert parse_corpus(emit_corpus(corpus)) == corpus


class TestRoundHalfUp:
    @pytest.mark.parametrize(
        "x,expected",
        [(Fraction(1, 2), 1), (Fraction(3, 2), 2), (Fraction(5, 2), 3),
         (Fraction(2, 5), 0), (Fraction(13084, 40), 327), (Fraction(13084, 10), 1308)],
    )
    def test_boundaries(self, x, expected):
        assert round_half_up(x) == expected


def _dummy_corpus(n: int) -> Corpus:
    examples = tuple(
        LabeledExample(Utterance((f"tok{i}", "x")), f"I{i % 5}", ("O", "O"))
        for i in range(n)
    )
    return Corpus(examples)


class TestSampleSplit:
    def test_paper_split_sizes(self):
        corpus = _dummy_corpus(13084)
        small, _ = sample_split(corpus, SplitSpec(Fraction(1, 40), seed=11))
        medium, _ = sample_split(corpus, SplitSpec(Fraction(1, 10), seed=11))
        assert len(small.paired) == 327
        assert len(medium.paired) == 1308

    def test_same_seed_identical(self):
        corpus = _dummy_corpus(500)
        spec = SplitSpec(Fraction(1, 10), seed=42, dev_size=20)
        assert sample_split(corpus, spec) == sample_split(corpus, spec)

    def test_different_seed_differs(self):
        corpus = _dummy_corpus(500)
        a, _ = sample_split(corpus, SplitSpec(Fraction(1, 10), seed=1))
        b, _ = sample_split(corpus, SplitSpec(Fraction(1, 10), seed=2))
        assert a != b

    def test_train_dev_disjoint(self):
        corpus = _dummy_corpus(200)
        train, dev = sample_split(corpus, SplitSpec(Fraction(1, 4), seed=3, dev_size=50))
        train_ids = {ex.utterance.tokens for ex in train.paired}
        dev_ids = {ex.utterance.tokens for ex in dev.paired}
        assert not train_ids & dev_ids
        assert len(dev.paired) == 50

    def test_identity_split(self):
        corpus = _dummy_corpus(10)
        train, dev = sample_split(corpus, SplitSpec(Fraction(1), seed=0, dev_size=0))
        assert train.paired == corpus.paired
        assert dev.paired == ()

    def test_insufficient_data(self):
        with pytest.raises(InsufficientData):
            sample_split(_dummy_corpus(10), SplitSpec(Fraction(1), seed=0, dev_size=1))

    def test_stratified_mode_size(self):
        corpus = _dummy_corpus(200)
        train, _ = sample_split(
            corpus, SplitSpec(Fraction(1, 4), seed=9), stratify_by_intent=True
        )
        assert len(train.paired) == 50
        intents = {ex.intent for ex in train.paired}
        assert intents == {f"I{i}" for i in range(5)}


class TestCorpusStats:
    def test_empty(self):
        stats = corpus_stats(Corpus())
        assert stats["num_paired"] == 0
        assert stats["num_intents"] == 0
        assert stats["value_inventory"] == {}

    def test_shared_slot_multiset(self):
        a = LabeledExample(Utterance(("go", "oslo")), "X", ("O", "B-city"))
        b = LabeledExample(Utterance(("to", "oslo")), "Y", ("O", "B-city"))
        stats = corpus_stats(Corpus((a, b)))
        assert stats["value_inventory"] == {"city": {"oslo": 2}}
        assert stats["num_intents"] == 2
        assert stats["num_slot_labels"] == 1

    def test_counts_cover_all_sections(self):
        corpus = parse_corpus(THREE_BLOCKS)
        stats = corpus_stats(corpus)
        assert (stats["num_paired"], stats["num_acts"], stats["num_utterances"]) == (1, 1, 1)
        assert stats["num_slot_labels"] == 2  # restaurant_type + city from the act
