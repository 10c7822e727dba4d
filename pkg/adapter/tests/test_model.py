import pytest
import torch

from lm_adapter.config import AdapterConfig, ConfigError, parse_config_text
from lm_adapter.corpus import CorpusError, Pair, read_pairs, render_act
from lm_adapter.model import SPECIALS, LanguageModel, ModelError, Vocab, nucleus_filter


class TestConfig:
    def test_defaults(self):
        cfg = AdapterConfig()
        assert (cfg.top_p, cfg.temperature, cfg.samples) == (0.9, 1.0, 3)
        assert (cfg.epochs, cfg.learning_rate) == (5, 5e-5)

    @pytest.mark.parametrize(
        "kw",
        [
            {"top_p": 0.0},
            {"top_p": 1.5},
            {"temperature": 0},
            {"samples": 0},
            {"epochs": -1},
            {"direction": "sideways"},
        ],
    )
    def test_validation(self, kw):
        with pytest.raises(ConfigError):
            AdapterConfig(**kw)

    def test_parse_and_unknown_key(self):
        cfg = parse_config_text("# comment\ntop_p = 0.5\nepochs = 2\n")
        assert (cfg.top_p, cfg.epochs) == (0.5, 2)
        with pytest.raises(ConfigError):
            parse_config_text("bogus = 1\n")


class TestCorpus:
    def test_render_act(self):
        tokens = "book a table in new york".split()
        tags = ["O", "O", "O", "O", "B-city", "I-city"]
        assert render_act("Book", tokens, tags) == "Book ( city = new york )"
        assert render_act("Hi", ["hello"], ["O"]) == "Hi ( )"

    def test_read_pairs(self, tmp_path):
        path = tmp_path / "train.txt"
        path.write_text(
            "# intent = Book\nbook\tO\noslo\tB-city\n\nfind me a pub\n",
            encoding="utf-8",
        )
        assert read_pairs(path) == [Pair("book oslo", "Book ( city = oslo )")]

    def test_no_paired_blocks(self, tmp_path):
        path = tmp_path / "train.txt"
        path.write_text("just an utterance\n", encoding="utf-8")
        with pytest.raises(CorpusError):
            read_pairs(path)


class TestVocab:
    def test_build_and_round_trip(self):
        vocab = Vocab.build(["book a table", "a pub"])
        assert vocab.tokens[: len(SPECIALS)] == list(SPECIALS)
        ids = vocab.encode("book a pub")
        assert vocab.decode(ids) == "book a pub"

    def test_unknown_words_map_to_unk(self):
        vocab = Vocab.build(["known words"])
        assert vocab.decode(vocab.encode("known mystery")) == "known <unk>"


class TestNucleusFilter:
    def test_hand_computed_cutoff(self):
        probs = torch.tensor([0.5, 0.3, 0.15, 0.05])
        out = nucleus_filter(probs, top_p=0.7)
        # Mass 0.5 < 0.7 after the first token, so the second is included;
        # 0.8 >= 0.7 stops there. Renormalized over {0.5, 0.3}.
        assert torch.allclose(out, torch.tensor([0.625, 0.375, 0.0, 0.0]))

    def test_top_token_always_survives(self):
        probs = torch.tensor([0.9, 0.1])
        out = nucleus_filter(probs, top_p=0.01)
        assert torch.allclose(out, torch.tensor([1.0, 0.0]))

    def test_top_p_one_keeps_everything(self):
        probs = torch.tensor([0.4, 0.3, 0.2, 0.1])
        out = nucleus_filter(probs, top_p=1.0)
        assert torch.allclose(out, probs)


class TestLanguageModel:
    def test_save_load_round_trip(self, tmp_path):
        vocab = Vocab.build(["a b c"])
        model = LanguageModel.create(vocab, seed=3)
        model.save(tmp_path / "m")
        again = LanguageModel.load(tmp_path / "m")
        assert again.vocab.tokens == vocab.tokens
        for a, b in zip(model.net.parameters(), again.net.parameters()):
            assert torch.equal(a, b)

    def test_load_missing_artifact(self, tmp_path):
        with pytest.raises(ModelError):
            LanguageModel.load(tmp_path / "absent")

    def test_generate_respects_sample_count_and_seed(self):
        vocab = Vocab.build(["a b c d"])
        model = LanguageModel.create(vocab, seed=0)
        outs = model.generate("a b", samples=4, top_p=0.9, temperature=1.0,
                              max_new_tokens=5, seed=11)
        again = model.generate("a b", samples=4, top_p=0.9, temperature=1.0,
                               max_new_tokens=5, seed=11)
        assert len(outs) == 4
        assert outs == again
        assert all(len(o.split()) <= 5 for o in outs)

    def test_input_longer_than_window_rejected(self):
        vocab = Vocab.build(["w"])
        model = LanguageModel.create(vocab, n_positions=8)
        with pytest.raises(ModelError):
            model.generate("w " * 20, samples=1, top_p=0.9, temperature=1.0,
                           max_new_tokens=4)
