from pathlib import Path

import pytest

from sluaug.cli import (
    EXIT_CONFIG,
    EXIT_DATA,
    EXIT_OK,
    load_ontology_file,
    main,
    parse_config_text,
    render_config,
    save_ontology_file,
)
from sluaug.pipeline import ConfigError

DATA = Path(__file__).parent / "data" / "toy"


def toy_config(tmp_path, **overrides) -> Path:
    lines = {
        "run.scenario": "no_da",
        "run.backend": "builtin",
        "run.seeds": "1 2",
        "data.train": str(DATA / "train.txt"),
        "data.dev": str(DATA / "dev.txt"),
        "data.test": str(DATA / "test.txt"),
        "data.ontology": str(DATA / "ontology.txt"),
        "perturb.target_count": "20",
        "caps.acts_to_use": "30",
        "caps.utterances_to_use": "50",
        "caps.synthetic_target": "30",
        "slu.epochs": "3",
    }
    lines.update(overrides)
    by_section: dict[str, list[str]] = {}
    for key, value in lines.items():
        section, _, name = key.partition(".")
        by_section.setdefault(section, []).append(f"{name} = {value}")
    text = "\n".join(
        f"[{section}]\n" + "\n".join(entries) + "\n"
        for section, entries in by_section.items()
    )
    path = tmp_path / "config.txt"
    path.write_text(text, encoding="utf-8")
    return path


class TestConfigParsing:
    def test_round_trip_through_render(self, tmp_path):
        cfg = parse_config_text(toy_config(tmp_path).read_text())
        again = parse_config_text(render_config(cfg))
        assert again == cfg

    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigError):
            parse_config_text("[run]\nbogus = 1\n")

    def test_bad_line_rejected(self):
        with pytest.raises(ConfigError):
            parse_config_text("[run]\nnot a key value line\n")

    def test_defaults(self):
        cfg = parse_config_text("")
        assert cfg.acts_to_use == 500
        assert cfg.utterances_to_use == 1000
        assert cfg.synthetic_target == 500
        assert cfg.perturb.target_count == 300
        assert cfg.decoding.top_p == 0.9
        assert cfg.seeds == (1, 2, 3, 4, 5)


class TestOntologyFile:
    def test_round_trip(self, tmp_path):
        ontology = load_ontology_file(DATA / "ontology.txt")
        out = tmp_path / "ont.txt"
        save_ontology_file(ontology, out)
        assert load_ontology_file(out) == ontology
        assert len(ontology.valid_acts) == 500


class TestRunCommand:
    def test_print_config(self, tmp_path, capsys):
        code = main(
            ["run", "--config", str(toy_config(tmp_path)), "--print-config",
             "--out", str(tmp_path / "out")]
        )
        assert code == EXIT_OK
        out = capsys.readouterr().out
        assert "[run]" in out and "scenario = no_da" in out

    def test_missing_config_file(self, tmp_path):
        assert main(["run", "--config", str(tmp_path / "nope.txt")]) == EXIT_CONFIG

    def test_bad_train_path(self, tmp_path):
        cfg = toy_config(tmp_path, **{"data.train": str(tmp_path / "missing.txt")})
        assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "out")]) == EXIT_DATA

    def test_no_da_run_writes_outputs(self, tmp_path, capsys):
        out = tmp_path / "out"
        code = main(
            ["run", "--config", str(toy_config(tmp_path)), "--seed", "1", "--out", str(out)]
        )
        assert code == EXIT_OK
        assert (out / "report.tsv").exists()
        assert (out / "stages.tsv").exists()
        assert (out / "augmented_no_da_seed1.txt").exists()
        assert "no_da" in capsys.readouterr().out

    def test_scenario_override_and_stage_file(self, tmp_path):
        out = tmp_path / "out"
        code = main(
            ["run", "--config", str(toy_config(tmp_path)), "--scenario", "paired_only",
             "--seed", "2", "--out", str(out)]
        )
        assert code == EXIT_OK
        stages = (out / "stages.tsv").read_text()
        assert stages.startswith("paired_only\t2\tcandidates\t")


class TestValidateCommand:
    def test_consistent_corpus(self, capsys):
        code = main(
            ["validate", str(DATA / "train.txt"), "--ontology", str(DATA / "ontology.txt")]
        )
        assert code == EXIT_OK
        assert "0 violation(s)" in capsys.readouterr().out

    def test_violations_exit_code(self, tmp_path, capsys):
        bad = tmp_path / "bad.txt"
        bad.write_text("# intent = Unknown\nhi\tO\n", encoding="utf-8")
        code = main(
            ["validate", str(bad), "--ontology", str(DATA / "ontology.txt")]
        )
        assert code == EXIT_DATA
        assert "unknown intent" in capsys.readouterr().out

    def test_malformed_corpus(self, tmp_path):
        bad = tmp_path / "bad.txt"
        bad.write_text("# intent = X\na\tO\tO\n", encoding="utf-8")
        assert main(["validate", str(bad)]) == EXIT_DATA


class TestEvalCommand:
    def test_perfect_score(self, capsys):
        code = main(
            ["eval", "--gold", str(DATA / "test.txt"), "--pred", str(DATA / "test.txt")]
        )
        assert code == EXIT_OK
        out = capsys.readouterr().out
        assert "slot_f1\t1.000000" in out
        assert "intent_accuracy\t1.000000" in out

    def test_arity_mismatch(self, tmp_path):
        pred = tmp_path / "pred.txt"
        pred.write_text("# intent = X\nhi\tO\n", encoding="utf-8")
        assert main(["eval", "--gold", str(DATA / "test.txt"), "--pred", str(pred)]) == EXIT_DATA

    def test_token_level_flag(self, capsys):
        code = main(
            ["eval", "--gold", str(DATA / "dev.txt"), "--pred", str(DATA / "dev.txt"),
             "--token-level"]
        )
        assert code == EXIT_OK
        assert "token_f1\t1.000000" in capsys.readouterr().out


class TestStatsCommand:
    def test_toy_stats(self, capsys):
        assert main(["stats", str(DATA / "train.txt")]) == EXIT_OK
        out = capsys.readouterr().out
        assert "num_paired\t40" in out
        assert "num_utterances\t1000" in out
        assert "slot:city\t" in out
