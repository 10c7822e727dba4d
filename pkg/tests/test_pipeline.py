import sys
from dataclasses import replace
from pathlib import Path

import pytest

from sluaug.core import Corpus, validate
from sluaug.corpus_io import emit_corpus
from sluaug.genbackend import DecodingParams
from sluaug.perturb import PerturbConfig
from sluaug.pipeline import (
    ConfigError,
    RunContext,
    RunResult,
    ScenarioConfig,
    run_matrix,
    run_scenario,
)
from sluaug.toybench import build_toy_benchmark

STUB = str(Path(__file__).parent / "stub_backend.py")


@pytest.fixture(scope="module")
def bench():
    return build_toy_benchmark(seed=7)


@pytest.fixture(scope="module")
def ctx(bench):
    return RunContext(
        train=bench.train, dev=bench.dev, test=bench.test, ontology=bench.ontology
    )


def small_cfg(**kw):
    base = ScenarioConfig(
        perturb=PerturbConfig(target_count=40),
        acts_to_use=60,
        utterances_to_use=100,
        synthetic_target=60,
        epochs=5,
    )
    return replace(base, **kw)


class TestScenarioRuns:
    def test_no_da_has_empty_stages(self, ctx):
        result = run_scenario(small_cfg(scenario="no_da"), ctx, seed=1)
        assert result.stages.candidates == 0
        assert result.augmented.paired == ctx.train.paired

    def test_paired_only_counts_reconcile(self, ctx):
        result = run_scenario(small_cfg(scenario="paired_only"), ctx, seed=1)
        s = result.stages
        assert s.candidates == s.kept + s.filtered + s.deduplicated
        assert len(result.augmented.paired) == len(ctx.train.paired) + s.kept
        assert s.kept <= 60

    def test_paired_only_candidate_cap(self, ctx):
        cfg = small_cfg(scenario="paired_only", synthetic_target=1000)
        result = run_scenario(cfg, ctx, seed=2)
        limit = cfg.perturb.target_count * cfg.decoding.samples_per_input
        assert result.stages.candidates <= limit

    def test_augmented_corpus_validates(self, ctx, bench):
        for scenario in ("paired_only", "rich_in_ontology", "rich_in_utterance"):
            result = run_scenario(small_cfg(scenario=scenario), ctx, seed=1)
            problems = validate(result.augmented, bench.ontology)
            assert problems == []

    def test_rich_in_ontology_brings_unseen_values(self, ctx, bench):
        from sluaug.corpus_io import corpus_stats

        result = run_scenario(small_cfg(scenario="rich_in_ontology", acts_to_use=500), ctx, 1)
        train_values = {
            v
            for vs in corpus_stats(ctx.train)["value_inventory"].values()
            for v in vs
        }
        augmented_values = {
            v
            for vs in corpus_stats(result.augmented)["value_inventory"].values()
            for v in vs
        }
        assert augmented_values - train_values

    def test_rich_in_ontology_zero_acts_equals_no_da(self, ctx):
        a = run_scenario(small_cfg(scenario="rich_in_ontology", acts_to_use=0), ctx, 3)
        b = run_scenario(small_cfg(scenario="no_da"), ctx, 3)
        assert a.augmented.paired == b.augmented.paired
        assert a.report.slot_f1 == b.report.slot_f1

    def test_rich_in_utterance_kept_bounded(self, ctx):
        result = run_scenario(small_cfg(scenario="rich_in_utterance"), ctx, seed=1)
        assert result.stages.candidates <= 100
        assert result.stages.kept <= result.stages.candidates
        s = result.stages
        assert s.candidates == s.kept + s.filtered + s.deduplicated

    def test_rich_in_utterance_requires_unlabeled(self, ctx, bench):
        bare = RunContext(
            train=Corpus(bench.train.paired),
            test=bench.test,
            ontology=bench.ontology,
        )
        with pytest.raises(ConfigError):
            run_scenario(small_cfg(scenario="rich_in_utterance"), bare, seed=1)

    def test_degenerate_constant_backend_equals_no_da(self, ctx):
        # A backend that always emits an unrelated constant produces zero
        # filter survivors, so the augmented corpus is the original corpus.
        cfg = small_cfg(
            scenario="paired_only",
            backend=f"exec:{sys.executable} {STUB} constant 3",
        )
        result = run_scenario(cfg, ctx, seed=4)
        assert result.stages.kept == 0
        assert result.stages.filtered == result.stages.candidates
        baseline = run_scenario(small_cfg(scenario="no_da"), ctx, seed=4)
        assert result.report.slot_f1 == baseline.report.slot_f1
        assert result.augmented.paired == ctx.train.paired

    def test_seed_determinism_per_scenario(self, ctx):
        for scenario in ("paired_only", "rich_in_ontology", "rich_in_utterance"):
            a = run_scenario(small_cfg(scenario=scenario), ctx, seed=5)
            b = run_scenario(small_cfg(scenario=scenario), ctx, seed=5)
            assert emit_corpus(a.augmented) == emit_corpus(b.augmented)
            assert a.report.as_lines() == b.report.as_lines()
            assert a.stages == b.stages


class TestMatrix:
    def test_two_scenarios_five_seeds(self, ctx):
        result = run_matrix(
            small_cfg(), ctx, scenarios=["no_da", "paired_only"], seeds=[1, 2, 3, 4, 5]
        )
        assert set(result.rows) == {"no_da", "paired_only"}
        assert len(result.significance) == 1
        best, other, t, p = result.significance[0]
        assert {best, other} == {"no_da", "paired_only"}
        assert 0 <= p <= 1

    def test_single_seed_warns_and_skips_significance(self, ctx):
        result = run_matrix(small_cfg(), ctx, scenarios=["no_da", "paired_only"], seeds=[1])
        assert result.significance == []
        assert any("single seed" in w for w in result.warnings)

    def test_duplicate_scenario_rows_identical(self, ctx):
        result = run_matrix(small_cfg(), ctx, scenarios=["no_da", "no_da"], seeds=[1, 2])
        assert result.rows == {"no_da": result.rows["no_da"]}
        a = result.per_seed[("no_da", 1)]
        assert isinstance(a, RunResult)

    def test_partial_failure_recorded_run_continues(self, bench):
        # rich_in_utterance fails without unlabeled data; other cells succeed.
        ctx = RunContext(
            train=Corpus(bench.train.paired), test=bench.test, ontology=bench.ontology
        )
        result = run_matrix(
            small_cfg(), ctx, scenarios=["no_da", "rich_in_utterance"], seeds=[1, 2]
        )
        assert "no_da" in result.rows
        assert "rich_in_utterance" not in result.rows
        assert any("rich_in_utterance" in w for w in result.warnings)

    def test_table_rendering(self, ctx):
        result = run_matrix(small_cfg(), ctx, scenarios=["no_da"], seeds=[1, 2])
        table = result.as_table()
        assert table.startswith("scenario\tslot_f1\tintent_accuracy\n")
        assert "no_da\t" in table
