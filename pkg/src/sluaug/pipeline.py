"""End-to-end augmentation scenarios and the scenario-by-seed matrix runner.

Every run is a pure function of (input corpora, ontology, config, seed) when
the backend is builtin or fixture, so repeated runs are byte-identical.
Each run reports stage counts that must reconcile exactly:
candidates = kept + filtered + deduplicated.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field, replace

from . import genbackend, metrics, perturb, slu
from .align import contains_all_values, da_from_labeled, label_with_da, AlignmentFailed
from .core import Corpus, DialogueAct, LabeledExample, Ontology, Utterance
from .corpus_io import corpus_stats
from .genbackend import DecodingParams, FixtureBackend, ExternalEndpoint, NLG, NLU
from .mr import parse_da, serialize_da, MalformedMr
from .perturb import PerturbConfig

SCENARIOS = ("no_da", "paired_only", "rich_in_ontology", "rich_in_utterance")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ScenarioConfig:
    scenario: str = "paired_only"
    train_path: str = ""
    dev_path: str = ""
    test_path: str = ""
    ontology_path: str = ""
    backend: str = "builtin"
    perturb: PerturbConfig = field(default_factory=PerturbConfig)
    decoding: DecodingParams = field(default_factory=DecodingParams)
    acts_to_use: int = 500
    utterances_to_use: int = 1000
    synthetic_target: int = 500
    epochs: int = 10
    seeds: tuple[int, ...] = (1, 2, 3, 4, 5)

    def __post_init__(self):
        if self.scenario not in SCENARIOS + ("all",):
            raise ConfigError(f"unknown scenario {self.scenario!r}")
        for cap in (self.acts_to_use, self.utterances_to_use, self.synthetic_target):
            if cap < 0:
                raise ConfigError("caps must be >= 0")


@dataclass
class StageCounts:
    candidates: int = 0
    kept: int = 0
    filtered: int = 0
    deduplicated: int = 0

    def check(self) -> None:
        total = self.kept + self.filtered + self.deduplicated
        assert self.candidates == total, (
            f"stage counts do not reconcile: {self.candidates} candidates != "
            f"{self.kept} kept + {self.filtered} filtered + {self.deduplicated} deduped"
        )

    def as_lines(self) -> list[str]:
        return [
            f"candidates\t{self.candidates}",
            f"kept\t{self.kept}",
            f"filtered\t{self.filtered}",
            f"deduplicated\t{self.deduplicated}",
        ]


@dataclass
class RunResult:
    scenario: str
    seed: int
    augmented: Corpus
    report: metrics.EvalReport
    stages: StageCounts


@dataclass
class RunContext:
    """Shared inputs for one scenario run."""

    train: Corpus
    test: Corpus
    dev: Corpus | None = None
    ontology: Ontology | None = None


def _rng(seed: int, stream: int) -> random.Random:
    return random.Random(seed * 1000003 + stream)


def _train_and_eval(cfg: ScenarioConfig, ctx: RunContext, paired, seed: int):
    dev = list(ctx.dev.paired) if ctx.dev and ctx.dev.paired else None
    tagger = slu.train_tagger(paired, epochs=cfg.epochs, seed=seed, dev=dev)
    intent_model = slu.train_intent(paired, epochs=cfg.epochs, seed=seed, dev=dev)
    preds = [slu.tag(tagger, ex.utterance.tokens) for ex in ctx.test.paired]
    report = metrics.slot_f1(list(ctx.test.paired), preds)
    gold = [ex.intent for ex in ctx.test.paired]
    pred_intents = [slu.classify(intent_model, ex.utterance.tokens) for ex in ctx.test.paired]
    report.intent_accuracy = metrics.intent_accuracy(gold, pred_intents)
    return report


class _NlgBackend:
    """Uniform DA-to-utterances interface over builtin/fixture/external backends."""

    def __init__(self, cfg: ScenarioConfig, ctx: RunContext, seed: int):
        self.params = cfg.decoding
        self.kind = cfg.backend.split(":", 1)[0]
        if cfg.backend == "builtin":
            self.model = genbackend.train_template_generator(list(ctx.train.paired))
            self.rng = _rng(seed, 11)
        elif self.kind == "fixture":
            self.fixture = FixtureBackend.load(cfg.backend.split(":", 1)[1])
        elif self.kind in ("exec", "tcp"):
            self.endpoint = ExternalEndpoint(cfg.backend)
        else:
            raise ConfigError(f"unknown backend {cfg.backend!r}")

    def generate(self, da: DialogueAct) -> list[str]:
        if self.kind == "builtin":
            try:
                utts = genbackend.generate(self.model, da, self.params, self.rng)
            except genbackend.NoTemplateForIntent:
                return []
            return [u.raw for u in utts]
        mr = serialize_da(da)
        if self.kind == "fixture":
            return self.fixture.call(NLG, [mr], self.params)[0]
        return genbackend.external_call(self.endpoint, NLG, [mr], self.params)[0]

    def close(self) -> None:
        if self.kind in ("exec", "tcp"):
            self.endpoint.close()


def _synthesize_from_acts(
    cfg: ScenarioConfig, ctx: RunContext, acts, seed: int, cap: int | None
) -> tuple[list[LabeledExample], StageCounts]:
    """Generate, coverage-filter, dedup, and label; stops once ``cap`` kept."""
    backend = _NlgBackend(cfg, ctx, seed)
    stages = StageCounts()
    seen_text: set[str] = set()
    kept: list[LabeledExample] = []
    try:
        for act in acts:
            if cap is not None and len(kept) >= cap:
                break
            for text in backend.generate(act):
                if cap is not None and len(kept) >= cap:
                    break
                stages.candidates += 1
                try:
                    utt = Utterance.from_text(text)
                except ValueError:
                    stages.filtered += 1
                    continue
                if not contains_all_values(utt, act):
                    stages.filtered += 1
                    continue
                norm = " ".join(utt.tokens)
                if norm in seen_text:
                    stages.deduplicated += 1
                    continue
                seen_text.add(norm)
                kept.append(label_with_da(utt, act))
                stages.kept += 1
    finally:
        backend.close()
    stages.check()
    return kept, stages


def run_no_da(cfg: ScenarioConfig, ctx: RunContext, seed: int) -> RunResult:
    stages = StageCounts()
    stages.check()
    report = _train_and_eval(cfg, ctx, list(ctx.train.paired), seed)
    return RunResult("no_da", seed, ctx.train, report, stages)


def run_paired_only(cfg: ScenarioConfig, ctx: RunContext, seed: int) -> RunResult:
    if not ctx.train.paired:
        raise ConfigError("paired training data required")
    pcfg = replace(cfg.perturb, seed=seed * 1000003 + 7)
    # The paired-only regime by definition has no ontology information, so
    # perturbation draws only on values observed in the paired data.
    expansion = perturb.expand_acts(ctx.train, None, pcfg)
    synthetic, stages = _synthesize_from_acts(
        cfg, ctx, expansion.acts, seed, cfg.synthetic_target
    )
    augmented = Corpus(tuple(ctx.train.paired) + tuple(synthetic))
    report = _train_and_eval(cfg, ctx, list(augmented.paired), seed)
    return RunResult("paired_only", seed, augmented, report, stages)


def run_rich_in_ontology(cfg: ScenarioConfig, ctx: RunContext, seed: int) -> RunResult:
    pool = list(ctx.ontology.valid_acts or ()) if ctx.ontology else []
    if not pool:
        pool = list(ctx.train.acts_only)
    if not pool:
        raise ConfigError("rich_in_ontology needs ontology valid_acts or an acts-only section")
    known = {da_from_labeled(ex).canonical_key() for ex in ctx.train.paired}
    unseen = [act for act in pool if act.canonical_key() not in known]
    rng = _rng(seed, 23)
    take = min(cfg.acts_to_use, len(unseen))
    acts = [unseen[i] for i in sorted(rng.sample(range(len(unseen)), take))]
    synthetic, stages = _synthesize_from_acts(cfg, ctx, acts, seed, None)
    augmented = Corpus(tuple(ctx.train.paired) + tuple(synthetic))
    report = _train_and_eval(cfg, ctx, list(augmented.paired), seed)
    return RunResult("rich_in_ontology", seed, augmented, report, stages)


def run_rich_in_utterance(cfg: ScenarioConfig, ctx: RunContext, seed: int) -> RunResult:
    pool = list(ctx.train.utterances_only)
    if not pool:
        raise ConfigError("rich_in_utterance needs an utterances-only section")
    if ctx.ontology is None:
        raise ConfigError("rich_in_utterance needs an ontology")
    rng = _rng(seed, 31)
    take = min(cfg.utterances_to_use, len(pool))
    utterances = [pool[i] for i in sorted(rng.sample(range(len(pool)), take))]

    stats = corpus_stats(ctx.train)
    inventory = perturb.merged_value_inventory(stats["value_inventory"], ctx.ontology)
    intent_model = slu.train_intent(list(ctx.train.paired), epochs=cfg.epochs, seed=seed)

    def scorer(tokens):
        return slu.classify_with_margin(intent_model, tokens)

    kind = cfg.backend.split(":", 1)[0]
    endpoint = ExternalEndpoint(cfg.backend) if kind in ("exec", "tcp") else None
    fixture = FixtureBackend.load(cfg.backend.split(":", 1)[1]) if kind == "fixture" else None

    stages = StageCounts()
    seen_text: set[str] = set()
    kept: list[LabeledExample] = []
    try:
        for utt in utterances:
            stages.candidates += 1
            norm = " ".join(utt.tokens)
            if norm in seen_text:
                stages.deduplicated += 1
                continue
            try:
                if endpoint is not None or fixture is not None:
                    if endpoint is not None:
                        outs = genbackend.external_call(endpoint, NLU, [norm], cfg.decoding)[0]
                    else:
                        outs = fixture.call(NLU, [norm], cfg.decoding)[0]
                    da = genbackend.map_to_ontology(parse_da(outs[0]), ctx.ontology)
                else:
                    da = genbackend.pseudo_label(utt, ctx.ontology, inventory, scorer)
            except (
                genbackend.NoEvidence,
                genbackend.UnknownIntent,
                MalformedMr,
                genbackend.PartialResponse,
            ):
                stages.filtered += 1
                continue
            if not contains_all_values(utt, da):
                stages.filtered += 1
                continue
            try:
                kept.append(label_with_da(utt, da))
            except AlignmentFailed:
                stages.filtered += 1
                continue
            seen_text.add(norm)
            stages.kept += 1
    finally:
        if endpoint is not None:
            endpoint.close()
    stages.check()
    augmented = Corpus(tuple(ctx.train.paired) + tuple(kept))
    report = _train_and_eval(cfg, ctx, list(augmented.paired), seed)
    return RunResult("rich_in_utterance", seed, augmented, report, stages)


_RUNNERS = {
    "no_da": run_no_da,
    "paired_only": run_paired_only,
    "rich_in_ontology": run_rich_in_ontology,
    "rich_in_utterance": run_rich_in_utterance,
}


def run_scenario(cfg: ScenarioConfig, ctx: RunContext, seed: int) -> RunResult:
    return _RUNNERS[cfg.scenario](cfg, ctx, seed)


@dataclass
class MatrixResult:
    rows: dict[str, dict[str, float]]  # scenario -> {slot_f1, intent_accuracy} medians
    per_seed: dict[tuple[str, int], RunResult | Exception]
    significance: list[tuple[str, str, float, float]]  # (best, other, t, p)
    warnings: list[str] = field(default_factory=list)

    def as_table(self) -> str:
        lines = ["scenario\tslot_f1\tintent_accuracy"]
        for scenario, row in self.rows.items():
            lines.append(
                f"{scenario}\t{row['slot_f1']:.4f}\t{row['intent_accuracy']:.4f}"
            )
        for best, other, t, p in self.significance:
            lines.append(f"# t-test {best} vs {other}: t={t:.4f} p={p:.6f}")
        return "\n".join(lines) + "\n"


def _median(xs: list[float]) -> float:
    xs = sorted(xs)
    n = len(xs)
    return xs[n // 2] if n % 2 else (xs[n // 2 - 1] + xs[n // 2]) / 2


def run_matrix(cfg: ScenarioConfig, ctx: RunContext, scenarios=None, seeds=None) -> MatrixResult:
    """Run every (scenario, seed) cell, aggregate medians, and test significance.

    Cell failures are recorded and the matrix continues.
    """
    scenarios = list(scenarios or [cfg.scenario])
    seeds = list(seeds or cfg.seeds)
    per_seed: dict[tuple[str, int], RunResult | Exception] = {}
    warnings: list[str] = []
    for scenario in scenarios:
        for seed in seeds:
            try:
                per_seed[(scenario, seed)] = run_scenario(
                    replace(cfg, scenario=scenario), ctx, seed
                )
            except Exception as e:  # record and continue per spec
                per_seed[(scenario, seed)] = e
                warnings.append(f"{scenario}/seed {seed} failed: {e}")

    rows: dict[str, dict[str, float]] = {}
    f1_by_scenario: dict[str, list[float]] = {}
    for scenario in scenarios:
        results = [
            per_seed[(scenario, s)]
            for s in seeds
            if isinstance(per_seed[(scenario, s)], RunResult)
        ]
        if not results:
            continue
        f1s = [r.report.slot_f1 for r in results]
        accs = [r.report.intent_accuracy for r in results]
        rows[scenario] = {"slot_f1": _median(f1s), "intent_accuracy": _median(accs)}
        f1_by_scenario[scenario] = f1s

    significance: list[tuple[str, str, float, float]] = []
    if len(seeds) < 2:
        warnings.append("single seed: significance test skipped")
    elif len(rows) >= 2:
        best = max(rows, key=lambda s: rows[s]["slot_f1"])
        for other in rows:
            if other == best:
                continue
            a, b = f1_by_scenario[best], f1_by_scenario[other]
            if len(a) == len(b) >= 2:
                try:
                    t, p = metrics.paired_t_test(a, b)
                except metrics.DegenerateInput:
                    warnings.append(f"t-test {best} vs {other}: degenerate differences")
                    continue
                significance.append((best, other, t, p))
    return MatrixResult(rows, per_seed, significance, warnings)
