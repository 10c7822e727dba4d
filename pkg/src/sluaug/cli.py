"""Command-line entry points.

Commands: ``augment run``, ``augment validate``, ``augment eval``,
``augment stats``. Config files are flat ``key = value`` lines with
``[section]`` headers; ``--print-config`` shows every default.

Exit codes: 0 success, 1 config error, 2 data error, 3 backend error.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from . import core, corpus_io, genbackend, metrics, pipeline
from .genbackend import DecodingParams
from .perturb import PerturbConfig
from .pipeline import ConfigError, RunContext, ScenarioConfig

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_BACKEND = 0, 1, 2, 3


def parse_config_text(text: str) -> ScenarioConfig:
    values: dict[str, str] = {}
    section = ""
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            continue
        if "=" not in line:
            raise ConfigError(f"config line {no}: expected key = value")
        key, _, value = line.partition("=")
        key = key.strip()
        if section:
            key = f"{section}.{key}"
        values[key] = value.strip()
    return config_from_values(values)


def _pop(values, key, cast, default):
    if key in values:
        raw = values.pop(key)
        try:
            return cast(raw)
        except ValueError as e:
            raise ConfigError(f"bad value for {key}: {raw!r} ({e})") from e
    return default


def _int_list(raw: str) -> tuple[int, ...]:
    return tuple(int(x) for x in raw.replace(",", " ").split())


def _float_triple(raw: str) -> tuple[float, float, float]:
    parts = [float(x) for x in raw.replace(",", " ").split()]
    if len(parts) != 3:
        raise ValueError("expected three weights")
    return tuple(parts)  # type: ignore[return-value]


def config_from_values(values: dict[str, str]) -> ScenarioConfig:
    values = dict(values)
    d = ScenarioConfig()
    perturb_defaults = PerturbConfig()
    decoding_defaults = DecodingParams()
    cfg = ScenarioConfig(
        scenario=_pop(values, "run.scenario", str, d.scenario),
        train_path=_pop(values, "data.train", str, d.train_path),
        dev_path=_pop(values, "data.dev", str, d.dev_path),
        test_path=_pop(values, "data.test", str, d.test_path),
        ontology_path=_pop(values, "data.ontology", str, d.ontology_path),
        backend=_pop(values, "run.backend", str, d.backend),
        perturb=PerturbConfig(
            op_weights=_pop(values, "perturb.op_weights", _float_triple, perturb_defaults.op_weights),
            min_slots=_pop(values, "perturb.min_slots", int, perturb_defaults.min_slots),
            max_slots=_pop(values, "perturb.max_slots", int, perturb_defaults.max_slots),
            target_count=_pop(values, "perturb.target_count", int, perturb_defaults.target_count),
            seed=_pop(values, "perturb.seed", int, perturb_defaults.seed),
        ),
        decoding=DecodingParams(
            top_p=_pop(values, "decoding.top_p", float, decoding_defaults.top_p),
            temperature=_pop(values, "decoding.temperature", float, decoding_defaults.temperature),
            samples_per_input=_pop(
                values, "decoding.samples_per_input", int, decoding_defaults.samples_per_input
            ),
        ),
        acts_to_use=_pop(values, "caps.acts_to_use", int, d.acts_to_use),
        utterances_to_use=_pop(values, "caps.utterances_to_use", int, d.utterances_to_use),
        synthetic_target=_pop(values, "caps.synthetic_target", int, d.synthetic_target),
        epochs=_pop(values, "slu.epochs", int, d.epochs),
        seeds=_pop(values, "run.seeds", _int_list, d.seeds),
    )
    if values:
        raise ConfigError(f"unknown config keys: {sorted(values)}")
    return cfg


def render_config(cfg: ScenarioConfig) -> str:
    return "\n".join(
        [
            "[run]",
            f"scenario = {cfg.scenario}",
            f"backend = {cfg.backend}",
            f"seeds = {' '.join(str(s) for s in cfg.seeds)}",
            "",
            "[data]",
            f"train = {cfg.train_path}",
            f"dev = {cfg.dev_path}",
            f"test = {cfg.test_path}",
            f"ontology = {cfg.ontology_path}",
            "",
            "[perturb]",
            f"op_weights = {cfg.perturb.op_weights[0]} {cfg.perturb.op_weights[1]} {cfg.perturb.op_weights[2]}",
            f"min_slots = {cfg.perturb.min_slots}",
            f"max_slots = {cfg.perturb.max_slots}",
            f"target_count = {cfg.perturb.target_count}",
            f"seed = {cfg.perturb.seed}",
            "",
            "[decoding]",
            f"top_p = {cfg.decoding.top_p}",
            f"temperature = {cfg.decoding.temperature}",
            f"samples_per_input = {cfg.decoding.samples_per_input}",
            "",
            "[caps]",
            f"acts_to_use = {cfg.acts_to_use}",
            f"utterances_to_use = {cfg.utterances_to_use}",
            f"synthetic_target = {cfg.synthetic_target}",
            "",
            "[slu]",
            f"epochs = {cfg.epochs}",
            "",
        ]
    )


def load_ontology_file(path) -> core.Ontology:
    """Ontology file: ``intent <name>``, ``slot <name>``, ``value <slot>\\t<v>``,
    and ``act <MR string>`` lines."""
    from .mr import parse_da

    intents, slots = set(), set()
    known: dict[str, set[str]] = {}
    acts = []
    for no, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        kind, _, rest = line.partition(" ")
        if kind == "intent":
            intents.add(rest.strip())
        elif kind == "slot":
            slots.add(rest.strip())
        elif kind == "value":
            slot, _, value = rest.partition("\t")
            known.setdefault(slot.strip(), set()).add(value.strip())
        elif kind == "act":
            acts.append(parse_da(rest))
        else:
            raise corpus_io.FormatError(no, f"unknown ontology entry {kind!r}")
    for act in acts:
        intents.add(act.intent)
        slots.update(sv.slot for sv in act.slots)
    slots.update(known)
    return core.Ontology(
        frozenset(intents), frozenset(slots),
        {s: frozenset(vs) for s, vs in known.items()},
        tuple(acts) or None,
    )


def save_ontology_file(ontology: core.Ontology, path) -> None:
    from .mr import serialize_da

    lines = [f"intent {i}" for i in sorted(ontology.intents)]
    lines += [f"slot {s}" for s in sorted(ontology.slots)]
    for slot in sorted(ontology.known_values):
        lines += [f"value {slot}\t{v}" for v in sorted(ontology.known_values[slot])]
    lines += [f"act {serialize_da(a)}" for a in ontology.valid_acts or ()]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def _load_context(cfg: ScenarioConfig) -> RunContext:
    if not cfg.train_path:
        raise ConfigError("data.train is required")
    train = corpus_io.load_corpus(cfg.train_path)
    test = corpus_io.load_corpus(cfg.test_path) if cfg.test_path else core.Corpus(train.paired)
    dev = corpus_io.load_corpus(cfg.dev_path) if cfg.dev_path else None
    ontology = load_ontology_file(cfg.ontology_path) if cfg.ontology_path else None
    return RunContext(train=train, test=test, dev=dev, ontology=ontology)


def cmd_run(args) -> int:
    try:
        cfg = parse_config_text(Path(args.config).read_text(encoding="utf-8"))
        if args.scenario:
            cfg = replace(cfg, scenario=args.scenario)
        if args.seed is not None:
            cfg = replace(cfg, seeds=(args.seed,))
        if args.backend:
            cfg = replace(cfg, backend=args.backend)
        if args.print_config:
            print(render_config(cfg), end="")
            return EXIT_OK
    except (ConfigError, OSError) as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        ctx = _load_context(cfg)
    except (corpus_io.FormatError, ValueError, OSError) as e:
        print(f"data error: {e}", file=sys.stderr)
        return EXIT_DATA

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    scenarios = list(pipeline.SCENARIOS) if cfg.scenario == "all" else [cfg.scenario]
    try:
        result = pipeline.run_matrix(cfg, ctx, scenarios=scenarios, seeds=cfg.seeds)
    except genbackend.BackendUnavailable as e:
        print(f"backend error: {e}", file=sys.stderr)
        return EXIT_BACKEND
    for warning in result.warnings:
        print(f"warning: {warning}", file=sys.stderr)

    (out / "report.tsv").write_text(result.as_table(), encoding="utf-8")
    stage_lines = []
    for (scenario, seed), cell in sorted(result.per_seed.items()):
        if isinstance(cell, pipeline.RunResult):
            for line in cell.stages.as_lines():
                stage_lines.append(f"{scenario}\t{seed}\t{line}")
            corpus_io.save_corpus(
                cell.augmented, out / f"augmented_{scenario}_seed{seed}.txt"
            )
        else:
            stage_lines.append(f"{scenario}\t{seed}\terror\t{cell}")
    (out / "stages.tsv").write_text(
        "\n".join(stage_lines) + ("\n" if stage_lines else ""), encoding="utf-8"
    )
    print(result.as_table(), end="")
    failures = [c for c in result.per_seed.values() if not isinstance(c, pipeline.RunResult)]
    if failures and any(isinstance(c, genbackend.BackendUnavailable) for c in failures):
        return EXIT_BACKEND
    if failures:
        return EXIT_DATA
    return EXIT_OK


def cmd_validate(args) -> int:
    try:
        corpus = corpus_io.load_corpus(args.corpus)
    except (corpus_io.FormatError, ValueError, OSError) as e:
        print(f"data error: {e}", file=sys.stderr)
        return EXIT_DATA
    if args.ontology:
        ontology = load_ontology_file(args.ontology)
    else:
        stats = corpus_io.corpus_stats(corpus)
        ontology = core.Ontology(
            frozenset(
                {ex.intent for ex in corpus.paired} | {a.intent for a in corpus.acts_only}
            ),
            frozenset(
                set(stats["value_inventory"])
                | {sv.slot for a in corpus.acts_only for sv in a.slots}
            ),
        )
    problems = core.validate(corpus, ontology)
    for problem in problems:
        print(problem)
    print(f"{len(problems)} violation(s)")
    return EXIT_OK if not problems else EXIT_DATA


def cmd_eval(args) -> int:
    try:
        gold = corpus_io.load_corpus(args.gold)
        pred = corpus_io.load_corpus(args.pred)
        report = metrics.slot_f1(
            list(gold.paired), [ex.tags for ex in pred.paired], token_level=args.token_level
        )
        report.intent_accuracy = metrics.intent_accuracy(
            [ex.intent for ex in gold.paired], [ex.intent for ex in pred.paired]
        )
    except (corpus_io.FormatError, metrics.ArityMismatch, ValueError, OSError) as e:
        print(f"data error: {e}", file=sys.stderr)
        return EXIT_DATA
    for line in report.as_lines():
        print(line)
    if args.token_level:
        print(f"token_f1\t{report.token_f1:.6f}")
    return EXIT_OK


def cmd_stats(args) -> int:
    try:
        corpus = corpus_io.load_corpus(args.corpus)
    except (corpus_io.FormatError, ValueError, OSError) as e:
        print(f"data error: {e}", file=sys.stderr)
        return EXIT_DATA
    stats = corpus_io.corpus_stats(corpus)
    for key in ("num_paired", "num_acts", "num_utterances", "num_intents", "num_slot_labels"):
        print(f"{key}\t{stats[key]}")
    for slot in sorted(stats["value_inventory"]):
        total = sum(stats["value_inventory"][slot].values())
        distinct = len(stats["value_inventory"][slot])
        print(f"slot:{slot}\t{distinct} distinct / {total} occurrences")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="augment", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run augmentation scenarios")
    run.add_argument("--config", required=True)
    run.add_argument("--scenario", choices=pipeline.SCENARIOS)
    run.add_argument("--seed", type=int)
    run.add_argument("--backend")
    run.add_argument("--out", default="out")
    run.add_argument("--print-config", action="store_true")
    run.set_defaults(func=cmd_run)

    val = sub.add_parser("validate", help="check a corpus against an ontology")
    val.add_argument("corpus")
    val.add_argument("--ontology")
    val.set_defaults(func=cmd_validate)

    ev = sub.add_parser("eval", help="score predictions against gold")
    ev.add_argument("--gold", required=True)
    ev.add_argument("--pred", required=True)
    ev.add_argument("--token-level", action="store_true")
    ev.set_defaults(func=cmd_eval)

    st = sub.add_parser("stats", help="print corpus statistics")
    st.add_argument("corpus")
    st.set_defaults(func=cmd_stats)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
