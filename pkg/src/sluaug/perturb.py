"""Dialogue-act expansion by replacing, inserting, and deleting slot values."""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .align import da_from_labeled
from .core import Corpus, DialogueAct, Ontology, SlotValue

OPERATIONS = ("replace", "insert", "delete")


class NoValidPerturbation(ValueError):
    pass


@dataclass(frozen=True)
class PerturbConfig:
    op_weights: tuple[float, float, float] = (0.5, 0.3, 0.2)
    min_slots: int = 1
    max_slots: int = 8
    target_count: int = 300
    max_attempts: int | None = None  # defaults to 50 * target_count
    seed: int = 0

    def __post_init__(self):
        if any(w < 0 for w in self.op_weights):
            raise ValueError("operation weights must be non-negative")
        if abs(sum(self.op_weights) - 1.0) > 1e-9:
            raise ValueError("operation weights must sum to 1")
        if self.min_slots > self.max_slots:
            raise ValueError("min_slots must not exceed max_slots")
        if self.max_attempts is None:
            object.__setattr__(self, "max_attempts", 50 * self.target_count)


def observed_slots_by_intent(
    corpus: Corpus, ontology: Ontology | None = None
) -> dict[str, set[str]]:
    """Slots co-observed with each intent in paired data and valid acts."""
    by_intent: dict[str, set[str]] = {}
    for ex in corpus.paired:
        by_intent.setdefault(ex.intent, set()).update(ex.slot_labels())
    if ontology is not None:
        for act in ontology.valid_acts or ():
            by_intent.setdefault(act.intent, set()).update(sv.slot for sv in act.slots)
    return by_intent


def merged_value_inventory(
    value_inventory: dict[str, dict[str, int]], ontology: Ontology | None = None
) -> dict[str, list[str]]:
    """Observed values plus ontology known_values, sorted per slot."""
    merged: dict[str, set[str]] = {s: set(vs) for s, vs in value_inventory.items()}
    if ontology is not None:
        for slot, values in ontology.known_values.items():
            merged.setdefault(slot, set()).update(values)
    return {slot: sorted(vals) for slot, vals in merged.items()}


def _applicable_ops(da, slots_for_intent, inventory, cfg) -> list[str]:
    ops = []
    present = {sv.slot for sv in da.slots}
    replaceable = any(
        len(set(inventory.get(sv.slot, ())) - {sv.value}) > 0 for sv in da.slots
    )
    if replaceable:
        ops.append("replace")
    insertable = [
        s for s in slots_for_intent - present if inventory.get(s)
    ]
    if insertable and len(da.slots) < cfg.max_slots:
        ops.append("insert")
    if len(da.slots) > cfg.min_slots:
        ops.append("delete")
    return ops


def perturb_da(
    da: DialogueAct,
    slots_for_intent: set[str],
    inventory: dict[str, list[str]],
    rng: random.Random,
    cfg: PerturbConfig,
    force_op: str | None = None,
) -> DialogueAct:
    """Apply exactly one replace/insert/delete operation; intent is kept."""
    applicable = _applicable_ops(da, slots_for_intent, inventory, cfg)
    if force_op is not None:
        applicable = [op for op in applicable if op == force_op]
    if not applicable:
        raise NoValidPerturbation(f"no applicable operation for {da.intent}")
    weights = [cfg.op_weights[OPERATIONS.index(op)] for op in applicable]
    if sum(weights) == 0:
        weights = [1.0] * len(applicable)
    op = rng.choices(applicable, weights=weights, k=1)[0]

    pairs = list(da.slots)
    if op == "replace":
        candidates = [
            i
            for i, sv in enumerate(pairs)
            if set(inventory.get(sv.slot, ())) - {sv.value}
        ]
        i = rng.choice(candidates)
        alternatives = sorted(set(inventory[pairs[i].slot]) - {pairs[i].value})
        pairs[i] = SlotValue(pairs[i].slot, rng.choice(alternatives))
    elif op == "insert":
        present = {sv.slot for sv in pairs}
        slot = rng.choice(sorted(s for s in slots_for_intent - present if inventory.get(s)))
        value = rng.choice(sorted(inventory[slot]))
        pairs.insert(rng.randint(0, len(pairs)), SlotValue(slot, value))
    else:
        pairs.pop(rng.randrange(len(pairs)))
    try:
        return DialogueAct(da.intent, tuple(pairs))
    except ValueError as e:
        raise NoValidPerturbation(str(e)) from e


@dataclass
class ExpansionResult:
    acts: list[DialogueAct]
    attempts: int
    requested: int

    @property
    def shortfall(self) -> int:
        return max(0, self.requested - len(self.acts))


def expand_acts(
    corpus: Corpus, ontology: Ontology | None, cfg: PerturbConfig
) -> ExpansionResult:
    """Produce up to target_count new dialogue acts absent from training data.

    Each new act is the source act perturbed by one or two chained operations
    (choice seeded). Dedup key ignores pair order and value case.
    """
    source_acts = [da_from_labeled(ex) for ex in corpus.paired]
    if not source_acts:
        raise ValueError("corpus has no paired examples to perturb")
    inventory: dict[str, dict[str, int]] = {}
    for act in source_acts:
        for sv in act.slots:
            inventory.setdefault(sv.slot, {})
            inventory[sv.slot][sv.value] = inventory[sv.slot].get(sv.value, 0) + 1
    merged = merged_value_inventory(inventory, ontology)
    by_intent = observed_slots_by_intent(corpus, ontology)

    rng = random.Random(cfg.seed)
    known = {act.canonical_key() for act in source_acts}
    emitted: list[DialogueAct] = []
    attempts = 0
    while len(emitted) < cfg.target_count and attempts < cfg.max_attempts:
        attempts += 1
        source = rng.choice(source_acts)
        chain = rng.choice((1, 2))
        candidate = source
        try:
            for _ in range(chain):
                candidate = perturb_da(
                    candidate, by_intent.get(candidate.intent, set()), merged, rng, cfg
                )
        except NoValidPerturbation:
            continue
        key = candidate.canonical_key()
        if key in known:
            continue
        known.add(key)
        emitted.append(candidate)
    return ExpansionResult(emitted, attempts, cfg.target_count)
