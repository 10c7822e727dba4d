"""Core domain model: dialogue acts, utterances, labeled examples, ontology.

All types are frozen dataclasses validated at construction; invalid inputs
raise ValueError. Instances are immutable and safe to share across workers.
"""

from __future__ import annotations

from dataclasses import dataclass, field

RESERVED_CHARS = set("();=")


def _check_identifier(name: str, what: str) -> None:
    if not name:
        raise ValueError(f"{what} must be non-empty")
    bad = RESERVED_CHARS & set(name)
    if bad:
        raise ValueError(f"{what} {name!r} contains reserved character(s) {sorted(bad)}")


@dataclass(frozen=True)
class SlotValue:
    """A slot label paired with its surface value."""

    slot: str
    value: str

    def __post_init__(self):
        _check_identifier(self.slot, "slot")
        value = " ".join(self.value.split())
        if not value:
            raise ValueError("value must be non-empty after trimming")
        bad = set("();") & set(value)
        if bad:
            raise ValueError(f"value {value!r} contains reserved character(s) {sorted(bad)}")
        object.__setattr__(self, "value", value)


@dataclass(frozen=True)
class DialogueAct:
    """An intent plus an ordered sequence of slot-value pairs."""

    intent: str
    slots: tuple[SlotValue, ...] = ()

    def __post_init__(self):
        _check_identifier(self.intent, "intent")
        object.__setattr__(self, "slots", tuple(self.slots))
        seen = set()
        for sv in self.slots:
            key = (sv.slot, sv.value)
            if key in seen:
                raise ValueError(f"duplicate slot-value pair {key}")
            seen.add(key)

    def signature(self) -> tuple[tuple[str, int], ...]:
        """Multiset of slot names, as a sorted (slot, count) tuple."""
        counts: dict[str, int] = {}
        for sv in self.slots:
            counts[sv.slot] = counts.get(sv.slot, 0) + 1
        return tuple(sorted(counts.items()))

    def canonical_key(self) -> tuple:
        """Equality key ignoring pair order and value case."""
        return (self.intent, frozenset((sv.slot, sv.value.lower()) for sv in self.slots))


@dataclass(frozen=True)
class Utterance:
    """A tokenized utterance plus its original raw string."""

    tokens: tuple[str, ...]
    raw: str = ""

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))
        if not self.tokens:
            raise ValueError("utterance must have at least one token")
        for tok in self.tokens:
            if not tok or any(c.isspace() for c in tok):
                raise ValueError(f"bad token {tok!r}: empty or contains whitespace")
        if not self.raw:
            object.__setattr__(self, "raw", " ".join(self.tokens))
        elif " ".join(self.raw.split()) != " ".join(self.tokens):
            raise ValueError("raw string does not normalize to the token sequence")

    @classmethod
    def from_text(cls, text: str) -> Utterance:
        return cls(tuple(text.split()), text)


def bio_violations(tags) -> list[str]:
    """Return a description per BIO well-formedness violation in ``tags``."""
    problems = []
    prev = "O"
    for i, tag in enumerate(tags):
        if tag == "O":
            prev = tag
            continue
        if len(tag) < 3 or tag[1] != "-" or tag[0] not in "BI":
            problems.append(f"position {i}: malformed tag {tag!r}")
            prev = "O"
            continue
        if tag[0] == "I":
            label = tag[2:]
            if prev not in (f"B-{label}", f"I-{label}"):
                problems.append(f"position {i}: {tag} not preceded by B-{label}/I-{label}")
        prev = tag
    return problems


@dataclass(frozen=True)
class LabeledExample:
    """An utterance with its intent and per-token BIO tags."""

    utterance: Utterance
    intent: str
    tags: tuple[str, ...]

    def __post_init__(self):
        _check_identifier(self.intent, "intent")
        object.__setattr__(self, "tags", tuple(self.tags))
        if len(self.tags) != len(self.utterance.tokens):
            raise ValueError(
                f"{len(self.tags)} tags for {len(self.utterance.tokens)} tokens"
            )
        problems = bio_violations(self.tags)
        if problems:
            raise ValueError("invalid BIO sequence: " + "; ".join(problems))

    def slot_labels(self) -> set[str]:
        return {t[2:] for t in self.tags if t != "O"}


@dataclass(frozen=True)
class Ontology:
    """Inventory of intents, slots, known values, and optional valid acts."""

    intents: frozenset[str]
    slots: frozenset[str]
    known_values: dict[str, frozenset[str]] = field(default_factory=dict)
    valid_acts: tuple[DialogueAct, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "intents", frozenset(self.intents))
        object.__setattr__(self, "slots", frozenset(self.slots))
        object.__setattr__(
            self, "known_values", {s: frozenset(vs) for s, vs in self.known_values.items()}
        )
        if self.valid_acts is not None:
            object.__setattr__(self, "valid_acts", tuple(self.valid_acts))
        for slot in self.known_values:
            if slot not in self.slots:
                raise ValueError(f"known_values slot {slot!r} not declared in slots")
        for act in self.valid_acts or ():
            if act.intent not in self.intents:
                raise ValueError(f"valid act intent {act.intent!r} not declared")
            for sv in act.slots:
                if sv.slot not in self.slots:
                    raise ValueError(f"valid act slot {sv.slot!r} not declared")


@dataclass(frozen=True)
class Corpus:
    """Paired examples plus optional acts-only and utterances-only sections."""

    paired: tuple[LabeledExample, ...] = ()
    acts_only: tuple[DialogueAct, ...] = ()
    utterances_only: tuple[Utterance, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "paired", tuple(self.paired))
        object.__setattr__(self, "acts_only", tuple(self.acts_only))
        object.__setattr__(self, "utterances_only", tuple(self.utterances_only))


def validate(corpus: Corpus, ontology: Ontology) -> list[str]:
    """Cross-check a corpus against an ontology.

    Returns one entry per violation; an empty list means consistent.
    Zero-slot acts are reported as informational notes, not violations.
    """
    problems = []
    for i, ex in enumerate(corpus.paired):
        if ex.intent not in ontology.intents:
            problems.append(f"paired[{i}]: unknown intent {ex.intent!r}")
        for label in sorted(ex.slot_labels()):
            if label not in ontology.slots:
                problems.append(f"paired[{i}]: unknown slot {label!r}")
        for problem in bio_violations(ex.tags):
            problems.append(f"paired[{i}]: {problem}")
    for i, act in enumerate(corpus.acts_only):
        if act.intent not in ontology.intents:
            problems.append(f"acts_only[{i}]: unknown intent {act.intent!r}")
        for sv in act.slots:
            if sv.slot not in ontology.slots:
                problems.append(f"acts_only[{i}]: unknown slot {sv.slot!r}")
        if not act.slots:
            problems.append(f"acts_only[{i}]: note: zero-slot act {act.intent}")
    return problems
