"""Corpus file reading/writing and few-shot split sampling.

File layout: UTF-8, LF line endings, blocks separated by blank lines.
A paired block is ``# intent = <name>`` followed by ``token<TAB>tag`` lines.
An acts-only block is a single ``# act = <MR string>`` line. A block of
bare token lines (no header, no tag column) is an unlabeled utterance.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from .core import Corpus, LabeledExample, Utterance
from .metrics import extract_chunks
from .mr import parse_da, serialize_da

INTENT_HEADER = "# intent = "
ACT_HEADER = "# act = "


class FormatError(ValueError):
    def __init__(self, line_no: int, reason: str):
        super().__init__(f"line {line_no}: {reason}")
        self.line_no = line_no
        self.reason = reason


class InsufficientData(ValueError):
    pass


@dataclass(frozen=True)
class SplitSpec:
    fraction: Fraction
    seed: int
    dev_size: int = 0

    def __post_init__(self):
        object.__setattr__(self, "fraction", Fraction(self.fraction))
        if not 0 < self.fraction <= 1:
            raise ValueError("fraction must be in (0, 1]")
        if self.dev_size < 0:
            raise ValueError("dev_size must be >= 0")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")


def _parse_block(lines: list[tuple[int, str]]) -> tuple[str, object]:
    first_no, first = lines[0]
    if first.startswith(ACT_HEADER):
        if len(lines) > 1:
            raise FormatError(lines[1][0], "act block must be a single line")
        try:
            return "act", parse_da(first[len(ACT_HEADER) :])
        except ValueError as e:
            raise FormatError(first_no, f"bad MR string: {e}") from e

    intent = None
    body = lines
    if first.startswith(INTENT_HEADER):
        intent = first[len(INTENT_HEADER) :].strip()
        if not intent:
            raise FormatError(first_no, "empty intent header")
        body = lines[1:]
        if not body:
            raise FormatError(first_no, "intent header with no token lines")
    if any(line.startswith("#") for _, line in body):
        raise FormatError(body[0][0], "unexpected header line inside block")

    arities = {line.count("\t") for _, line in body}
    if len(arities) != 1:
        raise FormatError(body[0][0], "inconsistent column count within block")
    arity = arities.pop()
    if arity == 0:
        if intent is not None:
            raise FormatError(first_no, "paired block is missing the tag column")
        try:
            return "utterance", Utterance(tuple(line for _, line in body))
        except ValueError as e:
            raise FormatError(body[0][0], str(e)) from e
    if arity != 1:
        raise FormatError(body[0][0], f"expected 2 columns, found {arity + 1}")
    if intent is None:
        raise FormatError(first_no, "tagged block is missing the intent header")

    tokens, tags = [], []
    for no, line in body:
        token, tag = line.split("\t")
        if not token or not tag:
            raise FormatError(no, "empty token or tag field")
        tokens.append(token)
        tags.append(tag)
    try:
        return "paired", LabeledExample(Utterance(tuple(tokens)), intent, tuple(tags))
    except ValueError as e:
        raise FormatError(first_no, str(e)) from e


def parse_corpus(text: str) -> Corpus:
    paired, acts, utterances = [], [], []
    block: list[tuple[int, str]] = []
    for no, line in enumerate(text.split("\n"), start=1):
        if line.strip() == "":
            if block:
                kind, item = _parse_block(block)
                {"paired": paired, "act": acts, "utterance": utterances}[kind].append(item)
                block = []
        else:
            block.append((no, line))
    if block:
        kind, item = _parse_block(block)
        {"paired": paired, "act": acts, "utterance": utterances}[kind].append(item)
    return Corpus(tuple(paired), tuple(acts), tuple(utterances))


def load_corpus(path) -> Corpus:
    return parse_corpus(Path(path).read_text(encoding="utf-8"))


def emit_corpus(corpus: Corpus) -> str:
    blocks = []
    for ex in corpus.paired:
        lines = [f"{INTENT_HEADER}{ex.intent}"]
        lines += [f"{tok}\t{tag}" for tok, tag in zip(ex.utterance.tokens, ex.tags)]
        blocks.append("\n".join(lines))
    for act in corpus.acts_only:
        blocks.append(f"{ACT_HEADER}{serialize_da(act)}")
    for utt in corpus.utterances_only:
        blocks.append("\n".join(utt.tokens))
    return "\n\n".join(blocks) + ("\n" if blocks else "")


def save_corpus(corpus: Corpus, path) -> None:
    Path(path).write_text(emit_corpus(corpus), encoding="utf-8", newline="\n")


def round_half_up(x: Fraction) -> int:
    """Round to nearest integer, .5 rounds up."""
    return int(x + Fraction(1, 2)) if x >= 0 else -int(-x + Fraction(1, 2))


def sample_split(
    corpus: Corpus, spec: SplitSpec, stratify_by_intent: bool = False
) -> tuple[Corpus, Corpus]:
    """Seeded uniform sample without replacement into (train, dev) corpora.

    Train size is round-half-up of fraction * paired size; dev is drawn from
    the remainder. Uses the Mersenne Twister generator, so a fixed seed gives
    identical splits on every platform.
    """
    n = len(corpus.paired)
    train_size = round_half_up(Fraction(spec.fraction) * n)
    if n < train_size + spec.dev_size:
        raise InsufficientData(
            f"need {train_size} train + {spec.dev_size} dev, have {n} paired examples"
        )
    rng = random.Random(spec.seed)
    if stratify_by_intent:
        by_intent: dict[str, list[int]] = {}
        for i, ex in enumerate(corpus.paired):
            by_intent.setdefault(ex.intent, []).append(i)
        train_idx: list[int] = []
        quota = Fraction(train_size, n)
        for intent in sorted(by_intent):
            members = by_intent[intent]
            take = min(len(members), round_half_up(quota * len(members)))
            train_idx += rng.sample(members, take)
        # Top up or trim to hit the exact size deterministically.
        leftover = [i for i in range(n) if i not in set(train_idx)]
        while len(train_idx) > train_size:
            train_idx.pop()
        if len(train_idx) < train_size:
            train_idx += rng.sample(leftover, train_size - len(train_idx))
        train_idx = sorted(train_idx)
    else:
        train_idx = sorted(rng.sample(range(n), train_size))
    remainder = [i for i in range(n) if i not in set(train_idx)]
    dev_idx = sorted(rng.sample(remainder, spec.dev_size))
    train = Corpus(tuple(corpus.paired[i] for i in train_idx))
    dev = Corpus(tuple(corpus.paired[i] for i in dev_idx))
    return train, dev


def corpus_stats(corpus: Corpus) -> dict:
    """Counts plus the per-slot multiset of observed surface values."""
    intents = set()
    slot_labels = set()
    inventory: dict[str, dict[str, int]] = {}
    for ex in corpus.paired:
        intents.add(ex.intent)
        slot_labels |= ex.slot_labels()
        for label, start, end in extract_chunks(ex.tags):
            value = " ".join(ex.utterance.tokens[start:end])
            inventory.setdefault(label, {})
            inventory[label][value] = inventory[label].get(value, 0) + 1
    for act in corpus.acts_only:
        intents.add(act.intent)
        for sv in act.slots:
            slot_labels.add(sv.slot)
    return {
        "num_paired": len(corpus.paired),
        "num_acts": len(corpus.acts_only),
        "num_utterances": len(corpus.utterances_only),
        "num_intents": len(intents),
        "num_slot_labels": len(slot_labels),
        "value_inventory": inventory,
    }
