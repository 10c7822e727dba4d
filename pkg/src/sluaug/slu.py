"""Feature-based SLU learners: an averaged perceptron slot tagger with greedy
BIO-masked decoding and an averaged perceptron intent classifier.

Averaging follows the snapshot definition: the final weight for a feature is
the mean of its values across all per-example snapshots taken during
training, computed lazily with timestamp accumulators.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from pathlib import Path


def token_shape(token: str) -> str:
    shape = []
    for ch in token:
        if ch.isdigit():
            s = "d"
        elif ch.isalpha():
            s = "X" if ch.isupper() else "x"
        else:
            s = "-"
        if not shape or shape[-1] != s:
            shape.append(s)
    return "".join(shape)


def tagger_features(tokens, i: int, prev_tag: str) -> list[str]:
    tok = tokens[i]
    feats = [
        "bias",
        f"w={tok}",
        f"lw={tok.lower()}",
        f"shape={token_shape(tok)}",
        f"pt={prev_tag}",
        f"pt+lw={prev_tag}+{tok.lower()}",
        f"prev={tokens[i - 1].lower() if i > 0 else '<s>'}",
        f"next={tokens[i + 1].lower() if i + 1 < len(tokens) else '</s>'}",
    ]
    low = tok.lower()
    for n in (1, 2, 3):
        if len(low) > n:
            feats.append(f"pre{n}={low[:n]}")
            feats.append(f"suf{n}={low[-n:]}")
    return feats


def intent_features(tokens) -> list[str]:
    low = [t.lower() for t in tokens]
    feats = ["bias"] + [f"u={t}" for t in low]
    feats += [f"b={a}+{b}" for a, b in zip(low, low[1:])]
    return feats


class _AveragedWeights:
    """Sparse weights with lazy averaging over per-step snapshots."""

    def __init__(self):
        self.weights: dict[tuple[str, str], float] = {}
        self._totals: dict[tuple[str, str], float] = {}
        self._stamps: dict[tuple[str, str], int] = {}
        self.step = 0

    def update(self, key: tuple[str, str], delta: float) -> None:
        self._totals[key] = self._totals.get(key, 0.0) + (
            self.step - self._stamps.get(key, 0)
        ) * self.weights.get(key, 0.0)
        self._stamps[key] = self.step
        self.weights[key] = self.weights.get(key, 0.0) + delta

    def averaged(self) -> dict[tuple[str, str], float]:
        if self.step == 0:
            return dict(self.weights)
        out = {}
        for key, w in self.weights.items():
            total = self._totals.get(key, 0.0) + (self.step - self._stamps.get(key, 0)) * w
            if total:
                out[key] = total / self.step
        return out


def _score(weights, feats, label) -> float:
    return sum(weights.get((f, label), 0.0) for f in feats)


@dataclass
class TaggerModel:
    weights: dict[tuple[str, str], float]
    tags: tuple[str, ...]  # ordered, "O" first: the decode tie-break order


@dataclass
class IntentModel:
    weights: dict[tuple[str, str], float]
    intents: tuple[str, ...]  # sorted: the tie-break order


def _tag_order(examples) -> tuple[str, ...]:
    tags = {t for ex in examples for t in ex.tags}
    tags.discard("O")
    return ("O",) + tuple(sorted(tags))


def tag(model: TaggerModel, tokens) -> tuple[str, ...]:
    """Greedy left-to-right decode with BIO-validity masking."""
    return _decode(model.weights, model.tags, tokens)


def _decode(weights, tag_order, tokens) -> tuple[str, ...]:
    prev = "O"
    out = []
    for i in range(len(tokens)):
        feats = tagger_features(tokens, i, prev)
        best = None
        best_score = None
        for candidate in _allowed(tag_order, prev):
            s = _score(weights, feats, candidate)
            if best is None or s > best_score:
                best, best_score = candidate, s
        out.append(best)
        prev = best
    return tuple(out)


def _allowed(tag_order, prev_tag):
    for t in tag_order:
        if t.startswith("I-"):
            label = t[2:]
            if prev_tag not in (f"B-{label}", f"I-{label}"):
                continue
        yield t


def train_tagger(examples, epochs: int = 10, seed: int = 0, dev=None) -> TaggerModel:
    """Averaged structured perceptron trained with greedy decoding.

    When ``dev`` (a list of LabeledExample) is given, the averaged weights
    are evaluated on it after each epoch and the best-epoch model is
    returned; otherwise the final-epoch average is used.
    """
    from .metrics import slot_f1

    if not examples:
        raise ValueError("no training examples")
    tag_order = _tag_order(examples)
    acc = _AveragedWeights()
    rng = random.Random(seed)
    order = list(range(len(examples)))
    best = None
    best_score = None
    for _epoch in range(epochs):
        rng.shuffle(order)
        for idx in order:
            ex = examples[idx]
            tokens = ex.utterance.tokens
            prev = "O"
            for i, gold_tag in enumerate(ex.tags):
                feats = tagger_features(tokens, i, prev)
                pred = None
                pred_score = None
                for candidate in _allowed(tag_order, prev):
                    s = _score(acc.weights, feats, candidate)
                    if pred is None or s > pred_score:
                        pred, pred_score = candidate, s
                if pred != gold_tag:
                    for f in feats:
                        acc.update((f, gold_tag), 1.0)
                        acc.update((f, pred), -1.0)
                prev = pred  # condition on the model's own history
            acc.step += 1
        if dev:
            snapshot = acc.averaged()
            preds = [_decode(snapshot, tag_order, ex.utterance.tokens) for ex in dev]
            score = slot_f1(dev, preds).slot_f1
            if best_score is None or score > best_score:
                best, best_score = snapshot, score
    if dev and best is not None:
        return TaggerModel(best, tag_order)
    return TaggerModel(acc.averaged(), tag_order)


def classify(model: IntentModel, tokens) -> str:
    return classify_with_margin(model, tokens)[0]


def classify_with_margin(model: IntentModel, tokens) -> tuple[str, float]:
    """Predicted intent and its score margin over the runner-up."""
    feats = intent_features(tokens)
    scored = sorted(
        ((-_score(model.weights, feats, intent), intent) for intent in model.intents),
    )
    best = scored[0]
    margin = (scored[1][0] - best[0]) if len(scored) > 1 else float("inf")
    return best[1], margin


def train_intent(examples, epochs: int = 10, seed: int = 0, dev=None) -> IntentModel:
    """Multiclass averaged perceptron over unigram+bigram bag features."""
    if not examples:
        raise ValueError("no training examples")
    intents = tuple(sorted({ex.intent for ex in examples}))
    acc = _AveragedWeights()
    rng = random.Random(seed)
    order = list(range(len(examples)))
    best = None
    best_score = None
    for _epoch in range(epochs):
        rng.shuffle(order)
        for idx in order:
            ex = examples[idx]
            feats = intent_features(ex.utterance.tokens)
            pred = min(intents, key=lambda it: (-_score(acc.weights, feats, it), it))
            if pred != ex.intent:
                for f in feats:
                    acc.update((f, ex.intent), 1.0)
                    acc.update((f, pred), -1.0)
            acc.step += 1
        if dev:
            snapshot = acc.averaged()
            model = IntentModel(snapshot, intents)
            hits = sum(
                classify(model, ex.utterance.tokens) == ex.intent for ex in dev
            )
            score = hits / len(dev)
            if best_score is None or score > best_score:
                best, best_score = snapshot, score
    if dev and best is not None:
        return IntentModel(best, intents)
    return IntentModel(acc.averaged(), intents)


def save_model(weights: dict[tuple[str, str], float], path) -> None:
    """Sorted feature<TAB>label<TAB>weight lines; weights in repr form."""
    lines = [
        f"{feat}\t{label}\t{weight!r}"
        for (feat, label), weight in sorted(weights.items())
    ]
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")


def load_weights(path) -> dict[tuple[str, str], float]:
    weights = {}
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        feat, label, w = line.split("\t")
        weights[(feat, label)] = float(w)
    return weights
