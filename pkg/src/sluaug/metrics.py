"""Chunk-level slot F1, intent accuracy, and paired significance testing."""

from __future__ import annotations

import math
from dataclasses import dataclass, field


class ArityMismatch(ValueError):
    pass


class DegenerateInput(ValueError):
    pass


def extract_chunks(tags) -> list[tuple[str, int, int]]:
    """Maximal B/I runs as (label, start, end) triples, end-exclusive.

    Tolerates ill-formed sequences the CoNLL way: a bare or mismatched I-
    starts a new chunk.
    """
    chunks = []
    start = None
    label = None
    for i, tag in enumerate(list(tags) + ["O"]):
        begins = tag.startswith("B-") or (tag.startswith("I-") and tag[2:] != label)
        if start is not None and (tag == "O" or begins):
            chunks.append((label, start, i))
            start = None
            label = None
        if start is None and tag != "O":
            start = i
            label = tag[2:]
    return chunks


@dataclass
class EvalReport:
    slot_precision: float = 0.0
    slot_recall: float = 0.0
    slot_f1: float = 0.0
    intent_accuracy: float = 0.0
    gold_chunks: int = 0
    predicted_chunks: int = 0
    correct_chunks: int = 0
    per_label: dict[str, dict[str, float]] = field(default_factory=dict)
    token_f1: float | None = None

    def as_lines(self) -> list[str]:
        lines = [
            f"slot_precision\t{self.slot_precision:.6f}",
            f"slot_recall\t{self.slot_recall:.6f}",
            f"slot_f1\t{self.slot_f1:.6f}",
            f"intent_accuracy\t{self.intent_accuracy:.6f}",
            f"gold_chunks\t{self.gold_chunks}",
            f"predicted_chunks\t{self.predicted_chunks}",
            f"correct_chunks\t{self.correct_chunks}",
        ]
        for label in sorted(self.per_label):
            stats = self.per_label[label]
            lines.append(
                f"label:{label}\t{stats['precision']:.6f}/{stats['recall']:.6f}/{stats['f1']:.6f}"
            )
        return lines


def _prf(correct: int, predicted: int, gold: int) -> tuple[float, float, float]:
    p = correct / predicted if predicted else 0.0
    r = correct / gold if gold else 0.0
    f = 2 * p * r / (p + r) if p + r else 0.0
    return p, r, f


def slot_f1(gold_examples, pred_tag_sequences, token_level: bool = False) -> EvalReport:
    """Micro-averaged exact-chunk F1 over a corpus.

    A predicted chunk is correct iff its (label, start, end) triple appears
    in the gold chunks of the same example.
    """
    if len(gold_examples) != len(pred_tag_sequences):
        raise ArityMismatch(
            f"{len(gold_examples)} gold examples vs {len(pred_tag_sequences)} predictions"
        )
    gold_total = pred_total = correct_total = 0
    by_label: dict[str, list[int]] = {}
    tok_gold = tok_pred = tok_correct = 0
    for ex, pred_tags in zip(gold_examples, pred_tag_sequences):
        gold_tags = ex.tags if hasattr(ex, "tags") else tuple(ex)
        if len(gold_tags) != len(pred_tags):
            raise ArityMismatch(f"{len(gold_tags)} gold tags vs {len(pred_tags)} predicted")
        gold_chunks = set(extract_chunks(gold_tags))
        pred_chunks = set(extract_chunks(pred_tags))
        gold_total += len(gold_chunks)
        pred_total += len(pred_chunks)
        correct_total += len(gold_chunks & pred_chunks)
        labels = {c[0] for c in gold_chunks | pred_chunks}
        for label in labels:
            g = {c for c in gold_chunks if c[0] == label}
            p = {c for c in pred_chunks if c[0] == label}
            acc = by_label.setdefault(label, [0, 0, 0])
            acc[0] += len(g & p)
            acc[1] += len(p)
            acc[2] += len(g)
        for gt, pt in zip(gold_tags, pred_tags):
            tok_gold += gt != "O"
            tok_pred += pt != "O"
            tok_correct += gt != "O" and gt == pt
    precision, recall, f1 = _prf(correct_total, pred_total, gold_total)
    report = EvalReport(
        slot_precision=precision,
        slot_recall=recall,
        slot_f1=f1,
        gold_chunks=gold_total,
        predicted_chunks=pred_total,
        correct_chunks=correct_total,
    )
    for label, (c, p, g) in by_label.items():
        lp, lr, lf = _prf(c, p, g)
        report.per_label[label] = {"precision": lp, "recall": lr, "f1": lf}
    if token_level:
        report.token_f1 = _prf(tok_correct, tok_pred, tok_gold)[2]
    return report


def intent_accuracy(gold_intents, pred_intents) -> float:
    if not gold_intents or len(gold_intents) != len(pred_intents):
        raise ArityMismatch(
            f"{len(gold_intents)} gold intents vs {len(pred_intents)} predictions"
        )
    hits = sum(g == p for g, p in zip(gold_intents, pred_intents))
    return hits / len(gold_intents)


def _betacf(a: float, b: float, x: float) -> float:
    # Continued fraction for the regularized incomplete beta (Lentz's method).
    tiny = 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for m in range(1, 300):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-12:
            break
    return h


def _betainc(a: float, b: float, x: float) -> float:
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    ln_front = (
        math.lgamma(a + b)
        - math.lgamma(a)
        - math.lgamma(b)
        + a * math.log(x)
        + b * math.log(1.0 - x)
    )
    front = math.exp(ln_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def student_t_sf2(t: float, df: float) -> float:
    """Two-sided tail probability of Student's t; accurate to >= 6 digits."""
    x = df / (df + t * t)
    return _betainc(df / 2.0, 0.5, x)


def paired_t_test(scores_a, scores_b) -> tuple[float, float]:
    """Classic paired t-test; returns (t statistic, two-sided p-value)."""
    if len(scores_a) != len(scores_b):
        raise ArityMismatch(f"{len(scores_a)} vs {len(scores_b)} scores")
    n = len(scores_a)
    if n < 2:
        raise ArityMismatch("need at least 2 score pairs")
    diffs = [a - b for a, b in zip(scores_a, scores_b)]
    mean = sum(diffs) / n
    var = sum((d - mean) ** 2 for d in diffs) / (n - 1)
    if var == 0.0:
        raise DegenerateInput("all score differences are identical")
    t = mean / math.sqrt(var / n)
    return t, student_t_sf2(t, n - 1)
