"""Slot-value span matching, BIO labeling, and the coverage filter.

Matching is token-level: a value matches a contiguous token interval whose
normalized join equals the normalized value. Assigning spans to the values
of a dialogue act is exact: values are tried longest-first (ties by slot
name, then value), each value's candidate spans leftmost-first, with
backtracking, so the filter answers feasibility precisely and the chosen
assignment is deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass

from .core import DialogueAct, LabeledExample, SlotValue, Utterance

_TRAILING_PUNCT = ".,!?"


@dataclass(frozen=True)
class MatchPolicy:
    case_insensitive: bool = True
    punctuation_stripping: bool = True

    def norm_token(self, token: str) -> str:
        if self.punctuation_stripping:
            stripped = token.rstrip(_TRAILING_PUNCT)
            if stripped:
                token = stripped
        if self.case_insensitive:
            token = token.lower()
        return token

    def norm_value(self, value: str) -> tuple[str, ...]:
        return tuple(self.norm_token(t) for t in value.split())


DEFAULT_POLICY = MatchPolicy()


class AlignmentFailed(ValueError):
    """Raised when a dialogue act cannot be aligned to an utterance."""

    def __init__(self, missing: list[SlotValue]):
        desc = ", ".join(f"{sv.slot}={sv.value}" for sv in missing)
        super().__init__(f"unalignable slot values: {desc}")
        self.missing = list(missing)


def _all_spans(tokens, value: str, policy: MatchPolicy) -> list[tuple[int, int]]:
    target = policy.norm_value(value)
    width = len(target)
    if width == 0 or width > len(tokens):
        return []
    normed = [policy.norm_token(t) for t in tokens]
    return [
        (i, i + width)
        for i in range(len(tokens) - width + 1)
        if tuple(normed[i : i + width]) == target
    ]


def find_span(tokens, value: str, policy: MatchPolicy = DEFAULT_POLICY):
    """Leftmost token interval matching ``value``, or None."""
    spans = _all_spans(tokens, value, policy)
    return spans[0] if spans else None


def _assignment_order(da: DialogueAct) -> list[SlotValue]:
    # Longest value first, ties by slot name then value: deterministic.
    return sorted(da.slots, key=lambda sv: (-len(sv.value.split()), sv.slot, sv.value))


def assign_spans(utterance: Utterance, da: DialogueAct, policy: MatchPolicy = DEFAULT_POLICY):
    """Non-overlapping span per slot-value pair, or None if infeasible.

    Returns a map from position in ``da.slots`` to a (start, end) interval.
    The first feasible assignment in the deterministic search order is the
    one returned, which coincides with greedy leftmost whenever greedy works.
    """
    order = _assignment_order(da)
    candidates = []
    for sv in order:
        spans = _all_spans(utterance.tokens, sv.value, policy)
        if not spans:
            return None
        candidates.append(spans)

    chosen: list[tuple[int, int]] = []

    def overlaps(a, b):
        return a[0] < b[1] and b[0] < a[1]

    def search(k: int) -> bool:
        if k == len(order):
            return True
        for span in candidates[k]:
            if all(not overlaps(span, prev) for prev in chosen):
                chosen.append(span)
                if search(k + 1):
                    return True
                chosen.pop()
        return False

    if not search(0):
        return None
    by_index = {}
    used = set()
    for sv, span in zip(order, chosen):
        for i, orig in enumerate(da.slots):
            if i not in used and orig == sv:
                by_index[i] = span
                used.add(i)
                break
    return by_index


def contains_all_values(
    utterance: Utterance, da: DialogueAct, policy: MatchPolicy = DEFAULT_POLICY
) -> bool:
    """Coverage filter: every value has a span in a non-overlapping assignment."""
    return assign_spans(utterance, da, policy) is not None


def label_with_da(
    utterance: Utterance, da: DialogueAct, policy: MatchPolicy = DEFAULT_POLICY
) -> LabeledExample:
    """Convert an aligned (utterance, act) pair to a BIO-labeled example."""
    assignment = assign_spans(utterance, da, policy)
    if assignment is None:
        missing = [
            sv for sv in da.slots if not _all_spans(utterance.tokens, sv.value, policy)
        ]
        raise AlignmentFailed(missing or list(da.slots))
    tags = ["O"] * len(utterance.tokens)
    for i, sv in enumerate(da.slots):
        start, end = assignment[i]
        tags[start] = f"B-{sv.slot}"
        for t in range(start + 1, end):
            tags[t] = f"I-{sv.slot}"
    return LabeledExample(utterance, da.intent, tuple(tags))


def da_from_labeled(example: LabeledExample) -> DialogueAct:
    """Recover a dialogue act from BIO tags, one pair per chunk, left to right."""
    pairs = []
    start = None
    label = None
    tokens = example.utterance.tokens
    for i, tag in enumerate(list(example.tags) + ["O"]):
        starts_new = tag.startswith("B-") or tag == "O" or (label and tag[2:] != label)
        if start is not None and starts_new:
            sv = SlotValue(label, " ".join(tokens[start:i]))
            if sv not in pairs:  # exact duplicate chunks collapse to one pair
                pairs.append(sv)
            start = None
            label = None
        if tag.startswith("B-"):
            start = i
            label = tag[2:]
    return DialogueAct(example.intent, tuple(pairs))
