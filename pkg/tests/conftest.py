import itertools
import random
import string

import pytest

from sluaug.core import DialogueAct, SlotValue, Utterance

IDENT_CHARS = string.ascii_letters + string.digits + "_"
VALUE_CHARS = string.ascii_letters + string.digits + "_-'&="


def random_identifier(rng: random.Random, max_len: int = 10) -> str:
    return "".join(rng.choice(IDENT_CHARS) for _ in range(rng.randint(1, max_len)))


def random_value(rng: random.Random, max_words: int = 3) -> str:
    words = [
        "".join(rng.choice(VALUE_CHARS) for _ in range(rng.randint(1, 8)))
        for _ in range(rng.randint(1, max_words))
    ]
    return " ".join(words)


def random_da(rng: random.Random, max_slots: int = 5) -> DialogueAct:
    intent = random_identifier(rng)
    pairs = []
    seen = set()
    for _ in range(rng.randint(0, max_slots)):
        sv = SlotValue(random_identifier(rng), random_value(rng))
        if (sv.slot, sv.value) in seen:
            continue
        seen.add((sv.slot, sv.value))
        pairs.append(sv)
    return DialogueAct(intent, tuple(pairs))


def brute_force_assignment_exists(utterance: Utterance, da: DialogueAct, policy) -> bool:
    """Oracle: try every combination of matching spans for non-overlap."""
    from sluaug.align import _all_spans

    span_lists = []
    for sv in da.slots:
        spans = _all_spans(utterance.tokens, sv.value, policy)
        if not spans:
            return False
        span_lists.append(spans)
    for combo in itertools.product(*span_lists):
        ok = True
        for i in range(len(combo)):
            for j in range(i + 1, len(combo)):
                a, b = combo[i], combo[j]
                if a[0] < b[1] and b[0] < a[1]:
                    ok = False
                    break
            if not ok:
                break
        if ok:
            return True
    return False


@pytest.fixture
def rng():
    return random.Random(12345)
