"""Deterministic desk-scale benchmark domain.

Three intents, six slots, utterances drawn from a hidden template grammar.
The Small training split sees only 70% of each slot's value inventory; the
ontology's valid acts and the unlabeled pool draw from the full inventory,
so the ontology and utterance regimes carry genuinely new information.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .core import Corpus, DialogueAct, LabeledExample, Ontology, SlotValue, Utterance

VALUES: dict[str, list[str]] = {
    "restaurant_type": [
        "bistro", "diner", "pub", "steakhouse", "pizzeria",
        "cafe", "brasserie", "taverna", "grill", "bakery",
    ],
    "city": [
        "new york", "los angeles", "boston", "denver", "paris",
        "tokyo", "oslo", "madrid", "berlin", "dublin",
        "cairo", "lima", "vienna", "prague", "sydney",
        "mumbai", "toronto", "seattle", "austin", "miami",
    ],
    "party_size": ["2", "3", "4", "5", "6", "7", "8", "9", "10", "12"],
    "artist": [
        "metallica", "adele", "coldplay", "queen", "the beatles",
        "daft punk", "miles davis", "nina simone", "bob dylan", "radiohead",
        "beyonce", "drake", "abba", "gorillaz", "santana",
        "the rolling stones", "norah jones", "elvis presley", "dua lipa", "kraftwerk",
    ],
    "genre": [
        "jazz", "rock", "metal", "pop", "blues",
        "folk", "techno", "classical", "reggae", "country",
    ],
    "date": [
        "today", "tomorrow", "monday", "tuesday", "wednesday",
        "thursday", "friday", "saturday", "sunday", "tonight",
    ],
}

TEMPLATES: dict[str, list[str]] = {
    "BookRestaurant": [
        "book a table for <party_size> at a <restaurant_type> in <city>",
        "i need a <restaurant_type> in <city> for <party_size> people",
        "find me a <restaurant_type> in <city>",
        "reserve a table for <party_size> at the nearest <restaurant_type>",
        "get me a spot in <city> for <party_size>",
        "book the best <restaurant_type> around",
    ],
    "PlayMusic": [
        "play some <genre> by <artist>",
        "play <artist> right now",
        "i want to hear <genre> music",
        "put on <artist> and turn it up",
        "queue up some <genre>",
        "let me listen to <artist>",
    ],
    "GetWeather": [
        "what is the weather in <city> <date>",
        "will it rain in <city> <date>",
        "give me the forecast for <city>",
        "how cold is it in <city> <date>",
        "tell me the weather for <date>",
        "is it sunny in <city>",
    ],
}

SEEN_FRACTION = 0.7


def template_slots(template: str) -> list[str]:
    return [tok[1:-1] for tok in template.split() if tok.startswith("<") and tok.endswith(">")]


def _fill(template: str, values: dict[str, str]) -> tuple[tuple[str, ...], tuple[str, ...]]:
    tokens: list[str] = []
    tags: list[str] = []
    for tok in template.split():
        if tok.startswith("<") and tok.endswith(">"):
            slot = tok[1:-1]
            parts = values[slot].split()
            tokens.extend(parts)
            tags.append(f"B-{slot}")
            tags.extend(f"I-{slot}" for _ in parts[1:])
        else:
            tokens.append(tok)
            tags.append("O")
    return tuple(tokens), tuple(tags)


def make_example(intent: str, template: str, chosen: dict[str, str]) -> LabeledExample:
    tokens, tags = _fill(template, chosen)
    return LabeledExample(Utterance(tokens), intent, tags)


def seen_values() -> dict[str, list[str]]:
    return {
        slot: vals[: int(len(vals) * SEEN_FRACTION)] for slot, vals in VALUES.items()
    }


def _sample_example(rng: random.Random, pools: dict[str, list[str]]) -> LabeledExample:
    intent = rng.choice(sorted(TEMPLATES))
    template = rng.choice(TEMPLATES[intent])
    chosen = {slot: rng.choice(pools[slot]) for slot in sorted(set(template_slots(template)))}
    return make_example(intent, template, chosen)


def _sample_many(rng, pools, n: int) -> list[LabeledExample]:
    out = []
    seen = set()
    while len(out) < n:
        ex = _sample_example(rng, pools)
        key = ex.utterance.tokens
        if key in seen:
            continue
        seen.add(key)
        out.append(ex)
    return out


@dataclass
class ToyBenchmark:
    train: Corpus  # Small split plus the unlabeled pool
    dev: Corpus
    test: Corpus
    ontology: Ontology


def build_toy_benchmark(
    seed: int = 7,
    train_size: int = 40,
    dev_size: int = 100,
    test_size: int = 300,
    unlabeled_size: int = 1000,
    ontology_acts: int = 500,
) -> ToyBenchmark:
    rng = random.Random(seed)
    seen = seen_values()

    # Small split covers every intent/template at least once where possible.
    train = _sample_many(rng, seen, train_size)
    dev = _sample_many(rng, VALUES, dev_size)
    test = _sample_many(rng, VALUES, test_size)
    unlabeled = [
        _sample_example(rng, VALUES).utterance for _ in range(unlabeled_size)
    ]

    acts: list[DialogueAct] = []
    keys = set()
    while len(acts) < ontology_acts:
        intent = rng.choice(sorted(TEMPLATES))
        template = rng.choice(TEMPLATES[intent])
        slots = sorted(set(template_slots(template)))
        pairs = tuple(SlotValue(s, rng.choice(VALUES[s])) for s in slots)
        act = DialogueAct(intent, pairs)
        if act.canonical_key() in keys:
            continue
        keys.add(act.canonical_key())
        acts.append(act)

    ontology = Ontology(
        intents=frozenset(TEMPLATES),
        slots=frozenset(VALUES),
        known_values={s: frozenset(vs) for s, vs in VALUES.items()},
        valid_acts=tuple(acts),
    )
    return ToyBenchmark(
        train=Corpus(tuple(train), (), tuple(unlabeled)),
        dev=Corpus(tuple(dev)),
        test=Corpus(tuple(test)),
        ontology=ontology,
    )
