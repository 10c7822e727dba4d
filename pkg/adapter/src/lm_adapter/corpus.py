"""Minimal reader for the blank-line-separated training corpus format.

Only paired blocks (``# intent = X`` followed by ``token<TAB>tag`` lines) are
used for finetuning; act-only and utterance-only blocks are skipped.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path


class CorpusError(ValueError):
    pass


@dataclass(frozen=True)
class Pair:
    utterance: str  # space-joined tokens
    act: str  # textual dialogue-act form


def _chunks(tags: list[str]) -> list[tuple[str, int, int]]:
    out = []
    i = 0
    while i < len(tags):
        if tags[i] == "O":
            i += 1
            continue
        label = tags[i][2:]
        j = i + 1
        while j < len(tags) and tags[j] == f"I-{label}":
            j += 1
        out.append((label, i, j))
        i = j
    return out


def render_act(intent: str, tokens: list[str], tags: list[str]) -> str:
    pairs = [
        f"{label} = {' '.join(tokens[start:end])}"
        for label, start, end in _chunks(tags)
    ]
    return f"{intent} ( {' ; '.join(pairs)} )" if pairs else f"{intent} ( )"


def read_pairs(path: str | Path) -> list[Pair]:
    text = Path(path).read_text(encoding="utf-8")
    pairs: list[Pair] = []
    for block in text.split("\n\n"):
        lines = [line for line in block.splitlines() if line.strip()]
        if not lines or not lines[0].startswith("# intent ="):
            continue
        intent = lines[0].partition("=")[2].strip()
        tokens, tags = [], []
        for line in lines[1:]:
            token, sep, tag = line.partition("\t")
            if not sep:
                raise CorpusError(f"expected 'token<TAB>tag', got {line!r}")
            tokens.append(token)
            tags.append(tag)
        if not tokens:
            raise CorpusError(f"paired block for {intent!r} has no tokens")
        pairs.append(Pair(" ".join(tokens), render_act(intent, tokens, tags)))
    if not pairs:
        raise CorpusError(f"{path}: no paired examples found")
    return pairs
