"""Textual meaning-representation format for dialogue acts.

Canonical form: ``Intent ( slot1 = value1 ; slot2 = value2 )``. This string
shape is the payload format of the generator wire protocol. Parsing accepts
arbitrary whitespace around delimiters; serialization always emits single
spaces around them so output is byte-stable.
"""

from __future__ import annotations

from dataclasses import dataclass

from .core import DialogueAct, SlotValue


class MalformedMr(ValueError):
    """Raised when an MR string violates the grammar."""

    def __init__(self, position: int, reason: str):
        super().__init__(f"at {position}: {reason}")
        self.position = position
        self.reason = reason


@dataclass(frozen=True)
class MrGrammarConfig:
    pair_separator: str = ";"
    kv_separator: str = "="
    open_delim: str = "("
    close_delim: str = ")"

    def __post_init__(self):
        seps = (self.pair_separator, self.kv_separator, self.open_delim, self.close_delim)
        if len(set(seps)) != 4:
            raise ValueError("separators must be distinct")
        for s in seps:
            if len(s) != 1 or s.isalnum():
                raise ValueError(f"separator {s!r} must be a single non-alphanumeric char")


DEFAULT_GRAMMAR = MrGrammarConfig()


def serialize_da(da: DialogueAct, cfg: MrGrammarConfig = DEFAULT_GRAMMAR) -> str:
    if not da.slots:
        return f"{da.intent} {cfg.open_delim} {cfg.close_delim}"
    body = f" {cfg.pair_separator} ".join(
        f"{sv.slot} {cfg.kv_separator} {sv.value}" for sv in da.slots
    )
    return f"{da.intent} {cfg.open_delim} {body} {cfg.close_delim}"


def parse_da(text: str, cfg: MrGrammarConfig = DEFAULT_GRAMMAR) -> DialogueAct:
    open_pos = text.find(cfg.open_delim)
    if open_pos < 0:
        raise MalformedMr(len(text), f"no opening delimiter {cfg.open_delim!r}")
    intent = text[:open_pos].strip()
    if not intent:
        raise MalformedMr(0, "empty intent")
    close_pos = text.rfind(cfg.close_delim)
    if close_pos < open_pos:
        raise MalformedMr(len(text), f"no closing delimiter {cfg.close_delim!r}")
    if text[close_pos + 1 :].strip():
        raise MalformedMr(close_pos + 1, "trailing content after closing delimiter")
    body = text[open_pos + 1 : close_pos]
    if cfg.open_delim in body or cfg.close_delim in body:
        raise MalformedMr(open_pos + 1 + body.find(cfg.open_delim), "nested delimiter")

    pairs = []
    offset = open_pos + 1
    if body.strip():
        for chunk in body.split(cfg.pair_separator):
            eq = chunk.find(cfg.kv_separator)
            if eq < 0:
                raise MalformedMr(offset, f"missing {cfg.kv_separator!r} in pair {chunk.strip()!r}")
            slot = chunk[:eq].strip()
            value = chunk[eq + 1 :].strip()
            if not slot:
                raise MalformedMr(offset, "empty slot name")
            if not value:
                raise MalformedMr(offset + eq + 1, "empty value")
            pairs.append(SlotValue(slot, value))
            offset += len(chunk) + 1
    try:
        return DialogueAct(intent, tuple(pairs))
    except ValueError as e:
        raise MalformedMr(open_pos, str(e)) from e
