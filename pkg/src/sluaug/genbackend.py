"""Generator backends: DA-to-utterance generation and utterance-to-DA labeling.

Three backend flavors share one interface:

* the builtin template generator, trained by delexicalizing paired data;
* external processes/sockets speaking a line protocol (``exec:`` / ``tcp:``);
* fixture tables replaying recorded request/response pairs (``fixture:``).

Wire protocol (UTF-8, LF): request ``REQ <id> <direction>`` followed by one
payload line; response ``RES <id> <k>`` followed by k payload lines, or
``ERR <id> <reason>``. Ids increase monotonically per connection. NLG
payloads are MR strings in, utterances out; NLU is the reverse.
"""

from __future__ import annotations

import random
import shlex
import socket
import subprocess
from dataclasses import dataclass, field

from .align import MatchPolicy, DEFAULT_POLICY, find_span
from .core import DialogueAct, LabeledExample, Ontology, SlotValue, Utterance
from .metrics import extract_chunks


class NoTemplateForIntent(LookupError):
    pass


class ProtocolError(RuntimeError):
    pass


class BackendUnavailable(RuntimeError):
    pass


class PartialResponse(RuntimeError):
    def __init__(self, requested: int, received: int):
        super().__init__(f"requested {requested} samples, received {received}")
        self.requested = requested
        self.received = received


class UnknownIntent(LookupError):
    pass


class NoEvidence(ValueError):
    pass


@dataclass(frozen=True)
class DecodingParams:
    top_p: float = 0.9
    temperature: float = 1.0
    samples_per_input: int = 3

    def __post_init__(self):
        if not 0 < self.top_p <= 1:
            raise ValueError("top_p must be in (0, 1]")
        if self.temperature <= 0:
            raise ValueError("temperature must be positive")
        if self.samples_per_input < 1:
            raise ValueError("samples_per_input must be >= 1")


# --------------------------------------------------------------------------
# Builtin template backend
# --------------------------------------------------------------------------

Signature = tuple[tuple[str, int], ...]


@dataclass
class TemplateModel:
    """Delexicalized templates keyed by (intent, slot-multiset signature).

    Template token sequences use ``<slot>`` placeholders; duplicates are kept
    with counts and the count is the sampling weight.
    """

    templates: dict[tuple[str, Signature], dict[tuple[str, ...], int]] = field(
        default_factory=dict
    )

    def intents(self) -> set[str]:
        return {intent for intent, _ in self.templates}


def delexicalize(example: LabeledExample) -> tuple[str, ...]:
    out = []
    chunk_start = {start: label for label, start, end in extract_chunks(example.tags)}
    chunk_end = {start: end for _, start, end in extract_chunks(example.tags)}
    i = 0
    tokens = example.utterance.tokens
    while i < len(tokens):
        if i in chunk_start:
            out.append(f"<{chunk_start[i]}>")
            i = chunk_end[i]
        else:
            out.append(tokens[i])
            i += 1
    return tuple(out)


def train_template_generator(paired) -> TemplateModel:
    """Delexicalize every paired example and bucket templates by signature."""
    if not paired:
        raise ValueError("no paired examples to train on")
    model = TemplateModel()
    for ex in paired:
        template = delexicalize(ex)
        counts: dict[str, int] = {}
        for label, _, _ in extract_chunks(ex.tags):
            counts[label] = counts.get(label, 0) + 1
        signature: Signature = tuple(sorted(counts.items()))
        bucket = model.templates.setdefault((ex.intent, signature), {})
        bucket[template] = bucket.get(template, 0) + 1
    return model


def _signature_distance(a: Signature, b: Signature) -> int:
    ca, cb = dict(a), dict(b)
    keys = set(ca) | set(cb)
    return sum(abs(ca.get(k, 0) - cb.get(k, 0)) for k in keys)


def _candidate_templates(model: TemplateModel, da: DialogueAct):
    sig = da.signature()
    exact = model.templates.get((da.intent, sig))
    if exact:
        return exact
    same_intent = [
        (s, bucket) for (intent, s), bucket in model.templates.items() if intent == da.intent
    ]
    if not same_intent:
        raise NoTemplateForIntent(da.intent)
    best = min(_signature_distance(sig, s) for s, _ in same_intent)
    merged: dict[tuple[str, ...], int] = {}
    for s, bucket in same_intent:
        if _signature_distance(sig, s) == best:
            for template, count in bucket.items():
                merged[template] = max(merged.get(template, 0), count)
    return merged


def relexicalize(template: tuple[str, ...], da: DialogueAct) -> Utterance:
    """Fill ``<slot>`` placeholders with the act's values in pair order.

    Placeholders with no remaining value are dropped; act values with no
    placeholder are simply absent and fail the coverage filter downstream.
    """
    queues: dict[str, list[str]] = {}
    for sv in da.slots:
        queues.setdefault(sv.slot, []).append(sv.value)
    out: list[str] = []
    for tok in template:
        if tok.startswith("<") and tok.endswith(">"):
            slot = tok[1:-1]
            if queues.get(slot):
                out.extend(queues[slot].pop(0).split())
        else:
            out.append(tok)
    if not out:
        out = ["."]  # degenerate all-placeholder template with nothing to fill
    return Utterance(tuple(out))


def generate(
    model: TemplateModel, da: DialogueAct, params: DecodingParams, rng: random.Random
) -> list[Utterance]:
    """Sample samples_per_input template fills for one dialogue act.

    Template choice is frequency-weighted; top_p/temperature do not apply to
    the template backend and are ignored here.
    """
    bucket = _candidate_templates(model, da)
    templates = sorted(bucket.items())  # deterministic order for the rng
    weights = [count for _, count in templates]
    picks = rng.choices([t for t, _ in templates], weights=weights, k=params.samples_per_input)
    return [relexicalize(t, da) for t in picks]


# --------------------------------------------------------------------------
# External wire protocol
# --------------------------------------------------------------------------

NLG, NLU = "nlg", "nlu"


class _LineChannel:
    """Request/response framing over a pair of text streams."""

    def __init__(self, reader, writer):
        self.reader = reader
        self.writer = writer
        self.next_id = 1

    def roundtrip(self, direction: str, payload: str, k: int) -> list[str]:
        if "\n" in payload:
            raise ProtocolError("payload must be a single line")
        req_id = self.next_id
        self.next_id += 1
        self.writer.write(f"REQ {req_id} {direction}\n{payload}\n")
        self.writer.flush()
        header = self.reader.readline()
        if header == "":
            raise BackendUnavailable("backend closed the stream")
        parts = header.rstrip("\n").split(" ", 2)
        if parts[0] == "ERR":
            raise ProtocolError(f"backend error: {parts[2] if len(parts) > 2 else '?'}")
        if len(parts) != 3 or parts[0] != "RES":
            raise ProtocolError(f"malformed response header {header!r}")
        if parts[1] != str(req_id):
            raise ProtocolError(f"response id {parts[1]} does not match request {req_id}")
        try:
            n = int(parts[2])
        except ValueError:
            raise ProtocolError(f"bad sample count {parts[2]!r}") from None
        outputs = []
        for _ in range(n):
            line = self.reader.readline()
            if line == "":
                raise BackendUnavailable("stream closed mid-response")
            outputs.append(line.rstrip("\n"))
        if n < k:
            raise PartialResponse(k, n)
        return outputs[:k]


@dataclass
class ExternalEndpoint:
    """Handle to an ``exec:<cmd>`` or ``tcp:<host:port>`` backend."""

    spec: str
    timeout: float = 60.0
    _channel: _LineChannel | None = None
    _proc: subprocess.Popen | None = None
    _sock: socket.socket | None = None

    def _connect(self) -> _LineChannel:
        if self._channel is not None:
            return self._channel
        if self.spec.startswith("exec:"):
            cmd = shlex.split(self.spec[len("exec:") :])
            try:
                self._proc = subprocess.Popen(
                    cmd,
                    stdin=subprocess.PIPE,
                    stdout=subprocess.PIPE,
                    text=True,
                    bufsize=1,
                )
            except OSError as e:
                raise BackendUnavailable(f"cannot spawn {cmd!r}: {e}") from e
            self._channel = _LineChannel(self._proc.stdout, self._proc.stdin)
        elif self.spec.startswith("tcp:"):
            host, _, port = self.spec[len("tcp:") :].rpartition(":")
            try:
                self._sock = socket.create_connection((host, int(port)), timeout=self.timeout)
            except OSError as e:
                raise BackendUnavailable(f"cannot connect to {self.spec}: {e}") from e
            f = self._sock.makefile("rw", encoding="utf-8", newline="\n")
            self._channel = _LineChannel(f, f)
        else:
            raise ValueError(f"unsupported endpoint spec {self.spec!r}")
        return self._channel

    def close(self) -> None:
        if self._proc is not None:
            self._proc.stdin.close()
            self._proc.wait(timeout=10)
            self._proc = None
        if self._sock is not None:
            self._sock.close()
            self._sock = None
        self._channel = None


def external_call(
    endpoint: ExternalEndpoint, direction: str, inputs, params: DecodingParams
) -> list[list[str]]:
    """One request per input; output batch i corresponds to input i."""
    if direction not in (NLG, NLU):
        raise ValueError(f"direction must be {NLG!r} or {NLU!r}")
    channel = endpoint._connect()
    return [
        channel.roundtrip(direction, text, params.samples_per_input) for text in inputs
    ]


@dataclass
class FixtureBackend:
    """Recorded request-to-responses table for deterministic tests.

    Fixture file format: blocks separated by blank lines; first line
    ``<direction><TAB><input>``, remaining lines one output each.
    """

    table: dict[tuple[str, str], list[str]]

    @classmethod
    def load(cls, path) -> FixtureBackend:
        from pathlib import Path

        table: dict[tuple[str, str], list[str]] = {}
        block: list[str] = []
        for line in Path(path).read_text(encoding="utf-8").split("\n") + [""]:
            if line.strip() == "":
                if block:
                    direction, _, payload = block[0].partition("\t")
                    table[(direction, payload)] = block[1:]
                    block = []
            else:
                block.append(line)
        return cls(table)

    def call(self, direction: str, inputs, params: DecodingParams) -> list[list[str]]:
        out = []
        for text in inputs:
            try:
                responses = self.table[(direction, text)]
            except KeyError:
                raise ProtocolError(f"no fixture for {direction} input {text!r}") from None
            if len(responses) < params.samples_per_input:
                raise PartialResponse(params.samples_per_input, len(responses))
            out.append(responses[: params.samples_per_input])
        return out


# --------------------------------------------------------------------------
# Pseudo-labeling against an ontology
# --------------------------------------------------------------------------


def map_to_ontology(da: DialogueAct, ontology: Ontology) -> DialogueAct:
    """Fold intent and slot names onto ontology identifiers; drop unmatched slots."""

    def fold(name: str) -> str:
        return name.lower().replace("_", "").replace("-", "").replace(" ", "")

    intent_map = {fold(i): i for i in sorted(ontology.intents)}
    slot_map = {fold(s): s for s in sorted(ontology.slots)}
    intent = intent_map.get(fold(da.intent))
    if intent is None:
        raise UnknownIntent(da.intent)
    pairs = []
    for sv in da.slots:
        slot = slot_map.get(fold(sv.slot))
        if slot is None:
            continue
        candidate = SlotValue(slot, sv.value)
        if candidate not in pairs:
            pairs.append(candidate)
    return DialogueAct(intent, tuple(pairs))


def pseudo_label(
    utterance: Utterance,
    ontology: Ontology,
    value_inventory: dict[str, list[str]],
    intent_scorer,
    policy: MatchPolicy = DEFAULT_POLICY,
    confidence_threshold: float = 0.0,
) -> DialogueAct:
    """Assemble a dialogue act from inventory-value matches plus a scored intent.

    ``intent_scorer`` maps tokens to (intent, margin). Value matches are
    maximal non-overlapping spans, assigned longest value first, leftmost;
    ties broken by slot name then value. Raises NoEvidence when nothing
    matches and the intent margin is below the confidence threshold.
    """
    candidates = []
    for slot in sorted(value_inventory):
        for value in sorted(set(value_inventory[slot])):
            candidates.append((slot, value))
    candidates.sort(key=lambda sv: (-len(sv[1].split()), sv[0], sv[1]))

    claimed: list[tuple[int, int]] = []
    found: list[tuple[int, SlotValue]] = []

    def free(span):
        return all(span[0] >= e or span[1] <= s for s, e in claimed)

    for slot, value in candidates:
        target = policy.norm_value(value)
        width = len(target)
        if width == 0 or width > len(utterance.tokens):
            continue
        normed = [policy.norm_token(t) for t in utterance.tokens]
        for i in range(len(utterance.tokens) - width + 1):
            span = (i, i + width)
            if tuple(normed[i : i + width]) == target and free(span):
                claimed.append(span)
                found.append((i, SlotValue(slot, value)))
                break

    intent, margin = intent_scorer(utterance.tokens)
    if not found and margin < confidence_threshold:
        raise NoEvidence("no value matches and intent confidence below threshold")
    pairs = []
    for _, sv in sorted(found, key=lambda item: item[0]):
        if sv not in pairs:
            pairs.append(sv)
    da = DialogueAct(intent, tuple(pairs))
    return map_to_ontology(da, ontology)
