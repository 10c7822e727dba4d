"""Word-level language model: tokenizer, nucleus sampling, train/save/load.

The model is a small GPT-2 configuration built locally over a word-level
vocabulary extracted from the finetuning corpus, so everything runs offline.
Sequences are framed as ``<bos> input <sep> output <eos>``; generation
conditions on the prefix up to ``<sep>`` and samples the continuation.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import torch
from transformers import GPT2Config, GPT2LMHeadModel

BOS, SEP, EOS, UNK, PAD = "<bos>", "<sep>", "<eos>", "<unk>", "<pad>"
SPECIALS = (PAD, BOS, SEP, EOS, UNK)


class ModelError(RuntimeError):
    pass


class Vocab:
    def __init__(self, tokens: list[str]):
        if list(tokens[: len(SPECIALS)]) != list(SPECIALS):
            raise ModelError("vocabulary must start with the special tokens")
        self.tokens = list(tokens)
        self.index = {tok: i for i, tok in enumerate(self.tokens)}

    def __len__(self) -> int:
        return len(self.tokens)

    @classmethod
    def build(cls, texts: list[str]) -> "Vocab":
        words = sorted({w for text in texts for w in text.split()} - set(SPECIALS))
        return cls(list(SPECIALS) + words)

    def encode(self, text: str) -> list[int]:
        unk = self.index[UNK]
        return [self.index.get(w, unk) for w in text.split()]

    def decode(self, ids: list[int]) -> str:
        return " ".join(self.tokens[i] for i in ids)


def nucleus_filter(probs: torch.Tensor, top_p: float) -> torch.Tensor:
    """Zero out everything beyond the smallest prefix with mass >= top_p.

    The returned distribution is renormalized; the most probable token is
    always kept.
    """
    sorted_probs, order = torch.sort(probs, descending=True)
    cumulative = torch.cumsum(sorted_probs, dim=-1)
    keep = cumulative - sorted_probs < top_p
    keep[0] = True
    filtered = torch.zeros_like(probs)
    filtered[order[keep]] = sorted_probs[keep]
    return filtered / filtered.sum()


@dataclass
class LanguageModel:
    vocab: Vocab
    net: GPT2LMHeadModel

    @classmethod
    def create(cls, vocab: Vocab, n_embd: int = 32, n_layer: int = 1, n_head: int = 1,
               n_positions: int = 128, seed: int = 0) -> "LanguageModel":
        torch.manual_seed(seed)
        config = GPT2Config(
            vocab_size=len(vocab),
            n_positions=n_positions,
            n_embd=n_embd,
            n_layer=n_layer,
            n_head=n_head,
        )
        return cls(vocab, GPT2LMHeadModel(config))

    def save(self, path: str | Path) -> None:
        path = Path(path)
        path.mkdir(parents=True, exist_ok=True)
        (path / "vocab.txt").write_text(
            "\n".join(self.vocab.tokens) + "\n", encoding="utf-8"
        )
        meta = {
            "n_embd": self.net.config.n_embd,
            "n_layer": self.net.config.n_layer,
            "n_head": self.net.config.n_head,
            "n_positions": self.net.config.n_positions,
        }
        (path / "meta.json").write_text(json.dumps(meta, indent=2), encoding="utf-8")
        torch.save(self.net.state_dict(), path / "model.pt")

    @classmethod
    def load(cls, path: str | Path) -> "LanguageModel":
        path = Path(path)
        if not (path / "model.pt").exists():
            raise ModelError(f"no model artifact at {path}")
        vocab = Vocab((path / "vocab.txt").read_text(encoding="utf-8").splitlines())
        meta = json.loads((path / "meta.json").read_text(encoding="utf-8"))
        model = cls.create(vocab, **meta)
        model.net.load_state_dict(torch.load(path / "model.pt", weights_only=True))
        model.net.eval()
        return model

    def _encode_pair(self, source: str, target: str) -> list[int]:
        v = self.vocab.index
        return (
            [v[BOS]] + self.vocab.encode(source) + [v[SEP]]
            + self.vocab.encode(target) + [v[EOS]]
        )

    def train_pairs(self, pairs: list[tuple[str, str]], epochs: int,
                    learning_rate: float, batch_size: int = 4, seed: int = 0) -> None:
        """Standard causal-LM finetuning on <bos> src <sep> tgt <eos> rows."""
        if epochs == 0:
            return
        torch.manual_seed(seed)
        pad = self.vocab.index[PAD]
        rows = [self._encode_pair(s, t)[: self.net.config.n_positions] for s, t in pairs]
        optimizer = torch.optim.AdamW(self.net.parameters(), lr=learning_rate)
        self.net.train()
        for _ in range(epochs):
            for start in range(0, len(rows), batch_size):
                batch = rows[start : start + batch_size]
                width = max(len(r) for r in batch)
                ids = torch.full((len(batch), width), pad, dtype=torch.long)
                mask = torch.zeros((len(batch), width), dtype=torch.long)
                for i, row in enumerate(batch):
                    ids[i, : len(row)] = torch.tensor(row)
                    mask[i, : len(row)] = 1
                labels = ids.masked_fill(mask == 0, -100)
                loss = self.net(input_ids=ids, attention_mask=mask, labels=labels).loss
                optimizer.zero_grad()
                loss.backward()
                optimizer.step()
        self.net.eval()

    @torch.no_grad()
    def generate(self, source: str, samples: int, top_p: float, temperature: float,
                 max_new_tokens: int, seed: int | None = None) -> list[str]:
        """Sample ``samples`` continuations of ``<bos> source <sep>``."""
        if seed is not None:
            torch.manual_seed(seed)
        v = self.vocab.index
        prefix = [v[BOS]] + self.vocab.encode(source) + [v[SEP]]
        limit = self.net.config.n_positions
        if len(prefix) >= limit:
            raise ModelError(f"input of {len(prefix)} tokens exceeds the model window")
        outputs = []
        for _ in range(samples):
            ids = list(prefix)
            emitted: list[int] = []
            for _ in range(min(max_new_tokens, limit - len(prefix))):
                logits = self.net(input_ids=torch.tensor([ids])).logits[0, -1]
                probs = torch.softmax(logits / temperature, dim=-1)
                probs = nucleus_filter(probs, top_p)
                token = int(torch.multinomial(probs, 1))
                if token == v[EOS]:
                    break
                ids.append(token)
                emitted.append(token)
            outputs.append(self.vocab.decode(emitted))
        return outputs
