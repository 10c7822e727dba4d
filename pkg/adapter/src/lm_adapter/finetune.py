"""Finetune the two generation directions on a paired corpus file.

Each paired example yields one (source, target) row per direction: ``nlg``
maps the dialogue-act string to the utterance, ``nlu`` the reverse. The two
directions are trained as separate model artifacts under the output root.
"""

from __future__ import annotations

from pathlib import Path

from .config import AdapterConfig
from .corpus import read_pairs
from .model import LanguageModel, Vocab


def finetune(train_path: str | Path, out_root: str | Path, cfg: AdapterConfig,
             seed: int = 0) -> dict[str, Path]:
    pairs = read_pairs(train_path)
    texts = [p.utterance for p in pairs] + [p.act for p in pairs]
    vocab = Vocab.build(texts)
    out_root = Path(out_root)
    artifacts: dict[str, Path] = {}
    for direction in ("nlg", "nlu"):
        rows = [
            (p.act, p.utterance) if direction == "nlg" else (p.utterance, p.act)
            for p in pairs
        ]
        model = LanguageModel.create(vocab, seed=seed)
        model.train_pairs(
            rows,
            epochs=cfg.epochs,
            learning_rate=cfg.learning_rate,
            batch_size=cfg.batch_size,
            seed=seed,
        )
        target = out_root / direction
        model.save(target)
        artifacts[direction] = target
    return artifacts
