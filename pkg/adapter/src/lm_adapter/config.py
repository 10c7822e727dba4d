"""Adapter configuration: decoding, finetuning, and model location."""

from __future__ import annotations

from dataclasses import dataclass, fields
from pathlib import Path


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class AdapterConfig:
    model: str = ""  # artifact root containing nlg/ and nlu/ subdirectories
    direction: str = "nlg"
    top_p: float = 0.9
    temperature: float = 1.0
    samples: int = 3
    max_new_tokens: int = 40
    epochs: int = 5
    learning_rate: float = 5e-5
    batch_size: int = 4

    def __post_init__(self):
        if not 0 < self.top_p <= 1:
            raise ConfigError("top_p must be in (0, 1]")
        if self.temperature <= 0:
            raise ConfigError("temperature must be positive")
        if self.samples < 1:
            raise ConfigError("samples must be >= 1")
        if self.max_new_tokens < 1:
            raise ConfigError("max_new_tokens must be >= 1")
        if self.epochs < 0:
            raise ConfigError("epochs must be >= 0")
        if self.learning_rate <= 0:
            raise ConfigError("learning_rate must be positive")
        if self.batch_size < 1:
            raise ConfigError("batch_size must be >= 1")
        if self.direction not in ("nlg", "nlu"):
            raise ConfigError(f"unknown direction {self.direction!r}")


_CASTS = {f.name: f.type for f in fields(AdapterConfig)}


def parse_config_text(text: str) -> AdapterConfig:
    """Parse flat ``key = value`` lines; blank lines and # comments ignored."""
    values: dict[str, object] = {}
    for line_no, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = (part.strip() for part in line.partition("="))
        if not sep or not key:
            raise ConfigError(f"line {line_no}: expected 'key = value', got {raw!r}")
        if key not in _CASTS:
            raise ConfigError(f"line {line_no}: unknown key {key!r}")
        kind = _CASTS[key]
        try:
            if kind == "int":
                values[key] = int(value)
            elif kind == "float":
                values[key] = float(value)
            else:
                values[key] = value
        except ValueError as e:
            raise ConfigError(f"line {line_no}: {e}") from e
    return AdapterConfig(**values)


def load_config(path: str | Path) -> AdapterConfig:
    return parse_config_text(Path(path).read_text(encoding="utf-8"))
