"""Training configuration, loadable from a flat key=value file."""
from __future__ import annotations

from dataclasses import dataclass, field, fields
from pathlib import Path

RELATIONS = (
    "birthdate", "birthplace", "child", "deathdate", "deathplace",
    "educated", "occupation", "other", "parent", "sibling",
)
LABEL_TO_ID = {label: i for i, label in enumerate(RELATIONS)}


class ConfigError(ValueError):
    pass


@dataclass
class TrainConfig:
    train_corpora: list[str] = field(default_factory=list)
    eval_corpus: str = ""
    pretrained: str = ""  # optional checkpoint to initialize from
    learning_rate: float = 7e-5
    max_seq_length: int = 512
    batch_size: int = 32
    epochs: int = 5
    max_steps: int = 0  # 0 = no cap; handy for overfit sanity runs
    hidden_size: int = 48
    num_layers: int = 2
    num_heads: int = 4
    seed: int = 0
    out_dir: str = "runs/default"

    def __post_init__(self):
        if self.epochs < 1:
            raise ConfigError("epochs must be >= 1")
        if self.batch_size < 1:
            raise ConfigError("batch_size must be >= 1")
        if self.hidden_size % self.num_heads:
            raise ConfigError("hidden_size must be divisible by num_heads")

    @classmethod
    def from_file(cls, path: str | Path) -> "TrainConfig":
        """Flat key=value lines; train_corpora is comma-separated."""
        raw: dict[str, str] = {}
        for lineno, line in enumerate(Path(path).read_text("utf-8").splitlines(), start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key=value")
            key, value = line.split("=", 1)
            raw[key.strip()] = value.strip()
        kwargs = {}
        types = {f.name: f.type for f in fields(cls)}
        for key, value in raw.items():
            if key not in types:
                raise ConfigError(f"unknown config key {key!r}")
            if key == "train_corpora":
                kwargs[key] = [p.strip() for p in value.split(",") if p.strip()]
            elif key in ("learning_rate",):
                kwargs[key] = float(value)
            elif key in ("pretrained", "eval_corpus", "out_dir"):
                kwargs[key] = value
            else:
                kwargs[key] = int(value)
        return cls(**kwargs)
