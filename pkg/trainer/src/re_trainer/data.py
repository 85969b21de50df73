"""Reader for the corpus line format plus the marker-token vocabulary.

The trainer talks to the corpus builder only through its files: a corpus is
a meta-header line followed by one JSON record per instance with at least
instance_id, marked_text and label.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass
from pathlib import Path

from .config import LABEL_TO_ID, ConfigError

PAD, UNK, CLS = "[PAD]", "[UNK]", "[CLS]"
E1_OPEN, E1_CLOSE, E2_OPEN, E2_CLOSE = "[E1]", "[/E1]", "[E2]", "[/E2]"
SPECIALS = (PAD, UNK, CLS, E1_OPEN, E1_CLOSE, E2_OPEN, E2_CLOSE)

_TAG_TO_MARKER = {
    "<e1>": E1_OPEN, "</e1>": E1_CLOSE, "<e2>": E2_OPEN, "</e2>": E2_CLOSE,
}
_TOKEN_RE = re.compile(r"\[/?E[12]\]|\w+|[^\w\s]", re.UNICODE)


class EncodingError(ValueError):
    pass


@dataclass(frozen=True)
class TrainInstance:
    instance_id: str
    marked_text: str
    label: str

    def __post_init__(self):
        if self.label not in LABEL_TO_ID:
            raise EncodingError(f"label {self.label!r} is not in the 10-relation set")


def read_corpus_file(path: str | Path) -> list[TrainInstance]:
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"corpus file not found: {p}")
    instances = []
    with p.open(encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            if "meta" in rec:
                continue
            if not rec.get("label"):
                raise EncodingError(f"record {rec.get('instance_id')} has an empty label")
            instances.append(TrainInstance(
                instance_id=rec["instance_id"],
                marked_text=rec["marked_text"],
                label=rec["label"],
            ))
    return instances


def load_training_set(paths: list[str]) -> list[TrainInstance]:
    """Multilingual training = plain concatenation of the corpora."""
    out: list[TrainInstance] = []
    for path in paths:
        out.extend(read_corpus_file(path))
    return out


def tokenize(marked_text: str) -> list[str]:
    text = marked_text
    for tag, marker in _TAG_TO_MARKER.items():
        text = text.replace(tag, f" {marker} ")
    return _TOKEN_RE.findall(text)


class Vocab:
    """Token -> id map with fixed special tokens in front."""

    def __init__(self, tokens: dict[str, int]):
        self.token_to_id = tokens
        self.id_to_token = {i: t for t, i in tokens.items()}

    @classmethod
    def build(cls, instances: list[TrainInstance]) -> "Vocab":
        tokens = {t: i for i, t in enumerate(SPECIALS)}
        for inst in instances:
            for tok in tokenize(inst.marked_text):
                if tok not in tokens:
                    tokens[tok] = len(tokens)
        return cls(tokens)

    def __len__(self) -> int:
        return len(self.token_to_id)

    def encode_tokens(self, tokens: list[str]) -> list[int]:
        unk = self.token_to_id[UNK]
        return [self.token_to_id.get(t, unk) for t in tokens]

    def to_json(self) -> dict:
        return self.token_to_id

    @classmethod
    def from_json(cls, payload: dict) -> "Vocab":
        return cls({t: int(i) for t, i in payload.items()})


@dataclass(frozen=True)
class EncodedInstance:
    instance_id: str
    token_ids: list[int]
    e1_position: int
    e2_position: int
    label_id: int


def encode_instance(inst: TrainInstance, vocab: Vocab, max_seq_length: int) -> EncodedInstance:
    """Token ids with [E1]/[E2] boundary markers and the positions of the two
    opening markers. Truncation must never drop a marker: an overlong
    sequence whose markers sit beyond the limit is an error."""
    tokens = [CLS, *tokenize(inst.marked_text)]
    for marker in (E1_OPEN, E1_CLOSE, E2_OPEN, E2_CLOSE):
        if tokens.count(marker) != 1:
            raise EncodingError(
                f"{inst.instance_id}: expected exactly one {marker} in marked text")
    e1 = tokens.index(E1_OPEN)
    e2 = tokens.index(E2_OPEN)
    if len(tokens) > max_seq_length:
        last_marker = max(tokens.index(E1_CLOSE), tokens.index(E2_CLOSE))
        if last_marker >= max_seq_length:
            raise EncodingError(
                f"{inst.instance_id}: truncation to {max_seq_length} would drop a marker")
        tokens = tokens[:max_seq_length]
    return EncodedInstance(
        instance_id=inst.instance_id,
        token_ids=vocab.encode_tokens(tokens),
        e1_position=e1,
        e2_position=e2,
        label_id=LABEL_TO_ID[inst.label],
    )
