"""Fine-tuning loop and prediction-file emission.

All parameters (encoder and linear head) train jointly with AdamW by
maximising the log probability of the correct label (cross-entropy).
Every source of randomness is seeded from the config.
"""
from __future__ import annotations

import json
from pathlib import Path

import torch
from torch import nn

from .config import RELATIONS, ConfigError, TrainConfig
from .data import EncodedInstance, Vocab, encode_instance, load_training_set, read_corpus_file
from .model import MarkerRelationClassifier, make_batch


def _batches(encoded: list[EncodedInstance], batch_size: int, generator: torch.Generator):
    order = torch.randperm(len(encoded), generator=generator).tolist()
    for start in range(0, len(order), batch_size):
        yield [encoded[i] for i in order[start:start + batch_size]]


def train(config: TrainConfig) -> Path:
    """Train a checkpoint; returns the checkpoint path. A training log with
    per-step loss and training accuracy lands next to it."""
    if not config.train_corpora:
        raise ConfigError("train_corpora must name at least one corpus file")
    torch.manual_seed(config.seed)
    instances = load_training_set(config.train_corpora)
    if not instances:
        raise ConfigError("training set is empty")
    vocab = Vocab.build(instances)
    encoded = [encode_instance(i, vocab, config.max_seq_length) for i in instances]

    model = MarkerRelationClassifier(
        vocab_size=len(vocab),
        hidden_size=config.hidden_size,
        num_layers=config.num_layers,
        num_heads=config.num_heads,
        max_seq_length=config.max_seq_length,
    )
    if config.pretrained:
        state = _load_checkpoint_state(config.pretrained)
        model.load_state_dict(state["state_dict"])
    optimizer = torch.optim.AdamW(model.parameters(), lr=config.learning_rate)
    loss_fn = nn.CrossEntropyLoss()
    generator = torch.Generator().manual_seed(config.seed)

    log: list[dict] = []
    step = 0
    model.train()
    done = False
    for epoch in range(config.epochs):
        if done:
            break
        for batch in _batches(encoded, config.batch_size, generator):
            token_ids, padding, e1, e2, labels = make_batch(batch)
            scores = model(token_ids, padding, e1, e2)
            loss = loss_fn(scores, labels)
            optimizer.zero_grad()
            loss.backward()
            optimizer.step()
            step += 1
            accuracy = (scores.argmax(dim=1) == labels).float().mean().item()
            log.append({"step": step, "epoch": epoch, "loss": loss.item(),
                        "batch_accuracy": accuracy})
            if config.max_steps and step >= config.max_steps:
                done = True
                break

    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    checkpoint_path = out_dir / "checkpoint.pt"
    torch.save({
        "state_dict": model.state_dict(),
        "vocab": vocab.to_json(),
        "model_config": {
            "hidden_size": config.hidden_size,
            "num_layers": config.num_layers,
            "num_heads": config.num_heads,
            "max_seq_length": config.max_seq_length,
        },
    }, checkpoint_path)
    (out_dir / "train_log.jsonl").write_text(
        "".join(json.dumps(entry) + "\n" for entry in log), "utf-8")
    return checkpoint_path


def _load_checkpoint_state(path: str | Path) -> dict:
    p = Path(path)
    if p.is_dir():
        p = p / "checkpoint.pt"
    if not p.is_file():
        raise ConfigError(
            f"checkpoint {path!r} not found; hub checkpoints are unavailable offline, "
            "pass a local checkpoint directory instead"
        )
    return torch.load(p, map_location="cpu", weights_only=False)


def load_model(checkpoint_path: str | Path) -> tuple[MarkerRelationClassifier, Vocab]:
    state = _load_checkpoint_state(checkpoint_path)
    vocab = Vocab.from_json(state["vocab"])
    model = MarkerRelationClassifier(vocab_size=len(vocab), **state["model_config"])
    model.load_state_dict(state["state_dict"])
    model.eval()
    return model, vocab


def training_accuracy(checkpoint_path: str | Path, corpus_path: str | Path,
                      batch_size: int = 32) -> float:
    model, vocab = load_model(checkpoint_path)
    instances = read_corpus_file(corpus_path)
    encoded = [encode_instance(i, vocab, model.max_seq_length) for i in instances]
    correct = 0
    with torch.no_grad():
        for start in range(0, len(encoded), batch_size):
            batch = encoded[start:start + batch_size]
            token_ids, padding, e1, e2, labels = make_batch(batch)
            scores = model(token_ids, padding, e1, e2)
            correct += int((scores.argmax(dim=1) == labels).sum())
    return correct / len(encoded) if encoded else 0.0


def predict(checkpoint_path: str | Path, corpus_path: str | Path,
            out_path: str | Path, batch_size: int = 32) -> Path:
    """Write tab-separated (instance_id, label) predictions for a corpus."""
    model, vocab = load_model(checkpoint_path)
    instances = read_corpus_file(corpus_path)
    encoded = [encode_instance(i, vocab, model.max_seq_length) for i in instances]
    lines = []
    with torch.no_grad():
        for start in range(0, len(encoded), batch_size):
            batch = encoded[start:start + batch_size]
            token_ids, padding, e1, e2, _ = make_batch(batch)
            scores = model(token_ids, padding, e1, e2)
            for inst, label_id in zip(batch, scores.argmax(dim=1).tolist()):
                lines.append(f"{inst.instance_id}\t{RELATIONS[label_id]}\n")
    out = Path(out_path)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text("".join(lines), "utf-8")
    return out
