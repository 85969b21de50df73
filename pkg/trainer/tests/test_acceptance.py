"""Trainer acceptance: shape law, overfit sanity, and the prediction-file
interface scored through the corpus toolkit's evaluate command."""
import json
import subprocess
import sys

import pytest

from re_trainer.config import TrainConfig
from re_trainer.data import Vocab, read_corpus_file
from re_trainer.model import MarkerRelationClassifier
from re_trainer.train import predict, train, training_accuracy

from .util import toy_instances, write_corpus


def _ok(name):
    print(f"PASS: {name}")


def test_head_dimension_law():
    vocab = Vocab.build([])
    for hidden in (16, 48, 96):
        model = MarkerRelationClassifier(len(vocab), hidden_size=hidden, num_heads=4)
        assert model.head.in_features == 2 * hidden
    _ok("head input dimension = 2 x hidden size")


@pytest.fixture(scope="module")
def overfit(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("acceptance")
    corpus = write_corpus(toy_instances(32), tmp / "toy.jsonl")
    # from-scratch overfit run: higher lr than the fine-tuning default
    config = TrainConfig(
        train_corpora=[str(corpus)], epochs=200, max_steps=200,
        learning_rate=1e-3, seed=3, out_dir=str(tmp / "run"),
    )
    checkpoint = train(config)
    return tmp, corpus, checkpoint


def test_overfit_32_within_200_steps(overfit):
    tmp, corpus, checkpoint = overfit
    log = (checkpoint.parent / "train_log.jsonl").read_text().splitlines()
    assert len(log) <= 200
    accuracy = training_accuracy(checkpoint, corpus)
    assert accuracy >= 0.95
    _ok(f"overfit sanity: 32-instance toy set at {accuracy:.2f} accuracy in {len(log)} steps")


def test_prediction_file_scores_one_via_cmd_evaluate(overfit):
    """The emitted prediction file, turned into the gold labels, must score a
    clean 1.0 through the corpus toolkit's evaluate subcommand (interface law)."""
    tmp, corpus, checkpoint = overfit
    predictions = predict(checkpoint, corpus, tmp / "preds.tsv")

    predicted_labels = dict(
        line.split("\t") for line in predictions.read_text().splitlines()
    )
    gold_path = tmp / "gold.jsonl"
    with gold_path.open("w", encoding="utf-8") as out:
        for line in corpus.read_text("utf-8").splitlines():
            rec = json.loads(line)
            if "meta" not in rec:
                rec["label"] = predicted_labels[rec["instance_id"]]
            out.write(json.dumps(rec, ensure_ascii=False) + "\n")

    result = subprocess.run(
        [sys.executable, "-m", "biogds.cli", "evaluate",
         "--gold", str(gold_path), "--predictions", str(predictions),
         "--out", str(tmp / "report.json")],
        capture_output=True, text=True,
    )
    assert result.returncode == 0, result.stderr
    report = json.loads((tmp / "report.json").read_text())
    assert report["macro"]["f1"] == 1.0
    assert report["macro"]["precision"] == 1.0
    _ok("prediction file scores 1.0 against itself via the evaluate command")
