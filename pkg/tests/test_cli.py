import json
from pathlib import Path

import pytest

from biogds.cli import build_corpora, main
from biogds.config import PipelineConfig
from biogds.corpus import read_corpus

from .golden_expected import GOLDEN_NORMAL, GOLDEN_SKIP


def _fixture_config(fixtures_dir, out_dir="", **overrides):
    config = PipelineConfig(
        dump=str(fixtures_dir / "dump_de.xml"),
        langlinks=str(fixtures_dir / "langlinks.tsv"),
        persons=str(fixtures_dir / "persons.csv"),
        kb_snapshot=str(fixtures_dir / "kb_snapshot.jsonl"),
        alternates=str(fixtures_dir / "alternates.tsv"),
        occupations=str(fixtures_dir / "occupations.tsv"),
        out_dir=str(out_dir),
        language="de",
        seed=7,
    )
    for key, value in overrides.items():
        setattr(config, key, value)
    return config


def _rows(corpus):
    return [
        (i.article_id, i.sentence_index, i.label.value, i.matched_key, i.marked_text)
        for i in corpus.sorted_instances()
    ]


def test_build_matches_hand_trace(fixtures_dir):
    corpora = build_corpora(_fixture_config(fixtures_dir))
    assert _rows(corpora["normal"]) == GOLDEN_NORMAL
    assert _rows(corpora["skip"]) == GOLDEN_SKIP


def test_cli_build_writes_outputs_and_stats(fixtures_dir, tmp_path, capsys):
    out = tmp_path / "out"
    code = main([
        "build",
        "--dump", str(fixtures_dir / "dump_de.xml"),
        "--langlinks", str(fixtures_dir / "langlinks.tsv"),
        "--persons", str(fixtures_dir / "persons.csv"),
        "--kb-snapshot", str(fixtures_dir / "kb_snapshot.jsonl"),
        "--alternates", str(fixtures_dir / "alternates.tsv"),
        "--occupations", str(fixtures_dir / "occupations.tsv"),
        "--out-dir", str(out),
        "--seed", "7",
    ])
    assert code == 0
    captured = capsys.readouterr()
    assert "Total" in captured.out and captured.err == ""
    normal = read_corpus(out / "corpus_normal.jsonl")
    assert len(normal.instances) == 28
    skip = read_corpus(out / "corpus_skip.jsonl")
    assert len(skip.instances) == 18
    assert (out / "corpus_normal.tsv").exists()
    assert json.loads((out / "stats_normal.json").read_text())["total"] == 28
    assert json.loads((out / "build_counts.json").read_text())["redirect_skipped"] == 1


def test_cli_build_rerun_is_byte_identical(fixtures_dir, tmp_path):
    outs = []
    for name in ("a", "b"):
        out = tmp_path / name
        config = _fixture_config(fixtures_dir, out_dir=out)
        from biogds.cli import cmd_build

        class Args:
            pass

        args = Args()
        args.config = None
        for f in ("dump", "langlinks", "persons", "kb_snapshot", "alternates",
                  "occupations", "out_dir", "language", "seed"):
            setattr(args, f, getattr(config, f))
        args.methods = None
        args.other_cap = None
        args.workers = None
        args.abbreviation_file = None
        assert cmd_build(args) == 0
        outs.append((out / "corpus_normal.jsonl").read_bytes())
    assert outs[0] == outs[1]


def test_parallel_workers_byte_identical(fixtures_dir, tmp_path):
    blobs = []
    for workers in (1, 4):
        config = _fixture_config(fixtures_dir, workers=workers)
        corpora = build_corpora(config)
        from biogds.corpus import write_corpus

        path = tmp_path / f"c{workers}.jsonl"
        write_corpus(corpora["normal"], path)
        write_corpus(corpora["skip"], tmp_path / f"s{workers}.jsonl")
        blobs.append((path.read_bytes(), (tmp_path / f"s{workers}.jsonl").read_bytes()))
    assert blobs[0] == blobs[1]


def test_missing_input_exits_2(fixtures_dir, tmp_path, capsys):
    code = main([
        "build",
        "--dump", str(tmp_path / "nope.xml"),
        "--langlinks", str(fixtures_dir / "langlinks.tsv"),
        "--persons", str(fixtures_dir / "persons.csv"),
        "--kb-snapshot", str(fixtures_dir / "kb_snapshot.jsonl"),
        "--alternates", str(fixtures_dir / "alternates.tsv"),
        "--occupations", str(fixtures_dir / "occupations.tsv"),
        "--out-dir", str(tmp_path / "out"),
    ])
    assert code == 2
    captured = capsys.readouterr()
    assert captured.out == ""
    error = json.loads(captured.err)
    assert error["error"]["kind"] == "input"


def test_data_error_exits_1(fixtures_dir, tmp_path, capsys):
    bad = tmp_path / "persons.csv"
    bad.write_text("person_id,name\nx,Anna A\nx,Anna A\n", "utf-8")
    code = main([
        "build",
        "--dump", str(fixtures_dir / "dump_de.xml"),
        "--langlinks", str(fixtures_dir / "langlinks.tsv"),
        "--persons", str(bad),
        "--kb-snapshot", str(fixtures_dir / "kb_snapshot.jsonl"),
        "--alternates", str(fixtures_dir / "alternates.tsv"),
        "--occupations", str(fixtures_dir / "occupations.tsv"),
        "--out-dir", str(tmp_path / "out"),
    ])
    assert code == 1
    assert json.loads(capsys.readouterr().err)["error"]["kind"] == "data"


def test_cli_stats_roundtrip(fixtures_dir, tmp_path, capsys):
    config = _fixture_config(fixtures_dir)
    corpora = build_corpora(config)
    from biogds.corpus import write_corpus

    path = tmp_path / "c.jsonl"
    write_corpus(corpora["normal"], path)
    assert main(["stats", str(path)]) == 0
    out = capsys.readouterr().out
    assert "birthdate" in out and "Total" in out and "28" in out


def test_cli_sample_gold_and_evaluate(fixtures_dir, tmp_path, capsys):
    config = _fixture_config(fixtures_dir)
    corpora = build_corpora(config)
    from biogds.corpus import write_corpus

    normal_path = tmp_path / "normal.jsonl"
    skip_path = tmp_path / "skip.jsonl"
    write_corpus(corpora["normal"], normal_path)
    write_corpus(corpora["skip"], skip_path)
    gold_path = tmp_path / "gold_sample.jsonl"
    assert main(["sample-gold", "--normal", str(normal_path), "--skip", str(skip_path),
                 "--n", "2", "--seed", "5", "--out", str(gold_path)]) == 0
    out = capsys.readouterr().out
    assert "sampled" in out and "shortfall" in out
    sample = read_corpus(gold_path)
    assert 0 < len(sample.instances) <= 40

    # identity predictions -> all scores 1.0
    preds = tmp_path / "preds.tsv"
    preds.write_text(
        "".join(f"{i.instance_id}\t{i.label.value}\n" for i in sample.instances), "utf-8")
    assert main(["evaluate", "--gold", str(gold_path), "--predictions", str(preds),
                 "--confusion", "--out", str(tmp_path / "report.json")]) == 0
    out = capsys.readouterr().out
    assert "macro" in out and "1.0" in out
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["macro"]["f1"] == 1.0

    # --auto mode: the sample's own labels against the gold corpus (identical here)
    assert main(["evaluate", "--gold", str(gold_path), "--auto", str(gold_path)]) == 0
    assert "macro" in capsys.readouterr().out


def test_config_file_with_flag_override(fixtures_dir, tmp_path, capsys):
    config_payload = {
        "dump": str(fixtures_dir / "dump_de.xml"),
        "langlinks": str(fixtures_dir / "langlinks.tsv"),
        "persons": str(fixtures_dir / "persons.csv"),
        "kb_snapshot": str(fixtures_dir / "kb_snapshot.jsonl"),
        "alternates": str(fixtures_dir / "alternates.tsv"),
        "occupations": str(fixtures_dir / "occupations.tsv"),
        "out_dir": str(tmp_path / "ignored"),
        "methods": ["normal"],
        "seed": 7,
    }
    config_path = tmp_path / "config.json"
    config_path.write_text(json.dumps(config_payload), "utf-8")
    out = tmp_path / "real"
    assert main(["build", "--config", str(config_path), "--out-dir", str(out)]) == 0
    capsys.readouterr()
    assert (out / "corpus_normal.jsonl").exists()
    assert not (out / "corpus_skip.jsonl").exists()  # config methods honoured
    assert not (tmp_path / "ignored").exists()  # flag beat the config file
