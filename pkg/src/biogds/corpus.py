"""Persist, split, summarize, and gold-sample relation corpora.

Line format (full fidelity): first line is a meta header object, then one
JSON object per instance with fields instance_id, article_id,
sentence_index, marked_text, e1_start/e1_end, e2_start/e2_end, label,
method, matched_key. Instances are byte-stably ordered by
(article_id, sentence_index, e1_span, e2_span, label, method).

TSV format: a "# <meta json>" comment line, a header row, then the columns
(instance_id, label, marked_text, article_id, sentence_index, method).
Spans are recovered from the marker tags on read; matched_key is not
representable in this format.

The article store written by the ingest stage uses the same line-record
idiom: one JSON object per article with fields article_id, language, title,
person_id, sentences (list of {index, text, char_offset}).
"""
from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from pathlib import Path

from .errors import DataError, InputError
from .ingest import ArticleDoc, Sentence
from .labeller import (
    METHODS,
    RELATION_NAMES,
    Relation,
    RelationInstance,
    extract_marked_spans,
)


@dataclass
class Corpus:
    instances: list[RelationInstance]
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        ids = [i.instance_id for i in self.instances]
        if len(ids) != len(set(ids)):
            raise DataError("corpus contains duplicate instance ids")
        method = self.meta.get("method")
        if method is not None and method not in METHODS:
            raise DataError(f"corpus meta has unknown method {method!r}")

    def sorted_instances(self) -> list[RelationInstance]:
        return sorted(self.instances, key=RelationInstance.sort_key)


def _instance_to_record(inst: RelationInstance) -> dict:
    return {
        "instance_id": inst.instance_id,
        "article_id": inst.article_id,
        "sentence_index": inst.sentence_index,
        "marked_text": inst.marked_text,
        "e1_start": inst.e1_span[0],
        "e1_end": inst.e1_span[1],
        "e2_start": inst.e2_span[0],
        "e2_end": inst.e2_span[1],
        "label": inst.label.value,
        "method": inst.method,
        "matched_key": inst.matched_key,
    }


def _instance_from_record(rec: dict) -> RelationInstance:
    return RelationInstance(
        instance_id=rec["instance_id"],
        article_id=rec["article_id"],
        sentence_index=rec["sentence_index"],
        marked_text=rec["marked_text"],
        e1_span=(rec["e1_start"], rec["e1_end"]),
        e2_span=(rec["e2_start"], rec["e2_end"]),
        label=Relation(rec["label"]),
        method=rec["method"],
        matched_key=rec.get("matched_key"),
    )


def _dumps(obj) -> str:
    return json.dumps(obj, ensure_ascii=False, sort_keys=True, separators=(",", ":"))


def write_corpus(corpus: Corpus, path: str | Path, format: str = "lines",
                 keep_order: bool = False) -> None:
    """Write a corpus in byte-stable order; UTF-8, one record per line.

    keep_order preserves the in-memory instance order (for shuffled gold
    samples) instead of the canonical sort.
    """
    p = Path(path)
    try:
        fh = p.open("w", encoding="utf-8", newline="\n")
    except OSError as e:
        raise InputError(f"cannot write corpus to {p}: {e}") from e
    ordered = corpus.instances if keep_order else corpus.sorted_instances()
    with fh:
        if format == "lines":
            fh.write(_dumps({"meta": corpus.meta}) + "\n")
            for inst in ordered:
                fh.write(_dumps(_instance_to_record(inst)) + "\n")
        elif format == "tsv":
            fh.write("# " + _dumps(corpus.meta) + "\n")
            fh.write("instance_id\tlabel\tmarked_text\tarticle_id\tsentence_index\tmethod\n")
            for inst in ordered:
                if "\t" in inst.marked_text or "\n" in inst.marked_text:
                    raise DataError(
                        f"instance {inst.instance_id} contains tab/newline; "
                        "use the lines format"
                    )
                fh.write(
                    f"{inst.instance_id}\t{inst.label.value}\t{inst.marked_text}\t"
                    f"{inst.article_id}\t{inst.sentence_index}\t{inst.method}\n"
                )
        else:
            raise InputError(f"unknown corpus format {format!r}")


def read_corpus(path: str | Path, format: str = "lines") -> Corpus:
    """Inverse of write_corpus. TSV recovers spans from the marker tags."""
    p = Path(path)
    if not p.is_file():
        raise InputError(f"corpus file not found: {p}")
    text = p.read_text("utf-8")
    lines = text.splitlines()
    if format == "lines":
        if not lines:
            raise InputError(f"corpus file {p} is empty (missing meta header)")
        head = json.loads(lines[0])
        if "meta" not in head:
            raise InputError(f"corpus file {p} lacks the meta header line")
        instances = [_instance_from_record(json.loads(line)) for line in lines[1:] if line]
        return Corpus(instances=instances, meta=head["meta"])
    if format == "tsv":
        if len(lines) < 2 or not lines[0].startswith("# "):
            raise InputError(f"tsv corpus {p} lacks meta/header lines")
        meta = json.loads(lines[0][2:])
        instances = []
        for line in lines[2:]:
            if not line:
                continue
            iid, label, marked, article_id, sent_index, method = line.split("\t")
            _, e1_span, e2_span = extract_marked_spans(marked)
            instances.append(RelationInstance(
                instance_id=iid,
                article_id=int(article_id),
                sentence_index=int(sent_index),
                marked_text=marked,
                e1_span=e1_span,
                e2_span=e2_span,
                label=Relation(label),
                method=method,
            ))
        return Corpus(instances=instances, meta=meta)
    raise InputError(f"unknown corpus format {format!r}")


# --- stats ---------------------------------------------------------------------


@dataclass
class StatsTable:
    counts: dict[str, int]
    total: int

    def __post_init__(self):
        missing = [r for r in RELATION_NAMES if r not in self.counts]
        if missing:
            raise DataError(f"stats table missing relations: {missing}")
        if sum(self.counts.values()) != self.total:
            raise DataError("stats counts do not sum to total")


def compute_stats(corpus: Corpus) -> StatsTable:
    counts = {r: 0 for r in RELATION_NAMES}
    for inst in corpus.instances:
        counts[inst.label.value] += 1
    return StatsTable(counts=counts, total=len(corpus.instances))


def render_stats(stats: StatsTable, heading: str = "Relation") -> str:
    """Aligned two-column table: one relation per row, then the total row."""
    width = max(len(heading), max(len(r) for r in RELATION_NAMES), len("Total"))
    num_width = max(len(f"{stats.total:,}"), len("Count"))
    lines = [f"{heading.ljust(width)}  {'Count'.rjust(num_width)}"]
    for r in RELATION_NAMES:
        lines.append(f"{r.ljust(width)}  {format(stats.counts[r], ',').rjust(num_width)}")
    lines.append(f"{'Total'.ljust(width)}  {format(stats.total, ',').rjust(num_width)}")
    return "\n".join(lines)


# --- gold sampling --------------------------------------------------------------


@dataclass
class GoldSample:
    items: list[RelationInstance]
    shortfalls: dict[tuple[str, str], int]


def sample_gold(
    normal: Corpus, skip: Corpus, n_per_relation: int = 100, seed: int = 0
) -> GoldSample:
    """Seeded sampling of n instances per (relation, method) cell, without
    replacement; cells smaller than n contribute everything and are reported
    as shortfalls. The pooled sample is shuffled with the same seed and each
    item keeps its automatic label as provenance."""
    if n_per_relation < 0:
        raise DataError("n_per_relation must be >= 0")
    items: list[RelationInstance] = []
    shortfalls: dict[tuple[str, str], int] = {}
    for corpus, method in ((normal, "normal"), (skip, "skip")):
        by_label: dict[str, list[RelationInstance]] = {r: [] for r in RELATION_NAMES}
        for inst in corpus.sorted_instances():
            by_label[inst.label.value].append(inst)
        for relation in RELATION_NAMES:
            cell = by_label[relation]
            rng = random.Random(f"{seed}:{method}:{relation}")
            if len(cell) <= n_per_relation:
                take = list(cell)
                if len(cell) < n_per_relation:
                    shortfalls[(relation, method)] = n_per_relation - len(cell)
            else:
                take = rng.sample(cell, n_per_relation)
            items.extend(sorted(take, key=RelationInstance.sort_key))
    dup = len(items) != len({i.instance_id for i in items})
    if dup:
        raise DataError("gold sample drew duplicate instance ids")
    random.Random(f"{seed}:shuffle").shuffle(items)
    return GoldSample(items=items, shortfalls=shortfalls)


# --- article-level splitting ------------------------------------------------------


def split_corpus(
    corpus: Corpus, ratios: tuple[float, float, float], seed: int = 0
) -> tuple[Corpus, Corpus, Corpus]:
    """Split by article id (no article straddles splits), seeded, stratified
    by label as closely as article granularity allows."""
    if len(ratios) != 3 or any(r < 0 for r in ratios):
        raise DataError(f"need three non-negative ratios, got {ratios}")
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise DataError(f"split ratios must sum to 1.0, got {sum(ratios)}")

    by_article: dict[int, list[RelationInstance]] = {}
    for inst in corpus.sorted_instances():
        by_article.setdefault(inst.article_id, []).append(inst)
    articles = sorted(by_article)
    rng = random.Random(f"{seed}:split")
    rng.shuffle(articles)

    # Article quotas by largest remainder.
    n = len(articles)
    raw = [r * n for r in ratios]
    quotas = [int(x) for x in raw]
    remainder = n - sum(quotas)
    for i in sorted(range(3), key=lambda i: raw[i] - quotas[i], reverse=True)[:remainder]:
        quotas[i] += 1

    label_totals = {r: 0 for r in RELATION_NAMES}
    for inst in corpus.instances:
        label_totals[inst.label.value] += 1
    split_articles: list[list[int]] = [[], [], []]
    split_counts = [dict.fromkeys(RELATION_NAMES, 0) for _ in range(3)]
    for article in articles:
        hist: dict[str, int] = {}
        for inst in by_article[article]:
            hist[inst.label.value] = hist.get(inst.label.value, 0) + 1
        best = None
        for i in range(3):
            if len(split_articles[i]) >= quotas[i]:
                continue
            # Deficit of this split for the labels the article carries.
            score = sum(
                ratios[i] * label_totals[lab] - split_counts[i][lab]
                for lab in hist
            )
            if best is None or score > best[0]:
                best = (score, i)
        assert best is not None
        _, i = best
        split_articles[i].append(article)
        for lab, cnt in hist.items():
            split_counts[i][lab] += cnt

    out = []
    for i, name in enumerate(("train", "dev", "test")):
        instances = [inst for a in sorted(split_articles[i]) for inst in by_article[a]]
        meta = dict(corpus.meta)
        meta["split"] = name
        out.append(Corpus(instances=instances, meta=meta))
    return out[0], out[1], out[2]


# --- article store ----------------------------------------------------------------


def write_article_store(docs: list[ArticleDoc], path: str | Path) -> None:
    """One JSON object per article, ordered by article_id."""
    p = Path(path)
    with p.open("w", encoding="utf-8", newline="\n") as fh:
        for doc in sorted(docs, key=lambda d: d.article_id):
            fh.write(_dumps({
                "article_id": doc.article_id,
                "language": doc.language,
                "title": doc.title,
                "person_id": doc.person_id,
                "sentences": [
                    {"index": s.index, "text": s.text, "char_offset": s.char_offset}
                    for s in doc.sentences
                ],
            }) + "\n")


def read_article_store(path: str | Path) -> list[ArticleDoc]:
    p = Path(path)
    if not p.is_file():
        raise InputError(f"article store not found: {p}")
    docs = []
    with p.open(encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            docs.append(ArticleDoc(
                article_id=rec["article_id"],
                language=rec["language"],
                title=rec["title"],
                person_id=rec["person_id"],
                sentences=[
                    Sentence(index=s["index"], text=s["text"], char_offset=s["char_offset"])
                    for s in rec["sentences"]
                ],
            ))
    return docs
