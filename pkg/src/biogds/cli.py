"""Command-line orchestration: build, stats, sample-gold, evaluate, serve.

Exit codes: 0 success, 1 data validation failure, 2 missing or unreadable
input. stderr carries a structured error object; stdout carries results
only. Flags take precedence over values from --config files.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import sys
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import fields
from pathlib import Path

from .annotation import AnnotationService, AnnotationStore
from .config import LabelConfig, LanguageConfig, PipelineConfig, load_abbreviation_file
from .corpus import (
    Corpus,
    compute_stats,
    read_corpus,
    render_stats,
    sample_gold,
    write_article_store,
    write_corpus,
)
from .errors import DataError, InputError
from .ingest import build_doc, map_page_ids, stream_articles
from .knowledge import (
    build_field_gazetteers,
    build_occupation_gazetteer,
    enrich_with_knowledge_base,
    load_alternates_table,
    load_kb_snapshot,
    load_occupation_table,
    load_person_list,
    resolve_place_names,
    translate_record_occupations,
)
from .labeller import generate_other, label_article
from .matcher import detect_main_entity
from .metrics import (
    evaluate_automatic_labels,
    evaluate_predictions,
    read_predictions,
    render_confusion,
    render_report,
)


def _config_digest(config: PipelineConfig) -> str:
    payload = json.dumps(config.digest_payload(), sort_keys=True)
    return hashlib.sha1(payload.encode("utf-8")).hexdigest()[:12]


def build_corpora(config: PipelineConfig, counts: Counter | None = None) -> dict[str, Corpus]:
    """Run ingest -> knowledge -> matcher -> labeller -> corpus, returning one
    corpus per configured method. Output is byte-stable for any worker count."""
    counts = counts if counts is not None else Counter()
    config.validate_inputs()
    language = LanguageConfig.for_language(config.language)
    if config.abbreviation_file:
        abbreviations = load_abbreviation_file(config.abbreviation_file)
    else:
        abbreviations = language.abbreviations

    records = load_person_list(config.persons, counts)
    kb = load_kb_snapshot(config.kb_snapshot)
    for record in records:
        enrich_with_knowledge_base(record, kb, counts)
    occupation_table = load_occupation_table(config.occupations)
    record_labels = sorted({o for r in records for o in r.occupation_labels()})
    all_labels = sorted(set(occupation_table) | set(record_labels))
    missing = [lab for lab in record_labels if lab not in occupation_table]
    if missing:
        raise DataError(f"occupation labels missing from translation table: {missing}")
    occupation_gazetteer = build_occupation_gazetteer(all_labels, occupation_table)
    for record in records:
        translate_record_occupations(record, occupation_table)
    alternates = load_alternates_table(config.alternates)
    for record in records:
        for place in (record.birthplace, record.deathplace):
            if place is not None:
                resolve_place_names(place, alternates, counts)

    source_ids = {r.en_page_id for r in records if r.en_page_id}
    mapping, unmapped = map_page_ids(source_ids, config.langlinks, config.language)
    counts["pages_unmapped"] = len(unmapped)
    record_by_page: dict[int, object] = {}
    for record in records:
        if record.en_page_id in mapping:
            target = mapping[record.en_page_id]
            if isinstance(target, int):
                record.target_page_id = target
                record_by_page[target] = record
            else:
                counts["pages_mapped_to_title_only"] += 1

    docs = []
    for raw in stream_articles(config.dump, set(record_by_page), config.language):
        record = record_by_page[raw.page_id]
        doc = build_doc(raw, record.person_id, abbreviations, counts)
        if doc is not None:
            docs.append(doc)
    docs.sort(key=lambda d: d.article_id)
    counts["articles"] = len(docs)

    label_config = LabelConfig(
        other_cap=config.other_cap, seed=config.seed, language=language
    )
    gazetteers_by_person = {
        r.person_id: [*build_field_gazetteers(r, language.relative_surname_alias),
                      occupation_gazetteer]
        for r in records
    }
    record_by_person = {r.person_id: r for r in records}

    def prepare(doc):
        record = record_by_person[doc.person_id]
        mains = detect_main_entity([s.text for s in doc.sentences], record, language)
        return doc, record, mains

    with ThreadPoolExecutor(max_workers=max(1, config.workers)) as pool:
        prepared = list(pool.map(prepare, docs))
    labelled_docs = []
    for doc, record, mains in prepared:
        if all(m is None for m in mains):
            counts["main_entity_not_found"] += 1
            continue
        labelled_docs.append((doc, record, mains))

    corpora: dict[str, Corpus] = {}
    for method in config.methods:
        def run(item):
            doc, record, mains = item
            return label_article(
                doc, record, method, label_config,
                gazetteers=gazetteers_by_person[doc.person_id],
                main_mentions=mains,
            )

        with ThreadPoolExecutor(max_workers=max(1, config.workers)) as pool:
            results = list(pool.map(run, labelled_docs))
        instances = [inst for insts, _ in results for inst in insts]
        other_pool = [cand for _, cands in results for cand in cands]
        instances.extend(generate_other(other_pool, config.other_cap, config.seed))
        instances.sort(key=lambda i: i.sort_key())
        meta = {
            "language": config.language,
            "method": method,
            "config_digest": _config_digest(config),
            "seed": config.seed,
            "other_cap": config.other_cap,
        }
        if config.build_timestamp:
            meta["built_at"] = config.build_timestamp
        corpora[method] = Corpus(instances=instances, meta=meta)
    return corpora


def cmd_build(args) -> int:
    config = _merged_config(args)
    counts = Counter()
    corpora = build_corpora(config, counts)
    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for method, corpus in corpora.items():
        lines_path = out_dir / f"corpus_{method}.jsonl"
        write_corpus(corpus, lines_path, "lines")
        write_corpus(corpus, out_dir / f"corpus_{method}.tsv", "tsv")
        stats = compute_stats(corpus)
        (out_dir / f"stats_{method}.json").write_text(
            json.dumps({"counts": stats.counts, "total": stats.total}, indent=2) + "\n",
            "utf-8",
        )
        print(f"== {config.language} {method} -> {lines_path}")
        print(render_stats(stats))
        print()
    report = {k: v for k, v in sorted(counts.items())}
    (out_dir / "build_counts.json").write_text(json.dumps(report, indent=2) + "\n", "utf-8")
    return 0


def cmd_stats(args) -> int:
    corpus = read_corpus(args.corpus, "tsv" if args.corpus.endswith(".tsv") else "lines")
    print(render_stats(compute_stats(corpus)))
    return 0


def cmd_sample_gold(args) -> int:
    normal = read_corpus(args.normal)
    skip = read_corpus(args.skip)
    sample = sample_gold(normal, skip, args.n, args.seed)
    meta = {
        "kind": "gold_sample",
        "seed": args.seed,
        "n_per_relation": args.n,
        "shortfalls": {f"{rel}/{meth}": n for (rel, meth), n in sorted(sample.shortfalls.items())},
    }
    out = Corpus(instances=sample.items, meta=meta)
    path = Path(args.out)
    write_corpus(out, path, "lines", keep_order=True)
    print(f"sampled {len(sample.items)} items -> {path}")
    for (rel, meth), n in sorted(sample.shortfalls.items()):
        print(f"shortfall: {rel}/{meth} short by {n}")
    return 0


def cmd_evaluate(args) -> int:
    gold = read_corpus(args.gold)
    gold_instances = gold.sorted_instances()
    if args.predictions:
        predictions = read_predictions(args.predictions)
        report = evaluate_predictions(predictions, gold_instances)
    elif args.auto:
        sample = read_corpus(args.auto)
        final = {i.instance_id: i.label.value for i in gold_instances}
        report = evaluate_automatic_labels(final, sample.instances)
    else:
        raise InputError("evaluate needs --predictions or --auto")
    print(render_report(report))
    if args.confusion:
        print()
        print(render_confusion(report))
    if args.out:
        Path(args.out).write_text(json.dumps(report.to_dict(), indent=2) + "\n", "utf-8")
    return 0


def cmd_serve(args) -> int:
    tokens = {}
    admin_token = None
    if args.tokens:
        raw = json.loads(Path(args.tokens).read_text("utf-8"))
        tokens = raw.get("annotators", {})
        admin_token = raw.get("admin")
    store = AnnotationStore(args.log)
    service = AnnotationService(
        store,
        annotator_tokens=tokens,
        admin_token=admin_token,
        static_dir=args.static_dir,
    )
    server = service.make_server(args.host, args.port)
    host, port = server.server_address[:2]
    print(f"annotation service on http://{host}:{port} (log: {args.log})")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return 0


def _merged_config(args) -> PipelineConfig:
    config = PipelineConfig.from_file(args.config) if args.config else PipelineConfig()
    for f in fields(PipelineConfig):
        value = getattr(args, f.name, None)
        if value in (None, "", ()):
            continue
        if f.name == "methods":
            value = tuple(value)
        setattr(config, f.name, value)
    return config


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="biogds",
        description="Guided-distant-supervision corpus builder for biographical relation extraction",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_build = sub.add_parser("build", help="build normal/skip corpora from a dump")
    p_build.add_argument("--config", help="JSON pipeline config file")
    p_build.add_argument("--dump")
    p_build.add_argument("--langlinks")
    p_build.add_argument("--persons")
    p_build.add_argument("--kb-snapshot", dest="kb_snapshot")
    p_build.add_argument("--alternates")
    p_build.add_argument("--occupations")
    p_build.add_argument("--out-dir", dest="out_dir")
    p_build.add_argument("--language")
    p_build.add_argument("--methods", nargs="+", choices=("normal", "skip"), default=None)
    p_build.add_argument("--other-cap", dest="other_cap", type=int, default=None)
    p_build.add_argument("--seed", type=int, default=None)
    p_build.add_argument("--workers", type=int, default=None)
    p_build.add_argument("--abbreviation-file", dest="abbreviation_file")
    p_build.set_defaults(func=cmd_build)

    p_stats = sub.add_parser("stats", help="render the relation count table of a corpus")
    p_stats.add_argument("corpus")
    p_stats.set_defaults(func=cmd_stats)

    p_gold = sub.add_parser("sample-gold", help="draw the gold annotation sample")
    p_gold.add_argument("--normal", required=True)
    p_gold.add_argument("--skip", required=True)
    p_gold.add_argument("--n", type=int, default=100)
    p_gold.add_argument("--seed", type=int, default=0)
    p_gold.add_argument("--out", required=True)
    p_gold.set_defaults(func=cmd_sample_gold)

    p_eval = sub.add_parser("evaluate", help="score predictions or automatic labels against gold")
    p_eval.add_argument("--gold", required=True, help="gold corpus (final labels)")
    p_eval.add_argument("--predictions", help="prediction file (instance_id<TAB>label)")
    p_eval.add_argument("--auto", help="gold-sample corpus whose automatic labels are scored")
    p_eval.add_argument("--confusion", action="store_true")
    p_eval.add_argument("--out", help="write the machine-readable report here")
    p_eval.set_defaults(func=cmd_evaluate)

    p_serve = sub.add_parser("serve", help="run the annotation service")
    p_serve.add_argument("--log", required=True, help="append-only event log path")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8765)
    p_serve.add_argument("--tokens", help="JSON file: {annotators: {id: token}, admin: token}")
    p_serve.add_argument("--static-dir", dest="static_dir", help="serve a UI build from here")
    p_serve.set_defaults(func=cmd_serve)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as e:
        print(json.dumps({"error": {"kind": "input", "message": str(e)}}), file=sys.stderr)
        return 2
    except DataError as e:
        print(json.dumps({"error": {"kind": "data", "message": str(e)}}), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
