#!/usr/bin/env python3
"""End-to-end annotation walkthrough on the fixture corpora.

Builds both corpora, draws a small gold sample, runs a scripted
two-annotator session against an in-process store, adjudicates the
disagreements, exports gold, and scores the automatic labels against it.
"""
import random
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))

from biogds.annotation import AnnotationStore  # noqa: E402
from biogds.cli import build_corpora  # noqa: E402
from biogds.config import PipelineConfig  # noqa: E402
from biogds.corpus import sample_gold  # noqa: E402
from biogds.metrics import evaluate_automatic_labels, render_report  # noqa: E402


def main() -> int:
    config = PipelineConfig.from_file(ROOT / "fixtures" / "pipeline_config.json")
    for key in PipelineConfig.REQUIRED_INPUTS:
        setattr(config, key, str(ROOT / getattr(config, key)))
    corpora = build_corpora(config)
    sample = sample_gold(corpora["normal"], corpora["skip"], n_per_relation=2, seed=13)
    print(f"gold sample: {len(sample.items)} items "
          f"({len(sample.shortfalls)} cells short at fixture scale)")

    with tempfile.TemporaryDirectory() as tmp:
        store = AnnotationStore(Path(tmp) / "events.jsonl")
        task = store.create_task(sample.items, ["anna", "ben"], "Richtlinien", seed=1)

        rng = random.Random(99)
        for annotator, flip_rate in (("anna", 0.0), ("ben", 0.15)):
            while (item := store.next_item(task.task_id, annotator)) is not None:
                label = item.label.value
                if rng.random() < flip_rate:
                    label = "other" if label != "other" else "birthplace"
                store.submit_label(task.task_id, item.instance_id, annotator, label)

        agreement = store.agreement(task.task_id)
        print(f"agreement: kappa={agreement['kappa']:.2f} "
              f"over {agreement['double_labelled']} items, "
              f"{agreement['disagreements']} disagreements")
        for i, d in enumerate(store.list_disagreements(task.task_id)):
            side = "anna" if i % 2 else "ben"  # the resolver upholds either side
            store.adjudicate(task.task_id, d["instance_id"], d["labels"][side], "resolver")
        gold = store.export_gold(task.task_id)
        print(f"exported {len(gold)} gold labels")
        report = evaluate_automatic_labels(gold, task.items)
        print(render_report(report, title="automatic labels vs. adjudicated gold"))
    return 0


if __name__ == "__main__":
    sys.exit(main())
