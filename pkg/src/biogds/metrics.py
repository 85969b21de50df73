"""Evaluation math: per-relation precision/recall/F1 with macro and weighted
aggregates, confusion matrices, and Cohen's kappa.

Scores are stored at full precision; rounding to two decimals happens only
when a report is rendered.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .errors import DataError, InputError
from .labeller import RELATION_NAMES, RelationInstance

# Row order used by the rendered evaluation tables.
REPORT_ORDER = (
    "birthdate", "birthplace", "deathdate", "deathplace", "educated",
    "occupation", "parent", "sibling", "child", "other",
)


@dataclass(frozen=True)
class ClassScore:
    precision: float
    recall: float
    f1: float
    support: int


@dataclass
class EvalReport:
    labels: tuple[str, ...]
    per_class: dict[str, ClassScore]
    macro: tuple[float, float, float]
    weighted: tuple[float, float, float]
    total_support: int
    confusion: dict[str, dict[str, int]]
    kappa: float | None = None
    zero_division: frozenset[str] = frozenset()

    def to_dict(self) -> dict:
        return {
            "labels": list(self.labels),
            "per_class": {
                c: {"precision": s.precision, "recall": s.recall, "f1": s.f1, "support": s.support}
                for c, s in self.per_class.items()
            },
            "macro": {"precision": self.macro[0], "recall": self.macro[1], "f1": self.macro[2]},
            "weighted": {
                "precision": self.weighted[0], "recall": self.weighted[1], "f1": self.weighted[2]
            },
            "total_support": self.total_support,
            "confusion": self.confusion,
            "kappa": self.kappa,
            "zero_division": sorted(self.zero_division),
        }


def prf_report(
    gold: Sequence[str],
    predicted: Sequence[str],
    labels: Iterable[str] = RELATION_NAMES,
) -> EvalReport:
    """One-vs-rest P/R/F1 per class plus macro (over classes with gold
    support) and support-weighted means. Divisions by zero score 0 and the
    affected classes are flagged."""
    labels = tuple(labels)
    if len(gold) != len(predicted):
        raise DataError(f"gold and predictions differ in length: {len(gold)} vs {len(predicted)}")
    label_set = set(labels)
    stray = {x for x in (*gold, *predicted) if x not in label_set}
    if stray:
        raise DataError(f"labels outside the declared set: {sorted(stray)}")

    confusion = {g: {p: 0 for p in labels} for g in labels}
    for g, p in zip(gold, predicted):
        confusion[g][p] += 1

    per_class: dict[str, ClassScore] = {}
    flagged = set()
    for c in labels:
        tp = confusion[c][c]
        fp = sum(confusion[g][c] for g in labels if g != c)
        fn = sum(confusion[c][p] for p in labels if p != c)
        support = tp + fn
        if tp + fp:
            precision = tp / (tp + fp)
        else:
            precision = 0.0
            flagged.add(c)
        if tp + fn:
            recall = tp / (tp + fn)
        else:
            recall = 0.0
            flagged.add(c)
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        per_class[c] = ClassScore(precision, recall, f1, support)

    live = [per_class[c] for c in labels if per_class[c].support > 0]
    if live:
        macro = (
            sum(s.precision for s in live) / len(live),
            sum(s.recall for s in live) / len(live),
            sum(s.f1 for s in live) / len(live),
        )
    else:
        macro = (0.0, 0.0, 0.0)
    total = sum(s.support for s in per_class.values())
    if total:
        weighted = (
            sum(s.precision * s.support for s in per_class.values()) / total,
            sum(s.recall * s.support for s in per_class.values()) / total,
            sum(s.f1 * s.support for s in per_class.values()) / total,
        )
    else:
        weighted = (0.0, 0.0, 0.0)
    return EvalReport(
        labels=labels,
        per_class=per_class,
        macro=macro,
        weighted=weighted,
        total_support=total,
        confusion=confusion,
        zero_division=frozenset(flagged),
    )


def cohens_kappa(a: Sequence[str], b: Sequence[str]) -> float:
    """Chance-corrected agreement between two annotators.

    kappa = (p_o - p_e) / (1 - p_e) with p_e from the two marginal label
    distributions; two identical constant vectors give 1.0 by convention.
    """
    if len(a) != len(b):
        raise DataError(f"annotation vectors differ in length: {len(a)} vs {len(b)}")
    if not a:
        raise DataError("cannot compute kappa over zero items")
    n = len(a)
    p_o = sum(1 for x, y in zip(a, b) if x == y) / n
    labels = set(a) | set(b)
    p_e = sum(
        (sum(1 for x in a if x == lab) / n) * (sum(1 for y in b if y == lab) / n)
        for lab in labels
    )
    if p_e == 1.0:
        return 1.0
    return (p_o - p_e) / (1 - p_e)


def evaluate_automatic_labels(
    gold_annotations: Mapping[str, str],
    sampled: Sequence[RelationInstance],
) -> EvalReport:
    """Score automatic labels against adjudicated truth. The automatic label
    is the prediction; supports count by truth label."""
    missing = [inst.instance_id for inst in sampled if inst.instance_id not in gold_annotations]
    if missing:
        raise DataError(f"unadjudicated instances: {missing}")
    gold = [gold_annotations[inst.instance_id] for inst in sampled]
    pred = [inst.label.value for inst in sampled]
    return prf_report(gold, pred)


def read_predictions(path: str | Path) -> dict[str, str]:
    """Prediction file of tab-separated (instance_id, label) line records."""
    p = Path(path)
    if not p.is_file():
        raise InputError(f"prediction file not found: {p}")
    predictions: dict[str, str] = {}
    with p.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise InputError(f"{p}:{lineno}: expected 'instance_id<TAB>label'")
            predictions[parts[0]] = parts[1]
    return predictions


def evaluate_predictions(
    predictions: Mapping[str, str],
    gold_instances: Sequence[RelationInstance],
) -> EvalReport:
    """Score an externally produced prediction file against gold instances."""
    gold_ids = {inst.instance_id for inst in gold_instances}
    missing = sorted(gold_ids - set(predictions))
    if missing:
        raise DataError(f"predictions missing for instances: {missing}")
    unknown = sorted(set(predictions) - gold_ids)
    if unknown:
        raise DataError(f"predictions for unknown instances: {unknown}")
    gold = [inst.label.value for inst in gold_instances]
    pred = [predictions[inst.instance_id] for inst in gold_instances]
    return prf_report(gold, pred)


# --- rendering -----------------------------------------------------------------


def _fmt(value: float) -> str:
    if value >= 0.995:
        return "1.0"
    return f"{value:.2f}"[1:]


def render_report(report: EvalReport, title: str = "") -> str:
    """Aligned text table: one row per relation, then the macro row."""
    rows = []
    order = [c for c in REPORT_ORDER if c in report.per_class]
    order += [c for c in report.labels if c not in order]
    for c in order:
        s = report.per_class[c]
        if s.support == 0:
            rows.append((c, "-", "-", "-", "0"))
        else:
            rows.append((c, _fmt(s.precision), _fmt(s.recall), _fmt(s.f1), str(s.support)))
    rows.append(("macro", _fmt(report.macro[0]), _fmt(report.macro[1]),
                 _fmt(report.macro[2]), str(report.total_support)))
    rows.append(("weighted", _fmt(report.weighted[0]), _fmt(report.weighted[1]),
                 _fmt(report.weighted[2]), str(report.total_support)))
    header = ("Relation", "P", "R", "F1", "Supp.")
    widths = [max(len(header[i]), *(len(r[i]) for r in rows)) for i in range(5)]
    lines = []
    if title:
        lines.append(title)
    lines.append("  ".join(h.ljust(widths[i]) if i == 0 else h.rjust(widths[i])
                           for i, h in enumerate(header)))
    for r in rows:
        lines.append("  ".join(v.ljust(widths[i]) if i == 0 else v.rjust(widths[i])
                               for i, v in enumerate(r)))
    if report.kappa is not None:
        lines.append(f"kappa: {report.kappa:.2f}")
    return "\n".join(lines)


def render_confusion(report: EvalReport) -> str:
    """Gold rows vs predicted columns, labels in report order."""
    order = [c for c in REPORT_ORDER if c in report.per_class]
    order += [c for c in report.labels if c not in order]
    width = max(len(c) for c in order) + 1
    cell = max(6, max(len(c) for c in order) + 1)
    lines = ["gold \\ pred".ljust(width) + "".join(c.rjust(cell) for c in order)]
    for g in order:
        lines.append(g.ljust(width) + "".join(str(report.confusion[g][p]).rjust(cell) for p in order))
    return "\n".join(lines)
