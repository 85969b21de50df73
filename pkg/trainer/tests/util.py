"""Toy corpus fixtures for trainer tests: the e2 cue token determines the
label, so a small model can memorize the mapping quickly."""
from __future__ import annotations

import hashlib
import json
from pathlib import Path

RELATIONS = (
    "birthdate", "birthplace", "child", "deathdate", "deathplace",
    "educated", "occupation", "other", "parent", "sibling",
)

CUES = {label: f"Cue{label.capitalize()}" for label in RELATIONS}


def toy_instances(n: int, start: int = 0) -> list[dict]:
    out = []
    for i in range(start, start + n):
        label = RELATIONS[i % len(RELATIONS)]
        cue = CUES[label]
        text = f"<e1>Person{i}</e1> stand neben <e2>{cue}</e2> im Haus Nummer {i}."
        iid = hashlib.sha1(f"toy-{i}".encode()).hexdigest()[:16]
        out.append({
            "instance_id": iid,
            "article_id": 9000 + i,
            "sentence_index": 0,
            "marked_text": text,
            "e1_start": 0,
            "e1_end": len(f"Person{i}"),
            "e2_start": text.replace("<e1>", "").replace("</e1>", "").index(cue) - 4,
            "e2_end": 0,
            "label": label,
            "method": "normal",
            "matched_key": None,
        })
    return out


def write_corpus(records: list[dict], path: Path, method: str = "normal") -> Path:
    with path.open("w", encoding="utf-8") as fh:
        fh.write(json.dumps({"meta": {"language": "de", "method": method}}) + "\n")
        for rec in records:
            fh.write(json.dumps(rec, ensure_ascii=False) + "\n")
    return path
