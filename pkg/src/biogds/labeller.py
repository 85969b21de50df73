"""The guided-distant-supervision core: turn an article plus a person record
into labelled relation instances under the first-occurrence rule.

Two corpus variants exist: "normal" labels every sentence, "skip" ignores
each article's first sentence (index 0) to diversify sentence structure.
"""
from __future__ import annotations

import enum
import hashlib
import random
from collections import Counter
from dataclasses import dataclass

from .config import LabelConfig
from .errors import DataError
from .ingest import ArticleDoc
from .knowledge import Gazetteer, PersonRecord, build_field_gazetteers, lookup_fields
from .matcher import (
    COMBINED_KIND_RANK,
    EntityMention,
    _Candidate,
    _to_mention,
    date_equals,
    detect_main_entity,
    match_dates,
    match_gazetteers,
    resolve_spans,
)

METHODS = ("normal", "skip")


class Relation(str, enum.Enum):
    """The closed 10-label relation set. Serialized names are fixed."""

    birthdate = "birthdate"
    birthplace = "birthplace"
    child = "child"
    deathdate = "deathdate"
    deathplace = "deathplace"
    educated = "educated"
    occupation = "occupation"
    other = "other"
    parent = "parent"
    sibling = "sibling"

    def __str__(self) -> str:  # pragma: no cover - cosmetic
        return self.value


RELATION_NAMES = tuple(r.value for r in Relation)

E1_OPEN, E1_CLOSE, E2_OPEN, E2_CLOSE = "<e1>", "</e1>", "<e2>", "</e2>"
_ALL_TAGS = (E1_OPEN, E1_CLOSE, E2_OPEN, E2_CLOSE)


class MarkerError(DataError):
    """Spans passed to the marker inserter are invalid."""


def insert_markers(sentence_text: str, e1_span: tuple[int, int], e2_span: tuple[int, int]) -> str:
    """Wrap the two spans in <e1>/<e2> tags, inserting right-to-left so the
    given offsets stay valid. Tag names follow the spans, not text order."""
    for span in (e1_span, e2_span):
        start, end = span
        if not 0 <= start < end <= len(sentence_text):
            raise MarkerError(f"span {span} out of bounds for sentence of length {len(sentence_text)}")
    (a1, b1), (a2, b2) = e1_span, e2_span
    if a1 < b2 and a2 < b1:
        raise MarkerError(f"overlapping spans {e1_span} and {e2_span}")
    if any(tag in sentence_text for tag in _ALL_TAGS):
        raise MarkerError("sentence already contains entity marker tags")
    pieces = sorted(
        [(e1_span, E1_OPEN, E1_CLOSE), (e2_span, E2_OPEN, E2_CLOSE)],
        key=lambda item: item[0][0],
        reverse=True,
    )
    out = sentence_text
    for (start, end), open_tag, close_tag in pieces:
        out = out[:start] + open_tag + out[start:end] + close_tag + out[end:]
    return out


def strip_markers(marked_text: str) -> str:
    """Remove the four entity marker tags (each occurring exactly once)."""
    out = marked_text
    for tag in _ALL_TAGS:
        if out.count(tag) != 1:
            raise MarkerError(f"expected exactly one {tag} in marked text")
        out = out.replace(tag, "", 1)
    return out


def extract_marked_spans(marked_text: str) -> tuple[str, tuple[int, int], tuple[int, int]]:
    """Inverse of insert_markers: (plain text, e1 span, e2 span)."""
    for tag in _ALL_TAGS:
        if marked_text.count(tag) != 1:
            raise MarkerError(f"expected exactly one {tag} in marked text")
    plain_parts: list[str] = []
    opens: dict[str, int] = {}
    spans: dict[str, tuple[int, int]] = {}
    i = 0
    plain_len = 0
    while i < len(marked_text):
        tag = next((t for t in _ALL_TAGS if marked_text.startswith(t, i)), None)
        if tag is None:
            plain_parts.append(marked_text[i])
            plain_len += 1
            i += 1
            continue
        if tag in (E1_OPEN, E2_OPEN):
            opens[tag] = plain_len
        else:
            open_tag = E1_OPEN if tag == E1_CLOSE else E2_OPEN
            if open_tag not in opens:
                raise MarkerError(f"{tag} appears before {open_tag}")
            spans["e1" if tag == E1_CLOSE else "e2"] = (opens[open_tag], plain_len)
        i += len(tag)
    if set(spans) != {"e1", "e2"}:
        raise MarkerError("marker tags are not properly nested")
    return "".join(plain_parts), spans["e1"], spans["e2"]


def instance_id(article_id: int, sentence_index: int, e1_span: tuple[int, int],
                e2_span: tuple[int, int], label: str, method: str) -> str:
    key = f"{article_id}|{sentence_index}|{e1_span[0]}:{e1_span[1]}|{e2_span[0]}:{e2_span[1]}|{label}|{method}"
    return hashlib.sha1(key.encode("utf-8")).hexdigest()[:16]


@dataclass(frozen=True)
class RelationInstance:
    """One marked sentence carrying one relation label."""

    instance_id: str
    article_id: int
    sentence_index: int
    marked_text: str
    e1_span: tuple[int, int]
    e2_span: tuple[int, int]
    label: Relation
    method: str
    matched_key: str | None = None

    @classmethod
    def create(cls, article_id: int, sentence_index: int, sentence_text: str,
               e1_span: tuple[int, int], e2_span: tuple[int, int],
               label: Relation, method: str, matched_key: str | None = None) -> "RelationInstance":
        return cls(
            instance_id=instance_id(article_id, sentence_index, e1_span, e2_span, label.value, method),
            article_id=article_id,
            sentence_index=sentence_index,
            marked_text=insert_markers(sentence_text, e1_span, e2_span),
            e1_span=e1_span,
            e2_span=e2_span,
            label=label,
            method=method,
            matched_key=matched_key,
        )

    def sort_key(self):
        return (self.article_id, self.sentence_index, self.e1_span, self.e2_span,
                self.label.value, self.method)


@dataclass(frozen=True)
class OtherCandidate:
    """A (sentence, e1, e2) pair whose e2 matched no record field."""

    article_id: int
    sentence_index: int
    sentence_text: str
    e1_span: tuple[int, int]
    e2_span: tuple[int, int]
    method: str


_DATE_FIELDS = ("birthdate", "deathdate")


def _candidate_mentions(text: str, gazetteers: list[Gazetteer], config: LabelConfig) -> list[EntityMention]:
    """Date and gazetteer mentions resolved together into one non-overlapping
    set; the date pattern outranks gazetteer kinds at equal span length."""
    pool = [
        _Candidate(m.start, m.end, m.kind, m.field_key, m.record_key)
        for m in match_dates(text, config.language) + match_gazetteers(text, gazetteers, config.field_priority)
    ]
    resolved = resolve_spans(pool, COMBINED_KIND_RANK, config.field_priority)
    return [_to_mention(text, c) for c in resolved]


def _field_matches(mention: EntityMention, record: PersonRecord,
                   gazetteers: list[Gazetteer], config: LabelConfig,
                   counts: Counter) -> list[tuple[str, str]]:
    """Every (relation field, matched record value) the mention satisfies,
    ordered by the configured field priority."""
    rank = {f: i for i, f in enumerate(config.field_priority)}
    hits: list[tuple[str, str]] = []
    if mention.kind == "DATE":
        for field in _DATE_FIELDS:
            target = getattr(record, field)
            if target is not None and date_equals(mention, target, config.language, counts):
                hits.append((field, str(target)))
    else:
        for field_key, record_key in lookup_fields(gazetteers, mention.surface):
            if field_key == "occupation" and record_key not in record.occupation_labels():
                continue
            hits.append((field_key, record_key))
    hits.sort(key=lambda h: rank.get(h[0], len(rank)))
    return hits


def label_article(
    doc: ArticleDoc,
    record: PersonRecord,
    method: str,
    config: LabelConfig,
    gazetteers: list[Gazetteer] | None = None,
    main_mentions: list[EntityMention | None] | None = None,
    counts: Counter | None = None,
) -> tuple[list[RelationInstance], list[OtherCandidate]]:
    """Label one article under the first-occurrence rule.

    Returns the non-other instances plus the pool of other-class candidates
    (sentence pairs whose e2 matched no record field); the pool is sampled
    separately by generate_other. Articles whose sentences never mention the
    main entity raise MainEntityNotFound upstream and are not passed here.
    """
    if method not in METHODS:
        raise DataError(f"unknown method {method!r}")
    counts = counts if counts is not None else Counter()
    if gazetteers is None:
        gazetteers = build_field_gazetteers(record, config.language.relative_surname_alias)
    texts = [s.text for s in doc.sentences]
    if main_mentions is None:
        main_mentions = detect_main_entity(texts, record, config.language)

    instances: list[RelationInstance] = []
    pool: list[OtherCandidate] = []
    closed: set[str] = set()
    for sentence in doc.sentences:
        if method == "skip" and sentence.index == 0:
            continue
        e1 = main_mentions[sentence.index]
        if e1 is None:
            continue
        e1_span = (e1.start, e1.end)
        for mention in _candidate_mentions(sentence.text, gazetteers, config):
            if mention.overlaps(e1):
                continue
            matches = _field_matches(mention, record, gazetteers, config, counts)
            if not matches:
                pool.append(OtherCandidate(
                    article_id=doc.article_id,
                    sentence_index=sentence.index,
                    sentence_text=sentence.text,
                    e1_span=e1_span,
                    e2_span=(mention.start, mention.end),
                    method=method,
                ))
                continue
            for field_key, matched_key in matches:
                if field_key in closed:
                    continue
                closed.add(field_key)
                instances.append(RelationInstance.create(
                    article_id=doc.article_id,
                    sentence_index=sentence.index,
                    sentence_text=sentence.text,
                    e1_span=e1_span,
                    e2_span=(mention.start, mention.end),
                    label=Relation(field_key),
                    method=method,
                    matched_key=matched_key,
                ))
                break
    instances.sort(key=RelationInstance.sort_key)
    return instances, pool


def generate_other(
    pool: list[OtherCandidate], cap: int, seed: int
) -> list[RelationInstance]:
    """Seeded per-article sampling (without replacement) of the other pool."""
    if cap < 0:
        raise DataError("other cap must be >= 0")
    if cap == 0 or not pool:
        return []
    by_article: dict[int, list[OtherCandidate]] = {}
    for cand in pool:
        by_article.setdefault(cand.article_id, []).append(cand)
    out: list[RelationInstance] = []
    for article_id in sorted(by_article):
        candidates = sorted(
            by_article[article_id],
            key=lambda c: (c.sentence_index, c.e1_span, c.e2_span),
        )
        rng = random.Random(f"{seed}:{article_id}")
        take = candidates if len(candidates) <= cap else rng.sample(candidates, cap)
        for cand in sorted(take, key=lambda c: (c.sentence_index, c.e1_span, c.e2_span)):
            out.append(RelationInstance.create(
                article_id=cand.article_id,
                sentence_index=cand.sentence_index,
                sentence_text=cand.sentence_text,
                e1_span=cand.e1_span,
                e2_span=cand.e2_span,
                label=Relation.other,
                method=cand.method,
            ))
    out.sort(key=RelationInstance.sort_key)
    return out
