"""Seeded synthetic article/record generator for invariant tests.

Articles are built directly as ArticleDoc objects (no markup round trip);
each sentence may mention the subject plus a mix of values that do or do
not belong to the record, so first-occurrence closure, skip behaviour and
the other-pool all get exercised.
"""
from __future__ import annotations

import random

from biogds.config import GERMAN_MONTHS, LabelConfig, LanguageConfig
from biogds.ingest import ArticleDoc, Sentence
from biogds.knowledge import (
    Gazetteer,
    OccupationEntry,
    PartialDate,
    PersonName,
    PersonRecord,
    PlaceEntry,
    build_field_gazetteers,
)

FILLERS = ("und", "dann", "dort", "lebte", "arbeitete", "gerne", "viel", "wurde", "bekannt")

N_JOBS = 6  # jobs 0..2 belong to records, 3..5 never do (other fodder)


def occupation_gazetteer() -> Gazetteer:
    gaz = Gazetteer("OCCUPATION")
    for k in range(N_JOBS):
        gaz.add(f"Beruf{k}m", "occupation", f"job{k}")
        gaz.add(f"Beruf{k}f", "occupation", f"job{k}")
    return gaz


def _date_text(rng: random.Random, date: PartialDate) -> str:
    if date.day is not None:
        return f"{date.day} {GERMAN_MONTHS[date.month - 1]} {date.year}"
    if date.month is not None:
        return f"{GERMAN_MONTHS[date.month - 1]} {date.year}"
    return f"*{date.year}"


def make_record(rng: random.Random, n: int) -> PersonRecord:
    record = PersonRecord(
        person_id=f"p{n}",
        names={"en": PersonName(f"Vorname{n} Nachname{n}")},
        birthdate=PartialDate(rng.randrange(1700, 1990), rng.randrange(1, 13), rng.randrange(1, 28)),
    )
    if rng.random() < 0.8:
        record.deathdate = PartialDate(rng.randrange(1990, 2020), rng.randrange(1, 13), rng.randrange(1, 28))
    if rng.random() < 0.9:
        record.birthplace = PlaceEntry(names=[f"Geburtsort{n}", f"Birthtown{n}"])
    if rng.random() < 0.7:
        record.deathplace = PlaceEntry(names=[f"Sterbeort{n}"])
    for k in rng.sample(range(3), rng.randrange(0, 3)):
        record.occupations.append(OccupationEntry(f"job{k}", f"Beruf{k}m", f"Beruf{k}f"))
    if rng.random() < 0.6:
        record.educated_at.append([f"Hochschule{n}", f"College{n}"])
    if rng.random() < 0.5:
        record.parents.append([f"Altvordere{n}"])
    if rng.random() < 0.5:
        record.children.append([f"Kind{n}"])
    if rng.random() < 0.5:
        record.siblings.append([f"Geschwister{n}"])
    return record


def _sentence_tokens(rng: random.Random, record: PersonRecord, n: int) -> list[str]:
    tokens: list[str] = []
    if rng.random() < 0.85:
        alias = rng.choice([record.names["en"].canonical, f"Nachname{n}"])
        tokens.append(alias)
    tokens.append(rng.choice(FILLERS))
    for _ in range(rng.randrange(0, 4)):
        kind = rng.randrange(0, 8)
        if kind == 0 and record.birthdate:
            tokens.append(_date_text(rng, record.birthdate))
        elif kind == 1 and record.deathdate:
            tokens.append(_date_text(rng, record.deathdate))
        elif kind == 2:
            # a date that belongs to nobody
            tokens.append(f"{rng.randrange(1, 28)} {GERMAN_MONTHS[rng.randrange(12)]} {rng.randrange(1000, 1600)}")
        elif kind == 3 and record.birthplace:
            tokens.append(rng.choice(record.birthplace.names))
        elif kind == 4 and record.deathplace:
            tokens.append(rng.choice(record.deathplace.names))
        elif kind == 5:
            tokens.append(rng.choice([f"Beruf{rng.randrange(N_JOBS)}m", f"Beruf{rng.randrange(N_JOBS)}f"]))
        elif kind == 6:
            for group in (record.educated_at, record.parents, record.children, record.siblings):
                if group and rng.random() < 0.5:
                    tokens.append(rng.choice(group[0]))
                    break
            else:
                tokens.append(rng.choice(FILLERS))
        else:
            tokens.append(rng.choice(FILLERS))
        tokens.append(rng.choice(FILLERS))
    return tokens


def make_article(rng: random.Random, article_id: int) -> tuple[ArticleDoc, PersonRecord]:
    n = article_id
    record = make_record(rng, n)
    sentences = []
    offset = 0
    for index in range(rng.randrange(1, 8)):
        text = " ".join(_sentence_tokens(rng, record, n)) + "."
        sentences.append(Sentence(index=index, text=text, char_offset=offset))
        offset += len(text) + 1
    doc = ArticleDoc(
        article_id=article_id,
        language="de",
        title=record.names["en"].canonical,
        person_id=record.person_id,
        sentences=sentences,
    )
    return doc, record


def gazetteers_for(record: PersonRecord) -> list[Gazetteer]:
    return [*build_field_gazetteers(record), occupation_gazetteer()]


def label_config(seed: int = 0) -> LabelConfig:
    return LabelConfig(other_cap=2, seed=seed, language=LanguageConfig.for_language("de"))


def drop_first_sentence(doc: ArticleDoc) -> ArticleDoc:
    """The same article with sentence 0 deleted and indices shifted down."""
    return ArticleDoc(
        article_id=doc.article_id,
        language=doc.language,
        title=doc.title,
        person_id=doc.person_id,
        sentences=[
            Sentence(index=s.index - 1, text=s.text, char_offset=s.char_offset)
            for s in doc.sentences[1:]
        ],
    )
