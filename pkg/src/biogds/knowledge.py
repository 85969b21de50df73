"""Structured person facts: curated-list loading, knowledge-base enrichment,
place-name resolution, and gazetteer construction.

Stores built here are immutable after the build step and shared read-only by
labelling workers.
"""
from __future__ import annotations

import csv
import json
import re
from collections import Counter
from dataclasses import dataclass, field
from decimal import ROUND_DOWN, Decimal
from pathlib import Path

from .errors import DataError, InputError

GAZETTEER_KINDS = ("PERSON", "LOCATION", "ORG", "OCCUPATION", "MISC")

_PARTIAL_DATE_RE = re.compile(r"^(-?\d{1,4})(?:-(\d{1,2}))?(?:-(\d{1,2}))?$")
_DAYS_IN_MONTH = (31, 29, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31)


@dataclass(frozen=True)
class PartialDate:
    """A date where month and day may be unknown. Negative years are BCE."""

    year: int
    month: int | None = None
    day: int | None = None

    def __post_init__(self):
        parts = (self.year, self.month, self.day)
        if self.day is not None and self.month is None:
            raise DataError(f"partial date {parts} has a day but no month")
        if self.month is not None and not 1 <= self.month <= 12:
            raise DataError(f"month out of range in {parts}")
        if self.day is not None and not 1 <= self.day <= _DAYS_IN_MONTH[self.month - 1]:
            raise DataError(f"day out of range in {parts}")

    def __str__(self) -> str:
        if self.day is not None:
            return f"{self.year:04d}-{self.month:02d}-{self.day:02d}"
        if self.month is not None:
            return f"{self.year:04d}-{self.month:02d}"
        return f"{self.year:04d}"


def parse_partial_date(cell: str) -> PartialDate | None:
    """Parse ISO-style year / year-month / year-month-day; None if malformed."""
    m = _PARTIAL_DATE_RE.match(cell.strip())
    if not m:
        return None
    year = int(m.group(1))
    month = int(m.group(2)) if m.group(2) else None
    day = int(m.group(3)) if m.group(3) else None
    try:
        return PartialDate(year, month, day)
    except DataError:
        return None


@dataclass
class PlaceEntry:
    """A place with every known surface form. First name is the curated one."""

    names: list[str]
    geonames_id: int | None = None
    lat: float | None = None
    lon: float | None = None

    def __post_init__(self):
        if not self.names:
            raise DataError("place entry needs at least one name")
        if self.lat is not None and not -90 <= self.lat <= 90:
            raise DataError(f"latitude out of range: {self.lat}")
        if self.lon is not None and not -180 <= self.lon <= 180:
            raise DataError(f"longitude out of range: {self.lon}")

    def add_name(self, name: str) -> None:
        if name and name not in self.names:
            self.names.append(name)


@dataclass(frozen=True)
class OccupationEntry:
    """An occupation label with both gendered target-language forms."""

    source_label: str
    target_masculine: str
    target_feminine: str

    def __post_init__(self):
        if not (self.source_label and self.target_masculine and self.target_feminine):
            raise DataError(f"occupation entry has empty forms: {self}")


@dataclass
class PersonName:
    canonical: str
    aliases: list[str] = field(default_factory=list)

    def add_alias(self, name: str) -> None:
        if name and name != self.canonical and name not in self.aliases:
            self.aliases.append(name)

    def all_forms(self) -> list[str]:
        return [self.canonical, *self.aliases]


@dataclass
class PersonRecord:
    """Merged structured facts about one person."""

    person_id: str
    names: dict[str, PersonName]
    qid: str | None = None
    en_page_id: int | None = None
    target_page_id: int | None = None
    birthdate: PartialDate | None = None
    deathdate: PartialDate | None = None
    birthplace: PlaceEntry | None = None
    deathplace: PlaceEntry | None = None
    occupations: list[OccupationEntry] = field(default_factory=list)
    educated_at: list[list[str]] = field(default_factory=list)
    parents: list[list[str]] = field(default_factory=list)
    children: list[list[str]] = field(default_factory=list)
    siblings: list[list[str]] = field(default_factory=list)

    def occupation_labels(self) -> set[str]:
        return {o.source_label for o in self.occupations}


def normalize_surface(surface: str) -> str:
    """Case-fold and collapse whitespace. Idempotent."""
    return " ".join(surface.casefold().split())


@dataclass
class Gazetteer:
    """Normalized surfaces of one kind mapped to (field key, record key)."""

    kind: str
    entries: dict[str, tuple[str, str]] = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in GAZETTEER_KINDS:
            raise DataError(f"unknown gazetteer kind {self.kind!r}")

    def add(self, surface: str, field_key: str, record_key: str) -> None:
        norm = normalize_surface(surface)
        if not norm:
            return
        self.entries.setdefault(norm, (field_key, record_key))


# --- curated person list -------------------------------------------------

_PLACE_FIELDS = {"birthplace": "birthplace", "deathplace": "deathplace"}


def _parse_place(row: dict, prefix: str) -> PlaceEntry | None:
    name = (row.get(f"{prefix}_name") or "").strip()
    if not name:
        return None
    gid = (row.get(f"{prefix}_geonames_id") or "").strip()
    lat = (row.get(f"{prefix}_lat") or "").strip()
    lon = (row.get(f"{prefix}_lon") or "").strip()
    return PlaceEntry(
        names=[name],
        geonames_id=int(gid) if gid else None,
        lat=float(lat) if lat else None,
        lon=float(lon) if lon else None,
    )


def load_person_list(path: str | Path, counts: Counter | None = None) -> list[PersonRecord]:
    """Load the curated biography list from a tab- or comma-separated file.

    Columns: person_id, name, qid, en_page_id, birthdate, deathdate,
    birthplace_name/_geonames_id/_lat/_lon, deathplace_* (same four),
    occupations (pipe-separated source labels). Missing cells leave the
    field absent; malformed date cells are dropped and counted.
    """
    p = Path(path)
    if not p.is_file():
        raise InputError(f"person list not found: {p}")
    counts = counts if counts is not None else Counter()
    delimiter = "\t" if p.suffix == ".tsv" else ","
    records: list[PersonRecord] = []
    seen: set[str] = set()
    with p.open(encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh, delimiter=delimiter)
        if reader.fieldnames is None or "person_id" not in reader.fieldnames:
            raise InputError(f"person list {p} lacks a person_id column")
        for row in reader:
            pid = (row.get("person_id") or "").strip()
            name = (row.get("name") or "").strip()
            if not pid or not name:
                raise DataError(f"person list row missing person_id or name: {row}")
            if pid in seen:
                raise DataError(f"duplicate person_id {pid!r} in {p}")
            seen.add(pid)
            record = PersonRecord(person_id=pid, names={"en": PersonName(name)})
            qid = (row.get("qid") or "").strip()
            record.qid = qid or None
            page = (row.get("en_page_id") or "").strip()
            if page:
                record.en_page_id = int(page)
                if record.en_page_id <= 0:
                    raise DataError(f"non-positive page id for {pid}")
            for attr in ("birthdate", "deathdate"):
                cell = (row.get(attr) or "").strip()
                if cell:
                    parsed = parse_partial_date(cell)
                    if parsed is None:
                        counts["date_parse_warning"] += 1
                    else:
                        setattr(record, attr, parsed)
            record.birthplace = _parse_place(row, "birthplace")
            record.deathplace = _parse_place(row, "deathplace")
            occ_cell = (row.get("occupations") or "").strip()
            if occ_cell:
                for label in occ_cell.split("|"):
                    label = label.strip()
                    if label:
                        record.occupations.append(OccupationEntry(label, label, label))
            records.append(record)
            counts["person_rows"] += 1
    return records


# --- knowledge-base snapshot ----------------------------------------------


def load_kb_snapshot(path: str | Path) -> dict[str, dict]:
    """Read a line-delimited snapshot keyed by qid. No network access."""
    p = Path(path)
    if not p.is_file():
        raise InputError(f"knowledge-base snapshot not found: {p}")
    snapshot: dict[str, dict] = {}
    with p.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as e:
                raise InputError(f"{p}:{lineno}: bad snapshot line: {e}") from e
            qid = obj.get("qid")
            if not qid:
                raise DataError(f"{p}:{lineno}: snapshot record lacks qid")
            snapshot[qid] = obj
    return snapshot


def _name_set_from(obj) -> list[str]:
    """A relative/institution entry maps language -> label or label list."""
    forms: list[str] = []
    if isinstance(obj, dict):
        for value in obj.values():
            for label in value if isinstance(value, list) else [value]:
                if label and label not in forms:
                    forms.append(label)
    elif isinstance(obj, str) and obj:
        forms.append(obj)
    return forms


def _merge_name_set(target: list[list[str]], forms: list[str]) -> None:
    if not forms:
        return
    if any(set(existing) == set(forms) for existing in target):
        return
    target.append(forms)


def enrich_with_knowledge_base(
    record: PersonRecord, kb_records: dict[str, dict], counts: Counter | None = None
) -> PersonRecord:
    """Augment a record from the snapshot. Curated values are never replaced,
    only alias/name sets grow; a qid absent from the snapshot is a no-op.
    """
    counts = counts if counts is not None else Counter()
    if not record.qid or record.qid not in kb_records:
        counts["kb_miss"] += 1
        return record
    entry = kb_records[record.qid]
    for lang, label in (entry.get("labels") or {}).items():
        if lang in record.names:
            record.names[lang].add_alias(label)
        else:
            record.names[lang] = PersonName(label)
    for occ in entry.get("occupations") or []:
        source = occ.get("en") or occ.get("source")
        if not source:
            continue
        masculine = occ.get("m") or source
        feminine = occ.get("f") or masculine
        existing = next((o for o in record.occupations if o.source_label == source), None)
        if existing is None:
            record.occupations.append(OccupationEntry(source, masculine, feminine))
            counts["kb_occupation_added"] += 1
        elif existing.target_masculine == existing.source_label:
            record.occupations[record.occupations.index(existing)] = OccupationEntry(
                source, masculine, feminine
            )
    for field_name in ("birthplace", "deathplace"):
        place = getattr(record, field_name)
        labels = entry.get(field_name)
        if place is None or not labels:
            continue
        for form in _name_set_from(labels):
            place.add_name(form)
    for kb_key, attr in (
        ("educated_at", "educated_at"),
        ("parents", "parents"),
        ("children", "children"),
        ("siblings", "siblings"),
    ):
        for item in entry.get(kb_key) or []:
            _merge_name_set(getattr(record, attr), _name_set_from(item))
    counts["kb_hit"] += 1
    return record


# --- GeoNames alternate names ----------------------------------------------


def truncate_coordinate(value: float, digits: int = 4) -> Decimal:
    """Truncate (toward zero) to the leading significant digits, sign kept."""
    d = Decimal(str(value))
    if d == 0:
        return Decimal(0)
    quantum = Decimal(1).scaleb(d.adjusted() - digits + 1)
    return d.quantize(quantum, rounding=ROUND_DOWN)


def load_alternates_table(path: str | Path) -> list[tuple[int, str, float, float]]:
    """Rows of (geonames_id, alternate name, lat, lon) from a TSV file."""
    p = Path(path)
    if not p.is_file():
        raise InputError(f"alternates table not found: {p}")
    rows = []
    with p.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) < 4:
                raise InputError(f"{p}:{lineno}: expected 4 tab-separated columns")
            rows.append((int(parts[0]), parts[1], float(parts[2]), float(parts[3])))
    return rows


def resolve_place_names(
    place: PlaceEntry,
    alternates: list[tuple[int, str, float, float]],
    counts: Counter | None = None,
) -> PlaceEntry:
    """Add every alternate name whose id matches and whose coordinates agree
    after truncation to 4 significant digits. Ids and coordinates stay as-is.
    """
    counts = counts if counts is not None else Counter()
    if place.geonames_id is None and (place.lat is None or place.lon is None):
        counts["place_unresolvable"] += 1
        return place
    if place.geonames_id is None or place.lat is None or place.lon is None:
        counts["place_partial_keys"] += 1
        return place
    want_lat = truncate_coordinate(place.lat)
    want_lon = truncate_coordinate(place.lon)
    for gid, name, lat, lon in alternates:
        if gid != place.geonames_id:
            continue
        if truncate_coordinate(lat) == want_lat and truncate_coordinate(lon) == want_lon:
            place.add_name(name)
            counts["alternate_accepted"] += 1
        else:
            counts["alternate_coordinate_rejected"] += 1
    return place


# --- occupation translations -------------------------------------------------


def load_occupation_table(path: str | Path) -> dict[str, tuple[str, str]]:
    """source label -> (masculine, feminine) from a 3-column TSV file."""
    p = Path(path)
    if not p.is_file():
        raise InputError(f"occupation table not found: {p}")
    table: dict[str, tuple[str, str]] = {}
    with p.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) < 3:
                raise InputError(f"{p}:{lineno}: expected 3 tab-separated columns")
            source, masculine, feminine = (s.strip() for s in parts[:3])
            if not (source and masculine and feminine):
                raise DataError(f"{p}:{lineno}: empty occupation form")
            table[source] = (masculine, feminine)
    return table


def build_occupation_gazetteer(
    occupations: list[str], translation_table: dict[str, tuple[str, str]]
) -> Gazetteer:
    """Gazetteer holding both gendered forms of every source label."""
    missing = sorted({o for o in occupations if o not in translation_table})
    if missing:
        raise DataError(f"occupation labels missing from translation table: {missing}")
    gaz = Gazetteer(kind="OCCUPATION")
    for label in occupations:
        masculine, feminine = translation_table[label]
        gaz.add(masculine, "occupation", label)
        gaz.add(feminine, "occupation", label)
    return gaz


def translate_record_occupations(
    record: PersonRecord, table: dict[str, tuple[str, str]]
) -> None:
    """Fill still-untranslated target forms on a record from the table."""
    for i, entry in enumerate(record.occupations):
        if entry.target_masculine != entry.source_label:
            continue
        if entry.source_label in table:
            masculine, feminine = table[entry.source_label]
            record.occupations[i] = OccupationEntry(entry.source_label, masculine, feminine)


# --- per-record field gazetteers ---------------------------------------------


def build_field_gazetteers(
    record: PersonRecord, relative_surname_alias: bool = False
) -> list[Gazetteer]:
    """One gazetteer per populated relation field, all surface languages in."""
    gazetteers: list[Gazetteer] = []

    def place_gazetteer(place: PlaceEntry | None, field_key: str) -> None:
        if place is None:
            return
        gaz = Gazetteer(kind="LOCATION")
        for name in place.names:
            gaz.add(name, field_key, place.names[0])
        if gaz.entries:
            gazetteers.append(gaz)

    def name_set_gazetteer(kind: str, name_sets: list[list[str]], field_key: str) -> None:
        gaz = Gazetteer(kind=kind)
        for forms in name_sets:
            if not forms:
                continue
            canonical = forms[0]
            for form in forms:
                gaz.add(form, field_key, canonical)
            if relative_surname_alias and kind == "PERSON":
                parts = canonical.split()
                if len(parts) >= 2:
                    gaz.add(parts[-1], field_key, canonical)
        if gaz.entries:
            gazetteers.append(gaz)

    place_gazetteer(record.birthplace, "birthplace")
    place_gazetteer(record.deathplace, "deathplace")
    name_set_gazetteer("ORG", record.educated_at, "educated")
    name_set_gazetteer("PERSON", record.parents, "parent")
    name_set_gazetteer("PERSON", record.children, "child")
    name_set_gazetteer("PERSON", record.siblings, "sibling")
    return gazetteers


def lookup_fields(gazetteers: list[Gazetteer], surface: str) -> list[tuple[str, str]]:
    """All (field key, record key) pairs a surface satisfies, in gazetteer order."""
    norm = normalize_surface(surface)
    hits = []
    for gaz in gazetteers:
        entry = gaz.entries.get(norm)
        if entry is not None and entry not in hits:
            hits.append(entry)
    return hits
