"""Typed entity mentions in sentences: dates by pattern, everything else by
gazetteer lookup, plus main-entity detection.

All matching is case-insensitive on case-folded text with word boundaries at
Unicode-alphanumeric transitions. Case folding can change string length
(straße -> strasse), so searches run over a folded view that records, for
every folded character, the original span it came from; matches are rejected
unless they start and end on original-character boundaries.
"""
from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass
from functools import lru_cache

from .config import DEFAULT_FIELD_PRIORITY, LanguageConfig
from .errors import DataError
from .knowledge import Gazetteer, PartialDate, PersonRecord, normalize_surface

MENTION_KINDS = ("PERSON", "LOCATION", "ORG", "MISC", "DATE", "OCCUPATION")

# Fixed priority for overlapping gazetteer candidates.
GAZETTEER_KIND_RANK = {"PERSON": 0, "LOCATION": 1, "ORG": 2, "OCCUPATION": 3, "MISC": 4}
# Dates join the pool in the labeller; the pattern is higher-precision than
# any gazetteer surface, so it outranks them all.
COMBINED_KIND_RANK = {"DATE": -1, **GAZETTEER_KIND_RANK}


@dataclass(frozen=True)
class EntityMention:
    """A typed half-open character span into one sentence's text."""

    start: int
    end: int
    surface: str
    kind: str
    field_key: str | None = None
    record_key: str | None = None

    def __post_init__(self):
        if self.kind not in MENTION_KINDS:
            raise DataError(f"unknown mention kind {self.kind!r}")
        if not 0 <= self.start < self.end:
            raise DataError(f"bad mention span [{self.start}, {self.end})")

    def overlaps(self, other: "EntityMention") -> bool:
        return self.start < other.end and other.start < self.end


class FoldedText:
    """Case-folded view of a string with per-character origin tracking.

    Whitespace runs collapse to a single space so that normalized gazetteer
    surfaces (single-spaced) match any in-text spacing.
    """

    def __init__(self, text: str):
        self.text = text
        chars: list[str] = []
        starts: list[int] = []
        ends: list[int] = []
        head: list[bool] = []
        i = 0
        n = len(text)
        while i < n:
            c = text[i]
            if c.isspace():
                j = i
                while j < n and text[j].isspace():
                    j += 1
                chars.append(" ")
                starts.append(i)
                ends.append(j)
                head.append(True)
                i = j
                continue
            for k, fc in enumerate(c.casefold()):
                chars.append(fc)
                starts.append(i)
                ends.append(i + 1)
                head.append(k == 0)
            i += 1
        self.chars = "".join(chars)
        self._starts = starts
        self._ends = ends
        self._head = head

    def find_all(self, needle: str) -> list[tuple[int, int]]:
        """Original-text spans where the folded needle occurs on character
        boundaries with non-alphanumeric (or edge) context on both sides."""
        if not needle:
            return []
        spans = []
        folded = self.chars
        pos = folded.find(needle)
        while pos != -1:
            end = pos + len(needle)
            if (
                self._head[pos]
                and (end == len(folded) or self._head[end])
                and (pos == 0 or not folded[pos - 1].isalnum())
                and (end == len(folded) or not folded[end].isalnum())
            ):
                spans.append((self._starts[pos], self._ends[end - 1]))
            pos = folded.find(needle, pos + 1)
        return spans


@dataclass(frozen=True)
class _Candidate:
    start: int
    end: int
    kind: str
    field_key: str | None
    record_key: str | None

    @property
    def length(self) -> int:
        return self.end - self.start


def resolve_spans(
    candidates: list[_Candidate],
    kind_rank: dict[str, int],
    field_priority: tuple[str, ...] = DEFAULT_FIELD_PRIORITY,
) -> list[_Candidate]:
    """Pick non-overlapping candidates: longest first, then leftmost, then
    kind priority, then field priority, then record key. Returned in text order."""
    field_rank = {f: i for i, f in enumerate(field_priority)}
    ordered = sorted(
        candidates,
        key=lambda c: (
            -c.length,
            c.start,
            kind_rank[c.kind],
            field_rank.get(c.field_key, len(field_rank)),
            c.record_key or "",
        ),
    )
    chosen: list[_Candidate] = []
    for cand in ordered:
        if all(cand.end <= c.start or cand.start >= c.end for c in chosen):
            chosen.append(cand)
    return sorted(chosen, key=lambda c: c.start)


def _to_mention(text: str, cand: _Candidate) -> EntityMention:
    return EntityMention(
        start=cand.start,
        end=cand.end,
        surface=text[cand.start:cand.end],
        kind=cand.kind,
        field_key=cand.field_key,
        record_key=cand.record_key,
    )


# --- dates -------------------------------------------------------------------


@lru_cache(maxsize=8)
def _date_patterns(months: tuple[str, ...], aliases: tuple[str, ...],
                   day_month_year: bool, month_year: bool, marked_year: bool):
    names = sorted([*months, *aliases], key=len, reverse=True)
    month_alt = "|".join(re.escape(m) for m in names)
    patterns = []
    if day_month_year:
        patterns.append(re.compile(
            rf"\b(\d{{1,2}})\.?\s+({month_alt})\s+(\d{{3,4}})\b", re.IGNORECASE))
    if month_year:
        patterns.append(re.compile(rf"\b({month_alt})\s+(\d{{3,4}})\b", re.IGNORECASE))
    if marked_year:
        patterns.append(re.compile(r"[*†]\s*(\d{3,4})\b"))
    return tuple(patterns)


def _language_patterns(config: LanguageConfig):
    return _date_patterns(
        tuple(config.months),
        tuple(config.month_aliases),
        config.match_day_month_year,
        config.match_month_year,
        config.match_marked_year,
    )


def match_dates(text: str, config: LanguageConfig) -> list[EntityMention]:
    """DATE mentions; longest non-overlapping matches win, left to right.

    Covers "D. MONTH YYYY", "D MONTH YYYY", "MONTH YYYY", and bare 3-4 digit
    years directly after a birth (*) or death (†) sign.
    """
    patterns = _language_patterns(config)
    candidates = []
    for i, pat in enumerate(patterns):
        for m in pat.finditer(text):
            # The marked-year pattern anchors on the sign but the mention is
            # just the year digits.
            group = 1 if pat.pattern.startswith("[*†]") else 0
            start, end = m.span(group)
            candidates.append(_Candidate(start, end, "DATE", None, None))
    resolved = resolve_spans(candidates, {"DATE": 0})
    return [_to_mention(text, c) for c in resolved]


_MENTION_DMY_RE = re.compile(r"^(\d{1,2})\.?\s+(\S+)\s+(\d{3,4})$")
_MENTION_MY_RE = re.compile(r"^(\S+)\s+(\d{3,4})$")
_MENTION_Y_RE = re.compile(r"^(\d{3,4})$")


def parse_date_mention(surface: str, config: LanguageConfig) -> PartialDate | None:
    """Surface of a DATE mention -> PartialDate, None when unparseable."""
    s = " ".join(surface.split())
    m = _MENTION_DMY_RE.match(s)
    if m:
        month = config.month_number(m.group(2))
        if month is None:
            return None
        try:
            return PartialDate(int(m.group(3)), month, int(m.group(1)))
        except DataError:
            return None
    m = _MENTION_MY_RE.match(s)
    if m:
        month = config.month_number(m.group(1))
        if month is None:
            return None
        return PartialDate(int(m.group(2)), month)
    m = _MENTION_Y_RE.match(s)
    if m:
        return PartialDate(int(m.group(1)))
    return None


def date_equals(
    mention: EntityMention | str,
    target: PartialDate | None,
    config: LanguageConfig,
    counts: Counter | None = None,
) -> bool:
    """True iff years match and every component present on BOTH sides matches.

    A year-only record therefore accepts any mention within that year;
    an unparseable mention is False (and counted).
    """
    if target is None:
        return False
    surface = mention.surface if isinstance(mention, EntityMention) else mention
    parsed = parse_date_mention(surface, config)
    if parsed is None:
        if counts is not None:
            counts["unparseable_date_mention"] += 1
        return False
    if parsed.year != target.year:
        return False
    if parsed.month is not None and target.month is not None and parsed.month != target.month:
        return False
    if parsed.day is not None and target.day is not None and parsed.day != target.day:
        return False
    return True


# --- gazetteer matching --------------------------------------------------------


def match_gazetteers(
    text: str,
    gazetteers: list[Gazetteer],
    field_priority: tuple[str, ...] = DEFAULT_FIELD_PRIORITY,
) -> list[EntityMention]:
    """Non-overlapping gazetteer mentions, resolved longest/leftmost/kind."""
    folded = FoldedText(text)
    candidates = []
    for gaz in gazetteers:
        for surface, (field_key, record_key) in gaz.entries.items():
            for start, end in folded.find_all(surface):
                candidates.append(_Candidate(start, end, gaz.kind, field_key, record_key))
    resolved = resolve_spans(candidates, GAZETTEER_KIND_RANK, field_priority)
    return [_to_mention(text, c) for c in resolved]


# --- main entity --------------------------------------------------------------


def build_aliases(record: PersonRecord, config: LanguageConfig) -> list[str]:
    """Alias surfaces for the article's main person: every canonical name and
    stored alias, plus surname and given+surname forms when enabled."""
    aliases: list[str] = []

    def push(form: str) -> None:
        form = form.strip()
        if len(form) >= 2 and form not in aliases:
            aliases.append(form)

    for name in record.names.values():
        for form in name.all_forms():
            push(form)
            parts = form.split()
            if config.alias_surname and len(parts) >= 2:
                push(parts[-1])
            if config.alias_given_surname and len(parts) >= 3:
                push(f"{parts[0]} {parts[-1]}")
    return aliases


def detect_main_entity(
    sentences: list[str], record: PersonRecord, config: LanguageConfig
) -> list[EntityMention | None]:
    """Per sentence, the leftmost alias occurrence (longest wins at the same
    position); None where no alias occurs."""
    aliases = build_aliases(record, config)
    needles = [(normalize_surface(a), a) for a in aliases]
    out: list[EntityMention | None] = []
    for text in sentences:
        folded = FoldedText(text)
        best: tuple[int, int] | None = None
        for needle, _ in needles:
            for start, end in folded.find_all(needle):
                if best is None or (start, -(end - start)) < (best[0], -(best[1] - best[0])):
                    best = (start, end)
        if best is None:
            out.append(None)
        else:
            start, end = best
            out.append(EntityMention(start, end, text[start:end], "PERSON"))
    return out


class MainEntityNotFound(DataError):
    """No alias of the record occurs anywhere in the article."""
