"""Dataclass configs: language resources, labelling knobs, pipeline paths."""
from __future__ import annotations

import json
from dataclasses import dataclass, field, fields, replace
from importlib import resources
from pathlib import Path

from .errors import InputError

GERMAN_MONTHS = (
    "Januar", "Februar", "März", "April", "Mai", "Juni",
    "Juli", "August", "September", "Oktober", "November", "Dezember",
)
# Austrian variant for January sits outside the positional list.
GERMAN_MONTH_ALIASES = {"Jänner": 1}

ENGLISH_MONTHS = (
    "January", "February", "March", "April", "May", "June",
    "July", "August", "September", "October", "November", "December",
)

# Relation fields tried in this order when one mention satisfies several.
DEFAULT_FIELD_PRIORITY = (
    "birthdate", "deathdate", "birthplace", "deathplace",
    "educated", "occupation", "parent", "child", "sibling",
)


def _load_abbreviations(language: str) -> frozenset[str]:
    name = f"abbreviations_{language}.txt"
    try:
        text = resources.files("biogds.data").joinpath(name).read_text("utf-8")
    except FileNotFoundError:
        return frozenset()
    return frozenset(line.strip() for line in text.splitlines() if line.strip())


def load_abbreviation_file(path: str | Path) -> frozenset[str]:
    """Read a one-abbreviation-per-line UTF-8 file."""
    p = Path(path)
    if not p.is_file():
        raise InputError(f"abbreviation list not found: {p}")
    return frozenset(
        line.strip() for line in p.read_text("utf-8").splitlines() if line.strip()
    )


@dataclass(frozen=True)
class LanguageConfig:
    """Month names, date-pattern toggles and alias policy for one language."""

    language: str = "de"
    months: tuple[str, ...] = GERMAN_MONTHS
    month_aliases: dict[str, int] = field(default_factory=lambda: dict(GERMAN_MONTH_ALIASES))
    abbreviations: frozenset[str] = frozenset()
    match_day_month_year: bool = True
    match_month_year: bool = True
    match_marked_year: bool = True
    alias_surname: bool = True
    alias_given_surname: bool = True
    relative_surname_alias: bool = False

    @classmethod
    def for_language(cls, language: str) -> "LanguageConfig":
        if language == "de":
            return cls(language="de", abbreviations=_load_abbreviations("de"))
        if language == "en":
            return cls(
                language="en",
                months=ENGLISH_MONTHS,
                month_aliases={},
                abbreviations=_load_abbreviations("en"),
            )
        raise InputError(f"no shipped language config for {language!r}")

    @classmethod
    def from_file(cls, path: str | Path) -> "LanguageConfig":
        p = Path(path)
        if not p.is_file():
            raise InputError(f"language config not found: {p}")
        raw = json.loads(p.read_text("utf-8"))
        base = cls.for_language(raw.pop("language", "de"))
        known = {f.name for f in fields(cls)}
        unknown = set(raw) - known
        if unknown:
            raise InputError(f"unknown language config keys: {sorted(unknown)}")
        if "months" in raw:
            raw["months"] = tuple(raw["months"])
        if "abbreviations" in raw:
            raw["abbreviations"] = frozenset(raw["abbreviations"])
        return replace(base, **raw)

    def month_number(self, name: str) -> int | None:
        folded = name.casefold()
        for i, m in enumerate(self.months, start=1):
            if m.casefold() == folded:
                return i
        for alias, num in self.month_aliases.items():
            if alias.casefold() == folded:
                return num
        return None


@dataclass(frozen=True)
class LabelConfig:
    """Knobs for the labelling pass."""

    other_cap: int = 2
    seed: int = 0
    field_priority: tuple[str, ...] = DEFAULT_FIELD_PRIORITY
    language: LanguageConfig = field(default_factory=LanguageConfig)


@dataclass
class PipelineConfig:
    """Everything cmd_build needs, loadable from a JSON file."""

    dump: str = ""
    langlinks: str = ""
    persons: str = ""
    kb_snapshot: str = ""
    alternates: str = ""
    occupations: str = ""
    out_dir: str = "out"
    language: str = "de"
    methods: tuple[str, ...] = ("normal", "skip")
    other_cap: int = 2
    seed: int = 0
    gold_per_relation: int = 100
    split_ratios: tuple[float, float, float] = (0.8, 0.1, 0.1)
    workers: int = 1
    abbreviation_file: str = ""
    build_timestamp: str = ""

    REQUIRED_INPUTS = ("dump", "langlinks", "persons", "kb_snapshot", "alternates", "occupations")

    @classmethod
    def from_file(cls, path: str | Path) -> "PipelineConfig":
        p = Path(path)
        if not p.is_file():
            raise InputError(f"config file not found: {p}")
        raw = json.loads(p.read_text("utf-8"))
        known = {f.name for f in fields(cls)}
        unknown = set(raw) - known
        if unknown:
            raise InputError(f"unknown config keys: {sorted(unknown)}")
        if "methods" in raw:
            raw["methods"] = tuple(raw["methods"])
        if "split_ratios" in raw:
            raw["split_ratios"] = tuple(raw["split_ratios"])
        return cls(**raw)

    def validate_inputs(self) -> None:
        for key in self.REQUIRED_INPUTS:
            value = getattr(self, key)
            if not value:
                raise InputError(f"config is missing required input path: {key}")
            if not Path(value).is_file():
                raise InputError(f"{key} path does not exist: {value}")
        for m in self.methods:
            if m not in ("normal", "skip"):
                raise InputError(f"unknown method {m!r}; expected normal or skip")

    def digest_payload(self) -> dict:
        return {
            "language": self.language,
            "methods": list(self.methods),
            "other_cap": self.other_cap,
            "seed": self.seed,
            "split_ratios": list(self.split_ratios),
        }
