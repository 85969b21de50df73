"""Stream articles out of an encyclopedia XML export, map cross-language page
ids, strip markup to plain text, and segment sentences.

Dump parsing is streaming (constant memory in dump size); stripping and
segmentation are pure per-article functions, safe to run concurrently.
"""
from __future__ import annotations

import bz2
import gzip
import html
import re
import xml.etree.ElementTree as ET
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

from .errors import DataError, InputError


@dataclass(frozen=True)
class RawArticle:
    """One page as it sits in the dump, markup included."""

    page_id: int
    language: str
    title: str
    wikitext: str
    is_redirect: bool = False

    def __post_init__(self):
        if self.page_id <= 0:
            raise DataError(f"non-positive page id {self.page_id}")
        if not self.wikitext and not self.is_redirect:
            raise DataError(f"page {self.page_id} has empty text but is not a redirect")


@dataclass(frozen=True)
class Sentence:
    index: int
    text: str
    char_offset: int

    def __post_init__(self):
        if not self.text.strip():
            raise DataError("sentence text is empty")


@dataclass
class ArticleDoc:
    """Plain-text article segmented into sentences, bound to one person."""

    article_id: int
    language: str
    title: str
    person_id: str
    sentences: list[Sentence] = field(default_factory=list)

    def plain_text_spans_ok(self, plain_text: str) -> bool:
        return all(
            plain_text[s.char_offset:s.char_offset + len(s.text)] == s.text
            for s in self.sentences
        )


# --- page-id mapping ----------------------------------------------------------


def map_page_ids(
    source_ids: set[int],
    langlink_table: str | Path | Iterable[tuple],
    target_language: str,
) -> tuple[dict[int, int | str], set[int]]:
    """Map source page ids through a langlink table to the target language.

    The table is a TSV path or row iterable of (source_id, language, target);
    targets that look like integers become page ids, anything else is kept as
    a title string. Every input id lands in exactly one of mapping/unmapped;
    conflicting rows for one id are a hard error naming it.
    """
    if isinstance(langlink_table, (str, Path)):
        p = Path(langlink_table)
        if not p.is_file():
            raise InputError(f"langlink table not found: {p}")
        rows = []
        with p.open(encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.rstrip("\n")
                if not line.strip():
                    continue
                parts = line.split("\t")
                if len(parts) < 3:
                    raise InputError(f"{p}:{lineno}: expected 3 tab-separated columns")
                rows.append((parts[0], parts[1], parts[2]))
    else:
        rows = list(langlink_table)

    table: dict[int, int | str] = {}
    for source, lang, target in rows:
        if lang != target_language:
            continue
        source_id = int(source)
        value: int | str = int(target) if str(target).strip().lstrip("-").isdigit() else str(target)
        if source_id in table and table[source_id] != value:
            raise DataError(
                f"conflicting langlink rows for source id {source_id}: "
                f"{table[source_id]!r} vs {value!r}"
            )
        table[source_id] = value

    mapping = {sid: table[sid] for sid in source_ids if sid in table}
    unmapped = {sid for sid in source_ids if sid not in table}
    return mapping, unmapped


# --- dump streaming -------------------------------------------------------------


class DumpError(InputError):
    """The dump file is missing, truncated, or not well-formed XML."""


def _open_dump(path: Path):
    if path.suffix == ".bz2":
        return bz2.open(path, "rb")
    if path.suffix == ".gz":
        return gzip.open(path, "rb")
    return path.open("rb")


def _local(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


def stream_articles(
    dump_path: str | Path,
    wanted_ids: set[int],
    language: str = "de",
) -> Iterator[RawArticle]:
    """Yield exactly the wanted pages present in the dump, in dump order.

    The parse is incremental and completed page elements are discarded, so
    peak memory does not grow with dump size. Redirect pages come out with
    an empty-or-original text and is_redirect set.
    """
    path = Path(dump_path)
    if not path.is_file():
        raise DumpError(f"dump not found: {path}")
    if not wanted_ids:
        return
    last_complete: int | None = None
    with _open_dump(path) as fh:
        try:
            context = ET.iterparse(fh, events=("start", "end"))
            root = None
            for event, elem in context:
                if event == "start":
                    if root is None:
                        root = elem
                    continue
                if _local(elem.tag) != "page":
                    continue
                page_id: int | None = None
                title = ""
                text = ""
                is_redirect = False
                for child in elem:
                    name = _local(child.tag)
                    if name == "id" and page_id is None:
                        page_id = int(child.text or "0")
                    elif name == "title":
                        title = child.text or ""
                    elif name == "redirect":
                        is_redirect = True
                    elif name == "revision":
                        for sub in child:
                            if _local(sub.tag) == "text":
                                text = sub.text or ""
                if page_id is None:
                    raise DumpError(f"page element without id in {path}")
                if page_id in wanted_ids:
                    if not is_redirect and _REDIRECT_RE.match(text):
                        is_redirect = True
                    yield RawArticle(
                        page_id=page_id,
                        language=language,
                        title=title,
                        wikitext=text,
                        is_redirect=is_redirect,
                    )
                last_complete = page_id
                elem.clear()
                if root is not None:
                    # Drop completed children so the tree never accumulates.
                    for done in list(root):
                        if done is not elem:
                            root.remove(done)
        except ET.ParseError as e:
            raise DumpError(
                f"malformed dump {path} at byte offset ~{e.position}: {e.msg}; "
                f"last complete page id: {last_complete}"
            ) from e


_REDIRECT_RE = re.compile(r"^\s*#(redirect|weiterleitung)\b", re.IGNORECASE)


# --- wikitext stripping -----------------------------------------------------------

_DROP_LINK_PREFIXES = (
    "file:", "image:", "datei:", "bild:", "category:", "kategorie:",
)
_COMMENT_RE = re.compile(r"<!--.*?-->", re.DOTALL)
_REF_RE = re.compile(r"<ref[^>/]*?/>|<ref[^>]*?>.*?</ref>", re.DOTALL | re.IGNORECASE)
_TAG_RE = re.compile(r"</?[a-zA-Z][^>\n]*>")
_HEADING_RE = re.compile(r"^=+[^=].*?=+\s*$")
_MAGIC_RE = re.compile(r"__[A-Z]+__")
_EXTLINK_RE = re.compile(r"\[(?:https?|ftp)://[^\s\]]+(?:\s+([^\]]*))?\]")
_DISAMBIG_RE = re.compile(r"\{\{\s*(begriffskl[äa]rung|disambiguation|dab|disambig)\s*[|}]",
                          re.IGNORECASE)


def is_disambiguation(wikitext: str) -> bool:
    return bool(_DISAMBIG_RE.search(wikitext))


def _drop_balanced(text: str, open_mark: str, close_mark: str, counts: Counter, key: str) -> str:
    """Remove nested open..close regions; an unclosed opener eats the rest."""
    out = []
    i = 0
    n = len(text)
    while i < n:
        if text.startswith(open_mark, i):
            depth = 1
            j = i + len(open_mark)
            while j < n and depth:
                if text.startswith(open_mark, j):
                    depth += 1
                    j += len(open_mark)
                elif text.startswith(close_mark, j):
                    depth -= 1
                    j += len(close_mark)
                else:
                    j += 1
            counts[key] += 1
            if depth:
                counts[f"{key}_unclosed"] += 1
            i = j
        else:
            out.append(text[i])
            i += 1
    return "".join(out)


def _replace_wikilinks(text: str, counts: Counter) -> str:
    """[[target|display]] -> display, [[target]] -> target; file/category
    links vanish entirely. Handles one level of nesting inside captions."""
    out = []
    i = 0
    n = len(text)
    while i < n:
        if text.startswith("[[", i):
            depth = 1
            j = i + 2
            while j < n and depth:
                if text.startswith("[[", j):
                    depth += 1
                    j += 2
                elif text.startswith("]]", j):
                    depth -= 1
                    j += 2
                else:
                    j += 1
            if depth:  # unclosed link: keep literal text
                counts["link_unclosed"] += 1
                out.append(text[i:])
                break
            inner = text[i + 2:j - 2]
            lowered = inner.lstrip().casefold()
            if any(lowered.startswith(p) for p in _DROP_LINK_PREFIXES):
                counts["link_dropped"] += 1
            else:
                inner = _replace_wikilinks(inner, counts)
                display = inner.split("|", 1)[1] if "|" in inner else inner
                out.append(display)
                counts["link_kept"] += 1
            i = j
        else:
            out.append(text[i])
            i += 1
    return "".join(out)


def strip_wikitext(wikitext: str, counts: Counter | None = None) -> str:
    """Best-effort markup removal: templates, tables, references and link
    targets go; link display text stays; paragraph breaks become newlines.

    Parenthesized birth/death notation such as "(*21 Oktober 1992 ...)" is
    left verbatim; it is a primary match target downstream.
    """
    counts = counts if counts is not None else Counter()
    text = _COMMENT_RE.sub("", wikitext)
    text, n_refs = _REF_RE.subn("", text)
    counts["ref"] += n_refs
    text = _drop_balanced(text, "{{", "}}", counts, "template")
    text = _drop_balanced(text, "{|", "|}", counts, "table")
    text = _replace_wikilinks(text, counts)
    text = _EXTLINK_RE.sub(lambda m: m.group(1) or "", text)
    text = text.replace("'''", "").replace("''", "")
    text = _TAG_RE.sub("", text)
    text = _MAGIC_RE.sub("", text)
    text = html.unescape(text)

    lines = []
    for line in text.split("\n"):
        if _HEADING_RE.match(line.strip()):
            counts["heading_dropped"] += 1
            continue
        line = line.lstrip("*#:; ").rstrip()
        line = re.sub(r"[ \t]+", " ", line)
        if line:
            lines.append(line)
    return "\n".join(lines)


# --- sentence segmentation ----------------------------------------------------------

_TERMINATORS = ".!?"


def _is_abbreviation(text: str, dot_pos: int, abbreviations: frozenset[str]) -> bool:
    """True when the period at dot_pos sits inside any listed abbreviation."""
    for abbr in abbreviations:
        for rel, ch in enumerate(abbr):
            if ch != ".":
                continue
            start = dot_pos - rel
            if start < 0 or not text.startswith(abbr, start):
                continue
            if start == 0 or not text[start - 1].isalnum():
                return True
    return False


def _is_single_initial(text: str, dot_pos: int) -> bool:
    if dot_pos == 0:
        return False
    prev = text[dot_pos - 1]
    if not (prev.isalpha() and prev.isupper()):
        return False
    return dot_pos - 1 == 0 or not text[dot_pos - 2].isalnum()


def _is_ordinal_digit(text: str, dot_pos: int) -> bool:
    """A 1-2 digit run before the period reads as a date ordinal (21. Oktober);
    longer runs (years: 1900.) end the sentence."""
    j = dot_pos
    while j > 0 and text[j - 1].isdigit():
        j -= 1
    run = dot_pos - j
    return 1 <= run <= 2


def segment_sentences(plain_text: str, abbreviations: frozenset[str] = frozenset()) -> list[Sentence]:
    """Deterministic rule-based splitting on {., !, ?} and newlines.

    A terminator ends a sentence only when followed by whitespace or end of
    text, and (for periods) not directly after a listed abbreviation, a
    single initial, or a 1-2 digit ordinal. Offsets index the input string.
    """
    sentences: list[Sentence] = []
    start = 0
    i = 0
    n = len(plain_text)

    def emit(end: int) -> None:
        nonlocal start
        raw = plain_text[start:end]
        stripped = raw.strip()
        if stripped:
            offset = start + (len(raw) - len(raw.lstrip()))
            sentences.append(Sentence(index=len(sentences), text=stripped, char_offset=offset))
        start = end

    while i < n:
        c = plain_text[i]
        if c == "\n":
            emit(i)
            start = i + 1
            i += 1
            continue
        if c in _TERMINATORS:
            j = i
            while j + 1 < n and plain_text[j + 1] in _TERMINATORS:
                j += 1
            after_ok = j + 1 >= n or plain_text[j + 1].isspace()
            suppressed = c == "." and j == i and (
                _is_abbreviation(plain_text, i, abbreviations)
                or _is_single_initial(plain_text, i)
                or _is_ordinal_digit(plain_text, i)
            )
            if after_ok and not suppressed:
                emit(j + 1)
            i = j + 1
            continue
        i += 1
    emit(n)
    return sentences


def build_doc(
    article: RawArticle,
    person_id: str,
    abbreviations: frozenset[str] = frozenset(),
    counts: Counter | None = None,
) -> ArticleDoc | None:
    """RawArticle -> ArticleDoc; None for redirects and disambiguation pages."""
    counts = counts if counts is not None else Counter()
    if article.is_redirect:
        counts["redirect_skipped"] += 1
        return None
    if is_disambiguation(article.wikitext):
        counts["disambiguation_skipped"] += 1
        return None
    plain = strip_wikitext(article.wikitext, counts)
    sentences = segment_sentences(plain, abbreviations)
    if not sentences:
        counts["empty_article_skipped"] += 1
        return None
    return ArticleDoc(
        article_id=article.page_id,
        language=article.language,
        title=article.title,
        person_id=person_id,
        sentences=sentences,
    )
