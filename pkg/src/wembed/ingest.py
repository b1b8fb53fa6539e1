"""Streaming extraction of item-property-item triples from N-Triples dumps.

Works line by line in bounded memory: Wikidata truthy dumps run to tens of
gigabytes, so nothing here ever holds more than one physical line. Only
triples of the shape

    <http://www.wikidata.org/entity/Q…> <http://www.wikidata.org/prop/direct/P…> <http://www.wikidata.org/entity/Q…> .

survive; literal objects, sitelinks, identifier IRIs, statement nodes and
blank nodes are counted and dropped. Grammar errors on one line never stop
the stream.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Iterable, Iterator

from .ids import ENTITY_ID_RE, Triple

WIKIDATA_ENTITY_PREFIX = "http://www.wikidata.org/entity/"
WIKIDATA_PROP_DIRECT_PREFIX = "http://www.wikidata.org/prop/direct/"

_ITEM_RE = ENTITY_ID_RE  # full id regex; kind checked separately


class SkipReason(Enum):
    LITERAL = "literal"
    NON_ENTITY_IRI = "non_entity_iri"
    BLANK_OR_COMMENT = "blank_or_comment"


@dataclass(frozen=True, slots=True)
class ParsedTriple:
    triple: Triple


@dataclass(frozen=True, slots=True)
class SkippedLine:
    reason: SkipReason


@dataclass(frozen=True, slots=True)
class MalformedLine:
    message: str


ParseOutcome = ParsedTriple | SkippedLine | MalformedLine


@dataclass
class ExtractionStats:
    """Line accounting for one extraction run.

    ``lines_read`` always equals the emitted triples plus every skip bucket
    plus blank/comment lines (the latter derived, not stored).
    """

    lines_read: int = 0
    triples_emitted: int = 0
    skipped_literal: int = 0
    skipped_non_entity_iri: int = 0
    skipped_malformed: int = 0

    @property
    def skipped_blank_or_comment(self) -> int:
        return (
            self.lines_read
            - self.triples_emitted
            - self.skipped_literal
            - self.skipped_non_entity_iri
            - self.skipped_malformed
        )

    def __add__(self, other: "ExtractionStats") -> "ExtractionStats":
        return ExtractionStats(
            self.lines_read + other.lines_read,
            self.triples_emitted + other.triples_emitted,
            self.skipped_literal + other.skipped_literal,
            self.skipped_non_entity_iri + other.skipped_non_entity_iri,
            self.skipped_malformed + other.skipped_malformed,
        )

    def to_json(self) -> str:
        return json.dumps(
            {
                "lines_read": self.lines_read,
                "triples_emitted": self.triples_emitted,
                "skipped_literal": self.skipped_literal,
                "skipped_non_entity_iri": self.skipped_non_entity_iri,
                "skipped_malformed": self.skipped_malformed,
            }
        )


class ExtractionError(OSError):
    """I/O failure during extraction; carries the stats gathered so far."""

    def __init__(self, message: str, stats: ExtractionStats):
        super().__init__(message)
        self.stats = stats


class TripleFormatError(ValueError):
    """A line of a triple text file does not look like ``Q1 P2 Q3``."""

    def __init__(self, path: str, line_no: int, line: str):
        super().__init__(f"{path}:{line_no}: bad triple line: {line!r}")
        self.line_no = line_no


# --- term scanner -----------------------------------------------------------
#
# Terms as (tag, value, next_index); tag in {"iri", "literal", "blank"}.
# Only the IRI value is ever inspected afterwards, so literal values are
# consumed but not unescaped.

_WS = " \t"


class _Malformed(Exception):
    pass


def _skip_ws(line: str, i: int) -> int:
    n = len(line)
    while i < n and line[i] in _WS:
        i += 1
    return i


def _scan_iri(line: str, i: int) -> tuple[str, int]:
    end = line.find(">", i + 1)
    if end < 0:
        raise _Malformed("unterminated IRI")
    value = line[i + 1 : end]
    if any(c in value for c in ' \t"<'):
        raise _Malformed("illegal character in IRI")
    return value, end + 1


def _scan_literal(line: str, i: int) -> int:
    n = len(line)
    j = i + 1
    while j < n:
        c = line[j]
        if c == "\\":
            j += 2
            continue
        if c == '"':
            j += 1
            break
        j += 1
    else:
        raise _Malformed("unterminated literal")
    if j > n:  # trailing lone backslash
        raise _Malformed("unterminated literal")
    # optional datatype or language tag
    if line.startswith("^^", j):
        j += 2
        if j >= n or line[j] != "<":
            raise _Malformed("datatype must be an IRI")
        _, j = _scan_iri(line, j)
    elif j < n and line[j] == "@":
        j += 1
        start = j
        while j < n and (line[j].isalnum() or line[j] == "-"):
            j += 1
        if j == start:
            raise _Malformed("empty language tag")
    return j


def _scan_blank(line: str, i: int) -> int:
    n = len(line)
    j = i + 2
    start = j
    while j < n and line[j] not in _WS:
        j += 1
    if j == start:
        raise _Malformed("empty blank node label")
    return j


def _scan_term(line: str, i: int) -> tuple[str, str, int]:
    c = line[i]
    if c == "<":
        value, j = _scan_iri(line, i)
        return "iri", value, j
    if c == '"':
        j = _scan_literal(line, i)
        return "literal", "", j
    if line.startswith("_:", i):
        j = _scan_blank(line, i)
        return "blank", "", j
    raise _Malformed(f"unexpected character {c!r}")


def _entity_suffix(iri: str, prefix: str, kind_letter: str) -> str | None:
    if not iri.startswith(prefix):
        return None
    suffix = iri[len(prefix) :]
    if suffix[:1] != kind_letter or not _ITEM_RE.match(suffix):
        return None
    return suffix


def parse_line(line: str) -> ParseOutcome:
    """Classify one physical N-Triples line.

    Returns the triple for entity-to-entity statements (prefixes stripped),
    a categorized skip for well-formed but unwanted statements, and a
    malformed marker for grammar violations.
    """
    line = line.rstrip("\r\n")
    i = _skip_ws(line, 0)
    if i == len(line) or line[i] == "#":
        return SkippedLine(SkipReason.BLANK_OR_COMMENT)

    try:
        terms = []
        for _ in range(3):
            if i >= len(line):
                raise _Malformed("fewer than three terms")
            tag, value, i = _scan_term(line, i)
            terms.append((tag, value))
            i = _skip_ws(line, i)
        if i >= len(line) or line[i] != ".":
            raise _Malformed("missing terminating '.'")
        i = _skip_ws(line, i + 1)
        if i < len(line) and line[i] != "#":
            raise _Malformed("trailing garbage after '.'")

        (s_tag, s_iri), (p_tag, p_iri), (o_tag, o_iri) = terms
        if s_tag == "literal":
            raise _Malformed("literal subject")
        if p_tag != "iri":
            raise _Malformed("predicate must be an IRI")
    except _Malformed as exc:
        return MalformedLine(str(exc))

    if o_tag == "literal":
        return SkippedLine(SkipReason.LITERAL)
    if s_tag == "blank" or o_tag == "blank":
        return SkippedLine(SkipReason.NON_ENTITY_IRI)

    subject = _entity_suffix(s_iri, WIKIDATA_ENTITY_PREFIX, "Q")
    predicate = _entity_suffix(p_iri, WIKIDATA_PROP_DIRECT_PREFIX, "P")
    object_ = _entity_suffix(o_iri, WIKIDATA_ENTITY_PREFIX, "Q")
    if subject is None or predicate is None or object_ is None:
        return SkippedLine(SkipReason.NON_ENTITY_IRI)
    return ParsedTriple(Triple.parse(subject, predicate, object_))


def extract_triples(lines: Iterable[str], sink: Callable[[Triple], None]) -> ExtractionStats:
    """Run parse_line over a stream, forwarding every triple in input order.

    Single pass, memory bounded by the longest line. I/O failures raise
    :class:`ExtractionError` carrying the partial stats.
    """
    stats = ExtractionStats()
    iterator = iter(lines)
    while True:
        try:
            line = next(iterator)
        except StopIteration:
            break
        except OSError as exc:
            raise ExtractionError(f"input failed after {stats.lines_read} lines: {exc}", stats) from exc
        stats.lines_read += 1
        outcome = parse_line(line)
        if isinstance(outcome, ParsedTriple):
            try:
                sink(outcome.triple)
            except OSError as exc:
                raise ExtractionError(f"sink failed at triple {stats.triples_emitted}: {exc}", stats) from exc
            stats.triples_emitted += 1
        elif isinstance(outcome, MalformedLine):
            stats.skipped_malformed += 1
        elif outcome.reason is SkipReason.LITERAL:
            stats.skipped_literal += 1
        elif outcome.reason is SkipReason.NON_ENTITY_IRI:
            stats.skipped_non_entity_iri += 1
    return stats


def write_triples(triples: Iterable[Triple], path: str) -> None:
    """Write one ``Q… P… Q…`` line per triple (the QuickStatements-like format)."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for triple in triples:
            fh.write(f"{triple}\n")


def read_triples(path: str) -> Iterator[Triple]:
    """Stream triples back from the text format; rejects anything else."""
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            parts = line.rstrip("\n").split(" ")
            if len(parts) != 3:
                raise TripleFormatError(path, line_no, line.rstrip("\n"))
            try:
                yield Triple.parse(*parts)
            except ValueError as exc:
                raise TripleFormatError(path, line_no, line.rstrip("\n")) from exc
