"""Corpus ingestion: parse raw metadata, filter, deduplicate, profile.

Every operation here is a pure batch transformation with deterministic
output, so the preparation stage can be re-run and audited: the provenance
counters always reconcile raw input size against retained records.
"""

from __future__ import annotations

import csv
import io
import json
import re
from dataclasses import dataclass, field
from datetime import date

from .stopwords import english_stopwords

DAY = "day"
MONTH = "month"
YEAR = "year"

# Filter stages in the fixed order they are applied; provenance counts are
# keyed by these names so two runs over the same input reconcile exactly.
FILTER_STAGES = ("missing_fields", "date_precision", "window", "language")

RECORD_FIELDS = (
    "record_id",
    "dup_group_key",
    "title",
    "abstract_text",
    "doi",
    "publish_date",
    "journal",
    "authors",
    "language",
)

_WORD_RE = re.compile(r"[a-z']+")


class IngestError(Exception):
    """Unrecoverable ingestion failure (unreadable stream, bad schema)."""


@dataclass(frozen=True)
class PrecisionDate:
    """A calendar date with declared precision.

    Month- and year-precision values are stored at the first day of their
    period; `precision` records how much of that is real information.
    """

    value: date
    precision: str = DAY

    @staticmethod
    def parse(text: str) -> "PrecisionDate":
        """Parse ISO-8601 `YYYY[-MM[-DD]]`; anything else raises ValueError."""
        text = text.strip()
        if re.fullmatch(r"\d{4}", text):
            return PrecisionDate(date(int(text), 1, 1), YEAR)
        if re.fullmatch(r"\d{4}-\d{2}", text):
            y, m = text.split("-")
            return PrecisionDate(date(int(y), int(m), 1), MONTH)
        if re.fullmatch(r"\d{4}-\d{2}-\d{2}", text):
            return PrecisionDate(date.fromisoformat(text), DAY)
        raise ValueError(f"unparseable date: {text!r}")

    def isoformat(self) -> str:
        if self.precision == YEAR:
            return f"{self.value.year:04d}"
        if self.precision == MONTH:
            return f"{self.value.year:04d}-{self.value.month:02d}"
        return self.value.isoformat()


@dataclass
class CorpusRecord:
    record_id: str
    dup_group_key: str
    title: str | None = None
    abstract_text: str | None = None
    doi: str | None = None
    publish_date: PrecisionDate | None = None
    journal: str | None = None
    authors: list[str] | None = None
    language: str | None = None

    def field_present(self, name: str) -> bool:
        value = getattr(self, name)
        if value is None:
            return False
        if isinstance(value, (str, list)) and len(value) == 0:
            return False
        return True

    def completeness(self) -> int:
        return sum(self.field_present(f) for f in RECORD_FIELDS)

    def to_json_dict(self) -> dict:
        return {
            "record_id": self.record_id,
            "dup_group_key": self.dup_group_key,
            "title": self.title,
            "abstract": self.abstract_text,
            "doi": self.doi,
            "publish_date": self.publish_date.isoformat() if self.publish_date else None,
            "journal": self.journal,
            "authors": self.authors,
            "language": self.language,
        }

    @staticmethod
    def from_json_dict(obj: dict) -> "CorpusRecord":
        raw_date = obj.get("publish_date")
        return CorpusRecord(
            record_id=obj["record_id"],
            dup_group_key=obj["dup_group_key"],
            title=obj.get("title"),
            abstract_text=obj.get("abstract"),
            doi=obj.get("doi"),
            publish_date=PrecisionDate.parse(raw_date) if raw_date else None,
            journal=obj.get("journal"),
            authors=obj.get("authors"),
            language=obj.get("language"),
        )


@dataclass
class CleanCorpus:
    records: list[CorpusRecord]
    window: tuple[date, date]
    provenance: dict[str, int] = field(default_factory=dict)

    def validate(self, raw_count: int | None = None) -> None:
        keys = {r.dup_group_key for r in self.records}
        if len(keys) != len(self.records):
            raise ValueError("duplicate dup_group_key values in clean corpus")
        start, end = self.window
        for r in self.records:
            if r.publish_date is None or r.publish_date.precision != DAY:
                raise ValueError(f"record {r.record_id} lacks a day-precision date")
            if not start <= r.publish_date.value <= end:
                raise ValueError(f"record {r.record_id} dated outside window")
        if raw_count is not None:
            dropped = sum(self.provenance.values())
            if dropped != raw_count - len(self.records):
                raise ValueError(
                    f"provenance counts ({dropped}) do not reconcile "
                    f"{raw_count} raw vs {len(self.records)} retained"
                )


@dataclass
class CorpusProfile:
    monthly_counts: dict[str, int]
    field_completeness: dict[str, float]
    duplicate_histogram: dict[int, int]


@dataclass
class ParseResult:
    records: list[CorpusRecord]
    skipped: list[tuple[int, str]]  # (1-based line number, reason)


_SCHEMA_REQUIRED = ("record_id", "dup_group_key", "title", "abstract", "publish_date")
_SCHEMA_OPTIONAL = ("doi", "journal", "authors", "language")


def _open_source(source):
    if isinstance(source, (str,)) or hasattr(source, "__fspath__"):
        return open(source, "r", encoding="utf-8", newline=""), True
    return source, False


def parse_metadata(source, schema: dict[str, str], fmt: str = "csv") -> ParseResult:
    """Parse delimited text or JSON-lines into corpus records.

    `schema` maps canonical field names (record_id, dup_group_key, title,
    abstract, publish_date, and optionally doi/journal/authors/language) to
    source column names. Rows with the wrong shape or an unparseable date
    are skipped and counted with their line number; an undecodable stream
    is fatal.
    """
    missing = [k for k in _SCHEMA_REQUIRED if k not in schema]
    if missing:
        raise IngestError(f"schema missing required mappings: {', '.join(missing)}")
    if fmt not in ("csv", "jsonl"):
        raise IngestError(f"unknown corpus format: {fmt!r}")

    stream, owned = _open_source(source)
    try:
        if fmt == "csv":
            return _parse_csv(stream, schema)
        return _parse_jsonl(stream, schema)
    except UnicodeDecodeError as exc:
        raise IngestError(f"stream is not valid UTF-8: {exc}") from exc
    finally:
        if owned:
            stream.close()


def _cell(value) -> str | None:
    if value is None:
        return None
    value = value.strip() if isinstance(value, str) else value
    return value if value else None


def _record_from_mapping(get, schema: dict[str, str]) -> CorpusRecord:
    """Build a record from a cell accessor; raises ValueError on bad dates."""
    raw_date = _cell(get(schema["publish_date"]))
    authors_raw = _cell(get(schema["authors"])) if "authors" in schema else None
    if isinstance(authors_raw, str):
        authors = [a.strip() for a in authors_raw.split(";") if a.strip()] or None
    else:
        authors = authors_raw or None
    record_id = _cell(get(schema["record_id"]))
    group_key = _cell(get(schema["dup_group_key"]))
    if not record_id or not group_key:
        raise ValueError("empty record_id or dup_group_key")
    return CorpusRecord(
        record_id=record_id,
        dup_group_key=group_key,
        title=_cell(get(schema["title"])),
        abstract_text=_cell(get(schema["abstract"])),
        doi=_cell(get(schema["doi"])) if "doi" in schema else None,
        publish_date=PrecisionDate.parse(raw_date) if raw_date else None,
        journal=_cell(get(schema["journal"])) if "journal" in schema else None,
        authors=authors,
        language=_cell(get(schema["language"])) if "language" in schema else None,
    )


def _parse_csv(stream, schema: dict[str, str]) -> ParseResult:
    reader = csv.reader(stream)
    try:
        header = next(reader)
    except StopIteration:
        return ParseResult([], [])
    index = {name: i for i, name in enumerate(header)}
    unknown = [col for col in schema.values() if col not in index]
    if unknown:
        raise IngestError(f"schema columns not in header: {', '.join(unknown)}")

    records: list[CorpusRecord] = []
    skipped: list[tuple[int, str]] = []
    for line_no, row in enumerate(reader, start=2):
        if len(row) != len(header):
            skipped.append((line_no, f"expected {len(header)} columns, got {len(row)}"))
            continue

        def get(col, row=row):
            return row[index[col]]

        try:
            records.append(_record_from_mapping(get, schema))
        except ValueError as exc:
            skipped.append((line_no, str(exc)))
    return ParseResult(records, skipped)


def _parse_jsonl(stream, schema: dict[str, str]) -> ParseResult:
    records: list[CorpusRecord] = []
    skipped: list[tuple[int, str]] = []
    for line_no, line in enumerate(stream, start=1):
        line = line.strip()
        if not line:
            continue
        try:
            obj = json.loads(line)
            if not isinstance(obj, dict):
                raise ValueError("row is not a JSON object")
            records.append(_record_from_mapping(obj.get, schema))
        except (ValueError, json.JSONDecodeError) as exc:
            skipped.append((line_no, str(exc)))
    return ParseResult(records, skipped)


def detect_language(
    text: str | None,
    declared: str | None = None,
    threshold: float = 0.08,
    min_tokens: int = 20,
) -> str:
    """Stopword-ratio language heuristic with a declared-tag override.

    A declared tag always wins. Otherwise the text is called English when at
    least `min_tokens` word tokens are present and more than `threshold` of
    them are common English stopwords; everything else is "unknown".
    """
    if declared:
        return declared
    if not text:
        return "unknown"
    tokens = _WORD_RE.findall(text.lower())
    if len(tokens) < min_tokens:
        return "unknown"
    stopset = english_stopwords()
    hits = sum(1 for t in tokens if t in stopset)
    return "en" if hits / len(tokens) > threshold else "unknown"


def filter_records(
    records: list[CorpusRecord],
    required_fields: set[str],
    window: tuple[date, date],
    language: str | None = "en",
) -> CleanCorpus:
    """Apply the fixed filter cascade and report per-stage drop counts.

    Stages run in the order missing-fields, date-precision, window,
    language; a record is charged to the first stage that rejects it.
    Passing `language=None` disables the language stage.
    """
    unknown = required_fields - set(RECORD_FIELDS)
    if unknown:
        raise ValueError(f"unknown required fields: {sorted(unknown)}")
    start, end = window
    if start > end:
        raise ValueError("window start after end")

    provenance = {stage: 0 for stage in FILTER_STAGES}
    kept: list[CorpusRecord] = []
    for rec in records:
        if not all(rec.field_present(f) for f in required_fields):
            provenance["missing_fields"] += 1
            continue
        if rec.publish_date is None or rec.publish_date.precision != DAY:
            provenance["date_precision"] += 1
            continue
        if not start <= rec.publish_date.value <= end:
            provenance["window"] += 1
            continue
        if language is not None:
            detected = detect_language(rec.abstract_text, declared=rec.language)
            if detected != language:
                provenance["language"] += 1
                continue
        kept.append(rec)

    kept.sort(key=lambda r: (r.publish_date.value, r.record_id))
    return CleanCorpus(records=kept, window=window, provenance=provenance)


def deduplicate(records: list[CorpusRecord]) -> list[CorpusRecord]:
    """Keep one representative per dup_group_key.

    Preference order: most non-null metadata fields, then latest publish
    date, then smallest record_id. Input order never affects the choice.
    """
    groups: dict[str, CorpusRecord] = {}
    for rec in records:
        if not rec.dup_group_key:
            raise ValueError(f"record {rec.record_id} has no dup_group_key")
        cur = groups.get(rec.dup_group_key)
        if cur is None or _dedup_key(rec) > _dedup_key(cur):
            groups[rec.dup_group_key] = rec
    chosen = list(groups.values())
    chosen.sort(key=lambda r: (r.publish_date.value if r.publish_date else date.min, r.record_id))
    return chosen


def _dedup_key(rec: CorpusRecord):
    d = rec.publish_date.value if rec.publish_date else date.min
    # record_id inverted so that max() prefers the lexicographically smallest
    inv_id = tuple(-b for b in rec.record_id.encode("utf-8"))
    return (rec.completeness(), d, inv_id)


def profile_corpus(records: list[CorpusRecord]) -> CorpusProfile:
    """Monthly volume, per-field completeness, and duplicate-group sizes."""
    if not records:
        return CorpusProfile({}, {}, {})

    monthly: dict[str, int] = {}
    for rec in records:
        if rec.publish_date is None or rec.publish_date.precision == YEAR:
            key = "imprecise"
        else:
            key = f"{rec.publish_date.value.year:04d}-{rec.publish_date.value.month:02d}"
        monthly[key] = monthly.get(key, 0) + 1

    completeness = {
        f: sum(r.field_present(f) for r in records) / len(records) for f in RECORD_FIELDS
    }

    group_sizes: dict[str, int] = {}
    for rec in records:
        group_sizes[rec.dup_group_key] = group_sizes.get(rec.dup_group_key, 0) + 1
    histogram: dict[int, int] = {}
    for size in group_sizes.values():
        histogram[size] = histogram.get(size, 0) + 1

    return CorpusProfile(
        monthly_counts=dict(sorted(monthly.items())),
        field_completeness=completeness,
        duplicate_histogram=dict(sorted(histogram.items())),
    )


def prepare_corpus(
    records: list[CorpusRecord],
    required_fields: set[str],
    window: tuple[date, date],
    language: str | None = "en",
    parse_skipped: int = 0,
) -> CleanCorpus:
    """Full preparation: filter, deduplicate, sort, and reconcile counts."""
    filtered = filter_records(records, required_fields, window, language)
    deduped = deduplicate(filtered.records)
    provenance = dict(filtered.provenance)
    provenance["duplicate"] = len(filtered.records) - len(deduped)
    if parse_skipped:
        provenance["parse_skipped"] = parse_skipped
    corpus = CleanCorpus(records=deduped, window=window, provenance=provenance)
    corpus.validate(raw_count=len(records) + parse_skipped)
    return corpus


def write_corpus_jsonl(corpus: CleanCorpus, stream: io.TextIOBase) -> None:
    for rec in corpus.records:
        stream.write(json.dumps(rec.to_json_dict(), sort_keys=True) + "\n")


def read_corpus_jsonl(stream, window: tuple[date, date] | None = None) -> CleanCorpus:
    records = [CorpusRecord.from_json_dict(json.loads(line)) for line in stream if line.strip()]
    if window is None:
        dates = [r.publish_date.value for r in records if r.publish_date]
        if not dates:
            raise IngestError("cannot infer window from corpus without dates")
        window = (min(dates), max(dates))
    return CleanCorpus(records=records, window=window)
