"""Stream raw records into normalized Document shells and gate on language.

WARC archives and line-delimited document dumps both normalize into
RawRecord, then into Document shells carrying license annotations (web
content), extracted text, and language scores.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from typing import BinaryIO, Iterable, Iterator, Optional

from . import warc as warcmod
from .curate import normalize
from .documents import Document, RawRecord, Stage
from .errors import ConfigurationError
from .htmltree import extract_text, parse_markup
from .langid import ProfileIndex, bundled_index
from .licenses import annotate

logger = logging.getLogger(__name__)

RETAINED_WEB_LANGUAGES = frozenset(
    {"afr", "deu", "eng", "fra", "fry", "ita", "nld", "spa"}
)

_HTML_TYPES = ("text/html", "application/xhtml+xml")

__all__ = [
    "RETAINED_WEB_LANGUAGES",
    "IngestStats",
    "read_archive",
    "extract_text",
    "retain_language",
    "document_from_record",
    "ingest_records",
]


@dataclass
class IngestStats:
    records_read: int = 0
    records_skipped: int = 0
    non_html_skipped: int = 0
    language_dropped: int = 0
    documents_emitted: int = 0
    per_language_docs: dict[str, int] = field(default_factory=dict)
    per_language_words: dict[str, int] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "records_read": self.records_read,
            "records_skipped": self.records_skipped,
            "non_html_skipped": self.non_html_skipped,
            "language_dropped": self.language_dropped,
            "documents_emitted": self.documents_emitted,
            "per_language_docs": dict(sorted(self.per_language_docs.items())),
            "per_language_words": dict(sorted(self.per_language_words.items())),
        }


def _records_from_warc(
    stream: BinaryIO, stats: IngestStats, crawl_id: str
) -> Iterator[RawRecord]:
    reader_stats = warcmod.ReaderStats()
    for record in warcmod.read_warc(stream, reader_stats):
        stats.records_skipped = reader_stats.records_skipped + reader_stats.members_skipped
        if record.record_type not in ("response", "conversion"):
            continue
        if record.record_type == "response":
            http_headers, body = warcmod.split_http_payload(record.payload)
            content_type = http_headers.get("content-type", record.headers.get("Content-Type", ""))
        else:
            body = record.payload
            content_type = record.headers.get("Content-Type", "")
        if not body:
            continue
        stats.records_read += 1
        yield RawRecord(
            record_id=record.headers.get("WARC-Record-ID", "").strip("<>"),
            target_url=record.headers.get("WARC-Target-URI", ""),
            fetch_time=record.headers.get("WARC-Date", ""),
            content_type=content_type,
            payload=body,
            crawl_id=crawl_id,
        )
    stats.records_skipped = reader_stats.records_skipped + reader_stats.members_skipped


def _records_from_jsonl(
    stream: BinaryIO, stats: IngestStats, crawl_id: str
) -> Iterator[RawRecord]:
    for i, raw_line in enumerate(stream):
        line = raw_line.decode("utf-8", errors="replace").strip()
        if not line:
            continue
        try:
            obj = json.loads(line)
            url = obj["url"]
            text = obj["text"]
        except (json.JSONDecodeError, KeyError, TypeError):
            stats.records_skipped += 1
            logger.warning("skipping malformed jsonl line %d", i + 1)
            continue
        if not text:
            continue
        stats.records_read += 1
        yield RawRecord(
            record_id=str(obj.get("doc_id") or f"line-{i + 1}"),
            target_url=url,
            fetch_time=str(obj.get("fetch_time", "")),
            content_type="text/plain",
            payload=text.encode("utf-8"),
            crawl_id=crawl_id,
        )


def read_archive(
    stream: BinaryIO,
    format: str,
    stats: Optional[IngestStats] = None,
    crawl_id: str = "",
) -> Iterator[RawRecord]:
    """Stream RawRecords from a WARC or JSONL byte stream, order preserved.

    Malformed records are skipped and counted on stats; a truncated stream
    raises TruncatedArchiveError after the complete records have been
    yielded.
    """
    stats = stats if stats is not None else IngestStats()
    if format == "warc":
        return _records_from_warc(stream, stats, crawl_id)
    if format == "jsonl":
        return _records_from_jsonl(stream, stats, crawl_id)
    raise ConfigurationError(f"unknown archive format: {format!r}")


def retain_language(doc: Document, retained: Iterable[str]) -> bool:
    """True iff the document's top-scoring language is in the retained set."""
    retained = set(retained)
    if not retained:
        raise ConfigurationError("retained language set must not be empty")
    if doc.language_scores is None:
        raise ValueError(f"document {doc.doc_id} has no language scores")
    return doc.language_scores.top in retained


def _is_html(content_type: str) -> bool:
    base = content_type.split(";", 1)[0].strip().lower()
    return base in _HTML_TYPES


def document_from_record(
    record: RawRecord,
    collection_id: str,
    profile_index: Optional[ProfileIndex] = None,
) -> Optional[Document]:
    """Build one scored Document shell from a raw record.

    HTML payloads are parsed for license annotation and visible text;
    plain text payloads are taken as-is. Other content types return None.
    """
    index = profile_index or bundled_index()
    charset_hint = None
    if "charset=" in record.content_type:
        charset_hint = record.content_type.split("charset=", 1)[1].split(";")[0].strip()
    if _is_html(record.content_type):
        tree = parse_markup(record.payload, charset_hint)
        license_annotation = annotate(tree, base_url=record.target_url)
        text = extract_text(tree)
    elif record.content_type.split(";")[0].strip().lower() in ("text/plain", ""):
        text = record.payload.decode(charset_hint or "utf-8", errors="replace")
        license_annotation = None
    else:
        return None
    text = normalize(text)
    doc = Document.create(
        url=record.target_url,
        collection_id=collection_id,
        text=text,
        license=license_annotation,
        language_scores=index.score(text),
        stage=Stage.SCORED,
    )
    return doc


def ingest_records(
    records: Iterable[RawRecord],
    collection_id: str,
    *,
    profile_index: Optional[ProfileIndex] = None,
    retained: Optional[Iterable[str]] = None,
    stats: Optional[IngestStats] = None,
) -> Iterator[Document]:
    """Full shell-building pass: parse, annotate, extract, normalize, score.

    Per-record work is pure; records stream through one at a time.
    """
    stats = stats if stats is not None else IngestStats()
    retained_set = set(retained) if retained is not None else set(RETAINED_WEB_LANGUAGES)
    index = profile_index or bundled_index()
    for record in records:
        doc = document_from_record(record, collection_id, index)
        if doc is None:
            stats.non_html_skipped += 1
            continue
        if not retain_language(doc, retained_set):
            stats.language_dropped += 1
            continue
        stats.documents_emitted += 1
        top = doc.language_scores.top
        stats.per_language_docs[top] = stats.per_language_docs.get(top, 0) + 1
        stats.per_language_words[top] = stats.per_language_words.get(top, 0) + doc.word_count
        yield doc
