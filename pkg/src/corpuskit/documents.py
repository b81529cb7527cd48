"""Document and raw-record types plus the JSONL interchange format.

One JSON object per line, UTF-8, LF line endings. Required keys:
doc_id, url, collection_id, text. Optional keys: language_scores,
quality_scores, license, stage, word_count.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import IO, TYPE_CHECKING, Iterable, Iterator, Optional

from .domains import registrable_domain
from .langid import LanguageScores
from .licenses import LicenseAnnotation

if TYPE_CHECKING:  # pragma: no cover
    from .curate import QualityScores


class Stage(str, Enum):
    RAW = "raw"
    NORMALIZED = "normalized"
    SCORED = "scored"
    FILTERED = "filtered"
    POSTPROCESSED = "postprocessed"


_STAGE_ORDER = {stage: i for i, stage in enumerate(Stage)}


@dataclass
class RawRecord:
    """One fetched record from an archive, before any parsing."""

    record_id: str
    target_url: str
    fetch_time: str
    content_type: str
    payload: bytes
    crawl_id: str = ""


def compute_doc_id(collection_id: str, url: str, text: str) -> str:
    """Stable content-derived identifier: sha256 over the identifying triple."""
    digest = hashlib.sha256()
    for part in (collection_id, url, text):
        digest.update(part.encode("utf-8"))
        digest.update(b"\x00")
    return digest.hexdigest()


@dataclass
class Document:
    doc_id: str
    url: str
    domain: str
    collection_id: str
    text: str
    word_count: int
    language_scores: Optional[LanguageScores] = None
    quality_scores: Optional["QualityScores"] = None
    license: Optional[LicenseAnnotation] = None
    stage: Stage = Stage.RAW

    @classmethod
    def create(
        cls,
        url: str,
        collection_id: str,
        text: str,
        *,
        domain: Optional[str] = None,
        license: Optional[LicenseAnnotation] = None,
        language_scores: Optional[LanguageScores] = None,
        stage: Stage = Stage.RAW,
    ) -> "Document":
        return cls(
            doc_id=compute_doc_id(collection_id, url, text),
            url=url,
            domain=domain if domain is not None else registrable_domain(url),
            collection_id=collection_id,
            text=text,
            word_count=len(text.split()),
            language_scores=language_scores,
            license=license,
            stage=stage,
        )

    def update_text(self, text: str) -> None:
        """Replace the text, keeping word_count consistent."""
        self.text = text
        self.word_count = len(text.split())

    def advance_stage(self, stage: Stage) -> None:
        """Stage transitions are monotone; regressions raise."""
        if _STAGE_ORDER[stage] < _STAGE_ORDER[self.stage]:
            raise ValueError(f"stage cannot regress from {self.stage.value} to {stage.value}")
        self.stage = stage

    def to_dict(self) -> dict:
        data = {
            "doc_id": self.doc_id,
            "url": self.url,
            "domain": self.domain,
            "collection_id": self.collection_id,
            "text": self.text,
            "word_count": self.word_count,
            "stage": self.stage.value,
        }
        if self.language_scores is not None:
            data["language_scores"] = self.language_scores.to_dict()
        if self.quality_scores is not None:
            data["quality_scores"] = self.quality_scores.to_dict()
        if self.license is not None:
            data["license"] = self.license.to_dict()
        return data

    @classmethod
    def from_dict(cls, data: dict) -> "Document":
        from .curate import QualityScores

        text = data["text"]
        return cls(
            doc_id=data["doc_id"],
            url=data["url"],
            domain=data.get("domain") or registrable_domain(data["url"]),
            collection_id=data["collection_id"],
            text=text,
            word_count=int(data.get("word_count", len(text.split()))),
            language_scores=(
                LanguageScores.from_dict(data["language_scores"])
                if data.get("language_scores")
                else None
            ),
            quality_scores=(
                QualityScores.from_dict(data["quality_scores"])
                if data.get("quality_scores")
                else None
            ),
            license=(
                LicenseAnnotation.from_dict(data["license"]) if data.get("license") else None
            ),
            stage=Stage(data.get("stage", "raw")),
        )


def write_documents(docs: Iterable[Document], target: str | Path | IO[str]) -> int:
    """Write documents as JSONL; returns the number written."""
    own = isinstance(target, (str, Path))
    handle = open(target, "w", encoding="utf-8", newline="\n") if own else target
    count = 0
    try:
        for doc in docs:
            handle.write(json.dumps(doc.to_dict(), ensure_ascii=False))
            handle.write("\n")
            count += 1
    finally:
        if own:
            handle.close()
    return count


def read_documents(source: str | Path | IO[str]) -> Iterator[Document]:
    """Stream documents from a JSONL file or handle."""
    own = isinstance(source, (str, Path))
    handle = open(source, "r", encoding="utf-8") if own else source
    try:
        for line in handle:
            line = line.strip()
            if line:
                yield Document.from_dict(json.loads(line))
    finally:
        if own:
            handle.close()
