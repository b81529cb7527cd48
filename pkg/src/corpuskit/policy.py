"""Domain-level permissive-license policy: ledger, filters, verification
queue, allowlist application, and license predicates for text and code.

The pipeline keeps a document only when its domain carries exclusively
permissive families with no conflicts, the license sits in the head or
footer, and a human has verified the domain. Ambiguity counts as
non-permissive; the target is zero false positives, not recall.
"""

from __future__ import annotations

import json
from bisect import insort
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Iterator, Optional

from .documents import Document
from .errors import AlreadyDecidedError
from .licenses import PERMISSIVE_FAMILIES, CCFamily, Location

DEFAULT_MIN_WORDS = 250_000

PERMISSIVE_CODE_LICENSES = frozenset(
    {"apache-2.0", "mit", "bsd-2-clause", "bsd-3-clause", "unlicense"}
)

MAX_EVIDENCE = 5


class DomainStatus(str, Enum):
    UNVERIFIED = "unverified"
    VERIFIED_PERMISSIVE = "verified_permissive"
    REJECTED = "rejected"
    BELOW_THRESHOLD = "below_threshold"


@dataclass
class EvidenceSnippet:
    doc_id: str
    snippet: str
    target_url: str

    def to_dict(self) -> dict:
        return {"doc_id": self.doc_id, "snippet": self.snippet, "target_url": self.target_url}

    @classmethod
    def from_dict(cls, data: dict) -> "EvidenceSnippet":
        return cls(data["doc_id"], data["snippet"], data["target_url"])


@dataclass
class DomainLedgerEntry:
    domain: str
    doc_count: int = 0
    word_count: int = 0
    family_histogram: dict[str, int] = field(default_factory=dict)
    location_histogram: dict[str, int] = field(default_factory=dict)
    conflict_count: int = 0
    status: DomainStatus = DomainStatus.UNVERIFIED
    verdict_note: Optional[str] = None
    verdict_time: Optional[str] = None
    reviewer: Optional[str] = None
    # up to MAX_EVIDENCE snippets, kept sorted by doc_id so sharded builds merge cleanly
    evidence: list[EvidenceSnippet] = field(default_factory=list)

    def add_evidence(self, snippet: EvidenceSnippet) -> None:
        insort(self.evidence, snippet, key=lambda e: e.doc_id)
        del self.evidence[MAX_EVIDENCE:]

    def to_dict(self) -> dict:
        return {
            "domain": self.domain,
            "doc_count": self.doc_count,
            "word_count": self.word_count,
            "family_histogram": dict(sorted(self.family_histogram.items())),
            "location_histogram": dict(sorted(self.location_histogram.items())),
            "conflict_count": self.conflict_count,
            "status": self.status.value,
            "verdict_note": self.verdict_note,
            "verdict_time": self.verdict_time,
            "reviewer": self.reviewer,
            "evidence": [e.to_dict() for e in self.evidence],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "DomainLedgerEntry":
        return cls(
            domain=data["domain"],
            doc_count=int(data.get("doc_count", 0)),
            word_count=int(data.get("word_count", 0)),
            family_histogram=dict(data.get("family_histogram", {})),
            location_histogram=dict(data.get("location_histogram", {})),
            conflict_count=int(data.get("conflict_count", 0)),
            status=DomainStatus(data.get("status", "unverified")),
            verdict_note=data.get("verdict_note"),
            verdict_time=data.get("verdict_time"),
            reviewer=data.get("reviewer"),
            evidence=[EvidenceSnippet.from_dict(e) for e in data.get("evidence", [])],
        )


Ledger = dict[str, DomainLedgerEntry]


def build_ledger(docs: Iterable[Document]) -> Ledger:
    """Group documents per registrable domain with exact counts.

    Documents without a parsed best license stay neutral: they count
    toward doc/word totals but not the histograms.
    """
    ledger: Ledger = {}
    for doc in docs:
        entry = ledger.get(doc.domain)
        if entry is None:
            entry = ledger[doc.domain] = DomainLedgerEntry(domain=doc.domain)
        entry.doc_count += 1
        entry.word_count += doc.word_count
        annotation = doc.license
        if annotation is None or annotation.best is None:
            continue
        family = annotation.best.family.value
        entry.family_histogram[family] = entry.family_histogram.get(family, 0) + 1
        location = annotation.best_location.value
        entry.location_histogram[location] = entry.location_histogram.get(location, 0) + 1
        if annotation.conflict:
            entry.conflict_count += 1
        top = annotation.candidates[0] if annotation.candidates else None
        if top is not None:
            entry.add_evidence(
                EvidenceSnippet(doc_id=doc.doc_id, snippet=top.context_snippet, target_url=top.target_url)
            )
    return ledger


def merge_ledgers(*shards: Ledger) -> Ledger:
    """Commutative, associative merge of sharded ledgers (verdicts excluded)."""
    merged: Ledger = {}
    for shard in shards:
        for domain, entry in shard.items():
            target = merged.get(domain)
            if target is None:
                merged[domain] = DomainLedgerEntry.from_dict(entry.to_dict())
                continue
            target.doc_count += entry.doc_count
            target.word_count += entry.word_count
            for family, count in entry.family_histogram.items():
                target.family_histogram[family] = target.family_histogram.get(family, 0) + count
            for location, count in entry.location_histogram.items():
                target.location_histogram[location] = (
                    target.location_histogram.get(location, 0) + count
                )
            target.conflict_count += entry.conflict_count
            for snippet in entry.evidence:
                target.add_evidence(snippet)
    return merged


def filter_domain_license(ledger: Ledger) -> set[str]:
    """Domains whose every annotated document is permissive and conflict-free."""
    permissive_values = {f.value for f in PERMISSIVE_FAMILIES}
    retained: set[str] = set()
    for domain, entry in ledger.items():
        if entry.conflict_count:
            continue
        if all(family in permissive_values for family in entry.family_histogram):
            retained.add(domain)
    return retained


def filter_license_position(docs: Iterable[Document]) -> Iterator[Document]:
    """Keep documents whose best license sits in the head or the footer."""
    for doc in docs:
        annotation = doc.license
        if annotation is None or annotation.best is None:
            continue
        if annotation.best_location in (Location.HEAD, Location.FOOTER):
            yield doc


@dataclass
class QueueEntry:
    domain: str
    word_count: int
    evidence: list[EvidenceSnippet] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "domain": self.domain,
            "word_count": self.word_count,
            "evidence": [e.to_dict() for e in self.evidence],
        }


@dataclass
class VerificationQueue:
    min_words: int
    entries: list[QueueEntry] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"min_words": self.min_words, "entries": [e.to_dict() for e in self.entries]}


def build_verification_queue(ledger: Ledger, min_words: int = DEFAULT_MIN_WORDS) -> VerificationQueue:
    """Unverified domains above the word threshold, largest first.

    Ties break on domain name. Undecided domains at or below the threshold
    are marked below_threshold on the ledger; undecided domains that grew
    past it are restored to unverified so they can queue again.
    """
    queue = VerificationQueue(min_words=min_words)
    candidates = []
    for entry in ledger.values():
        if entry.status in (DomainStatus.VERIFIED_PERMISSIVE, DomainStatus.REJECTED):
            continue
        if entry.word_count > min_words:
            entry.status = DomainStatus.UNVERIFIED
            candidates.append(entry)
        else:
            entry.status = DomainStatus.BELOW_THRESHOLD
    candidates.sort(key=lambda e: (-e.word_count, e.domain))
    queue.entries = [
        QueueEntry(domain=e.domain, word_count=e.word_count, evidence=list(e.evidence))
        for e in candidates
    ]
    return queue


def record_verdict(
    ledger: Ledger,
    domain: str,
    status: DomainStatus,
    note: str = "",
    verdict_time: Optional[str] = None,
    reviewer: Optional[str] = None,
) -> DomainLedgerEntry:
    """Apply a human verdict; only undecided domains accept one."""
    if status not in (DomainStatus.VERIFIED_PERMISSIVE, DomainStatus.REJECTED):
        raise ValueError(f"verdict status must be a decision, got {status.value}")
    entry = ledger.get(domain)
    if entry is None:
        raise KeyError(f"unknown domain: {domain}")
    if entry.status in (DomainStatus.VERIFIED_PERMISSIVE, DomainStatus.REJECTED):
        raise AlreadyDecidedError(f"domain {domain} already has verdict {entry.status.value}")
    entry.status = status
    entry.verdict_note = note
    entry.verdict_time = verdict_time
    entry.reviewer = reviewer
    return entry


def apply_allowlist(docs: Iterable[Document], ledger: Ledger) -> Iterator[Document]:
    """Keep documents whose domain was verified permissive by a human."""
    for doc in docs:
        entry = ledger.get(doc.domain)
        if entry is not None and entry.status is DomainStatus.VERIFIED_PERMISSIVE:
            yield doc


def run_policy(
    docs: list[Document], ledger: Optional[Ledger] = None, min_words: int = DEFAULT_MIN_WORDS
) -> tuple[list[Document], Ledger]:
    """Compose the three filtering steps over an already-verdicted ledger."""
    if ledger is None:
        ledger = build_ledger(docs)
    build_verification_queue(ledger, min_words)
    retained_domains = filter_domain_license(ledger)
    positioned = [d for d in filter_license_position(docs) if d.domain in retained_domains]
    return list(apply_allowlist(positioned, ledger)), ledger


def permissive_code_license(spdx_id: str) -> bool:
    """True for the small set of code licenses cleared for corpus use."""
    return spdx_id.strip().lower() in PERMISSIVE_CODE_LICENSES


def permissive_family(family: CCFamily) -> bool:
    return family in PERMISSIVE_FAMILIES


def save_ledger(ledger: Ledger, path: str | Path) -> None:
    entries = [ledger[domain].to_dict() for domain in sorted(ledger)]
    Path(path).write_text(
        json.dumps({"domains": entries}, indent=2, ensure_ascii=False) + "\n", encoding="utf-8"
    )


def load_ledger(path: str | Path) -> Ledger:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    entries = [DomainLedgerEntry.from_dict(e) for e in data["domains"]]
    return {entry.domain: entry for entry in entries}


def load_allowlist(path: str | Path) -> list[dict]:
    """Read allowlist JSONL rows: {domain, status, verdict_note, verdict_time, reviewer}."""
    rows = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if line:
            rows.append(json.loads(line))
    return rows


def apply_allowlist_file(ledger: Ledger, path: str | Path) -> int:
    """Apply verdict rows from an allowlist file; returns verdicts applied."""
    applied = 0
    for row in load_allowlist(path):
        domain = row["domain"]
        if domain not in ledger:
            continue
        status = DomainStatus(row["status"])
        if status in (DomainStatus.VERIFIED_PERMISSIVE, DomainStatus.REJECTED):
            entry = ledger[domain]
            if entry.status not in (DomainStatus.VERIFIED_PERMISSIVE, DomainStatus.REJECTED):
                record_verdict(
                    ledger,
                    domain,
                    status,
                    note=row.get("verdict_note", ""),
                    verdict_time=row.get("verdict_time"),
                    reviewer=row.get("reviewer"),
                )
                applied += 1
    return applied
