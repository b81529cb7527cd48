"""Collection metadata, risk records, persisted configs, and verdicts.

Storage is an append-only JSONL event log plus an in-memory snapshot
derived from it; replaying the log reproduces the state exactly, which is
what makes every human decision auditable. The store is the single writer
for threshold configs and domain verdicts. Loading a ledger replaces all
domain state; verdicts recorded afterwards apply to the loaded ledger.
"""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path
from typing import Optional

from .curate import ThresholdConfig
from .errors import ConfigurationError, VersionConflictError
from .policy import (
    DomainStatus,
    Ledger,
    DomainLedgerEntry,
    VerificationQueue,
    build_verification_queue,
    record_verdict,
)

DEFAULT_RISK_WEIGHTS = {"low": 1.0, "medium": 0.5, "high": 0.1}


class LicenseBasis(str, Enum):
    PUBLIC_DOMAIN = "public_domain"
    CC0 = "cc0"
    CC_BY = "cc_by"
    CONSENTED = "consented"
    CODE_PERMISSIVE = "code_permissive"


class RiskLevel(str, Enum):
    LOW = "low"
    MEDIUM = "medium"
    HIGH = "high"


@dataclass
class CollectionRecord:
    collection_id: str
    source_description: str
    license_basis: LicenseBasis
    language_breakdown: dict[str, float] = field(default_factory=dict)
    word_count: float = 0.0
    provenance_notes: str = ""

    def __post_init__(self):
        if self.word_count < 0 or any(v < 0 for v in self.language_breakdown.values()):
            raise ConfigurationError("collection counts must be non-negative")

    def to_dict(self) -> dict:
        return {
            "collection_id": self.collection_id,
            "source_description": self.source_description,
            "license_basis": self.license_basis.value,
            "language_breakdown": dict(sorted(self.language_breakdown.items())),
            "word_count": self.word_count,
            "provenance_notes": self.provenance_notes,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "CollectionRecord":
        return cls(
            collection_id=data["collection_id"],
            source_description=data.get("source_description", ""),
            license_basis=LicenseBasis(data["license_basis"]),
            language_breakdown=dict(data.get("language_breakdown", {})),
            word_count=float(data.get("word_count", 0.0)),
            provenance_notes=data.get("provenance_notes", ""),
        )


@dataclass
class RiskRecord:
    collection_id: str
    risk: RiskLevel
    rationale: str
    sampling_weight: float
    rejected: bool = False

    def to_dict(self) -> dict:
        return {
            "collection_id": self.collection_id,
            "risk": self.risk.value,
            "rationale": self.rationale,
            "sampling_weight": self.sampling_weight,
            "rejected": self.rejected,
        }


def _now_iso() -> str:
    return datetime.now(timezone.utc).replace(microsecond=0).isoformat().replace("+00:00", "Z")


def validate_risk_weights(weights: dict[str, float]) -> None:
    missing = {level.value for level in RiskLevel} - set(weights)
    if missing:
        raise ConfigurationError(f"risk weight map missing levels: {sorted(missing)}")
    low, medium, high = weights["low"], weights["medium"], weights["high"]
    if not all(0.0 < w <= 1.0 for w in (low, medium, high)):
        raise ConfigurationError("sampling weights must lie in (0, 1]")
    if not (high <= medium <= low):
        raise ConfigurationError("weights must not increase with risk: high <= medium <= low")


class RegistryStore:
    """Append-only event log + derived snapshot; single writer per state dir."""

    def __init__(self, state_dir: str | Path):
        self.state_dir = Path(state_dir)
        self.state_dir.mkdir(parents=True, exist_ok=True)
        (self.state_dir / "configs").mkdir(exist_ok=True)
        self.events_path = self.state_dir / "events.jsonl"
        self._seq = 0
        self.collections: dict[str, list[CollectionRecord]] = {}
        self.risks: dict[str, RiskRecord] = {}
        self.thresholds: dict[str, ThresholdConfig] = {}
        self.bucket_reports: dict[tuple[str, str], dict] = {}
        self.ledger: Ledger = {}
        self.risk_weights: dict[str, float] = dict(DEFAULT_RISK_WEIGHTS)
        self._replay()

    # -- event plumbing ------------------------------------------------

    def _replay(self) -> None:
        if not self.events_path.exists():
            return
        with open(self.events_path, "r", encoding="utf-8") as handle:
            for line in handle:
                line = line.strip()
                if line:
                    event = json.loads(line)
                    self._apply(event)
                    self._seq = event["seq"]

    def _append(self, event_type: str, payload: dict) -> dict:
        self._seq += 1
        event = {"seq": self._seq, "time": _now_iso(), "type": event_type, **payload}
        with open(self.events_path, "a", encoding="utf-8") as handle:
            handle.write(json.dumps(event, ensure_ascii=False) + "\n")
        self._apply(event)
        return event

    def _apply(self, event: dict) -> None:
        kind = event["type"]
        if kind == "collection_registered":
            record = CollectionRecord.from_dict(event["record"])
            self.collections[record.collection_id] = [record]
        elif kind == "collection_updated":
            record = CollectionRecord.from_dict(event["record"])
            self.collections[record.collection_id].append(record)
        elif kind == "risk_weights_set":
            self.risk_weights = dict(event["weights"])
        elif kind == "risk_assigned":
            record = RiskRecord(
                collection_id=event["collection_id"],
                risk=RiskLevel(event["risk"]),
                rationale=event["rationale"],
                sampling_weight=event["sampling_weight"],
                rejected=event.get("rejected", False),
            )
            self.risks[record.collection_id] = record
        elif kind == "thresholds_saved":
            cfg = ThresholdConfig.from_dict(event["config"])
            self.thresholds[cfg.collection_id] = cfg
        elif kind == "bucket_report_saved":
            report = event["report"]
            self.bucket_reports[(report["collection_id"], report["dimension"])] = report
        elif kind == "ledger_loaded":
            entries = [DomainLedgerEntry.from_dict(e) for e in event["ledger"]]
            self.ledger = {entry.domain: entry for entry in entries}
        elif kind == "verdict_recorded":
            record_verdict(
                self.ledger,
                event["domain"],
                DomainStatus(event["status"]),
                note=event.get("note", ""),
                verdict_time=event["time"],
                reviewer=event.get("reviewer"),
            )

    # -- collections ----------------------------------------------------

    def register_collection(self, record: CollectionRecord) -> CollectionRecord:
        if record.collection_id in self.collections:
            raise ConfigurationError(f"collection already registered: {record.collection_id}")
        self._append("collection_registered", {"record": record.to_dict()})
        return record

    def update_collection(self, record: CollectionRecord) -> CollectionRecord:
        if record.collection_id not in self.collections:
            raise KeyError(f"unknown collection: {record.collection_id}")
        self._append("collection_updated", {"record": record.to_dict()})
        return record

    def get_collection(self, collection_id: str) -> CollectionRecord:
        versions = self.collections.get(collection_id)
        if not versions:
            raise KeyError(f"unknown collection: {collection_id}")
        return versions[-1]

    def collection_history(self, collection_id: str) -> list[CollectionRecord]:
        versions = self.collections.get(collection_id)
        if not versions:
            raise KeyError(f"unknown collection: {collection_id}")
        return list(versions)

    def list_collections(self) -> list[CollectionRecord]:
        return [versions[-1] for _, versions in sorted(self.collections.items())]

    # -- risk -----------------------------------------------------------

    def set_risk_weights(self, weights: dict[str, float]) -> None:
        validate_risk_weights(weights)
        self._append("risk_weights_set", {"weights": weights})

    def assign_risk(
        self, collection_id: str, risk: RiskLevel, rationale: str, rejected: bool = False
    ) -> RiskRecord:
        if collection_id not in self.collections:
            raise KeyError(f"unknown collection: {collection_id}")
        weight = self.risk_weights[risk.value]
        self._append(
            "risk_assigned",
            {
                "collection_id": collection_id,
                "risk": risk.value,
                "rationale": rationale,
                "sampling_weight": weight,
                "rejected": rejected,
            },
        )
        return self.risks[collection_id]

    # -- thresholds -------------------------------------------------------

    def get_thresholds(self, collection_id: str) -> ThresholdConfig:
        if collection_id not in self.collections:
            raise KeyError(f"unknown collection: {collection_id}")
        cfg = self.thresholds.get(collection_id)
        return cfg if cfg is not None else ThresholdConfig(collection_id=collection_id, version=0)

    def save_thresholds(self, cfg: ThresholdConfig) -> ThresholdConfig:
        if cfg.collection_id not in self.collections:
            raise KeyError(f"unknown collection: {cfg.collection_id}")
        cfg.validate()
        current = self.thresholds.get(cfg.collection_id)
        current_version = current.version if current is not None else 0
        if cfg.version != current_version + 1:
            raise VersionConflictError(
                f"expected version {current_version + 1}, got {cfg.version}"
            )
        self._append("thresholds_saved", {"config": cfg.to_dict()})
        cfg.save(self.state_dir / "configs" / f"{cfg.collection_id}.json")
        return cfg

    # -- bucket reports ---------------------------------------------------

    def save_bucket_report(self, report: dict) -> None:
        if report["collection_id"] not in self.collections:
            raise KeyError(f"unknown collection: {report['collection_id']}")
        self._append("bucket_report_saved", {"report": report})

    def get_bucket_report(self, collection_id: str, dimension: str) -> dict:
        report = self.bucket_reports.get((collection_id, dimension))
        if report is None:
            raise KeyError(f"no bucket report for {collection_id}/{dimension}")
        return report

    # -- domains ----------------------------------------------------------

    def load_ledger(self, ledger: Ledger) -> None:
        self._append("ledger_loaded", {"ledger": [e.to_dict() for e in ledger.values()]})

    def verification_queue(self, min_words: int) -> VerificationQueue:
        """Queue over a copy: reading never mutates audited state."""
        return build_verification_queue(copy.deepcopy(self.ledger), min_words)

    def record_domain_verdict(
        self, domain: str, status: DomainStatus, note: str = "", reviewer: Optional[str] = None
    ) -> DomainLedgerEntry:
        if domain not in self.ledger:
            raise KeyError(f"unknown domain: {domain}")
        # validation happens inside record_verdict during _apply; run the
        # same checks first so a bad verdict never reaches the log
        record_verdict(
            copy.deepcopy(self.ledger), domain, status, note=note, reviewer=reviewer
        )
        self._append(
            "verdict_recorded",
            {"domain": domain, "status": status.value, "note": note, "reviewer": reviewer},
        )
        return self.ledger[domain]

    def export_allowlist(self, path: str | Path) -> int:
        """Write verified-permissive domains as allowlist JSONL rows."""
        rows = [
            {
                "domain": entry.domain,
                "status": entry.status.value,
                "verdict_note": entry.verdict_note or "",
                "verdict_time": entry.verdict_time,
                "reviewer": entry.reviewer,
            }
            for entry in sorted(self.ledger.values(), key=lambda e: e.domain)
            if entry.status is DomainStatus.VERIFIED_PERMISSIVE
        ]
        with open(path, "w", encoding="utf-8", newline="\n") as handle:
            for row in rows:
                handle.write(json.dumps(row, ensure_ascii=False) + "\n")
        return len(rows)
