from __future__ import annotations

import json

import pytest

from corpuskit.curate import Bound, ThresholdConfig
from corpuskit.documents import Document
from corpuskit.errors import AlreadyDecidedError, ConfigurationError, VersionConflictError
from corpuskit.licenses import CCFamily, Location
from corpuskit.policy import DomainStatus, build_ledger, build_verification_queue
from corpuskit.registry import (
    CollectionRecord,
    LicenseBasis,
    RegistryStore,
    RiskLevel,
    validate_risk_weights,
)
from tests.test_policy import _doc


def _record(collection_id="openraadsinformatie") -> CollectionRecord:
    return CollectionRecord(
        collection_id=collection_id,
        source_description="Municipal council documentation",
        license_basis=LicenseBasis.PUBLIC_DOMAIN,
        language_breakdown={"nld": 14.1e9, "eng": 0.02e9, "other": 0.01e9},
        word_count=14.13e9,
        provenance_notes="supplied by the maintainers",
    )


def _store(tmp_path) -> RegistryStore:
    return RegistryStore(tmp_path / "state")


def test_register_and_get_roundtrip(tmp_path):
    store = _store(tmp_path)
    record = _record()
    store.register_collection(record)
    assert store.get_collection("openraadsinformatie").to_dict() == record.to_dict()


def test_duplicate_registration_rejected(tmp_path):
    store = _store(tmp_path)
    store.register_collection(_record())
    with pytest.raises(ConfigurationError):
        store.register_collection(_record())


def test_update_appends_version_history(tmp_path):
    store = _store(tmp_path)
    store.register_collection(_record())
    updated = _record()
    updated.provenance_notes = "second pass notes"
    store.update_collection(updated)
    history = store.collection_history("openraadsinformatie")
    assert len(history) == 2
    assert history[0].provenance_notes == "supplied by the maintainers"
    assert store.get_collection("openraadsinformatie").provenance_notes == "second pass notes"


def test_negative_counts_rejected():
    with pytest.raises(ConfigurationError):
        CollectionRecord(
            collection_id="x",
            source_description="",
            license_basis=LicenseBasis.CC0,
            word_count=-1,
        )


def test_assign_risk_weights(tmp_path):
    store = _store(tmp_path)
    store.register_collection(_record())
    record = store.assign_risk("openraadsinformatie", RiskLevel.LOW, "clean source")
    assert record.sampling_weight == 1.0
    record = store.assign_risk("openraadsinformatie", RiskLevel.HIGH, "harm found")
    assert record.sampling_weight == 0.1
    assert store.risks["openraadsinformatie"].risk is RiskLevel.HIGH


def test_assign_risk_unknown_collection(tmp_path):
    store = _store(tmp_path)
    with pytest.raises(KeyError):
        store.assign_risk("nope", RiskLevel.LOW, "x")


def test_risk_weights_monotonicity_enforced():
    import random

    validate_risk_weights({"low": 1.0, "medium": 0.5, "high": 0.1})
    with pytest.raises(ConfigurationError):
        validate_risk_weights({"low": 0.5, "medium": 1.0, "high": 0.1})
    with pytest.raises(ConfigurationError):
        validate_risk_weights({"low": 1.0, "medium": 0.5, "high": 0.0})
    rng = random.Random(8)
    for _ in range(100):
        weights = sorted(rng.uniform(0.01, 1.0) for _ in range(3))
        mapping = {"high": weights[0], "medium": weights[1], "low": weights[2]}
        validate_risk_weights(mapping)  # never raises for monotone maps
        assert mapping["high"] <= mapping["medium"] <= mapping["low"]


def test_rejected_flag_recorded(tmp_path):
    store = _store(tmp_path)
    store.register_collection(_record())
    record = store.assign_risk("openraadsinformatie", RiskLevel.HIGH, "too harmful", rejected=True)
    assert record.rejected is True


def test_threshold_versions_strictly_increase(tmp_path):
    store = _store(tmp_path)
    store.register_collection(_record())
    assert store.get_thresholds("openraadsinformatie").version == 0
    cfg = ThresholdConfig(
        collection_id="openraadsinformatie",
        bounds={"min_chars": Bound(lower=100)},
        version=1,
    )
    store.save_thresholds(cfg)
    with pytest.raises(VersionConflictError):
        store.save_thresholds(cfg)  # same version again
    cfg2 = ThresholdConfig(collection_id="openraadsinformatie", version=3)
    with pytest.raises(VersionConflictError):
        store.save_thresholds(cfg2)  # skipping a version
    cfg3 = ThresholdConfig(collection_id="openraadsinformatie", version=2)
    store.save_thresholds(cfg3)
    assert store.get_thresholds("openraadsinformatie").version == 2


def test_threshold_config_file_written(tmp_path):
    store = _store(tmp_path)
    store.register_collection(_record())
    cfg = ThresholdConfig(collection_id="openraadsinformatie", version=1)
    store.save_thresholds(cfg)
    path = store.state_dir / "configs" / "openraadsinformatie.json"
    assert path.exists()
    assert json.loads(path.read_text())["version"] == 1


def test_bucket_report_roundtrip(tmp_path):
    store = _store(tmp_path)
    store.register_collection(_record())
    report = {
        "collection_id": "openraadsinformatie",
        "dimension": "min_chars",
        "edges": [10.0],
        "counts": [1, 2],
        "samples": [[], []],
    }
    store.save_bucket_report(report)
    assert store.get_bucket_report("openraadsinformatie", "min_chars") == report
    with pytest.raises(KeyError):
        store.get_bucket_report("openraadsinformatie", "other")


def test_ledger_verdicts_and_allowlist_export(tmp_path):
    store = _store(tmp_path)
    docs = [
        _doc("groot.example", 0, words=300_000),
        _doc("klein.example", 0, words=10),
        _doc("fout.example", 0, words=300_000),
    ]
    store.load_ledger(build_ledger(docs))
    queue = store.verification_queue(min_words=250_000)
    assert [e.domain for e in queue.entries] == ["fout.example", "groot.example"]
    store.record_domain_verdict("groot.example", DomainStatus.VERIFIED_PERMISSIVE, note="ok",
                                reviewer="rev")
    store.record_domain_verdict("fout.example", DomainStatus.REJECTED, note="icons only")
    out = tmp_path / "allow.jsonl"
    count = store.export_allowlist(out)
    rows = [json.loads(l) for l in out.read_text().splitlines()]
    assert count == 1
    assert rows[0]["domain"] == "groot.example"
    assert rows[0]["status"] == "verified_permissive"
    assert rows[0]["reviewer"] == "rev"


def test_verdict_errors(tmp_path):
    store = _store(tmp_path)
    store.load_ledger(build_ledger([_doc("a.example", 0)]))
    with pytest.raises(KeyError):
        store.record_domain_verdict("onbekend.example", DomainStatus.REJECTED)
    store.record_domain_verdict("a.example", DomainStatus.VERIFIED_PERMISSIVE)
    with pytest.raises(AlreadyDecidedError):
        store.record_domain_verdict("a.example", DomainStatus.REJECTED)


def test_queue_does_not_mutate_store_state(tmp_path):
    store = _store(tmp_path)
    store.load_ledger(build_ledger([_doc("klein.example", 0, words=10)]))
    store.verification_queue(min_words=250_000)
    assert store.ledger["klein.example"].status is DomainStatus.UNVERIFIED


def test_queue_matches_library_function(tmp_path):
    import copy

    store = _store(tmp_path)
    docs = [_doc(f"d{i}.example", 0, words=(i + 1) * 100_000) for i in range(6)]
    ledger = build_ledger(docs)
    store.load_ledger(ledger)
    via_store = store.verification_queue(min_words=250_000).to_dict()
    via_library = build_verification_queue(copy.deepcopy(ledger), 250_000).to_dict()
    assert json.dumps(via_store, sort_keys=True) == json.dumps(via_library, sort_keys=True)


def test_replay_reconstructs_state(tmp_path):
    state_dir = tmp_path / "state"
    store = RegistryStore(state_dir)
    store.register_collection(_record())
    store.assign_risk("openraadsinformatie", RiskLevel.MEDIUM, "some concerns")
    store.save_thresholds(ThresholdConfig(collection_id="openraadsinformatie", version=1))
    store.save_bucket_report(
        {"collection_id": "openraadsinformatie", "dimension": "min_chars",
         "edges": [1.0], "counts": [0, 0], "samples": [[], []]}
    )
    store.load_ledger(build_ledger([_doc("a.example", 0), _doc("b.example", 0)]))
    store.record_domain_verdict("a.example", DomainStatus.VERIFIED_PERMISSIVE, note="ok")

    replayed = RegistryStore(state_dir)
    assert replayed.get_collection("openraadsinformatie").to_dict() == _record().to_dict()
    assert replayed.risks["openraadsinformatie"].risk is RiskLevel.MEDIUM
    assert replayed.get_thresholds("openraadsinformatie").version == 1
    assert replayed.get_bucket_report("openraadsinformatie", "min_chars")["counts"] == [0, 0]
    assert replayed.ledger["a.example"].status is DomainStatus.VERIFIED_PERMISSIVE
    assert replayed.ledger["a.example"].verdict_note == "ok"
    assert replayed.ledger["b.example"].status is DomainStatus.UNVERIFIED
    # byte-level: both stores export identical allowlists
    out_a, out_b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    store.export_allowlist(out_a)
    replayed.export_allowlist(out_b)
    assert out_a.read_bytes() == out_b.read_bytes()


def test_set_risk_weights_applies_to_new_assignments(tmp_path):
    store = _store(tmp_path)
    store.register_collection(_record())
    store.set_risk_weights({"low": 0.9, "medium": 0.6, "high": 0.2})
    record = store.assign_risk("openraadsinformatie", RiskLevel.MEDIUM, "x")
    assert record.sampling_weight == 0.6
