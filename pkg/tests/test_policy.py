from __future__ import annotations

import random

import pytest

from corpuskit.documents import Document
from corpuskit.errors import AlreadyDecidedError
from corpuskit.licenses import (
    CCFamily,
    CCLicense,
    LicenseAnnotation,
    LicenseCandidate,
    Location,
    SourceKind,
)
from corpuskit.policy import (
    DomainStatus,
    apply_allowlist,
    apply_allowlist_file,
    build_ledger,
    build_verification_queue,
    filter_domain_license,
    filter_license_position,
    load_ledger,
    merge_ledgers,
    permissive_code_license,
    record_verdict,
    run_policy,
    save_ledger,
)


def _annotation(family: CCFamily | None, location: Location = Location.HEAD, conflict=False):
    if family is None:
        return LicenseAnnotation()
    candidate = LicenseCandidate(
        source_kind=SourceKind.META_TAG,
        location=location,
        target_url="https://creativecommons.org/licenses/by/4.0/",
        parsed=CCLicense(family, "4.0"),
        context_snippet="snippet",
        doc_order=0,
        rank=1,
    )
    return LicenseAnnotation(
        candidates=[candidate], best=candidate.parsed, best_location=location, conflict=conflict
    )


def _doc(
    domain: str,
    idx: int,
    family: CCFamily | None = CCFamily.BY,
    location: Location = Location.HEAD,
    words: int = 10,
    conflict: bool = False,
):
    text = " ".join(f"woord{i}" for i in range(words))
    doc = Document.create(
        url=f"https://{domain}/pagina/{idx}", collection_id="c5", text=text, domain=domain
    )
    doc.license = _annotation(family, location, conflict)
    return doc


# -- build_ledger ------------------------------------------------------------


def test_empty_ledger():
    assert build_ledger([]) == {}


def test_ledger_counts():
    docs = [_doc("a.example", i) for i in range(3)] + [_doc("b.example", i) for i in range(2)]
    ledger = build_ledger(docs)
    assert ledger["a.example"].doc_count == 3
    assert ledger["b.example"].doc_count == 2
    assert ledger["a.example"].word_count == 30
    assert ledger["a.example"].family_histogram == {"by": 3}
    assert ledger["a.example"].location_histogram == {"head": 3}


def test_unannotated_docs_neutral():
    docs = [_doc("a.example", 0), _doc("a.example", 1, family=None)]
    ledger = build_ledger(docs)
    assert ledger["a.example"].doc_count == 2
    assert sum(ledger["a.example"].family_histogram.values()) == 1


def test_merged_shards_equal_single_pass():
    rng = random.Random(6)
    docs = [
        _doc(f"d{rng.randint(0, 5)}.example", i, family=rng.choice(list(CCFamily)), words=rng.randint(1, 50))
        for i in range(80)
    ]
    cut = 37
    merged = merge_ledgers(build_ledger(docs[:cut]), build_ledger(docs[cut:]))
    single = build_ledger(docs)
    assert {d: e.to_dict() for d, e in merged.items()} == {
        d: e.to_dict() for d, e in single.items()
    }


def test_merge_commutative_and_associative():
    docs_a = [_doc("a.example", i) for i in range(3)]
    docs_b = [_doc("a.example", 100 + i, family=CCFamily.ZERO) for i in range(2)]
    docs_c = [_doc("c.example", i) for i in range(4)]
    la, lb, lc = build_ledger(docs_a), build_ledger(docs_b), build_ledger(docs_c)

    def as_dicts(ledger):
        return {d: e.to_dict() for d, e in ledger.items()}

    assert as_dicts(merge_ledgers(la, lb)) == as_dicts(merge_ledgers(lb, la))
    assert as_dicts(merge_ledgers(merge_ledgers(la, lb), lc)) == as_dicts(
        merge_ledgers(la, merge_ledgers(lb, lc))
    )


def test_evidence_capped_at_five():
    docs = [_doc("a.example", i) for i in range(9)]
    ledger = build_ledger(docs)
    assert len(ledger["a.example"].evidence) == 5
    # canonical: the five smallest doc_ids
    all_ids = sorted(d.doc_id for d in docs)
    assert [e.doc_id for e in ledger["a.example"].evidence] == all_ids[:5]


# -- step 1: domain license filter --------------------------------------------


def test_pure_by_domain_retained():
    ledger = build_ledger([_doc("a.example", i) for i in range(3)])
    assert filter_domain_license(ledger) == {"a.example"}


def test_one_by_sa_doc_removes_domain():
    docs = [_doc("a.example", 0), _doc("a.example", 1, family=CCFamily.BY_SA)]
    assert filter_domain_license(build_ledger(docs)) == set()


def test_conflicted_doc_removes_domain():
    docs = [_doc("a.example", 0), _doc("a.example", 1, conflict=True)]
    ledger = build_ledger(docs)
    # brute-force per-doc check agrees
    assert any(d.license.conflict for d in docs)
    assert filter_domain_license(ledger) == set()


def test_domain_without_annotations_vacuously_retained():
    ledger = build_ledger([_doc("a.example", 0, family=None)])
    assert filter_domain_license(ledger) == {"a.example"}


def test_zero_and_mark_count_as_permissive():
    docs = [
        _doc("a.example", 0, family=CCFamily.ZERO),
        _doc("a.example", 1, family=CCFamily.MARK),
        _doc("a.example", 2, family=CCFamily.BY),
    ]
    assert filter_domain_license(build_ledger(docs)) == {"a.example"}


# -- step 2: license position ---------------------------------------------------


def test_position_filter():
    head = _doc("a.example", 0, location=Location.HEAD)
    footer = _doc("a.example", 1, location=Location.FOOTER)
    body = _doc("a.example", 2, location=Location.BODY)
    bare = _doc("a.example", 3, family=None)
    kept = list(filter_license_position([head, footer, body, bare]))
    assert [d.doc_id for d in kept] == [head.doc_id, footer.doc_id]


# -- step 3: verification queue + allowlist --------------------------------------


def test_queue_ordering_and_threshold():
    ledger = build_ledger(
        [
            _doc("mid.example", 0, words=300_000),
            _doc("small.example", 0, words=200_000),
            _doc("big.example", 0, words=400_000),
        ]
    )
    queue = build_verification_queue(ledger, min_words=250_000)
    assert [e.domain for e in queue.entries] == ["big.example", "mid.example"]
    assert ledger["small.example"].status is DomainStatus.BELOW_THRESHOLD
    assert queue.entries[0].evidence


def test_queue_empty_ledger():
    assert build_verification_queue({}, 250_000).entries == []


def test_queue_tie_broken_lexicographically():
    ledger = build_ledger(
        [_doc("bbb.example", 0, words=300_000), _doc("aaa.example", 0, words=300_000)]
    )
    queue = build_verification_queue(ledger, min_words=250_000)
    assert [e.domain for e in queue.entries] == ["aaa.example", "bbb.example"]
    # stable-sort recheck
    resorted = sorted(queue.entries, key=lambda e: (-e.word_count, e.domain))
    assert [e.domain for e in resorted] == [e.domain for e in queue.entries]


def test_queue_word_counts_non_increasing():
    rng = random.Random(2)
    docs = [_doc(f"d{i}.example", 0, words=rng.randint(1, 600_000)) for i in range(30)]
    queue = build_verification_queue(build_ledger(docs), min_words=250_000)
    counts = [e.word_count for e in queue.entries]
    assert counts == sorted(counts, reverse=True)
    assert all(c > 250_000 for c in counts)


def test_requalification_after_growth():
    ledger = build_ledger([_doc("a.example", 0, words=100)])
    build_verification_queue(ledger, min_words=250_000)
    assert ledger["a.example"].status is DomainStatus.BELOW_THRESHOLD
    build_verification_queue(ledger, min_words=50)
    assert ledger["a.example"].status is DomainStatus.UNVERIFIED


def test_verdicts_and_allowlist():
    docs = [_doc("a.example", i) for i in range(2)] + [_doc("b.example", 0)]
    ledger = build_ledger(docs)
    record_verdict(ledger, "a.example", DomainStatus.VERIFIED_PERMISSIVE, note="ok")
    record_verdict(ledger, "b.example", DomainStatus.REJECTED, note="icons only")
    kept = list(apply_allowlist(docs, ledger))
    assert {d.domain for d in kept} == {"a.example"}
    assert len(kept) == 2


def test_verdict_on_unknown_domain():
    with pytest.raises(KeyError):
        record_verdict({}, "nope.example", DomainStatus.REJECTED)


def test_verdict_twice_rejected():
    ledger = build_ledger([_doc("a.example", 0)])
    record_verdict(ledger, "a.example", DomainStatus.VERIFIED_PERMISSIVE)
    with pytest.raises(AlreadyDecidedError):
        record_verdict(ledger, "a.example", DomainStatus.REJECTED)


def test_unverified_and_below_threshold_dropped():
    docs = [_doc("a.example", 0), _doc("b.example", 0)]
    ledger = build_ledger(docs)
    build_verification_queue(ledger, min_words=250_000)  # both below threshold
    assert list(apply_allowlist(docs, ledger)) == []


# -- composed policy ---------------------------------------------------------------


def _brute_force_policy(docs, verdicts, min_words=250_000):
    """Naive one-function reimplementation of the three steps."""
    permissive = {"zero", "mark", "by"}
    by_domain: dict[str, list] = {}
    for doc in docs:
        by_domain.setdefault(doc.domain, []).append(doc)
    kept = []
    for doc in docs:
        group = by_domain[doc.domain]
        ok = True
        for other in group:
            ann = other.license
            if ann is not None and ann.best is not None:
                if ann.best.family.value not in permissive or ann.conflict:
                    ok = False
        if not ok:
            continue
        ann = doc.license
        if ann is None or ann.best is None:
            continue
        if ann.best_location.value not in ("head", "footer"):
            continue
        if verdicts.get(doc.domain) != "verified_permissive":
            continue
        kept.append(doc.doc_id)
    return set(kept)


def test_policy_composition_matches_brute_force():
    rng = random.Random(13)
    families = [CCFamily.BY, CCFamily.ZERO, CCFamily.MARK, CCFamily.BY_SA, None]
    locations = [Location.HEAD, Location.FOOTER, Location.BODY]
    docs = []
    for i in range(300):
        domain = f"site{rng.randint(0, 19)}.example"
        docs.append(
            _doc(
                domain,
                i,
                family=rng.choice(families),
                location=rng.choice(locations),
                words=rng.randint(1, 200),
                conflict=rng.random() < 0.05,
            )
        )
    ledger = build_ledger(docs)
    verdicts = {}
    for domain, entry in ledger.items():
        if rng.random() < 0.6:
            verdicts[domain] = "verified_permissive"
        elif rng.random() < 0.5:
            verdicts[domain] = "rejected"
    for domain, status in verdicts.items():
        record_verdict(ledger, domain, DomainStatus(status))
    kept, _ = run_policy(docs, ledger, min_words=50)
    assert {d.doc_id for d in kept} == _brute_force_policy(docs, verdicts, min_words=50)


def test_policy_output_order_invariant():
    rng = random.Random(21)
    docs = [
        _doc(f"s{rng.randint(0, 5)}.example", i, family=rng.choice([CCFamily.BY, CCFamily.BY_NC]))
        for i in range(60)
    ]
    ledger = build_ledger(docs)
    for domain in ledger:
        record_verdict(ledger, domain, DomainStatus.VERIFIED_PERMISSIVE)
    kept_a, _ = run_policy(list(docs), ledger)
    shuffled = list(docs)
    rng.shuffle(shuffled)
    kept_b, _ = run_policy(shuffled, ledger)
    assert {d.doc_id for d in kept_a} == {d.doc_id for d in kept_b}


def test_monotone_restriction_of_steps():
    rng = random.Random(31)
    docs = [
        _doc(
            f"s{rng.randint(0, 9)}.example",
            i,
            family=rng.choice([CCFamily.BY, CCFamily.BY_SA, None]),
            location=rng.choice(list(Location)),
        )
        for i in range(100)
    ]
    ledger = build_ledger(docs)
    step1_domains = filter_domain_license(ledger)
    step12 = {d.doc_id for d in filter_license_position(docs) if d.domain in step1_domains}
    for domain in ledger:
        record_verdict(ledger, domain, DomainStatus.VERIFIED_PERMISSIVE)
    kept, _ = run_policy(docs, ledger)
    step123 = {d.doc_id for d in kept}
    assert step123 <= step12 <= {d.doc_id for d in docs}


def test_survivors_satisfy_all_conditions_independently():
    rng = random.Random(41)
    docs = [
        _doc(
            f"s{rng.randint(0, 9)}.example",
            i,
            family=rng.choice(list(CCFamily) + [None]),
            location=rng.choice(list(Location)),
            conflict=rng.random() < 0.1,
        )
        for i in range(150)
    ]
    ledger = build_ledger(docs)
    for domain in list(ledger)[::2]:
        record_verdict(ledger, domain, DomainStatus.VERIFIED_PERMISSIVE)
    kept, ledger = run_policy(docs, ledger)
    permissive = {"zero", "mark", "by"}
    for doc in kept:
        assert doc.license.best.family.value in permissive
        assert doc.license.best_location.value in ("head", "footer")
        assert ledger[doc.domain].status is DomainStatus.VERIFIED_PERMISSIVE


# -- files and predicates --------------------------------------------------------


def test_ledger_file_roundtrip(tmp_path):
    ledger = build_ledger([_doc("a.example", i) for i in range(3)])
    path = tmp_path / "ledger.json"
    save_ledger(ledger, path)
    loaded = load_ledger(path)
    assert {d: e.to_dict() for d, e in loaded.items()} == {
        d: e.to_dict() for d, e in ledger.items()
    }


def test_allowlist_file_applies_verdicts(tmp_path):
    import json

    ledger = build_ledger([_doc("a.example", 0), _doc("b.example", 0)])
    path = tmp_path / "allow.jsonl"
    rows = [
        {"domain": "a.example", "status": "verified_permissive", "verdict_note": "ok",
         "verdict_time": "2026-01-01T00:00:00Z", "reviewer": "rev"},
        {"domain": "missing.example", "status": "verified_permissive"},
    ]
    path.write_text("\n".join(json.dumps(r) for r in rows) + "\n", encoding="utf-8")
    applied = apply_allowlist_file(ledger, path)
    assert applied == 1
    assert ledger["a.example"].status is DomainStatus.VERIFIED_PERMISSIVE
    assert ledger["a.example"].reviewer == "rev"
    assert ledger["b.example"].status is DomainStatus.UNVERIFIED


@pytest.mark.parametrize(
    "spdx,expected",
    [
        ("MIT", True),
        ("mit", True),
        ("Apache-2.0", True),
        ("BSD-2-Clause", True),
        ("bsd-3-clause", True),
        ("Unlicense", True),
        ("GPL-3.0", False),
        ("AGPL-3.0", False),
        ("CC-BY-4.0", False),
        ("", False),
    ],
)
def test_permissive_code_license(spdx, expected):
    assert permissive_code_license(spdx) is expected
