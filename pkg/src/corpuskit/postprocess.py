"""Post-approval phases: personal-data scrubbing, harmful-language
flagging, within-collection deduplication, and the human PII audit bundle.

Scrubbing replaces pattern matches with stable ``[PII:<class>]``
placeholders and is a fixed point: scrubbing scrubbed text changes
nothing. Deduplication is scoped to one collection; cross-collection
pairs are never compared.
"""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Callable, Iterable, Optional

import numpy as np

from ._kernels import minhash_signature
from .curate import normalize, sample_representative
from .documents import Document
from .errors import ConfigurationError

# ---------------------------------------------------------------------------
# PII scrubbing

_PLACEHOLDER_RE = re.compile(r"\[PII:[a-z_]+\]")


def _digits(s: str) -> str:
    return "".join(c for c in s if c.isdigit())


def _valid_iban(candidate: str) -> bool:
    compact = candidate.replace(" ", "").upper()
    if not 15 <= len(compact) <= 34:
        return False
    rearranged = compact[4:] + compact[:4]
    try:
        number = int("".join(str(int(c, 36)) for c in rearranged))
    except ValueError:
        return False
    return number % 97 == 1


def _valid_bsn(candidate: str) -> bool:
    """Dutch citizen number: nine digits passing the 11-test."""
    if len(candidate) != 9 or not candidate.isdigit():
        return False
    digits = [int(c) for c in candidate]
    total = sum(w * d for w, d in zip(range(9, 1, -1), digits[:8])) - digits[8]
    return total != 0 and total % 11 == 0


def _valid_intl_phone(match_text: str) -> bool:
    return 8 <= len(_digits(match_text)) <= 15


def _valid_nl_phone(match_text: str) -> bool:
    return len(_digits(match_text)) == 10


@dataclass(frozen=True)
class _Pattern:
    name: str
    regex: re.Pattern
    check: Optional[Callable[[str], bool]] = None


# Order matters: URL credentials before email (the userinfo would read as
# an address), IBAN before phones (letter prefix keeps them apart anyway),
# phones before the bare nine-digit check.
_PATTERNS = (
    _Pattern(
        "url_credentials",
        re.compile(r"(?<=://)[^\s/@:\[\]]+:[^\s/@\[\]]+(?=@)"),
    ),
    _Pattern(
        "email",
        re.compile(r"[A-Za-z0-9._%+-]+@[A-Za-z0-9](?:[A-Za-z0-9.-]*[A-Za-z0-9])?\.[A-Za-z]{2,}"),
    ),
    _Pattern(
        "iban",
        re.compile(r"\b[A-Z]{2}\d{2}(?: ?[A-Z0-9]{2,4}){3,8}\b"),
        _valid_iban,
    ),
    _Pattern(
        "phone",
        re.compile(r"\+[1-9]\d{0,2}[ -]?\d{1,4}(?:[ -]?\d{2,4}){1,4}"),
        _valid_intl_phone,
    ),
    _Pattern(
        "phone",
        re.compile(r"\b0\d{1,3}[ -]?(?:\d[ -]?){5,8}\d\b"),
        _valid_nl_phone,
    ),
    _Pattern(
        "bsn",
        re.compile(r"\b\d{9}\b"),
        _valid_bsn,
    ),
)

PII_PATTERN_NAMES = tuple(dict.fromkeys(p.name for p in _PATTERNS))

_RESIDUAL_RISK_RE = re.compile(r"\d{11,}")


@dataclass
class ScrubReport:
    doc_id: str
    replacements: list[dict] = field(default_factory=list)
    residual_risk_flag: bool = False

    def to_dict(self) -> dict:
        return {
            "doc_id": self.doc_id,
            "replacements": self.replacements,
            "residual_risk_flag": self.residual_risk_flag,
        }


def _valid_prefix(matched: str, check: Callable[[str], bool]) -> Optional[str]:
    """Longest space-group prefix passing the check; greedy matches can
    overrun into following numbers."""
    candidate = matched
    while candidate:
        if check(candidate):
            return candidate
        if " " not in candidate:
            return None
        candidate = candidate.rsplit(" ", 1)[0]
    return None


@dataclass(frozen=True)
class ScrubSpan:
    """One replacement, located in the coordinates of the original text."""

    start: int
    end: int
    pattern_name: str
    placeholder: str


def _scrub_with_spans(text: str) -> tuple[str, dict[str, int], list[ScrubSpan]]:
    """Run the pattern passes while mapping every replacement back to the
    original text. Placeholders contain no digits, @, or ://, so later
    passes never match inside them and the mapping stays exact."""
    current = text
    origin = list(range(len(text)))
    counts: dict[str, int] = {}
    spans: list[ScrubSpan] = []
    for pattern in _PATTERNS:
        placeholder = f"[PII:{pattern.name}]"
        parts: list[str] = []
        part_origin: list[int] = []
        pos = 0
        for match in pattern.regex.finditer(current):
            start, end = match.start(), match.end()
            if pattern.check is not None:
                prefix = _valid_prefix(match.group(0), pattern.check)
                if prefix is None:
                    continue
                end = start + len(prefix)
            parts.append(current[pos:start])
            part_origin.extend(origin[pos:start])
            if origin[start] >= 0 and origin[end - 1] >= 0:
                spans.append(
                    ScrubSpan(origin[start], origin[end - 1] + 1, pattern.name, placeholder)
                )
            counts[pattern.name] = counts.get(pattern.name, 0) + 1
            parts.append(placeholder)
            part_origin.extend([-1] * len(placeholder))
            pos = end
        parts.append(current[pos:])
        part_origin.extend(origin[pos:])
        current = "".join(parts)
        origin = part_origin
    spans.sort(key=lambda s: s.start)
    return current, counts, spans


def _scrub_text(text: str) -> tuple[str, dict[str, int]]:
    scrubbed, counts, _ = _scrub_with_spans(text)
    return scrubbed, counts


def scrub_pii(text: str, doc_id: str = "") -> tuple[str, ScrubReport]:
    """Replace PII pattern matches with placeholders; idempotent on output."""
    scrubbed, counts = _scrub_text(text)
    report = ScrubReport(
        doc_id=doc_id,
        replacements=[
            {"pattern_name": name, "count": counts[name]}
            for name in PII_PATTERN_NAMES
            if name in counts
        ],
        residual_risk_flag=bool(_RESIDUAL_RISK_RE.search(scrubbed)),
    )
    return scrubbed, report


def find_pii_matches(text: str) -> list[tuple[str, str]]:
    """(pattern_name, matched_text) for every validated match; audit helper."""
    found: list[tuple[str, str]] = []
    for pattern in _PATTERNS:
        for match in pattern.regex.finditer(text):
            if pattern.check is None:
                found.append((pattern.name, match.group(0)))
            elif _valid_prefix(match.group(0), pattern.check) is not None:
                found.append((pattern.name, match.group(0)))
    return found


def scrub_documents(docs: Iterable[Document]) -> Iterable[tuple[Document, ScrubReport]]:
    for doc in docs:
        scrubbed, report = scrub_pii(doc.text, doc.doc_id)
        doc.update_text(scrubbed)
        yield doc, report


# ---------------------------------------------------------------------------
# Harmful-language flagging


class Severity(str, Enum):
    NONE = "none"
    REVIEW = "review"
    DROP = "drop"


_SEVERITY_ORDER = {Severity.NONE: 0, Severity.REVIEW: 1, Severity.DROP: 2}


@dataclass
class HarmHit:
    term: str
    start: int
    end: int
    severity: Severity

    def to_dict(self) -> dict:
        return {
            "term": self.term,
            "start": self.start,
            "end": self.end,
            "severity": self.severity.value,
        }


@dataclass
class HarmFlag:
    severity: Severity
    hits: list[HarmHit] = field(default_factory=list)


def load_wordlist(path: str | Path) -> dict[str, Severity]:
    """One term per line: term<TAB>severity."""
    wordlist: dict[str, Severity] = {}
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        term, _, severity = line.partition("\t")
        wordlist[term.strip().lower()] = Severity(severity.strip().lower())
    return wordlist


def flag_harmful(text: str, wordlist: dict[str, Severity]) -> HarmFlag:
    """Whole-word, case-insensitive matching; longest match wins on overlap."""
    if not wordlist:
        raise ConfigurationError("harmful-language wordlist is empty")
    raw: list[HarmHit] = []
    for term, severity in wordlist.items():
        pattern = re.compile(
            r"(?<!\w)" + r"\s+".join(re.escape(part) for part in term.split()) + r"(?!\w)",
            re.IGNORECASE,
        )
        for match in pattern.finditer(text):
            raw.append(HarmHit(term=term, start=match.start(), end=match.end(), severity=severity))
    raw.sort(key=lambda h: (-(h.end - h.start), h.start))
    kept: list[HarmHit] = []
    for hit in raw:
        if all(hit.end <= other.start or hit.start >= other.end for other in kept):
            kept.append(hit)
    kept.sort(key=lambda h: h.start)
    severity = max(
        (h.severity for h in kept), key=lambda s: _SEVERITY_ORDER[s], default=Severity.NONE
    )
    return HarmFlag(severity=severity, hits=kept)


# ---------------------------------------------------------------------------
# Deduplication

DEFAULT_SHINGLE_SIZE = 13
NUM_PERMUTATIONS = 128
DEFAULT_JACCARD_THRESHOLD = 0.9
_LSH_BANDS = 8
_LSH_ROWS = NUM_PERMUTATIONS // _LSH_BANDS

_perm_rng = np.random.default_rng(0x5EED_C0DE)
_PERM_A = (_perm_rng.integers(1, 1 << 63, size=NUM_PERMUTATIONS, dtype=np.uint64) << np.uint64(1)) | np.uint64(1)
_PERM_B = _perm_rng.integers(0, 1 << 63, size=NUM_PERMUTATIONS, dtype=np.uint64)


def _shingle_hashes(words: list[str], shingle_size: int) -> np.ndarray:
    if not words:
        return np.zeros(0, dtype=np.uint64)
    if len(words) < shingle_size:
        shingles = {tuple(words)}
    else:
        shingles = {
            tuple(words[i : i + shingle_size]) for i in range(len(words) - shingle_size + 1)
        }
    hashes = np.empty(len(shingles), dtype=np.uint64)
    for i, shingle in enumerate(shingles):
        digest = hashlib.blake2b("\x1f".join(shingle).encode("utf-8"), digest_size=8).digest()
        hashes[i] = np.frombuffer(digest, dtype=np.uint64)[0]
    return hashes


def shingle_set(text: str, shingle_size: int = DEFAULT_SHINGLE_SIZE) -> set[tuple[str, ...]]:
    """Exact shingle set; the brute-force counterpart of the signatures."""
    words = text.split()
    if not words:
        return set()
    if len(words) < shingle_size:
        return {tuple(words)}
    return {tuple(words[i : i + shingle_size]) for i in range(len(words) - shingle_size + 1)}


def jaccard(a: set, b: set) -> float:
    if not a and not b:
        return 1.0
    union = len(a | b)
    return len(a & b) / union if union else 0.0


def text_signature(text: str, shingle_size: int = DEFAULT_SHINGLE_SIZE) -> np.ndarray:
    hashes = _shingle_hashes(text.split(), shingle_size)
    if hashes.size == 0:
        return np.full(NUM_PERMUTATIONS, np.iinfo(np.uint64).max, dtype=np.uint64)
    return minhash_signature(hashes, _PERM_A, _PERM_B)


def signature_similarity(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.mean(a == b))


@dataclass
class DedupReport:
    collection_id: str
    dropped: dict[str, str] = field(default_factory=dict)  # dropped doc_id -> retained doc_id
    exact_duplicates: int = 0
    near_duplicates: int = 0

    def to_dict(self) -> dict:
        return {
            "collection_id": self.collection_id,
            "dropped": self.dropped,
            "exact_duplicates": self.exact_duplicates,
            "near_duplicates": self.near_duplicates,
        }


def deduplicate(
    docs: Iterable[Document],
    scope: str,
    *,
    shingle_size: int = DEFAULT_SHINGLE_SIZE,
    jaccard_threshold: float = DEFAULT_JACCARD_THRESHOLD,
) -> tuple[list[Document], DedupReport]:
    """Exact then near-duplicate removal within one collection.

    Exact: hash of normalized text, first occurrence wins. Near: minhash
    signatures over word shingles, banded candidate lookup, estimated
    Jaccard >= threshold collapses the newcomer onto the earliest match.
    Documents outside the scope collection raise.
    """
    report = DedupReport(collection_id=scope)
    kept: list[Document] = []
    seen_exact: dict[str, str] = {}
    bands: dict[tuple[int, bytes], list[int]] = {}
    signatures: list[np.ndarray] = []
    for doc in docs:
        if doc.collection_id != scope:
            raise ValueError(
                f"document {doc.doc_id} belongs to {doc.collection_id!r}, not scope {scope!r}"
            )
        exact_key = hashlib.sha256(normalize(doc.text).encode("utf-8")).hexdigest()
        if exact_key in seen_exact:
            report.dropped[doc.doc_id] = seen_exact[exact_key]
            report.exact_duplicates += 1
            continue
        signature = text_signature(doc.text, shingle_size)
        candidate_ids: list[int] = []
        band_keys = []
        for band in range(_LSH_BANDS):
            key = (band, signature[band * _LSH_ROWS : (band + 1) * _LSH_ROWS].tobytes())
            band_keys.append(key)
            candidate_ids.extend(bands.get(key, ()))
        match_index: Optional[int] = None
        for idx in sorted(set(candidate_ids)):
            if signature_similarity(signature, signatures[idx]) >= jaccard_threshold:
                match_index = idx
                break
        if match_index is not None:
            report.dropped[doc.doc_id] = kept[match_index].doc_id
            report.near_duplicates += 1
            continue
        seen_exact[exact_key] = doc.doc_id
        index = len(kept)
        kept.append(doc)
        signatures.append(signature)
        for key in band_keys:
            bands.setdefault(key, []).append(index)
    return kept, report


# ---------------------------------------------------------------------------
# PII audit bundle


@dataclass
class AuditEntry:
    doc_id: str
    before: str
    opcodes: list[list]
    contexts: list[dict]

    def reconstruct(self) -> str:
        """Apply the stored diff to the before-text."""
        out: list[str] = []
        for tag, i1, i2, replacement in self.opcodes:
            if tag == "equal":
                out.append(self.before[i1:i2])
            else:
                out.append(replacement)
        return "".join(out)

    def to_dict(self) -> dict:
        return {
            "doc_id": self.doc_id,
            "before": self.before,
            "opcodes": self.opcodes,
            "contexts": self.contexts,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "AuditEntry":
        return cls(
            doc_id=data["doc_id"],
            before=data["before"],
            opcodes=[list(op) for op in data["opcodes"]],
            contexts=list(data["contexts"]),
        )


@dataclass
class AuditBundle:
    seed: int
    requested: int
    entries: list[AuditEntry] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "requested": self.requested,
            "entries": [e.to_dict() for e in self.entries],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "AuditBundle":
        return cls(
            seed=data["seed"],
            requested=data["requested"],
            entries=[AuditEntry.from_dict(e) for e in data["entries"]],
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(
            json.dumps(self.to_dict(), indent=2, ensure_ascii=False) + "\n", encoding="utf-8"
        )

    @classmethod
    def load(cls, path: str | Path) -> "AuditBundle":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def _spans_to_opcodes(before: str, spans: list[ScrubSpan]) -> list[list]:
    """Equal/replace alternation over the original text."""
    opcodes: list[list] = []
    pos = 0
    for span in spans:
        if span.start > pos:
            opcodes.append(["equal", pos, span.start, ""])
        opcodes.append(["replace", span.start, span.end, span.placeholder])
        pos = span.end
    if pos < len(before):
        opcodes.append(["equal", pos, len(before), ""])
    return opcodes


_CONTEXT_CHARS = 40


def pii_audit_sample(before_docs: Iterable[Document], n: int = 100, seed: int = 0) -> AuditBundle:
    """Deterministic review bundle: sample pre-scrub documents, re-run the
    scrub, and record before/after diffs with replacement contexts."""
    sample = sample_representative(list(before_docs), n, seed)
    bundle = AuditBundle(seed=seed, requested=n)
    for doc in sample:
        _, _, spans = _scrub_with_spans(doc.text)
        contexts = [
            {
                "pattern_name": span.pattern_name,
                "original": doc.text[span.start : span.end],
                "replacement": span.placeholder,
                "before_context": doc.text[
                    max(0, span.start - _CONTEXT_CHARS) : span.end + _CONTEXT_CHARS
                ],
            }
            for span in spans
        ]
        bundle.entries.append(
            AuditEntry(
                doc_id=doc.doc_id,
                before=doc.text,
                opcodes=_spans_to_opcodes(doc.text, spans),
                contexts=contexts,
            )
        )
    return bundle
