"""Evaluation-run core: normalization, the eleven heuristic quality
dimensions, per-collection threshold application, representative sampling,
and score-bucket reports for human inspection.

The eleven dimensions follow the usual web-filtering playbook (duplicate
lines, length, punctuation, symbol density, ...). Exact definitions live in
score_quality; every bound is overridable per collection, since one global
setting mistreats dialects and clean-but-unusual collections alike.
"""

from __future__ import annotations

import json
import random
import re
import unicodedata
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Optional

from .documents import Document
from .errors import ConfigurationError

_CONTROL_RE = re.compile(r"[\x00-\x08\x0b-\x1f\x7f]")
_HSPACE_RE = re.compile(r"[ \t  -   　]+")
_BLANK_RUN_RE = re.compile(r"\n{4,}")

_END_PUNCT = ('.', '!', '?', '"', '»')
_BULLETS = ("-", "*", "•")
_SYMBOLS = ("#", "…", "{", "}")

EXCERPT_CHARS = 160
MAX_BUCKET_EXCERPTS = 25


def normalize(text: str) -> str:
    """Canonical composition, LF endings, control removal, whitespace collapse.

    Idempotent: a second application returns its input unchanged.
    """
    text = unicodedata.normalize("NFC", text)
    text = text.replace("\r\n", "\n").replace("\r", "\n")
    text = _CONTROL_RE.sub("", text.replace("\t", " "))
    lines = [_HSPACE_RE.sub(" ", line).strip() for line in text.split("\n")]
    text = "\n".join(lines)
    # runs of 3+ blank lines (4+ newlines) collapse to a single blank line
    text = _BLANK_RUN_RE.sub("\n\n", text)
    return text


DIMENSIONS = (
    "min_chars",
    "mean_word_length",
    "frac_duplicate_lines",
    "frac_chars_in_duplicate_lines",
    "frac_lines_end_punct",
    "symbol_word_ratio",
    "frac_alpha_words",
    "stopword_hits",
    "top_bigram_frac",
    "frac_bullet_lines",
    "max_line_repetition_run",
)


@dataclass
class QualityScores:
    min_chars: int = 0
    mean_word_length: float = 0.0
    frac_duplicate_lines: float = 0.0
    frac_chars_in_duplicate_lines: float = 0.0
    frac_lines_end_punct: float = 0.0
    symbol_word_ratio: float = 0.0
    frac_alpha_words: float = 0.0
    stopword_hits: int = 0
    top_bigram_frac: float = 0.0
    frac_bullet_lines: float = 0.0
    max_line_repetition_run: int = 0

    def value(self, dimension: str) -> float:
        if dimension not in DIMENSIONS:
            raise ConfigurationError(f"unknown quality dimension: {dimension!r}")
        return getattr(self, dimension)

    def to_dict(self) -> dict:
        return {name: getattr(self, name) for name in DIMENSIONS}

    @classmethod
    def from_dict(cls, data: dict) -> "QualityScores":
        return cls(**{name: data[name] for name in DIMENSIONS if name in data})


def _load_stopwords(language: Optional[str]) -> frozenset[str]:
    root = resources.files("corpuskit.data").joinpath("stopwords")
    names = [f"{language}.txt"] if language else [p.name for p in root.iterdir()]
    words: set[str] = set()
    for name in names:
        entry = root.joinpath(name)
        try:
            content = entry.read_text("utf-8")
        except (FileNotFoundError, IsADirectoryError):
            continue
        words.update(w.strip().lower() for w in content.splitlines() if w.strip())
    return frozenset(words)


_stopword_cache: dict[Optional[str], frozenset[str]] = {}


def stopwords_for(language: Optional[str]) -> frozenset[str]:
    """Bundled stoplist for a language; the union of all lists when None."""
    if language not in _stopword_cache:
        _stopword_cache[language] = _load_stopwords(language)
    return _stopword_cache[language]


def score_quality(text: str, language: Optional[str] = None) -> QualityScores:
    """Compute all eleven dimensions. Empty text scores all zeros.

    Line-based fractions run over non-empty stripped lines; word-based
    ones over whitespace tokens. Definitions:
      min_chars                      total character count
      mean_word_length               mean token length
      frac_duplicate_lines           repeat-occurrence lines / lines
      frac_chars_in_duplicate_lines  chars in repeat occurrences / line chars
      frac_lines_end_punct           lines ending in . ! ? " » / lines
      symbol_word_ratio              count of # … { } / words
      frac_alpha_words               tokens containing a letter / tokens
      stopword_hits                  tokens found in the 30-word stoplist
      top_bigram_frac                2 x top word-bigram count / words, capped at 1
      frac_bullet_lines              lines starting with - * • / lines
      max_line_repetition_run        longest run of consecutive identical lines
    """
    if not text:
        return QualityScores()
    words = text.split()
    stripped = [line.strip() for line in text.split("\n")]
    lines = [line for line in stripped if line]

    scores = QualityScores(min_chars=len(text))
    if words:
        scores.mean_word_length = sum(len(w) for w in words) / len(words)
        alpha = sum(1 for w in words if any(c.isalpha() for c in w))
        scores.frac_alpha_words = alpha / len(words)
        symbol_count = sum(text.count(s) for s in _SYMBOLS)
        scores.symbol_word_ratio = symbol_count / len(words)
        stoplist = stopwords_for(language)
        scores.stopword_hits = sum(
            1 for w in words if w.strip(".,;:!?\"'()[]»«").lower() in stoplist
        )
    if len(words) >= 2:
        bigrams: dict[tuple[str, str], int] = {}
        for pair in zip(words, words[1:]):
            bigrams[pair] = bigrams.get(pair, 0) + 1
        top = max(bigrams.values())
        scores.top_bigram_frac = min(1.0, top * 2 / len(words))
    if lines:
        counts: dict[str, int] = {}
        for line in lines:
            counts[line] = counts.get(line, 0) + 1
        dup_lines = sum(c - 1 for c in counts.values())
        scores.frac_duplicate_lines = dup_lines / len(lines)
        total_chars = sum(len(line) for line in lines)
        dup_chars = sum(len(line) * (c - 1) for line, c in counts.items())
        scores.frac_chars_in_duplicate_lines = dup_chars / total_chars if total_chars else 0.0
        scores.frac_lines_end_punct = sum(
            1 for line in lines if line.endswith(_END_PUNCT)
        ) / len(lines)
        scores.frac_bullet_lines = sum(
            1 for line in lines if line.startswith(_BULLETS)
        ) / len(lines)
        run = best = 0
        previous: Optional[str] = None
        for line in stripped:
            if line and line == previous:
                run += 1
            else:
                run = 1 if line else 0
            previous = line if line else None
            best = max(best, run)
        scores.max_line_repetition_run = best
    return scores


@dataclass
class Bound:
    lower: Optional[float] = None
    upper: Optional[float] = None

    def validate(self, dimension: str) -> None:
        if self.lower is not None and self.upper is not None and self.lower > self.upper:
            raise ConfigurationError(
                f"bound for {dimension}: lower {self.lower} > upper {self.upper}"
            )

    def holds(self, value: float) -> bool:
        if self.lower is not None and value < self.lower:
            return False
        if self.upper is not None and value > self.upper:
            return False
        return True


@dataclass
class ThresholdConfig:
    collection_id: str
    bounds: dict[str, Bound] = field(default_factory=dict)
    target_languages: list[str] = field(default_factory=list)
    language_minimums: dict[str, float] = field(default_factory=dict)
    version: int = 0
    author_note: str = ""

    def validate(self) -> None:
        for dimension, bound in self.bounds.items():
            if dimension not in DIMENSIONS:
                raise ConfigurationError(f"unknown quality dimension: {dimension!r}")
            bound.validate(dimension)

    def to_dict(self) -> dict:
        return {
            "collection_id": self.collection_id,
            "bounds": {
                name: {"lower": b.lower, "upper": b.upper} for name, b in self.bounds.items()
            },
            "target_languages": sorted(self.target_languages),
            "language_minimums": dict(sorted(self.language_minimums.items())),
            "version": self.version,
            "author_note": self.author_note,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ThresholdConfig":
        cfg = cls(
            collection_id=data["collection_id"],
            bounds={
                name: Bound(lower=b.get("lower"), upper=b.get("upper"))
                for name, b in data.get("bounds", {}).items()
            },
            target_languages=list(data.get("target_languages", [])),
            language_minimums=dict(data.get("language_minimums", {})),
            version=int(data.get("version", 0)),
            author_note=data.get("author_note", ""),
        )
        cfg.validate()
        return cfg

    def save(self, path: str | Path) -> None:
        Path(path).write_text(
            json.dumps(self.to_dict(), indent=2, ensure_ascii=False) + "\n", encoding="utf-8"
        )

    @classmethod
    def load(cls, path: str | Path) -> "ThresholdConfig":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def reference_config(collection_id: str) -> ThresholdConfig:
    """Starting-point bounds; every one of them is meant to be tuned."""
    return ThresholdConfig(
        collection_id=collection_id,
        bounds={
            "min_chars": Bound(lower=200),
            "mean_word_length": Bound(lower=2.0, upper=12.0),
            "frac_duplicate_lines": Bound(upper=0.3),
            "frac_chars_in_duplicate_lines": Bound(upper=0.3),
            "frac_lines_end_punct": Bound(lower=0.1),
            "symbol_word_ratio": Bound(upper=0.1),
            "frac_alpha_words": Bound(lower=0.7),
            "top_bigram_frac": Bound(upper=0.2),
            "frac_bullet_lines": Bound(upper=0.9),
            "max_line_repetition_run": Bound(upper=4),
        },
        target_languages=["nld", "eng", "deu", "fry", "dan"],
        language_minimums={},
        version=0,
        author_note="reference defaults; tune per collection",
    )


@dataclass
class FilterVerdict:
    kept: bool
    failed_dimensions: list[str] = field(default_factory=list)


def apply_thresholds(doc: Document, cfg: ThresholdConfig) -> FilterVerdict:
    """Check every configured bound plus the language gate.

    failed_dimensions lists every violated bound, not just the first;
    a failed language gate appears as "language".
    """
    cfg.validate()
    if doc.quality_scores is None or doc.language_scores is None:
        raise ValueError(f"document {doc.doc_id} is missing scores")
    failed = [
        name
        for name in DIMENSIONS
        if name in cfg.bounds and not cfg.bounds[name].holds(doc.quality_scores.value(name))
    ]
    if cfg.target_languages:
        top = doc.language_scores.top
        minimum = cfg.language_minimums.get(top, 0.0)
        if top not in cfg.target_languages or doc.language_scores.top_score < minimum:
            failed.append("language")
    return FilterVerdict(kept=not failed, failed_dimensions=failed)


def sample_representative(collection: Iterable[Document], n: int, seed: int) -> list[Document]:
    """Uniform reservoir sample; deterministic for fixed seed and input order."""
    if n < 1:
        raise ValueError("sample size must be >= 1")
    rng = random.Random(seed)
    reservoir: list[Document] = []
    for i, doc in enumerate(collection):
        if i < n:
            reservoir.append(doc)
        else:
            j = rng.randint(0, i)
            if j < n:
                reservoir[j] = doc
    return reservoir


def dimension_value(doc: Document, dimension: str) -> float:
    """Score of a document on a quality dimension or a language.<code> axis."""
    if dimension.startswith("language."):
        code = dimension.split(".", 1)[1]
        if doc.language_scores is None:
            raise ValueError(f"document {doc.doc_id} has no language scores")
        return doc.language_scores.scores.get(code, 0.0)
    if doc.quality_scores is None:
        raise ValueError(f"document {doc.doc_id} has no quality scores")
    return doc.quality_scores.value(dimension)


@dataclass
class BucketExcerpt:
    doc_id: str
    score: float
    excerpt: str

    def to_dict(self) -> dict:
        return {"doc_id": self.doc_id, "score": self.score, "excerpt": self.excerpt}


@dataclass
class BucketReport:
    collection_id: str
    dimension: str
    edges: list[float]
    counts: list[int]
    samples: list[list[BucketExcerpt]]

    def to_dict(self) -> dict:
        return {
            "collection_id": self.collection_id,
            "dimension": self.dimension,
            "edges": self.edges,
            "counts": self.counts,
            "samples": [[e.to_dict() for e in bucket] for bucket in self.samples],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "BucketReport":
        return cls(
            collection_id=data["collection_id"],
            dimension=data["dimension"],
            edges=list(data["edges"]),
            counts=list(data["counts"]),
            samples=[
                [BucketExcerpt(e["doc_id"], e["score"], e["excerpt"]) for e in bucket]
                for bucket in data["samples"]
            ],
        )


def _edge_distance(score: float, edges: list[float], bucket: int) -> float:
    """Distance to the nearest finite edge of the bucket holding score."""
    finite = []
    if bucket > 0:
        finite.append(edges[bucket - 1])
    if bucket < len(edges):
        finite.append(edges[bucket])
    return min(abs(score - e) for e in finite)


def bucketize(
    sample: list[Document],
    dimension: str,
    edges: list[float],
    collection_id: str = "",
    max_excerpts: int = MAX_BUCKET_EXCERPTS,
) -> BucketReport:
    """Half-open [e_i, e_{i+1}) buckets plus underflow and overflow.

    Excerpts prefer documents nearest a bucket edge — the borderline cases
    a reviewer wants to see — with doc_id as a reproducible tiebreak.
    """
    if not edges or any(b <= a for a, b in zip(edges, edges[1:])):
        raise ConfigurationError("bucket edges must be strictly increasing")
    nbuckets = len(edges) + 1
    members: list[list[tuple[float, Document]]] = [[] for _ in range(nbuckets)]
    for doc in sample:
        score = dimension_value(doc, dimension)
        bucket = nbuckets - 1
        for i, edge in enumerate(edges):
            if score < edge:
                bucket = i
                break
        members[bucket].append((score, doc))
    samples: list[list[BucketExcerpt]] = []
    for bucket, entries in enumerate(members):
        ordered = sorted(
            entries, key=lambda item: (_edge_distance(item[0], edges, bucket), item[1].doc_id)
        )
        samples.append(
            [
                BucketExcerpt(doc_id=doc.doc_id, score=score, excerpt=doc.text[:EXCERPT_CHARS])
                for score, doc in ordered[:max_excerpts]
            ]
        )
    return BucketReport(
        collection_id=collection_id,
        dimension=dimension,
        edges=list(edges),
        counts=[len(entries) for entries in members],
        samples=samples,
    )
