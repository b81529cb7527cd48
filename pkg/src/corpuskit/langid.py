"""Character n-gram language scoring.

A self-contained classifier: per-language 1..3-gram frequency profiles,
cosine similarity against the input's n-gram vector, and an exponential
normalization so every document gets a proper score distribution over the
profiled languages. Profiles for the nine supported languages ship with
the package and can be retrained or swapped via the JSON profile format.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Optional

import numpy as np

from ._kernels import sparse_dot
from .errors import ConfigurationError

PROFILE_FORMAT_VERSION = 1
NGRAM_ORDERS = (1, 2, 3)

_WS_RE = re.compile(r"\s+")


def _normalize_for_ngrams(text: str) -> str:
    return _WS_RE.sub(" ", text).strip().lower()


def _ngram_counts(text: str) -> dict[str, float]:
    """Per-order-normalized n-gram frequencies of normalized text."""
    normalized = _normalize_for_ngrams(text)
    table: dict[str, float] = {}
    for n in NGRAM_ORDERS:
        counts: dict[str, int] = {}
        total = 0
        for i in range(len(normalized) - n + 1):
            gram = normalized[i : i + n]
            counts[gram] = counts.get(gram, 0) + 1
            total += 1
        if total:
            for gram, count in counts.items():
                table[gram] = count / total
    return table


@dataclass
class LanguageScores:
    scores: dict[str, float]
    top: str
    top_score: float

    @classmethod
    def from_scores(cls, scores: dict[str, float]) -> "LanguageScores":
        top = min(scores, key=lambda code: (-scores[code], code))
        return cls(scores=scores, top=top, top_score=scores[top])

    def to_dict(self) -> dict:
        return {"scores": self.scores, "top": self.top, "top_score": self.top_score}

    @classmethod
    def from_dict(cls, data: dict) -> "LanguageScores":
        return cls(scores=dict(data["scores"]), top=data["top"], top_score=float(data["top_score"]))


@dataclass
class LanguageProfile:
    language: str
    ngrams: dict[str, float] = field(default_factory=dict)
    note: str = ""

    def to_dict(self) -> dict:
        return {"language": self.language, "note": self.note, "ngrams": self.ngrams}

    @classmethod
    def from_dict(cls, data: dict) -> "LanguageProfile":
        return cls(language=data["language"], ngrams=dict(data["ngrams"]), note=data.get("note", ""))


def train_profile(
    language: str, corpus: Iterable[str], note: str = "", min_chars: int = 1000
) -> LanguageProfile:
    """Train a frequency profile from text samples of one language.

    Deterministic for a fixed corpus. Raises when the corpus holds fewer
    than min_chars characters of usable text, naming the language.
    """
    combined = "\n".join(corpus)
    usable = _normalize_for_ngrams(combined)
    if len(usable) < max(min_chars, 1):
        raise ConfigurationError(
            f"insufficient training data for language {language!r}: "
            f"{len(usable)} chars < {max(min_chars, 1)}"
        )
    return LanguageProfile(language=language, ngrams=_ngram_counts(combined), note=note)


class ProfileIndex:
    """Vectorized profile set for scoring; profiles sorted by language code.

    Frequencies are reweighted by how many profiles share each n-gram
    (rare-across-languages grams count more), which separates close
    language pairs far better than raw frequencies.
    """

    def __init__(self, profiles: Iterable[LanguageProfile]):
        ordered = sorted(profiles, key=lambda p: p.language)
        if not ordered:
            raise ConfigurationError("at least one language profile is required")
        self.languages = [p.language for p in ordered]
        self._vocab: dict[str, int] = {}
        doc_freq: dict[str, int] = {}
        for profile in ordered:
            for gram in profile.ngrams:
                if gram not in self._vocab:
                    self._vocab[gram] = len(self._vocab)
                doc_freq[gram] = doc_freq.get(gram, 0) + 1
        count = len(ordered)
        self._gram_weight = {
            gram: math.log(1.0 + count / df) for gram, df in doc_freq.items()
        }
        self._unseen_weight = math.log(1.0 + count)
        self._matrix = np.zeros((len(ordered), len(self._vocab)), dtype=np.float64)
        for row, profile in enumerate(ordered):
            for gram, freq in profile.ngrams.items():
                self._matrix[row, self._vocab[gram]] = freq * self._gram_weight[gram]
        norms = np.linalg.norm(self._matrix, axis=1)
        norms[norms == 0.0] = 1.0
        self._matrix /= norms[:, None]

    def similarities(self, text: str) -> np.ndarray:
        """Cosine similarity of the weighted text n-gram vector per profile."""
        table = _ngram_counts(text)
        if not table:
            return np.zeros(len(self.languages), dtype=np.float64)
        indices: list[int] = []
        values: list[float] = []
        sq_norm = 0.0
        for gram, freq in table.items():
            weighted = freq * self._gram_weight.get(gram, self._unseen_weight)
            sq_norm += weighted * weighted
            column = self._vocab.get(gram)
            if column is not None:
                indices.append(column)
                values.append(weighted)
        if not indices:
            return np.zeros(len(self.languages), dtype=np.float64)
        dots = sparse_dot(
            np.asarray(indices, dtype=np.int64),
            np.asarray(values, dtype=np.float64),
            self._matrix,
        )
        return dots / math.sqrt(sq_norm)

    def score(self, text: str) -> LanguageScores:
        sims = self.similarities(text)
        if not _normalize_for_ngrams(text):
            scores = np.full(len(self.languages), 1.0 / len(self.languages))
        else:
            exps = np.exp(sims - sims.max())
            scores = exps / exps.sum()
        mapping = {code: float(s) for code, s in zip(self.languages, scores)}
        return LanguageScores.from_scores(mapping)


def score_language(text: str, profiles: Iterable[LanguageProfile]) -> LanguageScores:
    """Score one text against a list of profiles (order-insensitive)."""
    return ProfileIndex(profiles).score(text)


def save_profiles(profiles: Iterable[LanguageProfile], path: str | Path) -> None:
    payload = {
        "format_version": PROFILE_FORMAT_VERSION,
        "profiles": [p.to_dict() for p in sorted(profiles, key=lambda p: p.language)],
    }
    Path(path).write_text(json.dumps(payload, sort_keys=True, ensure_ascii=False), encoding="utf-8")


def load_profiles(path: str | Path) -> list[LanguageProfile]:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    if data.get("format_version") != PROFILE_FORMAT_VERSION:
        raise ConfigurationError(f"unsupported profile format version in {path}")
    return [LanguageProfile.from_dict(p) for p in data["profiles"]]


_bundled_index: Optional[ProfileIndex] = None


def bundled_profiles() -> list[LanguageProfile]:
    raw = resources.files("corpuskit.data").joinpath("langid/profiles.json").read_text("utf-8")
    data = json.loads(raw)
    return [LanguageProfile.from_dict(p) for p in data["profiles"]]


def bundled_index() -> ProfileIndex:
    global _bundled_index
    if _bundled_index is None:
        _bundled_index = ProfileIndex(bundled_profiles())
    return _bundled_index
