"""Template verbalization of knowledge-graph triples and transcript cleaning.

Sentences come from deterministic slot substitution only; privacy and
triviality filters run before verbalization. Model-backed rewriting and
translation are pluggable interfaces with shipped no-op implementations,
keeping the produced text fully traceable to its structured source.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Iterator, Optional, Protocol

from .errors import ConfigurationError

_SENTENCE_END = (".", "!", "?")


@dataclass(frozen=True)
class Triple:
    subject_label: str
    predicate_id: str
    object_label: str
    subject_is_person: bool = False
    subject_has_encyclopedia_page: bool = False


def load_triples(path: str | Path) -> list[Triple]:
    """TSV rows: subject, predicate_id, object, is_person(0/1), has_page(0/1)."""
    triples = []
    for i, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines()):
        line = line.rstrip("\n")
        if not line.strip() or line.startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) != 5:
            raise ConfigurationError(f"triples line {i + 1}: expected 5 tab-separated fields")
        subject, predicate, obj, is_person, has_page = fields
        if not subject or not obj:
            raise ConfigurationError(f"triples line {i + 1}: empty subject or object label")
        triples.append(
            Triple(
                subject_label=subject,
                predicate_id=predicate,
                object_label=obj,
                subject_is_person=is_person.strip() == "1",
                subject_has_encyclopedia_page=has_page.strip() == "1",
            )
        )
    return triples


@dataclass(frozen=True)
class Template:
    predicate_id: str
    language: str
    pattern: str

    def __post_init__(self):
        if self.pattern.count("{s}") != 1 or self.pattern.count("{o}") != 1:
            raise ConfigurationError(
                f"template for {self.predicate_id!r} ({self.language}) must contain "
                "exactly one {s} and one {o} slot"
            )


class TemplateSet:
    """Templates for one language, indexed by predicate id."""

    def __init__(self, templates: Iterable[Template]):
        self._by_predicate = {t.predicate_id: t for t in templates}

    def get(self, predicate_id: str) -> Optional[Template]:
        return self._by_predicate.get(predicate_id)

    def __len__(self) -> int:
        return len(self._by_predicate)

    @classmethod
    def from_mapping(cls, data: dict, language: str) -> "TemplateSet":
        """JSON shape: {predicate_id: {language: pattern}}."""
        templates = []
        for predicate_id, patterns in data.items():
            pattern = patterns.get(language) if isinstance(patterns, dict) else None
            if pattern is not None:
                templates.append(
                    Template(predicate_id=predicate_id, language=language, pattern=pattern)
                )
        return cls(templates)

    @classmethod
    def load(cls, path: str | Path, language: str = "nld") -> "TemplateSet":
        return cls.from_mapping(json.loads(Path(path).read_text(encoding="utf-8")), language)


def bundled_templates(language: str = "nld") -> TemplateSet:
    raw = resources.files("corpuskit.data").joinpath("templates.json").read_text("utf-8")
    return TemplateSet.from_mapping(json.loads(raw), language)


def bundled_blocklist() -> set[str]:
    raw = resources.files("corpuskit.data").joinpath("predicate_blocklist.txt").read_text("utf-8")
    return {line.strip() for line in raw.splitlines() if line.strip() and not line.startswith("#")}


def verbalize(triple: Triple, templates: TemplateSet) -> Optional[str]:
    """Slot-substituted sentence, or None when no template covers the predicate."""
    template = templates.get(triple.predicate_id)
    if template is None:
        return None
    sentence = template.pattern.replace("{s}", triple.subject_label).replace(
        "{o}", triple.object_label
    )
    if not sentence.rstrip().endswith(_SENTENCE_END):
        sentence = sentence.rstrip() + "."
    return sentence


def filter_person_privacy(triple: Triple) -> bool:
    """Keep non-persons and persons notable enough for an encyclopedia page."""
    return (not triple.subject_is_person) or triple.subject_has_encyclopedia_page


def filter_trivial(triple: Triple, blocklist: set[str]) -> bool:
    return triple.predicate_id not in blocklist


def generate_sentences(
    triples: Iterable[Triple], templates: TemplateSet, blocklist: set[str]
) -> Iterator[str]:
    """privacy filter, then triviality filter, then verbalization."""
    for triple in triples:
        if not filter_person_privacy(triple):
            continue
        if not filter_trivial(triple, blocklist):
            continue
        sentence = verbalize(triple, templates)
        if sentence is not None:
            yield sentence


# ---------------------------------------------------------------------------
# Transcript cleaning

_MARKER_RE = re.compile(r"\[[a-z]+\]")
_TIMESTAMP_RE = re.compile(r"^(?:\d{1,2}:)?\d{1,2}:\d{2}\s*", re.MULTILINE)
_MULTISPACE_RE = re.compile(r" {2,}")


def clean_transcript(text: str) -> str:
    """Drop bracketed lowercase markers and line-leading timestamps.

    Idempotent; surrounding spacing is repaired after removal.
    """
    text = _TIMESTAMP_RE.sub("", text)
    text = _MARKER_RE.sub("", text)
    text = _MULTISPACE_RE.sub(" ", text)
    lines = [line.strip() for line in text.split("\n")]
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# Pluggable rewriting interfaces (shipped as no-ops)


@dataclass(frozen=True)
class RewriteResult:
    text: str
    provenance: str


class Rewriter(Protocol):
    def rewrite(self, text: str) -> RewriteResult: ...


class NoopParaphraser:
    """Identity stand-in for a model-backed paraphraser."""

    provenance = "paraphrase:noop"

    def rewrite(self, text: str) -> RewriteResult:
        return RewriteResult(text=text, provenance=self.provenance)


class NoopTranslator:
    """Identity stand-in for a machine-translation backend."""

    def __init__(self, source: str = "eng", target: str = "nld"):
        self.provenance = f"translate:noop:{source}->{target}"

    def rewrite(self, text: str) -> RewriteResult:
        return RewriteResult(text=text, provenance=self.provenance)
