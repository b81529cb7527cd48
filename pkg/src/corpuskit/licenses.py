"""Structural Creative Commons license extraction from parsed markup.

Candidates come only from qualifying nodes (meta tags, JSON-LD blocks,
rel=license links, creativecommons.org anchors) — prose that merely talks
about a license never produces a candidate. Candidates carry where they
were found (head / footer / body), a parsed license when the target URL
follows the canonical grammar, and a confidence rank; a document-level
resolution records the best license and whether distinct families conflict.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional
from urllib.parse import urljoin, urlsplit

from .htmltree import Node, NodeTree


class CCFamily(str, Enum):
    ZERO = "zero"
    MARK = "mark"
    BY = "by"
    BY_SA = "by_sa"
    BY_NC = "by_nc"
    BY_ND = "by_nd"
    BY_NC_SA = "by_nc_sa"
    BY_NC_ND = "by_nc_nd"


PERMISSIVE_FAMILIES = frozenset({CCFamily.ZERO, CCFamily.MARK, CCFamily.BY})

_URL_FAMILY_TOKENS = {
    "by": CCFamily.BY,
    "by-sa": CCFamily.BY_SA,
    "by-nc": CCFamily.BY_NC,
    "by-nd": CCFamily.BY_ND,
    "by-nc-sa": CCFamily.BY_NC_SA,
    "by-nc-nd": CCFamily.BY_NC_ND,
}
_FAMILY_URL_TOKENS = {v: k for k, v in _URL_FAMILY_TOKENS.items()}


class SourceKind(str, Enum):
    META_TAG = "meta_tag"
    JSON_LD = "json_ld"
    LINK_REL = "link_rel"
    ANCHOR_HREF = "anchor_href"


class Location(str, Enum):
    HEAD = "head"
    FOOTER = "footer"
    BODY = "body"


# confidence order: lower sorts first
_KIND_PRIORITY = {
    SourceKind.META_TAG: 0,
    SourceKind.JSON_LD: 1,
    SourceKind.LINK_REL: 2,
    SourceKind.ANCHOR_HREF: 3,
}
_LOCATION_PRIORITY = {Location.HEAD: 0, Location.FOOTER: 1, Location.BODY: 2}

# Last K top-level body children count as footer when no explicit marker exists.
FOOTER_TAIL_CHILDREN = 3

_SNIPPET_CHARS = 200

_CC_HOSTS = frozenset({"creativecommons.org", "www.creativecommons.org"})
_VERSION_RE = re.compile(r"^\d+\.\d+$")
_JURISDICTION_RE = re.compile(r"^[a-z]{2,3}$")
_DEED_RE = re.compile(r"^deed(\.[A-Za-z_-]+)?$")
_META_NAMES = frozenset({"license", "dcterms.license", "dc.rights"})
_TOKEN_SPLIT_RE = re.compile(r"[^a-z0-9]+")


@dataclass(frozen=True)
class CCLicense:
    family: CCFamily
    version: Optional[str] = None
    jurisdiction: Optional[str] = None

    def to_dict(self) -> dict:
        return {"family": self.family.value, "version": self.version, "jurisdiction": self.jurisdiction}

    @classmethod
    def from_dict(cls, data: dict) -> "CCLicense":
        return cls(CCFamily(data["family"]), data.get("version"), data.get("jurisdiction"))


def permissive(license: CCLicense) -> bool:
    return license.family in PERMISSIVE_FAMILIES


def parse_cc_url(url: str) -> Optional[CCLicense]:
    """Parse a creativecommons.org URL into a license, or None.

    Recognizes /licenses/<family>/<version>/[<jurisdiction>/] and the
    public-domain zero/mark 1.0 paths; a trailing deed.<lang> segment is
    ignored. http, https and scheme-relative forms are equivalent.
    Anything else (wrong host, certification paths, malformed versions)
    yields None, never an exception.
    """
    if not url:
        return None
    candidate = url.strip()
    if candidate.startswith("//"):
        candidate = "https:" + candidate
    try:
        parts = urlsplit(candidate)
    except ValueError:
        return None
    if parts.scheme not in ("http", "https"):
        return None
    host = (parts.hostname or "").lower()
    if host not in _CC_HOSTS:
        return None
    segments = [s for s in parts.path.split("/") if s]
    if segments and _DEED_RE.match(segments[-1]):
        segments = segments[:-1]
    if len(segments) >= 3 and segments[0] == "licenses":
        family = _URL_FAMILY_TOKENS.get(segments[1].lower())
        version = segments[2]
        if family is None or not _VERSION_RE.match(version):
            return None
        if len(segments) == 3:
            return CCLicense(family, version)
        if len(segments) == 4 and _JURISDICTION_RE.match(segments[3].lower()):
            return CCLicense(family, version, segments[3].lower())
        return None
    if len(segments) == 3 and segments[0] == "publicdomain" and segments[2] == "1.0":
        if segments[1] == "zero":
            return CCLicense(CCFamily.ZERO, "1.0")
        if segments[1] == "mark":
            return CCLicense(CCFamily.MARK, "1.0")
    return None


def canonical_cc_url(license: CCLicense) -> str:
    """Canonical creativecommons.org URL for a license (parse_cc_url inverse)."""
    if license.family is CCFamily.ZERO:
        return "https://creativecommons.org/publicdomain/zero/1.0/"
    if license.family is CCFamily.MARK:
        return "https://creativecommons.org/publicdomain/mark/1.0/"
    token = _FAMILY_URL_TOKENS[license.family]
    url = f"https://creativecommons.org/licenses/{token}/{license.version}/"
    if license.jurisdiction:
        url += f"{license.jurisdiction}/"
    return url


@dataclass
class LicenseCandidate:
    source_kind: SourceKind
    location: Location
    target_url: str
    parsed: Optional[CCLicense]
    context_snippet: str
    doc_order: int
    rank: Optional[int] = None

    def to_dict(self) -> dict:
        return {
            "source_kind": self.source_kind.value,
            "location": self.location.value,
            "target_url": self.target_url,
            "parsed": self.parsed.to_dict() if self.parsed else None,
            "context_snippet": self.context_snippet,
            "rank": self.rank,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "LicenseCandidate":
        return cls(
            source_kind=SourceKind(data["source_kind"]),
            location=Location(data["location"]),
            target_url=data["target_url"],
            parsed=CCLicense.from_dict(data["parsed"]) if data.get("parsed") else None,
            context_snippet=data.get("context_snippet", ""),
            doc_order=data.get("doc_order", 0),
            rank=data.get("rank"),
        )


@dataclass
class LicenseAnnotation:
    candidates: list[LicenseCandidate] = field(default_factory=list)
    best: Optional[CCLicense] = None
    best_location: Optional[Location] = None
    conflict: bool = False

    def to_dict(self) -> dict:
        return {
            "best": self.best.to_dict() if self.best else None,
            "best_location": self.best_location.value if self.best_location else None,
            "conflict": self.conflict,
            "candidates": [c.to_dict() for c in self.candidates],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "LicenseAnnotation":
        return cls(
            candidates=[LicenseCandidate.from_dict(c) for c in data.get("candidates", [])],
            best=CCLicense.from_dict(data["best"]) if data.get("best") else None,
            best_location=Location(data["best_location"]) if data.get("best_location") else None,
            conflict=bool(data.get("conflict", False)),
        )


def _attr_has_token(node: Node, attr: str, token: str) -> bool:
    value = node.attr(attr)
    if not value:
        return False
    return token in _TOKEN_SPLIT_RE.split(value.lower())


def classify_location(node: Node, tree: NodeTree) -> Location:
    """head / footer / body placement of a node within the tree."""
    if tree.in_head(node):
        return Location.HEAD
    chain = [node, *node.ancestors()]
    for element in chain:
        if element.is_text:
            continue
        if element.tag == "footer":
            return Location.FOOTER
        if _attr_has_token(element, "id", "footer") or _attr_has_token(element, "class", "footer"):
            return Location.FOOTER
    top_level = tree.body_top_level()
    for element in chain:
        if element.parent is tree.body and not element.is_text:
            index = top_level.index(element)
            if index >= len(top_level) - FOOTER_TAIL_CHILDREN:
                return Location.FOOTER
            break
    return Location.BODY


def _is_http_url(url: str) -> bool:
    try:
        parts = urlsplit(url)
    except ValueError:
        return False
    return parts.scheme in ("http", "https") and bool(parts.netloc)


def _resolve(url: str, base_url: Optional[str]) -> str:
    url = url.strip()
    if url.startswith("//"):
        return "https:" + url
    if base_url and not _is_http_url(url):
        try:
            return urljoin(base_url, url)
        except ValueError:
            return url
    return url


def _serialize_tag(node: Node) -> str:
    attrs = " ".join(f'{k}="{v}"' for k, v in node.attrs.items())
    return f"<{node.tag} {attrs}>" if attrs else f"<{node.tag}>"


def _snippet_for(node: Node) -> str:
    if node.tag in ("meta", "link"):
        text = _serialize_tag(node)
    elif node.tag == "script":
        text = " ".join(node.own_text().split())
    else:
        context = node.parent if node.parent is not None else node
        text = context.visible_text() or node.visible_text() or _serialize_tag(node)
    return text[:_SNIPPET_CHARS]


def _jsonld_license_urls(raw: str) -> list[str]:
    """Shallow scan: top-level or @graph-member `license` string values."""
    try:
        data = json.loads(raw)
    except (json.JSONDecodeError, ValueError):
        return []
    found: list[str] = []

    def scan(obj) -> None:
        if isinstance(obj, dict):
            value = obj.get("license")
            if isinstance(value, str):
                found.append(value)

    if isinstance(data, dict):
        scan(data)
        graph = data.get("@graph")
        if isinstance(graph, list):
            for member in graph:
                scan(member)
    elif isinstance(data, list):
        for member in data:
            scan(member)
    return found


def _anchor_is_cc(url: str) -> bool:
    try:
        parts = urlsplit(url)
    except ValueError:
        return False
    if (parts.hostname or "").lower() not in _CC_HOSTS:
        return False
    first = next((s for s in parts.path.split("/") if s), "")
    return first in ("licenses", "publicdomain", "certification")


def find_candidates(tree: NodeTree, base_url: Optional[str] = None) -> list[LicenseCandidate]:
    """Locate unranked license candidates from qualifying nodes only.

    Relative targets are resolved against base_url so candidates are
    comparable across documents.
    """
    candidates: list[LicenseCandidate] = []
    order = 0

    def add(node: Node, kind: SourceKind, target: str) -> None:
        nonlocal order
        resolved = _resolve(target, base_url)
        candidates.append(
            LicenseCandidate(
                source_kind=kind,
                location=classify_location(node, tree),
                target_url=resolved,
                parsed=parse_cc_url(resolved),
                context_snippet=_snippet_for(node),
                doc_order=order,
            )
        )
        order += 1

    for node in tree.root.iter():
        if node.is_text:
            continue
        if node.tag == "meta":
            name = (node.attr("name") or node.attr("property") or "").strip().lower()
            content = (node.attr("content") or "").strip()
            if name in _META_NAMES and content:
                resolved = _resolve(content, base_url)
                if _is_http_url(resolved):
                    add(node, SourceKind.META_TAG, content)
        elif node.tag == "script":
            if (node.attr("type") or "").strip().lower() == "application/ld+json":
                for url in _jsonld_license_urls(node.own_text()):
                    if _is_http_url(_resolve(url, base_url)):
                        add(node, SourceKind.JSON_LD, url)
        elif node.tag == "link":
            rel = (node.attr("rel") or "").lower().split()
            href = (node.attr("href") or "").strip()
            if "license" in rel and href:
                add(node, SourceKind.LINK_REL, href)
        elif node.tag == "a":
            href = (node.attr("href") or "").strip()
            if href and _anchor_is_cc(_resolve(href, base_url)):
                add(node, SourceKind.ANCHOR_HREF, href)
    return candidates


def rank_candidates(candidates: list[LicenseCandidate]) -> list[LicenseCandidate]:
    """Total confidence order: source kind, then location, then document order."""
    ordered = sorted(
        candidates,
        key=lambda c: (_KIND_PRIORITY[c.source_kind], _LOCATION_PRIORITY[c.location], c.doc_order),
    )
    for i, candidate in enumerate(ordered, start=1):
        candidate.rank = i
    return ordered


def resolve(candidates: list[LicenseCandidate]) -> LicenseAnnotation:
    """Pick the best parsed license and flag conflicts between families."""
    best: Optional[CCLicense] = None
    best_location: Optional[Location] = None
    for candidate in candidates:
        if candidate.parsed is not None:
            best = candidate.parsed
            best_location = candidate.location
            break
    families = {c.parsed.family for c in candidates if c.parsed is not None}
    return LicenseAnnotation(
        candidates=list(candidates),
        best=best,
        best_location=best_location,
        conflict=len(families) >= 2,
    )


def annotate(tree: NodeTree, base_url: Optional[str] = None) -> LicenseAnnotation:
    """find -> rank -> resolve in one call."""
    return resolve(rank_candidates(find_candidates(tree, base_url)))
