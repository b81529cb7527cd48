"""Registrable-domain computation against a bundled public-suffix snapshot.

Domain grouping (license verification, ledgers) keys on the registrable
domain: the public suffix plus one label. Rules come from a trimmed,
versioned snapshot shipped with the package; hosts under suffixes missing
from the snapshot fall back to the standard implicit ``*`` rule.
"""

from __future__ import annotations

import ipaddress
from functools import lru_cache
from importlib import resources
from urllib.parse import urlsplit


class SuffixRules:
    """Parsed public-suffix rule set (plain, wildcard, and exception rules)."""

    def __init__(self, rules: list[str], version: str = ""):
        self.version = version
        self.exact: set[str] = set()
        self.wildcard: set[str] = set()
        self.exception: set[str] = set()
        for rule in rules:
            if rule.startswith("!"):
                self.exception.add(rule[1:])
            elif rule.startswith("*."):
                self.wildcard.add(rule[2:])
            else:
                self.exact.add(rule)

    @classmethod
    def from_text(cls, text: str) -> "SuffixRules":
        version = ""
        rules = []
        for line in text.splitlines():
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                if "snapshot-version:" in line:
                    version = line.split("snapshot-version:", 1)[1].strip()
                continue
            rules.append(line.lower())
        return cls(rules, version)

    def public_suffix_length(self, labels: list[str]) -> int:
        """Number of labels in the prevailing public suffix of the host."""
        best = 1  # implicit "*" rule
        for i in range(len(labels)):
            candidate = ".".join(labels[i:])
            size = len(labels) - i
            if candidate in self.exception:
                # Exception rule wins immediately; suffix is one label shorter.
                return size - 1
            if candidate in self.exact and size > best:
                best = size
            if size >= 2 and ".".join(labels[i + 1 :]) in self.wildcard:
                if size > best:
                    best = size
        return best


@lru_cache(maxsize=1)
def bundled_rules() -> SuffixRules:
    text = resources.files("corpuskit.data").joinpath("public_suffix_snapshot.dat").read_text("utf-8")
    return SuffixRules.from_text(text)


def _is_ip_literal(host: str) -> bool:
    try:
        ipaddress.ip_address(host.strip("[]"))
        return True
    except ValueError:
        return False


def registrable_domain(host_or_url: str, rules: SuffixRules | None = None) -> str:
    """Registrable domain (public suffix + 1) of a host or absolute URL.

    IP literals and single-label hosts are returned unchanged; a host that
    is itself a public suffix is also returned unchanged.
    """
    rules = rules or bundled_rules()
    host = host_or_url
    if "://" in host_or_url or host_or_url.startswith("//"):
        host = urlsplit(host_or_url).hostname or ""
    host = host.strip().rstrip(".").lower()
    if not host or _is_ip_literal(host):
        return host
    labels = host.split(".")
    if len(labels) < 2:
        return host
    suffix_len = rules.public_suffix_length(labels)
    if suffix_len >= len(labels):
        return host
    return ".".join(labels[-(suffix_len + 1) :])
