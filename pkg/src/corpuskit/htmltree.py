"""Error-tolerant HTML parsing into a small DOM with head/body regions.

The builder never raises on malformed markup: stray end tags are dropped,
unclosed elements auto-close where HTML implies it (``<p>a<p>b`` becomes two
sibling paragraphs), and missing head/body regions are synthesized so every
tree has exactly one of each.
"""

from __future__ import annotations

import codecs
import re
from html.parser import HTMLParser
from typing import Iterator, Optional

VOID_ELEMENTS = frozenset(
    "area base br col embed hr img input link meta param source track wbr".split()
)

# Opening any of these implicitly closes an open <p>.
_BLOCK_CLOSES_P = frozenset(
    "address article aside blockquote details div dl fieldset figcaption figure "
    "footer form h1 h2 h3 h4 h5 h6 header hr main menu nav ol p pre section table ul".split()
)

# tag -> open tags it implicitly closes when it appears as a sibling
_IMPLIED_END = {
    "li": frozenset({"li"}),
    "dt": frozenset({"dt", "dd"}),
    "dd": frozenset({"dt", "dd"}),
    "tr": frozenset({"tr", "td", "th"}),
    "td": frozenset({"td", "th"}),
    "th": frozenset({"td", "th"}),
    "option": frozenset({"option"}),
}

_HEAD_CONTENT = frozenset("title meta link style script base noscript template".split())

BLOCK_ELEMENTS = frozenset(
    "address article aside blockquote dd div dl dt fieldset figcaption figure footer "
    "form h1 h2 h3 h4 h5 h6 header hr li main nav ol p pre section table tbody td tfoot "
    "th thead tr ul".split()
)

_NON_VISIBLE = frozenset({"script", "style", "template"})

TEXT_TAG = "#text"


class Node:
    """One tree node: an element (tag, attrs, children) or a text node."""

    __slots__ = ("tag", "attrs", "children", "parent", "text")

    def __init__(self, tag: str, attrs: Optional[dict[str, str]] = None, text: str = ""):
        self.tag = tag
        self.attrs: dict[str, str] = attrs or {}
        self.children: list["Node"] = []
        self.parent: Optional["Node"] = None
        self.text = text

    @property
    def is_text(self) -> bool:
        return self.tag == TEXT_TAG

    def append(self, node: "Node") -> None:
        node.parent = self
        self.children.append(node)

    def attr(self, name: str) -> Optional[str]:
        return self.attrs.get(name)

    def iter(self) -> Iterator["Node"]:
        """Depth-first, self first, document order."""
        stack = [self]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.children))

    def iter_elements(self, tag: Optional[str] = None) -> Iterator["Node"]:
        for node in self.iter():
            if not node.is_text and (tag is None or node.tag == tag):
                yield node

    def ancestors(self) -> Iterator["Node"]:
        node = self.parent
        while node is not None:
            yield node
            node = node.parent

    def own_text(self) -> str:
        """Concatenated text of direct text-node children."""
        return "".join(c.text for c in self.children if c.is_text)

    def visible_text(self) -> str:
        """Whitespace-collapsed text of the subtree, skipping script/style."""
        parts: list[str] = []
        _collect_visible(self, parts)
        return " ".join(" ".join(parts).split())

    def __repr__(self) -> str:  # pragma: no cover - debug aid
        if self.is_text:
            return f"Text({self.text!r})"
        return f"<{self.tag} children={len(self.children)}>"


def _collect_visible(node: Node, out: list[str]) -> None:
    if node.is_text:
        out.append(node.text)
        return
    if node.tag in _NON_VISIBLE:
        return
    for child in node.children:
        _collect_visible(child, out)


class NodeTree:
    """Parsed document with synthesized head and body regions."""

    def __init__(self, root: Node, head: Node, body: Node):
        self.root = root
        self.head = head
        self.body = body

    def iter(self) -> Iterator[Node]:
        return self.root.iter()

    def in_head(self, node: Node) -> bool:
        return node is self.head or any(a is self.head for a in node.ancestors())

    def body_top_level(self) -> list[Node]:
        """Element children of body, in order."""
        return [c for c in self.body.children if not c.is_text]


class _TreeBuilder(HTMLParser):
    def __init__(self) -> None:
        super().__init__(convert_charrefs=True)
        self.root = Node("html")
        self.head = Node("head")
        self.body = Node("body")
        self.root.append(self.head)
        self.root.append(self.body)
        self._stack: list[Node] = []
        self._in_body = False

    def _insert_point(self) -> Node:
        if self._stack:
            return self._stack[-1]
        return self.body if self._in_body else self.head

    def handle_starttag(self, tag, attrs):
        tag = tag.lower()
        if tag == "html":
            self.root.attrs.update({k: v or "" for k, v in attrs})
            return
        if tag == "head":
            return
        if tag == "body":
            self._in_body = True
            self.body.attrs.update({k: v or "" for k, v in attrs})
            return
        closers = _IMPLIED_END.get(tag)
        if closers:
            while self._stack and self._stack[-1].tag in closers:
                self._stack.pop()
        if tag in _BLOCK_CLOSES_P and self._stack and self._stack[-1].tag == "p":
            self._stack.pop()
        if not self._in_body and not self._stack and tag not in _HEAD_CONTENT:
            self._in_body = True
        node = Node(tag, {k.lower(): (v or "") for k, v in attrs})
        self._insert_point().append(node)
        if tag not in VOID_ELEMENTS:
            self._stack.append(node)

    def handle_endtag(self, tag):
        tag = tag.lower()
        if tag in ("html", "head"):
            return
        if tag == "body":
            self._in_body = True
            return
        for i in range(len(self._stack) - 1, -1, -1):
            if self._stack[i].tag == tag:
                del self._stack[i:]
                return
        # stray end tag: ignore

    def handle_data(self, data):
        if not self._stack and not self._in_body:
            if not data.strip():
                return
            self._in_body = True
        parent = self._insert_point()
        if parent.children and parent.children[-1].is_text:
            parent.children[-1].text += data
        else:
            parent.append(Node(TEXT_TAG, text=data))

    def handle_comment(self, data):
        pass


_META_CHARSET_RE = re.compile(
    rb"""<meta[^>]+charset\s*=\s*["']?\s*([A-Za-z0-9_.:-]+)""", re.IGNORECASE
)

_BOMS = (
    (codecs.BOM_UTF8, "utf-8-sig"),
    (codecs.BOM_UTF32_LE, "utf-32-le"),
    (codecs.BOM_UTF32_BE, "utf-32-be"),
    (codecs.BOM_UTF16_LE, "utf-16-le"),
    (codecs.BOM_UTF16_BE, "utf-16-be"),
)


def _valid_codec(name: Optional[str]) -> Optional[str]:
    if not name:
        return None
    try:
        codecs.lookup(name)
        return name
    except LookupError:
        return None


def decode_payload(payload: bytes, charset_hint: Optional[str] = None) -> str:
    """Decode bytes: BOM, then hint, then sniffed meta charset, then UTF-8.

    Undecodable bytes are replaced, never raised.
    """
    for bom, codec in _BOMS:
        if payload.startswith(bom):
            return payload.decode(codec, errors="replace")
    codec = _valid_codec(charset_hint)
    if codec is None:
        match = _META_CHARSET_RE.search(payload[:2048])
        if match:
            codec = _valid_codec(match.group(1).decode("ascii", errors="replace"))
    return payload.decode(codec or "utf-8", errors="replace")


def parse_markup(payload: bytes | str, charset_hint: Optional[str] = None) -> NodeTree:
    """Parse (possibly malformed) HTML bytes into a NodeTree. Never raises."""
    text = payload if isinstance(payload, str) else decode_payload(payload, charset_hint)
    builder = _TreeBuilder()
    try:
        builder.feed(text)
        builder.close()
    except Exception:  # defensive: keep whatever was built
        pass
    return NodeTree(builder.root, builder.head, builder.body)


def extract_text(tree: NodeTree) -> str:
    """Visible text of the body: block boundaries become newlines,
    whitespace runs collapse within lines, script/style content is dropped."""
    parts: list[str] = []

    def walk(node: Node) -> None:
        if node.is_text:
            parts.append(node.text)
            return
        if node.tag in _NON_VISIBLE:
            return
        is_block = node.tag in BLOCK_ELEMENTS
        if is_block or node.tag == "br":
            parts.append("\n")
        for child in node.children:
            walk(child)
        if is_block:
            parts.append("\n")

    for child in tree.body.children:
        walk(child)
    lines = "".join(parts).split("\n")
    collapsed = [" ".join(line.split()) for line in lines]
    return "\n".join(line for line in collapsed if line)
