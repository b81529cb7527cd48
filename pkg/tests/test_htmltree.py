from __future__ import annotations

from hypothesis import given, settings
from hypothesis import strategies as st

from corpuskit.htmltree import decode_payload, extract_text, parse_markup


def test_wellformed_body_text():
    tree = parse_markup(b"<html><head></head><body>x</body></html>")
    texts = [n.text for n in tree.body.iter() if n.is_text]
    assert texts == ["x"]


def test_unclosed_paragraphs_become_siblings():
    tree = parse_markup(b"<p>a<p>b")
    tags = [c.tag for c in tree.body.children if not c.is_text]
    assert tags == ["p", "p"]


def test_empty_payload_yields_empty_regions():
    tree = parse_markup(b"")
    assert tree.head.children == []
    assert tree.body.children == []


def test_head_and_body_synthesized():
    tree = parse_markup(b"<meta charset=utf-8><title>t</title><div>content</div>")
    head_tags = [c.tag for c in tree.head.children if not c.is_text]
    assert head_tags == ["meta", "title"]
    body_tags = [c.tag for c in tree.body.children if not c.is_text]
    assert body_tags == ["div"]


def test_stray_end_tags_ignored():
    tree = parse_markup(b"<body></div><p>ok</p></span></body>")
    assert extract_text(tree) == "ok"


def test_malformed_never_raises():
    samples = [
        b"<<<>>>",
        b"<a href='unterminated",
        b"<p><b>bold<i>both</p>after",
        b"\xff\xfe\x00garbage\x9c",
        b"<script>if (a<b) { x; }</script><p>t</p>",
    ]
    for payload in samples:
        parse_markup(payload)


def test_charset_bom_wins():
    payload = "﻿<p>café</p>".encode("utf-8")
    tree = parse_markup(payload, charset_hint="latin-1")
    assert "café" in extract_text(tree)


def test_charset_hint_applies():
    payload = "<p>café</p>".encode("latin-1")
    tree = parse_markup(payload, charset_hint="latin-1")
    assert "café" in extract_text(tree)


def test_charset_meta_sniffed():
    payload = '<meta charset="latin-1"><p>café</p>'.encode("latin-1")
    tree = parse_markup(payload)
    assert "café" in extract_text(tree)


def test_decode_falls_back_to_utf8_with_replacement():
    assert "a" in decode_payload(b"a\xff\xfeb")


def test_extract_text_blocks_and_scripts():
    tree = parse_markup(b"<p>hello</p><p>world</p>")
    assert extract_text(tree) == "hello\nworld"
    tree = parse_markup(b"<script>x=1</script><p>a</p>")
    assert extract_text(tree) == "a"
    tree = parse_markup(b"<style>p{}</style><div>b</div>")
    assert extract_text(tree) == "b"


def test_extract_text_collapses_whitespace_within_lines():
    tree = parse_markup(b"<p>a   b\t c</p>")
    assert extract_text(tree) == "a b c"


def test_extract_text_inline_elements_stay_on_line():
    tree = parse_markup(b"<p>one <b>two</b> three</p>")
    assert extract_text(tree) == "one two three"


def test_nested_list_runs_in_document_order():
    html = (
        b"<ul><li>one</li><li>two<ul><li>three</li><li>four</li></ul></li></ul>"
        b"<ol><li>five</li><li>six</li></ol>"
        b"<ul><li>seven<ul><li>eight</li></ul></li><li>nine</li></ul>"
        b"<div>ten</div><p>eleven</p><p>twelve</p>"
    )
    runs = extract_text(parse_markup(html)).split("\n")
    assert runs == [
        "one", "two", "three", "four", "five", "six",
        "seven", "eight", "nine", "ten", "eleven", "twelve",
    ]


def test_extract_text_idempotent_through_reparse():
    html = b"<div>first   block</div><p>second</p>plain  tail"
    once = extract_text(parse_markup(html))
    twice = extract_text(parse_markup(once.encode("utf-8")))
    assert once == twice


@settings(max_examples=60, deadline=None)
@given(st.text(max_size=300))
def test_plain_text_roundtrip_idempotent(text):
    once = extract_text(parse_markup(text.encode("utf-8")))
    twice = extract_text(parse_markup(once.encode("utf-8")))
    assert once == twice


def test_parent_child_links_consistent():
    tree = parse_markup(b"<div><p>a</p><p>b<span>c</span></p></div>")
    for node in tree.root.iter():
        for child in node.children:
            assert child.parent is node


def test_raw_text_content_preserved_in_script_node():
    tree = parse_markup(b'<script type="application/ld+json">{"license": "x"}</script><p>y</p>')
    scripts = list(tree.root.iter_elements("script"))
    assert len(scripts) == 1
    assert '"license"' in scripts[0].own_text()
