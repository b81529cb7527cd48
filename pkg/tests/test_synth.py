from __future__ import annotations

import random

import pytest

from corpuskit.errors import ConfigurationError
from corpuskit.synth import (
    NoopParaphraser,
    NoopTranslator,
    Template,
    TemplateSet,
    Triple,
    bundled_blocklist,
    bundled_templates,
    clean_transcript,
    filter_person_privacy,
    filter_trivial,
    generate_sentences,
    load_triples,
    verbalize,
)


def _templates() -> TemplateSet:
    return TemplateSet(
        [
            Template("noble-title", "nld", "{s} heeft de titel {o}."),
            Template("birthplace", "nld", "{s} is geboren in {o}."),
        ]
    )


def test_noble_title_sentence():
    triple = Triple("Willem-Alexander", "noble-title", "Prins van Oranje")
    assert verbalize(triple, _templates()) == "Willem-Alexander heeft de titel Prins van Oranje."


def test_missing_template_absent():
    triple = Triple("A", "unknown-predicate", "B")
    assert verbalize(triple, _templates()) is None


def test_labels_verbatim_in_output():
    rng = random.Random(14)
    templates = _templates()
    predicates = ["noble-title", "birthplace"]
    for i in range(1000):
        subject = f"Subj{rng.randint(0, 999)}"
        obj = f"Obj{rng.randint(0, 999)} {rng.randint(0, 9)}"
        triple = Triple(subject, rng.choice(predicates), obj)
        sentence = verbalize(triple, templates)
        assert subject in sentence
        assert obj in sentence


def test_sentence_final_punctuation_enforced():
    templates = TemplateSet([Template("p", "nld", "{s} hoort bij {o}")])
    assert verbalize(Triple("A", "p", "B"), templates) == "A hoort bij B."


def test_malformed_template_rejected_at_load():
    with pytest.raises(ConfigurationError):
        Template("p", "nld", "{s} zonder object")
    with pytest.raises(ConfigurationError):
        Template("p", "nld", "{s} en {o} en nog eens {o}")


def test_template_set_from_mapping_language_selection():
    mapping = {"p": {"nld": "{s} bij {o}.", "eng": "{s} at {o}."}, "q": {"eng": "{s} of {o}."}}
    nld = TemplateSet.from_mapping(mapping, "nld")
    assert len(nld) == 1
    eng = TemplateSet.from_mapping(mapping, "eng")
    assert len(eng) == 2


def test_person_privacy_filter():
    assert filter_person_privacy(Triple("X", "p", "Y", subject_is_person=True,
                                        subject_has_encyclopedia_page=False)) is False
    assert filter_person_privacy(Triple("X", "p", "Y", subject_is_person=True,
                                        subject_has_encyclopedia_page=True)) is True
    assert filter_person_privacy(Triple("X", "p", "Y", subject_is_person=False)) is True


def test_trivial_filter():
    assert filter_trivial(Triple("X", "image", "Y"), {"image"}) is False
    assert filter_trivial(Triple("X", "image", "Y"), set()) is True


def test_bundled_blocklist_drops_identifier_predicates():
    blocklist = bundled_blocklist()
    rng = random.Random(30)
    # hand-labeled fixture: half identifier-ish, half factual
    trivial_predicates = ["external-id", "image", "commons-category", "viaf-id", "logo-image"]
    factual_predicates = ["noble-title", "birthplace", "capital-of", "occupation", "located-in"]
    fixture = []
    labels = []
    for i in range(50):
        if i % 2 == 0:
            fixture.append(Triple(f"S{i}", rng.choice(trivial_predicates), f"O{i}"))
            labels.append(False)
        else:
            fixture.append(Triple(f"S{i}", rng.choice(factual_predicates), f"O{i}"))
            labels.append(True)
    for triple, keep in zip(fixture, labels):
        assert filter_trivial(triple, blocklist) is keep


def test_pipeline_order_and_count():
    templates = _templates()
    blocklist = {"blocked"}
    triples = [
        Triple("A", "noble-title", "B"),  # kept
        Triple("P", "noble-title", "Q", subject_is_person=True),  # privacy-dropped
        Triple("C", "blocked", "D"),  # trivial-dropped
        Triple("E", "unknown", "F"),  # no template
        Triple("G", "birthplace", "H", subject_is_person=True,
               subject_has_encyclopedia_page=True),  # kept
    ]
    sentences = list(generate_sentences(triples, templates, blocklist))
    assert sentences == ["A heeft de titel B.", "G is geboren in H."]


def test_verbalize_deterministic_and_injective():
    templates = _templates()
    outputs = set()
    for i in range(100):
        triple = Triple(f"S{i}", "noble-title", f"O{i}")
        a = verbalize(triple, templates)
        b = verbalize(triple, templates)
        assert a == b
        outputs.add(a)
    assert len(outputs) == 100


def test_load_triples_tsv(tmp_path):
    path = tmp_path / "triples.tsv"
    path.write_text(
        "# comment\nWillem-Alexander\tnoble-title\tPrins van Oranje\t1\t1\nAmsterdam\tcapital-of\tNederland\t0\t0\n",
        encoding="utf-8",
    )
    triples = load_triples(path)
    assert len(triples) == 2
    assert triples[0].subject_is_person is True
    assert triples[1].subject_is_person is False


def test_load_triples_rejects_bad_rows(tmp_path):
    path = tmp_path / "bad.tsv"
    path.write_text("too\tfew\tfields\n", encoding="utf-8")
    with pytest.raises(ConfigurationError):
        load_triples(path)
    path.write_text("\tp\to\t0\t0\n", encoding="utf-8")
    with pytest.raises(ConfigurationError):
        load_triples(path)


def test_bundled_templates_include_noble_title():
    templates = bundled_templates("nld")
    triple = Triple("Willem-Alexander", "noble-title", "Prins van Oranje")
    assert verbalize(triple, templates) == "Willem-Alexander heeft de titel Prins van Oranje."


# -- clean_transcript ---------------------------------------------------------


def test_marker_removed():
    assert clean_transcript("hi [laughter] there") == "hi there"


def test_text_without_markers_unchanged():
    text = "gewone zin zonder markeringen"
    assert clean_transcript(text) == text


def test_uppercase_and_multiword_markers_kept():
    assert clean_transcript("zie [Laughter] hier") == "zie [Laughter] hier"
    assert clean_transcript("zie [sound effect] hier") == "zie [sound effect] hier"


def test_timestamps_removed_line_start():
    fixture = [
        ("00:12 hello", "hello"),
        ("1:23:45 verhaal begint", "verhaal begint"),
        ("midden 00:12 blijft", "midden 00:12 blijft"),
        ("00:12 [music] intro", "intro"),
        ("0:05 ok\n12:30 verder", "ok\nverder"),
    ]
    for raw, expected in fixture:
        assert clean_transcript(raw) == expected


def test_clean_transcript_idempotent():
    samples = [
        "hi [laughter] there",
        "00:12 hello",
        "[music] start\n01:02 [applause] midden [ruis] einde",
        "niets bijzonders",
    ]
    for text in samples:
        once = clean_transcript(text)
        assert clean_transcript(once) == once


def test_rewriters_are_identity_with_provenance():
    paraphraser = NoopParaphraser()
    result = paraphraser.rewrite("tekst")
    assert result.text == "tekst"
    assert "noop" in result.provenance
    translator = NoopTranslator(source="spa", target="nld")
    result = translator.rewrite("texto")
    assert result.text == "texto"
    assert "spa" in result.provenance and "nld" in result.provenance
