"""Command-line interface: one executable, one group per pipeline stage."""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import curate as curatemod
from . import ingest as ingestmod
from . import langid as langidmod
from . import policy as policymod
from . import postprocess as postmod
from . import synth as synthmod
from .documents import Document, Stage, read_documents, write_documents
from .registry import CollectionRecord, LicenseBasis, RegistryStore, RiskLevel


@click.group()
def main() -> None:
    """Permissive-web-corpus curation pipeline."""


# ---------------------------------------------------------------------------
# ingest


@main.group()
def ingest() -> None:
    """Read archives into scored document shells."""


@ingest.command("run")
@click.argument("inputs", nargs=-1, required=True, type=click.Path(exists=True, path_type=Path))
@click.option("--format", "fmt", type=click.Choice(["warc", "jsonl"]), required=True)
@click.option("--collection", required=True, help="Collection id for emitted documents.")
@click.option("--out", type=click.Path(path_type=Path), required=True)
@click.option("--summary", type=click.Path(path_type=Path), default=None,
              help="Also write the run summary JSON here.")
@click.option("--retain", "retained", multiple=True,
              help="Language codes to keep (default: the eight web languages).")
@click.option("--crawl-id", default="", help="Provenance label for the crawl.")
def ingest_run(inputs, fmt, collection, out, summary, retained, crawl_id):
    """Parse, license-annotate, extract, normalize, and language-score."""
    stats = ingestmod.IngestStats()
    retained_set = set(retained) or None

    def documents():
        for path in inputs:
            with open(path, "rb") as stream:
                records = ingestmod.read_archive(stream, fmt, stats=stats, crawl_id=crawl_id)
                yield from ingestmod.ingest_records(
                    records, collection, retained=retained_set, stats=stats
                )

    write_documents(documents(), out)
    payload = stats.to_dict()
    if summary:
        summary.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    click.echo(json.dumps(payload, indent=2))


# ---------------------------------------------------------------------------
# curate


@main.group()
def curate() -> None:
    """Normalization, quality scoring, thresholds, samples, buckets."""


@curate.command("score")
@click.option("--in", "in_path", type=click.Path(exists=True, path_type=Path), required=True)
@click.option("--out", type=click.Path(path_type=Path), required=True)
def curate_score(in_path, out):
    """Normalize text and attach language and quality scores."""
    index = langidmod.bundled_index()

    def scored():
        for doc in read_documents(in_path):
            doc.update_text(curatemod.normalize(doc.text))
            if doc.language_scores is None:
                doc.language_scores = index.score(doc.text)
            doc.quality_scores = curatemod.score_quality(doc.text, doc.language_scores.top)
            doc.advance_stage(Stage.SCORED)
            yield doc

    count = write_documents(scored(), out)
    click.echo(json.dumps({"scored": count}))


@curate.command("apply")
@click.option("--config", "config_path", type=click.Path(exists=True, path_type=Path), required=True)
@click.option("--in", "in_path", type=click.Path(exists=True, path_type=Path), required=True)
@click.option("--out", type=click.Path(path_type=Path), required=True)
@click.option("--rejected", type=click.Path(path_type=Path), default=None)
def curate_apply(config_path, in_path, out, rejected):
    """Apply threshold bounds; prints kept/dropped counts."""
    cfg = curatemod.ThresholdConfig.load(config_path)
    kept_docs: list[Document] = []
    dropped_docs: list[Document] = []
    failures: dict[str, int] = {}
    for doc in read_documents(in_path):
        verdict = curatemod.apply_thresholds(doc, cfg)
        if verdict.kept:
            doc.advance_stage(Stage.FILTERED)
            kept_docs.append(doc)
        else:
            for name in verdict.failed_dimensions:
                failures[name] = failures.get(name, 0) + 1
            dropped_docs.append(doc)
    write_documents(kept_docs, out)
    if rejected:
        write_documents(dropped_docs, rejected)
    click.echo(
        json.dumps(
            {
                "kept": len(kept_docs),
                "dropped": len(dropped_docs),
                "failed_dimensions": dict(sorted(failures.items())),
            }
        )
    )


@curate.command("sample")
@click.option("--in", "in_path", type=click.Path(exists=True, path_type=Path), required=True)
@click.option("--out", type=click.Path(path_type=Path), required=True)
@click.option("--n", type=int, required=True)
@click.option("--seed", type=int, default=0, show_default=True)
def curate_sample(in_path, out, n, seed):
    """Uniform reservoir sample, deterministic per seed."""
    sample = curatemod.sample_representative(read_documents(in_path), n, seed)
    write_documents(sample, out)
    click.echo(json.dumps({"sampled": len(sample), "seed": seed}))


@curate.command("buckets")
@click.option("--in", "in_path", type=click.Path(exists=True, path_type=Path), required=True)
@click.option("--out", type=click.Path(path_type=Path), required=True)
@click.option("--dimension", required=True)
@click.option("--edges", required=True, help="Comma-separated ascending edges, e.g. 0.2,0.5,0.8")
@click.option("--collection", default="", help="Collection id recorded on the report.")
def curate_buckets(in_path, out, dimension, edges, collection):
    """Bucket a sample on one dimension for human inspection."""
    edge_values = [float(e) for e in edges.split(",") if e.strip()]
    sample = list(read_documents(in_path))
    report = curatemod.bucketize(sample, dimension, edge_values, collection_id=collection)
    out.write_text(json.dumps(report.to_dict(), indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
    click.echo(json.dumps({"buckets": len(report.counts), "total": sum(report.counts)}))


# ---------------------------------------------------------------------------
# policy


@main.group()
def policy() -> None:
    """Domain-level permissive-license policy."""


@policy.command("ledger")
@click.option("--in", "in_path", type=click.Path(exists=True, path_type=Path), required=True)
@click.option("--out", type=click.Path(path_type=Path), required=True)
def policy_ledger(in_path, out):
    """Group documents per domain into a ledger file."""
    ledger = policymod.build_ledger(read_documents(in_path))
    policymod.save_ledger(ledger, out)
    click.echo(json.dumps({"domains": len(ledger)}))


@policy.command("queue")
@click.option("--ledger", "ledger_path", type=click.Path(exists=True, path_type=Path), required=True)
@click.option("--min-words", type=int, default=policymod.DEFAULT_MIN_WORDS, show_default=True)
@click.option("--out", type=click.Path(path_type=Path), default=None)
def policy_queue(ledger_path, min_words, out):
    """Build the verification queue; rewrites the ledger with statuses."""
    ledger = policymod.load_ledger(ledger_path)
    queue = policymod.build_verification_queue(ledger, min_words)
    policymod.save_ledger(ledger, ledger_path)
    payload = queue.to_dict()
    if out:
        out.write_text(json.dumps(payload, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
    click.echo(json.dumps({"queued": len(queue.entries), "min_words": min_words}))


@policy.command("apply")
@click.option("--in", "in_path", type=click.Path(exists=True, path_type=Path), required=True)
@click.option("--allowlist", type=click.Path(exists=True, path_type=Path), required=True)
@click.option("--out", type=click.Path(path_type=Path), required=True)
@click.option("--min-words", type=int, default=policymod.DEFAULT_MIN_WORDS, show_default=True)
def policy_apply(in_path, allowlist, out, min_words):
    """Run the composed policy with verdicts from an allowlist file."""
    docs = list(read_documents(in_path))
    ledger = policymod.build_ledger(docs)
    applied = policymod.apply_allowlist_file(ledger, allowlist)
    kept, _ = policymod.run_policy(docs, ledger, min_words)
    write_documents(kept, out)
    click.echo(json.dumps({"kept": len(kept), "dropped": len(docs) - len(kept), "verdicts_applied": applied}))


# ---------------------------------------------------------------------------
# post


@main.group()
def post() -> None:
    """Post-processing: PII scrub, dedup, audit."""


@post.command("scrub")
@click.option("--in", "in_path", type=click.Path(exists=True, path_type=Path), required=True)
@click.option("--out", type=click.Path(path_type=Path), required=True)
@click.option("--report", "report_path", type=click.Path(path_type=Path), default=None)
def post_scrub(in_path, out, report_path):
    """Replace PII with placeholders; write a sidecar report."""
    reports = []
    total = 0

    def scrubbed():
        nonlocal total
        for doc, report in postmod.scrub_documents(read_documents(in_path)):
            reports.append(report.to_dict())
            total += sum(r["count"] for r in report.replacements)
            doc.advance_stage(Stage.POSTPROCESSED)
            yield doc

    count = write_documents(scrubbed(), out)
    if report_path:
        with open(report_path, "w", encoding="utf-8", newline="\n") as handle:
            for report in reports:
                handle.write(json.dumps(report, ensure_ascii=False) + "\n")
    click.echo(json.dumps({"documents": count, "replacements": total}))


@post.command("dedup")
@click.option("--in", "in_path", type=click.Path(exists=True, path_type=Path), required=True)
@click.option("--out", type=click.Path(path_type=Path), required=True)
@click.option("--collection", required=True)
@click.option("--report", "report_path", type=click.Path(path_type=Path), default=None)
@click.option("--jaccard-threshold", type=float, default=postmod.DEFAULT_JACCARD_THRESHOLD,
              show_default=True)
@click.option("--shingle-size", type=int, default=postmod.DEFAULT_SHINGLE_SIZE, show_default=True)
def post_dedup(in_path, out, collection, report_path, jaccard_threshold, shingle_size):
    """Exact + near-duplicate removal within one collection."""
    kept, report = postmod.deduplicate(
        read_documents(in_path),
        collection,
        shingle_size=shingle_size,
        jaccard_threshold=jaccard_threshold,
    )
    for doc in kept:
        doc.advance_stage(Stage.POSTPROCESSED)
    write_documents(kept, out)
    if report_path:
        report_path.write_text(
            json.dumps(report.to_dict(), indent=2, ensure_ascii=False) + "\n", encoding="utf-8"
        )
    click.echo(
        json.dumps(
            {
                "kept": len(kept),
                "exact_duplicates": report.exact_duplicates,
                "near_duplicates": report.near_duplicates,
            }
        )
    )


@post.command("audit")
@click.option("--before", "before_path", type=click.Path(exists=True, path_type=Path), required=True,
              help="Pre-scrub documents JSONL.")
@click.option("--out", type=click.Path(path_type=Path), required=True)
@click.option("--n", type=int, default=100, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
def post_audit(before_path, out, n, seed):
    """Build the human PII-review bundle with reconstructable diffs."""
    bundle = postmod.pii_audit_sample(read_documents(before_path), n=n, seed=seed)
    bundle.save(out)
    click.echo(json.dumps({"entries": len(bundle.entries), "seed": seed}))


# ---------------------------------------------------------------------------
# synth


@main.group()
def synth() -> None:
    """Triple verbalization and transcript cleaning."""


@synth.command("verbalize")
@click.option("--triples", "triples_path", type=click.Path(exists=True, path_type=Path), required=True)
@click.option("--templates", "templates_path", type=click.Path(exists=True, path_type=Path),
              default=None, help="Defaults to the bundled templates.")
@click.option("--blocklist", "blocklist_path", type=click.Path(exists=True, path_type=Path),
              default=None, help="Defaults to the bundled predicate blocklist.")
@click.option("--language", default="nld", show_default=True)
@click.option("--out", type=click.Path(path_type=Path), required=True)
def synth_verbalize(triples_path, templates_path, blocklist_path, language, out):
    """Filter triples and render one sentence per line."""
    triples = synthmod.load_triples(triples_path)
    templates = (
        synthmod.TemplateSet.load(templates_path, language)
        if templates_path
        else synthmod.bundled_templates(language)
    )
    if blocklist_path:
        blocklist = {
            line.strip()
            for line in blocklist_path.read_text(encoding="utf-8").splitlines()
            if line.strip() and not line.startswith("#")
        }
    else:
        blocklist = synthmod.bundled_blocklist()
    sentences = list(synthmod.generate_sentences(triples, templates, blocklist))
    out.write_text("\n".join(sentences) + ("\n" if sentences else ""), encoding="utf-8")
    click.echo(json.dumps({"triples": len(triples), "sentences": len(sentences)}))


@synth.command("clean-transcripts")
@click.option("--in", "in_path", type=click.Path(exists=True, path_type=Path), required=True)
@click.option("--out", type=click.Path(path_type=Path), required=True)
def synth_clean(in_path, out):
    """Strip non-speech markers and timestamps from transcript documents."""
    def cleaned():
        for doc in read_documents(in_path):
            doc.update_text(synthmod.clean_transcript(doc.text))
            yield doc

    count = write_documents(cleaned(), out)
    click.echo(json.dumps({"cleaned": count}))


# ---------------------------------------------------------------------------
# registry


@main.group()
def registry() -> None:
    """Collection metadata, risk records, verdicts, review API."""


@registry.command("add")
@click.option("--state", "state_dir", type=click.Path(path_type=Path), required=True)
@click.option("--id", "collection_id", required=True)
@click.option("--source", required=True, help="Source description.")
@click.option("--license-basis", type=click.Choice([b.value for b in LicenseBasis]), required=True)
@click.option("--words", type=float, default=0.0, help="Total word count.")
@click.option("--languages", default="", help="JSON object of language word counts.")
@click.option("--note", default="")
def registry_add(state_dir, collection_id, source, license_basis, words, languages, note):
    """Register a collection."""
    store = RegistryStore(state_dir)
    record = CollectionRecord(
        collection_id=collection_id,
        source_description=source,
        license_basis=LicenseBasis(license_basis),
        language_breakdown=json.loads(languages) if languages else {},
        word_count=words,
        provenance_notes=note,
    )
    store.register_collection(record)
    click.echo(json.dumps(record.to_dict()))


@registry.command("risk")
@click.option("--state", "state_dir", type=click.Path(path_type=Path), required=True)
@click.option("--id", "collection_id", required=True)
@click.option("--level", type=click.Choice([r.value for r in RiskLevel]), required=True)
@click.option("--rationale", required=True)
@click.option("--rejected", is_flag=True, default=False)
def registry_risk(state_dir, collection_id, level, rationale, rejected):
    """Record a risk verdict with its sampling weight."""
    store = RegistryStore(state_dir)
    record = store.assign_risk(collection_id, RiskLevel(level), rationale, rejected=rejected)
    click.echo(json.dumps(record.to_dict()))


@registry.command("load-ledger")
@click.option("--state", "state_dir", type=click.Path(path_type=Path), required=True)
@click.argument("ledger_path", type=click.Path(exists=True, path_type=Path))
def registry_load_ledger(state_dir, ledger_path):
    """Load a policy ledger file into the registry (replaces domain state)."""
    store = RegistryStore(state_dir)
    ledger = policymod.load_ledger(ledger_path)
    store.load_ledger(ledger)
    click.echo(json.dumps({"domains": len(ledger)}))


@registry.command("load-buckets")
@click.option("--state", "state_dir", type=click.Path(path_type=Path), required=True)
@click.argument("report_path", type=click.Path(exists=True, path_type=Path))
def registry_load_buckets(state_dir, report_path):
    """Store a bucket report for serving to the review UI."""
    store = RegistryStore(state_dir)
    report = json.loads(report_path.read_text(encoding="utf-8"))
    store.save_bucket_report(report)
    click.echo(json.dumps({"collection_id": report["collection_id"], "dimension": report["dimension"]}))


@registry.command("export-allowlist")
@click.option("--state", "state_dir", type=click.Path(path_type=Path), required=True)
@click.option("--out", type=click.Path(path_type=Path), required=True)
def registry_export_allowlist(state_dir, out):
    """Write verified-permissive domains to an allowlist JSONL file."""
    store = RegistryStore(state_dir)
    count = store.export_allowlist(out)
    click.echo(json.dumps({"domains": count}))


@registry.command("serve")
@click.option("--state", "state_dir", type=click.Path(path_type=Path), required=True)
@click.option("--port", type=int, default=8321, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--token", default=None, help="Require this bearer token on every request.")
def registry_serve(state_dir, port, host, token):
    """Serve the review API."""
    import uvicorn

    from .review_api import create_app

    store = RegistryStore(state_dir)
    uvicorn.run(create_app(store, token=token), host=host, port=port, log_level="warning")


if __name__ == "__main__":
    main(prog_name="corpuskit")
