"""Command-line entry points for the whole platform."""

from __future__ import annotations

import json
import os
import sys

import click

from . import corpus as corpus_mod
from . import evalkit, genpipe, ingest, retrieval, scheduler, service
from .errors import ExamCoachError
from .rerank import LexicalOverlapScorer, RerankMode, remote_scorer


@click.group()
def main():
    """Exam-to-course platform: ingestion, retrieval, generation, learning."""


@main.command("ingest")
@click.option("--format", "fmt", type=click.Choice(["json", "html"]), required=True)
@click.option("--in", "in_path", type=click.Path(exists=True), required=True)
@click.option("--out", "out_path", type=click.Path(), required=True)
def ingest_cmd(fmt, in_path, out_path):
    """Parse an exam file and write canonical exam JSON."""
    with open(in_path, "rb") as fh:
        data = fh.read()
    exam = ingest.parse_exam_json(data) if fmt == "json" else ingest.parse_exam_quiz_html(data)
    with open(out_path, "w", encoding="utf-8") as fh:
        fh.write(ingest.exam_to_json(exam))
    kept, dropped = ingest.filter_questions(exam)
    click.echo(f"{exam.exam_id}: {len(exam.questions)} questions "
               f"({len(kept)} usable, {len(dropped)} flagged)")


def _analyzer_config(stopwords_path=None, synonyms_path=None):
    return retrieval.AnalyzerConfig(
        stopwords=retrieval.load_stopwords(stopwords_path) if stopwords_path else frozenset(),
        synonym_classes=retrieval.load_synonyms(synonyms_path) if synonyms_path else (),
    )


@main.command("index")
@click.option("--corpus", "corpus_path", type=click.Path(exists=True), required=True)
@click.option("--synonyms", type=click.Path(exists=True))
@click.option("--stopwords", type=click.Path(exists=True))
@click.option("--out", "out_path", type=click.Path(), required=True)
def index_cmd(corpus_path, synonyms, stopwords, out_path):
    """Build the inverted index over a corpus file."""
    store = corpus_mod.load_corpus(corpus_path)
    config = _analyzer_config(stopwords, synonyms)
    index = retrieval.build_index(store, config)
    bundle = {
        "index": json.loads(index.to_json()),
        "stopwords": sorted(config.stopwords),
        "synonym_classes": [sorted(c) for c in config.synonym_classes],
    }
    with open(out_path, "w", encoding="utf-8") as fh:
        json.dump(bundle, fh, ensure_ascii=False)
    click.echo(f"indexed {index.doc_count} documents, {len(index.postings)} terms")


def _load_index_bundle(path):
    with open(path, encoding="utf-8") as fh:
        bundle = json.load(fh)
    index = retrieval.InvertedIndex.from_json(json.dumps(bundle["index"]))
    config = retrieval.AnalyzerConfig(
        stopwords=frozenset(bundle["stopwords"]),
        synonym_classes=tuple(frozenset(c) for c in bundle["synonym_classes"]),
    )
    return index, config


@main.command("retrieve")
@click.option("--index", "index_path", type=click.Path(exists=True), required=True)
@click.option("--query", required=True)
@click.option("--k", default=200, show_default=True)
def retrieve_cmd(index_path, query, k):
    """Keyword search; prints rank, doc_id, score as TSV."""
    index, config = _load_index_bundle(index_path)
    terms = retrieval.expand_query(retrieval.analyze(query, config), config)
    for rank, (doc_id, score) in enumerate(retrieval.search(index, terms, k=k), 1):
        click.echo(f"{rank}\t{doc_id}\t{score:.6f}")


def _provider_from_config(config):
    kind = config.get("provider", "mock")
    if kind == "mock":
        return genpipe.MockProvider()
    if kind == "http":
        return genpipe.HttpProvider(config["provider_url"],
                                    model_name=config.get("model", "remote"))
    raise click.ClickException(f"unknown provider: {kind}")


def _scorer_from_config(config):
    kind = config.get("scorer", "lexical")
    if kind == "lexical":
        return LexicalOverlapScorer()
    if kind == "remote":
        return remote_scorer(config["scorer_url"])
    raise click.ClickException(f"unknown scorer: {kind}")


@main.command("generate")
@click.option("--exams", "exams_path", type=click.Path(exists=True), required=True)
@click.option("--corpus", "corpus_path", type=click.Path(exists=True), required=True)
@click.option("--index", "index_path", type=click.Path(exists=True), required=True)
@click.option("--mode", type=click.Choice(["base", "refined"]), default="refined",
              show_default=True)
@click.option("--provider", "provider_cfg", type=click.Path(exists=True))
@click.option("--out", "out_dir", type=click.Path(), required=True)
def generate_cmd(exams_path, corpus_path, index_path, mode, provider_cfg, out_dir):
    """Run the full pipeline; one report JSON file per usable question."""
    with open(exams_path, "rb") as fh:
        exam = ingest.parse_exam_json(fh.read())
    kept, dropped = ingest.filter_questions(exam)
    store = corpus_mod.load_corpus(corpus_path)
    index, config = _load_index_bundle(index_path)
    cfg = service.load_config(provider_cfg) if provider_cfg else {}
    provider = _provider_from_config(cfg)
    scorer = _scorer_from_config(cfg)
    rerank_mode = RerankMode.base() if mode == "base" else RerankMode.refined()

    os.makedirs(out_dir, exist_ok=True)
    failures = 0
    for question in kept:
        try:
            report = genpipe.run_pipeline(question, index, store, rerank_mode,
                                          scorer, provider, config)
        except ExamCoachError as exc:
            failures += 1
            click.echo(f"question {question.question_no}: {exc}", err=True)
            continue
        name = f"{exam.exam_id}_{question.question_no}.json".replace("/", "_")
        with open(os.path.join(out_dir, name), "w", encoding="utf-8") as fh:
            json.dump(report.to_dict(), fh, ensure_ascii=False, indent=2)
    click.echo(f"{len(kept) - failures} reports written, {failures} failed, "
               f"{len(dropped)} questions filtered out")


@main.command("evaluate")
@click.option("--reports", "reports_dir", type=click.Path(exists=True))
@click.option("--annotations", "annotation_files", type=click.Path(exists=True),
              multiple=True, required=True)
@click.option("--out", "out_path", type=click.Path(), required=True)
def evaluate_cmd(reports_dir, annotation_files, out_path):
    """Aggregate annotation scores into the results table."""
    records = []
    for path in annotation_files:
        records.extend(evalkit.load_annotations(path))
    table = evalkit.aggregate([evalkit.record_values(r) for r in records])
    rendered = evalkit.render_table(table)
    with open(out_path, "w", encoding="utf-8") as fh:
        fh.write(rendered + "\n")
    click.echo(rendered)


@main.command("iaa")
@click.option("--annotations", "annotation_files", type=click.Path(exists=True),
              nargs=2, required=True)
@click.option("--resolutions", "resolutions_path", type=click.Path(exists=True))
@click.option("--out", "out_path", type=click.Path(), required=True)
def iaa_cmd(annotation_files, resolutions_path, out_path):
    """Inter-annotator agreement table from two annotation files."""
    first = {r.question_id: r for r in evalkit.load_annotations(annotation_files[0])}
    second = {r.question_id: r for r in evalkit.load_annotations(annotation_files[1])}
    shared = sorted(set(first) & set(second))
    pairs = [(first[qid], second[qid]) for qid in shared]
    summary = evalkit.iaa_summary(pairs)

    resolutions = {}
    resolver = None
    if resolutions_path:
        with open(resolutions_path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if line:
                    obj = json.loads(line)
                    resolutions[obj["question_id"]] = obj["resolutions"]
                    resolver = obj.get("resolver", resolver)

    finals = []
    for qid in shared:
        if resolutions_path:
            resolved = evalkit.resolve(None, first[qid], second[qid],
                                       resolver or "resolver",
                                       resolutions.get(qid, {}))
            finals.append(resolved.final_values())
        else:
            # without resolutions, report raw per-annotator averages
            a = evalkit.record_values(first[qid])
            b = evalkit.record_values(second[qid])
            finals.append({k: (a[k] + b[k]) / 2 for k in a if k in b})
    table = evalkit.aggregate(finals)
    rendered = evalkit.render_table(table, summary)
    with open(out_path, "w", encoding="utf-8") as fh:
        fh.write(rendered + "\n")
    click.echo(rendered)


@main.command("schedule-sim")
@click.option("--policy", type=click.Choice(["know", "unsure", "dontknow", "mixed"]),
              default="know", show_default=True)
@click.option("--days", default=30, show_default=True)
def schedule_sim_cmd(policy, days):
    """Replay a virtual learner and print the review trace."""
    grades = {
        "know": scheduler.Grade.KNOW,
        "unsure": scheduler.Grade.UNSURE,
        "dontknow": scheduler.Grade.DONT_KNOW,
    }
    if policy == "mixed":
        cycle = (scheduler.Grade.KNOW, scheduler.Grade.UNSURE, scheduler.Grade.DONT_KNOW)
        chosen = lambda i: cycle[i % 3]
    else:
        chosen = grades[policy]
    trace = scheduler.simulate(chosen, days)
    click.echo("day\tgrade\tnext interval (d)")
    for day, grade, interval in trace:
        click.echo(f"{day:.2f}\t{grade.value}\t{interval:.2f}")
    click.echo(f"{len(trace)} reviews in {days} days")


@main.command("serve")
@click.option("--data", "data_dir", type=click.Path(exists=True), required=True)
@click.option("--port", default=8000, show_default=True)
@click.option("--config", "config_path", type=click.Path(exists=True))
def serve_cmd(data_dir, port, config_path):
    """Serve the learning and annotation API.

    Expects `exams.json` (canonical exam JSON) and a `reports/` directory
    of pipeline report files under the data directory.
    """
    import uvicorn

    cfg = service.load_config(config_path) if config_path else {}
    with open(os.path.join(data_dir, "exams.json"), "rb") as fh:
        exam = ingest.parse_exam_json(fh.read())
    kept, _ = ingest.filter_questions(exam)

    reports = {}
    report_objs = {}
    reports_dir = os.path.join(data_dir, "reports")
    for name in sorted(os.listdir(reports_dir)):
        if not name.endswith(".json"):
            continue
        with open(os.path.join(reports_dir, name), encoding="utf-8") as fh:
            obj = json.load(fh)
        reports[obj["question_id"]] = obj
        report_objs[obj["question_id"]] = genpipe.report_from_dict(obj)

    course = service.assemble_course(exam.exam_id, kept, report_objs)
    svc = service.LearningService(
        [course],
        data_dir=data_dir,
        daily_new_cap=int(cfg.get("daily_new_cap", 20)),
        threshold=scheduler.RetentionThreshold(float(cfg.get("r_target", 0.9))),
        reports=reports,
    )
    app = service.create_app(svc)
    uvicorn.run(app, host=cfg.get("host", "127.0.0.1"), port=port)


if __name__ == "__main__":
    sys.exit(main())
