"""Command-line interface: ingest, index, search, explore, report, serve, stats.

Exit codes: 0 success, 1 usage error, 2 data/consistency error.
"""

from __future__ import annotations

import json
import sys

import click

from .config import ServiceConfig, load_config
from .corpus import ValidationPolicy, load_corpus, load_snapshot, persist_snapshot
from .errors import ExploreError
from .pipeline import Explorer, build_indexes
from .retrieval import FilterSpec


def _config(ctx) -> ServiceConfig:
    return load_config(ctx.obj.get("config_path"))


def _filters(year_from, year_to, author, institution, country) -> FilterSpec:
    year_range = None
    if year_from is not None or year_to is not None:
        year_range = (year_from if year_from is not None else 0,
                      year_to if year_to is not None else 9999)
    return FilterSpec(
        year_range=year_range,
        authors=frozenset(author) if author else None,
        institutions=frozenset(institution) if institution else None,
        countries=frozenset(country) if country else None,
    )


filter_options = [
    click.option("--year-from", type=int, default=None),
    click.option("--year-to", type=int, default=None),
    click.option("--author", multiple=True, help="author name (repeatable)"),
    click.option("--institution", multiple=True, help="institution id (repeatable)"),
    click.option("--country", multiple=True, help="ISO alpha-2 code (repeatable)"),
]


def add_options(options):
    def wrap(fn):
        for option in reversed(options):
            fn = option(fn)
        return fn
    return wrap


@click.group()
@click.option("--config", "config_path", type=click.Path(exists=True), default=None,
              help="key=value config file; ISLE_* env vars override")
@click.pass_context
def cli(ctx, config_path):
    """Query-conditioned literature exploration."""
    ctx.ensure_object(dict)
    ctx.obj["config_path"] = config_path


@cli.command()
@click.option("--papers", required=True, type=click.Path(exists=True))
@click.option("--authors", required=True, type=click.Path(exists=True))
@click.option("--authorship", required=True, type=click.Path(exists=True))
@click.option("--citations", required=True, type=click.Path(exists=True))
@click.option("--embeddings", type=click.Path(exists=True), default=None)
@click.option("--policy", type=click.Choice(["strict", "drop"]), default="drop")
@click.option("--embedding-model", default="unknown")
@click.pass_context
def ingest(ctx, papers, authors, authorship, citations, embeddings, policy, embedding_model):
    """Validate dump files and persist the corpus snapshot."""
    config = _config(ctx)
    snapshot = load_corpus(
        papers, authors, authorship, citations, embeddings,
        policy=ValidationPolicy(policy),
        embedding_model=embedding_model,
    )
    persist_snapshot(snapshot, config.corpus_dir)
    report = snapshot.report
    click.echo(f"ingested {snapshot.stats.paper_count} papers, "
               f"{snapshot.stats.author_count} authors, "
               f"{snapshot.stats.citation_count} citations")
    click.echo(f"malformed={report.total_malformed} "
               f"dangling_citations={report.dangling_citations} "
               f"dangling_authorship={report.dangling_authorship} "
               f"missing_embeddings={report.missing_embeddings}")
    click.echo(f"snapshot written to {config.corpus_dir} "
               f"(hash {snapshot.content_hash[:12]})")


@cli.command()
@click.option("--force", is_flag=True, help="rebuild even when up to date")
@click.pass_context
def index(ctx, force):
    """Build the lexical and vector indexes for the persisted corpus."""
    config = _config(ctx)
    snapshot = load_snapshot(config.corpus_dir)
    generation, built = build_indexes(snapshot, config, force=force)
    if built:
        click.echo(f"built index generation {generation}")
    else:
        click.echo(f"index generation {generation} is up to date; skipped rebuild")


@cli.command()
@click.pass_context
def stats(ctx):
    """Print corpus statistics."""
    config = _config(ctx)
    snapshot = load_snapshot(config.corpus_dir)
    for key, value in snapshot.stats.to_dict().items():
        click.echo(f"{key}: {value}")


@cli.command()
@click.option("--query", required=True)
@click.option("--limit", type=int, default=20)
@click.option("--json", "as_json", is_flag=True)
@add_options(filter_options)
@click.pass_context
def search(ctx, query, limit, as_json, year_from, year_to, author, institution, country):
    """Hybrid search: fused ranking only."""
    explorer = Explorer.from_config(_config(ctx))
    request = explorer.make_request(
        query, filters=_filters(year_from, year_to, author, institution, country),
        limit=limit)
    payload = explorer.search(request)
    if as_json:
        click.echo(json.dumps(payload, sort_keys=True, indent=2))
        return
    if payload["semantic_degraded"]:
        click.echo("warning: semantic path degraded; lexical-only results", err=True)
    click.echo(f"{'rank':>4}  {'score':>10}  {'year':>5}  paper")
    for row in payload["results"]:
        click.echo(f"{row['rank']:>4}  {row['score']:>10.6f}  "
                   f"{row['publication_year']:>5}  {row['paper_id']}  {row['title'][:70]}")


@cli.command()
@click.option("--query", required=True)
@click.option("--limit", type=int, default=None)
@click.option("--topic-mode", type=click.Choice(["auto", "nmf", "cluster"]), default=None)
@click.option("--json", "as_json", is_flag=True)
@add_options(filter_options)
@click.pass_context
def explore(ctx, query, limit, topic_mode, as_json,
            year_from, year_to, author, institution, country):
    """Full pipeline: retrieve, topics, graph, analytics; artifacts persisted."""
    explorer = Explorer.from_config(_config(ctx))
    request = explorer.make_request(
        query, filters=_filters(year_from, year_to, author, institution, country),
        limit=limit)
    payload = explorer.explore(request, topic_mode=topic_mode)
    if as_json:
        click.echo(json.dumps(payload, sort_keys=True, indent=2))
        return
    click.echo(f"query_id: {payload['query_id']}")
    if payload["semantic_degraded"]:
        click.echo("warning: semantic path degraded; lexical-only results", err=True)
    click.echo(f"results: {payload['result_count']}  topics: {len(payload['topics'])}  "
               f"graph: {payload['graph']['node_count']} nodes / "
               f"{payload['graph']['edge_count']} edges")
    click.echo(f"{'topic':>6}  {'docs':>5}  keywords")
    for topic in payload["topics"]:
        words = " ".join(k for k, _ in topic["keywords"][:8])
        click.echo(f"{topic['topic_id']:>6}  {topic['document_count']:>5}  {words}")
    click.echo(f"artifacts: {explorer.exploration_dir(payload['query_id'])}")


@cli.command()
@click.option("--query", default=None, help="run a fresh exploration to report on")
@click.option("--query-id", default=None, help="report on an existing exploration")
@click.option("--limit", type=int, default=None)
@click.option("--out", required=True, type=click.Path())
@add_options(filter_options)
@click.pass_context
def report(ctx, query, query_id, limit, out, year_from, year_to, author, institution, country):
    """Write CSV tables and PNG figures for an exploration."""
    from .report import write_report

    if (query is None) == (query_id is None):
        raise click.UsageError("pass exactly one of --query / --query-id")
    explorer = Explorer.from_config(_config(ctx))
    if query is not None:
        request = explorer.make_request(
            query, filters=_filters(year_from, year_to, author, institution, country),
            limit=limit)
        payload = explorer.explore(request)
    else:
        payload = explorer.load_artifact(query_id, "result.json")
    written = write_report(payload, out)
    for path in written:
        click.echo(str(path))


@cli.command()
@click.pass_context
def serve(ctx):
    """Start the HTTP service."""
    from .service import serve as run_service

    run_service(_config(ctx))


def main(argv=None) -> int:
    """Entry point with the documented exit-code contract."""
    try:
        cli.main(args=argv, standalone_mode=False, obj={})
        return 0
    except click.UsageError as exc:
        exc.show(file=sys.stderr)
        return 1
    except click.ClickException as exc:
        exc.show(file=sys.stderr)
        return 1
    except click.exceptions.Abort:
        return 1
    except ExploreError as exc:
        click.echo(f"error: {exc}", err=True)
        return 2


if __name__ == "__main__":
    sys.exit(main())
