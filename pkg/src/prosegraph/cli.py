"""Command line interface: ingest passages, inspect bundles, export SVG
snapshots, score extraction corpora, and serve the HTTP API."""

from __future__ import annotations

import json
import os
import sys

import click

from .backends import ENV_BACKEND_TOKEN, ENV_BACKEND_URL, FixtureBackend, RemoteBackend
from .decomposition import ComplexityRule, Metrics, TripleSet, score_extraction
from .layout import LayoutConfig
from .model import canonical_json
from .service import (
    ENV_DATA_DIR,
    BundleStore,
    IngestConfig,
    IngestError,
    create_app,
    export_svg,
    ingest,
)


def _store(data_dir: str | None) -> BundleStore:
    return BundleStore(data_dir or os.environ.get(ENV_DATA_DIR, "./prosegraph-data"))


def _backend(mode: str, fixtures: str | None):
    if mode == "fixture":
        if fixtures is None:
            raise click.UsageError("--backend fixture needs --fixtures FILE")
        return FixtureBackend.from_file(fixtures)
    return RemoteBackend()


layout_options = [
    click.option("--ideal-link-length", type=float, default=None),
    click.option("--link-stiffness", type=float, default=None),
    click.option("--inclusion-strength", type=float, default=None),
    click.option("--exclusion-strength", type=float, default=None),
    click.option("--sentence-strength", type=float, default=None),
    click.option("--overlap-strength", type=float, default=None),
    click.option("--grid-interval", type=float, default=None),
    click.option("--damping", type=float, default=None),
    click.option("--stabilize-epsilon", type=float, default=None),
    click.option("--max-iterations", type=int, default=None),
    click.option("--composite-padding", type=float, default=None),
    click.option("--seed", type=int, default=None),
]


def with_layout_options(fn):
    for opt in reversed(layout_options):
        fn = opt(fn)
    return fn


def _ingest_config(complexity_tokens: int | None, no_complexity: bool, **layout_kwargs) -> IngestConfig:
    overrides = {k: v for k, v in layout_kwargs.items() if v is not None}
    layout = LayoutConfig(**{**LayoutConfig().to_dict(), **overrides})
    rule = ComplexityRule(enabled=not no_complexity)
    if complexity_tokens is not None:
        rule = ComplexityRule(min_content_tokens=complexity_tokens, enabled=not no_complexity)
    return IngestConfig(layout=layout, complexity=rule)


@click.group()
def main():
    """Turn knowledge-intensive passages into progressively revealed nested
    entity-relationship graphs."""


@main.command("ingest")
@click.argument("path", type=click.Path(exists=True, dir_okay=False, allow_dash=True))
@click.option("--backend", "mode", type=click.Choice(["fixture", "remote"]), default="fixture")
@click.option("--fixtures", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--data-dir", default=None)
@click.option("--complexity-tokens", type=int, default=None,
              help="Content-token threshold for refining an entity on sight.")
@click.option("--no-complexity", is_flag=True, default=False,
              help="Refine entities only when later sentences reuse their sub-concepts.")
@with_layout_options
def ingest_cmd(path, mode, fixtures, data_dir, complexity_tokens, no_complexity, **layout_kwargs):
    """Ingest a passage file (or - for stdin) and persist its bundle."""
    text = sys.stdin.read() if path == "-" else open(path, encoding="utf-8").read()
    config = _ingest_config(complexity_tokens, no_complexity, **layout_kwargs)
    try:
        bundle = ingest(text, config, _backend(mode, fixtures))
    except (IngestError, ValueError) as exc:
        raise click.ClickException(str(exc)) from exc
    store = _store(data_dir)
    store.save(bundle)
    click.echo(bundle.id)


@main.command("timeline")
@click.argument("doc_id")
@click.option("--data-dir", default=None)
def timeline_cmd(doc_id, data_dir):
    """Print a bundle's timeline JSON."""
    bundle = _store(data_dir).load(doc_id)
    click.echo(canonical_json(bundle.timeline.to_dict()))


@main.command("entities")
@click.argument("doc_id")
@click.option("--data-dir", default=None)
def entities_cmd(doc_id, data_dir):
    """Print the ranked entity list."""
    bundle = _store(data_dir).load(doc_id)
    for rank in bundle.entities:
        click.echo(f"{rank.score:4d}  {rank.node_id}  {rank.label}")


@main.command("svg")
@click.argument("doc_id")
@click.option("--prefix", type=int, required=True,
              help="Number of leading sentences to render.")
@click.option("--data-dir", default=None)
@click.option("-o", "--output", type=click.Path(dir_okay=False), default=None)
def svg_cmd(doc_id, prefix, data_dir, output):
    """Export an SVG snapshot of the first --prefix sentences."""
    bundle = _store(data_dir).load(doc_id)
    try:
        svg = export_svg(bundle, prefix)
    except ValueError as exc:
        raise click.ClickException(str(exc)) from exc
    if output:
        with open(output, "w", encoding="utf-8") as f:
            f.write(svg)
    else:
        click.echo(svg, nl=False)


@main.command("score")
@click.option("--gold", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--pred", type=click.Path(exists=True, dir_okay=False), required=True)
def score_cmd(gold, pred):
    """Score a predicted corpus against gold (entities and relations)."""
    with open(gold, encoding="utf-8") as f:
        gold_sets = [TripleSet.from_dict(d) for d in json.load(f)]
    with open(pred, encoding="utf-8") as f:
        pred_sets = [TripleSet.from_dict(d) for d in json.load(f)]
    entity_metrics, relation_metrics = score_extraction(pred_sets, gold_sets)

    def line(name: str, m: Metrics) -> str:
        d = m.display()
        return (f"{name}: P/R/F1 = {d['precision']}/{d['recall']}/{d['f1']} "
                f"(gold {m.total_gold}, extracted {m.total_extracted}, correct {m.correct})")

    click.echo(line("entities", entity_metrics))
    click.echo(line("relations", relation_metrics))


@main.command("serve")
@click.option("--host", default="127.0.0.1")
@click.option("--port", type=int, default=8000)
@click.option("--data-dir", default=None)
@click.option("--backend", "mode", type=click.Choice(["fixture", "remote"]), default="remote")
@click.option("--fixtures", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--no-complexity", is_flag=True, default=False)
def serve_cmd(host, port, data_dir, mode, fixtures, no_complexity):
    """Serve the reader API over HTTP."""
    import uvicorn

    config = _ingest_config(None, no_complexity)
    if mode == "remote" and not os.environ.get(ENV_BACKEND_URL):
        click.echo(f"note: {ENV_BACKEND_URL} unset; POST /documents will fail "
                   f"until it is exported ({ENV_BACKEND_TOKEN} for the credential)",
                   err=True)
        app = create_app(_store(data_dir), config, backend_factory=None)
    else:
        app = create_app(_store(data_dir), config,
                         backend_factory=lambda: _backend(mode, fixtures))
    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
