"""Command-line interface: generate, validate, simulate, eval, serve, catalog."""

from __future__ import annotations

import hashlib
import json
import os
import sys
from pathlib import Path

import click

from . import behaviordb, evalkit
from .catalog import catalog_manifest_json
from .engine import trace_to_jsonl
from .errors import SchemaError
from .infuser import (
    CachingProvider,
    GenerationJob,
    MockCompletionProvider,
    PromptTemplate,
    TranscriptCache,
)
from .perception import PerceptionConfig
from .service import ServiceConfig, create_app

__all__ = ["main"]


@click.group()
def main():
    """Persona-driven finite-state behavior engine."""


def _load_persona_file(path: str, seed: int | None) -> behaviordb.PersonaSpec:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as e:
        raise click.ClickException(f"cannot read persona file {path}: {e}")
    if not isinstance(doc, dict) or "name" not in doc or "description" not in doc:
        raise click.ClickException(
            f"persona file {path} must be a JSON object with 'name' and 'description'"
        )
    try:
        return behaviordb.PersonaSpec(
            name=doc["name"],
            description=doc["description"],
            seed=seed if seed is not None else int(doc.get("seed", 0)),
        )
    except (TypeError, ValueError) as e:
        raise click.ClickException(f"bad persona file {path}: {e}")


def _make_provider(kind: str, config: ServiceConfig, transcript: str | None):
    if kind == "mock":
        provider = MockCompletionProvider()
    else:
        provider = config.http_provider()
    if transcript:
        provider = CachingProvider(provider, TranscriptCache(transcript))
    return provider


@main.command()
@click.argument("persona_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--provider", "provider_kind", type=click.Choice(["mock", "real"]), default="mock",
              show_default=True, help="Completion backend.")
@click.option("--seed", type=int, default=None, help="Override the persona file's seed.")
@click.option("--out", "out_path", type=click.Path(dir_okay=False), default=None,
              help="Output database path (default: <name>.maskdb.json).")
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
              default=None, help="Service config supplying real-provider settings.")
@click.option("--transcript", type=click.Path(dir_okay=False), default=None,
              help="Transcript cache file for (prompt, seed) replay.")
def generate(persona_file, provider_kind, seed, out_path, config_path, transcript):
    """Compile a persona file into a .maskdb.json behavior database."""
    config = ServiceConfig.from_file(config_path) if config_path else ServiceConfig()
    persona = _load_persona_file(persona_file, seed)
    provider = _make_provider(provider_kind, config, transcript)
    out = Path(out_path) if out_path else Path(f"{persona.name}.maskdb.json")

    def progress(completed, total):
        click.echo(f"\r  {completed}/{total} queries", nl=False, err=True)

    job = GenerationJob(persona, provider, PromptTemplate.default(), on_progress=progress)
    try:
        db = job.run()
    finally:
        click.echo("", err=True)
    if db is None:
        snap = job.snapshot()
        raise click.ClickException(
            f"generation failed at {snap['completed']}/{snap['total']} queries: {snap['error']}"
        )
    report = behaviordb.validate(db)
    if not report.ok:
        raise click.ClickException(f"generated database failed validation: {report.summary()}")
    payload = behaviordb.serialize(db)
    tmp = out.with_suffix(out.suffix + ".tmp")
    tmp.write_bytes(payload)
    os.replace(tmp, out)
    digest = hashlib.sha256(payload).hexdigest()
    click.echo(f"wrote {out} ({len(db.states)} states, sha256 {digest})")
    for warning in db.manifest.warnings:
        click.echo(f"warning: {warning}", err=True)


@main.command("validate")
@click.argument("db_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--json", "as_json", is_flag=True, help="Machine-readable report.")
def validate_cmd(db_path, as_json):
    """Validate a behavior database file."""
    db = _load_db(db_path)
    report = behaviordb.validate(db)
    if as_json:
        click.echo(
            json.dumps(
                {
                    "ok": report.ok,
                    "missing_pairs": report.missing_pairs,
                    "out_of_range_successors": report.out_of_range_successors,
                    "duplicate_states": report.duplicate_states,
                    "unreachable_states": report.unreachable_states,
                    "initial_state_in_range": report.initial_state_in_range,
                }
            )
        )
    else:
        click.echo(report.summary())
    if not report.ok:
        sys.exit(1)


def _load_db(path: str) -> behaviordb.BehaviorDatabase:
    try:
        return behaviordb.deserialize(Path(path).read_bytes())
    except OSError as e:
        raise click.ClickException(f"cannot read {path}: {e}")
    except SchemaError as e:
        raise click.ClickException(f"bad database file {path}: {e}")


@main.command()
@click.argument("db_path", type=click.Path(exists=True, dir_okay=False))
@click.argument("scenario_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_path", type=click.Path(dir_okay=False), default=None,
              help="Write the trace to a file instead of stdout.")
def simulate(db_path, scenario_path, out_path):
    """Replay a .scene.json scenario against a database; emits the JSONL trace."""
    db = _load_db(db_path)
    try:
        scenario = evalkit.load_scenario(scenario_path)
    except SchemaError as e:
        raise click.ClickException(f"bad scenario file {scenario_path}: {e}")
    trace = evalkit.run_scenario(scenario, db, PerceptionConfig())
    problems = evalkit.audit_trace(trace, db)
    if problems:
        raise click.ClickException("trace failed audit: " + "; ".join(problems))
    text = trace_to_jsonl(trace)
    if out_path:
        Path(out_path).write_text(text, encoding="utf-8")
        click.echo(f"wrote {out_path} ({len(trace)} events)")
    else:
        click.echo(text, nl=False)


@main.command("eval")
@click.argument("records_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--characters", default=None,
              help="Comma-separated character list (default: all ids in the records).")
@click.option("--json", "as_json", is_flag=True, help="Machine-readable report.")
def eval_cmd(records_path, characters, as_json):
    """Confusion matrix and classification accuracy from survey records."""
    try:
        records = evalkit.load_survey_records(records_path)
    except SchemaError as e:
        raise click.ClickException(f"bad records file {records_path}: {e}")
    if not records:
        raise click.ClickException("records file contains no records")
    if characters:
        char_list = [c.strip() for c in characters.split(",") if c.strip()]
    else:
        char_list = sorted({r.shown for r in records} | {r.chosen for r in records})
    try:
        report = evalkit.evaluation_report(records, char_list)
    except ValueError as e:
        raise click.ClickException(str(e))
    if as_json:
        click.echo(json.dumps(report, indent=2))
        return
    matrix = evalkit.confusion_matrix(records, char_list)
    click.echo(f"records: {report['records']}")
    click.echo(f"accuracy: {report['accuracy']:.3f} (weighted: {report['weighted_accuracy']:.3f})")
    verdict = "met" if report["meets_success_threshold"] else "not met"
    click.echo(f"success threshold {report['success_threshold']:.2f}: {verdict}")
    if matrix.absent_columns:
        click.echo(f"columns with no records: {', '.join(matrix.absent_columns)}")
    click.echo("")
    click.echo(matrix.to_markdown())


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
              default=None, help="Service configuration file (JSON).")
@click.option("--host", default=None, help="Override the configured listen host.")
@click.option("--port", type=int, default=None, help="Override the configured listen port.")
def serve(config_path, host, port):
    """Run the REST + session-stream service."""
    import uvicorn

    config = ServiceConfig.from_file(config_path) if config_path else ServiceConfig()
    app = create_app(config)
    uvicorn.run(app, host=host or config.host, port=port or config.port)


@main.command()
def catalog():
    """Print the cue-catalog manifest as JSON."""
    click.echo(catalog_manifest_json())


if __name__ == "__main__":
    main()
