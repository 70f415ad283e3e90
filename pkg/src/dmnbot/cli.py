"""Command-line frontend: validate, compile, chat, serve."""

from __future__ import annotations

import json
import os
import sys
from pathlib import Path

import click

from . import __version__
from .errors import DmnBotError
from .export import export_agent_bundle, export_chatito, load_agent_bundle
from .modelio import load_model
from .pipeline import (
    DEFAULT_DECISION_BUDGET,
    DEFAULT_SEED,
    compile_agent,
)
from .engine import validate_unique
from .runtime import DialogueEngine, replay


@click.group()
@click.version_option(__version__)
def main():
    """Compile DMN decision tables into chatbot agents and run them."""


_model_format = click.option(
    "--model-format",
    type=click.Choice(["dmn", "json"]),
    default=None,
    help="Input format; defaults from the file extension.",
)


@main.command()
@click.argument("path", type=click.Path(exists=True, dir_okay=False))
@_model_format
def validate(path, model_format):
    """Check a decision model: structure plus Unique-hit-policy conflicts."""
    try:
        doc = load_model(path, model_format)
    except DmnBotError as exc:
        click.echo(f"invalid model: {exc}")
        sys.exit(1)
    for warning in doc.warnings:
        click.echo(f"warning: {warning}")
    failed = False
    for table in doc.model.tables.values():
        reports = validate_unique(table)
        for report in reports:
            failed = True
            click.echo(f"{table.name}: {report.describe()}")
    if failed:
        sys.exit(1)
    click.echo(f"ok: {len(doc.model.tables)} table(s), root {doc.root!r}")


@main.command()
@click.argument("path", type=click.Path(exists=True, dir_okay=False))
@_model_format
@click.option("--seed", type=int, default=DEFAULT_SEED, show_default=True)
@click.option(
    "--budget",
    type=int,
    default=DEFAULT_DECISION_BUDGET,
    show_default=True,
    help="Phrases per decision intent; input intents get half.",
)
@click.option("--out", type=click.Path(file_okay=False), required=True)
@click.option(
    "--format",
    "out_format",
    type=click.Choice(["bundle", "chatito", "both"]),
    default="bundle",
    show_default=True,
)
@click.option(
    "--of-params",
    default="",
    help="Comma-separated input names phrased with 'of' instead of 'with'.",
)
@click.option(
    "--synonyms",
    type=click.Path(exists=True, dir_okay=False),
    default=None,
    help="JSON sidecar: input name -> {value label: [synonyms]}.",
)
@click.option("--zip", "as_zip", is_flag=True, help="Write the bundle as a zip archive.")
def compile(path, model_format, seed, budget, out, out_format, of_params, synonyms, as_zip):
    """Compile a model into an agent bundle and/or Chatito grammar files."""
    try:
        doc = load_model(path, model_format)
        style = {name.strip(): "of" for name in of_params.split(",") if name.strip()}
        sidecar = None
        if synonyms:
            sidecar = json.loads(Path(synonyms).read_text("utf-8"))
        compiled = compile_agent(
            [(doc.model, doc.root)],
            seed=seed,
            decision_budget=budget,
            input_budget=max(1, budget // 2),
            param_style=style,
            synonyms=sidecar,
        )
    except DmnBotError as exc:
        click.echo(f"compile failed [{type(exc).__module__}.{type(exc).__name__}]: {exc}")
        sys.exit(1)

    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)
    if out_format in ("bundle", "both"):
        target = export_agent_bundle(compiled, out_dir / "bundle", as_zip=as_zip)
        click.echo(f"bundle: {target}")
    if out_format in ("chatito", "both"):
        chatito_dir = out_dir / "chatito"
        chatito_dir.mkdir(parents=True, exist_ok=True)
        for name, grammar in compiled.grammars.items():
            (chatito_dir / f"{name}.chatito").write_text(export_chatito(grammar), "utf-8")
        click.echo(f"chatito: {chatito_dir}")

    phrase_count = sum(len(it.training_phrases) for it in compiled.agent.intents)
    click.echo(
        f"summary: {len(compiled.units)} decision(s), "
        f"{len(compiled.agent.entities)} entities, "
        f"{len(compiled.agent.intents)} intents, "
        f"{phrase_count} training phrases (seed {seed})"
    )


@main.command()
@click.argument("bundle", type=click.Path(exists=True))
@click.option(
    "--script",
    type=click.Path(exists=True, dir_okay=False),
    default=None,
    help="Replay user lines from a file instead of reading stdin.",
)
def chat(bundle, script):
    """Terminal chat over a compiled bundle."""
    try:
        compiled = load_agent_bundle(bundle)
    except DmnBotError as exc:
        click.echo(f"cannot load bundle: {exc}")
        sys.exit(1)
    engine = DialogueEngine(compiled)
    if script:
        lines = [l for l in Path(script).read_text("utf-8").splitlines() if l.strip()]
        click.echo(replay(engine, lines), nl=False)
        return
    session = engine.create_session("repl")
    click.echo(f"bot: {engine.greeting()}")
    while session.status != "closed":
        try:
            line = click.prompt("you", prompt_suffix="> ")
        except (EOFError, click.Abort):
            break
        if not line.strip():
            continue
        reply = engine.step(session, line)
        click.echo(f"bot: {reply.text}")


@main.command()
@click.argument("bundle", type=click.Path(exists=True))
@click.option(
    "--port",
    type=int,
    default=lambda: int(os.environ.get("DMNBOT_PORT", "8080")),
    help="Port to listen on [env DMNBOT_PORT, default 8080].",
)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option(
    "--ui-dir",
    type=click.Path(file_okay=False),
    default=None,
    help="Static web client directory served under /ui.",
)
def serve(bundle, port, host, ui_dir):
    """Serve the HTTP chat API (and the web client, if built)."""
    import uvicorn

    from .server import create_app

    try:
        compiled = load_agent_bundle(bundle)
    except DmnBotError as exc:
        click.echo(f"cannot load bundle: {exc}")
        sys.exit(1)
    if ui_dir is None:
        candidate = Path(__file__).resolve().parents[2] / "frontend" / "dist"
        if not candidate.is_dir():
            candidate = Path.cwd() / "frontend" / "dist"
        ui_dir = str(candidate) if candidate.is_dir() else None
    app = create_app(compiled, ui_dir=ui_dir)
    uvicorn.run(app, host=host, port=port, log_level="warning")


if __name__ == "__main__":
    main()
