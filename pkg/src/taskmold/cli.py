"""Offline command line: validate, compile, lint, serve, replay.

Exit codes, one per failure class:

* 0 — success
* 1 — validation violations found (``validate``)
* 2 — usage errors (bad flags/arguments)
* 3 — unreadable or malformed input files
* 4 — replay fixture miss
* 5 — provider failure (unavailable or irreparable output)
"""

from __future__ import annotations

import json
import sys
from pathlib import Path as FsPath

import click

from .canonical import canon_dumps
from .errors import FixtureMissError, IrreparableResponseError, ProviderUnavailableError, TaskmoldError
from .gateway import Gateway, LiveProvider, ReplayProvider
from .graph import lint_dependencies
from .model import Schema, validate_schema
from .session import Session, validate_session
from .service import SessionService, SessionStore

EXIT_VIOLATIONS = 1
EXIT_INPUT = 3
EXIT_FIXTURE = 4
EXIT_PROVIDER = 5


def _read_json(path: str) -> dict:
    try:
        return json.loads(FsPath(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        click.echo(f"error: cannot read {path}: {exc}", err=True)
        sys.exit(EXIT_INPUT)


def _load_session(path: str) -> Session:
    raw = _read_json(path)
    if "schema" not in raw:
        click.echo(f"error: {path} is not a session file (no schema)", err=True)
        sys.exit(EXIT_INPUT)
    return Session.from_json(raw)


def _make_gateway(provider: str, fixtures: str | None) -> Gateway:
    if provider == "replay":
        if not fixtures:
            click.echo("error: --provider replay requires --fixtures", err=True)
            sys.exit(EXIT_INPUT)
        try:
            return Gateway(ReplayProvider(fixtures))
        except (OSError, json.JSONDecodeError) as exc:
            click.echo(f"error: cannot read fixtures {fixtures}: {exc}", err=True)
            sys.exit(EXIT_INPUT)
    return Gateway(LiveProvider())


@click.group()
def main() -> None:
    """Task-driven data models compiled into malleable UI documents."""


@main.command()
@click.argument("files", nargs=-1, required=True, type=click.Path(exists=False))
def validate(files: tuple[str, ...]) -> None:
    """Validate schema, annotation, data, or full session files.

    Prints one JSON line per finding; exits 1 if any file has findings.
    """
    total = 0
    for path in files:
        raw = _read_json(path)
        if "schema" in raw:
            report = validate_session(Session.from_json(raw))
        elif "entities" in raw:
            report = validate_schema(Schema.from_json(raw))
        else:
            click.echo(f"error: {path}: expected a session or schema file", err=True)
            sys.exit(EXIT_INPUT)
        for finding in report.findings:
            click.echo(json.dumps({"file": path, **finding.to_json()}, sort_keys=True))
        total += len(report)
    sys.exit(EXIT_VIOLATIONS if total else 0)


@main.command()
@click.argument("session_file", type=click.Path(exists=False))
@click.option("-o", "--output", type=click.Path(), default=None,
              help="Write the UI document here instead of stdout.")
def compile(session_file: str, output: str | None) -> None:
    """Compile a session file into its canonical UI document."""
    session = _load_session(session_file)
    report = validate_session(session)
    if not report.ok:
        for finding in report.findings:
            click.echo(json.dumps(finding.to_json(), sort_keys=True), err=True)
        sys.exit(EXIT_VIOLATIONS)
    text = canon_dumps(session.compile().to_json())
    if output:
        FsPath(output).write_text(text, encoding="utf-8")
    else:
        click.echo(text, nl=False)


@main.command("lint-deps")
@click.argument("session_file", type=click.Path(exists=False))
def lint_deps(session_file: str) -> None:
    """Lint dependency edges; emits one JSON line per finding."""
    session = _load_session(session_file)
    for finding in lint_dependencies(session.schema, list(session.dependencies)):
        click.echo(json.dumps(finding.to_json(), sort_keys=True))


@main.command()
@click.option("--port", default=8000, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--store-dir", default="./sessions", show_default=True)
@click.option("--provider", type=click.Choice(["live", "replay"]), default="live", show_default=True)
@click.option("--fixtures", type=click.Path(), default=None,
              help="Recorded fixture file (required for --provider replay).")
def serve(port: int, host: str, store_dir: str, provider: str, fixtures: str | None) -> None:
    """Run the HTTP/WebSocket session service."""
    import uvicorn

    from .service import create_app

    app = create_app(store_dir, _make_gateway(provider, fixtures))
    uvicorn.run(app, host=host, port=port, log_level="info")


@main.command()
@click.argument("script_file", type=click.Path(exists=False))
@click.option("--fixtures", type=click.Path(), required=True,
              help="Recorded fixture file answering every provider request.")
@click.option("-o", "--output", type=click.Path(), default="replay-out",
              help="Directory for the final session, document, and history.")
@click.option("--store-dir", type=click.Path(), default=None,
              help="Session store directory (defaults to a subdirectory of the output).")
def replay(script_file: str, fixtures: str, output: str, store_dir: str | None) -> None:
    """Run a scripted prompt/event sequence offline and write the results.

    The script is JSON: {"steps": [{"prompt": text} | {"event": {...}}]}.
    A deterministic clock makes repeated runs byte-identical.
    """
    script = _read_json(script_file)
    steps = script.get("steps", [])
    out_dir = FsPath(output)
    out_dir.mkdir(parents=True, exist_ok=True)
    gateway = _make_gateway("replay", fixtures)
    store = SessionStore(store_dir or out_dir / "store")
    ticks = iter(range(1, 10_000))
    service = SessionService(store, gateway, clock=lambda: float(next(ticks)))

    sid = service.create_session()
    try:
        for i, step in enumerate(steps):
            if "prompt" in step:
                service.handle_prompt(sid, step["prompt"])
            elif "event" in step:
                service.handle_event(sid, step["event"])
            else:
                click.echo(f"error: step {i} has neither prompt nor event", err=True)
                sys.exit(EXIT_INPUT)
    except FixtureMissError as exc:
        click.echo(f"error: fixture miss: {exc}", err=True)
        sys.exit(EXIT_FIXTURE)
    except (ProviderUnavailableError, IrreparableResponseError) as exc:
        click.echo(f"error: provider failure: {exc}", err=True)
        sys.exit(EXIT_PROVIDER)
    except TaskmoldError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_VIOLATIONS)

    session, history = store.load(sid)
    (out_dir / "session.json").write_text(
        canon_dumps(session.to_json() if session else None), encoding="utf-8")
    (out_dir / "ui.json").write_text(
        canon_dumps(session.compile().to_json() if session else None), encoding="utf-8")
    (out_dir / "history.json").write_text(canon_dumps(history.manifest()), encoding="utf-8")
    click.echo(f"replayed {len(steps)} steps -> {out_dir}")


if __name__ == "__main__":
    main()
