"""Provider gateway: every generative step goes through here.

Requests are typed (``GenSchema``, ``ParseFollowUp``, ``AutoComplete``,
...), carry the prior prompts as context, and hash canonically so a
replay provider can answer them from recorded fixtures with zero network
traffic. Whatever comes back is parsed with a repair ladder and validated
by the owning module's validator before anything downstream sees it: the
engine never touches unvalidated generated content.

The gateway itself holds no session state; independent sub-requests of a
pipeline stage run concurrently and are joined before any mutation.
"""

from __future__ import annotations

import json
import os
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path as FsPath
from typing import Protocol

from .canonical import canon_compact, digest
from .errors import (
    FixtureMissError,
    IrreparableResponseError,
    ProviderUnavailableError,
)
from .graph import Dependency, build_graph
from .model import AnnotationSet, Schema, validate_annotations, validate_schema
from .session import Session
from .store import DataSet, empty_value, validate_data, _conform
from .updaters import ACTIONS, Updater

REQUEST_KINDS = (
    "GenSchema", "GenDependencies", "GenAnnotations", "GenData",
    "ParseFollowUp", "AutoComplete", "NLDependencyExec", "SemanticCluster",
)


@dataclass(frozen=True)
class ProviderRequest:
    kind: str
    context: dict
    payload: dict

    def to_json(self) -> dict:
        return {"kind": self.kind, "context": self.context, "payload": self.payload}

    @property
    def hash(self) -> str:
        return digest(self.to_json())


class Provider(Protocol):
    live: bool
    network_calls: int

    def complete(self, request: ProviderRequest) -> str: ...


class ReplayProvider:
    """Answers requests from recorded fixtures; an unknown hash is an error,
    never a live call."""

    live = False

    def __init__(self, fixtures: dict | str | FsPath):
        if not isinstance(fixtures, dict):
            fixtures = json.loads(FsPath(fixtures).read_text(encoding="utf-8"))
        self.fixtures: dict = fixtures
        self.network_calls = 0
        self.lookups = 0

    def complete(self, request: ProviderRequest) -> str:
        self.lookups += 1
        entry = self.fixtures.get(request.hash)
        if entry is None:
            raise FixtureMissError(request.hash, request.kind)
        return entry["response"]


class RecordingProvider:
    """Wraps another provider and records its answers as replay fixtures."""

    def __init__(self, inner):
        self.inner = inner
        self.recorded: dict[str, dict] = {}

    @property
    def live(self) -> bool:
        return self.inner.live

    @property
    def network_calls(self) -> int:
        return self.inner.network_calls

    def complete(self, request: ProviderRequest) -> str:
        response = self.inner.complete(request)
        self.recorded[request.hash] = {"request": request.to_json(), "response": response}
        return response

    def save(self, path: str | FsPath) -> None:
        from .canonical import canon_dumps

        FsPath(path).write_text(canon_dumps(self.recorded), encoding="utf-8")


class LiveProvider:
    """HTTP chat-completion backend, configured entirely from the environment.

    ``TASKMOLD_PROVIDER_URL`` and ``TASKMOLD_PROVIDER_KEY`` select the
    endpoint; ``TASKMOLD_MODEL`` (or a per-kind ``TASKMOLD_MODEL_<KIND>``
    override) selects the model. Neither is ever baked into code or
    fixtures.
    """

    live = True

    def __init__(self) -> None:
        self.url = os.environ.get("TASKMOLD_PROVIDER_URL")
        self.key = os.environ.get("TASKMOLD_PROVIDER_KEY")
        self.network_calls = 0

    def _model_for(self, kind: str) -> str:
        return os.environ.get(f"TASKMOLD_MODEL_{kind.upper()}",
                              os.environ.get("TASKMOLD_MODEL", "default"))

    def complete(self, request: ProviderRequest) -> str:
        if not self.url:
            raise ProviderUnavailableError(
                "live provider is not configured; set TASKMOLD_PROVIDER_URL "
                "and TASKMOLD_PROVIDER_KEY or use --provider replay")
        import httpx

        self.network_calls += 1
        headers = {"Authorization": f"Bearer {self.key}"} if self.key else {}
        body = {
            "model": self._model_for(request.kind),
            "messages": [
                {"role": "system", "content": _SYSTEM_PROMPTS[request.kind]},
                {"role": "user", "content": canon_compact(request.to_json())},
            ],
        }
        try:
            response = httpx.post(self.url, json=body, headers=headers, timeout=60.0)
            response.raise_for_status()
        except Exception as exc:
            raise ProviderUnavailableError(f"provider request failed: {exc}") from exc
        parsed = response.json()
        try:
            return parsed["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError) as exc:
            raise ProviderUnavailableError(f"unexpected provider response shape: {exc}") from exc


_GRAMMAR_NOTE = (
    "Relationship code uses only: literals, + - * /, comparisons, and/or/not, "
    "field access rooted at source/target/item, [n], [*], and "
    "sum/avg/min/max/count/filter over arrays. ISO-8601 date text compares with < and >."
)

_SYSTEM_PROMPTS: dict[str, str] = {
    "GenSchema": (
        "Infer the task behind the prompt and answer with one JSON object: "
        '{"root": ENTITY, "entities": {NAME: {"attributes": {name: '
        '{"kind": "SVAL"|"DICT"|"PNTR"|"ARRY", ...}}}}}. '
        "SVAL carries hint text|number; PNTR carries target; ARRY carries item "
        "(SVAL or PNTR, never DICT); DICT carries fields. Entity names are "
        "UPPER_SNAKE, attributes lower_snake, every entity gets an id attribute. "
        "If several entities would share one DICT, promote it to an entity and point at it."
    ),
    "GenAnnotations": (
        "Annotate every attribute of the given schema with "
        '{"function": "privateIdentifier"|"publicIdentifier"|"display", '
        '"render": ..., "editable": bool}. Non-array renders: shortText, paragraph, '
        "number, url, time, location, category (with categories list), hidden. "
        "Array renders: expanded or summary (with summary {label, derived {operation, field}}). "
        "Annotate DICT fields as dict_attr.field, never the DICT itself. "
        'Answer {"ENTITY": {"attr": {...}}}.'
    ),
    "GenDependencies": (
        "List the dependencies the task needs as a JSON array of "
        '{"source": path, "target": path, "mechanism": "Validate"|"Update", '
        '"relationship": {"code": expr} or {"natural": text}}. ' + _GRAMMAR_NOTE
    ),
    "GenData": (
        "Produce instances for the schema as "
        '{"root": id, "instances": {id: {"entity": NAME, "values": {...}}}}. '
        "Ids look like ENTITY-1; pointers hold ids; arrays hold values or ids."
    ),
    "ParseFollowUp": (
        "Decide how the prompt changes the model. Answer "
        '{"updaters": [{"target": path, "action": one of add-schema|remove-schema|'
        "update-schema|add-data|remove-data|update-data|cluster|filter|sort, "
        '"specifications": {...}}], "note": text}. '
        "Pure context with no model change means an empty updaters list and an explanatory note."
    ),
    "AutoComplete": (
        'Fill in the missing attribute values of the partial instance. Answer {"values": {...}} '
        "covering every attribute; keep the provided values exactly as given."
    ),
    "NLDependencyExec": (
        "Apply the described relationship to the source value and answer "
        '{"value": <new target value>}.'
    ),
    "SemanticCluster": (
        'Group the items semantically. Answer {"assignments": {item_id: group_label}}.'
    ),
}


# ---------------------------------------------------------------------------
# response repair


_FENCE_RE = re.compile(r"```(?:json)?\s*(.*?)```", re.DOTALL)


def repair_json(raw: str, expected_shape: str = "object"):
    """Parse provider output, progressively repairing common damage.

    Attempts, in order: direct parse; code-fence stripping plus bracket
    slicing; trailing-comma removal and closing-bracket balancing. Raises
    :class:`IrreparableResponseError` with per-attempt diagnostics.
    """
    attempts: list[str] = []

    def accept(value):
        if expected_shape == "object" and not isinstance(value, dict):
            raise ValueError(f"expected a JSON object, got {type(value).__name__}")
        if expected_shape == "array" and not isinstance(value, list):
            raise ValueError(f"expected a JSON array, got {type(value).__name__}")
        return value

    def attempt(label: str, text: str):
        try:
            return accept(json.loads(text))
        except ValueError as exc:
            attempts.append(f"{label}: {exc}")
            return None

    def balanced(text: str) -> str:
        text = re.sub(r",\s*([}\]])", r"\1", text)
        stack = []
        for ch in text:
            if ch in "{[":
                stack.append("}" if ch == "{" else "]")
            elif ch in "}]" and stack and stack[-1] == ch:
                stack.pop()
        return text + "".join(reversed(stack))

    if not isinstance(raw, str):
        raise IrreparableResponseError("provider response is not text", ["not text"])

    value = attempt("direct", raw)
    if value is not None:
        return value

    text = raw
    fence = _FENCE_RE.search(text)
    if fence:
        text = fence.group(1)
        value = attempt("fence-strip", text)
        if value is not None:
            return value

    value = attempt("bracket-balance", balanced(text))
    if value is not None:
        return value

    opener = min((i for i in (text.find("{"), text.find("[")) if i >= 0), default=-1)
    if opener >= 0:
        closer = max(text.rfind("}"), text.rfind("]"))
        sliced = text[opener: closer + 1] if closer > opener else text[opener:]
        value = attempt("prose-slice", sliced)
        if value is not None:
            return value
        value = attempt("prose-slice-balance", balanced(sliced))
        if value is not None:
            return value
    raise IrreparableResponseError("provider response is not parseable JSON", attempts)


# ---------------------------------------------------------------------------
# gateway


@dataclass(frozen=True)
class GeneratedModel:
    schema: Schema
    annotations: AnnotationSet
    dependencies: tuple[Dependency, ...]
    data: DataSet

    def to_session(self) -> Session:
        return Session(schema=self.schema, annotations=self.annotations,
                       dependencies=self.dependencies, data=self.data)


class Gateway:
    """Typed entry points over a provider, with validation and repair."""

    def __init__(self, provider, max_repairs: int = 2):
        self.provider = provider
        self.max_repairs = max_repairs
        self.requests_made = 0

    # -- plumbing

    def _context(self, prompts: tuple[str, ...], session: Session | None) -> dict:
        return {
            "prompts": list(prompts),
            "session": session.digest() if session is not None else None,
        }

    def _ask(self, kind: str, payload: dict, context: dict, expected_shape: str = "object"):
        request = ProviderRequest(kind=kind, context=context, payload=payload)
        self.requests_made += 1
        raw = self.provider.complete(request)
        try:
            return repair_json(raw, expected_shape)
        except IrreparableResponseError as exc:
            if not self.provider.live:
                raise
            # one re-ask, live mode only
            retry = ProviderRequest(
                kind=kind, context=context,
                payload={**payload, "repair": {"previous": raw, "error": str(exc)}},
            )
            self.requests_made += 1
            return repair_json(self.provider.complete(retry), expected_shape)

    def _validated(self, kind: str, payload: dict, context: dict, expected_shape, parse, check):
        """Ask, parse, and run the owning validator; re-ask live on failure."""
        notes: list[str] = []
        attempts = 1 + (self.max_repairs if self.provider.live else 0)
        for i in range(attempts):
            body = dict(payload)
            if notes:
                body["repair"] = {"violations": notes[-1]}
            raw = self._ask(kind, body, context, expected_shape)
            try:
                artifact = parse(raw)
                problems = check(artifact)
            except Exception as exc:
                problems = str(exc)
            if not problems:
                return artifact
            notes.append(str(problems))
        raise IrreparableResponseError(
            f"{kind} response failed validation after {attempts} attempt(s)", notes)

    # -- pipeline stages

    def generate_model(self, prompt: str, context_prompts: tuple[str, ...] = ()) -> GeneratedModel:
        """Prompt -> validated schema, annotations, dependencies, and data."""
        if not prompt:
            raise IrreparableResponseError("empty prompt", [])
        context = self._context(context_prompts + (prompt,), None)

        schema = self._validated(
            "GenSchema", {"prompt": prompt}, context, "object",
            parse=Schema.from_json,
            check=lambda s: "; ".join(f"{f.path}: {f.message}" for f in validate_schema(s).findings),
        )
        schema_json = schema.to_json()

        def gen_annotations():
            return self._validated(
                "GenAnnotations", {"prompt": prompt, "schema": schema_json}, context, "object",
                parse=AnnotationSet.from_json,
                check=lambda a: "; ".join(
                    f"{f.path}: {f.message}" for f in validate_annotations(schema, a).findings),
            )

        def gen_dependencies():
            def check(deps):
                build_graph(schema, list(deps))
                return ""
            return self._validated(
                "GenDependencies", {"prompt": prompt, "schema": schema_json}, context, "array",
                parse=lambda raw: tuple(Dependency.from_json(d) for d in raw),
                check=check,
            )

        def gen_data():
            return self._validated(
                "GenData", {"prompt": prompt, "schema": schema_json}, context, "object",
                parse=DataSet.from_json,
                check=lambda d: "; ".join(
                    f"{f.path}: {f.message}" for f in validate_data(schema, d).findings),
            )

        with ThreadPoolExecutor(max_workers=3) as pool:
            fut_ann = pool.submit(gen_annotations)
            fut_dep = pool.submit(gen_dependencies)
            fut_data = pool.submit(gen_data)
            annotations = fut_ann.result()
            dependencies = fut_dep.result()
            data = fut_data.result()

        return GeneratedModel(schema=schema, annotations=annotations,
                              dependencies=dependencies, data=data)

    def parse_followup(self, prompt: str, session: Session,
                       context_prompts: tuple[str, ...] = ()) -> tuple[list[Updater], str]:
        """Prompt -> updater list (possibly empty, with an explanatory note)."""
        context = self._context(context_prompts + (prompt,), session)
        payload = {
            "prompt": prompt,
            "schema": session.schema.to_json(),
            "data_digest": digest(session.data.to_json()),
        }
        raw = self._ask("ParseFollowUp", payload, context, "object")
        updaters = [Updater.from_json(u) for u in raw.get("updaters", [])]
        note = str(raw.get("note", ""))
        known = set(session.schema.entities)
        for i, updater in enumerate(updaters):
            problem = _updater_payload_problem(known, updater)
            if problem:
                raise IrreparableResponseError(
                    f"ParseFollowUp updater {i} is invalid: {problem}", [problem])
        return updaters, note

    def autocomplete_instance(self, session: Session, entity: str, partial: dict,
                              preference: str | None = None) -> dict:
        """Fill the missing attributes of a partial instance.

        Fully specified partials are returned unchanged without any
        provider round trip; provided values are preserved verbatim.
        """
        if entity not in session.schema.entities:
            raise IrreparableResponseError(f"unknown entity {entity!r}", [])
        edef = session.schema.entities[entity]
        missing = [
            a for a in sorted(edef.attributes)
            if a != "id" and partial.get(a) in (None, "", [])
        ]
        if not missing:
            return dict(partial)

        context = self._context((), session)
        payload = {
            "entity": entity,
            "attributes": edef.to_json()["attributes"],
            "partial": {k: partial[k] for k in sorted(partial)},
            "preference": preference,
        }

        def check(values: dict) -> str:
            problems = []
            for aname in sorted(edef.attributes):
                if aname == "id":
                    continue
                attr = edef.attributes[aname]
                value = values.get(aname, empty_value(attr))
                err = _conform(session.schema, session.data, attr, value)
                if err:
                    problems.append(f"{entity}.{aname}: {err}")
            return "; ".join(problems)

        raw = self._validated("AutoComplete", payload, context, "object",
                              parse=lambda r: dict(r.get("values", {})), check=check)
        merged = {}
        for aname in sorted(edef.attributes):
            if aname == "id":
                continue
            if partial.get(aname) not in (None, "", []):
                merged[aname] = partial[aname]
            else:
                merged[aname] = raw.get(aname, empty_value(edef.attributes[aname]))
        return merged

    def nl_executor(self, edge: Dependency, source_value, target_value):
        """Execute a natural-language Update relationship."""
        payload = {
            "relationship": edge.relationship.natural,
            "source": source_value,
            "target": target_value,
            "target_path": edge.target,
        }
        raw = self._ask("NLDependencyExec", payload, {"prompts": [], "session": None}, "object")
        return raw.get("value")

    def semantic_cluster(self, session: Session, target: str,
                         criteria: str | None = None) -> dict:
        """Free-form clustering: the provider returns an explicit assignment map."""
        from .store import get

        values = get(session.schema, session.data, target)
        items = values[0] if len(values) == 1 and isinstance(values[0], list) else values
        payload = {"target": target, "items": items, "criteria": criteria}
        raw = self._ask("SemanticCluster", payload, self._context((), session), "object")
        return {str(k): str(v) for k, v in raw.get("assignments", {}).items()}


def _updater_payload_problem(known_entities: set[str], updater: Updater) -> str:
    """Structural payload validation for provider-produced updaters.

    *known_entities* evolves as the batch is scanned, so later updaters may
    target entities an earlier add-schema introduces.
    """
    from .paths import parse_path
    from .errors import PathSyntaxError

    if updater.action not in ACTIONS:
        return f"unknown action {updater.action!r}"
    try:
        target = parse_path(updater.target)
    except PathSyntaxError as exc:
        return str(exc)
    specs = updater.specifications
    if updater.action == "add-schema":
        if "entity" in specs:
            name = specs["entity"].get("name")
            if not name:
                return "entity payload needs a name"
            known_entities.add(name)
            return ""
        if "attribute" not in specs:
            return "add-schema needs an attribute or entity payload"
        if target.entity not in known_entities:
            return f"unknown entity {target.entity!r}"
        return "" if specs["attribute"].get("name") else "attribute payload needs a name"
    if updater.action in ("remove-schema", "update-schema", "add-data", "remove-data",
                          "update-data", "cluster", "filter", "sort"):
        if updater.action == "update-data" and "value" not in specs and not specs.get("autocomplete"):
            return "update-data needs a value"
        if target.entity not in known_entities:
            return f"unknown entity {target.entity!r}"
        if updater.action == "remove-schema" and not target.steps:
            known_entities.discard(target.entity)
    return ""
