"""Updaters: the atomic mutation unit for sessions.

Every change — whether parsed from a prompt or translated from a direct
manipulation gesture — is a ``{target, action, specifications}`` triple.
Schema actions migrate the data alongside; data actions pass through the
dependency engine (validate edges may reject, update edges propagate);
cluster/filter set non-destructive view metadata; sort reorders arrays
physically but never changes the multiset of values.

``apply_updater`` either returns a fully consistent new session or raises
with the input session untouched. ``apply_batch`` is atomic end to end.
"""

from __future__ import annotations

from dataclasses import dataclass

from .delta import diff_schemas, migrate_data
from .errors import (
    ExprError,
    PathResolutionError,
    PathSyntaxError,
    TaskmoldError,
    UpdaterError,
    WriteError,
)
from .expr import parse_expression
from .graph import DEFAULT_BUDGET, ExecutionBudget, check_write, propagate
from .model import Annotation, AnnotationSet, AttributeDef, EntityDef, Schema, resolve_path
from .paths import IdSelector, Index, Path, parse_path
from .session import Session, validate_session
from .store import create_instance, delete_instance, get, set_value
from .uidoc import REPRESENTATIONS, compile_entity_panel

ACTIONS = (
    "add-schema", "remove-schema", "update-schema",
    "add-data", "remove-data", "update-data",
    "cluster", "filter", "sort",
)


@dataclass(frozen=True)
class Updater:
    target: str
    action: str
    specifications: dict

    def to_json(self) -> dict:
        return {"target": self.target, "action": self.action, "specifications": self.specifications}

    @classmethod
    def from_json(cls, raw: dict) -> "Updater":
        return cls(
            target=raw.get("target", ""),
            action=raw.get("action", ""),
            specifications=dict(raw.get("specifications", {})),
        )


@dataclass(frozen=True)
class RepresentationDirective:
    """switch-representation is a view concern, not a model mutation."""

    entity: str
    representation: str


def _fail(code: str, message: str, details=None) -> UpdaterError:
    return UpdaterError(code, message, details)


def _parse_target(text: str) -> Path:
    try:
        return parse_path(text)
    except PathSyntaxError as exc:
        raise _fail("unknown-target", str(exc)) from exc


def _resolve_target(session: Session, text: str):
    try:
        return resolve_path(session.schema, text)
    except (PathSyntaxError, PathResolutionError) as exc:
        raise _fail("unknown-target", str(exc)) from exc


def _finish(session: Session) -> Session:
    report = validate_session(session)
    if not report.ok:
        raise _fail("validation-rejection", "updater leaves the session inconsistent",
                    details=report.to_json())
    return session


# ---------------------------------------------------------------------------
# schema actions


def _annotation_payload(specs: dict, attr: AttributeDef) -> dict[str, Annotation]:
    out: dict[str, Annotation] = {}
    if "annotation" in specs:
        out[attr.name] = Annotation.from_json(specs["annotation"])
    for key, raw in specs.get("annotations", {}).items():
        out[key] = Annotation.from_json(raw)
    if not out:
        raise _fail("payload-mismatch", "add-schema requires an annotation for the new attribute")
    return out


def _with_entity(schema: Schema, entity: EntityDef) -> Schema:
    entities = dict(schema.entities)
    entities[entity.name] = entity
    return Schema(entities={k: entities[k] for k in sorted(entities)}, root=schema.root)


def _set_annotations(annotations: AnnotationSet, entity: str, updates: dict[str, Annotation],
                     drop: tuple[str, ...] = ()) -> AnnotationSet:
    entities = {k: dict(v) for k, v in annotations.entities.items()}
    bucket = entities.setdefault(entity, {})
    for key in drop:
        bucket.pop(key, None)
    bucket.update(updates)
    if not bucket:
        entities.pop(entity, None)
    return AnnotationSet(entities=entities)


def _drop_entity_annotations(annotations: AnnotationSet, entity: str) -> AnnotationSet:
    entities = {k: dict(v) for k, v in annotations.entities.items() if k != entity}
    return AnnotationSet(entities=entities)


def _prune_dangling(session: Session) -> Session:
    """Drop dependencies and views whose paths no longer resolve."""
    kept = []
    for dep in session.dependencies:
        try:
            resolve_path(session.schema, dep.source)
            resolve_path(session.schema, dep.target)
            kept.append(dep)
        except (PathSyntaxError, PathResolutionError):
            continue
    views = {}
    for key, view in session.views.items():
        try:
            resolve_path(session.schema, key)
            views[key] = view
        except (PathSyntaxError, PathResolutionError):
            continue
    representations = {e: r for e, r in session.representations.items() if e in session.schema.entities}
    return session.with_parts(dependencies=tuple(kept), views=views, representations=representations)


def _apply_add_schema(session: Session, updater: Updater) -> Session:
    specs = updater.specifications
    target = _parse_target(updater.target)
    if "entity" in specs:
        body = specs["entity"]
        name = body.get("name") or target.entity
        if target.steps or (updater.target and target.entity != name):
            raise _fail("payload-mismatch", "entity additions target the new entity name")
        if name in session.schema.entities:
            raise _fail("payload-mismatch", f"entity {name!r} already exists")
        entity = EntityDef.from_json(name, {"attributes": body.get("attributes", {})})
        schema = _with_entity(session.schema, entity)
        anns = {k: Annotation.from_json(v) for k, v in body.get("annotations", {}).items()}
        annotations = _set_annotations(session.annotations, name, anns)
        return _finish(session.with_parts(schema=schema, annotations=annotations))

    if "attribute" not in specs:
        raise _fail("payload-mismatch", "add-schema carries either an entity or an attribute")
    if target.steps or target.entity not in session.schema.entities:
        raise _fail("unknown-target", f"add-schema targets an existing entity, got {updater.target!r}")
    raw = specs["attribute"]
    name = raw.get("name", "")
    entity = session.schema.entities[target.entity]
    if name in entity.attributes:
        raise _fail("payload-mismatch", f"attribute {name!r} already exists on {target.entity}")
    attr = AttributeDef.from_json(name, raw)
    new_entity = EntityDef(name=entity.name, attributes={**entity.attributes, name: attr})
    schema = _with_entity(session.schema, new_entity)
    annotations = _set_annotations(session.annotations, target.entity, _annotation_payload(specs, attr))
    data = migrate_data(session.data, diff_schemas(session.schema, schema), session.schema)
    return _finish(session.with_parts(schema=schema, annotations=annotations, data=data))


def _apply_remove_schema(session: Session, updater: Updater) -> Session:
    target = _parse_target(updater.target)
    schema = session.schema
    if target.is_entity_root:
        if target.entity == schema.root:
            raise _fail("payload-mismatch", "the root task entity cannot be removed")
        if target.entity not in schema.entities:
            raise _fail("unknown-target", f"unknown entity {target.entity!r}")
        entities = {k: v for k, v in schema.entities.items() if k != target.entity}
        new_schema = Schema(entities=entities, root=schema.root)
        data = migrate_data(session.data, diff_schemas(schema, new_schema), schema)
        out = session.with_parts(
            schema=new_schema,
            annotations=_drop_entity_annotations(session.annotations, target.entity),
            data=data,
        )
        return _finish(_prune_dangling(out))

    first = target.first_attr
    if len(target.steps) != 1 or first is None:
        raise _fail("unknown-target", f"remove-schema targets ENTITY or ENTITY.attr, got {updater.target!r}")
    if target.entity not in schema.entities or first not in schema.entities[target.entity].attributes:
        raise _fail("unknown-target", f"no attribute {updater.target!r}")
    entity = schema.entities[target.entity]
    attrs = {k: v for k, v in entity.attributes.items() if k != first}
    new_schema = _with_entity(schema, EntityDef(name=entity.name, attributes=attrs))
    drop = tuple(k for k in session.annotations.entities.get(target.entity, {})
                 if k == first or k.startswith(first + "."))
    annotations = _set_annotations(session.annotations, target.entity, {}, drop=drop)
    data = migrate_data(session.data, diff_schemas(schema, new_schema), schema)
    out = session.with_parts(schema=new_schema, annotations=annotations, data=data)
    return _finish(_prune_dangling(out))


def _apply_update_schema(session: Session, updater: Updater) -> Session:
    specs = updater.specifications
    target = _parse_target(updater.target)
    first = target.first_attr
    if len(target.steps) != 1 or first is None:
        raise _fail("unknown-target", f"update-schema targets ENTITY.attr, got {updater.target!r}")
    if target.entity not in session.schema.entities \
            or first not in session.schema.entities[target.entity].attributes:
        raise _fail("unknown-target", f"no attribute {updater.target!r}")
    if "attribute" not in specs and "annotation" not in specs and "annotations" not in specs:
        raise _fail("payload-mismatch", "update-schema carries a new attribute and/or annotation")

    schema = session.schema
    annotations = session.annotations
    data = session.data
    if "attribute" in specs:
        entity = schema.entities[target.entity]
        attr = AttributeDef.from_json(first, specs["attribute"])
        schema = _with_entity(schema, EntityDef(
            name=entity.name, attributes={**entity.attributes, first: attr}))
        data = migrate_data(data, diff_schemas(session.schema, schema), session.schema)
    updates: dict[str, Annotation] = {}
    if "annotation" in specs:
        updates[first] = Annotation.from_json(specs["annotation"])
    for key, raw in specs.get("annotations", {}).items():
        updates[key] = Annotation.from_json(raw)
    if updates:
        annotations = _set_annotations(annotations, target.entity, updates)
    return _finish(session.with_parts(schema=schema, annotations=annotations, data=data))


# ---------------------------------------------------------------------------
# data actions


def _editable_guard(session: Session, entity: str, key: str, actor: str, path: str) -> None:
    if actor != "user":
        return
    ann = session.annotations.get(entity, key)
    if ann is not None and ann.editable is False:
        raise _fail("validation-rejection", f"{path}: attribute is not editable",
                    details=[{"path": path, "rule": "not-editable", "message": "attribute is not editable"}])


def _run_write(session: Session, path: str, value, *, actor: str, gateway, budget: ExecutionBudget) -> Session:
    _resolve_target(session, path)
    graph = session.graph()
    executor = gateway.nl_executor if gateway is not None else None
    try:
        check = check_write(graph, session.schema, session.data, path, value, budget,
                            nl_executor=executor)
    except WriteError as exc:
        raise _fail("unknown-target" if exc.code == "unknown-path" else "payload-mismatch",
                    str(exc)) from exc
    if not check.accepted:
        raise _fail("validation-rejection", f"write to {path} rejected",
                    details=[v.to_json() for v in check.violations])
    try:
        result = set_value(session.schema, session.data, path, value,
                           annotations=session.annotations, enforce_editable=actor == "user")
    except WriteError as exc:
        if exc.code == "not-editable":
            raise _fail("validation-rejection", str(exc), details=[
                {"path": path, "rule": "not-editable", "message": str(exc)}]) from exc
        raise _fail("unknown-target" if exc.code == "unknown-path" else "payload-mismatch",
                    str(exc)) from exc
    prop = propagate(graph, session.schema, result.data, list(result.changed), budget,
                     nl_executor=executor)
    return session.with_parts(data=prop.data)


def _propagate_after(session: Session, changed: list[str], gateway, budget: ExecutionBudget) -> Session:
    graph = session.graph()
    executor = gateway.nl_executor if gateway is not None else None
    prop = propagate(graph, session.schema, session.data, changed, budget, nl_executor=executor)
    return session.with_parts(data=prop.data)


def _apply_add_data(session: Session, updater: Updater, *, actor: str, gateway,
                    budget: ExecutionBudget) -> Session:
    specs = updater.specifications
    res = _resolve_target(session, updater.target)

    def build_instance(entity: str) -> tuple[Session, str]:
        values = dict(specs.get("values", {}))
        if specs.get("generate") or specs.get("autocomplete"):
            if gateway is None:
                raise _fail("payload-mismatch", "generated items need a provider gateway")
            values = gateway.autocomplete_instance(session, entity, values,
                                                   preference=specs.get("preference"))
        try:
            data, oid = create_instance(session.schema, session.data, entity, values)
        except WriteError as exc:
            raise _fail("payload-mismatch", str(exc)) from exc
        return session.with_parts(data=data), oid

    if res.kind == "entity-root":
        out, _ = build_instance(res.entity)
        return _finish(_propagate_after(out, [updater.target], gateway, budget))

    if res.kind != "ARRY" or res.multiplicity != "one":
        raise _fail("unknown-target", f"add-data targets an entity or one array, got {updater.target!r}")
    key = res.attribute.name if res.attribute else ""
    _editable_guard(session, res.entity, key, actor, updater.target)
    current = get(session.schema, session.data, updater.target)[0]
    current = list(current) if isinstance(current, list) else []
    item = res.attribute.item if res.attribute else None

    out = session
    if item is not None and item.kind == "PNTR":
        if "ref" in specs:
            oid = specs["ref"]
            inst = session.data.instances.get(oid)
            if inst is None or inst.entity != item.target:
                raise _fail("payload-mismatch", f"{oid!r} is not an instance of {item.target}")
        else:
            out, oid = build_instance(item.target or "")
        current.append(oid)
    else:
        current.append(specs.get("value", "" if (item is None or item.hint != "number") else None))
    return _finish(_run_write(out, updater.target, current, actor="system", gateway=gateway, budget=budget))


def _apply_remove_data(session: Session, updater: Updater, *, actor: str, gateway,
                       budget: ExecutionBudget) -> Session:
    target = _parse_target(updater.target)
    _resolve_target(session, updater.target)

    if len(target.steps) == 1 and isinstance(target.steps[0], IdSelector):
        oid = target.steps[0].value
        try:
            result = delete_instance(session.schema, session.data, oid)
        except WriteError as exc:
            code = "unknown-target" if exc.code == "unknown-id" else "payload-mismatch"
            raise _fail(code, str(exc)) from exc
        out = session.with_parts(data=result.data)
        return _finish(_propagate_after(out, list(result.changed), gateway, budget))

    if target.steps and isinstance(target.steps[-1], (Index, IdSelector)):
        parent = Path(target.entity, target.steps[:-1])
        res = _resolve_target(session, str(parent))
        if res.kind != "ARRY":
            raise _fail("unknown-target", f"remove-data element target must index an array")
        key = res.attribute.name if res.attribute else ""
        _editable_guard(session, res.entity, key, actor, updater.target)
        current = list(get(session.schema, session.data, str(parent))[0])
        last = target.steps[-1]
        if isinstance(last, Index):
            if not 0 <= last.value < len(current):
                raise _fail("unknown-target", f"index {last.value} out of range")
            current.pop(last.value)
        else:
            if last.value not in current:
                raise _fail("unknown-target", f"no element {last.value!r}")
            current.remove(last.value)
        return _finish(_run_write(session, str(parent), current, actor="system",
                                  gateway=gateway, budget=budget))

    raise _fail("unknown-target",
                f"remove-data targets ENTITY[id=...] or an array element, got {updater.target!r}")


def _apply_update_data(session: Session, updater: Updater, *, actor: str, gateway,
                       budget: ExecutionBudget) -> Session:
    specs = updater.specifications
    if specs.get("autocomplete"):
        target = _parse_target(updater.target)
        if len(target.steps) != 1 or not isinstance(target.steps[0], IdSelector):
            raise _fail("unknown-target", "autocomplete targets ENTITY[id=...]")
        oid = target.steps[0].value
        inst = session.data.instances.get(oid)
        if inst is None:
            raise _fail("unknown-target", f"no instance {oid!r}")
        if gateway is None:
            raise _fail("payload-mismatch", "autocomplete needs a provider gateway")
        partial = {k: v for k, v in inst.values.items() if v not in (None, "", [])}
        completed = gateway.autocomplete_instance(session, inst.entity, partial,
                                                  preference=specs.get("preference"))
        out = session
        for key in sorted(completed):
            if key == "id":
                continue
            if completed[key] == inst.values.get(key):
                continue
            out = _run_write(out, f"{updater.target}.{key}", completed[key],
                             actor="system", gateway=gateway, budget=budget)
        return _finish(out)

    if "value" not in specs:
        raise _fail("payload-mismatch", "update-data requires a value")
    return _finish(_run_write(session, updater.target, specs["value"],
                              actor=actor, gateway=gateway, budget=budget))


# ---------------------------------------------------------------------------
# view actions


def _set_view(session: Session, key: str, name: str, value) -> Session:
    views = {k: dict(v) for k, v in session.views.items()}
    view = views.setdefault(key, {})
    if value is None:
        view.pop(name, None)
        if not view:
            views.pop(key, None)
    else:
        view[name] = value
    return session.with_parts(views=views)


def _apply_cluster(session: Session, updater: Updater, gateway) -> Session:
    specs = updater.specifications
    res = _resolve_target(session, updater.target)
    if res.kind not in ("ARRY", "entity-root"):
        raise _fail("unknown-target", "cluster targets an array or an entity")
    if "assignments" in specs:
        cluster = {"assignments": dict(specs["assignments"])}
    elif "field" in specs:
        cluster = {"field": specs["field"]}
    elif specs.get("semantic"):
        if gateway is None:
            raise _fail("payload-mismatch", "semantic clustering needs a provider gateway")
        assignments = gateway.semantic_cluster(session, updater.target,
                                               criteria=specs.get("criteria"))
        cluster = {"assignments": assignments}
    else:
        raise _fail("payload-mismatch", "cluster needs a field, assignments, or semantic: true")
    return _finish(_set_view(session, updater.target, "cluster", cluster))


def _apply_filter(session: Session, updater: Updater) -> Session:
    specs = updater.specifications
    res = _resolve_target(session, updater.target)
    if res.kind != "ARRY":
        raise _fail("unknown-target", "filter targets an array")
    predicate = specs.get("predicate")
    if predicate is None:
        return _finish(_set_view(session, updater.target, "filter", None))
    try:
        parse_expression(predicate)
    except ExprError as exc:
        raise _fail("payload-mismatch", f"filter predicate does not parse: {exc}") from exc
    return _finish(_set_view(session, updater.target, "filter", predicate))


def _apply_sort(session: Session, updater: Updater, *, actor: str, gateway,
                budget: ExecutionBudget) -> Session:
    specs = updater.specifications
    direction = specs.get("direction", "asc")
    if direction not in ("asc", "desc"):
        raise _fail("payload-mismatch", f"direction must be asc or desc, got {direction!r}")
    res = _resolve_target(session, updater.target)

    if res.kind == "entity-root" and res.path.is_entity_root:
        if "field" not in specs:
            raise _fail("payload-mismatch", "entity sorts need a field")
        return _finish(_set_view(session, updater.target, "sort",
                                 {"field": specs["field"], "direction": direction}))

    if res.kind != "ARRY" or res.multiplicity != "one":
        raise _fail("unknown-target", "sort targets one array or an entity")
    current = list(get(session.schema, session.data, updater.target)[0])
    item = res.attribute.item if res.attribute else None
    if item is not None and item.kind == "PNTR":
        fname = specs.get("field")
        if not fname:
            raise _fail("payload-mismatch", "pointer array sorts need a field")

        def key_fn(oid):
            inst = session.data.instances.get(oid)
            value = inst.values.get(fname) if inst else None
            return (value is None, value if isinstance(value, (int, float, str)) else str(value))
    else:
        def key_fn(value):
            return (value is None, value)
    ordered = sorted(current, key=key_fn, reverse=direction == "desc")
    return _finish(_run_write(session, updater.target, ordered, actor="system",
                              gateway=gateway, budget=budget))


# ---------------------------------------------------------------------------
# entry points


def apply_updater(session: Session, updater: Updater, *, gateway=None,
                  budget: ExecutionBudget = DEFAULT_BUDGET, actor: str = "system") -> Session:
    """Apply one updater, returning a new consistent session.

    Raises :class:`~taskmold.errors.UpdaterError` on any failure; the input
    session is never modified.
    """
    if updater.action not in ACTIONS:
        raise _fail("payload-mismatch", f"unknown action {updater.action!r}")
    if updater.action == "add-schema":
        return _apply_add_schema(session, updater)
    if updater.action == "remove-schema":
        return _apply_remove_schema(session, updater)
    if updater.action == "update-schema":
        return _apply_update_schema(session, updater)
    if updater.action == "add-data":
        return _apply_add_data(session, updater, actor=actor, gateway=gateway, budget=budget)
    if updater.action == "remove-data":
        return _apply_remove_data(session, updater, actor=actor, gateway=gateway, budget=budget)
    if updater.action == "update-data":
        return _apply_update_data(session, updater, actor=actor, gateway=gateway, budget=budget)
    if updater.action == "cluster":
        return _apply_cluster(session, updater, gateway)
    if updater.action == "filter":
        return _apply_filter(session, updater)
    return _apply_sort(session, updater, actor=actor, gateway=gateway, budget=budget)


def apply_batch(session: Session, updaters: list[Updater], *, gateway=None,
                budget: ExecutionBudget = DEFAULT_BUDGET, actor: str = "system") -> Session:
    """All updaters in order, or none: the first failure aborts the batch."""
    if not updaters:
        raise _fail("payload-mismatch", "empty updater batch")
    out = session
    for i, updater in enumerate(updaters):
        try:
            out = apply_updater(out, updater, gateway=gateway, budget=budget, actor=actor)
        except UpdaterError as exc:
            raise UpdaterError(exc.code, f"updater {i} failed: {exc}", exc.details) from exc
    return out


EVENT_TYPES = (
    "edit-value", "delete-attribute", "add-generate-item", "add-empty-item",
    "autocomplete-item", "switch-representation", "sort-column",
)


def translate_event(session: Session, event: dict) -> Updater | RepresentationDirective:
    """Map a direct-manipulation gesture onto its equivalent updater."""
    etype = event.get("type")
    if etype == "edit-value":
        return Updater(target=event.get("path", ""), action="update-data",
                       specifications={"value": event.get("value")})
    if etype == "delete-attribute":
        return Updater(target=event.get("path", ""), action="remove-schema", specifications={})
    if etype == "add-generate-item":
        specs: dict = {"generate": True}
        if event.get("preference"):
            specs["preference"] = event["preference"]
        return Updater(target=event.get("path", ""), action="add-data", specifications=specs)
    if etype == "add-empty-item":
        return Updater(target=event.get("path", ""), action="add-data", specifications={"empty": True})
    if etype == "autocomplete-item":
        oid = event.get("object", "")
        inst = session.data.instances.get(oid)
        if inst is None:
            raise _fail("unknown-target", f"no instance {oid!r}")
        specs = {"autocomplete": True}
        if event.get("preference"):
            specs["preference"] = event["preference"]
        return Updater(target=f"{inst.entity}[id={oid}]", action="update-data", specifications=specs)
    if etype == "switch-representation":
        entity = event.get("entity", "")
        representation = event.get("representation", "")
        if representation not in REPRESENTATIONS:
            raise _fail("unsupported-event", f"unknown representation {representation!r}")
        return RepresentationDirective(entity=entity, representation=representation)
    if etype == "sort-column":
        specs = {"field": event.get("field"), "direction": event.get("direction", "asc")}
        return Updater(target=event.get("path", ""), action="sort", specifications=specs)
    raise _fail("unsupported-event", f"unsupported event type {etype!r}")


def apply_directive(session: Session, directive: RepresentationDirective) -> Session:
    """Record a representation switch, verifying the panel actually compiles."""
    try:
        compile_entity_panel(session.schema, session.annotations, session.data,
                             directive.entity, directive.representation, session.views)
    except TaskmoldError as exc:
        raise _fail("validation-rejection", str(exc)) from exc
    representations = dict(session.representations)
    representations[directive.entity] = directive.representation
    return session.with_parts(representations=representations)
