"""Structured data instances conforming to a schema.

A dataset is a pure value: every mutation returns a new dataset and a
list of the paths whose values changed. Object ids are minted from a
per-entity monotonic counter (``DISH-7``) so that replayed sessions are
byte-stable; the counters serialize with the data.
"""

from __future__ import annotations

import copy
import re
from dataclasses import dataclass, field
from typing import Any

from .errors import WriteError
from .model import AttributeDef, ItemSpec, Schema, resolve_path
from .paths import Attr, IdSelector, Index, Path, Star, parse_path
from .reporting import ReportBuilder, ValidationReport

Value = Any

_ID_SUFFIX_RE = re.compile(r"^(.*)-(\d+)$")


def id_sort_key(oid: str) -> tuple:
    """Natural ordering: creation order for counter-minted ids."""
    m = _ID_SUFFIX_RE.match(oid)
    if m:
        return (m.group(1), 0, int(m.group(2)), oid)
    return (oid, 1, 0, oid)


@dataclass(frozen=True)
class Instance:
    entity: str
    id: str
    values: dict[str, Value]

    def to_json(self) -> dict:
        return {"entity": self.entity, "values": self.values}


@dataclass(frozen=True)
class DataSet:
    instances: dict[str, Instance]
    root_instance: str
    counters: dict[str, int] = field(default_factory=dict)

    def instance(self, oid: str) -> Instance:
        try:
            return self.instances[oid]
        except KeyError:
            raise WriteError("unknown-id", f"no instance {oid!r}") from None

    def instances_of(self, entity: str) -> list[Instance]:
        found = [i for i in self.instances.values() if i.entity == entity]
        found.sort(key=lambda i: id_sort_key(i.id))
        return found

    def to_json(self) -> dict:
        return {
            "root": self.root_instance,
            "instances": {oid: inst.to_json() for oid, inst in self.instances.items()},
            "counters": dict(self.counters),
        }

    @classmethod
    def from_json(cls, raw: dict) -> "DataSet":
        if not isinstance(raw, dict):
            raise ValueError("dataset must be an object")
        instances = {
            oid: Instance(entity=body.get("entity", ""), id=oid, values=body.get("values", {}))
            for oid, body in sorted(raw.get("instances", {}).items())
        }
        counters = {str(k): int(v) for k, v in raw.get("counters", {}).items()}
        for oid, inst in instances.items():
            m = _ID_SUFFIX_RE.match(oid)
            if m and m.group(1) == inst.entity:
                counters[inst.entity] = max(counters.get(inst.entity, 0), int(m.group(2)))
        return cls(instances=instances, root_instance=raw.get("root", ""), counters=counters)


@dataclass(frozen=True)
class WriteResult:
    data: DataSet
    changed: tuple[str, ...]


def empty_value(attr: AttributeDef | ItemSpec) -> Value:
    """Kind-appropriate empty value for a freshly created attribute."""
    if attr.kind == "SVAL":
        return "" if attr.hint != "number" else None
    if attr.kind == "PNTR":
        return None
    if attr.kind == "ARRY":
        return []
    if attr.kind == "DICT":
        fields = getattr(attr, "fields", None) or ()
        return {f.name: empty_value(f) for f in fields}
    return None


def _conform(schema: Schema, data: DataSet | None, attr: AttributeDef | ItemSpec, value: Value) -> str | None:
    """Return an error message if *value* does not fit *attr*, else None."""
    if attr.kind == "SVAL":
        if attr.hint == "number":
            if value is not None and (isinstance(value, bool) or not isinstance(value, (int, float))):
                return f"expected a number, got {type(value).__name__}"
        else:
            if not isinstance(value, str):
                return f"expected text, got {type(value).__name__}"
    elif attr.kind == "PNTR":
        if value is None:
            return None
        if not isinstance(value, str):
            return f"expected an object id, got {type(value).__name__}"
        if data is not None:
            inst = data.instances.get(value)
            if inst is None:
                return f"dangling pointer {value!r}"
            if attr.target and inst.entity != attr.target:
                return f"pointer {value!r} is a {inst.entity}, expected {attr.target}"
    elif attr.kind == "ARRY":
        if not isinstance(value, list):
            return f"expected an array, got {type(value).__name__}"
        item = attr.item if isinstance(attr, AttributeDef) else None
        if item is not None:
            ispec = ItemSpec(kind=item.kind, hint=item.hint, target=item.target)
            for i, element in enumerate(value):
                err = _conform(schema, data, ispec, element)
                if err:
                    return f"[{i}]: {err}"
    elif attr.kind == "DICT":
        if not isinstance(value, dict):
            return f"expected an object, got {type(value).__name__}"
        fields = {f.name: f for f in (getattr(attr, "fields", None) or ())}
        for fname in fields:
            if fname not in value:
                return f"missing dictionary field {fname!r}"
        for key in value:
            if key not in fields:
                return f"unknown dictionary field {key!r}"
        for fname, fdef in fields.items():
            err = _conform(schema, data, fdef, value[fname])
            if err:
                return f"{fname}: {err}"
    return None


# ---------------------------------------------------------------------------
# validation


def validate_data(schema: Schema, data: DataSet) -> ValidationReport:
    """Check every instance against the schema and referential integrity."""
    rb = ReportBuilder()
    if data.root_instance not in data.instances:
        rb.add(data.root_instance or "<root>", "root-missing", "root instance does not exist")
    else:
        root = data.instances[data.root_instance]
        if root.entity != schema.root:
            rb.add(data.root_instance, "root-entity-mismatch",
                   f"root instance is a {root.entity!r}, schema root is {schema.root!r}")
    for oid in sorted(data.instances):
        inst = data.instances[oid]
        if inst.id != oid:
            rb.add(oid, "id-mismatch", f"instance keyed {oid!r} carries id {inst.id!r}")
        if inst.entity not in schema.entities:
            rb.add(oid, "unknown-entity", f"instance entity {inst.entity!r} not in schema")
            continue
        entity = schema.entities[inst.entity]
        for aname in sorted(entity.attributes):
            path = f"{inst.entity}[id={oid}].{aname}"
            if aname not in inst.values:
                rb.add(path, "missing-value", "attribute has no value")
                continue
            err = _conform(schema, data, entity.attributes[aname], inst.values[aname])
            if err:
                rule = "dangling-pointer" if "dangling pointer" in err else "type-mismatch"
                rb.add(path, rule, err)
        for key in sorted(inst.values):
            if key not in entity.attributes:
                rb.add(f"{inst.entity}[id={oid}].{key}", "unknown-value",
                       f"value for unknown attribute {key!r}")
        if "id" in entity.attributes and inst.values.get("id") not in (None, "", oid):
            rb.add(f"{inst.entity}[id={oid}].id", "id-attribute-mismatch",
                   f"id attribute {inst.values.get('id')!r} differs from instance id")
    return rb.report()


# ---------------------------------------------------------------------------
# navigation

def canonical_instance_path(schema: Schema, inst: Instance) -> Path:
    if inst.entity == schema.root:
        return Path(inst.entity)
    return Path(inst.entity, (IdSelector(inst.id),))


def _start_instances(schema: Schema, data: DataSet, path: Path) -> list[Instance]:
    if path.entity == schema.root:
        return [data.instance(data.root_instance)]
    return data.instances_of(path.entity)


def get(schema: Schema, data: DataSet, path: Path | str) -> list[Value]:
    """Values at *path*, one per match, in stable order.

    Multiplicity-one paths yield exactly one element; ``[*]`` paths one
    per matched instance or array element. Unset pointers and scalars
    surface as ``None``.
    """
    if isinstance(path, str):
        path = parse_path(path)
    resolve_path(schema, path)  # propagate resolution errors

    steps = list(path.steps)
    instances = _start_instances(schema, data, path)
    if steps and isinstance(steps[0], IdSelector):
        instances = [i for i in instances if i.id == steps[0].value]
        if not instances:
            raise WriteError("unknown-path", f"{path}: no instance {steps[0].value!r}")
        steps.pop(0)
    elif steps and isinstance(steps[0], Star):
        steps.pop(0)  # instances are already fanned out

    cursors: list[Value] = [dict(i.values) for i in instances]
    for step in steps:
        cursors = _apply_step(data, path, cursors, step)
    return [copy.deepcopy(c) for c in cursors]


def _deref(data: DataSet, value: Value) -> Value:
    if isinstance(value, str):
        inst = data.instances.get(value)
        if inst is not None:
            return dict(inst.values)
    return value


def _apply_step(data: DataSet, path: Path, cursors: list[Value], step) -> list[Value]:
    out: list[Value] = []
    for cur in cursors:
        if isinstance(step, Attr):
            cur = _deref(data, cur)
            if cur is None:
                out.append(None)
                continue
            if not isinstance(cur, dict):
                raise WriteError("unknown-path", f"{path}: cannot take .{step.name} here")
            out.append(cur.get(step.name))
        elif isinstance(step, Star):
            if not isinstance(cur, list):
                raise WriteError("unknown-path", f"{path}: [*] applies to arrays")
            out.extend(cur)
        elif isinstance(step, Index):
            if not isinstance(cur, list) or not 0 <= step.value < len(cur):
                raise WriteError("unknown-path", f"{path}: index {step.value} out of range")
            out.append(cur[step.value])
        elif isinstance(step, IdSelector):
            if not isinstance(cur, list):
                raise WriteError("unknown-path", f"{path}: [id=...] applies to pointer arrays")
            hits = [v for v in cur if v == step.value]
            if not hits:
                raise WriteError("unknown-path", f"{path}: no element {step.value!r}")
            out.append(hits[0])
    return out


# ---------------------------------------------------------------------------
# writes


@dataclass(frozen=True)
class _Location:
    """A concrete, writable position inside one instance."""

    instance: Instance
    inner: tuple[Any, ...]  # attr names and integer indexes within values
    definition: AttributeDef | ItemSpec
    annotation_key: str


def _locate(schema: Schema, data: DataSet, path: Path) -> _Location:
    """Resolve *path* to exactly one instance-local position."""
    resolution = resolve_path(schema, path)
    if resolution.multiplicity != "one":
        raise WriteError("unknown-path", f"{path}: writes require a single concrete target")

    instances = _start_instances(schema, data, path)
    steps = list(path.steps)
    if steps and isinstance(steps[0], IdSelector):
        sel = steps.pop(0)
        instances = [i for i in instances if i.id == sel.value]
        if not instances:
            raise WriteError("unknown-path", f"{path}: no instance {sel.value!r}")
    if len(instances) != 1:
        raise WriteError("unknown-path", f"{path}: ambiguous instance")

    owner = instances[0]
    entity = schema.entities[owner.entity]
    inner: list[Any] = []
    definition: AttributeDef | ItemSpec | None = None
    ann_key = ""
    value: Value = dict(owner.values)

    def hop_pointer(oid: Value) -> None:
        nonlocal owner, entity, inner, value
        if not isinstance(oid, str) or oid not in data.instances:
            raise WriteError("unknown-path", f"{path}: unset reference on the way to the target")
        owner = data.instances[oid]
        entity = schema.entities[owner.entity]
        inner = []
        value = dict(owner.values)

    for step in steps:
        if isinstance(step, Attr):
            if definition is None:
                if step.name not in entity.attributes:
                    raise WriteError("unknown-path", f"{path}: no attribute {step.name!r}")
                definition = entity.attributes[step.name]
                ann_key = step.name
                inner.append(step.name)
                value = value.get(step.name) if isinstance(value, dict) else None
            elif definition.kind == "DICT":
                fields = {f.name: f for f in (getattr(definition, "fields", None) or ())}
                if step.name not in fields:
                    raise WriteError("unknown-path", f"{path}: no dictionary field {step.name!r}")
                ann_key = f"{ann_key}.{step.name}"
                definition = fields[step.name]
                inner.append(step.name)
                value = value.get(step.name) if isinstance(value, dict) else None
            elif definition.kind == "PNTR":
                hop_pointer(value)
                if step.name not in entity.attributes:
                    raise WriteError("unknown-path", f"{path}: no attribute {step.name!r}")
                definition = entity.attributes[step.name]
                ann_key = step.name
                inner.append(step.name)
                value = dict(owner.values).get(step.name)
            else:
                raise WriteError("unknown-path", f"{path}: cannot take .{step.name} here")
        elif isinstance(step, (Index, IdSelector)):
            if definition is None or definition.kind != "ARRY":
                raise WriteError("unknown-path", f"{path}: indexing a non-array")
            if not isinstance(value, list):
                raise WriteError("unknown-path", f"{path}: array value missing")
            if isinstance(step, Index):
                if not 0 <= step.value < len(value):
                    raise WriteError("unknown-path", f"{path}: index {step.value} out of range")
                index = step.value
            else:
                try:
                    index = value.index(step.value)
                except ValueError:
                    raise WriteError("unknown-path", f"{path}: no element {step.value!r}") from None
            item = getattr(definition, "item", None)
            inner.append(index)
            value = value[index]
            definition = ItemSpec(kind=item.kind, hint=item.hint, target=item.target) if item else ItemSpec(kind="SVAL")
        else:
            raise WriteError("unknown-path", f"{path}: [*] is not a writable position")

    if definition is None:
        raise WriteError("unknown-path", f"{path}: nothing to write at an entity root")
    return _Location(instance=owner, inner=tuple(inner), definition=definition, annotation_key=ann_key)


def _write_instance(data: DataSet, inst: Instance, values: dict) -> DataSet:
    instances = dict(data.instances)
    instances[inst.id] = Instance(entity=inst.entity, id=inst.id, values=values)
    return DataSet(instances=instances, root_instance=data.root_instance, counters=data.counters)


def set_value(
    schema: Schema,
    data: DataSet,
    path: Path | str,
    value: Value,
    *,
    annotations=None,
    enforce_editable: bool = False,
) -> WriteResult:
    """Write *value* at *path*, returning the new dataset and changed paths.

    Pure: the input dataset is untouched. Writing the current value back
    reports no change. When *enforce_editable* is set, the target's
    annotation must allow edits (the dependency engine writes without it).
    """
    if isinstance(path, str):
        path = parse_path(path)
    loc = _locate(schema, data, path)

    if enforce_editable and annotations is not None:
        ann = annotations.get(loc.instance.entity, loc.annotation_key)
        if ann is not None and ann.editable is False:
            raise WriteError("not-editable", f"{path}: attribute is not editable")

    err = _conform(schema, data, loc.definition, value)
    if err:
        raise WriteError("type-mismatch", f"{path}: {err}")

    new_values = copy.deepcopy(loc.instance.values)
    container: Any = new_values
    for key in loc.inner[:-1]:
        container = container[key]
    last = loc.inner[-1]
    old = container[last] if (isinstance(container, dict) and last in container) or isinstance(container, list) else None
    if old == value:
        return WriteResult(data=data, changed=())
    container[last] = copy.deepcopy(value)

    owner_path = canonical_instance_path(schema, loc.instance)
    changed_path = owner_path
    for key in loc.inner:
        changed_path = changed_path.attr(key) if isinstance(key, str) else changed_path.child(Index(key))
    return WriteResult(data=_write_instance(data, loc.instance, new_values), changed=(str(changed_path),))


def create_instance(
    schema: Schema, data: DataSet, entity: str, partial: dict[str, Value] | None = None
) -> tuple[DataSet, str]:
    """Create an instance of *entity* with a fresh id.

    Attributes missing from *partial* get kind-appropriate empty values.
    """
    if entity not in schema.entities:
        raise WriteError("unknown-entity", f"unknown entity {entity!r}")
    edef = schema.entities[entity]
    partial = dict(partial or {})

    counter = data.counters.get(entity, 0) + 1
    oid = f"{entity}-{counter}"

    values: dict[str, Value] = {}
    for aname in sorted(edef.attributes):
        attr = edef.attributes[aname]
        if aname == "id" and attr.kind == "SVAL":
            supplied = partial.pop("id", None)
            if supplied not in (None, "", oid):
                raise WriteError("type-mismatch", "the id attribute is system-assigned")
            values[aname] = oid
            continue
        if aname in partial:
            value = partial.pop(aname)
            err = _conform(schema, data, attr, value)
            if err:
                raise WriteError("type-mismatch", f"{entity}.{aname}: {err}")
            values[aname] = copy.deepcopy(value)
        else:
            values[aname] = empty_value(attr)
    if partial:
        extra = sorted(partial)[0]
        raise WriteError("type-mismatch", f"{entity} has no attribute {extra!r}")

    instances = dict(data.instances)
    instances[oid] = Instance(entity=entity, id=oid, values=values)
    counters = dict(data.counters)
    counters[entity] = counter
    return DataSet(instances=instances, root_instance=data.root_instance, counters=counters), oid


def delete_instance(schema: Schema, data: DataSet, oid: str) -> WriteResult:
    """Remove an instance and scrub every reference to it.

    Array elements pointing at it are dropped; scalar pointers become the
    unset marker. The root task instance cannot be deleted.
    """
    if oid not in data.instances:
        raise WriteError("unknown-id", f"no instance {oid!r}")
    if oid == data.root_instance:
        raise WriteError("cannot-delete-root", "the root task instance cannot be deleted")

    changed: list[str] = [str(canonical_instance_path(schema, data.instances[oid]))]
    instances = {k: v for k, v in data.instances.items() if k != oid}
    for key in sorted(instances):
        inst = instances[key]
        entity = schema.entities.get(inst.entity)
        if entity is None:
            continue
        new_values = None
        for aname, attr in entity.attributes.items():
            value = inst.values.get(aname)
            if attr.kind == "PNTR" and value == oid:
                new_values = new_values or copy.deepcopy(inst.values)
                new_values[aname] = None
                changed.append(str(canonical_instance_path(schema, inst).attr(aname)))
            elif attr.kind == "ARRY" and attr.item and attr.item.kind == "PNTR":
                if isinstance(value, list) and oid in value:
                    new_values = new_values or copy.deepcopy(inst.values)
                    new_values[aname] = [v for v in value if v != oid]
                    changed.append(str(canonical_instance_path(schema, inst).attr(aname)))
        if new_values is not None:
            instances[key] = Instance(entity=inst.entity, id=inst.id, values=new_values)

    out = DataSet(instances=instances, root_instance=data.root_instance, counters=data.counters)
    return WriteResult(data=out, changed=tuple(changed))
