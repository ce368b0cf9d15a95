"""Schema diffing and data migration.

A delta is minimal under path identity: an attribute present in both
schemas with an equal definition appears in no bucket. Entries carry the
definitions they talk about, so applying a delta to a schema or moving a
dataset across it needs no other context.
"""

from __future__ import annotations

from dataclasses import dataclass

from .model import AttributeDef, EntityDef, Schema
from .store import DataSet, Instance, delete_instance, empty_value, _conform


@dataclass(frozen=True)
class SchemaDelta:
    added_entities: tuple[EntityDef, ...] = ()
    removed_entities: tuple[EntityDef, ...] = ()
    added: tuple[tuple[str, AttributeDef], ...] = ()  # ("ENTITY.attr", def)
    removed: tuple[tuple[str, AttributeDef], ...] = ()
    changed: tuple[tuple[str, AttributeDef, AttributeDef], ...] = ()  # (path, old, new)
    root_change: tuple[str, str] | None = None

    @property
    def empty(self) -> bool:
        return not (
            self.added_entities or self.removed_entities or self.added
            or self.removed or self.changed or self.root_change
        )

    def to_json(self) -> dict:
        return {
            "added_entities": [e.name for e in self.added_entities],
            "removed_entities": [e.name for e in self.removed_entities],
            "added": [path for path, _ in self.added],
            "removed": [path for path, _ in self.removed],
            "changed": [path for path, _, _ in self.changed],
            "root_change": list(self.root_change) if self.root_change else None,
        }


def diff_schemas(old: Schema, new: Schema) -> SchemaDelta:
    """Structural difference between two valid schemas."""
    added_entities = tuple(new.entities[n] for n in sorted(new.entities) if n not in old.entities)
    removed_entities = tuple(old.entities[n] for n in sorted(old.entities) if n not in new.entities)
    added: list[tuple[str, AttributeDef]] = []
    removed: list[tuple[str, AttributeDef]] = []
    changed: list[tuple[str, AttributeDef, AttributeDef]] = []
    for ename in sorted(old.entities):
        if ename not in new.entities:
            continue
        old_attrs = old.entities[ename].attributes
        new_attrs = new.entities[ename].attributes
        for aname in sorted(new_attrs):
            path = f"{ename}.{aname}"
            if aname not in old_attrs:
                added.append((path, new_attrs[aname]))
            elif old_attrs[aname].to_json() != new_attrs[aname].to_json():
                changed.append((path, old_attrs[aname], new_attrs[aname]))
        for aname in sorted(old_attrs):
            if aname not in new_attrs:
                removed.append((f"{ename}.{aname}", old_attrs[aname]))
    return SchemaDelta(
        added_entities=added_entities,
        removed_entities=removed_entities,
        added=tuple(added),
        removed=tuple(removed),
        changed=tuple(changed),
        root_change=(old.root, new.root) if old.root != new.root else None,
    )


def apply_delta(schema: Schema, delta: SchemaDelta) -> Schema:
    """Apply *delta* to *schema*; inverse direction of :func:`diff_schemas`."""
    entities = {name: e for name, e in schema.entities.items()}
    for e in delta.removed_entities:
        entities.pop(e.name, None)
    for e in delta.added_entities:
        entities[e.name] = e
    for path, _ in delta.removed:
        ename, aname = path.split(".", 1)
        if ename in entities:
            attrs = dict(entities[ename].attributes)
            attrs.pop(aname, None)
            entities[ename] = EntityDef(name=ename, attributes=attrs)
    for path, attr in delta.added:
        ename, aname = path.split(".", 1)
        if ename in entities:
            attrs = dict(entities[ename].attributes)
            attrs[aname] = attr
            entities[ename] = EntityDef(name=ename, attributes=attrs)
    for path, _, new_attr in delta.changed:
        ename, aname = path.split(".", 1)
        if ename in entities:
            attrs = dict(entities[ename].attributes)
            attrs[aname] = new_attr
            entities[ename] = EntityDef(name=ename, attributes=attrs)
    root = delta.root_change[1] if delta.root_change else schema.root
    entities = {name: entities[name] for name in sorted(entities)}
    return Schema(entities=entities, root=root)


def migrate_data(data: DataSet, delta: SchemaDelta, schema: Schema) -> DataSet:
    """Carry *data* across *delta*.

    *schema* is the pre-delta schema the data currently conforms to (it is
    needed to scrub references when entities disappear). Added attributes
    appear on every instance with empty values, removed ones are dropped,
    untouched values are preserved as-is.
    """
    # instances of removed entities go first, scrubbing references as they leave
    for edef in delta.removed_entities:
        for inst in data.instances_of(edef.name):
            data = delete_instance(schema, data, inst.id).data

    new_schema = apply_delta(schema, delta)
    removed_by_entity: dict[str, set[str]] = {}
    for path, _ in delta.removed:
        ename, aname = path.split(".", 1)
        removed_by_entity.setdefault(ename, set()).add(aname)
    added_by_entity: dict[str, list[AttributeDef]] = {}
    for path, attr in delta.added:
        ename, _ = path.split(".", 1)
        added_by_entity.setdefault(ename, []).append(attr)
    changed_by_entity: dict[str, list[tuple[AttributeDef, AttributeDef]]] = {}
    for path, old_attr, new_attr in delta.changed:
        ename, _ = path.split(".", 1)
        changed_by_entity.setdefault(ename, []).append((old_attr, new_attr))

    instances: dict[str, Instance] = {}
    for oid in sorted(data.instances):
        inst = data.instances[oid]
        values = dict(inst.values)
        for aname in removed_by_entity.get(inst.entity, ()):
            values.pop(aname, None)
        for attr in added_by_entity.get(inst.entity, ()):
            values[attr.name] = empty_value(attr)
        for _, new_attr in changed_by_entity.get(inst.entity, ()):
            current = values.get(new_attr.name)
            if _conform(new_schema, None, new_attr, current) is not None:
                values[new_attr.name] = empty_value(new_attr)
        instances[oid] = Instance(entity=inst.entity, id=inst.id, values=values)
    return DataSet(instances=instances, root_instance=data.root_instance, counters=data.counters)
