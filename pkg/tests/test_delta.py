from __future__ import annotations

import random

from taskmold import Schema, apply_delta, diff_schemas, migrate_data, validate_data, validate_schema
from taskmold.canonical import canon_compact

from .conftest import load_json
from . import randgen


def test_diff_identity(dinner_schema):
    assert diff_schemas(dinner_schema, dinner_schema).empty


def test_diff_added_attribute(dinner_schema):
    raw = load_json("dinner_schema.json")
    raw["entities"]["DISH"]["attributes"]["dietary_suitability"] = {"kind": "SVAL", "hint": "text"}
    delta = diff_schemas(dinner_schema, Schema.from_json(raw))
    assert [path for path, _ in delta.added] == ["DISH.dietary_suitability"]
    assert not delta.removed and not delta.changed and not delta.added_entities


def test_diff_removed_attribute(dinner_schema):
    raw = load_json("dinner_schema.json")
    del raw["entities"]["DINNER_PLAN"]["attributes"]["location"]
    delta = diff_schemas(dinner_schema, Schema.from_json(raw))
    assert [path for path, _ in delta.removed] == ["DINNER_PLAN.location"]
    assert not delta.added and not delta.changed


def test_diff_then_apply_round_trip_randomized():
    for seed in range(40):
        rng = random.Random(seed)
        a = randgen.make_schema(rng)
        b = randgen.make_schema(random.Random(seed + 1000))
        delta = diff_schemas(a, b)
        rebuilt = apply_delta(a, delta)
        assert canon_compact(rebuilt.to_json()) == canon_compact(b.to_json()), f"seed {seed}"
        assert diff_schemas(b, rebuilt).empty


def test_migrate_adds_empty_field(dinner_schema, dinner_data):
    raw = load_json("dinner_schema.json")
    raw["entities"]["DISH"]["attributes"]["dietary_suitability"] = {"kind": "SVAL", "hint": "text"}
    new_schema = Schema.from_json(raw)
    delta = diff_schemas(dinner_schema, new_schema)
    migrated = migrate_data(dinner_data, delta, dinner_schema)
    dishes = migrated.instances_of("DISH")
    assert len(dishes) == 3
    assert all(d.values["dietary_suitability"] == "" for d in dishes)
    assert validate_data(new_schema, migrated).ok


def test_migrate_empty_delta_is_identity(dinner_schema, dinner_data):
    delta = diff_schemas(dinner_schema, dinner_schema)
    migrated = migrate_data(dinner_data, delta, dinner_schema)
    assert canon_compact(migrated.to_json()) == canon_compact(dinner_data.to_json())


def test_migrate_removes_field_preserving_rest(dinner_schema, dinner_data):
    raw = load_json("dinner_schema.json")
    del raw["entities"]["DINNER_PLAN"]["attributes"]["location"]
    new_schema = Schema.from_json(raw)
    delta = diff_schemas(dinner_schema, new_schema)
    migrated = migrate_data(dinner_data, delta, dinner_schema)
    root = migrated.instance("DINNER_PLAN-1")
    assert "location" not in root.values
    original = dinner_data.instance("DINNER_PLAN-1")
    kept = {k: v for k, v in original.values.items() if k != "location"}
    assert canon_compact(root.values) == canon_compact(kept)
    assert validate_data(new_schema, migrated).ok


def test_migrate_removed_entity_scrubs_references(shopping_session):
    schema, data = shopping_session.schema, shopping_session.data
    raw = schema.to_json()
    del raw["entities"]["STORE"]
    del raw["entities"]["SHOPPING_ITEM"]["attributes"]["store"]
    new_schema = Schema.from_json(raw)
    assert validate_schema(new_schema).ok
    delta = diff_schemas(schema, new_schema)
    migrated = migrate_data(data, delta, schema)
    assert not migrated.instances_of("STORE")
    assert validate_data(new_schema, migrated).ok


def test_migrate_changed_kind_resets_value(dinner_schema, dinner_data):
    raw = load_json("dinner_schema.json")
    raw["entities"]["DINNER_PLAN"]["attributes"]["location"] = {"kind": "SVAL", "hint": "number"}
    new_schema = Schema.from_json(raw)
    delta = diff_schemas(dinner_schema, new_schema)
    assert [path for path, _, _ in delta.changed] == ["DINNER_PLAN.location"]
    migrated = migrate_data(dinner_data, delta, dinner_schema)
    assert migrated.instance("DINNER_PLAN-1").values["location"] is None
    assert validate_data(new_schema, migrated).ok


def test_migrate_random_round_trips():
    for seed in range(30):
        rng = random.Random(seed)
        schema = randgen.make_schema(rng)
        data = randgen.make_data(rng, schema)
        assert validate_data(schema, data).ok, f"seed {seed}"
        other = randgen.make_schema(random.Random(seed + 500))
        delta = diff_schemas(schema, other)
        migrated = migrate_data(data, delta, schema)
        assert validate_data(other, migrated).ok, f"seed {seed}"
