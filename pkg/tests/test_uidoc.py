from __future__ import annotations

import json
import random

import pytest

from taskmold import (
    DataSet,
    Schema,
    SummarySpec,
    apply_ui_delta,
    choose_representation,
    compile_card,
    compile_entity_panel,
    compile_home_panel,
    compute_summary,
    default_annotations,
    diff_ui,
)
from taskmold.canonical import canon_compact, canon_dumps
from taskmold.errors import ExprTypeError, RepresentationError
from taskmold.store import Instance

from .conftest import load_json


def _walk(node: dict):
    yield node
    for key in ("panels", "children", "items", "thumbnail"):
        for child in node.get(key, []) or []:
            if isinstance(child, dict):
                yield from _walk(child)


def _by_id(doc: dict) -> dict[str, dict]:
    out = {}
    for node in _walk(doc):
        assert node["id"] not in out, f"duplicate node id {node['id']}"
        out[node["id"]] = node
    return out


# ---------------------------------------------------------------------------
# home panel golden compile


def test_home_panel_golden(dinner_schema, dinner_annotations, dinner_data):
    panel = compile_home_panel(dinner_schema, dinner_annotations, dinner_data).to_json()
    nodes = _by_id(panel)

    date = nodes["field:DINNER_PLAN.date"]
    assert (date["widget"], date["value"], date["editable"]) == ("time", "2025-06-14", True)

    guests = nodes["coll:DINNER_PLAN.guest_list"]
    assert guests["mode"] == "expanded"
    assert len(guests["items"]) == 4
    first = guests["items"][0]
    assert [t["label"] for t in first["thumbnail"]] == ["Name", "Phone"]
    assert first["object"] == "USER-1" and first["detail"] == "card:USER-1"

    menu = nodes["coll:DINNER_PLAN.menu"]
    assert menu["mode"] == "summary"
    assert menu["summary"] == {"label": "total_calories", "value": 2100}
    assert "items" not in menu

    host = nodes["item:DINNER_PLAN.host:USER-1"]
    assert host["object"] == "USER-1"

    location = nodes["field:DINNER_PLAN.location"]
    assert location["widget"] == "location"

    # hidden identifiers never surface
    assert not [i for i in nodes if ".id" in i or i.endswith(":id")]
    for node in nodes.values():
        assert node.get("widget") != "hidden"
        assert not node.get("path", "").endswith(".id")


def test_home_panel_deterministic(dinner_schema, dinner_annotations, dinner_data):
    outputs = {
        canon_dumps(compile_home_panel(dinner_schema, dinner_annotations, dinner_data).to_json())
        for _ in range(3)
    }
    assert len(outputs) == 1


def test_all_hidden_yields_empty_panel():
    schema = Schema.from_json({
        "root": "TASK",
        "entities": {"TASK": {"attributes": {"id": {"kind": "SVAL", "hint": "text"}}}},
    })
    anns = default_annotations(schema)
    data = DataSet.from_json({
        "root": "TASK-1",
        "instances": {"TASK-1": {"entity": "TASK", "values": {"id": "TASK-1"}}},
    })
    panel = compile_home_panel(schema, anns, data)
    assert panel.children == ()


def test_summary_value_uses_sum_oracle(dinner_schema, dinner_annotations, dinner_data):
    raw = load_json("dinner_data.json")
    calories = [raw["instances"][f"DISH-{i}"]["values"]["calories"] for i in (1, 2, 3)]
    expected = 0
    for c in calories:
        expected += c
    panel = compile_home_panel(dinner_schema, dinner_annotations, dinner_data).to_json()
    assert _by_id(panel)["coll:DINNER_PLAN.menu"]["summary"]["value"] == expected


# ---------------------------------------------------------------------------
# entity panels


def test_store_map_panel(shopping_session):
    s = shopping_session
    panel = compile_entity_panel(s.schema, s.annotations, s.data, "STORE", "map").to_json()
    assert panel["representation"] == "map"
    markers = panel["children"][0]["items"]
    assert len(markers) == 2
    for marker in markers:
        labels = {t["label"]: t for t in marker["thumbnail"]}
        assert "Name" in labels and "Address" in labels
        assert labels["Address"]["widget"] == "location"
        assert marker["detail"] == f"card:{marker['object']}"


def test_store_table_folds_items_into_button(shopping_session):
    s = shopping_session
    panel = compile_entity_panel(s.schema, s.annotations, s.data, "STORE", "table").to_json()
    assert panel["columns"] == ["address", "name", "shopping_items"]
    rows = panel["children"][0]["items"]
    store1 = next(r for r in rows if r["object"] == "STORE-1")
    folded = [c for c in store1["thumbnail"] if c["node"] == "collection"][0]
    assert folded["mode"] == "summary"
    assert folded["summary"] == {"label": "2 Shopping Items", "value": 2}


def test_empty_entity_panel_keeps_affordances(dinner_schema, dinner_annotations):
    data = DataSet.from_json({
        "root": "DINNER_PLAN-1",
        "instances": {"DINNER_PLAN-1": {"entity": "DINNER_PLAN", "values": {
            "id": "DINNER_PLAN-1", "date": "", "host": None, "location": "",
            "guest_list": [], "menu": []}}},
    })
    panel = compile_entity_panel(dinner_schema, dinner_annotations, data, "DISH", "list").to_json()
    collection = panel["children"][0]
    assert collection["items"] == []
    assert collection["affordances"] == {"add_empty": True, "add_generate": True, "autocomplete": True}


def test_map_requires_location(dinner_schema, dinner_annotations, dinner_data):
    with pytest.raises(RepresentationError):
        compile_entity_panel(dinner_schema, dinner_annotations, dinner_data, "DISH", "map")


# ---------------------------------------------------------------------------
# cards


def test_dish_card(dinner_schema, dinner_annotations, dinner_data):
    card = compile_card(dinner_schema, dinner_annotations, dinner_data, "DISH-1").to_json()
    children = card["children"]
    assert children[0]["path"].endswith(".name")  # publicIdentifier first
    kinds = {c["id"]: c for c in children}
    ingredients = kinds["coll:DISH[id=DISH-1].ingredients"]
    assert ingredients["mode"] == "expanded"
    assert [i["value"] for i in ingredients["items"]] == \
        ["baguette", "tomato", "basil", "olive oil"]
    cuisine = kinds["field:DISH[id=DISH-1].cuisine_type"]
    assert cuisine["widget"] == "category"
    assert cuisine["categories"] == ["American", "Italian", "Chinese", "Japanese", "French"]


def test_minimal_card():
    schema = Schema.from_json({
        "root": "NOTE",
        "entities": {"NOTE": {"attributes": {
            "id": {"kind": "SVAL", "hint": "text"},
            "name": {"kind": "SVAL", "hint": "text"}}}},
    })
    anns = default_annotations(schema)
    data = DataSet.from_json({
        "root": "NOTE-1",
        "instances": {"NOTE-1": {"entity": "NOTE", "values": {"id": "NOTE-1", "name": "hi"}}},
    })
    card = compile_card(schema, anns, data, "NOTE-1").to_json()
    assert len(card["children"]) == 1
    assert card["children"][0]["value"] == "hi"


def test_card_does_not_recurse_through_references(shopping_session):
    s = shopping_session
    card = compile_card(s.schema, s.annotations, s.data, "STORE-1").to_json()
    items = _by_id(card)[f"coll:STORE[id=STORE-1].shopping_items"]["items"]
    assert items, "store card should list its shopping items"
    for item in items:
        assert item["node"] == "item"
        # thumbnails only: no embedded cards or collections below an item
        for thumb in item["thumbnail"]:
            assert thumb["node"] == "field"
    # item cards in turn keep the store as a thumbnail link, closing the cycle
    item_card = compile_card(s.schema, s.annotations, s.data, "SHOPPING_ITEM-1").to_json()
    store_link = [n for n in _walk(item_card) if n["node"] == "item" and n["object"] == "STORE-1"]
    assert len(store_link) == 1
    assert all(t["node"] == "field" for t in store_link[0]["thumbnail"])


# ---------------------------------------------------------------------------
# summaries


def test_compute_summary_sum():
    items = [Instance(entity="DISH", id=f"D-{i}", values={"calories": c})
             for i, c in enumerate([650, 800, 650])]
    spec = SummarySpec(label="total_calories", operation="SUM", field="calories")
    assert compute_summary(spec, items) == 2100


def test_compute_summary_count_empty():
    assert compute_summary(SummarySpec(label="n", operation="COUNT", field=None), []) == 0


def test_compute_summary_min_singleton():
    items = [Instance(entity="X", id="X-1", values={"v": 42})]
    assert compute_summary(SummarySpec(label="m", operation="MIN", field="v"), items) == 42


def test_compute_summary_empty_markers():
    spec_avg = SummarySpec(label="a", operation="AVG", field="v")
    assert compute_summary(spec_avg, []) is None
    assert compute_summary(SummarySpec(label="s", operation="SUM", field="v"), []) == 0


def test_compute_summary_filter_and_predicate():
    items = [Instance(entity="X", id=f"X-{i}", values={"v": i}) for i in range(5)]
    spec = SummarySpec(label="big", operation="COUNT", field=None, predicate="item.v >= 3")
    assert compute_summary(spec, items) == 2
    filtered = compute_summary(
        SummarySpec(label="f", operation="FILTER", field=None, predicate="item.v >= 3"), items)
    assert [v["v"] for v in filtered] == [3, 4]


def test_compute_summary_type_error():
    items = [Instance(entity="X", id="X-1", values={"v": "many"})]
    with pytest.raises(ExprTypeError):
        compute_summary(SummarySpec(label="s", operation="SUM", field="v"), items)


def test_compute_summary_randomized_against_fold():
    rng = random.Random(3)
    for _ in range(50):
        values = [rng.randint(-500, 500) for _ in range(rng.randint(0, 30))]
        items = [Instance(entity="X", id=f"X-{i}", values={"v": v})
                 for i, v in enumerate(values)]
        total = compute_summary(SummarySpec(label="s", operation="SUM", field="v"), items)
        assert total == sum(values)
        avg = compute_summary(SummarySpec(label="a", operation="AVG", field="v"), items)
        if values:
            assert abs(avg - sum(values) / len(values)) <= 1e-9 * max(1, abs(avg))
        else:
            assert avg is None


# ---------------------------------------------------------------------------
# representation choice


def test_choose_map_for_shopping_context(shopping_session):
    s = shopping_session
    rep = choose_representation(s.schema, s.annotations, "STORE",
                                "plan the shopping trip across town")
    assert rep == "map"


def test_choose_list_by_default(dinner_schema, dinner_annotations):
    assert choose_representation(dinner_schema, dinner_annotations, "USER", "") == "list"


def test_choose_table_for_many_scalars():
    schema = Schema.from_json({
        "root": "TASK",
        "entities": {
            "TASK": {"attributes": {"id": {"kind": "SVAL", "hint": "text"}}},
            "DESK": {"attributes": {
                "id": {"kind": "SVAL", "hint": "text"},
                "name": {"kind": "SVAL", "hint": "text"},
                "price": {"kind": "SVAL", "hint": "number"},
                "width": {"kind": "SVAL", "hint": "number"},
                "height": {"kind": "SVAL", "hint": "number"},
                "brand": {"kind": "SVAL", "hint": "text"},
                "rating": {"kind": "SVAL", "hint": "number"},
            }},
        },
    })
    anns = default_annotations(schema)
    assert choose_representation(schema, anns, "DESK", "compare the options") == "table"


def test_switch_and_back_is_identity(shopping_session):
    s = shopping_session
    before = canon_dumps(compile_entity_panel(
        s.schema, s.annotations, s.data, "STORE", "list", s.views).to_json())
    compile_entity_panel(s.schema, s.annotations, s.data, "STORE", "table", s.views)
    after = canon_dumps(compile_entity_panel(
        s.schema, s.annotations, s.data, "STORE", "list", s.views).to_json())
    assert before == after


# ---------------------------------------------------------------------------
# highlight keys


def test_object_nodes_group_by_highlight_key(shopping_session):
    doc = shopping_session.compile().to_json()
    by_object: dict[str, list[str]] = {}
    for node in _walk(doc):
        if node.get("object"):
            by_object.setdefault(node["object"], []).append(node["id"])
    # the host is also a guest: one instance, two occurrences, one highlight key
    assert len(by_object["USER-1"]) == 2
    assert {"item:DINNER_PLAN.host:USER-1", "item:DINNER_PLAN.guest_list:USER-1"} == \
        set(by_object["USER-1"])
    for oid, node_ids in by_object.items():
        assert len(set(node_ids)) == len(node_ids)


# ---------------------------------------------------------------------------
# diffs


def test_diff_identity(dinner_session):
    doc = dinner_session.compile().to_json()
    assert diff_ui(doc, doc).empty


def test_diff_one_added_dish_updates_summary_button(dinner_session):
    from taskmold import Updater, apply_updater

    before = dinner_session.compile().to_json()
    after_session = apply_updater(
        dinner_session,
        Updater(target="DINNER_PLAN.menu", action="add-data",
                specifications={"values": {"name": "Carbonara", "calories": 450}}),
    )
    after = after_session.compile().to_json()
    delta = diff_ui(before, after)
    # the menu renders as a summary button, so the add surfaces as one refresh of it
    assert [op["op"] for op in delta.ops] == ["replace"]
    assert delta.ops[0]["id"] == "coll:DINNER_PLAN.menu"
    assert delta.ops[0]["node"]["summary"]["value"] == 2550
    assert canon_compact(apply_ui_delta(before, delta)) == canon_compact(after)


def test_diff_expanded_collection_insertion(dinner_session):
    from taskmold import Updater, apply_updater

    before = dinner_session.compile().to_json()
    after_session = apply_updater(
        dinner_session,
        Updater(target="DINNER_PLAN.guest_list", action="add-data",
                specifications={"values": {"name": "Noah"}}),
    )
    after = after_session.compile().to_json()
    delta = diff_ui(before, after)
    assert [op["op"] for op in delta.ops] == ["add"]
    assert delta.ops[0]["parent"] == "coll:DINNER_PLAN.guest_list"
    assert delta.ops[0]["index"] == 4
    assert canon_compact(apply_ui_delta(before, delta)) == canon_compact(after)


def test_diff_representation_switch_is_panel_replacement(shopping_session):
    before = shopping_session.compile().to_json()
    switched = shopping_session.with_parts(representations={"STORE": "table"})
    after = switched.compile().to_json()
    delta = diff_ui(before, after)
    assert [op["op"] for op in delta.ops] == ["replace"]
    assert delta.ops[0]["id"] == "panel:STORE"
    assert canon_compact(apply_ui_delta(before, delta)) == canon_compact(after)


def test_diff_apply_randomized_mutations(dinner_session):
    from taskmold import Updater, apply_updater

    rng = random.Random(5)
    session = dinner_session
    previous = session.compile().to_json()
    moves = [
        Updater(target="DINNER_PLAN.date", action="update-data",
                specifications={"value": "2025-07-01"}),
        Updater(target="DINNER_PLAN.menu", action="sort",
                specifications={"field": "calories", "direction": "asc"}),
        Updater(target="DINNER_PLAN.menu", action="add-data",
                specifications={"values": {"name": "Soup", "calories": 150}}),
        Updater(target="DINNER_PLAN.guest_list", action="add-data",
                specifications={"values": {"name": "Noah"}}),
        Updater(target="DISH[id=DISH-1].calories", action="update-data",
                specifications={"value": 700}),
        Updater(target="DINNER_PLAN.menu", action="sort",
                specifications={"field": "name", "direction": "desc"}),
        Updater(target="DINNER_PLAN.location", action="update-data",
                specifications={"value": "Backyard"}),
    ]
    for _ in range(12):
        updater = rng.choice(moves)
        session = apply_updater(session, updater)
        current = session.compile().to_json()
        delta = diff_ui(previous, current)
        rebuilt = apply_ui_delta(previous, delta)
        assert canon_compact(rebuilt) == canon_compact(current)
        assert diff_ui(current, current).empty
        previous = current


def test_document_panels(shopping_session):
    doc = shopping_session.compile()
    assert [p.id for p in doc.panels] == ["panel:home", "panel:STORE"]
    assert doc.focus == "panel:home"
    assert doc.panels[1].representation == "map"
