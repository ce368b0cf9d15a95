from __future__ import annotations

import random
from collections import Counter

import pytest

from taskmold import (
    History,
    Updater,
    apply_batch,
    apply_directive,
    apply_updater,
    checkpoint,
    get,
    restore,
    translate_event,
    validate_session,
)
from taskmold.canonical import canon_compact
from taskmold.errors import UnknownCheckpointError, UpdaterError
from taskmold.updaters import RepresentationDirective


def _add_attr(entity: str, name: str, hint: str = "text", **ann) -> Updater:
    annotation = {"function": "display", "render": "shortText", "editable": True, **ann}
    return Updater(target=entity, action="add-schema", specifications={
        "attribute": {"name": name, "kind": "SVAL", "hint": hint},
        "annotation": annotation,
    })


VEGAN_BATCH = [
    _add_attr("USER", "dietary_restrictions"),
    _add_attr("DISH", "dietary_suitability"),
    Updater(target="USER[id=USER-2].dietary_restrictions", action="update-data",
            specifications={"value": "vegan"}),
    Updater(target="USER[id=USER-1].dietary_restrictions", action="update-data",
            specifications={"value": "vegan"}),
]


# ---------------------------------------------------------------------------
# apply_updater


def test_add_schema_attribute_migrates_all_instances(dinner_session):
    out = apply_updater(dinner_session, _add_attr("DISH", "dietary_suitability"))
    for dish in out.data.instances_of("DISH"):
        assert dish.values["dietary_suitability"] == ""
    assert validate_session(out).ok
    # input untouched
    assert "dietary_suitability" not in dinner_session.schema.entities["DISH"].attributes


def test_update_data_with_equal_value_is_identity(dinner_session):
    updater = Updater(target="DINNER_PLAN.date", action="update-data",
                      specifications={"value": "2025-06-14"})
    out = apply_updater(dinner_session, updater)
    assert canon_compact(out.to_json()) == canon_compact(dinner_session.to_json())


def test_sort_menu_matches_brute_force(dinner_session):
    updater = Updater(target="DINNER_PLAN.menu", action="sort",
                      specifications={"field": "calories", "direction": "asc"})
    out = apply_updater(dinner_session, updater)
    menu = get(out.schema, out.data, "DINNER_PLAN.menu")[0]
    by_id = {d.id: d.values["calories"] for d in out.data.instances_of("DISH")}
    expected = sorted(["DISH-1", "DISH-2", "DISH-3"], key=lambda oid: by_id[oid])
    assert menu == expected


def test_sort_desc_and_multiset_preserved(dinner_session):
    before = Counter(canon_compact(i.values) for i in dinner_session.data.instances.values())
    out = apply_updater(dinner_session, Updater(
        target="DINNER_PLAN.menu", action="sort",
        specifications={"field": "name", "direction": "desc"}))
    menu = get(out.schema, out.data, "DINNER_PLAN.menu")[0]
    names = [out.data.instance(oid).values["name"] for oid in menu]
    assert names == sorted(names, reverse=True)
    after = Counter(
        canon_compact({**i.values, "menu": sorted(i.values["menu"])})
        if i.entity == "DINNER_PLAN" else canon_compact(i.values)
        for i in out.data.instances.values())
    rebefore = Counter(
        canon_compact({**i.values, "menu": sorted(i.values["menu"])})
        if i.entity == "DINNER_PLAN" else canon_compact(i.values)
        for i in dinner_session.data.instances.values())
    assert after == rebefore


def test_remove_schema_attribute(dinner_session):
    out = apply_updater(dinner_session, Updater(
        target="DISH.cuisine_type", action="remove-schema", specifications={}))
    assert "cuisine_type" not in out.schema.entities["DISH"].attributes
    assert all("cuisine_type" not in d.values for d in out.data.instances_of("DISH"))
    assert validate_session(out).ok


def test_update_schema_annotation_only(dinner_session):
    out = apply_updater(dinner_session, Updater(
        target="DINNER_PLAN.location", action="update-schema",
        specifications={"annotation": {"function": "display", "render": "shortText",
                                       "editable": False}}))
    assert out.annotations.get("DINNER_PLAN", "location").render == "shortText"


def test_add_data_ref_appends_existing(dinner_session):
    out = apply_updater(dinner_session, Updater(
        target="DINNER_PLAN.guest_list", action="add-data",
        specifications={"ref": "USER-2"}))
    guests = get(out.schema, out.data, "DINNER_PLAN.guest_list")[0]
    assert guests == ["USER-1", "USER-2", "USER-3", "USER-4", "USER-2"]


def test_add_data_scalar_array(dinner_session):
    out = apply_updater(dinner_session, Updater(
        target="DISH[id=DISH-1].ingredients", action="add-data",
        specifications={"value": "parsley"}))
    ingredients = get(out.schema, out.data, "DISH[id=DISH-1].ingredients")[0]
    assert ingredients[-1] == "parsley"


def test_remove_data_instance_scrubs(dinner_session):
    out = apply_updater(dinner_session, Updater(
        target="DISH[id=DISH-2]", action="remove-data", specifications={}))
    assert "DISH-2" not in out.data.instances
    assert get(out.schema, out.data, "DINNER_PLAN.menu")[0] == ["DISH-1", "DISH-3"]


def test_remove_data_array_element(dinner_session):
    out = apply_updater(dinner_session, Updater(
        target="DINNER_PLAN.menu[id=DISH-2]", action="remove-data", specifications={}))
    assert get(out.schema, out.data, "DINNER_PLAN.menu")[0] == ["DISH-1", "DISH-3"]
    assert "DISH-2" in out.data.instances  # reference removed, instance kept


def test_filter_sets_view_without_touching_data(dinner_session):
    out = apply_updater(dinner_session, Updater(
        target="DINNER_PLAN.menu", action="filter",
        specifications={"predicate": "item.calories < 700"}))
    assert out.views["DINNER_PLAN.menu"] == {"filter": "item.calories < 700"}
    assert canon_compact(out.data.to_json()) == canon_compact(dinner_session.data.to_json())
    doc = out.compile().to_json()  # summary now reflects the filtered subset
    menu = [n for n in _walk(doc) if n.get("id") == "coll:DINNER_PLAN.menu"][0]
    assert menu["summary"]["value"] == 1300


def _walk(node):
    yield node
    for key in ("panels", "children", "items", "thumbnail"):
        for child in node.get(key, []) or []:
            if isinstance(child, dict):
                yield from _walk(child)


def test_cluster_by_field(dinner_session):
    out = apply_updater(dinner_session, Updater(
        target="DINNER_PLAN.menu", action="cluster",
        specifications={"field": "cuisine_type"}))
    assert out.views["DINNER_PLAN.menu"]["cluster"] == {"field": "cuisine_type"}
    before = {oid: i.values for oid, i in dinner_session.data.instances.items()}
    after = {oid: i.values for oid, i in out.data.instances.items()}
    assert canon_compact(before) == canon_compact(after)


def test_cluster_with_assignments(dinner_session):
    out = apply_updater(dinner_session, Updater(
        target="DINNER_PLAN.menu", action="cluster",
        specifications={"assignments": {"DISH-1": "starters", "DISH-2": "mains",
                                        "DISH-3": "starters"}}))
    groups = out.views["DINNER_PLAN.menu"]["cluster"]["assignments"]
    assert groups["DISH-1"] == "starters"


def test_unknown_action_and_target(dinner_session):
    with pytest.raises(UpdaterError) as err:
        apply_updater(dinner_session, Updater(target="DISH", action="explode", specifications={}))
    assert err.value.code == "payload-mismatch"
    with pytest.raises(UpdaterError) as err:
        apply_updater(dinner_session, Updater(target="GHOST.x", action="update-data",
                                              specifications={"value": 1}))
    assert err.value.code == "unknown-target"


def test_validate_rejection_keeps_session(trip_session):
    updater = Updater(target="TRIP.checkout_date", action="update-data",
                      specifications={"value": "2025-01-01"})
    with pytest.raises(UpdaterError) as err:
        apply_updater(trip_session, updater)
    assert err.value.code == "validation-rejection"
    assert err.value.details and err.value.details[0]["code"] == "violated"
    assert trip_session.data.instance("TRIP-1").values["checkout_date"] == "2025-01-05"


def test_user_actor_respects_editable(dinner_session):
    updater = Updater(target="DISH[id=DISH-1].calories", action="update-data",
                      specifications={"value": 700})
    with pytest.raises(UpdaterError) as err:
        apply_updater(dinner_session, updater, actor="user")
    assert err.value.code == "validation-rejection"
    # the system actor (prompt-driven) may write derived fields
    out = apply_updater(dinner_session, updater, actor="system")
    assert out.data.instance("DISH-1").values["calories"] == 700


# ---------------------------------------------------------------------------
# apply_batch


def test_vegan_batch_applies_everything(dinner_session):
    out = apply_batch(dinner_session, VEGAN_BATCH)
    assert out.data.instance("USER-1").values["dietary_restrictions"] == "vegan"
    assert out.data.instance("USER-2").values["dietary_restrictions"] == "vegan"
    assert out.data.instance("USER-3").values["dietary_restrictions"] == ""
    assert "dietary_suitability" in out.schema.entities["DISH"].attributes
    assert validate_session(out).ok


def test_batch_of_one_equals_apply_updater(dinner_session):
    single = apply_updater(dinner_session, VEGAN_BATCH[0])
    batched = apply_batch(dinner_session, [VEGAN_BATCH[0]])
    assert canon_compact(single.to_json()) == canon_compact(batched.to_json())


def test_batch_rolls_back_on_failure(dinner_session):
    batch = [
        _add_attr("USER", "dietary_restrictions"),
        Updater(target="DISH.nonexistent", action="remove-schema", specifications={}),
    ]
    with pytest.raises(UpdaterError) as err:
        apply_batch(dinner_session, batch)
    assert "updater 1" in str(err.value)
    # atomicity: deep equality with the input
    assert "dietary_restrictions" not in dinner_session.schema.entities["USER"].attributes


def test_empty_batch_rejected(dinner_session):
    with pytest.raises(UpdaterError):
        apply_batch(dinner_session, [])


def test_add_then_remove_round_trips_randomized(dinner_session):
    rng = random.Random(9)
    names = ["weather", "budget", "mood", "theme", "playlist"]
    for _ in range(20):
        entity = rng.choice(["DINNER_PLAN", "USER", "DISH"])
        name = rng.choice(names)
        hint = rng.choice(["text", "number"])
        added = apply_updater(dinner_session, _add_attr(entity, name, hint,
                                                        render="number" if hint == "number" else "shortText"))
        removed = apply_updater(added, Updater(
            target=f"{entity}.{name}", action="remove-schema", specifications={}))
        assert canon_compact(removed.schema.to_json()) == \
            canon_compact(dinner_session.schema.to_json())
        assert canon_compact(removed.data.to_json()) == \
            canon_compact(dinner_session.data.to_json())


# ---------------------------------------------------------------------------
# translate_event


def test_translate_edit_value(dinner_session):
    updater = translate_event(dinner_session, {
        "type": "edit-value", "path": "DINNER_PLAN.date", "value": "2025-06-15"})
    assert updater == Updater(target="DINNER_PLAN.date", action="update-data",
                              specifications={"value": "2025-06-15"})


def test_translate_delete_attribute(dinner_session):
    updater = translate_event(dinner_session, {
        "type": "delete-attribute", "path": "DISH.cuisine_type"})
    assert updater.action == "remove-schema"
    out = apply_updater(dinner_session, updater)
    assert "cuisine_type" not in out.schema.entities["DISH"].attributes


def test_translate_add_empty_item(dinner_session):
    updater = translate_event(dinner_session, {
        "type": "add-empty-item", "path": "DINNER_PLAN.menu"})
    assert updater.action == "add-data" and updater.specifications == {"empty": True}
    out = apply_updater(dinner_session, updater)
    menu = get(out.schema, out.data, "DINNER_PLAN.menu")[0]
    assert menu[-1] == "DISH-4"
    assert out.data.instance("DISH-4").values["name"] == ""


def test_translate_switch_representation(shopping_session):
    directive = translate_event(shopping_session, {
        "type": "switch-representation", "entity": "STORE", "representation": "table"})
    assert directive == RepresentationDirective(entity="STORE", representation="table")
    out = apply_directive(shopping_session, directive)
    assert out.representations["STORE"] == "table"


def test_switch_to_invalid_representation_rejected(dinner_session):
    directive = translate_event(dinner_session, {
        "type": "switch-representation", "entity": "DISH", "representation": "map"})
    with pytest.raises(UpdaterError) as err:
        apply_directive(dinner_session, directive)
    assert err.value.code == "validation-rejection"


def test_translate_sort_column(dinner_session):
    updater = translate_event(dinner_session, {
        "type": "sort-column", "path": "DINNER_PLAN.menu", "field": "calories",
        "direction": "desc"})
    assert updater.action == "sort"


def test_unsupported_event(dinner_session):
    with pytest.raises(UpdaterError) as err:
        translate_event(dinner_session, {"type": "shake-window"})
    assert err.value.code == "unsupported-event"


# ---------------------------------------------------------------------------
# history


def test_checkpoint_appends_and_advances(dinner_session):
    history, cp1 = checkpoint(History(), dinner_session, "first prompt", "user-prompt",
                              clock=lambda: 1.0)
    assert len(history.checkpoints) == 1 and history.head == 0
    mutated = apply_updater(dinner_session, VEGAN_BATCH[0])
    history, cp2 = checkpoint(history, mutated, "second", "user-prompt", clock=lambda: 2.0)
    assert [c["id"] for c in history.manifest()] == [cp1, cp2]
    assert history.manifest()[1]["head"] is True


def test_restore_reproduces_snapshot(dinner_session):
    history, cp1 = checkpoint(History(), dinner_session, "start", "user-prompt",
                              clock=lambda: 1.0)
    session = dinner_session
    for updater in VEGAN_BATCH[:3]:
        session = apply_updater(session, updater)
        history, _ = checkpoint(history, session, "step", "system", clock=lambda: 2.0)
    history, restored = restore(history, cp1)
    assert canon_compact(restored.to_json()) == canon_compact(dinner_session.to_json())
    assert history.head == 0
    assert len(history.checkpoints) == 4  # non-destructive


def test_restore_head_is_noop(dinner_session):
    history, cp = checkpoint(History(), dinner_session, "only", "user-prompt", clock=lambda: 1.0)
    history2, restored = restore(history, cp)
    assert canon_compact(restored.to_json()) == canon_compact(dinner_session.to_json())
    assert history2.head == history.head


def test_restore_then_mutate_appends(dinner_session):
    history, cp1 = checkpoint(History(), dinner_session, "one", "user-prompt", clock=lambda: 1.0)
    mutated = apply_updater(dinner_session, VEGAN_BATCH[0])
    history, _ = checkpoint(history, mutated, "two", "user-prompt", clock=lambda: 2.0)
    history, restored = restore(history, cp1)
    again = apply_updater(restored, VEGAN_BATCH[1])
    history, cp3 = checkpoint(history, again, "three", "action", clock=lambda: 3.0)
    assert len(history.checkpoints) == 3
    assert history.head == 2
    assert history.checkpoints[2].origin == "action"


def test_restore_unknown_checkpoint(dinner_session):
    history, _ = checkpoint(History(), dinner_session, "x", "system", clock=lambda: 1.0)
    with pytest.raises(UnknownCheckpointError):
        restore(history, "ckpt-99")


def test_history_round_trip_serialization(dinner_session):
    history, _ = checkpoint(History(), dinner_session, "x", "action", clock=lambda: 5.0)
    rebuilt = History.from_json(history.to_json())
    assert canon_compact(rebuilt.to_json()) == canon_compact(history.to_json())
    assert canon_compact(rebuilt.checkpoints[0].snapshot.to_json()) == \
        canon_compact(dinner_session.to_json())
