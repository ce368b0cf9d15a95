"""Regenerate the test fixtures.

Builds the dinner-party golden model, the trip session with its
checkout/checkin constraint, and the recorded replay fixtures for the
scripted end-to-end session. The replay fixture file is produced by
running the real pipeline against a scripted backend through the
recording provider, so its request hashes always match what the gateway
actually sends.

Run from the repository root:  python3 tools/make_fixtures.py
"""

from __future__ import annotations

import json
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))

from taskmold.canonical import canon_dumps
from taskmold.gateway import Gateway, ProviderRequest, RecordingProvider
from taskmold.service import SessionService, SessionStore

FIXTURES = ROOT / "tests" / "fixtures"


# ---------------------------------------------------------------------------
# dinner-party golden model

DINNER_SCHEMA = {
    "root": "DINNER_PLAN",
    "entities": {
        "DINNER_PLAN": {
            "attributes": {
                "id": {"kind": "SVAL", "hint": "text"},
                "date": {"kind": "SVAL", "hint": "text"},
                "host": {"kind": "PNTR", "target": "USER"},
                "location": {"kind": "SVAL", "hint": "text"},
                "guest_list": {
                    "kind": "ARRY",
                    "item": {"kind": "PNTR", "target": "USER", "thumbnail": ["name", "phone"]},
                },
                "menu": {
                    "kind": "ARRY",
                    "item": {"kind": "PNTR", "target": "DISH", "thumbnail": ["name", "calories"]},
                },
            }
        },
        "USER": {
            "attributes": {
                "id": {"kind": "SVAL", "hint": "text"},
                "name": {"kind": "SVAL", "hint": "text"},
                "email": {"kind": "SVAL", "hint": "text"},
                "phone": {"kind": "SVAL", "hint": "text"},
            }
        },
        "DISH": {
            "attributes": {
                "id": {"kind": "SVAL", "hint": "text"},
                "name": {"kind": "SVAL", "hint": "text"},
                "ingredients": {"kind": "ARRY", "item": {"kind": "SVAL", "hint": "text"}},
                "calories": {"kind": "SVAL", "hint": "number"},
                "cuisine_type": {"kind": "SVAL", "hint": "text"},
            }
        },
    },
}

DINNER_ANNOTATIONS = {
    "DINNER_PLAN": {
        "id": {"function": "privateIdentifier", "render": "hidden", "editable": False},
        "date": {"function": "display", "render": "time", "editable": True},
        "host": {"function": "display", "render": "shortText", "editable": True},
        "location": {"function": "display", "render": "location", "editable": True},
        "guest_list": {"function": "display", "render": "expanded", "editable": True},
        "menu": {
            "function": "display",
            "render": "summary",
            "editable": True,
            "summary": {"label": "total_calories", "derived": {"operation": "SUM", "field": "calories"}},
        },
    },
    "USER": {
        "id": {"function": "privateIdentifier", "render": "hidden", "editable": False},
        "name": {"function": "publicIdentifier", "render": "shortText", "editable": False},
        "email": {"function": "display", "render": "url", "editable": True},
        "phone": {"function": "display", "render": "number", "editable": True},
    },
    "DISH": {
        "id": {"function": "privateIdentifier", "render": "hidden", "editable": False},
        "name": {"function": "publicIdentifier", "render": "shortText", "editable": True},
        "ingredients": {"function": "display", "render": "expanded", "editable": False},
        "calories": {"function": "display", "render": "number", "editable": False},
        "cuisine_type": {
            "function": "display",
            "render": "category",
            "editable": False,
            "categories": ["American", "Italian", "Chinese", "Japanese", "French"],
        },
    },
}


def _inst(entity: str, oid: str, **values) -> tuple[str, dict]:
    return oid, {"entity": entity, "values": {"id": oid, **values}}


DINNER_DATA = {
    "root": "DINNER_PLAN-1",
    "counters": {"DINNER_PLAN": 1, "USER": 4, "DISH": 3},
    "instances": dict([
        _inst("DINNER_PLAN", "DINNER_PLAN-1",
              date="2025-06-14",
              host="USER-1",
              location="Ocean View Terrace, San Diego",
              guest_list=["USER-1", "USER-2", "USER-3", "USER-4"],
              menu=["DISH-1", "DISH-2", "DISH-3"]),
        _inst("USER", "USER-1", name="Millie", email="millie@example.com", phone="858-555-0101"),
        _inst("USER", "USER-2", name="Alice", email="alice@example.com", phone="858-555-0102"),
        _inst("USER", "USER-3", name="Ben", email="ben@example.com", phone="858-555-0103"),
        _inst("USER", "USER-4", name="Dana", email="dana@example.com", phone="858-555-0104"),
        _inst("DISH", "DISH-1", name="Bruschetta", calories=650, cuisine_type="Italian",
              ingredients=["baguette", "tomato", "basil", "olive oil"]),
        _inst("DISH", "DISH-2", name="Mushroom Risotto", calories=800, cuisine_type="Italian",
              ingredients=["arborio rice", "mushroom", "vegetable broth", "onion"]),
        _inst("DISH", "DISH-3", name="Garden Salad", calories=650, cuisine_type="American",
              ingredients=["lettuce", "cucumber", "tomato", "olive oil"]),
    ]),
}

DINNER_SESSION = {
    "schema": DINNER_SCHEMA,
    "annotations": DINNER_ANNOTATIONS,
    "dependencies": [],
    "data": DINNER_DATA,
    "views": {},
    "representations": {},
}


# ---------------------------------------------------------------------------
# trip session: the checkout-after-checkin constraint

TRIP_SESSION = {
    "schema": {
        "root": "TRIP",
        "entities": {
            "TRIP": {
                "attributes": {
                    "id": {"kind": "SVAL", "hint": "text"},
                    "destination": {"kind": "SVAL", "hint": "text"},
                    "checkin_date": {"kind": "SVAL", "hint": "text"},
                    "checkout_date": {"kind": "SVAL", "hint": "text"},
                }
            }
        },
    },
    "annotations": {
        "TRIP": {
            "id": {"function": "privateIdentifier", "render": "hidden", "editable": False},
            "destination": {"function": "publicIdentifier", "render": "shortText", "editable": True},
            "checkin_date": {"function": "display", "render": "time", "editable": True},
            "checkout_date": {"function": "display", "render": "time", "editable": True},
        }
    },
    "dependencies": [
        {
            "source": "TRIP.checkin_date",
            "target": "TRIP.checkout_date",
            "mechanism": "Validate",
            "relationship": {"code": "target.checkout_date > source.checkin_date"},
        }
    ],
    "data": {
        "root": "TRIP-1",
        "counters": {"TRIP": 1},
        "instances": dict([
            _inst("TRIP", "TRIP-1", destination="Tokyo",
                  checkin_date="2025-01-02", checkout_date="2025-01-05"),
        ]),
    },
    "views": {},
    "representations": {},
}


# ---------------------------------------------------------------------------
# scripted end-to-end session

PROMPT_1 = "I am hosting a dinner party"
PROMPT_2 = "Alice and I are both vegan"
PROMPT_3 = "I need to get the ingredients"

VEGAN_UPDATERS = [
    {"target": "USER", "action": "add-schema", "specifications": {
        "attribute": {"name": "dietary_restrictions", "kind": "SVAL", "hint": "text"},
        "annotation": {"function": "display", "render": "shortText", "editable": True}}},
    {"target": "DISH", "action": "add-schema", "specifications": {
        "attribute": {"name": "dietary_suitability", "kind": "SVAL", "hint": "text"},
        "annotation": {"function": "display", "render": "shortText", "editable": False}}},
    {"target": "USER[id=USER-2].dietary_restrictions", "action": "update-data",
     "specifications": {"value": "vegan"}},
    {"target": "USER[id=USER-1].dietary_restrictions", "action": "update-data",
     "specifications": {"value": "vegan"}},
]

_SHOPPING_ITEMS = [
    ("Baguette", 2, "STORE-1"),
    ("Tomatoes", 6, "STORE-2"),
    ("Basil", 1, "STORE-2"),
    ("Arborio Rice", 1, "STORE-1"),
    ("Mushrooms", 4, "STORE-2"),
    ("Lettuce", 2, "STORE-2"),
]

SHOPPING_UPDATERS = (
    [
        {"target": "STORE", "action": "add-schema", "specifications": {"entity": {
            "name": "STORE",
            "attributes": {
                "id": {"kind": "SVAL", "hint": "text"},
                "name": {"kind": "SVAL", "hint": "text"},
                "address": {"kind": "SVAL", "hint": "text"},
            },
            "annotations": {
                "id": {"function": "privateIdentifier", "render": "hidden", "editable": False},
                "name": {"function": "publicIdentifier", "render": "shortText", "editable": True},
                "address": {"function": "display", "render": "location", "editable": True},
            }}}},
        {"target": "SHOPPING_ITEM", "action": "add-schema", "specifications": {"entity": {
            "name": "SHOPPING_ITEM",
            "attributes": {
                "id": {"kind": "SVAL", "hint": "text"},
                "name": {"kind": "SVAL", "hint": "text"},
                "total_quantity": {"kind": "SVAL", "hint": "number"},
                "store": {"kind": "PNTR", "target": "STORE"},
                "bought": {"kind": "SVAL", "hint": "text"},
            },
            "annotations": {
                "id": {"function": "privateIdentifier", "render": "hidden", "editable": False},
                "name": {"function": "publicIdentifier", "render": "shortText", "editable": True},
                "total_quantity": {"function": "display", "render": "number", "editable": True},
                "store": {"function": "display", "render": "shortText", "editable": True},
                "bought": {"function": "display", "render": "category", "editable": True,
                           "categories": ["yes", "no"]},
            }}}},
        {"target": "STORE", "action": "add-schema", "specifications": {
            "attribute": {"name": "shopping_items", "kind": "ARRY",
                          "item": {"kind": "PNTR", "target": "SHOPPING_ITEM",
                                   "thumbnail": ["name", "total_quantity"]}},
            "annotation": {"function": "display", "render": "expanded", "editable": True}}},
        {"target": "DINNER_PLAN", "action": "add-schema", "specifications": {
            "attribute": {"name": "shopping_list", "kind": "ARRY",
                          "item": {"kind": "PNTR", "target": "SHOPPING_ITEM",
                                   "thumbnail": ["name", "total_quantity"]}},
            "annotation": {"function": "display", "render": "summary", "editable": True,
                           "summary": {"label": "shopping_items",
                                       "derived": {"operation": "COUNT", "field": None}}}}},
        {"target": "STORE", "action": "add-data", "specifications": {
            "values": {"name": "U N Market", "address": "998 Market St, San Diego"}}},
        {"target": "STORE", "action": "add-data", "specifications": {
            "values": {"name": "Whole Foods Market", "address": "711 University Ave, San Diego"}}},
    ]
    + [
        {"target": "DINNER_PLAN.shopping_list", "action": "add-data", "specifications": {
            "values": {"name": name, "total_quantity": qty, "store": store, "bought": "no"}}}
        for name, qty, store in _SHOPPING_ITEMS
    ]
    + [
        {"target": f"STORE[id={store}].shopping_items", "action": "add-data",
         "specifications": {"ref": f"SHOPPING_ITEM-{i + 1}"}}
        for i, (_, _, store) in enumerate(_SHOPPING_ITEMS)
    ]
)

REPLAY_SCRIPT = {
    "steps": [
        {"prompt": PROMPT_1},
        {"prompt": PROMPT_2},
        {"prompt": PROMPT_3},
        {"event": {"type": "switch-representation", "entity": "STORE", "representation": "map"}},
    ]
}


class ScriptedBackend:
    """Stands in for a live model while recording the replay fixtures."""

    live = False
    network_calls = 0

    def complete(self, request: ProviderRequest) -> str:
        kind, payload = request.kind, request.payload
        if kind == "GenSchema":
            return canon_dumps(DINNER_SCHEMA)
        if kind == "GenAnnotations":
            return canon_dumps(DINNER_ANNOTATIONS)
        if kind == "GenDependencies":
            return "[]"
        if kind == "GenData":
            return canon_dumps(DINNER_DATA)
        if kind == "ParseFollowUp":
            prompt = payload.get("prompt", "")
            if "vegan" in prompt:
                return canon_dumps({"updaters": VEGAN_UPDATERS,
                                    "note": "Recorded dietary restrictions for Alice and Millie."})
            if "ingredients" in prompt:
                return canon_dumps({"updaters": SHOPPING_UPDATERS,
                                    "note": "Added a shopping list with local stores."})
            return canon_dumps({"updaters": [], "note": "Noted; nothing to change."})
        raise AssertionError(f"scripted backend has no answer for {kind}")


def record_replay_fixtures() -> None:
    recorder = RecordingProvider(ScriptedBackend())
    gateway = Gateway(recorder)
    with tempfile.TemporaryDirectory() as tmp:
        store = SessionStore(tmp)
        ticks = iter(range(1, 10_000))
        service = SessionService(store, gateway, clock=lambda: float(next(ticks)))
        sid = service.create_session()
        for step in REPLAY_SCRIPT["steps"]:
            if "prompt" in step:
                service.handle_prompt(sid, step["prompt"])
            else:
                service.handle_event(sid, step["event"])
        session, history = store.load(sid)
        golden = FIXTURES / "replay_golden"
        golden.mkdir(parents=True, exist_ok=True)
        (golden / "session.json").write_text(canon_dumps(session.to_json()), encoding="utf-8")
        (golden / "ui.json").write_text(canon_dumps(session.compile().to_json()), encoding="utf-8")
        (golden / "history.json").write_text(canon_dumps(history.manifest()), encoding="utf-8")
        # a recorded no-op probe: pure context, empty updater list, no checkpoint
        service.handle_prompt(sid, "thanks, looks great")
    recorder.save(FIXTURES / "replay_fixtures.json")


def main() -> None:
    FIXTURES.mkdir(parents=True, exist_ok=True)
    (FIXTURES / "dinner_schema.json").write_text(canon_dumps(DINNER_SCHEMA), encoding="utf-8")
    (FIXTURES / "dinner_annotations.json").write_text(canon_dumps(DINNER_ANNOTATIONS), encoding="utf-8")
    (FIXTURES / "dinner_data.json").write_text(canon_dumps(DINNER_DATA), encoding="utf-8")
    (FIXTURES / "dinner_session.json").write_text(canon_dumps(DINNER_SESSION), encoding="utf-8")
    (FIXTURES / "trip_session.json").write_text(canon_dumps(TRIP_SESSION), encoding="utf-8")
    (FIXTURES / "replay_script.json").write_text(canon_dumps(REPLAY_SCRIPT), encoding="utf-8")
    record_replay_fixtures()
    print(f"fixtures written to {FIXTURES}")


if __name__ == "__main__":
    main()
