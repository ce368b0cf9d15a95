#!/usr/bin/env python3
"""Mutating a session through updaters, with a traceable history.

Loads the dinner-party fixture session, applies the "both vegan" batch
the way a parsed follow-up prompt would, lets direct manipulation delete
an attribute, and then rewinds the whole thing via checkpoints.
"""

import json
from pathlib import Path

from taskmold import (
    History,
    Session,
    Updater,
    apply_batch,
    apply_updater,
    checkpoint,
    restore,
    translate_event,
)

FIXTURES = Path(__file__).resolve().parent.parent / "tests" / "fixtures"
session = Session.from_json(json.loads((FIXTURES / "dinner_session.json").read_text()))

history = History()
history, cp_start = checkpoint(history, session, "I am hosting a dinner party", "user-prompt")

vegan_batch = [
    Updater(target="USER", action="add-schema", specifications={
        "attribute": {"name": "dietary_restrictions", "kind": "SVAL", "hint": "text"},
        "annotation": {"function": "display", "render": "shortText", "editable": True}}),
    Updater(target="DISH", action="add-schema", specifications={
        "attribute": {"name": "dietary_suitability", "kind": "SVAL", "hint": "text"},
        "annotation": {"function": "display", "render": "shortText", "editable": False}}),
    Updater(target="USER[id=USER-2].dietary_restrictions", action="update-data",
            specifications={"value": "vegan"}),
    Updater(target="USER[id=USER-1].dietary_restrictions", action="update-data",
            specifications={"value": "vegan"}),
]
session = apply_batch(session, vegan_batch)
history, cp_vegan = checkpoint(history, session, "Alice and I are both vegan", "user-prompt")
print("after the vegan batch:")
for user in session.data.instances_of("USER"):
    print(f"   {user.values['name']}: dietary_restrictions={user.values['dietary_restrictions']!r}")

event = {"type": "delete-attribute", "path": "DISH.cuisine_type"}
session = apply_updater(session, translate_event(session, event), actor="user")
history, cp_delete = checkpoint(history, session, "delete-attribute DISH.cuisine_type", "action")
print("\nafter the GUI delete, DISH attributes:",
      sorted(session.schema.entities["DISH"].attributes))

print("\nhistory manifest:")
for entry in history.manifest():
    head = " <- head" if entry["head"] else ""
    print(f"   {entry['id']} [{entry['origin']}] {entry['label']}{head}")

history, rewound = restore(history, cp_start)
print("\nrestored to", cp_start, "- DISH attributes:",
      sorted(rewound.schema.entities["DISH"].attributes))
print("history still holds", len(history.checkpoints), "checkpoints (restore is non-destructive)")
