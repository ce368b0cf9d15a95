#!/usr/bin/env python3
"""Validate and Update dependencies over a toy trip plan.

A Validate edge guards the checkout date (writes violating it are
rejected wholesale), and an Update edge keeps a derived total in sync
with nightly rates. Shows the lint pass catching a reversed and a
redundant edge too.
"""

from taskmold import (
    DataSet,
    Dependency,
    Relationship,
    Schema,
    build_graph,
    check_write,
    default_annotations,
    get,
    lint_dependencies,
    propagate,
    set_value,
)

schema = Schema.from_json({
    "root": "TRIP",
    "entities": {
        "TRIP": {"attributes": {
            "id": {"kind": "SVAL", "hint": "text"},
            "checkin_date": {"kind": "SVAL", "hint": "text"},
            "checkout_date": {"kind": "SVAL", "hint": "text"},
            "stays": {"kind": "ARRY", "item": {"kind": "PNTR", "target": "STAY"}},
            "total_cost": {"kind": "SVAL", "hint": "number"},
        }},
        "STAY": {"attributes": {
            "id": {"kind": "SVAL", "hint": "text"},
            "name": {"kind": "SVAL", "hint": "text"},
            "cost": {"kind": "SVAL", "hint": "number"},
        }},
    },
})

data = DataSet.from_json({
    "root": "TRIP-1",
    "instances": {
        "TRIP-1": {"entity": "TRIP", "values": {
            "id": "TRIP-1", "checkin_date": "2025-01-02", "checkout_date": "2025-01-05",
            "stays": ["STAY-1", "STAY-2"], "total_cost": None}},
        "STAY-1": {"entity": "STAY", "values": {"id": "STAY-1", "name": "Ryokan", "cost": 320}},
        "STAY-2": {"entity": "STAY", "values": {"id": "STAY-2", "name": "Hostel", "cost": 80}},
    },
})

deps = [
    Dependency(source="TRIP.checkin_date", target="TRIP.checkout_date",
               mechanism="Validate",
               relationship=Relationship(code="target.checkout_date > source.checkin_date")),
    Dependency(source="TRIP.stays[*].cost", target="TRIP.total_cost",
               mechanism="Update",
               relationship=Relationship(code="sum(source.stays[*].cost)")),
]
graph = build_graph(schema, deps)

bad = check_write(graph, schema, data, "TRIP.checkout_date", "2025-01-01")
print("write checkout=2025-01-01:", "accepted" if bad.accepted else "REJECTED")
for violation in bad.violations:
    print("   violation:", violation.message)

good = check_write(graph, schema, data, "TRIP.checkout_date", "2025-01-09")
print("write checkout=2025-01-09:", "accepted" if good.accepted else "REJECTED")

write = set_value(schema, data, "STAY[id=STAY-2].cost", 120)
result = propagate(graph, schema, write.data, list(write.changed))
print("\nafter raising the hostel cost to 120:")
print("   updated paths:", list(result.updated))
print("   total_cost =", get(schema, result.data, "TRIP.total_cost")[0])

print("\nlint findings on two suspect edges:")
suspect = [
    Dependency(source="TRIP.stays", target="STAY", mechanism="Update",
               relationship=Relationship(code="source")),
    Dependency(source="TRIP.stays[*].cost", target="TRIP.total_cost", mechanism="Update",
               relationship=Relationship(code="sum(target.stays[*].cost)")),
]
for finding in lint_dependencies(schema, suspect):
    print(f"   [{finding.code}] dependency {finding.dependency}: {finding.message}")

annotations = default_annotations(schema)  # derived rules still validate cleanly
from taskmold import validate_annotations
assert validate_annotations(schema, annotations).ok
