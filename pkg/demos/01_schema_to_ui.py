#!/usr/bin/env python3
"""From a typed schema to a renderable UI document, step by step.

Builds the dinner-party model in code: an object-relational schema, its
per-attribute UI annotations, and a handful of instances. Validates all
three, then compiles the home panel and prints the resulting node tree.
"""

from taskmold import (
    DataSet,
    Schema,
    AnnotationSet,
    compile_home_panel,
    compile_card,
    validate_annotations,
    validate_data,
    validate_schema,
)

schema = Schema.from_json({
    "root": "DINNER_PLAN",
    "entities": {
        "DINNER_PLAN": {"attributes": {
            "id": {"kind": "SVAL", "hint": "text"},
            "date": {"kind": "SVAL", "hint": "text"},
            "host": {"kind": "PNTR", "target": "USER"},
            "guest_list": {"kind": "ARRY",
                           "item": {"kind": "PNTR", "target": "USER",
                                    "thumbnail": ["name", "phone"]}},
            "menu": {"kind": "ARRY",
                     "item": {"kind": "PNTR", "target": "DISH",
                              "thumbnail": ["name", "calories"]}},
        }},
        "USER": {"attributes": {
            "id": {"kind": "SVAL", "hint": "text"},
            "name": {"kind": "SVAL", "hint": "text"},
            "phone": {"kind": "SVAL", "hint": "text"},
        }},
        "DISH": {"attributes": {
            "id": {"kind": "SVAL", "hint": "text"},
            "name": {"kind": "SVAL", "hint": "text"},
            "calories": {"kind": "SVAL", "hint": "number"},
            "cuisine_type": {"kind": "SVAL", "hint": "text"},
        }},
    },
})

annotations = AnnotationSet.from_json({
    "DINNER_PLAN": {
        "id": {"function": "privateIdentifier", "render": "hidden", "editable": False},
        "date": {"function": "display", "render": "time", "editable": True},
        "host": {"function": "display", "render": "shortText", "editable": True},
        "guest_list": {"function": "display", "render": "expanded", "editable": True},
        "menu": {"function": "display", "render": "summary", "editable": True,
                 "summary": {"label": "total_calories",
                             "derived": {"operation": "SUM", "field": "calories"}}},
    },
    "USER": {
        "id": {"function": "privateIdentifier", "render": "hidden", "editable": False},
        "name": {"function": "publicIdentifier", "render": "shortText", "editable": False},
        "phone": {"function": "display", "render": "number", "editable": True},
    },
    "DISH": {
        "id": {"function": "privateIdentifier", "render": "hidden", "editable": False},
        "name": {"function": "publicIdentifier", "render": "shortText", "editable": True},
        "calories": {"function": "display", "render": "number", "editable": False},
        "cuisine_type": {"function": "display", "render": "category", "editable": False,
                         "categories": ["American", "Italian", "Chinese"]},
    },
})

data = DataSet.from_json({
    "root": "DINNER_PLAN-1",
    "instances": {
        "DINNER_PLAN-1": {"entity": "DINNER_PLAN", "values": {
            "id": "DINNER_PLAN-1", "date": "2025-06-14", "host": "USER-1",
            "guest_list": ["USER-1", "USER-2"], "menu": ["DISH-1", "DISH-2"]}},
        "USER-1": {"entity": "USER", "values": {"id": "USER-1", "name": "Millie",
                                                "phone": "555-0101"}},
        "USER-2": {"entity": "USER", "values": {"id": "USER-2", "name": "Alice",
                                                "phone": "555-0102"}},
        "DISH-1": {"entity": "DISH", "values": {"id": "DISH-1", "name": "Bruschetta",
                                                "calories": 650, "cuisine_type": "Italian"}},
        "DISH-2": {"entity": "DISH", "values": {"id": "DISH-2", "name": "Garden Salad",
                                                "calories": 450, "cuisine_type": "American"}},
    },
})

print("schema findings:     ", validate_schema(schema).to_json())
print("annotation findings: ", validate_annotations(schema, annotations).to_json())
print("data findings:       ", validate_data(schema, data).to_json())


def show(node: dict, depth: int = 0) -> None:
    pad = "  " * depth
    kind = node["node"]
    if kind == "field":
        print(f"{pad}{node['label']}: [{node['widget']}] {node['value']!r}")
    elif kind == "item":
        thumbs = ", ".join(f"{t['value']}" for t in node["thumbnail"])
        print(f"{pad}-> {node['object']} ({thumbs})")
    elif kind == "collection":
        if node["mode"] == "summary":
            print(f"{pad}{node['label']} [{node['summary']['label']} = {node['summary']['value']}]")
        else:
            print(f"{pad}{node['label']} ({len(node['items'])} items)")
            for item in node["items"]:
                show(item, depth + 1)
    elif kind in ("panel", "card"):
        print(f"{pad}{kind} {node['id']}")
        for child in node["children"]:
            show(child, depth + 1)


panel = compile_home_panel(schema, annotations, data)
print("\nhome panel:")
show(panel.to_json())

print("\ndish card (publicIdentifier first, category chip, no id field):")
show(compile_card(schema, annotations, data, "DISH-1").to_json())
