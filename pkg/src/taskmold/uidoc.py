"""Rule-based compilation of schema + annotations + data into a UI document.

The document is a frontend-agnostic JSON tree of panels, fields,
collections, items, and cards. Widget identities are semantic (``time``,
``location``, ``category``), node ids derive from paths and object ids,
and compilation is deterministic: equal inputs give byte-identical
canonical JSON.

Composition rules:

* scalars become fields with the widget named by their render annotation;
  hidden attributes produce no node at all;
* dictionary fields are flattened into their parent view;
* pointers become thumbnail items that link to a card, never inlining the
  referenced entity (cards and thumbnails keep cyclic schemas finite);
* arrays become collections, fully expanded or condensed to a single
  derived-value summary button;
* every node representing an object instance carries its object id, which
  doubles as the cross-panel highlight key.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field

from .errors import ExprError, ExprTypeError, RepresentationError, WriteError
from .expr import evaluate_expression
from .model import (
    AnnotationSet,
    AttributeDef,
    ItemSpec,
    Schema,
    SummarySpec,
    annotation_keys,
    effective_thumbnail,
    identifier_attr,
)
from .store import DataSet, Instance, canonical_instance_path

REPRESENTATIONS = ("list", "table", "map")
_ROUTE_WORDS = (
    "route", "routing", "map", "directions", "navigate", "trip", "shopping",
    "visit", "travel", "place", "places", "nearby", "store", "stores",
)

Views = dict[str, dict]


# ---------------------------------------------------------------------------
# nodes


@dataclass(frozen=True)
class FieldNode:
    id: str
    path: str
    widget: str
    editable: bool
    value: object
    label: str
    categories: tuple[str, ...] | None = None

    def to_json(self) -> dict:
        out = {
            "node": "field", "id": self.id, "path": self.path, "widget": self.widget,
            "editable": self.editable, "value": self.value, "label": self.label,
        }
        if self.categories is not None:
            out["categories"] = list(self.categories)
        return out


@dataclass(frozen=True)
class ItemNode:
    id: str
    path: str
    object: str | None
    thumbnail: tuple = ()
    detail: str | None = None

    def to_json(self) -> dict:
        return {
            "node": "item", "id": self.id, "path": self.path, "object": self.object,
            "thumbnail": [n.to_json() for n in self.thumbnail],
            "detail": self.detail,
        }


@dataclass(frozen=True)
class CollectionNode:
    id: str
    path: str
    mode: str  # expanded | summary
    label: str
    items: tuple = ()
    summary: dict | None = None
    affordances: dict | None = None
    groups: tuple = ()
    item_entity: str | None = None  # target entity of pointer items, for navigation

    def to_json(self) -> dict:
        out = {
            "node": "collection", "id": self.id, "path": self.path, "mode": self.mode,
            "label": self.label, "affordances": self.affordances or {},
            "item_entity": self.item_entity,
        }
        if self.mode == "summary":
            out["summary"] = self.summary
        else:
            out["items"] = [n.to_json() for n in self.items]
        if self.groups:
            out["groups"] = [dict(g) for g in self.groups]
        return out


@dataclass(frozen=True)
class CardNode:
    id: str
    object: str
    mode: str  # popup | floating | panel
    children: tuple = ()

    def to_json(self) -> dict:
        return {
            "node": "card", "id": self.id, "object": self.object, "mode": self.mode,
            "children": [n.to_json() for n in self.children],
        }


@dataclass(frozen=True)
class PanelNode:
    id: str
    kind: str  # home | entity
    entity: str
    representation: str
    title: str
    children: tuple = ()
    columns: tuple[str, ...] | None = None

    def to_json(self) -> dict:
        out = {
            "node": "panel", "id": self.id, "kind": self.kind, "entity": self.entity,
            "representation": self.representation, "title": self.title,
            "children": [n.to_json() for n in self.children],
        }
        if self.columns is not None:
            out["columns"] = list(self.columns)
        return out


@dataclass(frozen=True)
class UIDocument:
    panels: tuple[PanelNode, ...]
    focus: str | None = None

    def to_json(self) -> dict:
        return {
            "node": "document", "id": "document", "focus": self.focus,
            "panels": [p.to_json() for p in self.panels],
        }


def _title(name: str) -> str:
    return " ".join(part.capitalize() for part in name.split("_") if part)


# ---------------------------------------------------------------------------
# attribute rendering


class _Compiler:
    def __init__(self, schema: Schema, annotations: AnnotationSet, data: DataSet, views: Views | None):
        self.schema = schema
        self.annotations = annotations
        self.data = data
        self.views = views or {}

    # -- scalar fields

    def field_node(self, entity: str, key: str, attr: AttributeDef, path: str, value) -> FieldNode:
        ann = self.annotations.get(entity, key)
        render = ann.render if ann and ann.render else "shortText"
        return FieldNode(
            id=f"field:{path}",
            path=path,
            widget=render,
            editable=bool(ann.editable) if ann else False,
            value=copy.deepcopy(value),
            label=_title(key.split(".")[-1]),
            categories=ann.categories if ann else None,
        )

    # -- pointers

    def thumbnail_fields(self, target_entity: str, oid: str, names: tuple[str, ...],
                         id_prefix: str) -> tuple:
        # thumbnail ids hang off their item so repeated occurrences of one
        # instance across panels never collide
        inst = self.data.instances.get(oid)
        if inst is None:
            return ()
        nodes = []
        base = f"{target_entity}[id={oid}]"
        defs = dict(annotation_keys(self.schema.entities[target_entity]))
        for name in names:
            if name not in defs:
                continue
            ann = self.annotations.get(target_entity, name)
            value = inst.values.get(name.split(".")[0])
            if "." in name:
                inner = name.split(".")[1]
                value = value.get(inner) if isinstance(value, dict) else None
            nodes.append(FieldNode(
                id=f"{id_prefix}.{name}",
                path=f"{base}.{name}",
                widget=(ann.render if ann and ann.render else "shortText"),
                editable=False,
                value=copy.deepcopy(value),
                label=_title(name.split(".")[-1]),
                categories=ann.categories if ann else None,
            ))
        return tuple(nodes)

    def pointer_item(self, path: str, target_entity: str, oid: str | None,
                     thumbnail: tuple[str, ...] | None = None, occurrence: int = 0) -> ItemNode:
        suffix = f"#{occurrence}" if occurrence else ""
        if oid is None:
            return ItemNode(id=f"item:{path}:null{suffix}", path=path, object=None)
        names = thumbnail
        if not names:
            public = identifier_attr(self.annotations, target_entity, "publicIdentifier")
            names = (public,) if public else ()
        node_id = f"item:{path}:{oid}{suffix}"
        return ItemNode(
            id=node_id,
            path=path,
            object=oid,
            thumbnail=self.thumbnail_fields(target_entity, oid, names or (), node_id),
            detail=f"card:{oid}",
        )

    # -- arrays

    def _filtered_elements(self, path: str, attr: AttributeDef, elements: list) -> list:
        view = self.views.get(path, {})
        predicate = view.get("filter")
        if not predicate:
            return list(elements)
        kept = []
        for element in elements:
            item_value = element
            if attr.item and attr.item.kind == "PNTR" and isinstance(element, str):
                inst = self.data.instances.get(element)
                item_value = dict(inst.values) if inst else None
            try:
                match = evaluate_expression(predicate, {"item": item_value})
            except ExprError:
                match = True  # a broken view predicate never hides data
            if match is True:
                kept.append(element)
        return kept

    def _groups(self, path: str, attr: AttributeDef, elements: list) -> tuple:
        view = self.views.get(path, {})
        cluster = view.get("cluster")
        if not cluster:
            return ()
        labels: dict[str, list[str]] = {}
        for i, element in enumerate(elements):
            if attr.item and attr.item.kind == "PNTR" and isinstance(element, str):
                inst = self.data.instances.get(element)
                if "assignments" in cluster:
                    label = str(cluster["assignments"].get(element, "other"))
                else:
                    value = inst.values.get(cluster.get("field", "")) if inst else None
                    label = str(value) if value not in (None, "") else "other"
                member = element
            else:
                label = str(element)
                member = f"{path}[{i}]"
            labels.setdefault(label, []).append(member)
        return tuple({"label": label, "members": labels[label]} for label in sorted(labels))

    def collection_node(self, entity: str, key: str, attr: AttributeDef, path: str,
                        elements: list, mode_override: str | None = None) -> CollectionNode:
        ann = self.annotations.get(entity, key)
        mode = ann.render if ann and ann.render in ("summary", "expanded") else "expanded"
        if mode_override:
            mode = mode_override
        editable = bool(ann.editable) if ann else False
        item = attr.item or ItemSpec(kind="SVAL", hint="text")
        is_pointer = item.kind == "PNTR"
        affordances = {
            "add_empty": editable,
            "add_generate": editable and is_pointer,
            "autocomplete": editable and is_pointer,
        }
        elements = self._filtered_elements(path, attr, elements)

        if mode == "summary" and ann and ann.summary:
            items = [self.data.instances[e] for e in elements if isinstance(e, str) and e in self.data.instances] \
                if is_pointer else list(elements)
            value = compute_summary(ann.summary, items)
            return CollectionNode(
                id=f"coll:{path}", path=path, mode="summary", label=_title(key),
                summary={"label": ann.summary.label, "value": value},
                affordances=affordances, groups=self._groups(path, attr, elements),
                item_entity=item.target if is_pointer else None,
            )

        nodes = []
        seen: dict[str, int] = {}
        for i, element in enumerate(elements):
            if is_pointer:
                oid = element if isinstance(element, str) else None
                occurrence = seen.get(oid or "null", 0)
                seen[oid or "null"] = occurrence + 1
                nodes.append(self.pointer_item(path, item.target or "", oid,
                                               effective_thumbnail(self.schema, self.annotations, item),
                                               occurrence))
            else:
                widget = "number" if item.hint == "number" else "shortText"
                nodes.append(FieldNode(
                    id=f"field:{path}[{i}]", path=f"{path}[{i}]", widget=widget,
                    editable=editable, value=copy.deepcopy(element), label=_title(key),
                ))
        return CollectionNode(
            id=f"coll:{path}", path=path, mode="expanded", label=_title(key),
            items=tuple(nodes), affordances=affordances,
            groups=self._groups(path, attr, elements),
            item_entity=item.target if is_pointer else None,
        )

    # -- whole attribute sets

    def attribute_nodes(self, inst: Instance, *, public_first: bool = False) -> tuple:
        entity = inst.entity
        base = canonical_instance_path(self.schema, inst)
        keys = annotation_keys(self.schema.entities[entity])
        if public_first:
            public = identifier_attr(self.annotations, entity, "publicIdentifier")
            keys.sort(key=lambda ka: (0 if ka[0] == public else 1, ka[0]))
        nodes = []
        for key, attr in keys:
            ann = self.annotations.get(entity, key)
            if ann is not None and ann.render == "hidden":
                continue
            top = key.split(".")[0]
            value = inst.values.get(top)
            if "." in key:
                value = value.get(key.split(".")[1]) if isinstance(value, dict) else None
            path = f"{base}.{key}"
            if attr.kind == "ARRY":
                nodes.append(self.collection_node(entity, key, attr, path, value if isinstance(value, list) else []))
            elif attr.kind == "PNTR":
                nodes.append(self.pointer_item(path, attr.target or "", value if isinstance(value, str) else None))
            else:
                nodes.append(self.field_node(entity, key, attr, path, value))
        return tuple(nodes)

    # -- instance orderings for entity panels

    def panel_instances(self, entity: str) -> list[Instance]:
        instances = self.data.instances_of(entity)
        view = self.views.get(entity, {})
        sort = view.get("sort")
        if sort:
            fname, direction = sort.get("field", ""), sort.get("direction", "asc")
            def sort_key(inst: Instance):
                value = inst.values.get(fname)
                return (value is None, value if isinstance(value, (int, float, str)) else str(value))
            instances.sort(key=sort_key, reverse=direction == "desc")
        return instances


# ---------------------------------------------------------------------------
# summaries


def compute_summary(spec: SummarySpec, items: list) -> object:
    """Derive the summary value of a collection.

    *items* are entity instances (for pointer arrays) or raw scalars.
    Empty collections sum to 0 and count to 0; avg/min/max of nothing is
    the empty marker ``None``.
    """
    def item_binding(item) -> object:
        return dict(item.values) if isinstance(item, Instance) else item

    if spec.predicate:
        kept = []
        for item in items:
            try:
                if evaluate_expression(spec.predicate, {"item": item_binding(item)}) is True:
                    kept.append(item)
            except ExprError:
                continue
        items = kept

    if spec.operation == "COUNT":
        return len(items)
    if spec.operation == "FILTER":
        return [item_binding(i) for i in items]

    values = []
    for item in items:
        value = item.values.get(spec.field) if isinstance(item, Instance) else item
        if value is None:
            continue
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ExprTypeError(f"{spec.operation} requires numeric values, got {type(value).__name__}")
        values.append(value)
    if spec.operation == "SUM":
        return sum(values) if values else 0
    if not values:
        return None
    if spec.operation == "AVG":
        return sum(values) / len(values)
    if spec.operation == "MIN":
        return min(values)
    if spec.operation == "MAX":
        return max(values)
    raise ExprTypeError(f"unknown summary operation {spec.operation!r}")


# ---------------------------------------------------------------------------
# panels and cards


def compile_home_panel(schema: Schema, annotations: AnnotationSet, data: DataSet,
                       views: Views | None = None) -> PanelNode:
    """The root task panel: every non-hidden root attribute in canonical order."""
    compiler = _Compiler(schema, annotations, data, views)
    root = data.instance(data.root_instance)
    return PanelNode(
        id="panel:home", kind="home", entity=schema.root, representation="list",
        title=_title(schema.root), children=compiler.attribute_nodes(root),
    )


def _location_key(schema: Schema, annotations: AnnotationSet, entity: str) -> str | None:
    for key, _ in annotation_keys(schema.entities[entity]):
        ann = annotations.get(entity, key)
        if ann is not None and ann.render == "location":
            return key
    return None


def compile_entity_panel(schema: Schema, annotations: AnnotationSet, data: DataSet,
                         entity: str, representation: str,
                         views: Views | None = None) -> PanelNode:
    """One panel per entity, as a list of cards, a table, or a map."""
    if entity not in schema.entities:
        raise WriteError("unknown-entity", f"unknown entity {entity!r}")
    if representation not in REPRESENTATIONS:
        raise RepresentationError(f"unknown representation {representation!r}")
    location = _location_key(schema, annotations, entity)
    if representation == "map" and location is None:
        raise RepresentationError(f"{entity} has no location-rendered attribute; map view unavailable")

    compiler = _Compiler(schema, annotations, data, views)
    instances = compiler.panel_instances(entity)
    public = identifier_attr(annotations, entity, "publicIdentifier")
    columns: tuple[str, ...] | None = None
    items: list = []

    if representation == "list":
        items = [compile_card(schema, annotations, data, inst.id, mode="panel", views=views)
                 for inst in instances]
    elif representation == "table":
        columns = tuple(
            key for key, _ in annotation_keys(schema.entities[entity])
            if not (annotations.get(entity, key) is not None
                    and annotations.get(entity, key).render == "hidden")
        )
        for inst in instances:
            cells = []
            base = canonical_instance_path(schema, inst)
            for key, attr in annotation_keys(schema.entities[entity]):
                if key not in columns:
                    continue
                path = f"{base}.{key}"
                value = inst.values.get(key.split(".")[0])
                if "." in key:
                    value = value.get(key.split(".")[1]) if isinstance(value, dict) else None
                if attr.kind == "ARRY":
                    cells.append(_folded_cell(compiler, inst.entity, key, attr, path,
                                              value if isinstance(value, list) else []))
                elif attr.kind == "PNTR":
                    cells.append(compiler.pointer_item(path, attr.target or "",
                                                       value if isinstance(value, str) else None))
                else:
                    cells.append(compiler.field_node(inst.entity, key, attr, path, value))
            items.append(ItemNode(
                id=f"item:{entity}:{inst.id}", path=str(base), object=inst.id,
                thumbnail=tuple(cells), detail=f"card:{inst.id}",
            ))
    else:  # map
        for inst in instances:
            names = tuple(n for n in (public, location) if n)
            node_id = f"item:{entity}:{inst.id}"
            items.append(ItemNode(
                id=node_id, path=str(canonical_instance_path(schema, inst)),
                object=inst.id,
                thumbnail=compiler.thumbnail_fields(entity, inst.id, names, node_id),
                detail=f"card:{inst.id}",
            ))

    collection = CollectionNode(
        id=f"coll:{entity}", path=entity, mode="expanded", label=_title(entity),
        items=tuple(items),
        affordances={"add_empty": True, "add_generate": True, "autocomplete": True},
        groups=compiler._groups(entity, AttributeDef(entity, "ARRY", item=ItemSpec(kind="PNTR", target=entity)),
                                [i.id for i in instances]),
        item_entity=entity,
    )
    return PanelNode(
        id=f"panel:{entity}", kind="entity", entity=entity, representation=representation,
        title=_title(entity), children=(collection,), columns=columns,
    )


def _folded_cell(compiler: _Compiler, entity: str, key: str, attr: AttributeDef,
                 path: str, elements: list) -> CollectionNode:
    """Array table cells fold into a summary button, e.g. "16 Shopping Items"."""
    ann = compiler.annotations.get(entity, key)
    if ann is not None and ann.summary is not None:
        return compiler.collection_node(entity, key, attr, path, elements)
    return CollectionNode(
        id=f"coll:{path}", path=path, mode="summary", label=_title(key),
        summary={"label": f"{len(elements)} {_title(key)}", "value": len(elements)},
        affordances={"add_empty": False, "add_generate": False, "autocomplete": False},
        item_entity=attr.item.target if attr.item else None,
    )


def compile_collection(schema: Schema, annotations: AnnotationSet, data: DataSet,
                       path: str, views: Views | None = None,
                       mode: str | None = "expanded") -> CollectionNode:
    """Ad-hoc compile of one array, optionally forcing expanded mode.

    Lets a frontend expand a summary button without mutating the session.
    """
    from .model import resolve_path
    from .store import get

    resolution = resolve_path(schema, path)
    if resolution.kind != "ARRY" or resolution.multiplicity != "one" or resolution.attribute is None:
        raise WriteError("unknown-path", f"{path}: not a single collection")
    compiler = _Compiler(schema, annotations, data, views)
    elements = get(schema, data, path)[0]
    node = compiler.collection_node(
        resolution.entity, resolution.attribute.name, resolution.attribute,
        path, elements if isinstance(elements, list) else [],
        mode_override=mode,
    )
    return node


def compile_card(schema: Schema, annotations: AnnotationSet, data: DataSet, oid: str,
                 mode: str = "popup", views: Views | None = None) -> CardNode:
    """Full detail card for one instance.

    The publicIdentifier renders first; referenced entities stay thumbnails
    (opening them is an explicit navigation), so cyclic references
    terminate.
    """
    inst = data.instance(oid)
    compiler = _Compiler(schema, annotations, data, views)
    return CardNode(
        id=f"card:{oid}", object=oid, mode=mode,
        children=compiler.attribute_nodes(inst, public_first=True),
    )


def choose_representation(schema: Schema, annotations: AnnotationSet, entity: str,
                          task_context: str = "") -> str:
    """Deterministic representation heuristic.

    Location data plus a routing/place-flavored task context selects the
    map; many comparable scalars select the table; otherwise a list.
    """
    if entity not in schema.entities:
        raise WriteError("unknown-entity", f"unknown entity {entity!r}")
    words = set(task_context.lower().replace(",", " ").split())
    has_location = _location_key(schema, annotations, entity) is not None
    if has_location and words & set(_ROUTE_WORDS):
        return "map"
    scalars = 0
    for key, attr in annotation_keys(schema.entities[entity]):
        ann = annotations.get(entity, key)
        if attr.kind == "SVAL" and (ann is None or ann.render != "hidden"):
            scalars += 1
    if scalars > 4:
        return "table"
    return "list"


def compile_document(schema: Schema, annotations: AnnotationSet, data: DataSet,
                     representations: dict[str, str] | None = None,
                     views: Views | None = None) -> UIDocument:
    """Home panel plus one panel per explicitly opened entity."""
    panels = [compile_home_panel(schema, annotations, data, views)]
    for entity in sorted(representations or {}):
        panels.append(compile_entity_panel(
            schema, annotations, data, entity, (representations or {})[entity], views))
    return UIDocument(panels=tuple(panels), focus="panel:home")


# ---------------------------------------------------------------------------
# document diffing

_CHILD_KEYS = {"document": "panels", "panel": "children", "collection": "items",
               "item": "thumbnail", "card": "children"}


@dataclass(frozen=True)
class UIDelta:
    ops: tuple[dict, ...] = ()

    @property
    def empty(self) -> bool:
        return not self.ops

    def to_json(self) -> list[dict]:
        return [dict(op) for op in self.ops]


def _child_list(node: dict) -> list:
    key = _CHILD_KEYS.get(node.get("node", ""))
    if key is None or key not in node:
        return []
    return node[key]


def _flatten(doc: dict) -> dict[str, dict]:
    """id -> {shallow, parent, index, children} for every node in the tree."""
    out: dict[str, dict] = {}

    def walk(node: dict, parent: str | None, index: int) -> None:
        children = _child_list(node)
        shallow = {k: v for k, v in node.items() if k != _CHILD_KEYS.get(node.get("node", ""))}
        out[node["id"]] = {
            "shallow": shallow, "parent": parent, "index": index,
            "children": [c["id"] for c in children], "node": node,
        }
        for i, child in enumerate(children):
            walk(child, node["id"], i)

    walk(doc, None, 0)
    return out


def diff_ui(old: UIDocument | dict, new: UIDocument | dict) -> UIDelta:
    """Minimal node-level delta; ``apply_ui_delta(old, delta)`` reproduces new."""
    old_json = old.to_json() if isinstance(old, UIDocument) else old
    new_json = new.to_json() if isinstance(new, UIDocument) else new
    old_flat = _flatten(old_json)
    new_flat = _flatten(new_json)

    replaced: set[str] = set()
    for node_id in new_flat:
        if node_id in old_flat and old_flat[node_id]["shallow"] != new_flat[node_id]["shallow"]:
            replaced.add(node_id)

    def under_marked(flat: dict[str, dict], node_id: str, marked: set[str], missing_in: dict | None) -> bool:
        parent = flat[node_id]["parent"]
        while parent is not None:
            if parent in marked:
                return True
            if missing_in is not None and parent not in missing_in:
                return True
            parent = flat[parent]["parent"]
        return False

    ops: list[dict] = []
    for node_id in old_flat:
        if node_id in new_flat:
            continue
        if under_marked(old_flat, node_id, replaced, new_flat):
            continue
        ops.append({"op": "remove", "id": node_id})

    for node_id in sorted(replaced):
        if not under_marked(new_flat, node_id, replaced, old_flat):
            ops.append({"op": "replace", "id": node_id, "node": new_flat[node_id]["node"]})

    adds: list[dict] = []
    moves: list[dict] = []
    for node_id in new_flat:
        info = new_flat[node_id]
        if node_id not in old_flat:
            if under_marked(new_flat, node_id, replaced, old_flat):
                continue
            if info["parent"] is not None and info["parent"] not in old_flat:
                continue  # covered by an added ancestor
            adds.append({"op": "add", "id": node_id, "parent": info["parent"],
                         "index": info["index"], "node": info["node"]})
        else:
            if node_id in replaced or under_marked(new_flat, node_id, replaced, old_flat):
                continue
            old_info = old_flat[node_id]
            if (old_info["parent"], old_info["index"]) != (info["parent"], info["index"]):
                moves.append({"op": "move", "id": node_id, "parent": info["parent"],
                              "index": info["index"]})

    adds.sort(key=lambda op: (op["parent"] or "", op["index"]))
    moves.sort(key=lambda op: (op["parent"] or "", op["index"]))
    return UIDelta(ops=tuple(ops[:]) + tuple(adds) + tuple(moves))


def apply_ui_delta(old: UIDocument | dict, delta: UIDelta) -> dict:
    """Apply a delta produced by :func:`diff_ui` to the old document JSON."""
    doc = copy.deepcopy(old.to_json() if isinstance(old, UIDocument) else old)

    def locate(node: dict, node_id: str) -> tuple[dict | None, list | None, dict | None]:
        if node["id"] == node_id:
            return None, None, node
        children = _child_list(node)
        for child in children:
            if child["id"] == node_id:
                return node, children, child
            found = locate(child, node_id)
            if found[2] is not None:
                return found
        return None, None, None

    ordered = [op for op in delta.ops if op["op"] == "remove"]
    ordered += [op for op in delta.ops if op["op"] == "replace"]
    inserts = [op for op in delta.ops if op["op"] in ("add", "move")]

    for op in ordered:
        parent, siblings, node = locate(doc, op["id"])
        if node is None:
            continue
        if op["op"] == "remove":
            if siblings is not None:
                siblings.remove(node)
        else:
            node.clear()
            node.update(copy.deepcopy(op["node"]))

    detached: dict[str, dict] = {}
    for op in inserts:
        if op["op"] == "move":
            _, siblings, node = locate(doc, op["id"])
            if node is not None and siblings is not None:
                siblings.remove(node)
                detached[op["id"]] = node

    for op in sorted(inserts, key=lambda o: (o["parent"] or "", o["index"])):
        _, _, parent = locate(doc, op["parent"]) if op["parent"] else (None, None, doc)
        if parent is None:
            continue
        children = _child_list(parent)
        payload = copy.deepcopy(op["node"]) if op["op"] == "add" else detached[op["id"]]
        children.insert(min(op["index"], len(children)), payload)
    return doc
