"""Object-relational schema and its UI annotations.

A schema names entities, each holding typed attributes of four kinds:

* ``SVAL`` — a single scalar value (``hint`` separates text from number),
* ``DICT`` — a flat group of named fields (no nested dictionaries),
* ``PNTR`` — a reference to another entity,
* ``ARRY`` — a collection of scalar or pointer items (never dictionaries).

One entity is the root task object. Annotations attach per-attribute UI
labels (function, render, editable, plus categories and array summaries)
that drive the rule-based compiler in :mod:`taskmold.uidoc`.

Validators never raise on bad content: they return a
:class:`~taskmold.reporting.ValidationReport` whose findings carry a path
and a rule id.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator

from .errors import PathResolutionError
from .paths import ATTR_RE, ENTITY_RE, Attr, IdSelector, Index, Path, Star, parse_path
from .reporting import ReportBuilder, ValidationReport

KINDS = ("SVAL", "DICT", "PNTR", "ARRY")
SCALAR_HINTS = ("text", "number")
FUNCTIONS = ("privateIdentifier", "publicIdentifier", "display")
SCALAR_RENDERS = ("shortText", "paragraph", "number", "url", "time", "location", "category", "hidden")
ARRAY_RENDERS = ("summary", "expanded")
SUMMARY_OPERATIONS = ("SUM", "AVG", "MIN", "MAX", "FILTER", "COUNT")
NUMERIC_OPERATIONS = ("SUM", "AVG", "MIN", "MAX")


# ---------------------------------------------------------------------------
# schema types


@dataclass(frozen=True)
class ItemSpec:
    """Element type of an ARRY attribute: a scalar or an entity pointer."""

    kind: str
    hint: str | None = None
    target: str | None = None
    thumbnail: tuple[str, ...] | None = None

    def to_json(self) -> dict:
        out: dict = {"kind": self.kind}
        if self.hint is not None:
            out["hint"] = self.hint
        if self.target is not None:
            out["target"] = self.target
        if self.thumbnail is not None:
            out["thumbnail"] = list(self.thumbnail)
        return out

    @classmethod
    def from_json(cls, raw: dict) -> "ItemSpec":
        if not isinstance(raw, dict):
            raise ValueError(f"item spec must be an object, got {type(raw).__name__}")
        thumb = raw.get("thumbnail")
        return cls(
            kind=raw.get("kind", ""),
            hint=raw.get("hint"),
            target=raw.get("target"),
            thumbnail=tuple(thumb) if thumb is not None else None,
        )


@dataclass(frozen=True)
class AttributeDef:
    """One typed attribute of an entity."""

    name: str
    kind: str
    hint: str | None = None
    target: str | None = None
    fields: tuple["AttributeDef", ...] | None = None
    item: ItemSpec | None = None

    def to_json(self) -> dict:
        out: dict = {"kind": self.kind}
        if self.hint is not None:
            out["hint"] = self.hint
        if self.target is not None:
            out["target"] = self.target
        if self.fields is not None:
            out["fields"] = {f.name: f.to_json() for f in self.fields}
        if self.item is not None:
            out["item"] = self.item.to_json()
        return out

    @classmethod
    def from_json(cls, name: str, raw: dict) -> "AttributeDef":
        if not isinstance(raw, dict):
            raise ValueError(f"attribute {name!r} must be an object")
        fields = None
        if "fields" in raw:
            fields = tuple(
                cls.from_json(fname, fraw) for fname, fraw in sorted(raw["fields"].items())
            )
        item = ItemSpec.from_json(raw["item"]) if "item" in raw else None
        return cls(
            name=name,
            kind=raw.get("kind", ""),
            hint=raw.get("hint"),
            target=raw.get("target"),
            fields=fields,
            item=item,
        )


@dataclass(frozen=True)
class EntityDef:
    name: str
    attributes: dict[str, AttributeDef] = field(default_factory=dict)

    def ordered_attributes(self) -> list[AttributeDef]:
        """Attributes in canonical (lexicographic) order."""
        return [self.attributes[k] for k in sorted(self.attributes)]

    def to_json(self) -> dict:
        return {"attributes": {name: a.to_json() for name, a in self.attributes.items()}}

    @classmethod
    def from_json(cls, name: str, raw: dict) -> "EntityDef":
        attrs_raw = raw.get("attributes", {})
        if not isinstance(attrs_raw, dict):
            raise ValueError(f"entity {name!r}: attributes must be an object")
        attrs = {
            aname: AttributeDef.from_json(aname, araw)
            for aname, araw in sorted(attrs_raw.items())
        }
        return cls(name=name, attributes=attrs)


@dataclass(frozen=True)
class Schema:
    entities: dict[str, EntityDef]
    root: str

    def entity(self, name: str) -> EntityDef:
        try:
            return self.entities[name]
        except KeyError:
            raise PathResolutionError("unknown-entity", f"unknown entity {name!r}") from None

    def ordered_entities(self) -> list[EntityDef]:
        return [self.entities[k] for k in sorted(self.entities)]

    def to_json(self) -> dict:
        return {
            "root": self.root,
            "entities": {name: e.to_json() for name, e in self.entities.items()},
        }

    @classmethod
    def from_json(cls, raw: dict) -> "Schema":
        if not isinstance(raw, dict):
            raise ValueError("schema must be an object")
        entities_raw = raw.get("entities", {})
        if not isinstance(entities_raw, dict):
            raise ValueError("schema entities must be an object")
        entities = {
            name: EntityDef.from_json(name, eraw) for name, eraw in sorted(entities_raw.items())
        }
        return cls(entities=entities, root=raw.get("root", ""))


# ---------------------------------------------------------------------------
# annotation types


@dataclass(frozen=True)
class SummarySpec:
    """How a summary-rendered array condenses into one derived value."""

    label: str
    operation: str
    field: str | None = None
    predicate: str | None = None

    def to_json(self) -> dict:
        out: dict = {"label": self.label, "derived": {"operation": self.operation, "field": self.field}}
        if self.predicate is not None:
            out["predicate"] = self.predicate
        return out

    @classmethod
    def from_json(cls, raw: dict) -> "SummarySpec":
        derived = raw.get("derived", {}) if isinstance(raw, dict) else {}
        return cls(
            label=raw.get("label", ""),
            operation=derived.get("operation", ""),
            field=derived.get("field"),
            predicate=raw.get("predicate"),
        )


@dataclass(frozen=True)
class Annotation:
    """UI label set for one attribute (or one DICT field)."""

    function: str | None = None
    render: str | None = None
    editable: bool | None = None
    categories: tuple[str, ...] | None = None
    summary: SummarySpec | None = None

    def to_json(self) -> dict:
        out: dict = {}
        if self.function is not None:
            out["function"] = self.function
        if self.render is not None:
            out["render"] = self.render
        if self.editable is not None:
            out["editable"] = self.editable
        if self.categories is not None:
            out["categories"] = list(self.categories)
        if self.summary is not None:
            out["summary"] = self.summary.to_json()
        return out

    @classmethod
    def from_json(cls, raw: dict) -> "Annotation":
        if not isinstance(raw, dict):
            raise ValueError("annotation must be an object")
        cats = raw.get("categories")
        return cls(
            function=raw.get("function"),
            render=raw.get("render"),
            editable=raw.get("editable"),
            categories=tuple(cats) if cats is not None else None,
            summary=SummarySpec.from_json(raw["summary"]) if "summary" in raw else None,
        )


@dataclass(frozen=True)
class AnnotationSet:
    """Per-attribute annotations, keyed entity -> attribute key.

    DICT attributes are not annotated themselves; their fields get keys of
    the form ``dict_attr.field``.
    """

    entities: dict[str, dict[str, Annotation]] = field(default_factory=dict)

    def get(self, entity: str, key: str) -> Annotation | None:
        return self.entities.get(entity, {}).get(key)

    def to_json(self) -> dict:
        return {
            entity: {key: ann.to_json() for key, ann in keys.items()}
            for entity, keys in self.entities.items()
        }

    @classmethod
    def from_json(cls, raw: dict) -> "AnnotationSet":
        if not isinstance(raw, dict):
            raise ValueError("annotation set must be an object")
        entities = {
            entity: {
                key: Annotation.from_json(araw) for key, araw in sorted(keys.items())
            }
            for entity, keys in sorted(raw.items())
        }
        return cls(entities=entities)


def annotation_keys(entity: EntityDef) -> list[tuple[str, AttributeDef]]:
    """All keys requiring an annotation for *entity*, with their defs.

    DICT attributes contribute one key per field; the DICT itself none.
    """
    keys: list[tuple[str, AttributeDef]] = []
    for attr in entity.ordered_attributes():
        if attr.kind == "DICT":
            for f in attr.fields or ():
                keys.append((f"{attr.name}.{f.name}", f))
        else:
            keys.append((attr.name, attr))
    return keys


def identifier_attr(annotations: AnnotationSet, entity: str, function: str) -> str | None:
    """Attribute key annotated with the given identifier *function*, if any."""
    for key in sorted(annotations.entities.get(entity, {})):
        ann = annotations.entities[entity][key]
        if ann.function == function:
            return key
    return None


def effective_thumbnail(schema: Schema, annotations: AnnotationSet, item: ItemSpec) -> tuple[str, ...]:
    """Thumbnail attribute names for a pointer item, applying the default.

    Falls back to the target's publicIdentifier, then to its first
    non-hidden attribute in canonical order.
    """
    if item.thumbnail:
        return item.thumbnail
    target = item.target or ""
    public = identifier_attr(annotations, target, "publicIdentifier")
    if public is not None:
        return (public,)
    for key, _ in annotation_keys(schema.entities.get(target, EntityDef(target))):
        ann = annotations.get(target, key)
        if ann is None or ann.render != "hidden":
            return (key,)
    return ()


# ---------------------------------------------------------------------------
# schema validation


def _check_scalar_hint(rb: ReportBuilder, path: str, hint: str | None) -> None:
    if hint not in SCALAR_HINTS:
        rb.add(path, "kind-fields", f"SVAL requires hint in {SCALAR_HINTS}, got {hint!r}")


def _check_attribute(rb: ReportBuilder, schema: Schema, path: str, attr: AttributeDef, *, in_dict: bool) -> None:
    if not ATTR_RE.match(attr.name):
        rb.add(path, "attribute-name-format", f"attribute name {attr.name!r} is not lower-snake")
    if attr.kind not in KINDS:
        rb.add(path, "kind-fields", f"unknown attribute kind {attr.kind!r}")
        return

    populated = {
        "hint": attr.hint is not None,
        "target": attr.target is not None,
        "fields": attr.fields is not None,
        "item": attr.item is not None,
    }
    expected = {"SVAL": {"hint"}, "DICT": {"fields"}, "PNTR": {"target"}, "ARRY": {"item"}}[attr.kind]
    extras = {name for name, on in populated.items() if on} - expected
    missing = expected - {name for name, on in populated.items() if on}
    for name in sorted(extras):
        rb.add(path, "kind-fields", f"{attr.kind} attribute must not define {name!r}")
    for name in sorted(missing):
        rb.add(path, "kind-fields", f"{attr.kind} attribute requires {name!r}")

    if attr.kind == "SVAL" and attr.hint is not None:
        _check_scalar_hint(rb, path, attr.hint)
    elif attr.kind == "PNTR" and attr.target is not None:
        if attr.target not in schema.entities:
            rb.add(path, "pntr-unknown-entity", f"pointer target {attr.target!r} is not an entity")
    elif attr.kind == "DICT" and attr.fields is not None:
        if in_dict:
            rb.add(path, "nested-dict", "dictionaries may not nest")
        for f in attr.fields:
            fpath = f"{path}.{f.name}"
            if f.kind == "DICT":
                rb.add(fpath, "nested-dict", "dictionary fields may not be dictionaries")
                continue
            _check_attribute(rb, schema, fpath, f, in_dict=True)
    elif attr.kind == "ARRY" and attr.item is not None:
        _check_item(rb, schema, path, attr.item)


def _check_item(rb: ReportBuilder, schema: Schema, path: str, item: ItemSpec) -> None:
    ipath = f"{path}[*]"
    if item.kind == "DICT":
        rb.add(path, "no-array-of-dict", "arrays of dictionaries are not allowed")
        return
    if item.kind not in ("SVAL", "PNTR"):
        rb.add(path, "kind-fields", f"array items must be SVAL or PNTR, got {item.kind!r}")
        return
    if item.kind == "SVAL":
        _check_scalar_hint(rb, ipath, item.hint)
        if item.target is not None:
            rb.add(ipath, "kind-fields", "SVAL items must not define 'target'")
        if item.thumbnail is not None:
            rb.add(ipath, "thumbnail-on-sval", "thumbnails apply only to pointer items")
    else:
        if item.hint is not None:
            rb.add(ipath, "kind-fields", "PNTR items must not define 'hint'")
        if item.target is None:
            rb.add(ipath, "kind-fields", "PNTR items require 'target'")
        elif item.target not in schema.entities:
            rb.add(ipath, "pntr-unknown-entity", f"pointer target {item.target!r} is not an entity")
        elif item.thumbnail is not None:
            target = schema.entities[item.target]
            known = {key for key, _ in annotation_keys(target)}
            for name in item.thumbnail:
                if name not in known:
                    rb.add(ipath, "unknown-thumbnail-attribute",
                           f"thumbnail attribute {name!r} not on entity {item.target!r}")


def validate_schema(schema: Schema) -> ValidationReport:
    """Check every schema invariant; an empty report means the schema is valid."""
    rb = ReportBuilder()
    if schema.root not in schema.entities:
        rb.add(schema.root or "<root>", "root-unknown", f"root {schema.root!r} names no entity")
    for ename in sorted(schema.entities):
        entity = schema.entities[ename]
        if not ENTITY_RE.match(ename):
            rb.add(ename, "entity-name-format", f"entity name {ename!r} is not upper-snake")
        seen: set[str] = set()
        for aname in sorted(entity.attributes):
            attr = entity.attributes[aname]
            path = f"{ename}.{aname}"
            _check_attribute(rb, schema, path, attr, in_dict=False)
            names = [aname] + [f.name for f in attr.fields or ()]
            for n in names:
                if n in seen:
                    rb.add(path, "duplicate-attribute",
                           f"name {n!r} already used within entity {ename!r}")
                seen.add(n)
    return rb.report()


# ---------------------------------------------------------------------------
# annotation validation



def _item_field_def(schema: Schema, item: ItemSpec, name: str | None) -> AttributeDef | None:
    if item.kind != "PNTR" or item.target not in schema.entities:
        return None
    if name is None:
        return None
    for key, fdef in annotation_keys(schema.entities[item.target]):
        if key == name:
            return fdef
    return None


def _check_summary(rb: ReportBuilder, schema: Schema, path: str, attr: AttributeDef, spec: SummarySpec) -> None:
    if spec.operation not in SUMMARY_OPERATIONS:
        rb.add(path, "bad-summary-operation",
               f"summary operation must be one of {SUMMARY_OPERATIONS}, got {spec.operation!r}")
        return
    counting = spec.operation in ("COUNT", "FILTER")
    item = attr.item or ItemSpec(kind="SVAL")
    if item.kind == "PNTR":
        fdef = _item_field_def(schema, item, spec.field)
        if fdef is None and not (counting and spec.field is None):
            rb.add(path, "summary-field-unknown",
                   f"summary field {spec.field!r} not on item entity {item.target!r}")
        elif spec.operation in NUMERIC_OPERATIONS:
            assert fdef is not None
            if not (fdef.kind == "SVAL" and fdef.hint == "number"):
                rb.add(path, "summary-field-not-numeric",
                       f"{spec.operation} requires a numeric field, {spec.field!r} is not")
    else:
        # scalar items: the values themselves are summarized, so field stays null
        if spec.field is not None:
            rb.add(path, "summary-field-unknown",
                   "scalar array summaries derive from the items themselves; field must be null")
        elif spec.operation in NUMERIC_OPERATIONS and item.hint != "number":
            rb.add(path, "summary-field-not-numeric",
                   f"{spec.operation} over non-numeric items")
    if spec.predicate is not None:
        if spec.operation not in ("FILTER", "COUNT"):
            rb.add(path, "predicate-not-allowed", "predicates apply only to FILTER and COUNT")
        else:
            from .expr import parse_expression  # local import: expr has no model dependency

            try:
                parse_expression(spec.predicate)
            except Exception as exc:
                rb.add(path, "predicate-parse-error", f"summary predicate does not parse: {exc}")


def _check_annotation(rb: ReportBuilder, schema: Schema, path: str, attr: AttributeDef, ann: Annotation) -> None:
    for fname in ("function", "render", "editable"):
        if getattr(ann, fname) is None:
            rb.add(path, "missing-field", f"annotation is missing {fname!r}")
    if ann.function is not None and ann.function not in FUNCTIONS:
        rb.add(path, "bad-function", f"function must be one of {FUNCTIONS}, got {ann.function!r}")

    is_array = attr.kind == "ARRY"
    allowed = ARRAY_RENDERS if is_array else SCALAR_RENDERS
    if ann.render is not None and ann.render not in allowed:
        rb.add(path, "bad-render",
               f"render for {'an array' if is_array else 'a non-array'} must be one of {allowed}, got {ann.render!r}")

    if ann.render == "category" and not ann.categories:
        rb.add(path, "empty-categories", "render 'category' requires a non-empty categories list")
    if ann.categories is not None and ann.render != "category":
        rb.add(path, "unexpected-field", "categories are only valid with render 'category'")

    if ann.render == "summary" and is_array:
        if ann.summary is None:
            rb.add(path, "missing-summary", "render 'summary' requires a summary spec")
        else:
            _check_summary(rb, schema, path, attr, ann.summary)
    elif ann.summary is not None:
        rb.add(path, "unexpected-field", "summary is only valid on summary-rendered arrays")


def validate_annotations(schema: Schema, annotations: AnnotationSet) -> ValidationReport:
    """Check that every attribute carries exactly one well-formed annotation.

    Precondition: *schema* passes :func:`validate_schema`.
    """
    rb = ReportBuilder()
    for ename in sorted(schema.entities):
        entity = schema.entities[ename]
        expected = dict(annotation_keys(entity))
        present = annotations.entities.get(ename, {})
        for key in sorted(expected):
            path = f"{ename}.{key}"
            if key not in present:
                rb.add(path, "missing-annotation", "attribute has no annotation")
                continue
            _check_annotation(rb, schema, path, expected[key], present[key])
        for key in sorted(present):
            path = f"{ename}.{key}"
            if key in expected:
                continue
            if key in entity.attributes and entity.attributes[key].kind == "DICT":
                rb.add(path, "dict-annotated",
                       "DICT attributes are not annotated; annotate their fields instead")
            else:
                rb.add(path, "unknown-attribute", f"annotation for unknown attribute {key!r}")
        for function in ("privateIdentifier", "publicIdentifier"):
            holders = [k for k in sorted(present) if present[k].function == function]
            if len(holders) > 1:
                rb.add(f"{ename}.{holders[1]}", "duplicate-identifier",
                       f"entity {ename!r} has more than one {function}")
    for ename in sorted(annotations.entities):
        if ename not in schema.entities:
            rb.add(ename, "unknown-attribute", f"annotations for unknown entity {ename!r}")
    return rb.report()


# ---------------------------------------------------------------------------
# default annotations

_TIME_WORDS = ("date", "time", "when", "deadline", "schedule")
_LOCATION_WORDS = ("location", "address", "place")
_URL_WORDS = ("url", "link", "website", "email")
_PARAGRAPH_WORDS = ("description", "notes", "summary", "details", "review")


def _default_scalar_render(attr: AttributeDef) -> str:
    if attr.hint == "number":
        return "number"
    name = attr.name
    if any(w in name for w in _TIME_WORDS):
        return "time"
    if any(w in name for w in _LOCATION_WORDS):
        return "location"
    if any(w in name for w in _URL_WORDS):
        return "url"
    if any(w in name for w in _PARAGRAPH_WORDS):
        return "paragraph"
    return "shortText"


def default_annotations(schema: Schema) -> AnnotationSet:
    """Derive a total annotation set from deterministic naming rules.

    ``id`` becomes the hidden privateIdentifier, ``name``/``title`` the
    publicIdentifier, number-hinted scalars render as numbers, arrays
    render expanded. The output always passes :func:`validate_annotations`.
    """
    out: dict[str, dict[str, Annotation]] = {}
    for ename in sorted(schema.entities):
        entity = schema.entities[ename]
        anns: dict[str, Annotation] = {}
        public_taken = False
        for key, attr in annotation_keys(entity):
            if attr.kind == "ARRY":
                anns[key] = Annotation(function="display", render="expanded", editable=True)
            elif attr.kind == "PNTR":
                anns[key] = Annotation(function="display", render="shortText", editable=True)
            elif attr.name == "id":
                anns[key] = Annotation(function="privateIdentifier", render="hidden", editable=False)
            elif attr.name in ("name", "title") and "." not in key and not public_taken:
                anns[key] = Annotation(function="publicIdentifier", render="shortText", editable=True)
                public_taken = True
            else:
                anns[key] = Annotation(function="display", render=_default_scalar_render(attr), editable=True)
        out[ename] = anns
    return AnnotationSet(entities=out)


# ---------------------------------------------------------------------------
# path resolution


@dataclass(frozen=True)
class PathResolution:
    """What a path denotes under a schema."""

    path: Path
    kind: str  # entity-root | SVAL | DICT | PNTR | ARRY
    multiplicity: str  # one | many
    entity: str
    attribute: AttributeDef | None = None
    item: ItemSpec | None = None
    at_item: bool = False

    @property
    def hint(self) -> str | None:
        if self.at_item and self.item is not None:
            return self.item.hint
        return self.attribute.hint if self.attribute else None

    @property
    def target(self) -> str | None:
        if self.at_item and self.item is not None:
            return self.item.target
        return self.attribute.target if self.attribute else None

    def describe(self) -> str:
        if self.kind == "entity-root":
            return "entity-root"
        if self.kind == "SVAL":
            return f"SVAL-{self.hint}"
        if self.kind == "PNTR":
            return f"PNTR->{self.target}"
        if self.kind == "ARRY":
            item = (self.attribute.item if self.attribute else None) or ItemSpec(kind="?")
            inner = f"SVAL-{item.hint}" if item.kind == "SVAL" else f"PNTR->{item.target}"
            return f"ARRY of {inner}"
        return self.kind


def _mismatch(path: Path, message: str) -> PathResolutionError:
    return PathResolutionError("kind-mismatch", f"{path}: {message}")


def resolve_path(schema: Schema, path: Path | str) -> PathResolution:
    """Resolve *path* to the schema element it denotes.

    Pointer hops are followed: ``DINNER_PLAN.menu[*].calories`` lands on
    the ``calories`` attribute of the dish entity with multiplicity many.
    """
    if isinstance(path, str):
        path = parse_path(path)
    if path.entity not in schema.entities:
        raise PathResolutionError("unknown-entity", f"unknown entity {path.entity!r}")

    entity = path.entity
    mult = "one" if entity == schema.root else "many"
    attr: AttributeDef | None = None
    at_item = False  # positioned on the item of attr (after indexing an ARRY)

    for step in path.steps:
        current_kind = _position_kind(attr, at_item)
        if isinstance(step, Attr):
            if current_kind == "entity-root":
                owner = schema.entity(entity)
                if step.name not in owner.attributes:
                    raise PathResolutionError(
                        "unknown-attribute", f"{path}: entity {entity!r} has no attribute {step.name!r}")
                attr, at_item = owner.attributes[step.name], False
            elif current_kind == "DICT":
                assert attr is not None
                fields = {f.name: f for f in attr.fields or ()}
                if step.name not in fields:
                    raise PathResolutionError(
                        "unknown-attribute", f"{path}: dictionary {attr.name!r} has no field {step.name!r}")
                attr, at_item = fields[step.name], False
            elif current_kind == "PNTR":
                target = (attr.item.target if at_item and attr and attr.item else attr.target if attr else None)
                if target is None or target not in schema.entities:
                    raise PathResolutionError("unknown-entity", f"{path}: unresolved pointer target")
                owner = schema.entities[target]
                if step.name not in owner.attributes:
                    raise PathResolutionError(
                        "unknown-attribute", f"{path}: entity {target!r} has no attribute {step.name!r}")
                entity, attr, at_item = target, owner.attributes[step.name], False
            elif current_kind == "ARRY":
                raise _mismatch(path, f"select an element before {step}")
            else:
                raise _mismatch(path, f"cannot take {step} on a scalar value")
        elif isinstance(step, (Index, Star, IdSelector)):
            if current_kind == "entity-root":
                if isinstance(step, Index):
                    raise _mismatch(path, "entities are selected by [id=...], not by position")
                mult = "many" if isinstance(step, Star) else "one"
            elif current_kind == "ARRY":
                assert attr is not None and attr.item is not None
                if isinstance(step, IdSelector) and attr.item.kind != "PNTR":
                    raise _mismatch(path, "[id=...] selects pointer items only")
                if isinstance(step, Star):
                    mult = "many"
                at_item = True
            else:
                raise _mismatch(path, f"cannot index into a {current_kind}")

    kind = _position_kind(attr, at_item)
    return PathResolution(
        path=path, kind=kind, multiplicity=mult, entity=entity, attribute=attr,
        item=attr.item if attr else None, at_item=at_item,
    )


def _position_kind(attr: AttributeDef | None, at_item: bool) -> str:
    if attr is None:
        return "entity-root"
    if at_item:
        return (attr.item.kind if attr.item else "SVAL")
    return attr.kind


def path_coordinates(schema: Schema, path: Path | str) -> list[tuple[str, str | None]]:
    """Coarse (entity, attribute) pairs a path touches, pointer hops included.

    Used for dependency triggering and cycle detection. A bare entity path
    yields ``(entity, None)``, meaning "any attribute of the entity".
    Dictionary fields collapse onto their DICT attribute.
    """
    if isinstance(path, str):
        path = parse_path(path)
    resolve_path(schema, path)  # surface resolution errors first
    coords: list[tuple[str, str | None]] = []
    entity = path.entity
    attr: AttributeDef | None = None
    at_item = False
    for step in path.steps:
        kind = _position_kind(attr, at_item)
        if isinstance(step, Attr):
            if kind == "entity-root":
                attr = schema.entities[entity].attributes[step.name]
                coords.append((entity, step.name))
            elif kind == "DICT":
                assert attr is not None
                attr = {f.name: f for f in attr.fields or ()}[step.name]
            elif kind == "PNTR":
                target = (attr.item.target if at_item and attr and attr.item else attr.target)  # type: ignore[union-attr]
                entity = target or entity
                attr = schema.entities[entity].attributes[step.name]
                coords.append((entity, step.name))
            at_item = False
        elif isinstance(step, (Index, Star, IdSelector)) and kind == "ARRY":
            at_item = True
    if not coords:
        coords.append((entity, None))
    return coords


def coordinates_overlap(a: list[tuple[str, str | None]], b: list[tuple[str, str | None]]) -> bool:
    """Whether two coordinate sets can touch the same values."""
    for ea, aa in a:
        for eb, ab in b:
            if ea != eb:
                continue
            if aa is None or ab is None or aa == ab:
                return True
    return False


def enumerate_paths(schema: Schema, *, max_hops: int = 2) -> Iterator[Path]:
    """All schema-addressable paths, following at most *max_hops* pointer hops.

    Cycle-safe: an entity is not re-entered within one branch.
    """
    def walk(base: Path, entity: str, hops: int, visited: frozenset[str]) -> Iterator[Path]:
        for attr in schema.entities[entity].ordered_attributes():
            apath = base.attr(attr.name)
            yield apath
            if attr.kind == "DICT":
                for f in attr.fields or ():
                    yield apath.attr(f.name)
            elif attr.kind == "PNTR":
                if attr.target in schema.entities and hops > 0 and attr.target not in visited:
                    yield from walk(apath, attr.target, hops - 1, visited | {attr.target})
            elif attr.kind == "ARRY" and attr.item is not None:
                starred = apath.child(Star())
                yield starred
                item = attr.item
                if item.kind == "PNTR" and item.target in schema.entities:
                    if hops > 0 and item.target not in visited:
                        yield from walk(starred, item.target, hops - 1, visited | {item.target})

    for ename in sorted(schema.entities):
        root = Path(ename)
        yield root
        yield from walk(root, ename, max_hops, frozenset({ename}))
