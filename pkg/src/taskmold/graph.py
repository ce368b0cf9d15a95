"""Dependency graph construction, evaluation, and propagation.

A dependency relates a source path to a target path with one of two
mechanisms: ``Validate`` edges veto writes whose hypothetical result
breaks a predicate, ``Update`` edges recompute their target when their
source changes. Relationships are either expressions in the restricted
language of :mod:`taskmold.expr` or natural-language text delegated to an
external executor.

An edge fires once per instance of its scope entity (the root entity of
its target path; the task root has exactly one instance). ``source`` and
``target`` bind to the owning instance values, so an expression reads
``source.menu[*].calories`` rather than bare column names.

Update edges must form a DAG over coarse (entity, attribute) coordinates;
build_graph rejects cycles outright, which guarantees propagation
terminates.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Callable

from . import expr as expr_mod
from .canonical import digest
from .errors import ExprError, GraphBuildError, PropagationBudgetError, WriteError
from .model import Schema, coordinates_overlap, path_coordinates, resolve_path
from .paths import IdSelector, Path, parse_path
from .store import DataSet, Instance, canonical_instance_path, set_value

Value = Any
Coords = tuple[tuple[str, str | None], ...]
NlExecutor = Callable[["Dependency", Value, Value], Value]


@dataclass(frozen=True)
class Relationship:
    code: str | None = None
    natural: str | None = None

    def to_json(self) -> dict:
        return {"code": self.code} if self.code is not None else {"natural": self.natural}

    @classmethod
    def from_json(cls, raw: dict) -> "Relationship":
        return cls(code=raw.get("code"), natural=raw.get("natural"))


@dataclass(frozen=True)
class Dependency:
    source: str
    target: str
    mechanism: str  # Validate | Update
    relationship: Relationship

    def to_json(self) -> dict:
        return {
            "source": self.source,
            "target": self.target,
            "mechanism": self.mechanism,
            "relationship": self.relationship.to_json(),
        }

    @classmethod
    def from_json(cls, raw: dict) -> "Dependency":
        return cls(
            source=raw.get("source", ""),
            target=raw.get("target", ""),
            mechanism=raw.get("mechanism", ""),
            relationship=Relationship.from_json(raw.get("relationship", {})),
        )


@dataclass(frozen=True)
class DependencyViolation:
    dependency: int
    message: str
    path: str
    value: Value = None
    code: str = "violated"  # violated | evaluation-failed | stale

    def to_json(self) -> dict:
        return {
            "dependency": self.dependency,
            "message": self.message,
            "path": self.path,
            "value": self.value,
            "code": self.code,
        }


@dataclass(frozen=True)
class ExecutionBudget:
    max_expression_steps: int = 10_000
    max_propagation_rounds: int = 25

    def __post_init__(self) -> None:
        if self.max_expression_steps <= 0 or self.max_propagation_rounds <= 0:
            raise ValueError("budgets must be positive")


DEFAULT_BUDGET = ExecutionBudget()


@dataclass(frozen=True)
class DependencyGraph:
    edges: tuple[Dependency, ...]
    order: tuple[int, ...]  # Update edge indexes in topological order
    reads: tuple[Coords, ...] = ()
    writes: tuple[Coords, ...] = ()

    def to_json(self) -> list[dict]:
        return [e.to_json() for e in self.edges]


# ---------------------------------------------------------------------------
# construction


def _edge_error(index: int, edge: Dependency, code: str, why: str) -> GraphBuildError:
    return GraphBuildError(code, f"dependency {index} ({edge.source} -> {edge.target}): {why}")


def build_graph(schema: Schema, deps: list[Dependency]) -> DependencyGraph:
    """Resolve endpoints, reject Update cycles, and fix a stable firing order."""
    reads: list[Coords] = []
    writes: list[Coords] = []
    for i, edge in enumerate(deps):
        if edge.mechanism not in ("Validate", "Update"):
            raise _edge_error(i, edge, "invalid-edge", f"unknown mechanism {edge.mechanism!r}")
        variants = [v for v in (edge.relationship.code, edge.relationship.natural) if v is not None]
        if len(variants) != 1:
            raise _edge_error(i, edge, "invalid-edge", "relationship must be exactly one of code or natural")
        if edge.relationship.code is not None:
            try:
                expr_mod.parse_expression(edge.relationship.code)
            except ExprError as exc:
                raise _edge_error(i, edge, "invalid-edge", f"code relationship does not parse: {exc}") from exc
        for label, text in (("source", edge.source), ("target", edge.target)):
            try:
                resolve_path(schema, text)
            except Exception as exc:
                raise _edge_error(i, edge, "unresolved-endpoint", f"{label} {text!r}: {exc}") from exc
        if str(parse_path(edge.source)) == str(parse_path(edge.target)):
            code = "cycle-detected" if edge.mechanism == "Update" else "invalid-edge"
            raise _edge_error(i, edge, code, "source and target must differ")
        reads.append(tuple(path_coordinates(schema, edge.source)))
        writes.append(tuple(path_coordinates(schema, edge.target)))

    update_indexes = [i for i, e in enumerate(deps) if e.mechanism == "Update"]
    successors: dict[int, list[int]] = {i: [] for i in update_indexes}
    indegree: dict[int, int] = {i: 0 for i in update_indexes}
    for a in update_indexes:
        for b in update_indexes:
            if a != b and coordinates_overlap(list(writes[a]), list(reads[b])):
                successors[a].append(b)
                indegree[b] += 1

    order: list[int] = []
    ready = sorted(i for i in update_indexes if indegree[i] == 0)
    while ready:
        node = ready.pop(0)
        order.append(node)
        for nxt in successors[node]:
            indegree[nxt] -= 1
            if indegree[nxt] == 0:
                ready.append(nxt)
        ready.sort()
    if len(order) != len(update_indexes):
        stuck = [i for i in update_indexes if i not in order]
        cycle_paths = ", ".join(f"{deps[i].source} -> {deps[i].target}" for i in stuck)
        raise GraphBuildError("cycle-detected", f"Update edges form a cycle through: {cycle_paths}")

    return DependencyGraph(
        edges=tuple(deps), order=tuple(order), reads=tuple(reads), writes=tuple(writes)
    )


# ---------------------------------------------------------------------------
# evaluation


def evaluate_expr(
    expr: str,
    bindings: dict[str, Value],
    budget: ExecutionBudget = DEFAULT_BUDGET,
    deref: expr_mod.Deref | None = None,
    stats: dict | None = None,
) -> Value:
    """Evaluate a relationship expression under a step budget."""
    return expr_mod.evaluate_expression(
        expr, bindings, max_steps=budget.max_expression_steps, deref=deref, stats=stats
    )


def _data_deref(data: DataSet) -> expr_mod.Deref:
    def deref(oid: str) -> dict | None:
        inst = data.instances.get(oid)
        return dict(inst.values) if inst is not None else None

    return deref


def _scope_instances(schema: Schema, data: DataSet, edge: Dependency) -> list[Instance]:
    root = parse_path(edge.target).entity
    if root == schema.root:
        return [data.instance(data.root_instance)]
    return data.instances_of(root)


def _bindings(schema: Schema, data: DataSet, edge: Dependency, scope: Instance) -> dict[str, Value]:
    target_value = dict(scope.values)
    source_root = parse_path(edge.source).entity
    if source_root == scope.entity:
        source_value: Value = target_value
    elif source_root == schema.root:
        source_value = dict(data.instance(data.root_instance).values)
    else:
        source_value = [dict(i.values) for i in data.instances_of(source_root)]
    return {"source": source_value, "target": target_value}


def _target_path(schema: Schema, edge: Dependency, scope: Instance) -> Path:
    base = canonical_instance_path(schema, scope)
    return Path(base.entity, base.steps + parse_path(edge.target).steps)


def _source_value_hash(schema: Schema, data: DataSet, edge: Dependency, scope: Instance) -> str:
    """Hash of the value at the source path, scoped like the edge itself."""
    from .store import get

    source = parse_path(edge.source)
    if source.entity == scope.entity and scope.entity != schema.root:
        concrete = Path(scope.entity, (IdSelector(scope.id),) + source.steps)
    else:
        concrete = source
    try:
        return digest(get(schema, data, concrete))
    except Exception:
        return digest(None)


def _evaluate_edge(
    schema: Schema,
    data: DataSet,
    index: int,
    edge: Dependency,
    scope: Instance,
    budget: ExecutionBudget,
    nl_executor: NlExecutor | None,
    nl_cache: dict | None,
) -> Value:
    bindings = _bindings(schema, data, edge, scope)
    if edge.relationship.code is not None:
        return evaluate_expr(edge.relationship.code, bindings, budget, deref=_data_deref(data))
    if nl_executor is None:
        raise ExprError("natural-language relationship has no executor attached")
    key = (index, scope.id, _source_value_hash(schema, data, edge, scope))
    if nl_cache is not None and key in nl_cache:
        return nl_cache[key]
    result = nl_executor(edge, bindings["source"], bindings["target"])
    if nl_cache is not None:
        nl_cache[key] = result
    return result


# ---------------------------------------------------------------------------
# write checking


@dataclass(frozen=True)
class CheckResult:
    accepted: bool
    violations: tuple[DependencyViolation, ...] = ()


def check_write(
    graph: DependencyGraph,
    schema: Schema,
    data: DataSet,
    path: str,
    value: Value,
    budget: ExecutionBudget = DEFAULT_BUDGET,
    nl_executor: NlExecutor | None = None,
) -> CheckResult:
    """Evaluate overlapping Validate edges against the hypothetical post-write state.

    Fail-closed: an edge that cannot be evaluated rejects the write with an
    ``evaluation-failed`` violation. The input dataset is never modified.
    """
    write_coords = path_coordinates(schema, path)
    hypothetical = set_value(schema, data, path, value).data
    violations: list[DependencyViolation] = []
    for i, edge in enumerate(graph.edges):
        if edge.mechanism != "Validate":
            continue
        touched = list(graph.reads[i]) + list(graph.writes[i])
        if not coordinates_overlap(write_coords, touched):
            continue
        for scope in _scope_instances(schema, hypothetical, edge):
            try:
                result = _evaluate_edge(schema, hypothetical, i, edge, scope, budget, nl_executor, None)
            except ExprError as exc:
                violations.append(DependencyViolation(
                    dependency=i, message=f"constraint could not be evaluated: {exc}",
                    path=path, value=value, code="evaluation-failed"))
                continue
            if result is not True:
                text = edge.relationship.code or edge.relationship.natural or ""
                violations.append(DependencyViolation(
                    dependency=i, message=f"constraint violated: {text}",
                    path=path, value=value, code="violated"))
    return CheckResult(accepted=not violations, violations=tuple(violations))


# ---------------------------------------------------------------------------
# propagation


@dataclass(frozen=True)
class PropagationResult:
    data: DataSet
    updated: tuple[str, ...]
    violations: tuple[DependencyViolation, ...]


def propagate(
    graph: DependencyGraph,
    schema: Schema,
    data: DataSet,
    changed: list[str],
    budget: ExecutionBudget = DEFAULT_BUDGET,
    nl_executor: NlExecutor | None = None,
    nl_cache: dict | None = None,
) -> PropagationResult:
    """Fire Update edges whose sources were touched, to a fixpoint.

    Edges fire in topological order, at most once per round; each round
    re-dirties only what actually changed, so on an acyclic graph the
    result equals the naive repeat-until-stable computation. Exceeding the
    round budget raises, leaving the caller's dataset untouched. A failing
    edge (bad expression, missing executor) is reported as a stale-edge
    violation without stopping the others.
    """
    if not changed:
        return PropagationResult(data=data, updated=(), violations=())
    dirty: list[tuple[str, str | None]] = []
    for path in changed:
        dirty.extend(path_coordinates(schema, path))

    current = data
    updated: list[str] = []
    violations: list[DependencyViolation] = []
    rounds = 0
    while dirty:
        rounds += 1
        if rounds > budget.max_propagation_rounds:
            raise PropagationBudgetError(
                f"propagation still unstable after {budget.max_propagation_rounds} rounds")
        next_dirty: list[tuple[str, str | None]] = []
        for i in graph.order:
            edge = graph.edges[i]
            if not coordinates_overlap(list(graph.reads[i]), dirty):
                continue
            for scope in _scope_instances(schema, current, edge):
                try:
                    value = _evaluate_edge(schema, current, i, edge, scope, budget, nl_executor, nl_cache)
                    target = _target_path(schema, edge, scope)
                    result = set_value(schema, current, target, value)
                except (ExprError, WriteError) as exc:
                    code = "stale" if edge.relationship.natural is not None else "evaluation-failed"
                    violations.append(DependencyViolation(
                        dependency=i, message=f"update edge failed: {exc}",
                        path=edge.target, code=code))
                    continue
                if result.changed:
                    current = result.data
                    updated.extend(result.changed)
                    next_dirty.extend(graph.writes[i])
        dirty = next_dirty
    return PropagationResult(data=current, updated=tuple(updated), violations=tuple(violations))


# ---------------------------------------------------------------------------
# lint


@dataclass(frozen=True)
class LintFinding:
    dependency: int
    code: str  # reversed | redundant | shared-target
    message: str

    def to_json(self) -> dict:
        return {"dependency": self.dependency, "code": self.code, "message": self.message}


_IDENTITY_CODES = ("source",)


def lint_dependencies(schema: Schema, deps: list[Dependency]) -> list[LintFinding]:
    """Flag suspect edges: reversed binding usage, schema-duplicating edges,
    and Update edges competing for one target."""
    findings: list[LintFinding] = []
    for i, edge in enumerate(deps):
        if edge.relationship.code is not None and edge.mechanism == "Update":
            try:
                names = expr_mod.names_used(expr_mod.parse_expression(edge.relationship.code))
            except ExprError:
                names = set()
            if "target" in names and "source" not in names:
                findings.append(LintFinding(
                    dependency=i, code="reversed",
                    message="Update edge computes from target bindings only; "
                            "source and target look swapped"))
        try:
            res = resolve_path(schema, edge.source)
        except Exception:
            continue
        points_at = None
        if res.kind == "PNTR":
            points_at = res.target
        elif res.kind == "ARRY" and res.attribute is not None and res.attribute.item is not None \
                and res.attribute.item.kind == "PNTR":
            points_at = res.attribute.item.target
        identity = (
            edge.relationship.natural is not None
            or (edge.relationship.code or "").strip() in _IDENTITY_CODES
        )
        try:
            target_res = resolve_path(schema, edge.target)
        except Exception:
            continue
        if points_at and identity and target_res.kind == "entity-root" and target_res.entity == points_at:
            findings.append(LintFinding(
                dependency=i, code="redundant",
                message=f"edge duplicates the {res.path} reference to {points_at} "
                        "already declared in the schema"))

    seen_targets: dict[Coords, int] = {}
    for i, edge in enumerate(deps):
        if edge.mechanism != "Update":
            continue
        try:
            coords = tuple(path_coordinates(schema, edge.target))
        except Exception:
            continue
        if coords in seen_targets:
            findings.append(LintFinding(
                dependency=i, code="shared-target",
                message=f"target already written by dependency {seen_targets[coords]}; "
                        "firing order follows edge list position"))
        else:
            seen_targets[coords] = i
    return findings
