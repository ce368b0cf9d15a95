"""A session: the unit of user interaction.

Bundles the schema, its annotations, the dependency graph edges, the
dataset, and the UI preferences that updaters may touch (non-destructive
view predicates, cluster assignments, per-entity representations). A
session is an immutable value; every mutation produces a new one, which
is what makes checkpointing and replay trivial.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .canonical import canon_dumps, digest
from .errors import GraphBuildError
from .graph import Dependency, DependencyGraph, build_graph
from .model import AnnotationSet, Schema, validate_annotations, validate_schema
from .reporting import Finding, ValidationReport
from .store import DataSet, validate_data
from .uidoc import UIDocument, compile_document


@dataclass(frozen=True)
class Session:
    schema: Schema
    annotations: AnnotationSet
    dependencies: tuple[Dependency, ...]
    data: DataSet
    views: dict[str, dict] = field(default_factory=dict)
    representations: dict[str, str] = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "schema": self.schema.to_json(),
            "annotations": self.annotations.to_json(),
            "dependencies": [d.to_json() for d in self.dependencies],
            "data": self.data.to_json(),
            "views": self.views,
            "representations": self.representations,
        }

    @classmethod
    def from_json(cls, raw: dict) -> "Session":
        return cls(
            schema=Schema.from_json(raw.get("schema", {})),
            annotations=AnnotationSet.from_json(raw.get("annotations", {})),
            dependencies=tuple(Dependency.from_json(d) for d in raw.get("dependencies", [])),
            data=DataSet.from_json(raw.get("data", {})),
            views={k: dict(v) for k, v in raw.get("views", {}).items()},
            representations=dict(raw.get("representations", {})),
        )

    def canonical(self) -> str:
        return canon_dumps(self.to_json())

    def digest(self) -> str:
        return digest(self.to_json())

    def graph(self) -> DependencyGraph:
        return build_graph(self.schema, list(self.dependencies))

    def compile(self) -> UIDocument:
        return compile_document(
            self.schema, self.annotations, self.data, self.representations, self.views
        )

    def with_parts(self, **kwargs) -> "Session":
        return replace(self, **kwargs)


def validate_session(session: Session) -> ValidationReport:
    """All validators plus graph construction, merged into one report."""
    report = validate_schema(session.schema)
    if not report.ok:
        return report
    report = report.merged(validate_annotations(session.schema, session.annotations))
    report = report.merged(validate_data(session.schema, session.data))
    try:
        session.graph()
    except GraphBuildError as exc:
        report = report.merged(ValidationReport((
            Finding(path="dependencies", rule=exc.code, message=str(exc)),
        )))
    return report
