"""taskmold: task-driven data models compiled into malleable UI documents.

The package turns a typed object-relational schema, per-attribute UI
annotations, a dependency graph, and structured data into a renderable,
frontend-agnostic UI document, and keeps all four consistent as prompts
and direct manipulation mutate them.
"""

from .canonical import canon_compact, canon_dumps, digest
from .delta import SchemaDelta, apply_delta, diff_schemas, migrate_data
from .errors import TaskmoldError
from .expr import evaluate_expression, parse_expression
from .gateway import Gateway, GeneratedModel, LiveProvider, RecordingProvider, ReplayProvider, repair_json
from .graph import (
    DEFAULT_BUDGET,
    CheckResult,
    Dependency,
    DependencyGraph,
    DependencyViolation,
    ExecutionBudget,
    Relationship,
    build_graph,
    check_write,
    evaluate_expr,
    lint_dependencies,
    propagate,
)
from .history import Checkpoint, History, checkpoint, restore
from .model import (
    Annotation,
    AnnotationSet,
    AttributeDef,
    EntityDef,
    ItemSpec,
    PathResolution,
    Schema,
    SummarySpec,
    default_annotations,
    enumerate_paths,
    resolve_path,
    validate_annotations,
    validate_schema,
)
from .paths import Path, parse_path
from .reporting import Finding, ValidationReport
from .session import Session, validate_session
from .store import (
    DataSet,
    Instance,
    WriteResult,
    create_instance,
    delete_instance,
    get,
    set_value,
    validate_data,
)
from .uidoc import (
    UIDelta,
    UIDocument,
    apply_ui_delta,
    choose_representation,
    compile_card,
    compile_document,
    compile_entity_panel,
    compile_home_panel,
    compute_summary,
    diff_ui,
)
from .updaters import (
    RepresentationDirective,
    Updater,
    apply_batch,
    apply_directive,
    apply_updater,
    translate_event,
)

__version__ = "0.1.0"
