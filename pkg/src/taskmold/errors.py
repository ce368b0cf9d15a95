"""Exception types shared across the package.

Errors are failures of an operation's preconditions or environment.
Invalid *content* (a schema breaking an invariant, data with a dangling
pointer) is never an exception: validators report it as data, see
``taskmold.reporting``.
"""

from __future__ import annotations


class TaskmoldError(Exception):
    """Base class for every error raised by this package."""


class PathSyntaxError(TaskmoldError):
    """A path string does not conform to the path grammar."""


class PathResolutionError(TaskmoldError):
    """A syntactically valid path does not resolve under a schema.

    ``code`` is one of ``unknown-entity``, ``unknown-attribute``,
    ``kind-mismatch``.
    """

    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


class WriteError(TaskmoldError):
    """A data mutation was refused.

    ``code`` is one of ``not-editable``, ``type-mismatch``, ``unknown-path``,
    ``unknown-entity``, ``unknown-id``, ``cannot-delete-root``.
    """

    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


class ExprError(TaskmoldError):
    """Base class for restricted-expression-language failures."""


class ExprParseError(ExprError):
    pass


class ExprBudgetError(ExprError):
    pass


class ExprUnboundNameError(ExprError):
    pass


class ExprTypeError(ExprError):
    pass


class GraphBuildError(TaskmoldError):
    """Dependency graph construction failed.

    ``code`` is ``unresolved-endpoint`` or ``cycle-detected``.
    """

    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


class PropagationBudgetError(TaskmoldError):
    """Propagation exceeded its round budget; the input data is untouched."""


class RepresentationError(TaskmoldError):
    """Requested panel representation is unsupported for the entity."""


class UpdaterError(TaskmoldError):
    """An updater could not be applied; the session is unchanged.

    ``code`` is one of ``unknown-target``, ``payload-mismatch``,
    ``validation-rejection``, ``unsupported-event``. For
    ``validation-rejection`` the offending findings ride along in
    ``details``.
    """

    def __init__(self, code: str, message: str, details: object = None):
        super().__init__(message)
        self.code = code
        self.details = details


class UnknownCheckpointError(TaskmoldError):
    pass


class ProviderUnavailableError(TaskmoldError):
    """The live provider is not configured or not reachable."""


class IrreparableResponseError(TaskmoldError):
    """A provider response failed every repair attempt.

    ``attempts`` holds one diagnostic string per attempt, in order.
    """

    def __init__(self, message: str, attempts: list[str] | None = None):
        super().__init__(message)
        self.attempts = attempts or []


class FixtureMissError(TaskmoldError):
    """Replay provider had no recorded response for a request hash."""

    def __init__(self, request_hash: str, kind: str):
        super().__init__(f"no recorded fixture for {kind} request {request_hash}")
        self.request_hash = request_hash
        self.kind = kind
