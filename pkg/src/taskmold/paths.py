"""Path grammar for addressing schema elements and data values.

Grammar::

    path     := ENTITY selector*
    selector := '.' attr | '[' index ']' | '[*]' | '[id=' value ']'

Entity names are upper-snake (``DINNER_PLAN``), attribute and dictionary
field names lower-snake (``guest_list``). ``[n]`` selects one array
element, ``[*]`` fans out over all elements (or all instances of an
entity), ``[id=DISH-2]`` selects an instance or a pointer element by
object id. ``parse_path`` and ``str(path)`` are exact inverses.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import PathSyntaxError

ENTITY_RE = re.compile(r"^[A-Z][A-Z0-9_]*$")
ATTR_RE = re.compile(r"^[a-z][a-z0-9_]*$")

_TOKEN_RE = re.compile(
    r"\.(?P<attr>[a-z][a-z0-9_]*)"
    r"|\[(?P<star>\*)\]"
    r"|\[(?P<index>\d+)\]"
    r"|\[id=(?P<id>[^\]\[=]+)\]"
)


@dataclass(frozen=True)
class Attr:
    name: str

    def __str__(self) -> str:
        return f".{self.name}"


@dataclass(frozen=True)
class Index:
    value: int

    def __str__(self) -> str:
        return f"[{self.value}]"


@dataclass(frozen=True)
class Star:
    def __str__(self) -> str:
        return "[*]"


@dataclass(frozen=True)
class IdSelector:
    value: str

    def __str__(self) -> str:
        return f"[id={self.value}]"


Step = Attr | Index | Star | IdSelector


@dataclass(frozen=True)
class Path:
    entity: str
    steps: tuple[Step, ...] = ()

    def __str__(self) -> str:
        return self.entity + "".join(str(s) for s in self.steps)

    def child(self, step: Step) -> "Path":
        return Path(self.entity, self.steps + (step,))

    def attr(self, name: str) -> "Path":
        return self.child(Attr(name))

    @property
    def is_entity_root(self) -> bool:
        return not self.steps

    @property
    def first_attr(self) -> str | None:
        """Name of the first attribute step, if any."""
        for step in self.steps:
            if isinstance(step, Attr):
                return step.name
        return None


def parse_path(text: str) -> Path:
    """Parse *text* into a :class:`Path`, raising on any grammar violation."""
    if not isinstance(text, str) or not text:
        raise PathSyntaxError(f"empty path: {text!r}")
    match = re.match(r"^[A-Z][A-Z0-9_]*", text)
    if not match:
        raise PathSyntaxError(f"path must start with an ENTITY name: {text!r}")
    entity = match.group(0)
    steps: list[Step] = []
    pos = match.end()
    while pos < len(text):
        token = _TOKEN_RE.match(text, pos)
        if not token:
            raise PathSyntaxError(f"bad path syntax at offset {pos} in {text!r}")
        if token.group("attr") is not None:
            steps.append(Attr(token.group("attr")))
        elif token.group("star") is not None:
            steps.append(Star())
        elif token.group("index") is not None:
            steps.append(Index(int(token.group("index"))))
        else:
            steps.append(IdSelector(token.group("id")))
        pos = token.end()
    return Path(entity, tuple(steps))
