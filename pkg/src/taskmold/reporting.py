"""Validation findings as plain data.

A finding names the path it anchors to, a short machine-readable rule id,
and a human message. Reports aggregate findings; an empty report means the
checked artifact satisfies every invariant of its validator.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Finding:
    path: str
    rule: str
    message: str

    def to_json(self) -> dict:
        return {"path": self.path, "rule": self.rule, "message": self.message}


@dataclass(frozen=True)
class ValidationReport:
    findings: tuple[Finding, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.findings

    def rules(self) -> set[str]:
        return {f.rule for f in self.findings}

    def merged(self, other: "ValidationReport") -> "ValidationReport":
        return ValidationReport(self.findings + other.findings)

    def to_json(self) -> list[dict]:
        return [f.to_json() for f in self.findings]

    def __len__(self) -> int:
        return len(self.findings)


class ReportBuilder:
    """Mutable accumulator used inside validators."""

    def __init__(self) -> None:
        self._findings: list[Finding] = []

    def add(self, path: str, rule: str, message: str) -> None:
        self._findings.append(Finding(path=path, rule=rule, message=message))

    def report(self) -> ValidationReport:
        return ValidationReport(tuple(self._findings))
