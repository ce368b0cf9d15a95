"""Canonical JSON helpers.

Every artifact in this package (schemas, annotation sets, datasets, UI
documents, fixtures) serializes through these functions so that equal
values always produce identical bytes. Golden-file tests and the replay
provider depend on that stability.
"""

from __future__ import annotations

import hashlib
import json
from typing import Any


def canon_dumps(value: Any) -> str:
    """Pretty canonical form used for files: sorted keys, 2-space indent."""
    return json.dumps(value, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def canon_compact(value: Any) -> str:
    """Compact canonical form used for hashing and wire frames."""
    return json.dumps(value, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def digest(value: Any) -> str:
    """Stable sha256 hex digest of a JSON-serializable value."""
    return hashlib.sha256(canon_compact(value).encode("utf-8")).hexdigest()
