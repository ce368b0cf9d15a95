from __future__ import annotations

import json
from pathlib import Path

import pytest

from taskmold import AnnotationSet, DataSet, Schema, Session

FIXTURES = Path(__file__).parent / "fixtures"


def load_json(name: str) -> dict:
    return json.loads((FIXTURES / name).read_text(encoding="utf-8"))


@pytest.fixture(scope="session")
def dinner_schema() -> Schema:
    return Schema.from_json(load_json("dinner_schema.json"))


@pytest.fixture(scope="session")
def dinner_annotations() -> AnnotationSet:
    return AnnotationSet.from_json(load_json("dinner_annotations.json"))


@pytest.fixture(scope="session")
def dinner_data() -> DataSet:
    return DataSet.from_json(load_json("dinner_data.json"))


@pytest.fixture()
def dinner_session() -> Session:
    return Session.from_json(load_json("dinner_session.json"))


@pytest.fixture()
def trip_session() -> Session:
    return Session.from_json(load_json("trip_session.json"))


@pytest.fixture()
def shopping_session() -> Session:
    """Final session of the recorded dinner-party script (stores, items, map)."""
    return Session.from_json(load_json("replay_golden/session.json"))
