from __future__ import annotations

import json
from pathlib import Path

from click.testing import CliRunner

from taskmold.canonical import canon_dumps
from taskmold.cli import main

from .conftest import FIXTURES, load_json


def _write(path: Path, payload) -> Path:
    path.write_text(canon_dumps(payload), encoding="utf-8")
    return path


def test_validate_golden_session_exits_zero(tmp_path):
    runner = CliRunner()
    result = runner.invoke(main, ["validate", str(FIXTURES / "dinner_session.json")])
    assert result.exit_code == 0, result.output
    assert result.output == ""


def test_validate_schema_file(tmp_path):
    result = CliRunner().invoke(main, ["validate", str(FIXTURES / "dinner_schema.json")])
    assert result.exit_code == 0


def test_validate_reports_violations_and_exits_one(tmp_path):
    raw = load_json("dinner_session.json")
    raw["schema"]["entities"]["DINNER_PLAN"]["attributes"]["menu"] = {
        "kind": "ARRY", "item": {"kind": "DICT"}}
    bad = _write(tmp_path / "bad_session.json", raw)
    result = CliRunner().invoke(main, ["validate", str(bad)])
    assert result.exit_code == 1
    finding = json.loads(result.output.splitlines()[0])
    assert finding["rule"] == "no-array-of-dict"


def test_validate_garbage_file_exits_three(tmp_path):
    bad = tmp_path / "garbage.json"
    bad.write_text("not json at all", encoding="utf-8")
    result = CliRunner().invoke(main, ["validate", str(bad)])
    assert result.exit_code == 3


def test_compile_is_byte_stable(tmp_path):
    runner = CliRunner()
    out1 = tmp_path / "ui1.json"
    out2 = tmp_path / "ui2.json"
    session = str(FIXTURES / "dinner_session.json")
    assert runner.invoke(main, ["compile", session, "-o", str(out1)]).exit_code == 0
    assert runner.invoke(main, ["compile", session, "-o", str(out2)]).exit_code == 0
    assert out1.read_bytes() == out2.read_bytes()
    doc = json.loads(out1.read_text())
    assert doc["panels"][0]["kind"] == "home"


def test_compile_rejects_invalid_session(tmp_path):
    raw = load_json("dinner_session.json")
    del raw["annotations"]["USER"]["phone"]
    bad = _write(tmp_path / "bad.json", raw)
    result = CliRunner().invoke(main, ["compile", str(bad), "-o", str(tmp_path / "ui.json")])
    assert result.exit_code == 1


def test_lint_deps_flags_redundant_edge(tmp_path):
    raw = load_json("dinner_session.json")
    raw["dependencies"] = [
        {"source": "DINNER_PLAN.menu", "target": "DISH", "mechanism": "Update",
         "relationship": {"code": "source"}},
    ]
    session = _write(tmp_path / "session.json", raw)
    result = CliRunner().invoke(main, ["lint-deps", str(session)])
    assert result.exit_code == 0
    findings = [json.loads(line) for line in result.output.splitlines()]
    assert [f["code"] for f in findings] == ["redundant"]


def test_lint_deps_clean_session_prints_nothing(tmp_path):
    result = CliRunner().invoke(main, ["lint-deps", str(FIXTURES / "dinner_session.json")])
    assert result.exit_code == 0 and result.output == ""


def test_replay_matches_recorded_goldens(tmp_path):
    out_dir = tmp_path / "out"
    result = CliRunner().invoke(main, [
        "replay", str(FIXTURES / "replay_script.json"),
        "--fixtures", str(FIXTURES / "replay_fixtures.json"),
        "-o", str(out_dir),
    ])
    assert result.exit_code == 0, result.output
    for name in ("session.json", "ui.json", "history.json"):
        produced = (out_dir / name).read_bytes()
        golden = (FIXTURES / "replay_golden" / name).read_bytes()
        assert produced == golden, f"{name} diverged from the recorded golden"


def test_replay_fixture_miss_exits_four(tmp_path):
    script = _write(tmp_path / "script.json", {"steps": [{"prompt": "unrecorded prompt"}]})
    result = CliRunner().invoke(main, [
        "replay", str(script),
        "--fixtures", str(FIXTURES / "replay_fixtures.json"),
        "-o", str(tmp_path / "out"),
    ])
    assert result.exit_code == 4


def test_replay_requires_fixture_file(tmp_path):
    script = _write(tmp_path / "script.json", {"steps": []})
    result = CliRunner().invoke(main, [
        "replay", str(script), "--fixtures", str(tmp_path / "missing.json"),
        "-o", str(tmp_path / "out"),
    ])
    assert result.exit_code == 3
