from __future__ import annotations

import json
import threading

from fastapi.testclient import TestClient

from taskmold import Gateway, History, ReplayProvider, Session, validate_session
from taskmold.canonical import canon_compact
from taskmold.service import SessionStore, create_app

from .conftest import FIXTURES, load_json

PROMPT_1 = "I am hosting a dinner party"
PROMPT_2 = "Alice and I are both vegan"
PROMPT_3 = "I need to get the ingredients"


def _client(tmp_path, clock=None) -> TestClient:
    gateway = Gateway(ReplayProvider(FIXTURES / "replay_fixtures.json"))
    ticks = iter(range(1, 10_000))
    app = create_app(tmp_path / "store", gateway, clock or (lambda: float(next(ticks))))
    return TestClient(app)


def test_first_prompt_delivers_home_panel(tmp_path):
    client = _client(tmp_path)
    sid = client.post("/sessions").json()["id"]
    assert sid == "s-1"
    out = client.post(f"/sessions/{sid}/prompt", json={"prompt": PROMPT_1})
    assert out.status_code == 200
    body = out.json()
    assert body["checkpoint"] == "ckpt-1"
    panels = body["document"]["panels"]
    assert [p["kind"] for p in panels] == ["home"]
    assert panels[0]["title"] == "Dinner Plan"


def test_full_script_over_http(tmp_path):
    client = _client(tmp_path)
    sid = client.post("/sessions").json()["id"]
    client.post(f"/sessions/{sid}/prompt", json={"prompt": PROMPT_1})
    client.post(f"/sessions/{sid}/prompt", json={"prompt": PROMPT_2})
    client.post(f"/sessions/{sid}/prompt", json={"prompt": PROMPT_3})
    out = client.post(f"/sessions/{sid}/events", json={
        "type": "switch-representation", "entity": "STORE", "representation": "map"})
    assert out.status_code == 200

    ui = client.get(f"/sessions/{sid}/ui").json()["document"]
    golden = json.loads((FIXTURES / "replay_golden" / "ui.json").read_text())
    assert canon_compact(ui) == canon_compact(golden)

    schema_view = client.get(f"/sessions/{sid}/schema").json()
    assert sorted(schema_view["schema"]["entities"]) == \
        ["DINNER_PLAN", "DISH", "SHOPPING_ITEM", "STORE", "USER"]
    assert schema_view["annotations"]["USER"]["dietary_restrictions"]["render"] == "shortText"

    history = client.get(f"/sessions/{sid}/history").json()["history"]
    assert [h["origin"] for h in history] == \
        ["user-prompt", "user-prompt", "user-prompt", "action"]
    assert history[-1]["head"] is True


def test_noop_followup_has_no_checkpoint(tmp_path):
    client = _client(tmp_path)
    sid = client.post("/sessions").json()["id"]
    client.post(f"/sessions/{sid}/prompt", json={"prompt": PROMPT_1})
    client.post(f"/sessions/{sid}/prompt", json={"prompt": PROMPT_2})
    client.post(f"/sessions/{sid}/prompt", json={"prompt": PROMPT_3})
    client.post(f"/sessions/{sid}/events", json={
        "type": "switch-representation", "entity": "STORE", "representation": "map"})
    # recorded as a no-op by the scripted backend: pure context, nothing to change
    out = client.post(f"/sessions/{sid}/prompt", json={"prompt": "thanks, looks great"})
    assert out.status_code == 200
    body = out.json()
    assert body["checkpoint"] is None
    assert body["message"]
    history = client.get(f"/sessions/{sid}/history").json()["history"]
    assert len(history) == 4


def test_restore_moves_head_and_rewinds_document(tmp_path):
    client = _client(tmp_path)
    sid = client.post("/sessions").json()["id"]
    first = client.post(f"/sessions/{sid}/prompt", json={"prompt": PROMPT_1}).json()
    baseline = client.get(f"/sessions/{sid}/ui").json()["document"]
    client.post(f"/sessions/{sid}/prompt", json={"prompt": PROMPT_2})
    out = client.post(f"/sessions/{sid}/restore/{first['checkpoint']}")
    assert out.status_code == 200
    restored = client.get(f"/sessions/{sid}/ui").json()["document"]
    assert canon_compact(restored) == canon_compact(baseline)
    history = client.get(f"/sessions/{sid}/history").json()["history"]
    assert len(history) == 2 and history[0]["head"] is True


def test_violating_edit_is_structured_failure(tmp_path):
    store = SessionStore(tmp_path / "store")
    sid = store.create()
    trip = Session.from_json(load_json("trip_session.json"))
    store.save(sid, trip, History())
    gateway = Gateway(ReplayProvider({}))
    client = TestClient(create_app(tmp_path / "store", gateway))

    before = client.get(f"/sessions/{sid}/data").json()["data"]
    out = client.post(f"/sessions/{sid}/events", json={
        "type": "edit-value", "path": "TRIP.checkout_date", "value": "2025-01-01"})
    assert out.status_code == 409
    error = out.json()["error"]
    assert error["type"] == "validation-rejection"
    assert error["details"][0]["code"] == "violated"
    after = client.get(f"/sessions/{sid}/data").json()["data"]
    assert canon_compact(before) == canon_compact(after)
    # the violation also went to the event stream
    with client.websocket_connect(f"/sessions/{sid}/stream") as ws:
        event = json.loads(ws.receive_text())
    assert event["type"] == "violation"


def test_valid_edit_is_accepted_and_checkpointed(tmp_path):
    store = SessionStore(tmp_path / "store")
    sid = store.create()
    store.save(sid, Session.from_json(load_json("trip_session.json")), History())
    client = TestClient(create_app(tmp_path / "store", Gateway(ReplayProvider({}))))
    out = client.post(f"/sessions/{sid}/events", json={
        "type": "edit-value", "path": "TRIP.checkout_date", "value": "2025-01-09"})
    assert out.status_code == 200
    assert out.json()["checkpoint"] == "ckpt-1"
    data = client.get(f"/sessions/{sid}/data").json()["data"]
    assert data["instances"]["TRIP-1"]["values"]["checkout_date"] == "2025-01-09"
    history = client.get(f"/sessions/{sid}/history").json()["history"]
    assert [h["origin"] for h in history] == ["action"]


def test_event_stream_order_and_single_delta_per_mutation(tmp_path):
    client = _client(tmp_path)
    sid = client.post("/sessions").json()["id"]
    client.post(f"/sessions/{sid}/prompt", json={"prompt": PROMPT_1})
    client.post(f"/sessions/{sid}/prompt", json={"prompt": PROMPT_2})
    client.post(f"/sessions/{sid}/prompt", json={"prompt": PROMPT_3})
    client.post(f"/sessions/{sid}/events", json={
        "type": "switch-representation", "entity": "STORE", "representation": "map"})
    with client.websocket_connect(f"/sessions/{sid}/stream") as ws:
        events = [json.loads(ws.receive_text()) for _ in range(8)]
    assert [e["seq"] for e in events] == list(range(8))
    # exactly one checkpoint and one ui-delta per mutation, in mutation order
    assert [e["type"] for e in events] == \
        ["checkpoint-added", "ui-delta"] * 4
    assert events[1]["delta"] == []  # first document: no prior to diff against
    # the shopping shift adds a summary button to the home panel
    shopping_delta = events[5]["delta"]
    assert any(op["id"] == "coll:DINNER_PLAN.shopping_list" for op in shopping_delta)
    # the representation switch adds the STORE panel
    switch_delta = events[7]["delta"]
    assert [op["id"] for op in switch_delta] == ["panel:STORE"]
    assert switch_delta[0]["op"] == "add"


def test_store_round_trips_after_restart(tmp_path):
    client = _client(tmp_path)
    sid = client.post("/sessions").json()["id"]
    client.post(f"/sessions/{sid}/prompt", json={"prompt": PROMPT_1})
    client.post(f"/sessions/{sid}/prompt", json={"prompt": PROMPT_2})
    snapshot = client.get(f"/sessions/{sid}/data").json()["data"]

    reopened = SessionStore(tmp_path / "store")
    session, history = reopened.load(sid)
    assert session is not None
    assert canon_compact(session.data.to_json()) == canon_compact(snapshot)
    assert validate_session(session).ok
    assert len(history.checkpoints) == 2
    restored = history.checkpoints[0].snapshot
    assert validate_session(restored).ok


def test_unknown_session_is_404(tmp_path):
    client = _client(tmp_path)
    assert client.get("/sessions/s-99/ui").status_code == 404
    assert client.post("/sessions/s-99/prompt", json={"prompt": "x"}).status_code == 404


def test_fixture_miss_is_structured_provider_failure(tmp_path):
    client = _client(tmp_path)
    sid = client.post("/sessions").json()["id"]
    out = client.post(f"/sessions/{sid}/prompt", json={"prompt": "a prompt never recorded"})
    assert out.status_code == 502
    assert "FixtureMiss" in out.json()["error"]["type"]
    # the session is untouched
    assert client.get(f"/sessions/{sid}/ui").json()["document"] is None


def test_adhoc_panel_compile_without_mutation(tmp_path):
    client = _client(tmp_path)
    sid = client.post("/sessions").json()["id"]
    client.post(f"/sessions/{sid}/prompt", json={"prompt": PROMPT_1})
    out = client.get(f"/sessions/{sid}/ui", params={"panel": "DISH", "representation": "list"})
    assert out.status_code == 200
    panel = out.json()["panel"]
    assert panel["entity"] == "DISH" and panel["representation"] == "list"
    # the session's own document still has only the home panel
    doc = client.get(f"/sessions/{sid}/ui").json()["document"]
    assert [p["id"] for p in doc["panels"]] == ["panel:home"]


def test_adhoc_card_and_collection_compile(tmp_path):
    client = _client(tmp_path)
    sid = client.post("/sessions").json()["id"]
    client.post(f"/sessions/{sid}/prompt", json={"prompt": PROMPT_1})

    card = client.get(f"/sessions/{sid}/ui", params={"card": "DISH-1"}).json()["card"]
    assert card["object"] == "DISH-1"
    assert card["children"][0]["path"].endswith(".name")

    out = client.get(f"/sessions/{sid}/ui", params={"collection": "DINNER_PLAN.menu"})
    expanded = out.json()["collection"]
    assert expanded["mode"] == "expanded"  # summary button expands on demand
    assert [i["object"] for i in expanded["items"]] == ["DISH-1", "DISH-2", "DISH-3"]

    assert client.get(f"/sessions/{sid}/ui", params={"card": "GHOST-1"}).status_code == 422


def test_concurrent_readers_see_whole_snapshots(tmp_path):
    client = _client(tmp_path)
    sid = client.post("/sessions").json()["id"]
    client.post(f"/sessions/{sid}/prompt", json={"prompt": PROMPT_1})
    store = SessionStore(tmp_path / "store")
    failures: list[str] = []

    def reader():
        for _ in range(25):
            session, _ = store.load(sid)
            if session is not None and not validate_session(session).ok:
                failures.append("torn read")

    def writer():
        client.post(f"/sessions/{sid}/prompt", json={"prompt": PROMPT_2})
        client.post(f"/sessions/{sid}/prompt", json={"prompt": PROMPT_3})

    threads = [threading.Thread(target=reader) for _ in range(4)] + \
        [threading.Thread(target=writer)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert not failures
