#!/usr/bin/env python3
"""Driving the session service over its HTTP surface.

Uses the in-process test client so the demo needs no running server; a
real deployment serves the same app via `taskmold serve`. Walks the full
scripted session, inspects the schema view, triggers a validation
rejection, and rewinds through the history endpoint.
"""

import json
import tempfile
from pathlib import Path

from fastapi.testclient import TestClient

from taskmold import Gateway, ReplayProvider
from taskmold.service import create_app

FIXTURES = Path(__file__).resolve().parent.parent / "tests" / "fixtures"

with tempfile.TemporaryDirectory() as tmp:
    gateway = Gateway(ReplayProvider(FIXTURES / "replay_fixtures.json"))
    client = TestClient(create_app(tmp, gateway))

    sid = client.post("/sessions").json()["id"]
    print("session:", sid)

    out = client.post(f"/sessions/{sid}/prompt",
                      json={"prompt": "I am hosting a dinner party"}).json()
    print("first prompt -> checkpoint", out["checkpoint"],
          "panels:", [p["id"] for p in out["document"]["panels"]])

    client.post(f"/sessions/{sid}/prompt", json={"prompt": "Alice and I are both vegan"})
    client.post(f"/sessions/{sid}/prompt", json={"prompt": "I need to get the ingredients"})
    out = client.post(f"/sessions/{sid}/events", json={
        "type": "switch-representation", "entity": "STORE", "representation": "map"}).json()
    print("after the script, panels:", [p["id"] for p in out["document"]["panels"]])

    schema_view = client.get(f"/sessions/{sid}/schema").json()
    print("entities:", sorted(schema_view["schema"]["entities"]))

    bad = client.post(f"/sessions/{sid}/events", json={
        "type": "edit-value", "path": "DISH[id=DISH-1].calories", "value": 900})
    print("editing a non-editable field ->", bad.status_code,
          bad.json()["error"]["type"])

    history = client.get(f"/sessions/{sid}/history").json()["history"]
    print("history:", [(h["id"], h["origin"]) for h in history])
    client.post(f"/sessions/{sid}/restore/{history[0]['id']}")
    doc = client.get(f"/sessions/{sid}/ui").json()["document"]
    print("after restore to", history[0]["id"], "panels:", [p["id"] for p in doc["panels"]])

    with client.websocket_connect(f"/sessions/{sid}/stream") as ws:
        event = json.loads(ws.receive_text())
        print("first stream frame:", event["type"])
