#!/usr/bin/env python3
"""The whole generative pipeline, offline, from recorded fixtures.

The replay provider answers every request from its fixture file by exact
request hash: the script below generates the dinner-party model, applies
two follow-up prompts, switches the store panel to a map, and never
touches the network. Running it twice produces identical bytes.
"""

import json
import tempfile
from pathlib import Path

from taskmold import Gateway, ReplayProvider
from taskmold.canonical import canon_dumps
from taskmold.service import SessionService, SessionStore

FIXTURES = Path(__file__).resolve().parent.parent / "tests" / "fixtures"
script = json.loads((FIXTURES / "replay_script.json").read_text())


def run_once() -> tuple[str, int]:
    gateway = Gateway(ReplayProvider(FIXTURES / "replay_fixtures.json"))
    with tempfile.TemporaryDirectory() as tmp:
        store = SessionStore(tmp)
        ticks = iter(range(1, 1000))
        service = SessionService(store, gateway, clock=lambda: float(next(ticks)))
        sid = service.create_session()
        for step in script["steps"]:
            if "prompt" in step:
                print("prompt:", step["prompt"])
                service.handle_prompt(sid, step["prompt"])
            else:
                print("event: ", step["event"]["type"], step["event"].get("entity", ""))
                service.handle_event(sid, step["event"])
        session, _ = store.load(sid)
        return canon_dumps(session.compile().to_json()), gateway.provider.network_calls


first, calls1 = run_once()
print()
second, calls2 = run_once()

doc = json.loads(first)
print("\npanels:", [p["id"] for p in doc["panels"]])
print("byte-identical across runs:", first == second)
print("network calls:", calls1 + calls2)
