// Browser bootstrap: create or resume a session, render, follow the stream.

import { HttpApi } from "./api.js";
import { Workspace } from "./workspace.js";

async function boot(): Promise<void> {
  const api = new HttpApi("");
  const params = new URLSearchParams(window.location.search);
  let sid = params.get("session");
  if (!sid) {
    sid = await api.createSession();
    params.set("session", sid);
    window.history.replaceState(null, "", `?${params.toString()}`);
  }
  const root = document.getElementById("workspace");
  if (!root) throw new Error("missing #workspace element");
  const workspace = new Workspace(root, api, sid);
  await workspace.init();
  api.stream(sid, (frame) => {
    if (frame.type === "ui-delta" && frame.delta.length) {
      workspace.applyDelta(frame.delta);
    }
  });
}

void boot();
