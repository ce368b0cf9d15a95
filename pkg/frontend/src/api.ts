// The client's only channel to the model: the session service HTTP/WS API.

import type {
  CardNode,
  CollectionNode,
  GestureEvent,
  HistoryEntry,
  PanelNode,
  PromptOutcome,
  SchemaView,
  StreamFrame,
  UIDocument,
  Violation,
} from "./types.js";

export class ViolationError extends Error {
  violations: Violation[];

  constructor(message: string, violations: Violation[]) {
    super(message);
    this.name = "ViolationError";
    this.violations = violations;
  }
}

export interface Api {
  createSession(): Promise<string>;
  prompt(sid: string, text: string): Promise<PromptOutcome>;
  sendEvent(sid: string, event: GestureEvent): Promise<PromptOutcome>;
  restore(sid: string, checkpoint: string): Promise<PromptOutcome>;
  getUi(sid: string): Promise<UIDocument | null>;
  getPanel(sid: string, entity: string, representation: string): Promise<PanelNode>;
  getCard(sid: string, object: string): Promise<CardNode>;
  getCollection(sid: string, path: string): Promise<CollectionNode>;
  getSchema(sid: string): Promise<SchemaView>;
  getHistory(sid: string): Promise<HistoryEntry[]>;
  stream(sid: string, onFrame: (frame: StreamFrame) => void): () => void;
}

async function parseFailure(response: Response): Promise<never> {
  let detail: unknown;
  try {
    detail = await response.json();
  } catch {
    throw new Error(`request failed: ${response.status}`);
  }
  const error = (detail as { error?: { type?: string; message?: string; details?: Violation[] } }).error;
  if (response.status === 409 && error) {
    throw new ViolationError(error.message ?? "rejected", error.details ?? []);
  }
  throw new Error(error?.message ?? `request failed: ${response.status}`);
}

export class HttpApi implements Api {
  constructor(private base: string = "") {}

  private async get<T>(path: string): Promise<T> {
    const response = await fetch(this.base + path);
    if (!response.ok) await parseFailure(response);
    return (await response.json()) as T;
  }

  private async post<T>(path: string, body: unknown): Promise<T> {
    const response = await fetch(this.base + path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body ?? {}),
    });
    if (!response.ok) await parseFailure(response);
    return (await response.json()) as T;
  }

  async createSession(): Promise<string> {
    const out = await this.post<{ id: string }>("/sessions", {});
    return out.id;
  }

  prompt(sid: string, text: string): Promise<PromptOutcome> {
    return this.post(`/sessions/${sid}/prompt`, { prompt: text });
  }

  sendEvent(sid: string, event: GestureEvent): Promise<PromptOutcome> {
    return this.post(`/sessions/${sid}/events`, event);
  }

  restore(sid: string, checkpoint: string): Promise<PromptOutcome> {
    return this.post(`/sessions/${sid}/restore/${checkpoint}`, {});
  }

  async getUi(sid: string): Promise<UIDocument | null> {
    const out = await this.get<{ document: UIDocument | null }>(`/sessions/${sid}/ui`);
    return out.document;
  }

  async getPanel(sid: string, entity: string, representation: string): Promise<PanelNode> {
    const query = `panel=${encodeURIComponent(entity)}&representation=${encodeURIComponent(representation)}`;
    const out = await this.get<{ panel: PanelNode }>(`/sessions/${sid}/ui?${query}`);
    return out.panel;
  }

  async getCard(sid: string, object: string): Promise<CardNode> {
    const out = await this.get<{ card: CardNode }>(
      `/sessions/${sid}/ui?card=${encodeURIComponent(object)}`);
    return out.card;
  }

  async getCollection(sid: string, path: string): Promise<CollectionNode> {
    const out = await this.get<{ collection: CollectionNode }>(
      `/sessions/${sid}/ui?collection=${encodeURIComponent(path)}`);
    return out.collection;
  }

  async getSchema(sid: string): Promise<SchemaView> {
    return this.get(`/sessions/${sid}/schema`);
  }

  async getHistory(sid: string): Promise<HistoryEntry[]> {
    const out = await this.get<{ history: HistoryEntry[] }>(`/sessions/${sid}/history`);
    return out.history;
  }

  stream(sid: string, onFrame: (frame: StreamFrame) => void): () => void {
    const scheme = this.base.startsWith("https") ? "wss" : "ws";
    const host = this.base.replace(/^https?:\/\//, "") || window.location.host;
    const socket = new WebSocket(`${scheme}://${host}/sessions/${sid}/stream`);
    socket.onmessage = (message) => onFrame(JSON.parse(message.data as string) as StreamFrame);
    return () => socket.close();
  }
}
