// The workspace controller: the one place that talks to the server.
//
// Every model mutation a gesture can cause flows through exactly two API
// entry points — prompt() and sendEvent() — plus restore() for history
// navigation. Panel geometry, floating cards, and the highlight key are
// purely client-side state and never touch the session.

import { type Api, ViolationError } from "./api.js";
import { StubGeocoder, type Geocoder } from "./geocode.js";
import { applyHighlight, wireHighlighting } from "./highlight.js";
import {
  renderCard,
  renderCollection,
  renderDocument,
  renderNode,
  renderTableRow,
  type RenderContext,
  type RenderHandlers,
} from "./render.js";
import type {
  DeltaOp,
  FieldNode,
  GestureEvent,
  HistoryEntry,
  ItemNode,
  PromptOutcome,
  UIDocument,
  UINode,
} from "./types.js";

export interface TranscriptEntry {
  tag: "user" | "system" | "action";
  text: string;
  checkpoint: string | null;
}

export interface WorkspaceState {
  highlight: string | null;
  transcript: TranscriptEntry[];
  floatingCards: string[];
  representations: Record<string, string>;
  panelOrder: string[]; // client-side only; reload recomputes it from the document
}

function byNodeId(root: ParentNode, id: string): HTMLElement | null {
  for (const el of Array.from(root.querySelectorAll<HTMLElement>("[data-node-id]"))) {
    if (el.dataset.nodeId === id) return el;
  }
  return null;
}

function childContainer(root: ParentNode, parentId: string): HTMLElement | null {
  for (const el of Array.from(root.querySelectorAll<HTMLElement>("[data-children-of]"))) {
    if (el.dataset.childrenOf === parentId) return el;
  }
  return null;
}

export class Workspace {
  readonly state: WorkspaceState = {
    highlight: null,
    transcript: [],
    floatingCards: [],
    representations: {},
    panelOrder: [],
  };

  private columns: HTMLElement;
  private overlay: HTMLElement;
  private chatLog: HTMLElement;
  private chatStatus: HTMLElement;
  private schemaView: HTMLElement;
  private geocoder: Geocoder;

  constructor(
    readonly root: HTMLElement,
    private api: Api,
    private sid: string,
    options: { geocoder?: Geocoder } = {},
  ) {
    this.geocoder = options.geocoder ?? new StubGeocoder();
    root.classList.add("workspace");
    const sidebar = document.createElement("aside");
    sidebar.className = "sidebar";
    this.schemaView = document.createElement("pre");
    this.schemaView.className = "schema-view";
    this.chatLog = document.createElement("ul");
    this.chatLog.className = "chat-log";
    this.chatStatus = document.createElement("div");
    this.chatStatus.className = "chat-status";
    const form = this.buildChatForm();
    sidebar.append(this.schemaView, this.chatLog, this.chatStatus, form);

    this.columns = document.createElement("div");
    this.columns.className = "columns-host";
    this.overlay = document.createElement("div");
    this.overlay.className = "overlay";
    root.append(sidebar, this.columns, this.overlay);
    wireHighlighting(root, (object) => {
      this.state.highlight = object;
    });
  }

  private buildChatForm(): HTMLElement {
    const form = document.createElement("form");
    form.className = "chat-form";
    const input = document.createElement("input");
    input.className = "chat-input";
    input.placeholder = "describe your task or a change";
    const send = document.createElement("button");
    send.type = "submit";
    send.textContent = "send";
    form.append(input, send);
    form.addEventListener("submit", (event) => {
      event.preventDefault();
      const text = input.value.trim();
      if (text) {
        input.value = "";
        void this.submitPrompt(text);
      }
    });
    return form;
  }

  private context(): RenderContext {
    const handlers: RenderHandlers = {
      editValue: (path, value, _field, el) => void this.editValue(path, value, el),
      deleteAttribute: (path) => void this.dispatch({ type: "delete-attribute", path }),
      addEmptyItem: (path) => void this.dispatch({ type: "add-empty-item", path }),
      addGenerateItem: (path, preference) =>
        void this.dispatch({ type: "add-generate-item", path, preference }),
      autocompleteItem: (object, preference) =>
        void this.dispatch({ type: "autocomplete-item", object, preference }),
      openCard: (object) => void this.openCard(object),
      pinCard: (object) => this.pinCard(object),
      openEntity: (entity) => void this.openEntity(entity),
      switchRepresentation: (entity, representation) =>
        void this.dispatch({ type: "switch-representation", entity, representation }),
      sortColumn: (path, field, direction) =>
        void this.dispatch({ type: "sort-column", path, field, direction }),
      expandCollection: (path, el) => void this.expandCollection(path, el),
    };
    return { handlers, geocoder: this.geocoder, representations: this.state.representations };
  }

  // -- lifecycle ---------------------------------------------------------

  async init(): Promise<void> {
    const doc = await this.api.getUi(this.sid);
    if (doc) this.renderAll(doc);
    await this.refreshSidebar();
  }

  renderAll(doc: UIDocument): void {
    this.state.representations = {};
    for (const panel of doc.panels) {
      if (panel.kind === "entity") this.state.representations[panel.entity] = panel.representation;
    }
    this.state.panelOrder = doc.panels.map((p) => p.id);
    this.columns.replaceChildren(renderDocument(doc, this.context()));
    applyHighlight(this.root, this.state.highlight);
  }

  async refreshSidebar(): Promise<void> {
    const [schema, history] = await Promise.all([
      this.api.getSchema(this.sid),
      this.api.getHistory(this.sid),
    ]);
    this.schemaView.textContent = JSON.stringify(
      { schema: schema.schema, annotations: schema.annotations }, null, 2);
    this.renderHistory(history);
  }

  private renderHistory(history: HistoryEntry[]): void {
    this.chatLog.replaceChildren();
    this.state.transcript = history.map((entry) => ({
      tag: entry.origin === "user-prompt" ? "user" : entry.origin === "action" ? "action" : "system",
      text: entry.label,
      checkpoint: entry.id,
    }));
    for (const entry of this.state.transcript) {
      const li = document.createElement("li");
      li.className = `chat-entry chat-${entry.tag}`;
      li.textContent = `[${entry.tag}] ${entry.text}`;
      if (entry.checkpoint) {
        li.dataset.checkpoint = entry.checkpoint;
        li.addEventListener("click", () => void this.restoreCheckpoint(entry.checkpoint as string));
      }
      this.chatLog.appendChild(li);
    }
  }

  // -- mutations -----------------------------------------------------------

  async submitPrompt(text: string): Promise<void> {
    this.state.transcript.push({ tag: "user", text, checkpoint: null });
    try {
      const outcome = await this.api.prompt(this.sid, text);
      this.afterOutcome(outcome);
      if (outcome.message) this.chatStatus.textContent = outcome.message;
      await this.refreshSidebar();
    } catch (error) {
      this.chatStatus.textContent = String(error);
    }
  }

  async dispatch(event: GestureEvent): Promise<PromptOutcome | null> {
    try {
      const outcome = await this.api.sendEvent(this.sid, event);
      this.afterOutcome(outcome);
      await this.refreshSidebar();
      return outcome;
    } catch (error) {
      if (error instanceof ViolationError) {
        this.showViolations(event, error);
        return null;
      }
      this.chatStatus.textContent = String(error);
      return null;
    }
  }

  private async editValue(path: string, value: unknown, widget: HTMLElement): Promise<void> {
    const outcome = await this.dispatch({ type: "edit-value", path, value });
    if (outcome && "dataset" in widget) {
      (widget as HTMLInputElement).dataset.prev = String(value ?? "");
    }
  }

  async restoreCheckpoint(checkpoint: string): Promise<void> {
    const outcome = await this.api.restore(this.sid, checkpoint);
    this.afterOutcome(outcome);
    await this.refreshSidebar();
  }

  private afterOutcome(outcome: PromptOutcome): void {
    if (outcome.document) {
      if (outcome.delta.length && this.columns.childElementCount) {
        this.applyDelta(outcome.delta);
      } else {
        this.renderAll(outcome.document);
      }
    }
  }

  // -- violations ----------------------------------------------------------

  private showViolations(event: GestureEvent, error: ViolationError): void {
    const path = "path" in event ? event.path : undefined;
    const target = path ? this.fieldByPath(path) : null;
    const messages = error.violations.map((v) => v.message).join("; ") || error.message;
    if (target) {
      target.classList.add("violation");
      let note = target.querySelector<HTMLElement>(".violation-message");
      if (!note) {
        note = document.createElement("div");
        note.className = "violation-message";
        target.appendChild(note);
      }
      note.textContent = messages;
      const widget = target.querySelector<HTMLInputElement>("input, select, textarea");
      if (widget && widget.dataset.prev !== undefined) {
        widget.value = widget.dataset.prev; // revert the rejected edit
      }
    }
    this.chatStatus.textContent = messages;
  }

  private fieldByPath(path: string): HTMLElement | null {
    for (const el of Array.from(this.root.querySelectorAll<HTMLElement>(".field[data-path]"))) {
      if (el.dataset.path === path) return el;
    }
    return null;
  }

  // -- navigation ------------------------------------------------------------

  async openCard(object: string): Promise<void> {
    try {
      const card = await this.api.getCard(this.sid, object);
      const rendered = renderCard(card, this.context());
      rendered.classList.add("card-popup");
      this.overlay.replaceChildren(rendered);
      applyHighlight(this.root, this.state.highlight);
    } catch (error) {
      this.chatStatus.textContent = String(error);
    }
  }

  pinCard(object: string): void {
    if (!this.state.floatingCards.includes(object)) this.state.floatingCards.push(object);
    const popup = this.overlay.querySelector<HTMLElement>(".card-popup");
    if (popup && popup.dataset.object === object) {
      popup.classList.remove("card-popup");
      popup.classList.add("card-floating");
    }
  }

  async openEntity(entity: string): Promise<void> {
    const representation = this.state.representations[entity] ?? "list";
    await this.dispatch({ type: "switch-representation", entity, representation });
  }

  async expandCollection(path: string, host: HTMLElement): Promise<void> {
    try {
      const expanded = await this.api.getCollection(this.sid, path);
      const rendered = renderCollection(expanded, this.context());
      rendered.classList.add("expanded-inline");
      host.replaceWith(rendered);
      applyHighlight(this.root, this.state.highlight);
    } catch (error) {
      this.chatStatus.textContent = String(error);
    }
  }

  // -- delta application -------------------------------------------------------

  applyDelta(ops: DeltaOp[]): void {
    const ctx = this.context();
    for (const op of ops) {
      if (op.op === "remove") {
        byNodeId(this.columns, op.id)?.remove();
        continue;
      }
      if (op.op === "replace" && op.node) {
        const current = byNodeId(this.columns, op.id);
        if (current) current.replaceWith(this.renderFor(op.node, current.parentElement, ctx));
        continue;
      }
      const container = op.parent
        ? childContainer(this.columns, op.parent)
        : this.columns.querySelector<HTMLElement>("[data-children-of='document']");
      if (!container) continue;
      let element: HTMLElement | null = null;
      if (op.op === "add" && op.node) {
        element = this.renderFor(op.node, container, ctx);
      } else if (op.op === "move") {
        element = byNodeId(this.columns, op.id);
        element?.remove();
      }
      if (!element) continue;
      const index = Math.min(op.index ?? container.children.length, container.children.length);
      container.insertBefore(element, container.children[index] ?? null);
    }
    applyHighlight(this.root, this.state.highlight);
  }

  private renderFor(node: UINode, container: Element | null, ctx: RenderContext): HTMLElement {
    if (container && container.tagName === "TBODY" && node.node === "item") {
      return renderTableRow(node as ItemNode, ctx);
    }
    return renderNode(node, ctx);
  }
}

export type { FieldNode };
