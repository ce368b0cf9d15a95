// DOM rendering of UI document nodes.
//
// Each node becomes one element tagged data-node-id (and data-object for
// instance-bearing nodes, which drives highlighting). Child-list
// containers carry data-children-of=<node id> so delta application can
// splice subtrees surgically instead of re-rendering whole panels.
// Widget identity stays semantic: the server says "time" or "category",
// the renderer picks the concrete control.

import type { Geocoder } from "./geocode.js";
import type {
  CardNode,
  CollectionNode,
  FieldNode,
  ItemNode,
  PanelNode,
  UIDocument,
  UINode,
} from "./types.js";

export interface RenderHandlers {
  editValue(path: string, value: unknown, field: FieldNode, el: HTMLElement): void;
  deleteAttribute(path: string): void;
  addEmptyItem(path: string): void;
  addGenerateItem(path: string, preference?: string): void;
  autocompleteItem(object: string, preference?: string): void;
  openCard(object: string): void;
  pinCard(object: string): void;
  openEntity(entity: string): void;
  switchRepresentation(entity: string, representation: string): void;
  sortColumn(path: string, field: string, direction: "asc" | "desc"): void;
  expandCollection(path: string, el: HTMLElement): void;
}

export interface RenderContext {
  handlers: RenderHandlers;
  geocoder: Geocoder;
  /** representation currently shown per entity, for the dropdown */
  representations: Record<string, string>;
}

const REPRESENTATIONS = ["list", "table", "map"] as const;

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K, className?: string, text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function fieldValueText(value: unknown): string {
  if (value === null || value === undefined) return "";
  return String(value);
}

// -- fields ------------------------------------------------------------

function renderWidget(field: FieldNode, ctx: RenderContext): HTMLElement {
  const value = fieldValueText(field.value);
  if (!field.editable) {
    switch (field.widget) {
      case "url": {
        const a = el("a", "widget widget-url", value);
        if (value) a.setAttribute("href", value);
        return a;
      }
      case "category":
        return el("span", "widget widget-category chip", value);
      default:
        return el("span", `widget widget-${field.widget}`, value);
    }
  }

  const commit = (input: HTMLInputElement | HTMLSelectElement | HTMLTextAreaElement) => {
    const raw = input.value;
    const parsed = field.widget === "number" ? (raw === "" ? null : Number(raw)) : raw;
    ctx.handlers.editValue(field.path, parsed, field, input);
  };

  if (field.widget === "category") {
    const select = el("select", "widget widget-category");
    for (const option of field.categories ?? []) {
      const opt = el("option", undefined, option);
      opt.value = option;
      select.appendChild(opt);
    }
    select.value = value;
    select.dataset.prev = value;
    select.addEventListener("change", () => commit(select));
    return select;
  }
  if (field.widget === "paragraph") {
    const area = el("textarea", "widget widget-paragraph");
    area.value = value;
    area.dataset.prev = value;
    area.addEventListener("change", () => commit(area));
    return area;
  }
  const input = el("input", `widget widget-${field.widget}`);
  input.type = field.widget === "number" ? "number" : "text";
  input.value = value;
  input.dataset.prev = value;
  input.addEventListener("change", () => commit(input));
  return input;
}

export function renderField(field: FieldNode, ctx: RenderContext): HTMLElement {
  const wrap = el("div", "field");
  wrap.dataset.nodeId = field.id;
  wrap.dataset.path = field.path;
  const label = el("label", "field-label", field.label);
  const remove = el("button", "delete-attribute", "x");
  remove.title = `remove ${field.label}`;
  remove.addEventListener("click", () => {
    const attrPath = field.path.replace(/\[[^\]]*\]/g, "").split(".").slice(0, 2).join(".");
    ctx.handlers.deleteAttribute(attrPath);
  });
  label.appendChild(remove);
  wrap.append(label, renderWidget(field, ctx));
  return wrap;
}

// -- items and cards ---------------------------------------------------

export function renderItem(item: ItemNode, ctx: RenderContext): HTMLElement {
  const wrap = el("div", "item");
  wrap.dataset.nodeId = item.id;
  if (item.object) {
    wrap.dataset.object = item.object;
    const thumbs = el("div", "thumbnail");
    thumbs.dataset.childrenOf = item.id;
    for (const t of item.thumbnail) thumbs.appendChild(renderNode(t, ctx));
    wrap.appendChild(thumbs);
    if (item.detail) {
      wrap.classList.add("has-detail");
      wrap.addEventListener("click", (event) => {
        if ((event.target as HTMLElement).closest("button, input, select, a")) return;
        ctx.handlers.openCard(item.object as string);
      });
    }
  } else {
    wrap.classList.add("empty-slot");
    wrap.appendChild(el("span", "empty", "(unset)"));
  }
  return wrap;
}

export function renderCard(card: CardNode, ctx: RenderContext): HTMLElement {
  const wrap = el("article", `card card-${card.mode}`);
  wrap.dataset.nodeId = card.id;
  wrap.dataset.object = card.object;
  const header = el("header", "card-header");
  const pin = el("button", "pin-card", "pin");
  pin.addEventListener("click", () => ctx.handlers.pinCard(card.object));
  const autocomplete = el("button", "autocomplete-item", "auto-complete");
  autocomplete.addEventListener("click", () => {
    const box = wrap.querySelector<HTMLInputElement>(".preference-input");
    ctx.handlers.autocompleteItem(card.object, box?.value || undefined);
  });
  const preference = el("input", "preference-input");
  preference.placeholder = "preferences for generated values";
  header.append(pin, autocomplete, preference);
  wrap.appendChild(header);
  const children = el("div", "card-children");
  children.dataset.childrenOf = card.id;
  for (const child of card.children) children.appendChild(renderNode(child, ctx));
  wrap.appendChild(children);
  return wrap;
}

// -- collections ---------------------------------------------------------

function affordanceBar(collection: CollectionNode, ctx: RenderContext): HTMLElement {
  const bar = el("div", "affordances");
  if (collection.affordances.add_empty) {
    const add = el("button", "add-empty-item", "+ empty");
    add.addEventListener("click", () => ctx.handlers.addEmptyItem(collection.path));
    bar.appendChild(add);
  }
  if (collection.affordances.add_generate) {
    const gen = el("button", "add-generate-item", "+ suggest");
    gen.addEventListener("click", () => ctx.handlers.addGenerateItem(collection.path));
    bar.appendChild(gen);
  }
  if (collection.item_entity) {
    const all = el("button", "open-entity", "all");
    all.title = `open the ${collection.item_entity} panel`;
    all.addEventListener("click", () => ctx.handlers.openEntity(collection.item_entity as string));
    bar.appendChild(all);
  }
  return bar;
}

export function renderCollection(collection: CollectionNode, ctx: RenderContext): HTMLElement {
  const wrap = el("section", `collection collection-${collection.mode}`);
  wrap.dataset.nodeId = collection.id;
  wrap.dataset.path = collection.path;
  const header = el("header", "collection-header");
  header.appendChild(el("h4", "collection-label", collection.label));
  header.appendChild(affordanceBar(collection, ctx));
  wrap.appendChild(header);

  if (collection.mode === "summary") {
    const button = el("button", "summary-button",
      `${collection.summary?.label ?? ""}: ${fieldValueText(collection.summary?.value)}`);
    button.addEventListener("click", () => ctx.handlers.expandCollection(collection.path, wrap));
    wrap.appendChild(button);
    return wrap;
  }

  const items = el("div", "collection-items");
  items.dataset.childrenOf = collection.id;
  for (const item of collection.items ?? []) items.appendChild(renderNode(item, ctx));
  wrap.appendChild(items);

  if (collection.groups && collection.groups.length) {
    const groups = el("div", "collection-groups");
    for (const group of collection.groups) {
      groups.appendChild(el("span", "group-chip", `${group.label} (${group.members.length})`));
    }
    wrap.appendChild(groups);
  }
  return wrap;
}

// -- panels --------------------------------------------------------------

function representationPicker(panel: PanelNode, ctx: RenderContext): HTMLElement {
  const select = el("select", "representation-picker");
  for (const rep of REPRESENTATIONS) {
    const opt = el("option", undefined, rep);
    opt.value = rep;
    select.appendChild(opt);
  }
  select.value = ctx.representations[panel.entity] ?? panel.representation;
  select.addEventListener("change", () => {
    ctx.handlers.switchRepresentation(panel.entity, select.value);
  });
  return select;
}

export function renderTableRow(item: ItemNode, ctx: RenderContext): HTMLElement {
  const tr = el("tr", "table-row");
  tr.dataset.nodeId = item.id;
  if (item.object) {
    tr.dataset.object = item.object;
    if (item.detail) {
      tr.addEventListener("click", (event) => {
        if ((event.target as HTMLElement).closest("button, input, select, a")) return;
        ctx.handlers.openCard(item.object as string);
      });
    }
  }
  for (const cell of item.thumbnail) {
    const td = el("td");
    td.appendChild(renderNode(cell, ctx));
    tr.appendChild(td);
  }
  return tr;
}

function renderTablePanel(panel: PanelNode, body: HTMLElement, ctx: RenderContext): void {
  const collection = panel.children[0] as CollectionNode | undefined;
  const table = el("table", "panel-table");
  const head = el("tr");
  for (const column of panel.columns ?? []) {
    const th = el("th");
    const sort = el("button", "sort-column", column);
    sort.addEventListener("click", () =>
      ctx.handlers.sortColumn(panel.entity, column, "asc"));
    th.appendChild(sort);
    head.appendChild(th);
  }
  table.appendChild(head);
  const body_ = el("tbody");
  body_.dataset.childrenOf = collection?.id ?? panel.id;
  for (const row of collection?.items ?? []) {
    body_.appendChild(renderTableRow(row as ItemNode, ctx));
  }
  table.appendChild(body_);
  body.appendChild(table);
}

function renderMapPanel(panel: PanelNode, body: HTMLElement, ctx: RenderContext): void {
  const collection = panel.children[0] as CollectionNode | undefined;
  const map = el("div", "map-canvas");
  map.dataset.childrenOf = collection?.id ?? panel.id;
  for (const node of collection?.items ?? []) {
    const item = node as ItemNode;
    const locationField = item.thumbnail.find(
      (t) => t.node === "field" && (t as FieldNode).widget === "location") as FieldNode | undefined;
    const marker = renderItem(item, ctx);
    marker.classList.add("map-marker");
    const where = ctx.geocoder.locate(fieldValueText(locationField?.value ?? item.id));
    marker.style.left = `${where.x}%`;
    marker.style.top = `${where.y}%`;
    map.appendChild(marker);
  }
  body.appendChild(map);
}

export function renderPanel(panel: PanelNode, ctx: RenderContext): HTMLElement {
  const wrap = el("section", `panel panel-${panel.kind}`);
  wrap.dataset.nodeId = panel.id;
  wrap.dataset.entity = panel.entity;
  const header = el("header", "panel-header");
  header.appendChild(el("h3", "panel-title", panel.title));
  if (panel.kind === "entity") {
    header.appendChild(representationPicker(panel, ctx));
  }
  wrap.appendChild(header);

  const body = el("div", "panel-body");
  if (panel.kind !== "entity" || panel.representation === "list") {
    body.dataset.childrenOf = panel.id;
    for (const child of panel.children) body.appendChild(renderNode(child, ctx));
  } else if (panel.representation === "table") {
    renderTablePanel(panel, body, ctx);
  } else {
    renderMapPanel(panel, body, ctx);
  }
  wrap.appendChild(body);
  return wrap;
}

export function renderNode(node: UINode, ctx: RenderContext): HTMLElement {
  switch (node.node) {
    case "field":
      return renderField(node, ctx);
    case "item":
      return renderItem(node, ctx);
    case "collection":
      return renderCollection(node, ctx);
    case "card":
      return renderCard(node, ctx);
    case "panel":
      return renderPanel(node, ctx);
  }
}

export function renderDocument(doc: UIDocument, ctx: RenderContext): HTMLElement {
  const columns = el("div", "workspace-columns");
  columns.dataset.childrenOf = "document";
  for (const panel of doc.panels) {
    // a broken panel must never blank the rest of the workspace
    try {
      columns.appendChild(renderPanel(panel, ctx));
    } catch (error) {
      const fallback = el("section", "panel panel-error",
        `panel ${panel.id} failed to render: ${String(error)}`);
      fallback.dataset.nodeId = panel.id;
      columns.appendChild(fallback);
    }
  }
  return columns;
}
