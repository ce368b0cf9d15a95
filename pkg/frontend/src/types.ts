// Wire types mirroring the server's canonical JSON forms.

export interface FieldNode {
  node: "field";
  id: string;
  path: string;
  widget: string;
  editable: boolean;
  value: unknown;
  label: string;
  categories?: string[];
}

export interface ItemNode {
  node: "item";
  id: string;
  path: string;
  object: string | null;
  thumbnail: UINode[];
  detail: string | null;
}

export interface CollectionAffordances {
  add_empty?: boolean;
  add_generate?: boolean;
  autocomplete?: boolean;
}

export interface CollectionNode {
  node: "collection";
  id: string;
  path: string;
  mode: "expanded" | "summary";
  label: string;
  items?: UINode[];
  summary?: { label: string; value: unknown };
  affordances: CollectionAffordances;
  groups?: { label: string; members: string[] }[];
  item_entity: string | null;
}

export interface CardNode {
  node: "card";
  id: string;
  object: string;
  mode: "popup" | "floating" | "panel";
  children: UINode[];
}

export interface PanelNode {
  node: "panel";
  id: string;
  kind: "home" | "entity";
  entity: string;
  representation: "list" | "table" | "map";
  title: string;
  children: UINode[];
  columns?: string[];
}

export interface UIDocument {
  node: "document";
  id: "document";
  focus: string | null;
  panels: PanelNode[];
}

export type UINode = FieldNode | ItemNode | CollectionNode | CardNode | PanelNode;

export interface DeltaOp {
  op: "add" | "remove" | "replace" | "move";
  id: string;
  parent?: string | null;
  index?: number;
  node?: UINode;
}

export interface PromptOutcome {
  checkpoint: string | null;
  message: string;
  document: UIDocument | null;
  delta: DeltaOp[];
}

export interface Violation {
  path?: string;
  rule?: string;
  code?: string;
  message: string;
}

export interface HistoryEntry {
  id: string;
  label: string;
  origin: "user-prompt" | "system" | "action";
  timestamp: number;
  head: boolean;
}

export interface SchemaView {
  schema: unknown;
  annotations: unknown;
  dependencies: unknown[];
}

export type GestureEvent =
  | { type: "edit-value"; path: string; value: unknown }
  | { type: "delete-attribute"; path: string }
  | { type: "add-generate-item"; path: string; preference?: string }
  | { type: "add-empty-item"; path: string }
  | { type: "autocomplete-item"; object: string; preference?: string }
  | { type: "switch-representation"; entity: string; representation: string }
  | { type: "sort-column"; path: string; field: string; direction: "asc" | "desc" };

export type StreamFrame =
  | { type: "ui-delta"; seq: number; delta: DeltaOp[]; checkpoint: string }
  | { type: "violation"; seq: number; violations: Violation[] }
  | { type: "checkpoint-added"; seq: number; checkpoint: string; label: string }
  | { type: "provider-status"; seq: number; status: string; message: string };
