// Synchronized cross-panel highlighting.
//
// Every rendered occurrence of an object carries data-object=<id>; the
// highlight set is always computed from the live DOM, never maintained
// by hand, so it cannot drift from what is actually on screen.

function escapeAttr(value: string): string {
  return value.replace(/["\\]/g, "\\$&");
}

export function occurrences(root: ParentNode, object: string): HTMLElement[] {
  return Array.from(root.querySelectorAll<HTMLElement>(`[data-object="${escapeAttr(object)}"]`));
}

export function applyHighlight(root: ParentNode, object: string | null): void {
  for (const el of Array.from(root.querySelectorAll<HTMLElement>(".highlighted"))) {
    el.classList.remove("highlighted");
  }
  if (object) {
    for (const el of occurrences(root, object)) {
      el.classList.add("highlighted");
    }
  }
}

export function wireHighlighting(root: HTMLElement, onChange?: (object: string | null) => void): void {
  root.addEventListener("mouseover", (event) => {
    const hit = (event.target as HTMLElement).closest<HTMLElement>("[data-object]");
    const object = hit?.dataset.object ?? null;
    applyHighlight(root, object);
    onChange?.(object);
  });
  root.addEventListener("mouseleave", () => {
    applyHighlight(root, null);
    onChange?.(null);
  });
}
