// Synchronized highlighting: the highlighted set is exactly the set of
// rendered occurrences of the hovered object, computed from the DOM.

import { describe, expect, it } from "vitest";

import { StubGeocoder } from "../src/geocode.js";
import { applyHighlight, occurrences, wireHighlighting } from "../src/highlight.js";
import { renderDocument, type RenderContext } from "../src/render.js";
import { goldenDocument } from "./golden.js";

function context(): RenderContext {
  return {
    handlers: {
      editValue: () => undefined, deleteAttribute: () => undefined,
      addEmptyItem: () => undefined, addGenerateItem: () => undefined,
      autocompleteItem: () => undefined, openCard: () => undefined,
      pinCard: () => undefined, openEntity: () => undefined,
      switchRepresentation: () => undefined, sortColumn: () => undefined,
      expandCollection: () => undefined,
    },
    geocoder: new StubGeocoder(),
    representations: {},
  };
}

describe("synchronized highlighting", () => {
  it("highlights every occurrence of the hovered object, and only those", () => {
    const root = renderDocument(goldenDocument(), context());
    document.body.replaceChildren(root);

    // USER-1 is both the host and a guest: two occurrences in the document
    const expected = occurrences(root, "USER-1");
    expect(expected.length).toBe(2);

    applyHighlight(root, "USER-1");
    const highlighted = Array.from(root.querySelectorAll<HTMLElement>(".highlighted"));
    expect(new Set(highlighted)).toEqual(new Set(expected));
    for (const el of highlighted) {
      expect(el.dataset.object).toBe("USER-1");
    }

    applyHighlight(root, null);
    expect(root.querySelectorAll(".highlighted").length).toBe(0);
  });

  it("follows mouseover through event wiring", () => {
    const root = renderDocument(goldenDocument(), context());
    document.body.replaceChildren(root);
    const changes: (string | null)[] = [];
    wireHighlighting(root, (object) => changes.push(object));

    const target = occurrences(root, "STORE-2")[0];
    target.dispatchEvent(new MouseEvent("mouseover", { bubbles: true }));
    expect(changes).toEqual(["STORE-2"]);
    const highlighted = Array.from(root.querySelectorAll<HTMLElement>(".highlighted"));
    expect(new Set(highlighted)).toEqual(new Set(occurrences(root, "STORE-2")));
  });

  it("computes disjoint sets for different objects", () => {
    const root = renderDocument(goldenDocument(), context());
    const a = new Set(occurrences(root, "STORE-1"));
    const b = new Set(occurrences(root, "STORE-2"));
    for (const el of a) expect(b.has(el)).toBe(false);
    expect(a.size).toBeGreaterThan(0);
    expect(b.size).toBeGreaterThan(0);
  });
});
