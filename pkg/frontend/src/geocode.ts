// Pluggable geocoding for the map view. The default stub is fully
// deterministic so map rendering works offline and in tests; a real
// deployment can swap in a network geocoder without touching the views.

export interface Geocoder {
  locate(text: string): { x: number; y: number };
}

function hash32(text: string): number {
  let h = 2166136261;
  for (let i = 0; i < text.length; i++) {
    h ^= text.charCodeAt(i);
    h = Math.imul(h, 16777619);
  }
  return h >>> 0;
}

export class StubGeocoder implements Geocoder {
  // percentage coordinates inside the map canvas, stable per location text
  locate(text: string): { x: number; y: number } {
    const h = hash32(text);
    return { x: 8 + (h % 1000) / 1000 * 84, y: 8 + ((h >>> 10) % 1000) / 1000 * 84 };
  }
}
