/** Minimal deterministic SVG string building (no DOM, no timestamps). */

export type Attrs = Record<string, string | number>;

function fmtAttr(value: string | number): string {
  if (typeof value === "number") {
    // Short, stable coordinates; full precision stays in data-* attributes.
    return Number.isInteger(value) ? String(value) : value.toFixed(2);
  }
  return value;
}

function esc(text: string): string {
  return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function el(tag: string, attrs: Attrs, children: string | string[] = []): string {
  const attrText = Object.entries(attrs)
    .map(([k, v]) => ` ${k}="${esc(fmtAttr(v))}"`)
    .join("");
  const body = Array.isArray(children) ? children.join("") : children;
  return body.length > 0 ? `<${tag}${attrText}>${body}</${tag}>` : `<${tag}${attrText}/>`;
}

export function text(x: number, y: number, content: string, attrs: Attrs = {}): string {
  return el("text", { x, y, "font-family": "Helvetica, sans-serif", ...attrs }, esc(content));
}

export function svgDocument(width: number, height: number, body: string[]): string {
  return (
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" ` +
    `viewBox="0 0 ${width} ${height}">` +
    el("rect", { x: 0, y: 0, width, height, fill: "#ffffff" }) +
    body.join("") +
    "</svg>"
  );
}

/** Piecewise-linear colormap over fixed anchor colors (viridis-like). */
const ANCHORS: Array<[number, number, number]> = [
  [68, 1, 84],
  [59, 82, 139],
  [33, 145, 140],
  [94, 201, 98],
  [253, 231, 37],
];

export function colormap(t: number): string {
  const clamped = Math.min(1, Math.max(0, t));
  const scaled = clamped * (ANCHORS.length - 1);
  const i = Math.min(ANCHORS.length - 2, Math.floor(scaled));
  const frac = scaled - i;
  const mix = (a: number, b: number) => Math.round(a * (1 - frac) + b * frac);
  const [r, g, b] = [0, 1, 2].map((c) => mix(ANCHORS[i][c], ANCHORS[i + 1][c]));
  return `rgb(${r},${g},${b})`;
}
