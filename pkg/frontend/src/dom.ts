// Small DOM conveniences shared by every view.

export function mustElement<T extends Element>(root: ParentNode,
                                               selector: string): T {
  const node = root.querySelector(selector);
  if (!node) throw new Error(`missing element: ${selector}`);
  return node as T;
}

export function escapeHtml(text: string): string {
  return text
    .replaceAll("&", "&amp;")
    .replaceAll("<", "&lt;")
    .replaceAll(">", "&gt;")
    .replaceAll('"', "&quot;")
    .replaceAll("'", "&#39;");
}

/** Compact numeric label: plain notation near 1, exponent elsewhere. */
export function fmtNumber(value: number): string {
  if (value === 0) return "0";
  const magnitude = Math.abs(value);
  if (magnitude >= 1e-3 && magnitude < 1e5) {
    return String(Number(value.toPrecision(6)));
  }
  return value.toExponential(2).replace(/\.?0+e/, "e");
}

export function fmtTime(epochSeconds: number): string {
  return new Date(epochSeconds * 1000).toISOString()
    .slice(0, 16).replace("T", " ");
}
