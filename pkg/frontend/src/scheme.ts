// Scheme canvas: the template's fixed structure plus its swappable slots,
// laid out on the grid the template declares.  Only slots react to clicks;
// fixed elements are scenery.

import { escapeHtml } from "./dom";
import type { ConfigDoc, TemplateDoc } from "./api";

const CELL_W = 104;
const CELL_H = 64;
const GAP_X = 26;
const GAP_Y = 34;
const MARGIN = 14;

interface Cell {
  col: number;
  row: number;
  slot: string | null;
  label: string;
  sub: string;
}

function fixedCells(template: TemplateDoc, taken: Set<string>): Cell[] {
  const cells: Cell[] = [];
  const fixed = template.fixed;

  // Beamline and circuit templates carry an ordered element list whose
  // index is the column; named slots already occupy theirs.
  for (const key of ["sequence", "elements"]) {
    const entries = fixed[key];
    if (!Array.isArray(entries)) continue;
    entries.forEach((entry: Record<string, unknown>, index) => {
      const element = entry["element"];
      if (typeof element !== "string") return;
      const sub = typeof entry["id"] === "string" ? entry["id"]
        : typeof entry["length"] === "number" ? `${entry["length"]} m` : "";
      taken.add(`${index},0`);
      cells.push({ col: index, row: 0, slot: null, label: element, sub });
    });
  }

  // Extra chambers have no declared position; give each the first free
  // column on the top row.
  const chambers = fixed["extra_chambers"];
  if (Array.isArray(chambers)) {
    for (const chamber of chambers as Record<string, unknown>[]) {
      let col = 0;
      while (taken.has(`${col},0`)) col += 1;
      taken.add(`${col},0`);
      cells.push({ col, row: 0, slot: null, label: "chamber",
                   sub: String(chamber["id"] ?? "") });
    }
  }

  return cells;
}

function layoutCells(template: TemplateDoc, draft: ConfigDoc): Cell[] {
  const cells: Cell[] = [];
  const taken = new Set<string>();
  for (const slot of template.slots) {
    const [col, row] = slot.position;
    taken.add(`${col},${row}`);
    const chosen = draft.selections[slot.slot] ?? "?";
    const sub = slot.kinds.length > 1
      ? `${slot.slot} (1 of ${slot.kinds.length})` : slot.slot;
    cells.push({ col, row, slot: slot.slot, label: chosen, sub });
  }
  cells.push(...fixedCells(template, taken));
  return cells;
}

export interface SchemeOptions {
  selected: string | null;
  readOnly: boolean;
  onPick: (slotId: string) => void;
}

export function renderScheme(container: HTMLElement, template: TemplateDoc,
                             draft: ConfigDoc, opts: SchemeOptions): void {
  const cells = layoutCells(template, draft);
  const maxCol = Math.max(...cells.map((c) => c.col));
  const maxRow = Math.max(...cells.map((c) => c.row));
  const width = MARGIN * 2 + (maxCol + 1) * CELL_W + maxCol * GAP_X;
  const height = MARGIN * 2 + (maxRow + 1) * CELL_H + maxRow * GAP_Y;
  const cellX = (col: number) => MARGIN + col * (CELL_W + GAP_X);
  const cellY = (row: number) => MARGIN + row * (CELL_H + GAP_Y);

  const parts: string[] = [];
  parts.push(`<svg class="scheme" viewBox="0 0 ${width} ${height}" ` +
             `data-template="${escapeHtml(template.template)}">`);

  // Bus through the top row, plus a riser from every lower-row cell.
  const topRow = cells.filter((c) => c.row === 0);
  const busY = cellY(0) + CELL_H / 2;
  const busLo = Math.min(...topRow.map((c) => cellX(c.col)));
  const busHi = Math.max(...topRow.map((c) => cellX(c.col) + CELL_W));
  parts.push(`<line class="bus" x1="${busLo}" y1="${busY}" ` +
             `x2="${busHi}" y2="${busY}"/>`);
  for (const cell of cells) {
    if (cell.row === 0) continue;
    const x = cellX(cell.col) + CELL_W / 2;
    parts.push(`<line class="bus" x1="${x}" y1="${busY}" ` +
               `x2="${x}" y2="${cellY(cell.row)}"/>`);
  }

  for (const cell of cells) {
    const x = cellX(cell.col);
    const y = cellY(cell.row);
    const classes = ["cell"];
    let attrs = "";
    if (cell.slot) {
      classes.push("cell-slot");
      if (cell.slot === opts.selected) classes.push("cell-selected");
      if (!opts.readOnly) classes.push("cell-clickable");
      attrs = ` data-slot="${escapeHtml(cell.slot)}"`;
    } else {
      classes.push("cell-fixed");
    }
    parts.push(`<g class="${classes.join(" ")}"${attrs}>`);
    parts.push(`<rect x="${x}" y="${y}" width="${CELL_W}" ` +
               `height="${CELL_H}" rx="8"/>`);
    parts.push(`<text class="cell-label" x="${x + CELL_W / 2}" ` +
               `y="${y + 27}" text-anchor="middle">` +
               `${escapeHtml(cell.label)}</text>`);
    parts.push(`<text class="cell-sub" x="${x + CELL_W / 2}" ` +
               `y="${y + 46}" text-anchor="middle">` +
               `${escapeHtml(cell.sub)}</text>`);
    parts.push("</g>");
  }
  parts.push("</svg>");
  container.innerHTML = parts.join("");

  if (!opts.readOnly) {
    const svg = container.querySelector("svg");
    svg?.addEventListener("click", (event) => {
      const target = event.target as Element;
      const hit = target.closest("[data-slot]");
      if (!hit) return;
      opts.onPick(hit.getAttribute("data-slot") ?? "");
    });
  }
}
