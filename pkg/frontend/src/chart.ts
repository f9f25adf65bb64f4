// SVG line charts for run results.  One chart per declared output channel;
// a result whose channel set differs from the declaration renders an error
// block instead of a clipped chart grid.

import { escapeHtml, fmtNumber } from "./dom";
import type { OutputDoc, ResultDoc } from "./api";

const WIDTH = 600;
const HEIGHT = 250;
const PAD_LEFT = 70;
const PAD_RIGHT = 14;
const PAD_TOP = 26;
const PAD_BOTTOM = 38;

interface Trace {
  times: number[];
  values: number[];
  cls: "curve" | "ghost";
}

function ticksLinear(lo: number, hi: number, count: number): number[] {
  const ticks: number[] = [];
  for (let i = 0; i < count; i += 1) {
    ticks.push(lo + ((hi - lo) * i) / (count - 1));
  }
  return ticks;
}

function ticksDecades(lo: number, hi: number): number[] {
  const first = Math.ceil(lo - 1e-9);
  const last = Math.floor(hi + 1e-9);
  const step = Math.max(1, Math.ceil((last - first) / 7));
  const ticks: number[] = [];
  for (let d = first; d <= last; d += step) ticks.push(d);
  return ticks.length > 0 ? ticks : [lo, hi];
}

function lineChart(channel: string, unit: string, traces: Trace[],
                   logY: boolean): string {
  const everyTime = traces.flatMap((t) => t.times);
  let tLo = Math.min(...everyTime);
  let tHi = Math.max(...everyTime);
  if (tHi === tLo) tHi = tLo + 1;

  const everyValue = traces.flatMap((t) => t.values);
  const toOrdinate = (v: number) => (logY ? Math.log10(v) : v);
  let yLo = Math.min(...everyValue.map(toOrdinate));
  let yHi = Math.max(...everyValue.map(toOrdinate));
  if (!Number.isFinite(yLo) || !Number.isFinite(yHi)) {
    yLo = 0;
    yHi = 1;
  }
  if (yHi === yLo) {
    yLo -= logY ? 0.5 : Math.max(1, Math.abs(yLo) * 0.1);
    yHi += logY ? 0.5 : Math.max(1, Math.abs(yHi) * 0.1);
  }

  const innerW = WIDTH - PAD_LEFT - PAD_RIGHT;
  const innerH = HEIGHT - PAD_TOP - PAD_BOTTOM;
  const toX = (t: number) => PAD_LEFT + ((t - tLo) / (tHi - tLo)) * innerW;
  const toY = (v: number) =>
    PAD_TOP + innerH - ((toOrdinate(v) - yLo) / (yHi - yLo)) * innerH;

  const parts: string[] = [];
  parts.push(`<svg class="chart" viewBox="0 0 ${WIDTH} ${HEIGHT}" ` +
             `role="img" data-channel="${escapeHtml(channel)}">`);
  parts.push(`<text class="chart-title" x="${PAD_LEFT}" y="16">` +
             `${escapeHtml(channel)} [${escapeHtml(unit)}]</text>`);

  const xTicks = ticksLinear(tLo, tHi, 5);
  for (const t of xTicks) {
    const x = toX(t);
    parts.push(`<line class="grid" x1="${x}" y1="${PAD_TOP}" ` +
               `x2="${x}" y2="${PAD_TOP + innerH}"/>`);
    parts.push(`<text class="tick" x="${x}" y="${HEIGHT - 20}" ` +
               `text-anchor="middle">${fmtNumber(t)}</text>`);
  }
  const yTicks = logY ? ticksDecades(yLo, yHi) : ticksLinear(yLo, yHi, 5);
  for (const tick of yTicks) {
    const y = PAD_TOP + innerH - ((tick - yLo) / (yHi - yLo)) * innerH;
    const label = logY ? `1e${tick}` : fmtNumber(tick);
    parts.push(`<line class="grid" x1="${PAD_LEFT}" y1="${y}" ` +
               `x2="${PAD_LEFT + innerW}" y2="${y}"/>`);
    parts.push(`<text class="tick" x="${PAD_LEFT - 6}" y="${y + 4}" ` +
               `text-anchor="end">${label}</text>`);
  }

  parts.push(`<text class="axis-label" x="${PAD_LEFT + innerW / 2}" ` +
             `y="${HEIGHT - 4}" text-anchor="middle">t [s]</text>`);
  parts.push(`<text class="axis-label" x="14" y="${PAD_TOP + innerH / 2}" ` +
             `text-anchor="middle" transform="rotate(-90 14 ` +
             `${PAD_TOP + innerH / 2})">${escapeHtml(unit)}` +
             `${logY ? " (log)" : ""}</text>`);

  for (const trace of traces) {
    const points = trace.values
      .map((v, i) =>
        `${toX(trace.times[i] ?? 0).toFixed(1)},${toY(v).toFixed(1)}`)
      .join(" ");
    parts.push(`<polyline class="${trace.cls}" points="${points}"/>`);
  }

  if (traces.some((t) => t.cls === "ghost")) {
    const lx = PAD_LEFT + innerW - 130;
    parts.push(`<g class="legend">` +
      `<line class="curve" x1="${lx}" y1="20" x2="${lx + 22}" y2="20"/>` +
      `<text x="${lx + 27}" y="24">current</text>` +
      `<line class="ghost" x1="${lx + 72}" y1="20" x2="${lx + 94}" y2="20"/>` +
      `<text x="${lx + 99}" y="24">previous</text></g>`);
  }

  parts.push("</svg>");
  return parts.join("");
}

/**
 * Render one chart per declared channel into `container`.  `ghost` is the
 * previous result of the same workspace, drawn underneath for comparison.
 * Pressures (unit Pa) use a log ordinate while all samples are positive.
 */
export function renderResultCharts(container: HTMLElement,
                                   outputs: OutputDoc[], result: ResultDoc,
                                   ghost: ResultDoc | null): void {
  const declared = outputs.map((o) => o.channel);
  const got = Object.keys(result.channels);
  const missing = declared.filter((c) => !got.includes(c));
  const extra = got.filter((c) => !declared.includes(c));
  if (missing.length > 0 || extra.length > 0) {
    container.innerHTML =
      `<div class="error-banner">result channels do not match the ` +
      `template: expected [${escapeHtml(declared.join(", "))}], ` +
      `got [${escapeHtml(got.join(", "))}]</div>`;
    return;
  }

  const blocks: string[] = [];
  for (const output of outputs) {
    const values = result.channels[output.channel];
    if (!values) continue;
    const traces: Trace[] = [];
    const previous = ghost?.channels[output.channel];
    if (previous && ghost) {
      traces.push({ times: ghost.times, values: previous, cls: "ghost" });
    }
    traces.push({ times: result.times, values, cls: "curve" });
    const positive = traces.every((t) => t.values.every((v) => v > 0));
    const logY = output.unit === "Pa" && positive;
    blocks.push(`<figure class="chart-card">` +
                lineChart(output.channel, output.unit, traces, logY) +
                `</figure>`);
  }
  container.innerHTML = blocks.join("");
}
