// Parameter panel: numeric entry for the selected slot plus the simulation
// directives.  Sliders clamp to the spec range; typed values may leave it,
// in which case the row is flagged and the caller keeps the run blocked.

import { escapeHtml, fmtNumber } from "./dom";
import type { ConfigDoc, ParamSpecDoc, TemplateDoc } from "./api";
import type { DraftViolation } from "./validate";

const SLIDER_STEPS = 1000;

/** Slider position (0..SLIDER_STEPS) for a value, log-spaced when asked. */
export function sliderPos(spec: ParamSpecDoc, value: number): number {
  let fraction: number;
  if (spec.scale === "log") {
    fraction = Math.log(value / spec.min) / Math.log(spec.max / spec.min);
  } else {
    fraction = (value - spec.min) / (spec.max - spec.min);
  }
  const clamped = Math.min(1, Math.max(0, fraction));
  return Math.round(clamped * SLIDER_STEPS);
}

/** Inverse of sliderPos; always lands inside [min, max]. */
export function sliderValue(spec: ParamSpecDoc, pos: number): number {
  const fraction = Math.min(1, Math.max(0, pos / SLIDER_STEPS));
  if (spec.scale === "log") {
    return spec.min * Math.pow(spec.max / spec.min, fraction);
  }
  return spec.min + (spec.max - spec.min) * fraction;
}

function paramRow(slotId: string, spec: ParamSpecDoc,
                  value: number | undefined, readOnly: boolean): string {
  const shown = value === undefined ? "" : String(value);
  const pos = value === undefined
    ? sliderPos(spec, spec.default) : sliderPos(spec, value);
  const disabled = readOnly ? " disabled" : "";
  return `
    <div class="param-row" data-slot="${escapeHtml(slotId)}"
         data-param="${escapeHtml(spec.name)}">
      <label class="param-name">${escapeHtml(spec.name)}
        <span class="param-unit">${escapeHtml(spec.unit)}</span>
      </label>
      <div class="param-inputs">
        <input class="param-number" type="number" step="any"
               min="${spec.min}" max="${spec.max}" value="${shown}"${disabled}>
        <input class="param-slider" type="range" min="0"
               max="${SLIDER_STEPS}" step="1" value="${pos}"${disabled}>
      </div>
      <div class="param-range">${fmtNumber(spec.min)} to
        ${fmtNumber(spec.max)}${spec.scale === "log" ? ", log scale" : ""}</div>
      <div class="param-error" role="alert"></div>
    </div>`;
}

function kindSelector(slotId: string, kinds: string[], chosen: string,
                      readOnly: boolean): string {
  if (kinds.length < 2) {
    return `<span class="slot-kind">${escapeHtml(chosen)}</span>`;
  }
  const options = kinds.map((kind) =>
    `<option value="${escapeHtml(kind)}"` +
    `${kind === chosen ? " selected" : ""}>${escapeHtml(kind)}</option>`)
    .join("");
  return `<select class="kind-select" data-slot="${escapeHtml(slotId)}"` +
         `${readOnly ? " disabled" : ""}>${options}</select>`;
}

export interface PanelOptions {
  readOnly: boolean;
  onKind: (slotId: string, kind: string) => void;
  onValue: (slotId: string, name: string, value: number | null) => void;
}

export function renderParamPanel(container: HTMLElement,
                                 template: TemplateDoc, draft: ConfigDoc,
                                 selectedSlot: string | null,
                                 opts: PanelOptions): void {
  const sections: string[] = [];

  const slot = template.slots.find((s) => s.slot === selectedSlot);
  if (slot) {
    const chosen = draft.selections[slot.slot] ?? "";
    const option = slot.kinds.find((k) => k.kind === chosen);
    const rows = (option?.params ?? []).map((spec) =>
      paramRow(slot.slot, spec, draft.params[slot.slot]?.[spec.name],
               opts.readOnly)).join("");
    sections.push(`
      <section class="panel-section" data-section="${escapeHtml(slot.slot)}">
        <h3>${escapeHtml(slot.slot)}
          ${kindSelector(slot.slot, slot.kinds.map((k) => k.kind), chosen,
                         opts.readOnly)}
        </h3>
        <div class="section-error" role="alert"></div>
        ${rows}
      </section>`);
  } else {
    sections.push(`<p class="panel-hint">Select a slot on the scheme to ` +
                  `edit its parameters.</p>`);
  }

  const simRows = template.sim.map((spec) =>
    paramRow("sim", spec, draft.sim[spec.name], opts.readOnly)).join("");
  sections.push(`
    <section class="panel-section" data-section="sim">
      <h3>simulation</h3>
      <div class="section-error" role="alert"></div>
      ${simRows}
    </section>`);

  container.innerHTML = sections.join("");
  if (opts.readOnly) return;

  const specFor = (slotId: string, name: string): ParamSpecDoc | undefined => {
    const specs = slotId === "sim"
      ? template.sim
      : template.slots.find((s) => s.slot === slotId)?.kinds
          .find((k) => k.kind === draft.selections[slotId])?.params;
    return specs?.find((p) => p.name === name);
  };

  for (const row of container.querySelectorAll<HTMLElement>(".param-row")) {
    const slotId = row.dataset["slot"] ?? "";
    const name = row.dataset["param"] ?? "";
    const number = row.querySelector<HTMLInputElement>(".param-number");
    const slider = row.querySelector<HTMLInputElement>(".param-slider");
    const spec = specFor(slotId, name);
    if (!number || !slider || !spec) continue;

    number.addEventListener("input", () => {
      const parsed = Number.parseFloat(number.value);
      if (Number.isFinite(parsed)) slider.value = String(sliderPos(spec, parsed));
      opts.onValue(slotId, name, Number.isFinite(parsed) ? parsed : null);
    });
    slider.addEventListener("input", () => {
      const value = sliderValue(spec, Number.parseInt(slider.value, 10));
      const rounded = Number(value.toPrecision(6));
      number.value = String(rounded);
      opts.onValue(slotId, name, rounded);
    });
  }

  container.querySelector<HTMLSelectElement>(".kind-select")
    ?.addEventListener("change", (event) => {
      const select = event.target as HTMLSelectElement;
      opts.onKind(select.dataset["slot"] ?? "", select.value);
    });
}

/**
 * Map violations onto panel rows: parameter-level ones flag their row,
 * slot-level ones land in the section banner.  Rows without a matching
 * violation are cleared.
 */
export function updatePanelErrors(container: HTMLElement,
                                  violations: DraftViolation[]): void {
  for (const row of container.querySelectorAll<HTMLElement>(".param-row")) {
    const match = violations.find(
      (v) => v.slot === row.dataset["slot"] && v.param === row.dataset["param"]);
    const errorBox = row.querySelector<HTMLElement>(".param-error");
    if (errorBox) errorBox.textContent = match ? match.detail : "";
    row.classList.toggle("row-invalid", match !== undefined);
  }
  for (const section of
       container.querySelectorAll<HTMLElement>(".panel-section")) {
    const slotId = section.dataset["section"];
    const slotLevel = violations.filter(
      (v) => v.slot === slotId && v.param === null);
    const banner = section.querySelector<HTMLElement>(".section-error");
    if (banner) {
      banner.textContent = slotLevel.map((v) => v.detail).join("; ");
    }
  }
}
