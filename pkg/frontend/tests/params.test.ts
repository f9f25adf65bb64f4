// Parameter panel: slider spacing, kind selector contents, unit labels
// and inline violation display.

import { describe, expect, it } from "vitest";

import { renderParamPanel, sliderPos, sliderValue,
         updatePanelErrors } from "../src/params";
import { defaultDraft } from "../src/validate";
import { realTemplates, templateById } from "./helpers";

const templates = realTemplates();

function panelFor(templateId: string, selected: string) {
  const template = templateById(templates, templateId);
  const draft = defaultDraft(template);
  const host = document.createElement("div");
  const seen: { slot: string; name: string; value: number | null }[] = [];
  renderParamPanel(host, template, draft, selected, {
    readOnly: false,
    onKind: () => undefined,
    onValue: (slot, name, value) => seen.push({ slot, name, value }),
  });
  return { template, draft, host, seen };
}

describe("slider spacing", () => {
  const logSpec = { name: "p", unit: "Pa", min: 1e-2, max: 1e2,
                    default: 1, scale: "log" as const };
  const linSpec = { ...logSpec, scale: "linear" as const };

  it("puts the midpoint of a log range at the geometric mean", () => {
    expect(sliderValue(logSpec, 500)).toBeCloseTo(1, 9);
    expect(sliderPos(logSpec, 1)).toBe(500);
  });

  it("keeps linear ranges arithmetic", () => {
    expect(sliderValue(linSpec, 500)).toBeCloseTo(50.005, 6);
  });

  it("clamps slider output to the range ends", () => {
    expect(sliderValue(logSpec, 0)).toBeCloseTo(1e-2, 9);
    expect(sliderValue(logSpec, 1000)).toBeCloseTo(1e2, 9);
    expect(sliderPos(logSpec, 1e9)).toBe(1000);
  });
});

describe("parameter panel", () => {
  it("offers exactly the allowed kinds for a two-kind slot", () => {
    const { host } = panelFor("vacuum-station", "pump_hv");
    const options =
      host.querySelectorAll<HTMLOptionElement>(".kind-select option");
    expect([...options].map((o) => o.value)).toEqual(["turbo", "diffusion"]);
  });

  it("shows no selector for single-kind slots", () => {
    const { host } = panelFor("rlc-bench", "r_series");
    expect(host.querySelector(".kind-select")).toBeNull();
    expect(host.querySelector(".slot-kind")?.textContent).toBe("resistor");
  });

  it("labels every row with the parameter unit", () => {
    const { template, host } = panelFor("vacuum-station", "vessel");
    const units = [...host.querySelectorAll(".param-unit")]
      .map((node) => node.textContent);
    const vessel = template.slots.find((s) => s.slot === "vessel");
    const expected = vessel?.kinds[0]?.params.map((p) => p.unit) ?? [];
    expect(units.slice(0, expected.length)).toEqual(expected);
  });

  it("reports keyboard entry through onValue, clearing on junk", () => {
    const { host, seen } = panelFor("transport-channel", "q1");
    const number = host.querySelector<HTMLInputElement>(
      '.param-row[data-slot="q1"] .param-number');
    expect(number).not.toBeNull();
    if (!number) return;
    number.value = "123.5";
    number.dispatchEvent(new Event("input", { bubbles: true }));
    number.value = "";
    number.dispatchEvent(new Event("input", { bubbles: true }));
    expect(seen.at(-2)?.value).toBe(123.5);
    expect(seen.at(-1)?.value).toBeNull();
  });

  it("maps violations onto their rows and clears the rest", () => {
    const { host } = panelFor("transport-channel", "q1");
    const row = host.querySelector<HTMLElement>(
      '.param-row[data-slot="q1"]');
    const name = row?.dataset["param"] ?? "";
    updatePanelErrors(host, [
      { slot: "q1", param: name, reason: "out_of_range",
        detail: "q1 is out of range" }]);
    expect(row?.classList.contains("row-invalid")).toBe(true);
    expect(row?.querySelector(".param-error")?.textContent)
      .toBe("q1 is out of range");
    updatePanelErrors(host, []);
    expect(row?.classList.contains("row-invalid")).toBe(false);
    expect(row?.querySelector(".param-error")?.textContent).toBe("");
  });

  it("shows slot-level violations in the section banner", () => {
    const { host } = panelFor("transport-channel", "stage3");
    updatePanelErrors(host, [
      { slot: "stage3", param: null, reason: "invalid_kind",
        detail: "bad kind" }]);
    const banner = host.querySelector(
      '[data-section="stage3"] .section-error');
    expect(banner?.textContent).toBe("bad kind");
  });

  it("disables every input in read-only mode", () => {
    const template = templateById(templates, "transport-channel");
    const host = document.createElement("div");
    renderParamPanel(host, template, defaultDraft(template), "q1", {
      readOnly: true,
      onKind: () => undefined,
      onValue: () => undefined,
    });
    const inputs = host.querySelectorAll<HTMLInputElement>("input");
    expect(inputs.length).toBeGreaterThan(0);
    for (const input of inputs) expect(input.disabled).toBe(true);
  });
});
