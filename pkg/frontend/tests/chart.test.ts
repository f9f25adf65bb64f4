// Result charts: one per declared channel, labeled axes, log ordinate for
// pressures, ghost overlay, and a visible error on channel mismatch.

import { describe, expect, it } from "vitest";

import type { OutputDoc, ResultDoc } from "../src/api";
import { renderResultCharts } from "../src/chart";

const outputs: OutputDoc[] = [
  { channel: "vessel", unit: "Pa" },
  { channel: "manifold", unit: "Pa" },
];

function result(scale = 1): ResultDoc {
  return {
    times: [0, 1, 2, 3],
    channels: {
      vessel: [1000 * scale, 10 * scale, 0.5 * scale, 0.01 * scale],
      manifold: [900 * scale, 20 * scale, 1.2 * scale, 0.08 * scale],
    },
    units: { vessel: "Pa", manifold: "Pa" },
  };
}

describe("renderResultCharts", () => {
  it("draws one chart per declared channel with labeled axes", () => {
    const host = document.createElement("div");
    renderResultCharts(host, outputs, result(), null);
    const charts = host.querySelectorAll("svg.chart");
    expect(charts).toHaveLength(2);
    expect([...charts].map((c) => c.getAttribute("data-channel")))
      .toEqual(["vessel", "manifold"]);
    const text = host.textContent ?? "";
    expect(text).toContain("vessel [Pa]");
    expect(text).toContain("t [s]");
  });

  it("uses a log ordinate for positive pressure channels", () => {
    const host = document.createElement("div");
    renderResultCharts(host, outputs, result(), null);
    expect(host.textContent).toContain("Pa (log)");
    expect(host.textContent).toContain("1e");
  });

  it("falls back to linear when a pressure touches zero", () => {
    const host = document.createElement("div");
    const flat = result();
    const vessel = flat.channels["vessel"];
    if (vessel) vessel[3] = 0;
    renderResultCharts(host, outputs, flat, null);
    const vesselChart = host.querySelector('svg[data-channel="vessel"]');
    expect(vesselChart?.textContent).not.toContain("(log)");
    const manifoldChart = host.querySelector('svg[data-channel="manifold"]');
    expect(manifoldChart?.textContent).toContain("(log)");
  });

  it("overlays the previous result as a ghost with a legend", () => {
    const host = document.createElement("div");
    renderResultCharts(host, outputs, result(), result(3));
    const first = host.querySelector("svg.chart");
    expect(first?.querySelectorAll("polyline.curve")).toHaveLength(1);
    expect(first?.querySelectorAll("polyline.ghost")).toHaveLength(1);
    expect(first?.textContent).toContain("current");
    expect(first?.textContent).toContain("previous");
  });

  it("shows an error instead of truncating on channel mismatch", () => {
    const host = document.createElement("div");
    const partial = result();
    delete (partial.channels as Record<string, unknown>)["manifold"];
    renderResultCharts(host, outputs, partial, null);
    expect(host.querySelector("svg.chart")).toBeNull();
    const banner = host.querySelector(".error-banner");
    expect(banner?.textContent).toContain("manifold");
    expect(banner?.textContent).toContain("do not match");
  });

  it("treats extra undeclared channels as a mismatch too", () => {
    const host = document.createElement("div");
    const extra = result();
    extra.channels["leak"] = [1, 1, 1, 1];
    renderResultCharts(host, outputs, extra, null);
    expect(host.querySelector("svg.chart")).toBeNull();
    expect(host.querySelector(".error-banner")?.textContent)
      .toContain("leak");
  });
});
