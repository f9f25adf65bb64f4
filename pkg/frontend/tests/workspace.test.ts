// Workspace behavior against a scripted transport: validation gating,
// slot cycling, the poll loop, ghost overlays and server-side rejections.

import { describe, expect, it } from "vitest";

import { ApiClient } from "../src/api";
import type { ConfigDoc, ResultDoc, RunStatus, TemplateDoc } from "../src/api";
import { Workspace } from "../src/workspace";
import { fakeFetch, realTemplates, templateById, waitFor } from "./helpers";
import type { FakeRoute } from "./helpers";

const templates = realTemplates();
const transport = templateById(templates, "transport-channel");

function transportResult(scale = 1): ResultDoc {
  const value = (base: number) => [base * scale, base * scale * 1.1,
                                   base * scale * 0.9];
  return {
    times: [0, 1, 2],
    channels: {
      envelope_x: value(0.002), envelope_y: value(0.002),
      beta_x: value(5), beta_y: value(5),
    },
    units: { envelope_x: "m", envelope_y: "m", beta_x: "m", beta_y: "m" },
  };
}

interface RunScript {
  statuses: RunStatus[];
  result?: ResultDoc | null;
  error?: string | null;
}

function runRoutes(script: RunScript): FakeRoute[] {
  let minted = 0;
  const polls = new Map<string, number>();
  const runDoc = (id: string, status: RunStatus, config: ConfigDoc) => ({
    run_id: id, owner_id: "usr_1", config, status,
    result: status === "Done" ? (script.result ?? transportResult()) : null,
    error: status === "Failed" ? (script.error ?? "solver died") : null,
    created: 100, finished: status === "Done" || status === "Failed"
      ? 101.5 : null,
  });
  const configs = new Map<string, ConfigDoc>();
  return [
    {
      method: "POST", path: "/api/v1/runs",
      reply: (body: unknown) => {
        minted += 1;
        const id = `run_${minted}`;
        polls.set(id, 0);
        configs.set(id, body as ConfigDoc);
        const first = script.statuses[0] ?? "Pending";
        return { status: 201, body: runDoc(id, first, body as ConfigDoc) };
      },
    },
    {
      method: "GET", path: /^\/api\/v1\/runs\/run_\d+$/,
      reply: () => {
        const id = `run_${minted}`;
        const at = Math.min((polls.get(id) ?? 0) + 1,
                            script.statuses.length - 1);
        polls.set(id, at);
        const status = script.statuses[at] ?? "Done";
        return { status: 200,
                 body: runDoc(id, status, configs.get(id) as ConfigDoc) };
      },
    },
  ];
}

function mountWorkspace(routes: FakeRoute[], readOnly = false) {
  const { fetchFn, calls } = fakeFetch(routes);
  const client = new ApiClient("", fetchFn);
  client.token = "tok";
  const host = document.createElement("div");
  document.body.appendChild(host);
  const workspace = new Workspace(client, transport, undefined, { readOnly });
  workspace.mount(host);
  return { workspace, host, calls };
}

function firstSpecName(slotId: string, kind: string): string {
  const slot = transport.slots.find((s) => s.slot === slotId);
  const name = slot?.kinds.find((k) => k.kind === kind)?.params[0]?.name;
  if (!name) throw new Error(`no params for ${slotId}/${kind}`);
  return name;
}

describe("workspace editing", () => {
  it("selects a slot on first click and cycles kinds on the second", () => {
    const { workspace, host } = mountWorkspace([]);
    const stage = host.querySelector<SVGElement>('[data-slot="stage3"] rect');
    expect(stage).not.toBeNull();
    stage?.dispatchEvent(new Event("click", { bubbles: true }));
    expect(host.querySelector('[data-slot="stage3"]')?.classList
      .contains("cell-selected")).toBe(true);
    expect(workspace.draft.selections["stage3"]).toBe("drift");

    host.querySelector('[data-slot="stage3"] rect')
      ?.dispatchEvent(new Event("click", { bubbles: true }));
    expect(workspace.draft.selections["stage3"]).toBe("quadrupole");
    expect(host.querySelector('[data-slot="stage3"] .cell-label')
      ?.textContent).toBe("quadrupole");

    // Params were reset to the new kind's defaults.
    const spec = firstSpecName("stage3", "quadrupole");
    expect(workspace.draft.params["stage3"]?.[spec]).toBeDefined();
  });

  it("disables the run button while a typed value is out of range", () => {
    const { host } = mountWorkspace([]);
    const run = host.querySelector<HTMLButtonElement>(".run-btn");
    expect(run?.disabled).toBe(false);

    const row = host.querySelector<HTMLElement>('.param-row[data-slot="q1"]');
    const input = row?.querySelector<HTMLInputElement>(".param-number");
    expect(input).not.toBeNull();
    if (!input || !row) return;
    const max = Number(input.max);

    input.value = String(max * 10);
    input.dispatchEvent(new Event("input", { bubbles: true }));
    expect(run?.disabled).toBe(true);
    expect(row.querySelector(".param-error")?.textContent)
      .toContain("outside");

    input.value = String(max);
    input.dispatchEvent(new Event("input", { bubbles: true }));
    expect(run?.disabled).toBe(false);
    expect(row.querySelector(".param-error")?.textContent).toBe("");
  });
});

describe("workspace runs", () => {
  it("polls to completion and renders every declared channel", async () => {
    const { host } = mountWorkspace(runRoutes({
      statuses: ["Pending", "Running", "Done"] }));
    host.querySelector<HTMLButtonElement>(".run-btn")?.click();
    await waitFor(() => host.querySelectorAll("svg.chart").length === 4,
                  "four charts");
    expect(host.querySelector(".run-status")?.textContent)
      .toContain("done in 1.5s");
    expect(host.querySelector<HTMLButtonElement>(".csv-btn")?.hidden)
      .toBe(false);
  }, 15000);

  it("keeps the previous curve as a ghost on the next run", async () => {
    const { host } = mountWorkspace(runRoutes({
      statuses: ["Pending", "Done"] }));
    const run = host.querySelector<HTMLButtonElement>(".run-btn");
    run?.click();
    await waitFor(() => host.querySelectorAll("svg.chart").length === 4,
                  "first run charts");
    expect(host.querySelectorAll("polyline.ghost")).toHaveLength(0);

    run?.click();
    await waitFor(() => host.querySelectorAll("polyline.ghost").length === 4,
                  "ghost overlay");
    expect(host.querySelectorAll("polyline.curve")).toHaveLength(4);
    expect(host.querySelector("svg.chart")?.textContent)
      .toContain("previous");
  }, 20000);

  it("stops polling once the workspace is disposed", async () => {
    const { workspace, host, calls } = mountWorkspace(runRoutes({
      statuses: ["Pending", "Pending", "Pending", "Pending", "Pending",
                 "Pending", "Pending", "Pending"] }));
    host.querySelector<HTMLButtonElement>(".run-btn")?.click();
    await waitFor(() => calls.some((c) => c.method === "GET"), "first poll");
    workspace.dispose();
    const settled = calls.length;
    await new Promise((resolve) => setTimeout(resolve, 1300));
    expect(calls.length).toBe(settled);
  }, 15000);

  it("shows the solver message when the run fails", async () => {
    const { host } = mountWorkspace(runRoutes({
      statuses: ["Pending", "Failed"], error: "beam hit the aperture" }));
    host.querySelector<HTMLButtonElement>(".run-btn")?.click();
    await waitFor(() => (host.querySelector(".run-status")?.textContent ?? "")
      .includes("failed"), "failure status");
    expect(host.querySelector(".run-status")?.textContent)
      .toContain("beam hit the aperture");
    expect(host.querySelectorAll("svg.chart")).toHaveLength(0);
  }, 15000);

  it("maps a 422 violation list onto the offending fields", async () => {
    const param = firstSpecName("q1", "quadrupole");
    const { host } = mountWorkspace([{
      method: "POST", path: "/api/v1/runs",
      reply: () => ({ status: 422, body: {
        error: "invalid", detail: "config violates the template",
        violations: [
          { slot: "q1", param, reason: "out_of_range",
            detail: "server refused this value" },
          { field: "config", reason: "malformed", detail: "odd payload" },
        ] } }),
    }]);
    host.querySelector<HTMLButtonElement>(".run-btn")?.click();
    await waitFor(() => (host.querySelector(".run-status")?.textContent ?? "")
      .includes("rejected"), "rejection status");

    const row = host.querySelector('.param-row[data-slot="q1"]');
    expect(row?.querySelector(".param-error")?.textContent)
      .toBe("server refused this value");
    const banner = host.querySelector(".ws-violations")?.textContent ?? "";
    expect(banner).toContain("server refused this value");
    expect(banner).toContain("config: odd payload");

    // The next edit clears stale server verdicts.
    const input = row?.querySelector<HTMLInputElement>(".param-number");
    if (!input) throw new Error("q1 input missing");
    input.value = input.max;
    input.dispatchEvent(new Event("input", { bubbles: true }));
    expect(row?.querySelector(".param-error")?.textContent).toBe("");
  }, 15000);

  it("surfaces a result with missing channels as a visible error", async () => {
    const broken = transportResult();
    delete (broken.channels as Record<string, unknown>)["beta_y"];
    const { host } = mountWorkspace(runRoutes({
      statuses: ["Pending", "Done"], result: broken }));
    host.querySelector<HTMLButtonElement>(".run-btn")?.click();
    await waitFor(() => host.querySelector(".ws-charts .error-banner"),
                  "mismatch banner");
    expect(host.querySelectorAll("svg.chart")).toHaveLength(0);
    expect(host.querySelector(".ws-charts .error-banner")?.textContent)
      .toContain("beta_y");
  }, 15000);

  it("blocks editing but allows re-running in read-only mode", () => {
    const { host } = mountWorkspace(runRoutes({
      statuses: ["Pending", "Done"] }), true);
    for (const input of host.querySelectorAll<HTMLInputElement>("input")) {
      expect(input.disabled).toBe(true);
    }
    expect(host.querySelector<HTMLButtonElement>(".run-btn")?.disabled)
      .toBe(false);
  });
});
