// Unit coverage for the client-side draft validator.

import { describe, expect, it } from "vitest";

import type { ConfigDoc, TemplateDoc } from "../src/api";
import { checkDraft, defaultDraft } from "../src/validate";
import { realTemplates } from "./helpers";

const bench: TemplateDoc = {
  template: "bench",
  lab_kind: "circuit",
  title: "Bench",
  discipline_tags: [],
  slots: [
    {
      slot: "stage",
      position: [0, 0],
      default: "coil",
      kinds: [
        { kind: "coil", params: [
          { name: "turns", unit: "1", min: 10, max: 200, default: 50,
            scale: "linear" },
        ] },
        { kind: "plate", params: [
          { name: "gap", unit: "m", min: 1e-3, max: 1e-1, default: 1e-2,
            scale: "log" },
        ] },
      ],
    },
  ],
  fixed: {},
  sim: [
    { name: "t_end", unit: "s", min: 0.1, max: 10, default: 1,
      scale: "linear" },
  ],
  outputs: [{ channel: "v", unit: "V" }],
};

function draft(): ConfigDoc {
  return defaultDraft(bench);
}

describe("checkDraft", () => {
  it("accepts the default draft of every template", () => {
    expect(checkDraft(bench, draft())).toEqual([]);
    for (const template of realTemplates()) {
      expect(checkDraft(template, defaultDraft(template))).toEqual([]);
    }
  });

  it("treats range bounds as inclusive", () => {
    const doc = draft();
    doc.params["stage"] = { turns: 10 };
    expect(checkDraft(bench, doc)).toEqual([]);
    doc.params["stage"] = { turns: 200 };
    expect(checkDraft(bench, doc)).toEqual([]);
  });

  it("flags values outside the range", () => {
    const doc = draft();
    doc.params["stage"] = { turns: 200.0001 };
    const violations = checkDraft(bench, doc);
    expect(violations).toHaveLength(1);
    expect(violations[0]).toMatchObject({
      slot: "stage", param: "turns", reason: "out_of_range" });
    expect(violations[0]?.detail).toContain("[10, 200]");
  });

  it("flags non-finite and non-numeric values", () => {
    for (const junk of [Number.NaN, Number.POSITIVE_INFINITY,
                        "12" as unknown as number]) {
      const doc = draft();
      doc.params["stage"] = { turns: junk };
      expect(checkDraft(bench, doc)).toMatchObject([
        { slot: "stage", param: "turns", reason: "not_a_number" }]);
    }
  });

  it("reports a missing selection once and skips its params", () => {
    const doc = draft();
    delete doc.selections["stage"];
    doc.params["stage"] = { turns: 9999 };
    expect(checkDraft(bench, doc)).toMatchObject([
      { slot: "stage", param: null, reason: "missing_selection" }]);
  });

  it("rejects kinds outside the allowed list", () => {
    const doc = draft();
    doc.selections["stage"] = "magnetron";
    expect(checkDraft(bench, doc)).toMatchObject([
      { slot: "stage", param: null, reason: "invalid_kind" }]);
  });

  it("checks params against the newly chosen kind", () => {
    const doc = draft();
    doc.selections["stage"] = "plate";
    doc.params["stage"] = { gap: 1e-2 };
    expect(checkDraft(bench, doc)).toEqual([]);
    doc.params["stage"] = { turns: 50 };
    expect(checkDraft(bench, doc)).toMatchObject([
      { slot: "stage", param: "turns", reason: "unknown_param" },
      { slot: "stage", param: "gap", reason: "missing_param" }]);
  });

  it("rejects slots the template does not declare", () => {
    const doc = draft();
    doc.selections["extra"] = "coil";
    doc.params["bogus"] = {};
    const violations = checkDraft(bench, doc);
    expect(violations).toMatchObject([
      { slot: "extra", param: null, reason: "unknown_slot" },
      { slot: "bogus", param: null, reason: "unknown_slot" }]);
  });

  it("checks simulation directives under the sim pseudo-slot", () => {
    const doc = draft();
    doc.sim = { t_end: 11 };
    expect(checkDraft(bench, doc)).toMatchObject([
      { slot: "sim", param: "t_end", reason: "out_of_range" }]);
    doc.sim = {};
    expect(checkDraft(bench, doc)).toMatchObject([
      { slot: "sim", param: "t_end", reason: "missing_param" }]);
  });

  it("refuses a draft aimed at a different template", () => {
    const doc = draft();
    doc.template = "other";
    expect(() => checkDraft(bench, doc)).toThrow(/targets 'other'/);
  });
});
