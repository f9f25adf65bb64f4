// Client-side copy of the service config validation.  Semantics must match
// the server exactly: same reason codes, same inclusive bounds, same order
// of discovery, simulation directives checked under the pseudo-slot "sim".
// Any draft this module accepts must also be accepted by POST /api/v1/runs.

import type { ConfigDoc, ParamSpecDoc, TemplateDoc } from "./api";

export interface DraftViolation {
  slot: string;
  param: string | null;
  reason: "unknown_slot" | "missing_selection" | "invalid_kind"
        | "unknown_param" | "missing_param" | "not_a_number" | "out_of_range";
  detail: string;
}

function checkValues(slotId: string, specs: ParamSpecDoc[],
                     given: Record<string, unknown>,
                     violations: DraftViolation[]): void {
  const byName = new Set(specs.map((p) => p.name));
  for (const name of Object.keys(given)) {
    if (!byName.has(name)) {
      violations.push({ slot: slotId, param: name, reason: "unknown_param",
                        detail: `${slotId}: no such parameter '${name}'` });
    }
  }
  for (const spec of specs) {
    if (!(spec.name in given)) {
      violations.push({ slot: slotId, param: spec.name,
                        reason: "missing_param",
                        detail: `${slotId}: ${spec.name} has no value` });
      continue;
    }
    const value = given[spec.name];
    if (typeof value !== "number" || !Number.isFinite(value)) {
      violations.push({
        slot: slotId, param: spec.name, reason: "not_a_number",
        detail: `${slotId}: ${spec.name} must be a finite number` });
    } else if (!(spec.min <= value && value <= spec.max)) {
      violations.push({
        slot: slotId, param: spec.name, reason: "out_of_range",
        detail: `${slotId}: ${spec.name}=${value} outside `
              + `[${spec.min}, ${spec.max}] ${spec.unit}` });
    }
  }
}

/** Empty list iff the draft satisfies every template constraint. */
export function checkDraft(template: TemplateDoc,
                           draft: ConfigDoc): DraftViolation[] {
  if (draft.template !== template.template) {
    throw new Error(
      `draft targets '${draft.template}', not '${template.template}'`);
  }
  const violations: DraftViolation[] = [];
  const slotIds = new Set(template.slots.map((s) => s.slot));

  for (const sid of Object.keys(draft.selections)) {
    if (!slotIds.has(sid)) {
      violations.push({ slot: sid, param: null, reason: "unknown_slot",
                        detail: `template has no slot '${sid}'` });
    }
  }
  for (const sid of Object.keys(draft.params)) {
    if (!slotIds.has(sid)) {
      violations.push({ slot: sid, param: null, reason: "unknown_slot",
                        detail: `template has no slot '${sid}'` });
    }
  }

  for (const slot of template.slots) {
    const chosen = draft.selections[slot.slot];
    if (chosen === undefined) {
      violations.push({ slot: slot.slot, param: null,
                        reason: "missing_selection",
                        detail: `slot ${slot.slot} has no selection` });
      continue;
    }
    const option = slot.kinds.find((k) => k.kind === chosen);
    if (option === undefined) {
      const allowed = slot.kinds.map((k) => `'${k.kind}'`).join(", ");
      violations.push({
        slot: slot.slot, param: null, reason: "invalid_kind",
        detail: `slot ${slot.slot}: kind '${chosen}' not among [${allowed}]` });
      continue;
    }
    checkValues(slot.slot, option.params, draft.params[slot.slot] ?? {},
                violations);
  }

  checkValues("sim", template.sim, draft.sim, violations);
  return violations;
}

/** The all-defaults draft for a template; valid by construction. */
export function defaultDraft(template: TemplateDoc): ConfigDoc {
  const selections: Record<string, string> = {};
  const params: Record<string, Record<string, number>> = {};
  for (const slot of template.slots) {
    selections[slot.slot] = slot.default;
    params[slot.slot] = defaultValues(kindParams(template, slot.slot,
                                                 slot.default));
  }
  const sim: Record<string, number> = defaultValues(template.sim);
  return { template: template.template, selections, params, sim };
}

/** Param specs of one kind in one slot; throws on unknown ids. */
export function kindParams(template: TemplateDoc, slotId: string,
                           kind: string): ParamSpecDoc[] {
  const slot = template.slots.find((s) => s.slot === slotId);
  if (!slot) throw new Error(`template has no slot '${slotId}'`);
  const option = slot.kinds.find((k) => k.kind === kind);
  if (!option) throw new Error(`slot ${slotId} has no kind '${kind}'`);
  return option.params;
}

function defaultValues(specs: ParamSpecDoc[]): Record<string, number> {
  const values: Record<string, number> = {};
  for (const spec of specs) values[spec.name] = spec.default;
  return values;
}
