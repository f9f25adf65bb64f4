// Deterministic draft fuzzer.  Drafts are JSON documents in the shape
// POST /api/v1/runs accepts, some in-bounds and some deliberately broken,
// so the client validator can be compared against the service verdicts.

import type { ConfigDoc, ParamSpecDoc, TemplateDoc } from "./api";
import { defaultDraft } from "./validate";

/** Small seeded PRNG; good enough for test-corpus generation. */
export function mulberry32(seed: number): () => number {
  let state = seed >>> 0;
  return () => {
    state = (state + 0x6d2b79f5) >>> 0;
    let t = state;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

function pick<T>(items: readonly T[], rand: () => number): T {
  const item = items[Math.floor(rand() * items.length)];
  if (item === undefined) throw new Error("pick from empty list");
  return item;
}

// Letter prefix keeps keys non-numeric so object iteration order stays
// insertion order on both sides of the comparison.
function token(prefix: string, rand: () => number): string {
  const alphabet = "abcdefghijklmnopqrstuvwxyz";
  let word = prefix;
  for (let i = 0; i < 6; i += 1) word += pick([...alphabet], rand);
  return word;
}

function inBounds(spec: ParamSpecDoc, rand: () => number): number {
  if (spec.scale === "log") {
    return spec.min * Math.pow(spec.max / spec.min, rand());
  }
  return spec.min + (spec.max - spec.min) * rand();
}

function outside(spec: ParamSpecDoc, rand: () => number): number {
  const span = spec.max - spec.min;
  if (rand() < 0.5) return spec.max + span * (0.1 + rand()) + 1;
  return spec.min - span * (0.1 + rand()) - 1;
}

/** In-bounds draft with random kinds and random values; always valid. */
export function randomDraft(template: TemplateDoc,
                            rand: () => number): ConfigDoc {
  const draft = defaultDraft(template);
  for (const slot of template.slots) {
    const option = pick(slot.kinds, rand);
    draft.selections[slot.slot] = option.kind;
    const values: Record<string, number> = {};
    for (const spec of option.params) values[spec.name] = inBounds(spec, rand);
    draft.params[slot.slot] = values;
  }
  for (const spec of template.sim) draft.sim[spec.name] = inBounds(spec, rand);
  return draft;
}

type Mutation = (template: TemplateDoc, draft: ConfigDoc,
                 rand: () => number) => boolean;

const mutations: Record<string, Mutation> = {
  drop_selection(template, draft, rand) {
    const slot = pick(template.slots, rand);
    delete draft.selections[slot.slot];
    return true;
  },
  bogus_kind(template, draft, rand) {
    const slot = pick(template.slots, rand);
    draft.selections[slot.slot] = token("bogus_", rand);
    return true;
  },
  ghost_selection_slot(template, draft, rand) {
    draft.selections[token("ghost_", rand)] = "drift";
    return true;
  },
  ghost_param_slot(template, draft, rand) {
    draft.params[token("ghost_", rand)] = { value: inBounds(
      { name: "", unit: "", min: 0, max: 1, default: 0.5, scale: "linear" },
      rand) };
    return true;
  },
  drop_param(template, draft, rand) {
    const slot = pick(template.slots, rand);
    const values = draft.params[slot.slot];
    if (!values) return false;
    const names = Object.keys(values);
    if (names.length === 0) return false;
    delete values[pick(names, rand)];
    return true;
  },
  unknown_param(template, draft, rand) {
    const slot = pick(template.slots, rand);
    const values = draft.params[slot.slot];
    if (!values) return false;
    values[token("fake_", rand)] = 1.0;
    return true;
  },
  out_of_range(template, draft, rand) {
    const slot = pick(template.slots, rand);
    const chosen = draft.selections[slot.slot];
    const option = slot.kinds.find((k) => k.kind === chosen);
    const values = draft.params[slot.slot];
    if (!option || !values || option.params.length === 0) return false;
    const spec = pick(option.params, rand);
    values[spec.name] = outside(spec, rand);
    return true;
  },
  malformed_value(template, draft, rand) {
    const slot = pick(template.slots, rand);
    const values = draft.params[slot.slot];
    if (!values) return false;
    const names = Object.keys(values);
    if (names.length === 0) return false;
    const junk = pick(["soon", null, true, [1, 2]] as const, rand);
    values[pick(names, rand)] = junk as unknown as number;
    return true;
  },
  sim_drop(template, draft, rand) {
    const names = Object.keys(draft.sim);
    if (names.length === 0) return false;
    delete draft.sim[pick(names, rand)];
    return true;
  },
  sim_unknown(template, draft, rand) {
    draft.sim[token("fake_", rand)] = 0.1;
    return true;
  },
  sim_out_of_range(template, draft, rand) {
    if (template.sim.length === 0) return false;
    const spec = pick(template.sim, rand);
    draft.sim[spec.name] = outside(spec, rand);
    return true;
  },
};

export interface FuzzCase {
  draft: ConfigDoc;
  applied: string[];
}

/**
 * One fuzzed draft.  Roughly a third stay valid; the rest get one to three
 * mutations, each naming the defect class it plants.
 */
export function fuzzCase(templates: TemplateDoc[],
                         rand: () => number): FuzzCase {
  const template = pick(templates, rand);
  const draft = randomDraft(template, rand);
  const applied: string[] = [];
  if (rand() < 0.35) return { draft, applied };
  const names = Object.keys(mutations);
  const count = 1 + Math.floor(rand() * 3);
  for (let i = 0; i < count; i += 1) {
    const name = pick(names, rand);
    const mutate = mutations[name];
    if (mutate && mutate(template, draft, rand)) applied.push(name);
  }
  return { draft, applied };
}
