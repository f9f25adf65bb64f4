// Lab workspace: scheme canvas, parameter panel, run controls and result
// charts for one config draft.  The run button stays disabled while the
// local validator objects, so anything submitted from here is also valid
// for the service.

import { ApiClient, ApiFailure } from "./api";
import type { ConfigDoc, ResultDoc, RunDoc, TemplateDoc,
              ViolationDoc } from "./api";
import { renderResultCharts } from "./chart";
import { escapeHtml } from "./dom";
import { renderParamPanel, updatePanelErrors } from "./params";
import { renderScheme } from "./scheme";
import { checkDraft, defaultDraft, kindParams } from "./validate";
import type { DraftViolation } from "./validate";

export const POLL_INTERVAL_MS = 500;

const SKELETON = `
  <div class="ws-scheme"></div>
  <div class="ws-body">
    <div class="ws-panel"></div>
    <div class="ws-side">
      <div class="ws-runbox">
        <button class="run-btn" type="button">Run</button>
        <span class="run-status" role="status"></span>
        <button class="csv-btn" type="button" hidden>CSV</button>
      </div>
      <div class="ws-violations" role="alert"></div>
      <div class="ws-charts"></div>
    </div>
  </div>`;

export interface WorkspaceOptions {
  readOnly?: boolean;
  onRunRecorded?: (run: RunDoc) => void;
}

export class Workspace {
  readonly template: TemplateDoc;
  draft: ConfigDoc;
  lastRun: RunDoc | null = null;

  private readonly client: ApiClient;
  private readonly readOnly: boolean;
  private readonly onRunRecorded: ((run: RunDoc) => void) | undefined;
  private root: HTMLElement | null = null;
  private selected: string | null = null;
  private ghost: ResultDoc | null = null;
  private lastResult: ResultDoc | null = null;
  private serverViolations: DraftViolation[] = [];
  private bannerLines: string[] = [];
  // Bumped whenever a new poll chain starts or the workspace unmounts;
  // stale chains see the mismatch and stop, so at most one is live.
  private pollGeneration = 0;

  constructor(client: ApiClient, template: TemplateDoc,
              draft?: ConfigDoc, opts: WorkspaceOptions = {}) {
    this.client = client;
    this.template = template;
    this.draft = draft ?? defaultDraft(template);
    this.readOnly = opts.readOnly ?? false;
    this.onRunRecorded = opts.onRunRecorded;
    const first = template.slots[0];
    this.selected = first ? first.slot : null;
  }

  mount(root: HTMLElement): void {
    this.root = root;
    root.innerHTML = SKELETON;
    this.part(".run-btn").addEventListener("click", () => void this.run());
    this.part(".csv-btn").addEventListener("click",
                                           () => void this.downloadCsv());
    this.renderAll();
  }

  dispose(): void {
    this.pollGeneration += 1;
    this.root = null;
  }

  private part<T extends HTMLElement = HTMLElement>(selector: string): T {
    if (!this.root) throw new Error("workspace not mounted");
    const node = this.root.querySelector<T>(selector);
    if (!node) throw new Error(`workspace lost its ${selector}`);
    return node;
  }

  private renderAll(): void {
    renderScheme(this.part(".ws-scheme"), this.template, this.draft, {
      selected: this.selected,
      readOnly: this.readOnly,
      onPick: (slotId) => this.handlePick(slotId),
    });
    renderParamPanel(this.part(".ws-panel"), this.template, this.draft,
                     this.selected, {
      readOnly: this.readOnly,
      onKind: (slotId, kind) => this.handleKind(slotId, kind),
      onValue: (slotId, name, value) => this.handleValue(slotId, name, value),
    });
    this.refreshValidation();
  }

  // -- draft editing ------------------------------------------------------

  private handlePick(slotId: string): void {
    const slot = this.template.slots.find((s) => s.slot === slotId);
    if (!slot) return;
    if (this.selected === slotId && slot.kinds.length > 1) {
      // Second click on the selected slot steps to the next allowed kind.
      const kinds = slot.kinds.map((k) => k.kind);
      const at = kinds.indexOf(this.draft.selections[slotId] ?? "");
      const next = kinds[(at + 1) % kinds.length];
      if (next !== undefined) this.handleKind(slotId, next);
      return;
    }
    this.selected = slotId;
    this.renderAll();
  }

  private handleKind(slotId: string, kind: string): void {
    this.draft.selections[slotId] = kind;
    const fresh: Record<string, number> = {};
    for (const spec of kindParams(this.template, slotId, kind)) {
      fresh[spec.name] = spec.default;
    }
    this.draft.params[slotId] = fresh;
    this.serverViolations = [];
    this.renderAll();
  }

  private handleValue(slotId: string, name: string,
                      value: number | null): void {
    const values = slotId === "sim"
      ? this.draft.sim
      : (this.draft.params[slotId] ??= {});
    if (value === null) {
      delete values[name];
    } else {
      values[name] = value;
    }
    this.serverViolations = [];
    this.refreshValidation();
  }

  private refreshValidation(): DraftViolation[] {
    const local = checkDraft(this.template, this.draft);
    const merged = [...local, ...this.serverViolations];
    updatePanelErrors(this.part(".ws-panel"), merged);
    this.part<HTMLButtonElement>(".run-btn").disabled = local.length > 0;
    this.renderBanner(merged.map((v) => v.detail));
    return local;
  }

  private renderBanner(lines: string[]): void {
    const box = this.part(".ws-violations");
    const all = [...lines, ...this.bannerLines];
    box.innerHTML = all.length === 0 ? "" :
      `<ul class="violation-list">` +
      all.map((line) => `<li>${escapeHtml(line)}</li>`).join("") + `</ul>`;
  }

  // -- running ------------------------------------------------------------

  async run(): Promise<void> {
    this.bannerLines = [];
    if (this.refreshValidation().length > 0) return;

    const button = this.part<HTMLButtonElement>(".run-btn");
    button.disabled = true;
    this.setStatus("submitting");
    const generation = ++this.pollGeneration;
    let run: RunDoc;
    try {
      run = await this.client.requestRun(this.draft);
    } catch (error) {
      button.disabled = false;
      if (error instanceof ApiFailure && error.status === 422) {
        this.applyServerViolations(error.violations);
        this.setStatus("rejected");
      } else {
        this.setStatus(error instanceof Error ? error.message : "failed");
      }
      return;
    }
    this.setStatus(run.status.toLowerCase());
    this.pollLoop(run.run_id, generation);
  }

  private applyServerViolations(violations: ViolationDoc[]): void {
    this.serverViolations = violations
      .filter((v) => typeof v.slot === "string")
      .map((v) => ({ slot: v.slot as string, param: v.param ?? null,
                     reason: v.reason as DraftViolation["reason"],
                     detail: v.detail }));
    this.bannerLines = violations
      .filter((v) => typeof v.slot !== "string")
      .map((v) => `${v.field ?? "config"}: ${v.detail}`);
    this.refreshValidation();
  }

  private pollLoop(runId: string, generation: number): void {
    const tick = async (): Promise<void> => {
      if (generation !== this.pollGeneration || !this.root) return;
      let run: RunDoc;
      try {
        run = await this.client.getRun(runId);
      } catch (error) {
        this.setStatus(error instanceof Error ? error.message : "poll failed");
        this.part<HTMLButtonElement>(".run-btn").disabled = false;
        return;
      }
      if (generation !== this.pollGeneration || !this.root) return;
      if (run.status === "Done" || run.status === "Failed") {
        this.finishRun(run);
        return;
      }
      this.setStatus(run.status.toLowerCase());
      setTimeout(() => void tick(), POLL_INTERVAL_MS);
    };
    void tick();
  }

  private finishRun(run: RunDoc): void {
    this.lastRun = run;
    this.part<HTMLButtonElement>(".run-btn").disabled =
      checkDraft(this.template, this.draft).length > 0;
    if (run.status === "Failed") {
      this.setStatus(`failed: ${run.error ?? "solver error"}`);
      this.onRunRecorded?.(run);
      return;
    }
    const seconds = run.finished === null ? null
      : (run.finished - run.created).toFixed(1);
    this.setStatus(seconds === null ? "done" : `done in ${seconds}s`);
    if (run.result) {
      this.ghost = this.lastResult;
      this.lastResult = run.result;
      renderResultCharts(this.part(".ws-charts"), this.template.outputs,
                         run.result, this.ghost);
    }
    this.part<HTMLButtonElement>(".csv-btn").hidden = false;
    this.onRunRecorded?.(run);
  }

  private setStatus(text: string): void {
    this.part(".run-status").textContent = text;
  }

  private async downloadCsv(): Promise<void> {
    if (!this.lastRun) return;
    try {
      const csv = await this.client.fetchCsv(this.lastRun.run_id);
      const blob = new Blob([csv], { type: "text/csv" });
      const anchor = document.createElement("a");
      anchor.href = URL.createObjectURL(blob);
      anchor.download = `${this.lastRun.run_id}.csv`;
      anchor.click();
      URL.revokeObjectURL(anchor.href);
    } catch (error) {
      this.setStatus(error instanceof Error ? error.message : "CSV failed");
    }
  }
}
