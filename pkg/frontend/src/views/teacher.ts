// Teacher desk: group progress, submission review with a read-only config
// replay (re-run allowed), verdicts, and assignment creation.

import type { App } from "../app";
import type { AssignmentDoc, ProgressRowDoc, SubmissionDoc } from "../api";
import { escapeHtml, fmtNumber, fmtTime, mustElement } from "../dom";
import { Workspace } from "../workspace";

type Tab = "progress" | "submissions" | "new-assignment";

export async function showTeacherDesk(app: App): Promise<void> {
  if (!app.requireRole("Teacher")) return;
  const view = app.viewRegion;
  view.innerHTML = `
    <div class="desk teacher-desk">
      <div class="desk-toolbar">
        <label>group
          <select class="group-select"></select>
        </label>
        <nav class="tabs">
          <button type="button" data-tab="progress">Progress</button>
          <button type="button" data-tab="submissions">Submissions</button>
          <button type="button" data-tab="new-assignment">New assignment</button>
        </nav>
      </div>
      <section class="desk-main"></section>
    </div>`;

  const { groups } = await app.client.listGroups();
  const groupSelect = mustElement<HTMLSelectElement>(view, ".group-select");
  groupSelect.innerHTML = groups.map((g) =>
    `<option value="${escapeHtml(g.group_id)}">${escapeHtml(g.name)}</option>`)
    .join("");
  const main = mustElement<HTMLElement>(view, ".desk-main");
  let tab: Tab = "progress";
  let workspace: Workspace | null = null;

  const names = new Map<string, string>();
  const currentGroup = (): string => groupSelect.value;

  async function loadProgress(): Promise<ProgressRowDoc[]> {
    const { rows } = await app.client.progress(currentGroup());
    for (const row of rows) names.set(row.student_id, row.display_name);
    return rows;
  }

  async function renderTab(): Promise<void> {
    workspace?.dispose();
    workspace = null;
    for (const button of view.querySelectorAll<HTMLElement>("[data-tab]")) {
      button.classList.toggle("tab-active", button.dataset["tab"] === tab);
    }
    if (groups.length === 0) {
      main.innerHTML = `<p class="panel-hint">No groups assigned to you.</p>`;
      return;
    }
    if (tab === "progress") await renderProgress();
    else if (tab === "submissions") await renderSubmissions();
    else renderNewAssignment();
  }

  async function renderProgress(): Promise<void> {
    const rows = await loadProgress();
    if (rows.length === 0) {
      main.innerHTML = `<p class="panel-hint">No assignments in this group ` +
                       `yet.</p>`;
      return;
    }
    main.innerHTML = `
      <table class="data-table">
        <thead><tr><th>student</th><th>lab</th><th>status</th>
          <th>auto score</th><th>certified</th></tr></thead>
        <tbody>` + rows.map((row) => `
          <tr>
            <td>${escapeHtml(row.display_name)}</td>
            <td>${escapeHtml(row.template_id)}</td>
            <td>${escapeHtml(row.status ?? "not started")}</td>
            <td>${row.auto_score === null ? "" : fmtNumber(row.auto_score)}</td>
            <td>${row.certified ? "yes" : ""}</td>
          </tr>`).join("") + `
        </tbody>
      </table>`;
  }

  async function renderSubmissions(): Promise<void> {
    await loadProgress();
    const { assignments } = await app.client.listAssignments(currentGroup());
    if (assignments.length === 0) {
      main.innerHTML = `<p class="panel-hint">No assignments in this group ` +
                       `yet.</p>`;
      return;
    }
    main.innerHTML = `
      <label>assignment
        <select class="assignment-select">` + assignments.map((a) =>
          `<option value="${escapeHtml(a.assignment_id)}">` +
          `${escapeHtml(a.template_id)} (due ${fmtTime(a.due)})</option>`)
          .join("") + `</select>
      </label>
      <div class="submission-table"></div>
      <div class="review-pane"></div>`;
    const select = mustElement<HTMLSelectElement>(main, ".assignment-select");
    select.addEventListener("change", () => {
      void listForAssignment().catch((error) => app.handleError(error));
    });
    await listForAssignment();

    async function listForAssignment(): Promise<void> {
      workspace?.dispose();
      workspace = null;
      mustElement<HTMLElement>(main, ".review-pane").innerHTML = "";
      const assignment = assignments.find(
        (a) => a.assignment_id === select.value);
      if (!assignment) return;
      const { submissions } =
        await app.client.listSubmissions(assignment.assignment_id);
      const box = mustElement<HTMLElement>(main, ".submission-table");
      if (submissions.length === 0) {
        box.innerHTML = `<p class="panel-hint">Nothing handed in yet.</p>`;
        return;
      }
      box.innerHTML = `
        <table class="data-table">
          <thead><tr><th>student</th><th>status</th><th>auto score</th>
            <th>updated</th><th></th></tr></thead>
          <tbody>` + submissions.map((sub) => `
            <tr>
              <td>${escapeHtml(names.get(sub.student_id) ?? sub.student_id)}</td>
              <td>${escapeHtml(sub.status)}</td>
              <td>${sub.auto_score === null ? "" : fmtNumber(sub.auto_score)}</td>
              <td>${fmtTime(sub.updated)}</td>
              <td><button type="button" class="open-review"
                   data-submission="${escapeHtml(sub.submission_id)}">
                   review</button></td>
            </tr>`).join("") + `
          </tbody>
        </table>`;
      box.querySelectorAll<HTMLElement>(".open-review").forEach((button) => {
        button.addEventListener("click", () => {
          const sid = button.dataset["submission"];
          if (sid) {
            void openReview(assignment, sid)
              .catch((error) => app.handleError(error));
          }
        });
      });
    }
  }

  async function openReview(assignment: AssignmentDoc,
                            submissionId: string): Promise<void> {
    const submission = await app.client.getSubmission(submissionId);
    const template = await app.client.getTemplate(assignment.template_id);
    const pane = mustElement<HTMLElement>(main, ".review-pane");

    const quizReview = assignment.quiz.length === 0 ? "" : `
      <h4>Quiz answers</h4>
      <ol class="quiz-list">` + assignment.quiz.map((q, qi) => {
        const answer = submission.quiz_answers?.[qi];
        const picked = answer === undefined || answer === null
          ? "<em>no answer</em>" : escapeHtml(q.choices[answer] ?? "?");
        const good = answer !== undefined && answer !== null
          && answer === q.correct_index;
        return `<li><p>${escapeHtml(q.text)}</p>
          <span class="${good ? "quiz-good" : "quiz-bad"}">${picked}</span>
        </li>`;
      }).join("") + `</ol>`;

    const report = submission.auto_report;
    const reportBlock = report === null ? "" : `
      <h4>Auto-check report</h4>
      <ul class="check-list">` + report.checks.map((check) => `
        <li class="${check.passed ? "check-pass" : "check-fail"}">
          ${check.passed ? "pass" : "fail"}: ${escapeHtml(check.detail ?? "")}
        </li>`).join("") + `
        <li>quiz: ${report.quiz.correct} of ${report.quiz.total} correct</li>
      </ul>`;

    pane.innerHTML = `
      <h3>Submission by
        ${escapeHtml(names.get(submission.student_id) ?? submission.student_id)}
      </h3>
      <div class="review-meta">
        ${escapeHtml(submission.status)}
        ${submission.auto_score === null ? ""
          : `&middot; auto score ${fmtNumber(submission.auto_score)}%`}
        &middot; updated ${fmtTime(submission.updated)}
      </div>
      <div class="review-bench"></div>
      ${quizReview}
      ${reportBlock}
      <div class="review-actions">
        <input class="review-comment" placeholder="comment">
        <button type="button" class="verdict-btn" data-verdict="TutorChecked">
          Mark checked</button>
        <button type="button" class="verdict-btn" data-verdict="Certified">
          Certify</button>
      </div>`;

    workspace?.dispose();
    workspace = new Workspace(app.client, template, submission.config,
                              { readOnly: true });
    workspace.mount(mustElement<HTMLElement>(pane, ".review-bench"));

    const reviewable = ["Submitted", "AutoChecked", "TutorChecked"];
    const rank = (status: string): number => reviewable.indexOf(status);
    pane.querySelectorAll<HTMLButtonElement>(".verdict-btn")
      .forEach((button) => {
        const verdict = button.dataset["verdict"] as
          "TutorChecked" | "Certified";
        const current = submission.status;
        button.disabled = !reviewable.includes(current)
          || (verdict === "TutorChecked" && rank(current) >= 2);
        button.addEventListener("click", () => {
          void (async () => {
            const comment =
              mustElement<HTMLInputElement>(pane, ".review-comment").value;
            await app.client.reviewSubmission(submission.submission_id,
                                              verdict, comment || undefined);
            app.notice(verdict === "Certified"
              ? "Submission certified." : "Submission marked checked.");
            await renderTab();
          })().catch((error) => app.handleError(error));
        });
      });
  }

  function renderNewAssignment(): void {
    void app.client.listTemplates().then(({ templates }) => {
      main.innerHTML = `
        <form class="assignment-form">
          <label>lab template
            <select name="template">` + templates.map((t) =>
              `<option value="${escapeHtml(t.template)}">` +
              `${escapeHtml(t.title)}</option>`).join("") + `</select>
          </label>
          <label>due in days
            <input name="days" type="number" min="1" step="1" value="14">
          </label>
          <label>instructions
            <textarea name="instructions" rows="4"></textarea>
          </label>
          <button type="submit">Create assignment</button>
        </form>`;
      const form = mustElement<HTMLFormElement>(main, ".assignment-form");
      form.addEventListener("submit", (event) => {
        event.preventDefault();
        void (async () => {
          const template = mustElement<HTMLSelectElement>(
            form, "select[name=template]").value;
          const days = Number(mustElement<HTMLInputElement>(
            form, "input[name=days]").value) || 14;
          const instructions = mustElement<HTMLTextAreaElement>(
            form, "textarea[name=instructions]").value;
          await app.client.createAssignment({
            group: currentGroup(),
            template,
            due: Math.floor(Date.now() / 1000) + days * 86400,
            ...(instructions ? { instructions } : {}),
          });
          app.notice("Assignment created.");
          tab = "progress";
          await renderTab();
        })().catch((error) => app.handleError(error));
      });
    }).catch((error) => app.handleError(error));
  }

  view.querySelectorAll<HTMLElement>("[data-tab]").forEach((button) => {
    button.addEventListener("click", () => {
      tab = (button.dataset["tab"] ?? "progress") as Tab;
      void renderTab().catch((error) => app.handleError(error));
    });
  });
  groupSelect.addEventListener("change", () => {
    void renderTab().catch((error) => app.handleError(error));
  });

  await renderTab();
}
