// Student desk: the assignment list, one lab workspace at a time, and the
// save / submit flow with quiz answers and the auto-check score.

import type { App } from "../app";
import type { AssignmentDoc, GroupDoc, SubmissionDoc } from "../api";
import { escapeHtml, fmtTime, mustElement } from "../dom";
import { Workspace } from "../workspace";

interface AssignmentRow {
  group: GroupDoc;
  assignment: AssignmentDoc;
  submission: SubmissionDoc | null;
}

function statusChip(row: AssignmentRow): string {
  const sub = row.submission;
  if (!sub) return `<span class="chip">new</span>`;
  const score = sub.auto_score === null ? ""
    : ` &middot; ${Math.round(sub.auto_score)}%`;
  return `<span class="chip chip-${sub.status.toLowerCase()}">` +
         `${escapeHtml(sub.status)}${score}</span>`;
}

export async function showStudentDesk(app: App): Promise<void> {
  if (!app.requireRole("Student")) return;
  const view = app.viewRegion;
  view.innerHTML = `
    <div class="desk student-desk">
      <aside class="desk-nav">
        <h2>Assignments</h2>
        <ul class="assignment-list"><li class="panel-hint">loading</li></ul>
      </aside>
      <section class="desk-main">
        <p class="panel-hint">Pick an assignment to open its lab bench.</p>
      </section>
    </div>`;

  const rows: AssignmentRow[] = [];
  const { groups } = await app.client.listGroups();
  for (const group of groups) {
    const { assignments } = await app.client.listAssignments(group.group_id);
    for (const assignment of assignments) {
      const { submissions } =
        await app.client.listSubmissions(assignment.assignment_id);
      rows.push({ group, assignment, submission: submissions[0] ?? null });
    }
  }

  const list = mustElement<HTMLElement>(view, ".assignment-list");
  let workspace: Workspace | null = null;

  const renderList = (): void => {
    if (rows.length === 0) {
      list.innerHTML = `<li class="panel-hint">No assignments yet.</li>`;
      return;
    }
    list.innerHTML = rows.map((row, index) => `
      <li><button class="assignment-link" data-row="${index}">
        <span class="assignment-title">${escapeHtml(row.assignment.template_id)}</span>
        <span class="assignment-group">${escapeHtml(row.group.name)}</span>
        ${statusChip(row)}
      </button></li>`).join("");
  };
  renderList();

  list.addEventListener("click", (event) => {
    const button = (event.target as Element).closest("[data-row]");
    if (!button) return;
    const row = rows[Number(button.getAttribute("data-row"))];
    if (row) {
      void openAssignment(row).catch((error) => app.handleError(error));
    }
  });

  async function openAssignment(row: AssignmentRow): Promise<void> {
    workspace?.dispose();
    const template = await app.client.getTemplate(row.assignment.template_id);
    const main = mustElement<HTMLElement>(view, ".desk-main");

    const quiz = row.assignment.quiz;
    const quizBlock = quiz.length === 0 ? "" : `
      <h3>Quiz</h3>
      <ol class="quiz-list">` + quiz.map((q, qi) => `
        <li>
          <p>${escapeHtml(q.text)}</p>
          ${q.choices.map((choice, ci) => `
            <label class="quiz-choice">
              <input type="radio" name="quiz-${qi}" value="${ci}">
              ${escapeHtml(choice)}
            </label>`).join("")}
        </li>`).join("") + `</ol>
      <div class="quiz-error form-error" role="alert"></div>`;

    const references = row.assignment.references.map((ref) => {
      const body = escapeHtml(ref);
      return ref.startsWith("http")
        ? `<li><a href="${body}" target="_blank" rel="noreferrer">${body}</a></li>`
        : `<li>${body}</li>`;
    }).join("");

    main.innerHTML = `
      <div class="assignment-head">
        <h2>${escapeHtml(template.title)}</h2>
        <div class="assignment-meta">
          ${escapeHtml(row.group.name)} &middot;
          due ${fmtTime(row.assignment.due)}
        </div>
        <p class="assignment-instructions">
          ${escapeHtml(row.assignment.instructions)}</p>
        ${references ? `<ul class="assignment-refs">${references}</ul>` : ""}
      </div>
      <div class="lab-bench"></div>
      <div class="assignment-work">
        ${quizBlock}
        <div class="submit-row">
          <button class="save-btn" type="button" disabled>Save draft</button>
          <button class="submit-btn" type="button" disabled>
            Submit for review</button>
          <span class="submission-status"></span>
        </div>
      </div>`;

    const saveButton = mustElement<HTMLButtonElement>(main, ".save-btn");
    const submitButton = mustElement<HTMLButtonElement>(main, ".submit-btn");
    const statusLine = mustElement<HTMLElement>(main, ".submission-status");

    const refreshButtons = (): void => {
      const sub = row.submission;
      const editable = sub === null || sub.status === "Saved";
      saveButton.disabled = !(editable && workspace?.lastRun);
      submitButton.disabled = !(sub && sub.status === "Saved");
      if (sub) {
        const score = sub.auto_score === null ? ""
          : `, score ${Math.round(sub.auto_score)}%`;
        statusLine.textContent = `${sub.status}${score}`;
      } else {
        statusLine.textContent = "not saved yet";
      }
    };

    workspace = new Workspace(app.client, template,
                              row.submission?.config, {
      onRunRecorded: () => refreshButtons(),
    });
    workspace.mount(mustElement<HTMLElement>(main, ".lab-bench"));

    quiz.forEach((_, qi) => {
      const saved = row.submission?.quiz_answers?.[qi];
      if (saved === undefined || saved === null) return;
      const box = main.querySelector<HTMLInputElement>(
        `input[name="quiz-${qi}"][value="${saved}"]`);
      if (box) box.checked = true;
    });

    const collectQuiz = (): number[] | null | "partial" => {
      if (quiz.length === 0) return null;
      const answers: number[] = [];
      for (let qi = 0; qi < quiz.length; qi += 1) {
        const checked = main.querySelector<HTMLInputElement>(
          `input[name="quiz-${qi}"]:checked`);
        if (!checked) return answers.length > 0 ? "partial" : null;
        answers.push(Number(checked.value));
      }
      return answers;
    };

    saveButton.addEventListener("click", () => {
      void (async () => {
        const run = workspace?.lastRun;
        if (!workspace || !run) return;
        const quizError = main.querySelector<HTMLElement>(".quiz-error");
        if (quizError) quizError.textContent = "";
        const answers = collectQuiz();
        if (answers === "partial") {
          if (quizError) {
            quizError.textContent =
              "Answer every question, or leave the whole quiz blank.";
          }
          return;
        }
        row.submission = await app.client.saveSubmission({
          assignment: row.assignment.assignment_id,
          config: workspace.draft,
          run: run.run_id,
          ...(answers ? { quiz_answers: answers } : {}),
        });
        app.notice("Draft saved.");
        renderList();
        refreshButtons();
      })().catch((error) => app.handleError(error));
    });

    submitButton.addEventListener("click", () => {
      void (async () => {
        if (!row.submission) return;
        row.submission = await app.client.submitSubmission(
          row.submission.submission_id);
        renderList();
        refreshButtons();
        // The auto-check lands moments later; pick up the score.
        for (let attempt = 0; attempt < 10; attempt += 1) {
          if (row.submission.status !== "Submitted") break;
          await new Promise((resolve) => setTimeout(resolve, 500));
          row.submission = await app.client.getSubmission(
            row.submission.submission_id);
        }
        renderList();
        refreshButtons();
        app.notice("Submitted for review.");
      })().catch((error) => app.handleError(error));
    });

    refreshButtons();
  }
}
