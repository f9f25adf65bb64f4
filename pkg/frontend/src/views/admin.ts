// Admin desk: accounts, group membership and certification reports.

import type { App } from "../app";
import type { GroupDoc, Role, UserDoc } from "../api";
import { escapeHtml, fmtNumber, mustElement } from "../dom";

export async function showAdminDesk(app: App): Promise<void> {
  if (!app.requireRole("Administrator")) return;
  const view = app.viewRegion;
  view.innerHTML = `
    <div class="desk admin-desk">
      <section class="admin-section">
        <h2>Users</h2>
        <div class="user-table"></div>
        <form class="user-form">
          <input name="login" placeholder="login" required>
          <input name="display_name" placeholder="display name">
          <input name="password" type="password" placeholder="password"
                 required>
          <select name="role">
            <option>Student</option>
            <option>Teacher</option>
            <option>Administrator</option>
          </select>
          <button type="submit">Create user</button>
        </form>
      </section>
      <section class="admin-section">
        <h2>Groups</h2>
        <div class="group-table"></div>
        <form class="group-form">
          <input name="name" placeholder="group name" required>
          <button type="submit">Create group</button>
        </form>
        <form class="member-form">
          <select name="group"></select>
          <select name="user"></select>
          <button type="submit">Add to group</button>
        </form>
      </section>
      <section class="admin-section">
        <h2>Certification report</h2>
        <label>group <select class="report-group"></select></label>
        <div class="report-table"></div>
      </section>
    </div>`;

  let users: UserDoc[] = (await app.client.listUsers()).users;
  let groups: GroupDoc[] = (await app.client.listGroups()).groups;

  const renderUsers = (): void => {
    const box = mustElement<HTMLElement>(view, ".user-table");
    box.innerHTML = `
      <table class="data-table">
        <thead><tr><th>login</th><th>name</th><th>role</th><th>active</th>
          <th></th></tr></thead>
        <tbody>` + users.map((user) => `
          <tr data-user="${escapeHtml(user.user_id)}">
            <td>${escapeHtml(user.login)}</td>
            <td>${escapeHtml(user.display_name)}</td>
            <td>${escapeHtml(user.role)}</td>
            <td>${user.active ? "yes" : "no"}</td>
            <td>${user.active ? `<button type="button" class="deactivate-btn"
                 data-user="${escapeHtml(user.user_id)}">deactivate</button>`
                 : ""}</td>
          </tr>`).join("") + `
        </tbody>
      </table>`;
    box.querySelectorAll<HTMLElement>(".deactivate-btn").forEach((button) => {
      button.addEventListener("click", () => {
        void (async () => {
          const updated =
            await app.client.deactivateUser(button.dataset["user"] ?? "");
          users = users.map((u) => u.user_id === updated.user_id ? updated : u);
          renderUsers();
        })().catch((error) => app.handleError(error));
      });
    });
  };

  const renderGroups = (): void => {
    const box = mustElement<HTMLElement>(view, ".group-table");
    if (groups.length === 0) {
      box.innerHTML = `<p class="panel-hint">No groups yet.</p>`;
    } else {
      const byId = new Map(users.map((u) => [u.user_id, u.login]));
      box.innerHTML = `
        <table class="data-table">
          <thead><tr><th>name</th><th>teachers</th><th>students</th></tr>
          </thead>
          <tbody>` + groups.map((group) => `
            <tr>
              <td>${escapeHtml(group.name)}</td>
              <td>${escapeHtml(group.teacher_ids
                     .map((id) => byId.get(id) ?? id).join(", "))}</td>
              <td>${escapeHtml(group.student_ids
                     .map((id) => byId.get(id) ?? id).join(", "))}</td>
            </tr>`).join("") + `
          </tbody>
        </table>`;
    }
    const groupOptions = groups.map((g) =>
      `<option value="${escapeHtml(g.group_id)}">${escapeHtml(g.name)}` +
      `</option>`).join("");
    mustElement<HTMLSelectElement>(view, ".member-form select[name=group]")
      .innerHTML = groupOptions;
    mustElement<HTMLSelectElement>(view, ".report-group")
      .innerHTML = groupOptions;
    mustElement<HTMLSelectElement>(view, ".member-form select[name=user]")
      .innerHTML = users
        .filter((u) => u.active && u.role !== "Administrator")
        .map((u) => `<option value="${escapeHtml(u.user_id)}">` +
                    `${escapeHtml(u.login)} (${escapeHtml(u.role)})</option>`)
        .join("");
  };

  const renderReport = async (): Promise<void> => {
    const groupId = mustElement<HTMLSelectElement>(view, ".report-group").value;
    const box = mustElement<HTMLElement>(view, ".report-table");
    if (!groupId) {
      box.innerHTML = "";
      return;
    }
    const { rows } = await app.client.progress(groupId);
    if (rows.length === 0) {
      box.innerHTML = `<p class="panel-hint">Nothing to report.</p>`;
      return;
    }
    box.innerHTML = `
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
  };

  renderUsers();
  renderGroups();
  await renderReport();

  mustElement<HTMLFormElement>(view, ".user-form")
    .addEventListener("submit", (event) => {
      event.preventDefault();
      const form = event.target as HTMLFormElement;
      void (async () => {
        const field = (name: string) =>
          mustElement<HTMLInputElement>(form, `[name=${name}]`);
        const created = await app.client.createUser({
          login: field("login").value,
          password: field("password").value,
          display_name: field("display_name").value || field("login").value,
          role: mustElement<HTMLSelectElement>(form, "[name=role]")
            .value as Role,
        });
        users = [...users, created];
        renderUsers();
        renderGroups();
        form.reset();
        app.notice(`User ${created.login} created.`);
      })().catch((error) => app.handleError(error));
    });

  mustElement<HTMLFormElement>(view, ".group-form")
    .addEventListener("submit", (event) => {
      event.preventDefault();
      const form = event.target as HTMLFormElement;
      void (async () => {
        const name = mustElement<HTMLInputElement>(form, "[name=name]").value;
        const created = await app.client.createGroup(name);
        groups = [...groups, created];
        renderGroups();
        form.reset();
        app.notice(`Group ${created.name} created.`);
      })().catch((error) => app.handleError(error));
    });

  mustElement<HTMLFormElement>(view, ".member-form")
    .addEventListener("submit", (event) => {
      event.preventDefault();
      const form = event.target as HTMLFormElement;
      void (async () => {
        const groupId =
          mustElement<HTMLSelectElement>(form, "[name=group]").value;
        const userId =
          mustElement<HTMLSelectElement>(form, "[name=user]").value;
        const member = users.find((u) => u.user_id === userId);
        if (!member) return;
        const updated = member.role === "Teacher"
          ? await app.client.addTeacher(groupId, userId)
          : await app.client.addStudent(groupId, userId);
        groups = groups.map((g) => g.group_id === updated.group_id
          ? updated : g);
        renderGroups();
        app.notice(`${member.login} added to ${updated.name}.`);
      })().catch((error) => app.handleError(error));
    });

  mustElement<HTMLSelectElement>(view, ".report-group")
    .addEventListener("change", () => {
      void renderReport().catch((error) => app.handleError(error));
    });
}
