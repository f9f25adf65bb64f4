// Application shell: session handling, role routing, the notice bar and
// the top-level error policy.  Each role gets exactly one desk; asking for
// a desk with the wrong role shows an access-denied notice instead.

import { ApiClient, ApiFailure } from "./api";
import type { FetchFn, Role, UserDoc } from "./api";
import { escapeHtml, mustElement } from "./dom";
import { showAdminDesk } from "./views/admin";
import { showLogin } from "./views/login";
import { showStudentDesk } from "./views/student";
import { showTeacherDesk } from "./views/teacher";

export interface BootOptions {
  root: HTMLElement;
  apiBase?: string;
  fetchFn?: FetchFn;
}

const TOKEN_KEY = "acclab.token";
const USER_KEY = "acclab.user";

const SHELL = `
  <header class="topbar">
    <span class="brand">acclab</span>
    <span class="topbar-user"></span>
    <button class="logout-btn" type="button" hidden>log out</button>
  </header>
  <div class="notice" hidden></div>
  <main class="view"></main>`;

export class App {
  readonly client: ApiClient;
  user: UserDoc | null = null;

  private readonly root: HTMLElement;

  constructor(options: BootOptions) {
    this.root = options.root;
    this.client = new ApiClient(options.apiBase ?? "", options.fetchFn);
  }

  get viewRegion(): HTMLElement {
    return mustElement<HTMLElement>(this.root, ".view");
  }

  start(): void {
    this.root.innerHTML = SHELL;
    mustElement<HTMLButtonElement>(this.root, ".logout-btn")
      .addEventListener("click", () => this.logout());
    mustElement<HTMLElement>(this.root, ".notice")
      .addEventListener("click", () => this.clearNotice());

    const restored = this.restoreSession();
    if (restored) {
      this.client.token = restored.token;
      this.sessionStarted(restored.user, false);
    } else {
      showLogin(this);
    }
  }

  /** Called by the login view (and session restore) once a user is known. */
  sessionStarted(user: UserDoc, persist = true): void {
    this.user = user;
    if (persist) this.persistSession();
    const chip = mustElement<HTMLElement>(this.root, ".topbar-user");
    chip.innerHTML = `${escapeHtml(user.display_name)} ` +
                     `<span class="role-chip">${escapeHtml(user.role)}</span>`;
    mustElement<HTMLButtonElement>(this.root, ".logout-btn").hidden = false;
    this.clearNotice();
    this.enterDesk(user.role);
  }

  enterDesk(role: Role): void {
    const desk = role === "Student" ? showStudentDesk
      : role === "Teacher" ? showTeacherDesk
      : showAdminDesk;
    void desk(this).catch((error) => this.handleError(error));
  }

  /** False (plus an access-denied view) when the signed-in role differs. */
  requireRole(role: Role): boolean {
    if (this.user?.role === role) return true;
    this.viewRegion.innerHTML =
      `<div class="error-banner">Access denied: this desk is for the ` +
      `${escapeHtml(role)} role.</div>`;
    return false;
  }

  notice(text: string, kind: "error" | "info" = "info"): void {
    const box = mustElement<HTMLElement>(this.root, ".notice");
    box.textContent = text;
    box.className = `notice notice-${kind}`;
    box.hidden = false;
  }

  clearNotice(): void {
    mustElement<HTMLElement>(this.root, ".notice").hidden = true;
  }

  /** Uniform failure policy: 401 ends the session, 403 is access denied. */
  handleError(error: unknown): void {
    if (error instanceof ApiFailure) {
      if (error.status === 401) {
        this.logout();
        this.notice("Session expired; sign in again.", "error");
        return;
      }
      if (error.status === 403) {
        this.notice(`Access denied: ${error.detail}`, "error");
        return;
      }
      this.notice(`${error.code}: ${error.detail}`, "error");
      return;
    }
    this.notice(error instanceof Error ? error.message : String(error),
                "error");
  }

  logout(): void {
    this.user = null;
    this.client.token = null;
    try {
      sessionStorage.removeItem(TOKEN_KEY);
      sessionStorage.removeItem(USER_KEY);
    } catch {
      // Storage may be unavailable; the in-memory state is already gone.
    }
    mustElement<HTMLElement>(this.root, ".topbar-user").textContent = "";
    mustElement<HTMLButtonElement>(this.root, ".logout-btn").hidden = true;
    this.clearNotice();
    showLogin(this);
  }

  private persistSession(): void {
    try {
      if (this.client.token) sessionStorage.setItem(TOKEN_KEY,
                                                    this.client.token);
      sessionStorage.setItem(USER_KEY, JSON.stringify(this.user));
    } catch {
      // Without storage the session simply will not survive a reload.
    }
  }

  private restoreSession(): { token: string; user: UserDoc } | null {
    try {
      const token = sessionStorage.getItem(TOKEN_KEY);
      const raw = sessionStorage.getItem(USER_KEY);
      if (!token || !raw) return null;
      return { token, user: JSON.parse(raw) as UserDoc };
    } catch {
      return null;
    }
  }
}

export function boot(options: BootOptions): App {
  const app = new App(options);
  app.start();
  return app;
}
