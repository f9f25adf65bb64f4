// Sign-in form; the only view reachable without a session.

import type { App } from "../app";
import { ApiFailure } from "../api";
import { mustElement } from "../dom";

export function showLogin(app: App): void {
  app.viewRegion.innerHTML = `
    <div class="login-card">
      <h2>Sign in</h2>
      <form class="login-form">
        <label>login
          <input name="login" autocomplete="username" required>
        </label>
        <label>password
          <input name="password" type="password"
                 autocomplete="current-password" required>
        </label>
        <div class="form-error" role="alert"></div>
        <button type="submit">Sign in</button>
      </form>
    </div>`;

  const form = mustElement<HTMLFormElement>(app.viewRegion, ".login-form");
  const loginInput = mustElement<HTMLInputElement>(form, "input[name=login]");
  const passwordInput =
    mustElement<HTMLInputElement>(form, "input[name=password]");
  const errorBox = mustElement<HTMLElement>(form, ".form-error");

  form.addEventListener("submit", (event) => {
    event.preventDefault();
    errorBox.textContent = "";
    void (async () => {
      try {
        const user = await app.client.login(loginInput.value,
                                            passwordInput.value);
        app.sessionStarted(user);
      } catch (error) {
        if (error instanceof ApiFailure && error.status === 401) {
          errorBox.textContent = "Wrong login or password.";
        } else {
          errorBox.textContent =
            error instanceof Error ? error.message : "Sign-in failed.";
        }
      }
    })();
  });
}
