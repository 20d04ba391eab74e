// Combined sign-in / sign-up page.  Registration flips back to the sign-in
// form on success with the email prefilled.

import * as api from "../api.js";
import { el, withBusy } from "../dom.js";
import { navigate } from "../router.js";
import { showToast, toastError } from "../toast.js";
import { validateCredentials } from "../validate.js";

type Mode = "login" | "register";

export function renderLoginPage(outlet: HTMLElement): void {
  let mode: Mode = "login";
  let prefillEmail = "";

  const card = el("section", { class: "card auth-card" });
  outlet.append(card);

  const draw = () => {
    while (card.firstChild) card.removeChild(card.firstChild);

    const emailInput = el("input", {
      type: "email",
      id: "email",
      name: "email",
      value: prefillEmail,
      autocomplete: "username",
    });
    const usernameInput = el("input", {
      type: "text",
      id: "username",
      name: "username",
      autocomplete: "nickname",
    });
    const passwordInput = el("input", {
      type: "password",
      id: "password",
      name: "password",
      autocomplete: mode === "login" ? "current-password" : "new-password",
    });
    const emailError = el("p", { class: "field-error", "data-field": "email" });
    const usernameError = el("p", { class: "field-error", "data-field": "username" });
    const passwordError = el("p", { class: "field-error", "data-field": "password" });
    const errorSlots: Record<string, HTMLElement> = {
      email: emailError,
      username: usernameError,
      password: passwordError,
    };

    const submit = el("button", { type: "submit", class: "btn btn-green" },
      mode === "login" ? "Sign in" : "Create account");

    const form = el("form", { class: "stacked-form", novalidate: true },
      el("label", { for: "email" }, "Email"),
      emailInput,
      emailError,
      ...(mode === "register"
        ? [el("label", { for: "username" }, "Username"), usernameInput, usernameError]
        : []),
      el("label", { for: "password" }, "Password"),
      passwordInput,
      passwordError,
      submit,
    );

    form.addEventListener("submit", (event) => {
      event.preventDefault();
      const email = emailInput.value.trim().toLowerCase();
      const username = usernameInput.value.trim();
      const password = passwordInput.value;

      emailError.textContent = "";
      usernameError.textContent = "";
      passwordError.textContent = "";
      const problems = validateCredentials(
        email, password, mode === "register" ? username : undefined,
      );
      if (problems.length > 0) {
        for (const p of problems) {
          (errorSlots[p.field] ?? passwordError).textContent = p.message;
        }
        return;
      }

      void withBusy(submit, async () => {
        try {
          if (mode === "login") {
            await api.login(email, password);
            showToast("signed in");
            navigate("/");
          } else {
            await api.register(email, username, password);
            showToast("account created, sign in below");
            prefillEmail = email;
            mode = "login";
            draw();
          }
        } catch (err) {
          if (err instanceof api.ApiError && err.field && errorSlots[err.field]) {
            errorSlots[err.field].textContent = err.message;
          } else {
            toastError(err);
          }
        }
      });
    });

    const switchLink = el("button", { type: "button", class: "link-button", id: "auth-switch" },
      mode === "login" ? "Need an account? Register" : "Have an account? Sign in");
    switchLink.addEventListener("click", () => {
      mode = mode === "login" ? "register" : "login";
      draw();
    });

    card.append(
      el("h2", {}, mode === "login" ? "Sign in" : "Register"),
      form,
      switchLink,
    );
  };

  draw();
}
