// Application shell: header with navbar, routed outlet, session handling.

import * as api from "./api.js";
import { clear, el } from "./dom.js";
import { defineRoute, navigate, startRouter } from "./router.js";
import { showToast, toastError } from "./toast.js";
import { renderAboutPage } from "./pages/about.js";
import { renderAllocationsPage } from "./pages/allocations.js";
import { renderAppsPage } from "./pages/apps.js";
import { renderInstancesPage } from "./pages/instances.js";
import { renderLandingPage } from "./pages/landing.js";
import { renderLoginPage } from "./pages/login.js";

const NAV_LINKS: Array<{ path: string; label: string }> = [
  { path: "/", label: "Home" },
  { path: "/instances", label: "Providers and instances" },
  { path: "/apps", label: "Apps and portfolios" },
  { path: "/allocations", label: "Allocations" },
  { path: "/about", label: "About" },
];

export function mountApp(root: HTMLElement): void {
  clear(root);

  const nav = el("nav", { class: "navbar-links" });
  const sessionBox = el("div", { class: "session-box" });
  const headerBar = el("header", { class: "navbar" },
    el("span", { class: "brand" }, "cloudfolio"),
    nav,
    sessionBox,
  );
  const outlet = el("main", { id: "outlet" });
  root.append(headerBar, outlet);

  const drawChrome = (activePath: string) => {
    clear(nav);
    clear(sessionBox);
    if (!api.storedToken()) {
      return;
    }
    for (const link of NAV_LINKS) {
      const a = el("a", {
        href: `#${link.path}`,
        class: link.path === activePath ? "nav-link active" : "nav-link",
      }, link.label);
      nav.append(a);
    }
    const email = api.storedEmail();
    if (email) {
      sessionBox.append(el("span", { class: "session-email" }, email));
    }
    const logoutButton = el("button", { class: "btn btn-small", id: "logout" }, "Log out");
    logoutButton.addEventListener("click", () => {
      logoutButton.disabled = true;
      void api.logout()
        .then(() => showToast("signed out"))
        .catch((err) => toastError(err))
        .finally(() => {
          navigate("/login");
        });
    });
    sessionBox.append(logoutButton);
  };

  defineRoute("/login", renderLoginPage);
  defineRoute("/", renderLandingPage);
  defineRoute("/instances", renderInstancesPage);
  defineRoute("/apps", renderAppsPage);
  defineRoute("/allocations", renderAllocationsPage);
  defineRoute("/about", renderAboutPage);

  startRouter({
    outlet,
    isAuthed: () => api.storedToken() !== null,
    loginPath: "/login",
    homePath: "/",
    onRender: drawChrome,
  });
}
