// Two-column CRUD page: applications on the left, portfolios on the right.
// Forms validate locally before any request leaves the browser.

import * as api from "../api.js";
import { beginRequest, clear, el, withBusy } from "../dom.js";
import { showToast, toastError } from "../toast.js";
import { PROVIDERS } from "../types.js";
import type { AppDoc, PortfolioDoc, Provider } from "../types.js";
import { validateAppForm, validatePortfolioForm } from "../validate.js";
import type { FieldError } from "../validate.js";

function fieldRow(
  labelText: string,
  input: HTMLElement,
  field: string,
): HTMLDivElement {
  return el("div", { class: "form-row" },
    el("label", { for: input.id }, labelText),
    input,
    el("p", { class: "field-error", "data-field": field }),
  );
}

function showFieldErrors(form: HTMLElement, errors: FieldError[]): void {
  form.querySelectorAll<HTMLElement>(".field-error").forEach((node) => {
    node.textContent = "";
  });
  for (const err of errors) {
    const slot = form.querySelector<HTMLElement>(`.field-error[data-field="${err.field}"]`);
    if (slot) {
      slot.textContent = err.message;
    } else {
      showToast(err.message, "error");
    }
  }
}

export function renderAppsPage(outlet: HTMLElement): void {
  let apps: AppDoc[] = [];
  let portfolios: PortfolioDoc[] = [];
  let openAppForm: AppDoc | null | undefined; // undefined = closed, null = create
  let openPortfolioForm: PortfolioDoc | null | undefined;

  const appsColumn = el("div", { class: "column", id: "apps-column" });
  const portfoliosColumn = el("div", { class: "column", id: "portfolios-column" });
  outlet.append(
    el("section", { class: "page" },
      el("h2", {}, "Apps and portfolios"),
      el("div", { class: "two-col" }, appsColumn, portfoliosColumn),
    ),
  );

  const reload = async () => {
    const stillCurrent = beginRequest("apps-page");
    try {
      const [appList, portfolioList] = await Promise.all([
        api.listApps(),
        api.listPortfolios(),
      ]);
      if (!stillCurrent()) return;
      apps = appList;
      portfolios = portfolioList;
      draw();
    } catch (err) {
      if (stillCurrent()) toastError(err, "could not load apps and portfolios");
    }
  };

  // ---- applications column ----

  const buildAppForm = (existing: AppDoc | null): HTMLFormElement => {
    const nameInput = el("input", { type: "text", id: "app-name", value: existing?.name ?? "" });
    const muInput = el("input", { type: "number", id: "app-mu", step: "any", value: existing ? String(existing.mu) : "" });
    const sigmaInput = el("input", { type: "number", id: "app-sigma", step: "any", value: existing ? String(existing.sigma) : "" });
    const startInput = el("input", { type: "number", id: "app-start", step: "1", value: existing ? String(existing.start) : "" });
    const finishInput = el("input", { type: "number", id: "app-finish", step: "1", value: existing ? String(existing.finish) : "" });
    const preemptibleInput = el("input", { type: "checkbox", id: "app-preemptible", checked: existing?.preemptible ?? false });
    const saveButton = el("button", { type: "submit", class: "btn btn-green" }, existing ? "Save changes" : "Create application");
    const cancelButton = el("button", { type: "button", class: "btn" }, "Cancel");
    cancelButton.addEventListener("click", () => {
      openAppForm = undefined;
      draw();
    });

    const form = el("form", { class: "entity-form", id: "app-form", novalidate: true },
      el("h4", {}, existing ? `Edit ${existing.name}` : "New application"),
      fieldRow("Name", nameInput, "name"),
      fieldRow("Expected demand (mu)", muInput, "mu"),
      fieldRow("Demand spread (sigma)", sigmaInput, "sigma"),
      fieldRow("Start slot", startInput, "start"),
      fieldRow("Finish slot (exclusive)", finishInput, "finish"),
      el("div", { class: "form-row check-row" },
        el("label", { for: "app-preemptible" }, preemptibleInput, "Preemptible (may run on spot capacity)"),
      ),
      el("div", { class: "form-actions" }, saveButton, cancelButton),
    );

    form.addEventListener("submit", (event) => {
      event.preventDefault();
      const values = {
        name: nameInput.value,
        mu: muInput.value,
        sigma: sigmaInput.value,
        start: startInput.value,
        finish: finishInput.value,
      };
      const problems = validateAppForm(values);
      showFieldErrors(form, problems);
      if (problems.length > 0) return;

      const payload = {
        name: values.name.trim(),
        mu: Number(values.mu),
        sigma: Number(values.sigma),
        preemptible: preemptibleInput.checked,
        start: Number(values.start),
        finish: Number(values.finish),
      };
      void withBusy(saveButton, async () => {
        try {
          if (existing) {
            await api.updateApp(existing.id, payload);
            showToast(`application ${payload.name} updated`);
          } else {
            await api.createApp(payload);
            showToast(`application ${payload.name} created`);
          }
          openAppForm = undefined;
          await reload();
        } catch (err) {
          if (err instanceof api.ApiError && err.field) {
            showFieldErrors(form, [{ field: err.field, message: err.message }]);
          } else {
            toastError(err, "could not save application");
          }
        }
      });
    });
    return form;
  };

  const drawApps = () => {
    clear(appsColumn);
    const newButton = el("button", { class: "btn btn-green", id: "new-app", title: "New application" }, "+ New application");
    newButton.addEventListener("click", () => {
      openAppForm = null;
      draw();
    });
    appsColumn.append(el("header", { class: "column-head" }, el("h3", {}, "Applications"), newButton));

    if (openAppForm !== undefined) {
      appsColumn.append(buildAppForm(openAppForm));
    }

    if (apps.length === 0) {
      appsColumn.append(el("p", { class: "empty-note" }, "no applications yet"));
      return;
    }

    const body = el("tbody", {});
    for (const app of apps) {
      const editButton = el("button", { class: "btn btn-yellow btn-edit", title: "Edit" }, "✎");
      editButton.addEventListener("click", () => {
        openAppForm = app;
        draw();
      });
      const copyButton = el("button", { class: "btn btn-blue btn-copy", title: "Copy" }, "⧉");
      copyButton.addEventListener("click", () => {
        void withBusy(copyButton, async () => {
          try {
            const twin = await api.copyApp(app.id);
            showToast(`application ${twin.name} created`);
            await reload();
          } catch (err) {
            toastError(err, "could not copy application");
          }
        });
      });
      const deleteButton = el("button", { class: "btn btn-red btn-delete", title: "Delete" }, "\u{1F5D1}");
      deleteButton.addEventListener("click", () => {
        void withBusy(deleteButton, async () => {
          try {
            await api.deleteApp(app.id);
            showToast(`application ${app.name} deleted`);
            await reload();
          } catch (err) {
            toastError(err, "could not delete application");
          }
        });
      });

      body.append(el("tr", { "data-id": app.id, "data-name": app.name },
        el("td", {}, app.name),
        el("td", { class: "num" }, String(app.mu)),
        el("td", { class: "num" }, String(app.sigma)),
        el("td", { class: "num" }, `[${app.start}, ${app.finish})`),
        el("td", {}, app.preemptible ? "yes" : "no"),
        el("td", { class: "actions" }, editButton, copyButton, deleteButton),
      ));
    }
    appsColumn.append(
      el("table", { class: "data-table", id: "app-table" },
        el("thead", {},
          el("tr", {},
            el("th", {}, "Name"),
            el("th", { class: "num" }, "mu"),
            el("th", { class: "num" }, "sigma"),
            el("th", { class: "num" }, "Window"),
            el("th", {}, "Preemptible"),
            el("th", {}, ""),
          ),
        ),
        body,
      ),
    );
  };

  // ---- portfolios column ----

  const buildPortfolioForm = (existing: PortfolioDoc | null): HTMLFormElement => {
    const nameInput = el("input", { type: "text", id: "pf-name", value: existing?.name ?? "" });
    const qMinInput = el("input", {
      type: "number", id: "pf-qmin", step: "any", min: "0", max: "1",
      value: existing ? String(existing.q_min) : "0.95",
    });

    const providerBoxes: HTMLInputElement[] = [];
    const providerSet = el("div", { class: "check-list", "data-field-host": "providers" });
    for (const provider of PROVIDERS) {
      const box = el("input", {
        type: "checkbox",
        name: "pf-provider",
        value: provider,
        id: `pf-provider-${provider}`,
        checked: existing ? existing.providers.includes(provider) : false,
      });
      providerBoxes.push(box);
      providerSet.append(el("label", { class: "check-label", for: `pf-provider-${provider}` }, box, provider));
    }

    const appBoxes: HTMLInputElement[] = [];
    const appSet = el("div", { class: "check-list", "data-field-host": "app_ids" });
    if (apps.length === 0) {
      appSet.append(el("p", { class: "empty-note" }, "create applications first"));
    }
    for (const app of apps) {
      const box = el("input", {
        type: "checkbox",
        name: "pf-app",
        value: app.id,
        id: `pf-app-${app.id}`,
        checked: existing ? existing.app_ids.includes(app.id) : false,
      });
      appBoxes.push(box);
      appSet.append(el("label", { class: "check-label", for: `pf-app-${app.id}` }, box, app.name));
    }

    const saveButton = el("button", { type: "submit", class: "btn btn-green" }, existing ? "Save changes" : "Create portfolio");
    const cancelButton = el("button", { type: "button", class: "btn" }, "Cancel");
    cancelButton.addEventListener("click", () => {
      openPortfolioForm = undefined;
      draw();
    });

    const form = el("form", { class: "entity-form", id: "portfolio-form", novalidate: true },
      el("h4", {}, existing ? `Edit ${existing.name}` : "New portfolio"),
      fieldRow("Name", nameInput, "name"),
      el("div", { class: "form-row" },
        el("label", {}, "Providers"),
        providerSet,
        el("p", { class: "field-error", "data-field": "providers" }),
      ),
      fieldRow("Quality of service (0 to 1)", qMinInput, "q_min"),
      el("div", { class: "form-row" },
        el("label", {}, "Applications"),
        appSet,
        el("p", { class: "field-error", "data-field": "app_ids" }),
      ),
      el("div", { class: "form-actions" }, saveButton, cancelButton),
    );

    form.addEventListener("submit", (event) => {
      event.preventDefault();
      const providers = providerBoxes.filter((b) => b.checked).map((b) => b.value);
      const values = { name: nameInput.value, providers, q_min: qMinInput.value };
      const problems = validatePortfolioForm(values);
      showFieldErrors(form, problems);
      if (problems.length > 0) return;

      const payload = {
        name: values.name.trim(),
        providers: providers as Provider[],
        q_min: Number(values.q_min),
        app_ids: appBoxes.filter((b) => b.checked).map((b) => b.value),
      };
      void withBusy(saveButton, async () => {
        try {
          if (existing) {
            await api.updatePortfolio(existing.id, payload);
            showToast(`portfolio ${payload.name} updated`);
          } else {
            await api.createPortfolio(payload);
            showToast(`portfolio ${payload.name} created`);
          }
          openPortfolioForm = undefined;
          await reload();
        } catch (err) {
          if (err instanceof api.ApiError && err.field) {
            showFieldErrors(form, [{ field: err.field, message: err.message }]);
          } else {
            toastError(err, "could not save portfolio");
          }
        }
      });
    });
    return form;
  };

  const drawPortfolios = () => {
    clear(portfoliosColumn);
    const newButton = el("button", { class: "btn btn-green", id: "new-portfolio", title: "New portfolio" }, "+ New portfolio");
    newButton.addEventListener("click", () => {
      openPortfolioForm = null;
      draw();
    });
    portfoliosColumn.append(el("header", { class: "column-head" }, el("h3", {}, "Portfolios"), newButton));

    if (openPortfolioForm !== undefined) {
      portfoliosColumn.append(buildPortfolioForm(openPortfolioForm));
    }

    if (portfolios.length === 0) {
      portfoliosColumn.append(el("p", { class: "empty-note" }, "no portfolios yet"));
      return;
    }

    const appName = (id: string) => apps.find((a) => a.id === id)?.name ?? id;
    for (const pf of portfolios) {
      const editButton = el("button", { class: "btn btn-yellow btn-edit", title: "Edit" }, "✎");
      editButton.addEventListener("click", () => {
        openPortfolioForm = pf;
        draw();
      });
      const deleteButton = el("button", { class: "btn btn-red btn-delete", title: "Delete" }, "\u{1F5D1}");
      deleteButton.addEventListener("click", () => {
        void withBusy(deleteButton, async () => {
          try {
            await api.deletePortfolio(pf.id);
            showToast(`portfolio ${pf.name} deleted`);
            await reload();
          } catch (err) {
            toastError(err, "could not delete portfolio");
          }
        });
      });

      portfoliosColumn.append(
        el("article", { class: "card portfolio-card", "data-id": pf.id, "data-name": pf.name },
          el("header", { class: "card-head" },
            el("h4", {}, pf.name),
            el("span", { class: "badge badge-version" }, `v${pf.version}`),
            el("span", { class: "spacer" }),
            editButton,
            deleteButton,
          ),
          el("p", {}, `providers: ${pf.providers.join(", ")}`),
          el("p", {}, `quality of service: ${pf.q_min}`),
          el("p", {},
            pf.app_ids.length === 0
              ? "no applications"
              : `applications: ${pf.app_ids.map(appName).join(", ")}`,
          ),
        ),
      );
    }
  };

  const draw = () => {
    drawApps();
    drawPortfolios();
  };

  draw();
  void reload();
}
