// Allocations page: pick a portfolio, launch optimizer runs, poll their jobs,
// inspect finished plans, and compare them with three bar charts.

import * as api from "../api.js";
import { barChart } from "../charts.js";
import { beginRequest, clear, el, withBusy } from "../dom.js";
import type { Cleanup } from "../router.js";
import { showToast, toastError } from "../toast.js";
import { GA_DEFAULTS } from "../types.js";
import type { Algorithm, AllocationDoc, GaParams, JobDoc, PortfolioDoc } from "../types.js";
import { validateGaForm } from "../validate.js";
import type { GaFormValues } from "../validate.js";

const POLL_INTERVAL_MS = 3000;
const MARKET_COLORS: Record<string, string> = {
  reserved: "#4e79a7",
  on_demand: "#f28e2b",
  spot: "#59a14f",
};

function fmtMoney(value: number): string {
  return value.toFixed(3);
}

function fmtRate(value: number): string {
  return `${(value * 100).toFixed(1)}%`;
}

function allocationLabel(alloc: AllocationDoc): string {
  return `${alloc.algorithm} #${alloc.id.slice(-4)}`;
}

export function renderAllocationsPage(outlet: HTMLElement): Cleanup {
  let portfolios: PortfolioDoc[] = [];
  let selectedId: string | null = null;
  let allocations: AllocationDoc[] = [];
  const jobs = new Map<string, JobDoc>();
  let formOpen = false;
  let expanded = new Set<string>();
  let pollTimer: number | null = null;
  let alive = true;

  const header = el("div", { class: "alloc-header" });
  const formHost = el("div", { class: "alloc-form-host" });
  const listHost = el("div", { class: "alloc-list" });
  const chartHost = el("div", { class: "chart-grid", id: "alloc-charts" });
  outlet.append(
    el("section", { class: "page" },
      el("h2", {}, "Allocations"),
      header,
      formHost,
      listHost,
      chartHost,
    ),
  );

  const selectedPortfolio = (): PortfolioDoc | null =>
    portfolios.find((p) => p.id === selectedId) ?? null;

  const stopPolling = () => {
    if (pollTimer !== null) {
      window.clearTimeout(pollTimer);
      pollTimer = null;
    }
  };

  const schedulePoll = () => {
    stopPolling();
    const pending = allocations.some((a) => a.status === "pending" || a.status === "running");
    if (pending && alive) {
      pollTimer = window.setTimeout(() => {
        void refresh();
      }, POLL_INTERVAL_MS);
    }
  };

  const refresh = async () => {
    const stillCurrent = beginRequest("allocations");
    try {
      portfolios = await api.listPortfolios();
      if (!stillCurrent() || !alive) return;
      if (selectedId === null || !portfolios.some((p) => p.id === selectedId)) {
        selectedId = portfolios.length > 0 ? portfolios[0].id : null;
      }
      if (selectedId !== null) {
        allocations = await api.listAllocations(selectedId);
        if (!stillCurrent() || !alive) return;
        jobs.clear();
        const open = allocations.filter(
          (a) => a.status === "pending" || a.status === "running",
        );
        const fetched = await Promise.all(
          open.map((a) => api.getJob(a.job_id).catch(() => null)),
        );
        if (!stillCurrent() || !alive) return;
        fetched.forEach((job) => {
          if (job) jobs.set(job.id, job);
        });
      } else {
        allocations = [];
        jobs.clear();
      }
      draw();
      schedulePoll();
    } catch (err) {
      if (stillCurrent() && alive) toastError(err, "could not load allocations");
    }
  };

  // ---- new-allocation form ----

  const buildForm = (): HTMLFormElement => {
    const erichRadio = el("input", { type: "radio", name: "algorithm", value: "erich", id: "alg-erich", checked: true });
    const georgRadio = el("input", { type: "radio", name: "algorithm", value: "georg", id: "alg-georg" });

    const gaInput = (id: keyof GaParams, step: string) =>
      el("input", { type: "number", id: `ga-${id}`, step, value: String(GA_DEFAULTS[id]) });
    const gaInputs = {
      population_size: gaInput("population_size", "1"),
      max_generations: gaInput("max_generations", "1"),
      mutation_rate: gaInput("mutation_rate", "any"),
      stagnation_window: gaInput("stagnation_window", "1"),
      convergence_epsilon: gaInput("convergence_epsilon", "any"),
      seed: gaInput("seed", "1"),
    };
    const gaError = el("p", { class: "field-error", "data-field": "ga_config" });
    const gaFieldset = el("fieldset", { class: "ga-params", disabled: true },
      el("legend", {}, "Genetic algorithm parameters"),
      el("div", { class: "ga-grid" },
        el("label", { for: "ga-population_size" }, "Population size"), gaInputs.population_size,
        el("label", { for: "ga-max_generations" }, "Max generations"), gaInputs.max_generations,
        el("label", { for: "ga-mutation_rate" }, "Mutation rate"), gaInputs.mutation_rate,
        el("label", { for: "ga-stagnation_window" }, "Stagnation window"), gaInputs.stagnation_window,
        el("label", { for: "ga-convergence_epsilon" }, "Convergence epsilon"), gaInputs.convergence_epsilon,
        el("label", { for: "ga-seed" }, "Seed"), gaInputs.seed,
      ),
      gaError,
    );

    const syncGaVisibility = () => {
      gaFieldset.disabled = !georgRadio.checked;
      gaFieldset.classList.toggle("inactive", !georgRadio.checked);
    };
    erichRadio.addEventListener("change", syncGaVisibility);
    georgRadio.addEventListener("change", syncGaVisibility);

    const submitButton = el("button", { type: "submit", class: "btn btn-green", id: "start-allocation" }, "Start optimization");
    const cancelButton = el("button", { type: "button", class: "btn" }, "Cancel");
    cancelButton.addEventListener("click", () => {
      formOpen = false;
      draw();
    });

    const form = el("form", { class: "entity-form", id: "allocation-form", novalidate: true },
      el("h4", {}, "New allocation"),
      el("div", { class: "form-row" },
        el("label", {}, "Algorithm"),
        el("div", { class: "check-list" },
          el("label", { class: "check-label", for: "alg-erich" }, erichRadio, "greedy heuristic (erich)"),
          el("label", { class: "check-label", for: "alg-georg" }, georgRadio, "genetic algorithm (georg)"),
        ),
      ),
      gaFieldset,
      el("div", { class: "form-actions" }, submitButton, cancelButton),
    );
    syncGaVisibility();

    form.addEventListener("submit", (event) => {
      event.preventDefault();
      const pf = selectedPortfolio();
      if (!pf) return;
      const algorithm: Algorithm = georgRadio.checked ? "georg" : "erich";
      let gaConfig: GaParams | undefined;
      gaError.textContent = "";
      if (algorithm === "georg") {
        const values: GaFormValues = {
          population_size: gaInputs.population_size.value,
          max_generations: gaInputs.max_generations.value,
          mutation_rate: gaInputs.mutation_rate.value,
          stagnation_window: gaInputs.stagnation_window.value,
          convergence_epsilon: gaInputs.convergence_epsilon.value,
          seed: gaInputs.seed.value,
        };
        const problems = validateGaForm(values);
        if (problems.length > 0) {
          gaError.textContent = problems.map((p) => p.message).join("; ");
          return;
        }
        gaConfig = {
          population_size: Number(values.population_size),
          max_generations: Number(values.max_generations),
          mutation_rate: Number(values.mutation_rate),
          stagnation_window: Number(values.stagnation_window),
          convergence_epsilon: Number(values.convergence_epsilon),
          seed: Number(values.seed),
        };
      }
      void withBusy(submitButton, async () => {
        try {
          await api.createAllocation(pf.id, algorithm, gaConfig);
          showToast(`${algorithm} optimization started`);
          formOpen = false;
          await refresh();
        } catch (err) {
          if (err instanceof api.ApiError && err.field === "ga_config") {
            gaError.textContent = err.message;
          } else {
            toastError(err, "could not start the optimization");
          }
        }
      });
    });
    return form;
  };

  // ---- allocation cards ----

  const buildCard = (alloc: AllocationDoc): HTMLElement => {
    const pf = selectedPortfolio();
    const completed = alloc.status === "completed";
    const stale = pf !== null && alloc.portfolio_version < pf.version;
    const job = jobs.get(alloc.job_id);

    const deleteButton = el("button", { class: "btn btn-red btn-delete", title: "Delete" }, "\u{1F5D1}");
    deleteButton.addEventListener("click", () => {
      void withBusy(deleteButton, async () => {
        try {
          await api.deleteAllocation(alloc.id);
          showToast("allocation deleted");
          await refresh();
        } catch (err) {
          toastError(err, "could not delete allocation");
        }
      });
    });

    const head = el("header", { class: "card-head" },
      el("h4", {}, allocationLabel(alloc)),
      el("span", { class: `badge badge-${alloc.status}` }, completed ? "completed" : alloc.status),
      el("span", { class: "badge badge-version" }, `portfolio v${alloc.portfolio_version}`),
      stale ? el("span", { class: "badge badge-stale", title: "portfolio changed since this run" }, "stale") : null,
      el("span", { class: "spacer" }),
      deleteButton,
    );

    const card = el("article", { class: "card alloc-card", "data-id": alloc.id, "data-status": alloc.status }, head);

    if (completed) {
      card.append(
        el("p", { class: "alloc-stats" },
          `total cost ${fmtMoney(alloc.total_cost)}`,
          el("span", { class: "dot-sep" }, " · "),
          `mean utilization ${fmtRate(alloc.mean_utilization)}`,
          el("span", { class: "dot-sep" }, " · "),
          `${alloc.instances.length} instances`,
        ),
      );

      const instanceBody = el("tbody", {});
      for (const inst of alloc.instances) {
        const slots = inst.end - inst.begin;
        instanceBody.append(el("tr", {},
          el("td", {}, inst.type_ref.provider),
          el("td", {}, inst.type_ref.name),
          el("td", {}, inst.type_ref.market),
          el("td", { class: "num" }, `[${inst.begin}, ${inst.end})`),
          el("td", { class: "num" }, fmtMoney(slots * inst.type_ref.price_per_slot)),
        ));
      }
      const marketBody = el("tbody", {});
      for (const [market, stats] of Object.entries(alloc.per_market_stats)) {
        marketBody.append(el("tr", {},
          el("td", {}, market),
          el("td", { class: "num" }, String(stats.instance_count)),
          el("td", { class: "num" }, fmtMoney(stats.total_cost)),
          el("td", { class: "num" }, fmtRate(stats.utilization)),
        ));
      }
      const details = el("details", { class: "alloc-details" },
        el("summary", {}, "Instances and market statistics"),
        el("table", { class: "data-table" },
          el("thead", {}, el("tr", {},
            el("th", {}, "Provider"), el("th", {}, "Type"), el("th", {}, "Market"),
            el("th", { class: "num" }, "Window"), el("th", { class: "num" }, "Cost"),
          )),
          instanceBody,
        ),
        el("table", { class: "data-table" },
          el("thead", {}, el("tr", {},
            el("th", {}, "Market"), el("th", { class: "num" }, "Instances"),
            el("th", { class: "num" }, "Cost"), el("th", { class: "num" }, "Utilization"),
          )),
          marketBody,
        ),
      );
      if (expanded.has(alloc.id)) {
        details.setAttribute("open", "");
      }
      details.addEventListener("toggle", () => {
        if ((details as HTMLDetailsElement).open) {
          expanded.add(alloc.id);
        } else {
          expanded.delete(alloc.id);
        }
      });
      card.append(details);
    } else if (alloc.status === "failed") {
      card.append(el("p", { class: "alloc-error" }, alloc.error ?? job?.error ?? "optimization failed"));
    } else {
      const progress = job?.progress;
      card.append(
        el("p", { class: "alloc-progress" },
          progress
            ? `running: generation ${progress.generation}, best cost ${fmtMoney(progress.best_cost)}`
            : "waiting for the optimizer…",
        ),
      );
    }
    return card;
  };

  // ---- comparison charts ----

  const drawCharts = () => {
    clear(chartHost);
    const done = allocations.filter((a) => a.status === "completed");
    if (done.length === 0) return;

    chartHost.append(
      barChart({
        title: "Price",
        groups: done.map((a) => ({
          label: allocationLabel(a),
          bars: [{ label: "total cost", value: a.total_cost }],
        })),
        format: fmtMoney,
      }),
      barChart({
        title: "Utilization overall",
        groups: done.map((a) => ({
          label: allocationLabel(a),
          bars: [{ label: "mean utilization", value: a.mean_utilization, color: "#59a14f" }],
        })),
        format: fmtRate,
      }),
      barChart({
        title: "Utilization by market space",
        groups: done.map((a) => ({
          label: allocationLabel(a),
          bars: Object.entries(a.per_market_stats).map(([market, stats]) => ({
            label: market,
            value: stats.utilization,
            color: MARKET_COLORS[market],
          })),
        })),
        format: fmtRate,
      }),
    );
  };

  // ---- page skeleton ----

  const draw = () => {
    clear(header);
    clear(formHost);
    clear(listHost);

    const select = el("select", { id: "portfolio-select" });
    for (const pf of portfolios) {
      const option = el("option", { value: pf.id }, `${pf.name} (v${pf.version})`);
      if (pf.id === selectedId) option.selected = true;
      select.append(option);
    }
    select.addEventListener("change", () => {
      selectedId = select.value;
      expanded = new Set();
      void refresh();
    });

    const refreshButton = el("button", { class: "btn btn-blue", id: "refresh-allocations" }, "Refresh");
    refreshButton.addEventListener("click", () => {
      void withBusy(refreshButton, refresh);
    });
    const newButton = el("button", { class: "btn btn-green", id: "new-allocation" }, "+ New Allocation");
    newButton.addEventListener("click", () => {
      formOpen = true;
      draw();
    });

    if (portfolios.length === 0) {
      header.append(el("p", { class: "empty-note" }, "create a portfolio first, then come back to run the optimizers"));
      return;
    }

    header.append(
      el("label", { for: "portfolio-select" }, "Portfolio"),
      select,
      refreshButton,
      newButton,
    );

    if (formOpen) {
      formHost.append(buildForm());
    }

    if (allocations.length === 0) {
      listHost.append(el("p", { class: "empty-note" }, "no allocations for this portfolio yet"));
    }
    for (const alloc of allocations) {
      listHost.append(buildCard(alloc));
    }
    drawCharts();
  };

  draw();
  void refresh();

  return () => {
    alive = false;
    stopPolling();
  };
}
