// Landing page: short orientation plus jump-off cards for the main views.

import { storedEmail } from "../api.js";
import { el } from "../dom.js";
import { navigate } from "../router.js";

const CARDS: Array<{ path: string; title: string; blurb: string }> = [
  {
    path: "/instances",
    title: "Providers and instances",
    blurb: "Browse the instance type catalog and narrow it down by provider, market, capacity, and price.",
  },
  {
    path: "/apps",
    title: "Apps and portfolios",
    blurb: "Describe your applications (expected demand, spread, time window) and group them into portfolios.",
  },
  {
    path: "/allocations",
    title: "Allocations",
    blurb: "Run the optimizers on a portfolio, poll the results, and compare cost and utilization side by side.",
  },
  {
    path: "/about",
    title: "About the methods",
    blurb: "What the greedy heuristic and the genetic algorithm actually do with your portfolio.",
  },
];

export function renderLandingPage(outlet: HTMLElement): void {
  const email = storedEmail();
  outlet.append(
    el("section", { class: "hero" },
      el("h2", {}, "Plan your cloud portfolio"),
      el("p", {},
        email ? `Signed in as ${email}. ` : "",
        "Model applications with uncertain demand, pick the providers you trust, ",
        "and let the optimizers find a cheap instance mix that still meets your quality-of-service bar.",
      ),
    ),
  );
  const grid = el("div", { class: "card-grid" });
  for (const card of CARDS) {
    const node = el("article", { class: "card nav-card", "data-path": card.path },
      el("h3", {}, card.title),
      el("p", {}, card.blurb),
    );
    node.addEventListener("click", () => navigate(card.path));
    grid.append(node);
  }
  outlet.append(grid);
}
