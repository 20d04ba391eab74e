// Static explainer for the two optimizers.

import { el } from "../dom.js";

export function renderAboutPage(outlet: HTMLElement): void {
  outlet.append(
    el("section", { class: "card prose" },
      el("h2", {}, "About the methods"),
      el("p", {},
        "Every application is modeled as a normally distributed demand (a mean and a ",
        "standard deviation) that is active over a window of planning slots. An allocation ",
        "rents instances from reserved, on-demand, and spot market spaces and assigns each ",
        "application to one instance per active slot, so that the probability of an instance ",
        "staying within its capacity never drops below the portfolio's quality-of-service ",
        "threshold. The price of the plan is the sum of each instance's per-slot price over ",
        "its rental window.",
      ),
      el("h3", {}, "ERICH, the greedy heuristic"),
      el("p", {},
        "ERICH sorts applications by expected demand and places each one on the first ",
        "already-rented instance that can absorb it, renting a new one when nothing fits. ",
        "A condensing pass then retires rentals that ended up empty, and a final pass ",
        "drips preemptible applications into leftover headroom, falling back to cheap spot ",
        "capacity for any gaps. It is deterministic and fast, which makes it the default.",
      ),
      el("h3", {}, "GEORG, the genetic algorithm"),
      el("p", {},
        "GEORG keeps a population of candidate allocations (seeded in part by ERICH) and ",
        "evolves it: cheaper plans are more likely to be recombined, a crossover swaps ",
        "whole time-slices between parents, mutation evicts dominated co-tenants, and a ",
        "repair step re-homes any application the shuffling orphaned. The best plan always ",
        "survives a generation, so the reported cost can only improve while it runs. It is ",
        "slower than ERICH but explores combinations the greedy pass cannot reach.",
      ),
      el("p", {},
        "Both optimizers run server-side as background jobs; the allocations page polls ",
        "for progress and renders finished plans with per-market statistics and comparison charts.",
      ),
    ),
  );
}
