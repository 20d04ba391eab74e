"""Genetic optimizer over temporal instance groupings.

A chromosome assigns every application to hosting instances per time
slot; fitness is total portfolio cost.  Offspring are produced by a
temporal crossover that zip-merges the parents' instances along the
horizon in utilization order, and by a dominance mutation that frees
instances and lets larger apps displace pairs of smaller ones.  Orphaned
demand is always repaired by a first-fit insertion heuristic, so every
individual in every generation decodes to a feasible allocation.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from itertools import combinations, zip_longest
from typing import Callable, Iterable, Sequence

from .domain import (
    Algorithm,
    Allocation,
    Application,
    InfeasibleAppError,
    InstanceType,
    MarketSpace,
)
from .erich import ErichInput, sort_applications, sort_instance_types
from .packing import InstanceRecord, PackingState, contiguous_runs

__all__ = [
    "GaConfig",
    "Chromosome",
    "init_population",
    "fitness",
    "select_parents",
    "crossover",
    "mutate",
    "insertion_heuristic",
    "merge_survivors",
    "run",
]

ProgressSink = Callable[[int, float, float], None]

# (app_id, lo, hi) -> viable fresh-instance placements; depends only on the
# problem input, so chromosomes of one run share it
OptionCache = dict[tuple[str, int, int], list[tuple[InstanceType, int, int]]]


@dataclass(frozen=True)
class GaConfig:
    """Knobs of the evolutionary loop; defaults match the service form."""

    population_size: int = 20
    max_generations: int = 10
    mutation_rate: float = 0.2
    stagnation_window: int = 5
    convergence_epsilon: float = 0.01
    seed: int = 0

    def __post_init__(self):
        if self.population_size < 2:
            raise ValueError(f"population_size must be >= 2, got {self.population_size}")
        if self.max_generations < 1:
            raise ValueError(f"max_generations must be >= 1, got {self.max_generations}")
        if not 0.0 <= self.mutation_rate <= 1.0:
            raise ValueError(f"mutation_rate must lie in [0, 1], got {self.mutation_rate}")
        if self.stagnation_window < 1:
            raise ValueError(f"stagnation_window must be >= 1, got {self.stagnation_window}")
        if self.convergence_epsilon < 0.0:
            raise ValueError(
                f"convergence_epsilon must be >= 0, got {self.convergence_epsilon}"
            )

    def to_dict(self) -> dict:
        return {
            "population_size": self.population_size,
            "max_generations": self.max_generations,
            "mutation_rate": self.mutation_rate,
            "stagnation_window": self.stagnation_window,
            "convergence_epsilon": self.convergence_epsilon,
            "seed": self.seed,
        }


class Chromosome:
    """A feasible candidate allocation bound to its problem input."""

    __slots__ = ("state", "inp", "cache")

    def __init__(self, state: PackingState, inp: ErichInput,
                 cache: OptionCache | None = None):
        self.state = state
        self.inp = inp
        self.cache = cache if cache is not None else {}

    def cost(self) -> float:
        return self.state.cost()

    def decode(self, parameters: dict | None = None, **kwargs) -> Allocation:
        return self.state.to_allocation(self.inp.apps, Algorithm.GEORG, parameters, **kwargs)


def fitness(c: Chromosome) -> float:
    """Total cost of the decoded allocation; lower is better."""
    return c.state.cost()


def _new_instance_options(
    state: PackingState,
    app: Application,
    types: Sequence[InstanceType],
    lo: int,
    hi: int,
    cache: OptionCache | None = None,
) -> list[tuple[InstanceType, int, int]]:
    """Types that could host the app alone over [lo, hi), with envelopes."""
    if cache is not None:
        hit = cache.get((app.id, lo, hi))
        if hit is not None:
            return hit
    options: list[tuple[InstanceType, int, int]] = []
    for t in types:
        if not state.solo_feasible(t, app):
            continue
        if t.market is MarketSpace.RESERVED:
            begin, end = state.reserved_window(lo)
            if hi > end:
                continue
            options.append((t, begin, end))
        else:
            options.append((t, lo, hi))
    if cache is not None:
        cache[(app.id, lo, hi)] = options
    return options


def _place_greedy(state: PackingState, app: Application,
                  types_sorted: Sequence[InstanceType], cache: OptionCache) -> None:
    for inst in state.instances:
        if state.fits_on(inst, app):
            state.assign(inst, app, app.slots)
            return
    for t, begin, end in _new_instance_options(
        state, app, types_sorted, app.start, app.finish, cache
    ):
        inst = state.provision(t, begin, end)
        state.assign(inst, app, app.slots)
        return
    raise InfeasibleAppError(app.name, "no instance type has enough capacity for it alone")


def _place_random(state: PackingState, app: Application,
                  types_sorted: Sequence[InstanceType], rng: random.Random,
                  cache: OptionCache) -> None:
    hosts = [inst for inst in state.instances if state.fits_on(inst, app)]
    fresh = _new_instance_options(state, app, types_sorted, app.start, app.finish, cache)
    total = len(hosts) + len(fresh)
    if total == 0:
        raise InfeasibleAppError(app.name, "no instance type has enough capacity for it alone")
    pick = rng.randrange(total)
    if pick < len(hosts):
        state.assign(hosts[pick], app, app.slots)
    else:
        t, begin, end = fresh[pick - len(hosts)]
        inst = state.provision(t, begin, end)
        state.assign(inst, app, app.slots)


def init_population(
    inp: ErichInput, cfg: GaConfig, rng: random.Random | None = None
) -> list[Chromosome]:
    """Hybrid seeding: per app, a fair coin picks random or greedy placement."""
    if rng is None:
        rng = random.Random(cfg.seed)
    apps = sort_applications(inp.apps)
    types_sorted = sort_instance_types(inp.types)
    cache: OptionCache = {}
    population: list[Chromosome] = []
    for _ in range(cfg.population_size):
        state = PackingState(inp.horizon, inp.q_min, inp.reserved_term)
        for app in apps:
            if rng.random() < 0.5:
                _place_random(state, app, types_sorted, rng, cache)
            else:
                _place_greedy(state, app, types_sorted, cache)
        population.append(Chromosome(state, inp, cache))
    return population


def select_parents(
    population: Sequence[Chromosome], count: int, rng: random.Random
) -> list[tuple[Chromosome, Chromosome]]:
    """Roulette-wheel pairs, weighted by 1/cost; a pair is never (x, x)."""
    if count % 2:
        raise ValueError(f"count must be even, got {count}")
    if len(population) < 2:
        raise ValueError("parent selection needs at least two individuals")
    costs = [fitness(c) for c in population]
    if any(cost == 0.0 for cost in costs):
        weights = [1.0] * len(population)
    else:
        weights = [1.0 / cost for cost in costs]
    indices = range(len(population))
    pairs: list[tuple[Chromosome, Chromosome]] = []
    for _ in range(count // 2):
        i = rng.choices(indices, weights)[0]
        j = rng.choices(indices, weights)[0]
        attempts = 0
        while j == i and attempts < 100:
            j = rng.choices(indices, weights)[0]
            attempts += 1
        if j == i:
            j = (i + 1) % len(population)
        pairs.append((population[i], population[j]))
    return pairs


def _rank_instances(state: PackingState) -> list[InstanceRecord]:
    """Crossover adoption order: busiest envelopes first, then cheapest."""
    return sorted(
        (inst for inst in state.instances if inst.hosted),
        key=lambda i: (-i.avg_utilization(), i.type_ref.price_per_slot, i.id),
    )


def crossover(a: Chromosome, b: Chromosome, rng: random.Random) -> Chromosome:
    """Biased temporal merge of two parents, repaired to feasibility.

    Sweeping the horizon, each instance comes up for adoption at the slot
    its envelope opens; instances opening at the same slot are zip-merged
    across the parents in rank order.  An instance is adopted whole unless
    any of its (app, slot) assignments is already covered in the child.
    Whatever demand remains uncovered is re-homed by the insertion
    heuristic.
    """
    inp = a.inp
    child = PackingState(inp.horizon, inp.q_min, inp.reserved_term)
    apps_by_id = {app.id: app for app in inp.apps}
    needed_total = sum(app.duration for app in inp.apps)

    opening: dict[int, tuple[list[InstanceRecord], list[InstanceRecord]]] = {}
    for side, parent in enumerate((a, b)):
        for inst in _rank_instances(parent.state):
            opening.setdefault(inst.begin, ([], []))[side].append(inst)

    empty = child.app_assign
    for t in sorted(opening):
        if child.assigned_count == needed_total:
            break
        first, second = opening[t]
        for pair in zip_longest(first, second):
            for inst in pair:
                if inst is None:
                    continue
                taken = False
                for app_id, slots in inst.hosted.items():
                    held = empty.get(app_id)
                    if held is not None and not held.keys().isdisjoint(slots):
                        taken = True
                        break
                if taken:
                    continue
                adopted = child.provision(inst.type_ref, inst.begin, inst.end)
                for app_id, slots in sorted(inst.hosted.items()):
                    child.assign(adopted, apps_by_id[app_id], sorted(slots))

    # adopted instances inherit feasibility from their parents; prune is a
    # safety net for the constraint checks all the same
    for inst in list(child.instances):
        if not child.qos.ok_all(inst.mu, inst.var, inst.type_ref.capacity):
            child.remove_instance(inst)

    offspring = Chromosome(child, inp, a.cache)
    orphans = [app for app in inp.apps if child.missing_slots(app)]
    return insertion_heuristic(offspring, orphans, rng)


def mutate(c: Chromosome, rng: random.Random) -> Chromosome:
    """Dominance mutation: free random instances, let big apps displace pairs.

    Each instance is removed with probability 1/4.  Every app left with no
    assignment at all then looks for a host carrying a two-app partition
    it dominates (extent covers the pair's slots, mu_a strictly above the
    pair's combined mu, QoS still holding after the swap); winners take
    the host, losers and all other orphans go through the insertion
    heuristic.
    """
    state = c.state
    apps_by_id = {app.id: app for app in c.inp.apps}
    for inst in list(state.instances):
        if rng.random() < 0.25:
            state.remove_instance(inst)

    fully_unassigned = [
        app for app in c.inp.apps if app.id not in state.app_assign
    ]
    for app in sort_applications(fully_unassigned):
        _try_dominance_swap(state, app, apps_by_id)

    orphans = [app for app in c.inp.apps if state.missing_slots(app)]
    return insertion_heuristic(c, orphans, rng)


def _try_dominance_swap(
    state: PackingState, app: Application, apps_by_id: dict[str, Application]
) -> bool:
    sq = app.sigma * app.sigma
    for host in state.instances:
        if not state.market_ok(app, host.type_ref):
            continue
        if not host.covers_range(app.start, app.finish):
            continue
        # partition candidates: co-tenants living entirely inside the extent
        inside = sorted(
            aid
            for aid, slots in host.hosted.items()
            if min(slots) >= app.start and max(slots) < app.finish
        )
        if len(inside) < 2:
            continue
        lo = app.start - host.begin
        hi = app.finish - host.begin
        for p1_id, p2_id in combinations(inside, 2):
            p1 = apps_by_id[p1_id]
            p2 = apps_by_id[p2_id]
            if not app.mu > p1.mu + p2.mu:
                continue
            slots1 = host.hosted[p1_id]
            slots2 = host.hosted[p2_id]
            mu = host.mu[lo:hi].copy()
            var = host.var[lo:hi].copy()
            for p, slots in ((p1, slots1), (p2, slots2)):
                for t in slots:
                    mu[t - app.start] -= p.mu
                    var[t - app.start] -= p.sigma * p.sigma
            mu += app.mu
            var += sq
            if not state.qos.ok_all(mu, var.clip(min=0.0), host.type_ref.capacity):
                continue
            state.unassign(host, p1, sorted(slots1))
            state.unassign(host, p2, sorted(slots2))
            state.assign(host, app, app.slots)
            return True
    return False


def insertion_heuristic(
    c: Chromosome, orphans: Iterable[Application], rng: random.Random
) -> Chromosome:
    """Re-home orphaned demand: first fit on existing hosts, else a random
    feasible new instance per contiguous uncovered run."""
    state = c.state
    types_sorted = sort_instance_types(c.inp.types)
    for app in sort_applications(orphans):
        missing = state.missing_slots(app)
        if not missing:
            continue
        runs = (
            [(app.start, app.finish)] if not app.preemptible else contiguous_runs(missing)
        )
        for lo, hi in runs:
            run = range(lo, hi)
            placed = False
            for inst in state.instances:
                if state.fits_on(inst, app, run):
                    state.assign(inst, app, run)
                    placed = True
                    break
            if placed:
                continue
            options = _new_instance_options(state, app, types_sorted, lo, hi, c.cache)
            if not options:
                raise InfeasibleAppError(
                    app.name, "no instance type has enough capacity for it alone"
                )
            t, begin, end = options[rng.randrange(len(options))]
            inst = state.provision(t, begin, end)
            state.assign(inst, app, run)
    return c


def merge_survivors(
    population: Sequence[Chromosome], offspring: Sequence[Chromosome], cfg: GaConfig
) -> list[Chromosome]:
    """Keep the cheapest population_size individuals; incumbents win ties."""
    combined = list(population) + list(offspring)
    combined.sort(key=fitness)
    return combined[: cfg.population_size]


def run(
    inp: ErichInput,
    cfg: GaConfig | None = None,
    progress_sink: ProgressSink | None = None,
) -> tuple[Allocation, list[tuple[int, float, float]]]:
    """Full evolutionary loop; returns the best allocation and the trace.

    The trace holds one (generation, best_cost, mean_cost) entry per
    generation including generation 0 (the initial population).  The loop
    stops at max_generations, after stagnation_window generations without
    improvement of the best cost, or when the population cost spread
    (max - min) / min falls below convergence_epsilon.
    """
    if cfg is None:
        cfg = GaConfig()
    rng = random.Random(cfg.seed)
    population = init_population(inp, cfg, rng)
    trace: list[tuple[int, float, float]] = []

    def record(generation: int) -> tuple[float, float]:
        costs = [fitness(c) for c in population]
        best = min(costs)
        mean = sum(costs) / len(costs)
        trace.append((generation, best, mean))
        if progress_sink is not None:
            progress_sink(generation, best, mean)
        return best, max(costs)

    def converged(best: float, worst: float) -> bool:
        if best == 0.0:
            return worst == 0.0
        return (worst - best) / best < cfg.convergence_epsilon

    best, worst = record(0)
    if not converged(best, worst):
        streak = 0
        pair_count = (cfg.population_size // 2) * 2
        for generation in range(1, cfg.max_generations + 1):
            offspring: list[Chromosome] = []
            for pa, pb in select_parents(population, pair_count, rng):
                for child in (crossover(pa, pb, rng), crossover(pb, pa, rng)):
                    if rng.random() < cfg.mutation_rate:
                        child = mutate(child, rng)
                    offspring.append(child)
            population = merge_survivors(population, offspring, cfg)
            new_best, worst = record(generation)
            if new_best == best:
                streak += 1
            else:
                streak = 0
                best = new_best
            if streak >= cfg.stagnation_window:
                break
            if converged(best, worst):
                break

    champion = min(population, key=fitness)
    parameters = dict(cfg.to_dict())
    parameters.update(
        q_min=inp.q_min, horizon=inp.horizon, reserved_term=champion.state.reserved_term
    )
    return champion.decode(parameters), trace
