"""Greedy four-stage portfolio optimizer.

Stage 1 sorts applications and instance types; stage 2 packs every
non-preemptible application onto reserved instances first-fit-decreasing;
stage 3 tries to condense the reserved fleet by re-homing its tenants onto
cheaper on-demand capacity; stage 4 scatters preemptible applications
slot-by-slot over existing slack and fills the remaining gaps with spot
instances.  The whole pipeline is deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .domain import (
    Algorithm,
    Allocation,
    Application,
    InfeasibleAppError,
    InstanceType,
    MarketSpace,
)
from .packing import PackingState, contiguous_runs

__all__ = [
    "ErichInput",
    "sort_applications",
    "sort_instance_types",
    "stage2_assign_reserved",
    "stage3_condense",
    "stage4_assign_preemptible",
    "optimize",
]


@dataclass(frozen=True)
class ErichInput:
    """Problem instance: partitioned applications and market catalogs."""

    non_preemptible: tuple[Application, ...]
    preemptible: tuple[Application, ...]
    reserved_types: tuple[InstanceType, ...]
    on_demand_types: tuple[InstanceType, ...]
    spot_types: tuple[InstanceType, ...]
    q_min: float
    horizon: int
    reserved_term: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "non_preemptible", tuple(self.non_preemptible))
        object.__setattr__(self, "preemptible", tuple(self.preemptible))
        object.__setattr__(self, "reserved_types", tuple(self.reserved_types))
        object.__setattr__(self, "on_demand_types", tuple(self.on_demand_types))
        object.__setattr__(self, "spot_types", tuple(self.spot_types))
        for app in self.non_preemptible:
            if app.preemptible:
                raise ValueError(f"app {app.name!r} is preemptible but listed as non-preemptible")
        for app in self.preemptible:
            if not app.preemptible:
                raise ValueError(f"app {app.name!r} is non-preemptible but listed as preemptible")
        buckets = (
            (self.reserved_types, MarketSpace.RESERVED),
            (self.on_demand_types, MarketSpace.ON_DEMAND),
            (self.spot_types, MarketSpace.SPOT),
        )
        for types, market in buckets:
            for t in types:
                if t.market is not market:
                    raise ValueError(f"type {t.name!r} is {t.market.value}, not {market.value}")
        if not 0.0 <= self.q_min <= 1.0:
            raise ValueError(f"q_min must lie in [0, 1], got {self.q_min}")
        if self.horizon < 1:
            raise ValueError(f"horizon must be >= 1, got {self.horizon}")
        for app in self.apps:
            if app.finish > self.horizon:
                raise ValueError(
                    f"app {app.name!r} finishes at {app.finish}, beyond horizon {self.horizon}"
                )
        if self.reserved_term is not None and self.reserved_term < 1:
            raise ValueError(f"reserved_term must be >= 1, got {self.reserved_term}")

    @property
    def apps(self) -> tuple[Application, ...]:
        return self.non_preemptible + self.preemptible

    @property
    def types(self) -> tuple[InstanceType, ...]:
        return self.reserved_types + self.on_demand_types + self.spot_types

    @classmethod
    def from_sets(
        cls,
        apps: Iterable[Application],
        types: Iterable[InstanceType],
        q_min: float,
        horizon: int | None = None,
        reserved_term: int | None = None,
    ) -> "ErichInput":
        """Partition mixed application and type collections by their flags."""
        apps = list(apps)
        types = list(types)
        if horizon is None:
            horizon = max((a.finish for a in apps), default=1)
        return cls(
            non_preemptible=tuple(a for a in apps if not a.preemptible),
            preemptible=tuple(a for a in apps if a.preemptible),
            reserved_types=tuple(t for t in types if t.market is MarketSpace.RESERVED),
            on_demand_types=tuple(t for t in types if t.market is MarketSpace.ON_DEMAND),
            spot_types=tuple(t for t in types if t.market is MarketSpace.SPOT),
            q_min=q_min,
            horizon=horizon,
            reserved_term=reserved_term,
        )


def sort_applications(apps: Iterable[Application]) -> list[Application]:
    """Earliest start first; ties broken by larger sigma, then by name."""
    return sorted(apps, key=lambda a: (a.start, -a.sigma, a.name))


def sort_instance_types(types: Iterable[InstanceType]) -> list[InstanceType]:
    """Cheapest price per capacity first; ties prefer the larger instance."""
    return sorted(types, key=lambda t: (t.price_per_capacity, -t.capacity, t.name))


def _new_state(inp: ErichInput) -> PackingState:
    return PackingState(inp.horizon, inp.q_min, inp.reserved_term)


def stage2_assign_reserved(
    inp: ErichInput,
    apps: Sequence[Application] | None = None,
    reserved_types: Sequence[InstanceType] | None = None,
) -> PackingState:
    """Pack non-preemptible apps onto reserved instances, first fit decreasing."""
    if apps is None:
        apps = sort_applications(inp.non_preemptible)
    if reserved_types is None:
        reserved_types = sort_instance_types(inp.reserved_types)
    state = _new_state(inp)
    for app in apps:
        placed = False
        for inst in state.instances:
            if state.fits_on(inst, app):
                state.assign(inst, app, app.slots)
                placed = True
                break
        if placed:
            continue
        begin, end = state.reserved_window(app.start)
        if app.finish > end:
            raise InfeasibleAppError(
                app.name,
                f"extent [{app.start}, {app.finish}) exceeds the reserved term window "
                f"[{begin}, {end})",
            )
        for t in reserved_types:
            if state.solo_feasible(t, app):
                inst = state.provision(t, begin, end)
                state.assign(inst, app, app.slots)
                placed = True
                break
        if not placed:
            raise InfeasibleAppError(
                app.name, "no reserved instance type has enough capacity for it alone"
            )
    return state


def stage3_condense(state: PackingState, inp: ErichInput) -> PackingState:
    """Try removing each reserved instance, re-homing its apps more cheaply.

    A removal is adopted only when the rebuilt portfolio costs strictly
    less; otherwise the original stands.  Re-homing is first fit over the
    surviving instances, letting on-demand envelopes grow contiguously,
    and falls back to fresh on-demand instances.
    """
    apps_by_id = {a.id: a for a in inp.non_preemptible}
    on_types = sort_instance_types(inp.on_demand_types)
    reserved_ids = [
        inst.id for inst in state.instances if inst.type_ref.market is MarketSpace.RESERVED
    ]
    for rid in reserved_ids:
        if rid not in state.by_id:
            continue
        tmp = state.clone()
        orphaned = tmp.remove_instance(tmp.by_id[rid])
        orphans = sort_applications(apps_by_id[app_id] for app_id in orphaned)
        ok = True
        for app in orphans:
            placed = False
            for inst in tmp.instances:
                if tmp.fits_on(inst, app, allow_growth=True):
                    tmp.assign_growing(inst, app)
                    placed = True
                    break
            if not placed:
                for t in on_types:
                    if tmp.solo_feasible(t, app):
                        inst = tmp.provision(t, app.start, app.finish)
                        tmp.assign(inst, app, app.slots)
                        placed = True
                        break
            if not placed:
                ok = False
                break
        if ok and tmp.cost() < state.cost():
            state = tmp
    return state


def stage4_assign_preemptible(
    state: PackingState,
    inp: ErichInput,
    apps: Sequence[Application] | None = None,
    spot_types: Sequence[InstanceType] | None = None,
) -> PackingState:
    """Place preemptible apps slot-by-slot on slack, then spot-fill the gaps."""
    if apps is None:
        apps = sort_applications(inp.preemptible)
    if spot_types is None:
        spot_types = sort_instance_types(inp.spot_types)
    for app in apps:
        uncovered: list[int] = []
        for t in app.slots:
            placed = False
            for inst in state.instances:
                if inst.covers(t) and state.fits_slot(inst, app, t):
                    state.assign(inst, app, (t,))
                    placed = True
                    break
            if not placed:
                uncovered.append(t)
        for gap_begin, gap_end in contiguous_runs(uncovered):
            placed = False
            for t in spot_types:
                if state.solo_feasible(t, app):
                    inst = state.provision(t, gap_begin, gap_end)
                    state.assign(inst, app, range(gap_begin, gap_end))
                    placed = True
                    break
            if not placed:
                raise InfeasibleAppError(
                    app.name, "no spot instance type has enough capacity for it alone"
                )
    return state




def optimize(inp: ErichInput) -> Allocation:
    """Run all four stages and freeze the result into an Allocation."""
    state = stage2_assign_reserved(inp)
    state = stage3_condense(state, inp)
    state = stage4_assign_preemptible(state, inp)
    return state.to_allocation(
        inp.apps,
        Algorithm.ERICH,
        parameters={
            "q_min": inp.q_min,
            "horizon": inp.horizon,
            "reserved_term": state.reserved_term,
        },
    )
