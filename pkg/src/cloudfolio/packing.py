"""Mutable allocation-under-construction shared by both optimizers.

A PackingState tracks provisioned instances with per-slot demand
accumulators (mean and variance arrays over each instance's envelope) so
that QoS admission checks are O(extent) numpy operations instead of
re-aggregating co-tenants on every probe.  The optimizers mutate a state
and finally freeze it into a domain.Allocation.
"""

from __future__ import annotations

import math
from itertools import repeat
from typing import Iterable, Mapping, Sequence

import numpy as np

from .domain import (
    Algorithm,
    Allocation,
    AllocationStatus,
    Application,
    InstanceType,
    MarketSpace,
    ProvisionedInstance,
    TimeSlot,
    build_allocation,
)
from .feasibility import normal_quantile

__all__ = ["QosRule", "InstanceRecord", "PackingState", "contiguous_runs"]


class QosRule:
    """Capacity admission test for one q_min, with the quantile precomputed."""

    def __init__(self, q_min: float):
        if not 0.0 <= q_min <= 1.0:
            raise ValueError(f"q_min must lie in [0, 1], got {q_min}")
        self.q_min = q_min
        self.z = normal_quantile(q_min) if 0.0 < q_min < 1.0 else 0.0

    def ok(self, mu: float, var: float, capacity: float) -> bool:
        if self.q_min == 0.0:
            return True
        if self.q_min == 1.0:
            return var == 0.0 and mu <= capacity
        return mu + self.z * math.sqrt(var) <= capacity

    def ok_all(self, mu: np.ndarray, var: np.ndarray, capacity: float) -> bool:
        """All slots in the given accumulator views pass the test."""
        if self.q_min == 0.0:
            return True
        if self.q_min == 1.0:
            return bool(np.all(var == 0.0) and np.all(mu <= capacity))
        return bool(np.all(mu + self.z * np.sqrt(var) <= capacity))

    def solo_ok(self, app: Application, capacity: float) -> bool:
        return self.ok(app.mu, app.sigma * app.sigma, capacity)


class InstanceRecord:
    """One provisioned instance with its per-slot demand accumulators.

    ``mu`` and ``var`` are indexed relative to ``begin``; ``hosted`` maps
    app id to the set of slots the app occupies here.
    """

    __slots__ = ("id", "type_ref", "begin", "end", "mu", "var", "hosted")

    def __init__(self, iid: str, type_ref: InstanceType, begin: TimeSlot, end: TimeSlot):
        if not 0 <= begin < end:
            raise ValueError(f"instance {iid!r}: envelope [{begin}, {end}) is invalid")
        self.id = iid
        self.type_ref = type_ref
        self.begin = begin
        self.end = end
        self.mu = np.zeros(end - begin)
        self.var = np.zeros(end - begin)
        self.hosted: dict[str, set[TimeSlot]] = {}

    @property
    def duration(self) -> int:
        return self.end - self.begin

    @property
    def cost(self) -> float:
        return self.type_ref.price_per_slot * self.duration

    def covers(self, slot: TimeSlot) -> bool:
        return self.begin <= slot < self.end

    def covers_range(self, start: TimeSlot, stop: TimeSlot) -> bool:
        return self.begin <= start and stop <= self.end

    def slot_view(self, slots: Sequence[TimeSlot]) -> tuple[np.ndarray, np.ndarray]:
        """Accumulator views for the given absolute slots (must be covered)."""
        if isinstance(slots, range):
            lo = slots.start - self.begin
            hi = slots.stop - self.begin
            return self.mu[lo:hi], self.var[lo:hi]
        idx = np.asarray(slots, dtype=np.intp) - self.begin
        return self.mu[idx], self.var[idx]

    def avg_utilization(self) -> float:
        """Mean over envelope slots of assigned expected demand / capacity."""
        return float(self.mu.sum()) / (self.duration * self.type_ref.capacity)

    def grow(self, begin: TimeSlot, end: TimeSlot) -> None:
        """Extend the envelope to [begin, end), padding accumulators with zeros."""
        if begin > self.begin or end < self.end:
            raise ValueError("envelopes only grow")
        pre = self.begin - begin
        post = end - self.end
        if pre == 0 and post == 0:
            return
        self.mu = np.concatenate([np.zeros(pre), self.mu, np.zeros(post)])
        self.var = np.concatenate([np.zeros(pre), self.var, np.zeros(post)])
        self.begin = begin
        self.end = end


class PackingState:
    """Instances plus the app-to-instance slot assignment being built."""

    def __init__(self, horizon: int, q_min: float, reserved_term: int | None = None):
        if horizon < 1:
            raise ValueError(f"horizon must be >= 1, got {horizon}")
        self.horizon = horizon
        self.q_min = q_min
        self.qos = QosRule(q_min)
        self.reserved_term = reserved_term if reserved_term is not None else horizon
        if self.reserved_term < 1:
            raise ValueError(f"reserved_term must be >= 1, got {self.reserved_term}")
        self.instances: list[InstanceRecord] = []
        self.by_id: dict[str, InstanceRecord] = {}
        # per app: slot -> hosting instance id
        self.app_assign: dict[str, dict[TimeSlot, str]] = {}
        self.assigned_count = 0
        self._counter = 0

    # -- provisioning ---------------------------------------------------

    def provision(self, type_ref: InstanceType, begin: TimeSlot, end: TimeSlot) -> InstanceRecord:
        self._counter += 1
        inst = InstanceRecord(f"i-{self._counter:04d}", type_ref, begin, end)
        self.instances.append(inst)
        self.by_id[inst.id] = inst
        return inst

    def remove_instance(self, inst: InstanceRecord) -> dict[str, set[TimeSlot]]:
        """Drop an instance; returns the orphaned app-slot needs."""
        orphaned = {app_id: set(slots) for app_id, slots in inst.hosted.items()}
        for app_id, slots in orphaned.items():
            held = self.app_assign[app_id]
            for t in slots:
                del held[t]
            if not held:
                del self.app_assign[app_id]
            self.assigned_count -= len(slots)
        self.instances.remove(inst)
        del self.by_id[inst.id]
        return orphaned

    def reserved_window(self, start: TimeSlot) -> tuple[TimeSlot, TimeSlot]:
        """The fixed-term billing window whose aligned boundary precedes start."""
        lo = (start // self.reserved_term) * self.reserved_term
        return lo, lo + self.reserved_term

    # -- assignment -----------------------------------------------------

    def assign(self, inst: InstanceRecord, app: Application, slots: Iterable[TimeSlot]) -> None:
        if isinstance(slots, range):
            if not inst.covers_range(slots.start, slots.stop):
                raise ValueError(f"slots {slots} outside envelope of {inst.id}")
            lo, hi = slots.start - inst.begin, slots.stop - inst.begin
            held = self.app_assign.setdefault(app.id, {})
            if held and not held.keys().isdisjoint(slots):
                raise ValueError(f"app {app.id} already assigned within {slots}")
            held.update(zip(slots, repeat(inst.id)))
            inst.mu[lo:hi] += app.mu
            inst.var[lo:hi] += app.sigma * app.sigma
            count = len(slots)
        else:
            slot_list = list(slots)
            for t in slot_list:
                if not inst.covers(t):
                    raise ValueError(f"slot {t} outside envelope of {inst.id}")
            held = self.app_assign.setdefault(app.id, {})
            if held and not held.keys().isdisjoint(slot_list):
                raise ValueError(f"app {app.id} already assigned within {slot_list}")
            held.update(zip(slot_list, repeat(inst.id)))
            idx = np.asarray(slot_list, dtype=np.intp) - inst.begin
            inst.mu[idx] += app.mu
            inst.var[idx] += app.sigma * app.sigma
            count = len(slot_list)
            slots = slot_list
        self.assigned_count += count
        inst.hosted.setdefault(app.id, set()).update(slots)

    def unassign(self, inst: InstanceRecord, app: Application, slots: Iterable[TimeSlot]) -> None:
        slot_list = list(slots)
        held = self.app_assign[app.id]
        for t in slot_list:
            del held[t]
        if not held:
            del self.app_assign[app.id]
        self.assigned_count -= len(slot_list)
        idx = np.asarray(slot_list, dtype=np.intp) - inst.begin
        inst.mu[idx] -= app.mu
        inst.var[idx] -= app.sigma * app.sigma
        # float residue from add/subtract round-trips must not go negative
        np.maximum(inst.var, 0.0, out=inst.var)
        np.maximum(inst.mu, 0.0, out=inst.mu)
        left = inst.hosted[app.id] - set(slot_list)
        if left:
            inst.hosted[app.id] = left
        else:
            del inst.hosted[app.id]

    # -- admission checks -------------------------------------------------

    def market_ok(self, app: Application, type_ref: InstanceType) -> bool:
        return app.preemptible or not type_ref.spot_only_flag

    def fits_on(
        self,
        inst: InstanceRecord,
        app: Application,
        slots: Sequence[TimeSlot] | None = None,
        allow_growth: bool = False,
    ) -> bool:
        """Can the app join this instance at the given slots (default: extent)?

        With ``allow_growth`` (on-demand instances only) the envelope may
        extend to cover the slots provided the union stays contiguous.
        """
        if slots is None:
            slots = app.slots
        if not self.market_ok(app, inst.type_ref):
            return False
        lo = slots.start if isinstance(slots, range) else min(slots)
        hi = slots.stop if isinstance(slots, range) else max(slots) + 1
        if not inst.covers_range(lo, hi):
            if not (
                allow_growth
                and inst.type_ref.market is MarketSpace.ON_DEMAND
                and lo <= inst.end
                and hi >= inst.begin
            ):
                return False
            # growth region carries no existing load; check only the overlap
            olo, ohi = max(lo, inst.begin), min(hi, inst.end)
            if olo >= ohi:
                return self.qos.solo_ok(app, inst.type_ref.capacity)
            if isinstance(slots, range):
                overlap: Sequence[TimeSlot] = range(olo, ohi)
            else:
                overlap = [t for t in slots if inst.covers(t)]
                if not overlap:
                    return self.qos.solo_ok(app, inst.type_ref.capacity)
            mu, var = inst.slot_view(overlap)
            return self.qos.solo_ok(app, inst.type_ref.capacity) and self.qos.ok_all(
                mu + app.mu, var + app.sigma * app.sigma, inst.type_ref.capacity
            )
        mu, var = inst.slot_view(slots)
        return self.qos.ok_all(
            mu + app.mu, var + app.sigma * app.sigma, inst.type_ref.capacity
        )

    def fits_slot(self, inst: InstanceRecord, app: Application, t: TimeSlot) -> bool:
        """Single-slot admission probe (market and QoS; envelope not checked)."""
        if not self.market_ok(app, inst.type_ref):
            return False
        i = t - inst.begin
        return self.qos.ok(
            float(inst.mu[i]) + app.mu,
            float(inst.var[i]) + app.sigma * app.sigma,
            inst.type_ref.capacity,
        )

    def assign_growing(self, inst: InstanceRecord, app: Application,
                       slots: Sequence[TimeSlot] | None = None) -> None:
        """Assign, first growing an on-demand envelope to cover the slots."""
        if slots is None:
            slots = app.slots
        lo = slots.start if isinstance(slots, range) else min(slots)
        hi = slots.stop if isinstance(slots, range) else max(slots) + 1
        if not inst.covers_range(lo, hi):
            inst.grow(min(lo, inst.begin), max(hi, inst.end))
        self.assign(inst, app, slots)

    def solo_feasible(self, type_ref: InstanceType, app: Application) -> bool:
        """Could the app run alone on a fresh instance of this type?"""
        return self.market_ok(app, type_ref) and self.qos.solo_ok(app, type_ref.capacity)

    # -- output ---------------------------------------------------------

    def cost(self) -> float:
        return sum(inst.cost for inst in self.instances)

    def assigned_slots(self, app_id: str) -> Mapping[TimeSlot, str]:
        return self.app_assign.get(app_id, {})

    def missing_slots(self, app: Application) -> list[TimeSlot]:
        held = self.app_assign.get(app.id)
        if not held:
            return list(app.slots)
        return [t for t in app.slots if t not in held]

    def clone(self) -> "PackingState":
        other = PackingState(self.horizon, self.q_min, self.reserved_term)
        for inst in self.instances:
            copy = InstanceRecord(inst.id, inst.type_ref, inst.begin, inst.end)
            copy.mu = inst.mu.copy()
            copy.var = inst.var.copy()
            copy.hosted = {app_id: set(slots) for app_id, slots in inst.hosted.items()}
            other.instances.append(copy)
            other.by_id[copy.id] = copy
        other.app_assign = {app_id: dict(held) for app_id, held in self.app_assign.items()}
        other.assigned_count = self.assigned_count
        other._counter = self._counter
        return other

    def to_allocation(
        self,
        apps: Iterable[Application],
        algorithm: Algorithm,
        parameters: Mapping | None = None,
        portfolio_id: str = "",
        portfolio_version: int = 0,
        status: AllocationStatus = AllocationStatus.COMPLETED,
        alloc_id: str | None = None,
    ) -> Allocation:
        frozen = tuple(
            ProvisionedInstance(inst.id, inst.type_ref, inst.begin, inst.end)
            for inst in self.instances
        )
        assignment = {
            (app_id, t): iid
            for app_id, held in self.app_assign.items()
            for t, iid in held.items()
        }
        return build_allocation(
            frozen,
            assignment,
            apps,
            algorithm,
            parameters=dict(parameters or {}),
            portfolio_id=portfolio_id,
            portfolio_version=portfolio_version,
            status=status,
            alloc_id=alloc_id,
        )


def contiguous_runs(slots: Sequence[TimeSlot]) -> list[tuple[TimeSlot, TimeSlot]]:
    """Split ascending slots into maximal half-open runs."""
    runs: list[tuple[TimeSlot, TimeSlot]] = []
    for t in slots:
        if runs and runs[-1][1] == t:
            runs[-1] = (runs[-1][0], t + 1)
        else:
            runs.append((t, t + 1))
    return runs
