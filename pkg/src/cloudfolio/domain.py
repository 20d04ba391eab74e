"""Core value types of the portfolio optimization problem.

Time is discrete: a slot is a non-negative integer index into the planning
horizon [0, H), and every interval in this package is half-open.  An
application occupies slots start .. finish-1; a provisioned instance exists
for slots begin .. end-1 and is billed for exactly (end - begin) slots.
Capacity and currency are dimensionless scalars (one slot is nominally one
hour, but no unit arithmetic is performed).

All types are immutable value objects; mutation happens by constructing a
new value (see dataclasses.replace).
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterable, Mapping

__all__ = [
    "TimeSlot",
    "MarketSpace",
    "Provider",
    "Algorithm",
    "AllocationStatus",
    "Application",
    "InstanceType",
    "ProvisionedInstance",
    "Portfolio",
    "MarketStats",
    "Allocation",
    "Violation",
    "InfeasibleAppError",
    "UnresolvedReferenceError",
    "validate_allocation",
    "allocation_cost",
    "build_allocation",
    "canonical_json",
]

# A slot is just an index; kept as a plain int throughout.
TimeSlot = int


class MarketSpace(str, Enum):
    """Purchasing channel an instance type is sold on."""

    RESERVED = "reserved"
    ON_DEMAND = "on_demand"
    SPOT = "spot"


class Provider(str, Enum):
    AWS = "aws"
    GOOGLE_CLOUD = "google_cloud"
    AZURE = "azure"
    ALIBABA = "alibaba"


class Algorithm(str, Enum):
    ERICH = "erich"
    GEORG = "georg"


class AllocationStatus(str, Enum):
    PENDING = "pending"
    COMPLETED = "completed"
    FAILED = "failed"


class InfeasibleAppError(Exception):
    """No instance type can host the named application."""

    def __init__(self, app_name: str, reason: str = ""):
        self.app_name = app_name
        self.reason = reason
        msg = f"application {app_name!r} cannot be hosted by any available instance type"
        if reason:
            msg += f": {reason}"
        super().__init__(msg)


class UnresolvedReferenceError(LookupError):
    """An allocation references an id that does not resolve."""


@dataclass(frozen=True)
class Application:
    """A workload with probabilistic demand and a temporal extent.

    Demand per slot is modeled as Normal(mu, sigma); preemptible workloads
    tolerate interruption, may migrate hosts between slots, and are the
    only ones allowed on spot instances.
    """

    id: str
    name: str
    mu: float
    sigma: float
    preemptible: bool
    start: TimeSlot
    finish: TimeSlot  # exclusive

    def __post_init__(self):
        if self.start < 0:
            raise ValueError(f"app {self.name!r}: start must be >= 0, got {self.start}")
        if not self.start < self.finish:
            raise ValueError(
                f"app {self.name!r}: start must be strictly before finish "
                f"({self.start} >= {self.finish})"
            )
        if self.mu < 0:
            raise ValueError(f"app {self.name!r}: mu must be >= 0, got {self.mu}")
        if self.sigma < 0:
            raise ValueError(f"app {self.name!r}: sigma must be >= 0, got {self.sigma}")

    @property
    def slots(self) -> range:
        return range(self.start, self.finish)

    @property
    def duration(self) -> int:
        return self.finish - self.start

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "name": self.name,
            "mu": self.mu,
            "sigma": self.sigma,
            "preemptible": self.preemptible,
            "start": self.start,
            "finish": self.finish,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "Application":
        return cls(
            id=str(d["id"]),
            name=str(d["name"]),
            mu=float(d["mu"]),
            sigma=float(d["sigma"]),
            preemptible=bool(d["preemptible"]),
            start=int(d["start"]),
            finish=int(d["finish"]),
        )


@dataclass(frozen=True)
class InstanceType:
    """A purchasable capacity at a per-slot price on one market space.

    ``spot_only_flag`` marks types that may only host preemptible
    applications; it is true exactly for the spot market and is derived
    from ``market`` when omitted.
    """

    id: str
    provider: Provider
    name: str
    market: MarketSpace
    capacity: float
    price_per_slot: float
    spot_only_flag: bool | None = None

    def __post_init__(self):
        if self.capacity <= 0:
            raise ValueError(f"type {self.name!r}: capacity must be > 0, got {self.capacity}")
        if self.price_per_slot <= 0:
            raise ValueError(
                f"type {self.name!r}: price_per_slot must be > 0, got {self.price_per_slot}"
            )
        is_spot = self.market is MarketSpace.SPOT
        if self.spot_only_flag is None:
            object.__setattr__(self, "spot_only_flag", is_spot)
        elif self.spot_only_flag != is_spot:
            raise ValueError(
                f"type {self.name!r}: spot_only_flag must hold exactly for the spot market"
            )

    @property
    def price_per_capacity(self) -> float:
        return self.price_per_slot / self.capacity

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "provider": self.provider.value,
            "name": self.name,
            "market": self.market.value,
            "capacity": self.capacity,
            "price_per_slot": self.price_per_slot,
            "spot_only_flag": self.spot_only_flag,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "InstanceType":
        return cls(
            id=str(d["id"]),
            provider=Provider(d["provider"]),
            name=str(d["name"]),
            market=MarketSpace(d["market"]),
            capacity=float(d["capacity"]),
            price_per_slot=float(d["price_per_slot"]),
            spot_only_flag=bool(d["spot_only_flag"]) if "spot_only_flag" in d else None,
        )


@dataclass(frozen=True)
class ProvisionedInstance:
    """A concrete instance of a type, running over the envelope [begin, end).

    Its cost contribution is price_per_slot * (end - begin), independent of
    how much of the envelope is actually occupied.
    """

    id: str
    type_ref: InstanceType
    begin: TimeSlot
    end: TimeSlot  # exclusive

    def __post_init__(self):
        if not 0 <= self.begin < self.end:
            raise ValueError(
                f"instance {self.id!r}: envelope [{self.begin}, {self.end}) is invalid"
            )

    @property
    def duration(self) -> int:
        return self.end - self.begin

    @property
    def cost(self) -> float:
        return self.type_ref.price_per_slot * self.duration

    def covers(self, slot: TimeSlot) -> bool:
        return self.begin <= slot < self.end

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "type_ref": self.type_ref.to_dict(),
            "begin": self.begin,
            "end": self.end,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "ProvisionedInstance":
        return cls(
            id=str(d["id"]),
            type_ref=InstanceType.from_dict(d["type_ref"]),
            begin=int(d["begin"]),
            end=int(d["end"]),
        )


@dataclass(frozen=True)
class Portfolio:
    """A named, versioned set of applications plus optimization settings.

    The version starts at 1 and strictly increases on every mutation of the
    portfolio or of any application it contains (enforced by the
    persistence layer).
    """

    id: str
    name: str
    providers: frozenset[Provider]
    q_min: float
    app_ids: frozenset[str]
    version: int = 1

    def __post_init__(self):
        if not self.providers:
            raise ValueError(f"portfolio {self.name!r}: providers must be non-empty")
        if not 0.0 <= self.q_min <= 1.0:
            raise ValueError(f"portfolio {self.name!r}: q_min must be in [0, 1], got {self.q_min}")
        if self.version < 1:
            raise ValueError(f"portfolio {self.name!r}: version must be >= 1, got {self.version}")
        object.__setattr__(self, "providers", frozenset(self.providers))
        object.__setattr__(self, "app_ids", frozenset(self.app_ids))

    def bumped(self) -> "Portfolio":
        """Copy with the version incremented (any mutation must go through this)."""
        return replace(self, version=self.version + 1)

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "name": self.name,
            "providers": sorted(p.value for p in self.providers),
            "q_min": self.q_min,
            "app_ids": sorted(self.app_ids),
            "version": self.version,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "Portfolio":
        return cls(
            id=str(d["id"]),
            name=str(d["name"]),
            providers=frozenset(Provider(p) for p in d["providers"]),
            q_min=float(d["q_min"]),
            app_ids=frozenset(str(a) for a in d["app_ids"]),
            version=int(d.get("version", 1)),
        )


@dataclass(frozen=True)
class MarketStats:
    """Cost and utilization figures for one market space of an allocation."""

    instance_count: int
    total_cost: float
    capacity_slots: float
    assigned_demand: float

    @property
    def utilization(self) -> float:
        return self.assigned_demand / self.capacity_slots if self.capacity_slots > 0 else 0.0

    def to_dict(self) -> dict:
        return {
            "instance_count": self.instance_count,
            "total_cost": self.total_cost,
            "capacity_slots": self.capacity_slots,
            "assigned_demand": self.assigned_demand,
            "utilization": self.utilization,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "MarketStats":
        return cls(
            instance_count=int(d["instance_count"]),
            total_cost=float(d["total_cost"]),
            capacity_slots=float(d["capacity_slots"]),
            assigned_demand=float(d["assigned_demand"]),
        )


@dataclass(frozen=True)
class Allocation:
    """An assignment of applications to provisioned instances per slot.

    ``assignment`` maps (app_id, slot) to the hosting instance id; it must
    contain exactly one entry for every slot of every application's extent
    and none outside it.
    """

    id: str
    portfolio_id: str
    portfolio_version: int
    algorithm: Algorithm
    parameters: dict
    instances: tuple[ProvisionedInstance, ...]
    assignment: Mapping[tuple[str, TimeSlot], str]
    status: AllocationStatus
    total_cost: float
    mean_utilization: float
    per_market_stats: Mapping[MarketSpace, MarketStats]

    def instance_by_id(self, iid: str) -> ProvisionedInstance:
        for inst in self.instances:
            if inst.id == iid:
                return inst
        raise UnresolvedReferenceError(f"unknown instance id {iid!r}")

    def to_dict(self) -> dict:
        nested: dict[str, dict[str, str]] = {}
        for (app_id, slot), iid in sorted(self.assignment.items()):
            nested.setdefault(app_id, {})[str(slot)] = iid
        return {
            "id": self.id,
            "portfolio_id": self.portfolio_id,
            "portfolio_version": self.portfolio_version,
            "algorithm": self.algorithm.value,
            "parameters": self.parameters,
            "instances": [i.to_dict() for i in self.instances],
            "assignment": nested,
            "status": self.status.value,
            "total_cost": self.total_cost,
            "mean_utilization": self.mean_utilization,
            "per_market_stats": {
                m.value: s.to_dict() for m, s in sorted(self.per_market_stats.items())
            },
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "Allocation":
        assignment = {
            (app_id, int(slot)): iid
            for app_id, per_slot in d["assignment"].items()
            for slot, iid in per_slot.items()
        }
        return cls(
            id=str(d["id"]),
            portfolio_id=str(d["portfolio_id"]),
            portfolio_version=int(d["portfolio_version"]),
            algorithm=Algorithm(d["algorithm"]),
            parameters=dict(d["parameters"]),
            instances=tuple(ProvisionedInstance.from_dict(i) for i in d["instances"]),
            assignment=assignment,
            status=AllocationStatus(d["status"]),
            total_cost=float(d["total_cost"]),
            mean_utilization=float(d["mean_utilization"]),
            per_market_stats={
                MarketSpace(m): MarketStats.from_dict(s)
                for m, s in d["per_market_stats"].items()
            },
        )


@dataclass(frozen=True)
class Violation:
    """One broken allocation constraint, naming the offending entities."""

    constraint: str
    message: str
    app_id: str | None = None
    instance_id: str | None = None
    slot: TimeSlot | None = None

    def to_dict(self) -> dict:
        return {
            "constraint": self.constraint,
            "message": self.message,
            "app_id": self.app_id,
            "instance_id": self.instance_id,
            "slot": self.slot,
        }


def allocation_cost(alloc: Allocation | Iterable[ProvisionedInstance]) -> float:
    """Total portfolio cost: the sum of price_per_slot * duration per instance."""
    instances = alloc.instances if isinstance(alloc, Allocation) else alloc
    return sum(inst.cost for inst in instances)


def build_allocation(
    instances: Iterable[ProvisionedInstance],
    assignment: Mapping[tuple[str, TimeSlot], str],
    apps: Iterable[Application],
    algorithm: Algorithm,
    parameters: dict | None = None,
    portfolio_id: str = "",
    portfolio_version: int = 0,
    status: AllocationStatus = AllocationStatus.COMPLETED,
    alloc_id: str | None = None,
) -> Allocation:
    """Assemble an Allocation, deriving cost and utilization statistics.

    When ``alloc_id`` is omitted the id is a content hash, so identical
    optimization results serialize byte-identically.
    """
    instances = tuple(instances)
    assignment = dict(assignment)
    apps_by_id = {a.id: a for a in apps}

    per_market: dict[MarketSpace, dict[str, float]] = {
        m: {"count": 0, "cost": 0.0, "cap": 0.0, "demand": 0.0} for m in MarketSpace
    }
    for inst in instances:
        acc = per_market[inst.type_ref.market]
        acc["count"] += 1
        acc["cost"] += inst.cost
        acc["cap"] += inst.type_ref.capacity * inst.duration
    market_of = {inst.id: inst.type_ref.market for inst in instances}
    for (app_id, _slot), iid in assignment.items():
        app = apps_by_id.get(app_id)
        if app is None:
            raise UnresolvedReferenceError(f"assignment references unknown app {app_id!r}")
        if iid not in market_of:
            raise UnresolvedReferenceError(f"assignment references unknown instance {iid!r}")
        per_market[market_of[iid]]["demand"] += app.mu

    stats = {
        m: MarketStats(
            instance_count=int(acc["count"]),
            total_cost=acc["cost"],
            capacity_slots=acc["cap"],
            assigned_demand=acc["demand"],
        )
        for m, acc in per_market.items()
    }
    total_cap = sum(s.capacity_slots for s in stats.values())
    total_demand = sum(s.assigned_demand for s in stats.values())
    mean_util = total_demand / total_cap if total_cap > 0 else 0.0

    alloc = Allocation(
        id=alloc_id if alloc_id is not None else "",
        portfolio_id=portfolio_id,
        portfolio_version=portfolio_version,
        algorithm=algorithm,
        parameters=dict(parameters or {}),
        instances=instances,
        assignment=assignment,
        status=status,
        total_cost=allocation_cost(instances),
        mean_utilization=mean_util,
        per_market_stats=stats,
    )
    if alloc_id is None:
        digest = hashlib.sha256(canonical_json(alloc.to_dict()).encode()).hexdigest()[:16]
        alloc = replace(alloc, id=f"alloc-{digest}")
    return alloc


def validate_allocation(
    alloc: Allocation,
    portfolio: Portfolio,
    apps: Iterable[Application],
) -> list[Violation]:
    """Check an allocation against every hard constraint of the model.

    Returns one Violation per broken constraint; an empty list means the
    allocation is feasible.  Constraint codes:

    - ``coverage``: an application must be hosted by exactly one instance
      in each slot of its extent, and in no slot outside it.
    - ``market``: a non-preemptible application may not sit on a
      spot-only instance.
    - ``envelope``: an assignment must fall inside the host's [begin, end).
    - ``qos``: per instance and slot, the aggregate Gaussian demand must
      stay below capacity with probability at least the portfolio's q_min.
    - ``total_cost``: the recorded cost must equal the sum over instances.

    Raises UnresolvedReferenceError when an assignment references an id
    that does not resolve against ``apps`` or the allocation's instances.
    """
    from . import feasibility  # late import; feasibility depends on domain types

    apps_by_id = {a.id: a for a in apps}
    inst_by_id = {i.id: i for i in alloc.instances}
    violations: list[Violation] = []

    for (app_id, slot), iid in alloc.assignment.items():
        if app_id not in apps_by_id:
            raise UnresolvedReferenceError(f"assignment references unknown app {app_id!r}")
        if iid not in inst_by_id:
            raise UnresolvedReferenceError(f"assignment references unknown instance {iid!r}")
        app = apps_by_id[app_id]
        inst = inst_by_id[iid]
        if not app.start <= slot < app.finish:
            violations.append(
                Violation(
                    "coverage",
                    f"app {app.name!r} is assigned at slot {slot}, outside its extent "
                    f"[{app.start}, {app.finish})",
                    app_id=app_id,
                    instance_id=iid,
                    slot=slot,
                )
            )
        if not app.preemptible and inst.type_ref.spot_only_flag:
            violations.append(
                Violation(
                    "market",
                    f"non-preemptible app {app.name!r} is on spot instance {iid!r}",
                    app_id=app_id,
                    instance_id=iid,
                    slot=slot,
                )
            )
        if not inst.covers(slot):
            violations.append(
                Violation(
                    "envelope",
                    f"slot {slot} lies outside instance {iid!r} envelope "
                    f"[{inst.begin}, {inst.end})",
                    app_id=app_id,
                    instance_id=iid,
                    slot=slot,
                )
            )

    for app in apps_by_id.values():
        for slot in app.slots:
            if (app.id, slot) not in alloc.assignment:
                violations.append(
                    Violation(
                        "coverage",
                        f"app {app.name!r} has no host at slot {slot}",
                        app_id=app.id,
                        slot=slot,
                    )
                )

    # Aggregate load per (instance, slot); iterate app ids sorted so the
    # Gaussian aggregation is order-stable.
    loads: dict[tuple[str, TimeSlot], list[str]] = {}
    for (app_id, slot), iid in alloc.assignment.items():
        loads.setdefault((iid, slot), []).append(app_id)
    for (iid, slot), app_ids in sorted(loads.items()):
        inst = inst_by_id[iid]
        demand = feasibility.aggregate_demand(
            (apps_by_id[a].mu, apps_by_id[a].sigma) for a in sorted(app_ids) if a in apps_by_id
        )
        if not feasibility.satisfies_qos(demand, inst.type_ref.capacity, portfolio.q_min):
            violations.append(
                Violation(
                    "qos",
                    f"instance {iid!r} at slot {slot}: aggregate demand "
                    f"({demand.mu_sum:.4g}, {demand.sigma_agg:.4g}) misses q_min="
                    f"{portfolio.q_min} for capacity {inst.type_ref.capacity}",
                    instance_id=iid,
                    slot=slot,
                )
            )

    recorded = alloc.total_cost
    actual = allocation_cost(alloc.instances)
    if not math.isclose(recorded, actual, rel_tol=1e-9, abs_tol=1e-12):
        violations.append(
            Violation(
                "total_cost",
                f"recorded total_cost {recorded} != sum over instances {actual}",
            )
        )
    return violations


def canonical_json(obj) -> str:
    """Stable JSON text: sorted keys, no whitespace variance."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False)
