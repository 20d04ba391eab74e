"""Synthetic workload and catalog generator.

Six built-in test cases pair an application-set profile with an
instance-type profile.  All sampling is moment-matched normal draws with
documented clamp floors, driven by numpy's seeded generator, so a (case,
seed) pair always reproduces the same problem instance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Mapping

import numpy as np

from .domain import Application, InstanceType, MarketSpace, Provider
from .erich import ErichInput

__all__ = [
    "ConfigurationError",
    "AppSetProfile",
    "TypeSetProfile",
    "APP_PROFILES",
    "TYPE_PROFILES",
    "CASE_PAIRINGS",
    "generate_applications",
    "generate_instance_types",
    "build_case",
]

# Floors applied to normal draws so every generated entity satisfies the
# domain invariants.
MIN_DEMAND = 0.1
MIN_SIGMA = 0.0
MIN_CAPACITY = 0.1
MIN_PRICE = 0.1


class ConfigurationError(ValueError):
    """Generator parameters that cannot produce a valid data set."""


@dataclass(frozen=True)
class AppSetProfile:
    """Target moments for one generated application set."""

    n_non_preemptible: int
    n_preemptible: int
    demand_mean: float
    demand_std: float
    deviation_mean: float
    deviation_std: float
    alloc_periods_mean: float
    alloc_periods_std: float

    def __post_init__(self):
        if self.n_non_preemptible < 0 or self.n_preemptible < 0:
            raise ConfigurationError("application counts must be >= 0")
        for name in (
            "demand_mean",
            "demand_std",
            "deviation_mean",
            "deviation_std",
            "alloc_periods_mean",
            "alloc_periods_std",
        ):
            if getattr(self, name) < 0:
                raise ConfigurationError(f"{name} must be >= 0")

    @property
    def n_total(self) -> int:
        return self.n_non_preemptible + self.n_preemptible

    def scaled_periods(self, factor: float) -> "AppSetProfile":
        """Copy with extent lengths scaled (mean and spread alike)."""
        if factor <= 0:
            raise ConfigurationError(f"period scale must be > 0, got {factor}")
        return replace(
            self,
            alloc_periods_mean=self.alloc_periods_mean * factor,
            alloc_periods_std=self.alloc_periods_std * factor,
        )

    def to_dict(self) -> dict:
        return {
            "n_non_preemptible": self.n_non_preemptible,
            "n_preemptible": self.n_preemptible,
            "demand_mean": self.demand_mean,
            "demand_std": self.demand_std,
            "deviation_mean": self.deviation_mean,
            "deviation_std": self.deviation_std,
            "alloc_periods_mean": self.alloc_periods_mean,
            "alloc_periods_std": self.alloc_periods_std,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "AppSetProfile":
        return cls(**{k: d[k] for k in cls.__dataclass_fields__})


@dataclass(frozen=True)
class TypeSetProfile:
    """Target moments for one generated instance-type catalog."""

    n_types: int
    capacity_mean: float
    capacity_std: float
    reserved_price_mean: float
    reserved_price_std: float
    on_demand_price_mean: float
    on_demand_price_std: float
    spot_price_mean: float
    spot_price_std: float

    def __post_init__(self):
        if self.n_types < 1:
            raise ConfigurationError("n_types must be >= 1")
        for name in self.__dataclass_fields__:
            if name != "n_types" and getattr(self, name) < 0:
                raise ConfigurationError(f"{name} must be >= 0")

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}

    @classmethod
    def from_dict(cls, d: Mapping) -> "TypeSetProfile":
        return cls(**{k: d[k] for k in cls.__dataclass_fields__})


APP_PROFILES: dict[int, AppSetProfile] = {
    1: AppSetProfile(14, 6, 3.2, 1.7, 0.5, 0.5, 43.1, 33.4),
    2: AppSetProfile(59, 41, 3.0, 2.6, 0.5, 0.7, 63.9, 43.9),
    3: AppSetProfile(10, 10, 3.0, 2.0, 0.7, 0.6, 212.2, 167.8),
    4: AppSetProfile(42, 58, 3.1, 2.6, 0.5, 0.6, 237.2, 171.5),
    5: AppSetProfile(7, 13, 3.1, 2.7, 0.6, 0.6, 2758.5, 1996.9),
    6: AppSetProfile(41, 59, 2.8, 2.0, 0.5, 0.6, 2871.7, 2055.6),
}

TYPE_PROFILES: dict[int, TypeSetProfile] = {
    1: TypeSetProfile(500, 9.6, 8.8, 2.3, 2.8, 3.1, 2.2, 2.5, 2.2),
    2: TypeSetProfile(500, 10.3, 11.4, 2.2, 2.4, 3.1, 2.6, 3.1, 4.8),
    3: TypeSetProfile(500, 9.8, 9.9, 2.4, 3.8, 3.1, 2.4, 2.3, 1.7),
}

# case id -> (application profile id, type profile id)
CASE_PAIRINGS: dict[int, tuple[int, int]] = {
    1: (1, 1),
    2: (2, 1),
    3: (3, 2),
    4: (4, 2),
    5: (5, 3),
    6: (6, 3),
}

_PROVIDER_WHEEL = (Provider.AWS, Provider.GOOGLE_CLOUD, Provider.AZURE, Provider.ALIBABA)
_MARKET_ORDER = (MarketSpace.RESERVED, MarketSpace.ON_DEMAND, MarketSpace.SPOT)


def generate_applications(
    profile: AppSetProfile, horizon: int, seed: int
) -> list[Application]:
    """Sample one application set over [0, horizon).

    Demand mean, demand deviation, and extent length are independent
    normal draws around the profile moments, clamped to valid ranges
    (lengths never exceed the horizon).  Starts are uniform over the
    feasible offsets.  The first n_non_preemptible apps are pinned,
    the rest preemptible.
    """
    if horizon < 1:
        raise ConfigurationError(f"horizon must be >= 1, got {horizon}")
    n = profile.n_total
    if n == 0:
        return []
    rng = np.random.default_rng(seed)
    mus = np.maximum(rng.normal(profile.demand_mean, profile.demand_std, n), MIN_DEMAND)
    sigmas = np.maximum(
        rng.normal(profile.deviation_mean, profile.deviation_std, n), MIN_SIGMA
    )
    lengths = np.clip(
        np.rint(rng.normal(profile.alloc_periods_mean, profile.alloc_periods_std, n)),
        1,
        horizon,
    ).astype(np.int64)
    starts = rng.integers(0, horizon - lengths + 1)
    apps = []
    for i in range(n):
        name = f"app-{i + 1:04d}"
        apps.append(
            Application(
                id=name,
                name=name,
                mu=float(mus[i]),
                sigma=float(sigmas[i]),
                preemptible=i >= profile.n_non_preemptible,
                start=int(starts[i]),
                finish=int(starts[i] + lengths[i]),
            )
        )
    return apps


def generate_instance_types(profile: TypeSetProfile, seed: int) -> list[InstanceType]:
    """Sample one catalog of n_types instance types.

    Each sampled capacity yields up to three market variants (reserved,
    on-demand, spot) with independently sampled per-market prices; the
    variant list is truncated to exactly n_types entries.  Providers
    rotate round-robin in emission order.
    """
    n_caps = math.ceil(profile.n_types / 3)
    rng = np.random.default_rng(seed)
    caps = np.maximum(rng.normal(profile.capacity_mean, profile.capacity_std, n_caps), MIN_CAPACITY)
    prices = {
        MarketSpace.RESERVED: np.maximum(
            rng.normal(profile.reserved_price_mean, profile.reserved_price_std, n_caps), MIN_PRICE
        ),
        MarketSpace.ON_DEMAND: np.maximum(
            rng.normal(profile.on_demand_price_mean, profile.on_demand_price_std, n_caps), MIN_PRICE
        ),
        MarketSpace.SPOT: np.maximum(
            rng.normal(profile.spot_price_mean, profile.spot_price_std, n_caps), MIN_PRICE
        ),
    }
    types: list[InstanceType] = []
    for k in range(n_caps):
        for market in _MARKET_ORDER:
            if len(types) == profile.n_types:
                break
            seq = len(types) + 1
            types.append(
                InstanceType(
                    id=f"it-{seq:04d}",
                    provider=_PROVIDER_WHEEL[(seq - 1) % len(_PROVIDER_WHEEL)],
                    name=f"gen-{k + 1:03d}-{market.value}",
                    market=market,
                    capacity=float(caps[k]),
                    price_per_slot=float(prices[market][k]),
                )
            )
    return types


def build_case(
    case_id: int,
    seed: int,
    period_scale: float = 1.0,
    q_min: float = 0.95,
    reserved_term: int | None = None,
) -> ErichInput:
    """Assemble one of the six built-in cases as an optimizer input.

    The sampling horizon is sized to fit typical extents of the (scaled)
    profile; the returned input's horizon is the maximum finish actually
    sampled, so there are no guaranteed-idle trailing slots.
    """
    if case_id not in CASE_PAIRINGS:
        raise ConfigurationError(f"case_id must be in 1..6, got {case_id}")
    app_pid, type_pid = CASE_PAIRINGS[case_id]
    profile = APP_PROFILES[app_pid].scaled_periods(period_scale)
    gen_horizon = max(
        int(round(2 * (profile.alloc_periods_mean + profile.alloc_periods_std))), 2
    )
    apps = generate_applications(profile, gen_horizon, seed)
    types = generate_instance_types(TYPE_PROFILES[type_pid], seed + 1)
    horizon = max((a.finish for a in apps), default=1)
    return ErichInput.from_sets(
        apps, types, q_min=q_min, horizon=horizon, reserved_term=reserved_term
    )
