"""Analytic feasibility checks for Gaussian demand aggregation.

Independent normal demands add: means sum, variances sum.  An instance of
capacity R hosting aggregate demand N(mu, sigma^2) keeps the underflow
guarantee P(D < R) >= q exactly when mu + z(q) * sigma <= R, with z the
standard normal quantile.  Everything here is closed-form; no sampling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterable, Mapping

if TYPE_CHECKING:
    from .domain import Application, ProvisionedInstance, TimeSlot

__all__ = [
    "AggregatedDemand",
    "EMPTY_DEMAND",
    "aggregate_demand",
    "normal_quantile",
    "satisfies_qos",
    "fits",
    "fits_demand",
]


@dataclass(frozen=True)
class AggregatedDemand:
    """Sum of independent normal demands, folded to (mean, std dev)."""

    mu_sum: float
    sigma_agg: float

    def plus(self, mu: float, sigma: float) -> "AggregatedDemand":
        var = self.sigma_agg * self.sigma_agg + sigma * sigma
        return AggregatedDemand(self.mu_sum + mu, math.sqrt(var))


EMPTY_DEMAND = AggregatedDemand(0.0, 0.0)


def aggregate_demand(pairs: Iterable[tuple[float, float]]) -> AggregatedDemand:
    """Fold (mu, sigma) pairs into the distribution of their sum."""
    mu_sum = 0.0
    var_sum = 0.0
    for mu, sigma in pairs:
        mu_sum += mu
        var_sum += sigma * sigma
    return AggregatedDemand(mu_sum, math.sqrt(var_sum))


# Rational approximation of the standard normal quantile (Acklam's
# coefficients), polished with one Newton step so the result is good to
# ~1e-15 everywhere except the extreme tails.
_A = (
    -3.969683028665376e+01,
    2.209460984245205e+02,
    -2.759285104469687e+02,
    1.383577518672690e+02,
    -3.066479806614716e+01,
    2.506628277459239e+00,
)
_B = (
    -5.447609879822406e+01,
    1.615858368580409e+02,
    -1.556989798598866e+02,
    6.680131188771972e+01,
    -1.328068155288572e+01,
)
_C = (
    -7.784894002430293e-03,
    -3.223964580411365e-01,
    -2.400758277161838e+00,
    -2.549732539343734e+00,
    4.374664141464968e+00,
    2.938163982698783e+00,
)
_D = (
    7.784695709041462e-03,
    3.224671290700398e-01,
    2.445134137142996e+00,
    3.754408661907416e+00,
)
_P_LOW = 0.02425
_P_HIGH = 1.0 - _P_LOW


def normal_quantile(p: float) -> float:
    """Inverse standard normal CDF for p in (0, 1); |error| <= 1e-8."""
    if not 0.0 < p < 1.0:
        raise ValueError(f"quantile argument must lie in (0, 1), got {p}")

    if p < _P_LOW:
        q = math.sqrt(-2.0 * math.log(p))
        x = (((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5]) / (
            (((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0
        )
    elif p <= _P_HIGH:
        q = p - 0.5
        r = q * q
        x = (((((_A[0] * r + _A[1]) * r + _A[2]) * r + _A[3]) * r + _A[4]) * r + _A[5]) * q / (
            ((((_B[0] * r + _B[1]) * r + _B[2]) * r + _B[3]) * r + _B[4]) * r + 1.0
        )
    else:
        q = math.sqrt(-2.0 * math.log(1.0 - p))
        x = -(((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5]) / (
            (((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0
        )

    # One Newton refinement: e = Phi(x) - p, step by e / phi(x) (Halley form).
    e = 0.5 * math.erfc(-x / math.sqrt(2.0)) - p
    u = e * math.sqrt(2.0 * math.pi) * math.exp(x * x / 2.0)
    return x - u / (1.0 + x * u / 2.0)


def satisfies_qos(demand: AggregatedDemand, capacity: float, q_min: float) -> bool:
    """True when P(demand < capacity) >= q_min for the aggregate Gaussian.

    Edge policy: q_min == 0 accepts anything; q_min == 1 requires a
    deterministic load (sigma == 0) at or under capacity; sigma == 0 with
    0 < q_min < 1 degrades to the plain mean <= capacity check, so exact
    deterministic fits stay valid.
    """
    if not 0.0 <= q_min <= 1.0:
        raise ValueError(f"q_min must lie in [0, 1], got {q_min}")
    if q_min == 0.0:
        return True
    if q_min == 1.0:
        return demand.sigma_agg == 0.0 and demand.mu_sum <= capacity
    if demand.sigma_agg == 0.0:
        return demand.mu_sum <= capacity
    return demand.mu_sum + normal_quantile(q_min) * demand.sigma_agg <= capacity


def fits_demand(
    existing: AggregatedDemand,
    mu: float,
    sigma: float,
    capacity: float,
    q_min: float,
) -> bool:
    """Would adding N(mu, sigma^2) to the existing load still satisfy QoS?"""
    return satisfies_qos(existing.plus(mu, sigma), capacity, q_min)


def fits(
    app: "Application",
    inst: "ProvisionedInstance",
    existing: Mapping["TimeSlot", Iterable["Application"]],
    q_min: float,
) -> bool:
    """Can ``app`` join ``inst`` for its whole extent?

    Requires the envelope to cover every extent slot, market legality
    (only preemptible apps on spot-only types), and the QoS check per slot
    against the slot's existing co-tenants plus the candidate.
    """
    t = inst.type_ref
    if not app.preemptible and t.spot_only_flag:
        return False
    for slot in app.slots:
        if not inst.covers(slot):
            return False
        here = existing.get(slot, ())
        demand = aggregate_demand(
            (other.mu, other.sigma) for other in sorted(here, key=lambda a: a.id)
        ).plus(app.mu, app.sigma)
        if not satisfies_qos(demand, t.capacity, q_min):
            return False
    return True
