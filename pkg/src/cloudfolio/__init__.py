"""Cost-efficient portfolios of reserved, on-demand, and spot cloud instances.

The package optimizes the placement of applications with probabilistic
demand onto priced instance types over a discrete planning horizon, using
either a deterministic packing heuristic (erich) or a genetic algorithm
(georg), and exposes the result through a CLI and a REST service.
"""

from .domain import (
    Algorithm,
    Allocation,
    AllocationStatus,
    Application,
    InfeasibleAppError,
    InstanceType,
    MarketSpace,
    MarketStats,
    Portfolio,
    Provider,
    ProvisionedInstance,
    UnresolvedReferenceError,
    Violation,
    allocation_cost,
    build_allocation,
    validate_allocation,
)
from .feasibility import (
    AggregatedDemand,
    aggregate_demand,
    fits,
    fits_demand,
    normal_quantile,
    satisfies_qos,
)

__version__ = "0.1.0"

__all__ = [
    "Algorithm",
    "Allocation",
    "AllocationStatus",
    "Application",
    "InfeasibleAppError",
    "InstanceType",
    "MarketSpace",
    "MarketStats",
    "Portfolio",
    "Provider",
    "ProvisionedInstance",
    "UnresolvedReferenceError",
    "Violation",
    "allocation_cost",
    "build_allocation",
    "validate_allocation",
    "AggregatedDemand",
    "aggregate_demand",
    "fits",
    "fits_demand",
    "normal_quantile",
    "satisfies_qos",
    "__version__",
]
