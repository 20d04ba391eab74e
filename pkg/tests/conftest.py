from __future__ import annotations

import pytest

from cloudfolio.domain import (
    Application,
    InstanceType,
    MarketSpace,
    Portfolio,
    Provider,
)


def mk_app(
    id: str = "a",
    mu: float = 2.0,
    sigma: float = 0.5,
    preemptible: bool = False,
    start: int = 0,
    finish: int = 2,
    name: str | None = None,
) -> Application:
    return Application(
        id=id, name=name if name is not None else id, mu=mu, sigma=sigma,
        preemptible=preemptible, start=start, finish=finish,
    )


def mk_type(
    id: str = "t",
    market: str = "reserved",
    capacity: float = 4.0,
    price: float = 1.0,
    provider: str = "aws",
    name: str | None = None,
) -> InstanceType:
    return InstanceType(
        id=id, provider=Provider(provider), name=name if name is not None else id,
        market=MarketSpace(market), capacity=capacity, price_per_slot=price,
    )


def mk_portfolio(apps, q_min: float = 0.95, version: int = 1) -> Portfolio:
    return Portfolio(
        id="pf-1", name="pf", providers=frozenset(Provider), q_min=q_min,
        app_ids=frozenset(a.id for a in apps), version=version,
    )


@pytest.fixture
def anyio_backend():
    return "asyncio"
