"""Value-object invariants, serialization round-trips, and the validator."""

from __future__ import annotations

import json

import pytest
from hypothesis import given, strategies as st

from cloudfolio.domain import (
    Allocation,
    AllocationStatus,
    Algorithm,
    Application,
    InstanceType,
    MarketSpace,
    Portfolio,
    Provider,
    ProvisionedInstance,
    UnresolvedReferenceError,
    allocation_cost,
    build_allocation,
    canonical_json,
    validate_allocation,
)

from .conftest import mk_app, mk_portfolio, mk_type


class TestApplication:
    def test_rejects_finish_not_after_start(self):
        with pytest.raises(ValueError, match="strictly before finish"):
            mk_app(start=3, finish=3)
        with pytest.raises(ValueError, match="strictly before finish"):
            mk_app(start=4, finish=2)

    def test_rejects_negative_start(self):
        with pytest.raises(ValueError, match="start"):
            mk_app(start=-1, finish=2)

    def test_rejects_negative_demand(self):
        with pytest.raises(ValueError, match="mu"):
            mk_app(mu=-0.5)
        with pytest.raises(ValueError, match="sigma"):
            mk_app(sigma=-0.1)

    def test_slots_are_half_open(self):
        app = mk_app(start=2, finish=5)
        assert list(app.slots) == [2, 3, 4]
        assert app.duration == 3

    def test_round_trip(self):
        app = mk_app(id="x", mu=1.5, sigma=0.25, preemptible=True, start=1, finish=4)
        assert Application.from_dict(app.to_dict()) == app


class TestInstanceType:
    def test_rejects_nonpositive_capacity_and_price(self):
        with pytest.raises(ValueError, match="capacity"):
            mk_type(capacity=0.0)
        with pytest.raises(ValueError, match="price"):
            mk_type(price=0.0)

    def test_spot_only_flag_derived_from_market(self):
        assert mk_type(market="spot").spot_only_flag is True
        assert mk_type(market="reserved").spot_only_flag is False
        assert mk_type(market="on_demand").spot_only_flag is False

    def test_spot_only_flag_mismatch_rejected(self):
        with pytest.raises(ValueError, match="spot_only_flag"):
            InstanceType(
                id="t", provider=Provider.AWS, name="t", market=MarketSpace.RESERVED,
                capacity=1.0, price_per_slot=1.0, spot_only_flag=True,
            )

    def test_price_per_capacity(self):
        t = mk_type(capacity=8.0, price=2.0)
        assert t.price_per_capacity == 0.25

    def test_round_trip(self):
        t = mk_type(id="t9", market="spot", capacity=3.5, price=0.7, provider="alibaba")
        assert InstanceType.from_dict(t.to_dict()) == t


class TestProvisionedInstance:
    def test_cost_is_price_times_envelope_length(self):
        inst = ProvisionedInstance("i", mk_type(price=1.5), begin=2, end=6)
        assert inst.cost == 6.0
        assert inst.duration == 4

    def test_covers_is_half_open(self):
        inst = ProvisionedInstance("i", mk_type(), begin=2, end=4)
        assert not inst.covers(1)
        assert inst.covers(2)
        assert inst.covers(3)
        assert not inst.covers(4)

    def test_rejects_empty_envelope(self):
        with pytest.raises(ValueError, match="envelope"):
            ProvisionedInstance("i", mk_type(), begin=3, end=3)


class TestPortfolio:
    def test_bumped_increments_version(self):
        p = mk_portfolio([mk_app()])
        assert p.version == 1
        assert p.bumped().version == 2

    def test_rejects_bad_q_min(self):
        with pytest.raises(ValueError, match="q_min"):
            mk_portfolio([mk_app()], q_min=1.5)

    def test_rejects_empty_providers(self):
        with pytest.raises(ValueError, match="providers"):
            Portfolio(id="p", name="p", providers=frozenset(), q_min=0.9, app_ids=frozenset())

    def test_round_trip(self):
        p = mk_portfolio([mk_app("a"), mk_app("b")], q_min=0.9, version=3)
        assert Portfolio.from_dict(p.to_dict()) == p


def _simple_allocation(apps=None, price=1.0, capacity=8.0):
    apps = apps if apps is not None else [mk_app("a", mu=2.0, sigma=0.0, start=0, finish=2)]
    inst = ProvisionedInstance("i-1", mk_type(price=price, capacity=capacity), 0, 2)
    assignment = {(a.id, t): "i-1" for a in apps for t in a.slots}
    return build_allocation(
        [inst], assignment, apps, Algorithm.ERICH, portfolio_id="pf-1", portfolio_version=1
    )


class TestBuildAllocation:
    def test_cost_and_utilization_derived(self):
        apps = [mk_app("a", mu=2.0, sigma=0.0, start=0, finish=2)]
        alloc = _simple_allocation(apps)
        assert alloc.total_cost == 2.0
        # mu 2 on both slots over capacity 8*2
        assert alloc.mean_utilization == pytest.approx(4.0 / 16.0)
        stats = alloc.per_market_stats[MarketSpace.RESERVED]
        assert stats.instance_count == 1
        assert stats.utilization == pytest.approx(0.25)
        assert alloc.per_market_stats[MarketSpace.SPOT].instance_count == 0

    def test_content_hash_id_is_stable(self):
        a1 = _simple_allocation()
        a2 = _simple_allocation()
        assert a1.id == a2.id
        assert a1.id.startswith("alloc-")

    def test_different_content_different_id(self):
        assert _simple_allocation(price=1.0).id != _simple_allocation(price=2.0).id

    def test_unknown_app_reference_raises(self):
        inst = ProvisionedInstance("i-1", mk_type(), 0, 2)
        with pytest.raises(UnresolvedReferenceError):
            build_allocation([inst], {("ghost", 0): "i-1"}, [], Algorithm.ERICH)

    def test_round_trip(self):
        alloc = _simple_allocation()
        again = Allocation.from_dict(json.loads(canonical_json(alloc.to_dict())))
        assert again == alloc


class TestValidateAllocation:
    def test_clean_allocation_yields_no_violations(self):
        apps = [mk_app("a", mu=2.0, sigma=0.5, start=0, finish=2)]
        alloc = _simple_allocation(apps)
        assert validate_allocation(alloc, mk_portfolio(apps), apps) == []

    def test_missing_slot_is_coverage_violation(self):
        apps = [mk_app("a", start=0, finish=3)]
        inst = ProvisionedInstance("i-1", mk_type(), 0, 3)
        assignment = {("a", 0): "i-1", ("a", 1): "i-1"}  # slot 2 missing
        alloc = build_allocation([inst], assignment, apps, Algorithm.ERICH)
        violations = validate_allocation(alloc, mk_portfolio(apps), apps)
        assert [v.constraint for v in violations] == ["coverage"]
        assert violations[0].slot == 2

    def test_assignment_outside_extent_is_coverage_violation(self):
        apps = [mk_app("a", start=1, finish=2)]
        inst = ProvisionedInstance("i-1", mk_type(), 0, 3)
        assignment = {("a", 0): "i-1", ("a", 1): "i-1"}
        alloc = build_allocation([inst], assignment, apps, Algorithm.ERICH)
        codes = {v.constraint for v in validate_allocation(alloc, mk_portfolio(apps), apps)}
        assert codes == {"coverage"}

    def test_spot_hosting_non_preemptible_is_market_violation(self):
        apps = [mk_app("a", mu=0.5, sigma=0.0, preemptible=False, start=0, finish=1)]
        inst = ProvisionedInstance("i-1", mk_type(market="spot"), 0, 1)
        alloc = build_allocation([inst], {("a", 0): "i-1"}, apps, Algorithm.ERICH)
        codes = [v.constraint for v in validate_allocation(alloc, mk_portfolio(apps), apps)]
        assert codes == ["market"]

    def test_slot_outside_envelope_is_envelope_violation(self):
        apps = [mk_app("a", mu=0.5, sigma=0.0, start=0, finish=2)]
        inst = ProvisionedInstance("i-1", mk_type(), 1, 2)
        alloc = build_allocation(
            [inst], {("a", 0): "i-1", ("a", 1): "i-1"}, apps, Algorithm.ERICH
        )
        codes = [v.constraint for v in validate_allocation(alloc, mk_portfolio(apps), apps)]
        assert codes == ["envelope"]

    def test_overloaded_instance_is_qos_violation(self):
        apps = [
            mk_app("a", mu=3.0, sigma=1.0, start=0, finish=1),
            mk_app("b", mu=3.0, sigma=1.0, start=0, finish=1),
        ]
        inst = ProvisionedInstance("i-1", mk_type(capacity=4.0), 0, 1)
        alloc = build_allocation(
            [inst], {("a", 0): "i-1", ("b", 0): "i-1"}, apps, Algorithm.ERICH
        )
        codes = [v.constraint for v in validate_allocation(alloc, mk_portfolio(apps), apps)]
        assert codes == ["qos"]

    def test_tampered_cost_is_total_cost_violation(self):
        import dataclasses

        apps = [mk_app("a", mu=1.0, sigma=0.0, start=0, finish=2)]
        alloc = dataclasses.replace(_simple_allocation(apps), total_cost=99.0)
        codes = [v.constraint for v in validate_allocation(alloc, mk_portfolio(apps), apps)]
        assert codes == ["total_cost"]

    def test_unknown_instance_reference_raises(self):
        apps = [mk_app("a", start=0, finish=1)]
        alloc = _simple_allocation(apps)
        broken = dict(alloc.assignment)
        broken[("a", 0)] = "ghost"
        import dataclasses

        tampered = dataclasses.replace(alloc, assignment=broken)
        with pytest.raises(UnresolvedReferenceError):
            validate_allocation(tampered, mk_portfolio(apps), apps)


def test_allocation_cost_accepts_instances_or_allocation():
    insts = [
        ProvisionedInstance("i-1", mk_type(price=2.0), 0, 3),
        ProvisionedInstance("i-2", mk_type(price=0.5), 1, 3),
    ]
    assert allocation_cost(insts) == pytest.approx(7.0)
    alloc = _simple_allocation()
    assert allocation_cost(alloc) == alloc.total_cost


def test_canonical_json_is_order_insensitive():
    assert canonical_json({"b": 1, "a": [2, 3]}) == canonical_json({"a": [2, 3], "b": 1})
    assert canonical_json({"a": 1}) == '{"a":1}'


@given(
    mu=st.floats(min_value=0.0, max_value=1e6, allow_nan=False),
    sigma=st.floats(min_value=0.0, max_value=1e6, allow_nan=False),
    start=st.integers(min_value=0, max_value=1000),
    length=st.integers(min_value=1, max_value=1000),
    preemptible=st.booleans(),
)
def test_application_round_trip_property(mu, sigma, start, length, preemptible):
    app = Application(
        id="a", name="a", mu=mu, sigma=sigma, preemptible=preemptible,
        start=start, finish=start + length,
    )
    assert Application.from_dict(json.loads(canonical_json(app.to_dict()))) == app
