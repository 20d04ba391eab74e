"""Catalog ingestion and filtering tests."""

import json
import random

import pytest

from cloudfolio.catalog import (
    CSV_HEADER,
    CatalogError,
    CatalogQuery,
    bundled_catalog,
    filter_catalog,
    import_catalog,
)
from cloudfolio.domain import MarketSpace, Provider

from .conftest import mk_type

HEADER = ",".join(CSV_HEADER)

GOOD_ROWS = [
    "aws,box.small,on_demand,4,0.5",
    "aws,box.small,spot,4,0.2",
    "azure,tall,reserved,16,1.25",
]


def write_csv(tmp_path, lines, name="types.csv"):
    path = tmp_path / name
    path.write_text("\n".join(lines) + "\n")
    return path


class TestCsvImport:
    def test_header_only_gives_empty_catalog(self, tmp_path):
        path = write_csv(tmp_path, [HEADER])
        assert import_catalog(path) == []

    def test_round_trip_of_rows(self, tmp_path):
        path = write_csv(tmp_path, [HEADER, *GOOD_ROWS])
        types = import_catalog(path)
        assert [t.name for t in types] == ["box.small", "box.small", "tall"]
        assert types[0].provider is Provider.AWS
        assert types[0].market is MarketSpace.ON_DEMAND
        assert types[0].capacity == 4.0
        assert types[0].price_per_slot == 0.5
        assert types[1].spot_only_flag is True
        assert types[2].provider is Provider.AZURE

    def test_ids_are_distinct_and_stable(self, tmp_path):
        path = write_csv(tmp_path, [HEADER, *GOOD_ROWS])
        first = import_catalog(path)
        second = import_catalog(path)
        assert [t.id for t in first] == [t.id for t in second]
        assert len({t.id for t in first}) == len(first)

    def test_missing_header_rejected(self, tmp_path):
        path = write_csv(tmp_path, GOOD_ROWS)
        with pytest.raises(CatalogError, match="line 1"):
            import_catalog(path)

    def test_reordered_header_rejected(self, tmp_path):
        path = write_csv(tmp_path, ["name,provider,market,capacity,price_per_slot"])
        with pytest.raises(CatalogError, match="header"):
            import_catalog(path)

    def test_empty_file_rejected(self, tmp_path):
        path = tmp_path / "types.csv"
        path.write_text("")
        with pytest.raises(CatalogError, match="line 1"):
            import_catalog(path)

    def test_short_row_cites_line_number(self, tmp_path):
        path = write_csv(tmp_path, [HEADER, GOOD_ROWS[0], "aws,chopped,on_demand,4"])
        with pytest.raises(CatalogError, match="line 3"):
            import_catalog(path)

    def test_non_numeric_capacity_cites_line_and_field(self, tmp_path):
        path = write_csv(tmp_path, [HEADER, "aws,box,on_demand,lots,0.5"])
        with pytest.raises(CatalogError, match="line 2.*capacity"):
            import_catalog(path)

    def test_zero_capacity_cites_row_and_field(self, tmp_path):
        path = write_csv(tmp_path, [HEADER, GOOD_ROWS[0], "aws,box,on_demand,0,0.5"])
        with pytest.raises(CatalogError, match="row 3.*capacity.*> 0"):
            import_catalog(path)

    def test_negative_price_cites_row_and_field(self, tmp_path):
        path = write_csv(tmp_path, [HEADER, "aws,box,on_demand,4,-1"])
        with pytest.raises(CatalogError, match="row 2.*price_per_slot"):
            import_catalog(path)

    def test_unknown_provider_rejected(self, tmp_path):
        path = write_csv(tmp_path, [HEADER, "nimbus,box,on_demand,4,0.5"])
        with pytest.raises(CatalogError, match="provider.*nimbus"):
            import_catalog(path)

    def test_unknown_market_rejected(self, tmp_path):
        path = write_csv(tmp_path, [HEADER, "aws,box,flex,4,0.5"])
        with pytest.raises(CatalogError, match="market.*flex"):
            import_catalog(path)

    def test_blank_name_rejected(self, tmp_path):
        path = write_csv(tmp_path, [HEADER, "aws, ,on_demand,4,0.5"])
        with pytest.raises(CatalogError, match="name"):
            import_catalog(path)

    def test_duplicate_type_rejected(self, tmp_path):
        path = write_csv(tmp_path, [HEADER, GOOD_ROWS[0], GOOD_ROWS[0]])
        with pytest.raises(CatalogError, match="duplicate"):
            import_catalog(path)

    def test_same_name_on_other_market_is_fine(self, tmp_path):
        path = write_csv(tmp_path, [HEADER, *GOOD_ROWS])
        assert len(import_catalog(path)) == 3

    def test_blank_lines_are_skipped(self, tmp_path):
        path = write_csv(tmp_path, [HEADER, GOOD_ROWS[0], "", GOOD_ROWS[2]])
        assert len(import_catalog(path)) == 2

    def test_missing_file_names_path(self, tmp_path):
        with pytest.raises(OSError, match="nowhere.csv"):
            import_catalog(tmp_path / "nowhere.csv")

    def test_unknown_format_rejected(self, tmp_path):
        path = write_csv(tmp_path, [HEADER])
        with pytest.raises(ValueError, match="format"):
            import_catalog(path, format="xml")


class TestJsonImport:
    def test_domain_serialization_round_trip(self, tmp_path):
        original = [
            mk_type(id="x1", provider="aws", market="on_demand", capacity=4.0, price=0.5),
            mk_type(id="x2", provider="azure", market="spot", capacity=8.0, price=0.25),
        ]
        path = tmp_path / "types.json"
        path.write_text(json.dumps([t.to_dict() for t in original]))
        assert import_catalog(path, format="json") == original

    def test_id_and_flag_derived_when_absent(self, tmp_path):
        path = tmp_path / "types.json"
        path.write_text(
            json.dumps(
                [
                    {
                        "provider": "aws",
                        "name": "box",
                        "market": "spot",
                        "capacity": 4,
                        "price_per_slot": 0.5,
                    }
                ]
            )
        )
        (typ,) = import_catalog(path, format="json")
        assert typ.id == "aws:box:spot"
        assert typ.spot_only_flag is True

    def test_malformed_json_cites_line(self, tmp_path):
        path = tmp_path / "types.json"
        path.write_text('[\n{"provider": "aws",}\n]')
        with pytest.raises(CatalogError, match="line 2"):
            import_catalog(path, format="json")

    def test_top_level_object_rejected(self, tmp_path):
        path = tmp_path / "types.json"
        path.write_text('{"provider": "aws"}')
        with pytest.raises(CatalogError, match="list"):
            import_catalog(path, format="json")

    def test_missing_field_cites_row_and_field(self, tmp_path):
        path = tmp_path / "types.json"
        path.write_text(json.dumps([{"provider": "aws", "name": "box", "market": "spot"}]))
        with pytest.raises(CatalogError, match="row 1.*capacity"):
            import_catalog(path, format="json")

    def test_string_capacity_rejected(self, tmp_path):
        path = tmp_path / "types.json"
        path.write_text(
            json.dumps(
                [
                    {
                        "provider": "aws",
                        "name": "box",
                        "market": "spot",
                        "capacity": "4",
                        "price_per_slot": 0.5,
                    }
                ]
            )
        )
        with pytest.raises(CatalogError, match="row 1.*capacity.*number"):
            import_catalog(path, format="json")

    def test_wrong_spot_flag_rejected(self, tmp_path):
        path = tmp_path / "types.json"
        path.write_text(
            json.dumps(
                [
                    {
                        "provider": "aws",
                        "name": "box",
                        "market": "reserved",
                        "capacity": 4,
                        "price_per_slot": 0.5,
                        "spot_only_flag": True,
                    }
                ]
            )
        )
        with pytest.raises(CatalogError, match="row 1.*spot_only_flag"):
            import_catalog(path, format="json")


class TestBundledCatalog:
    def test_is_large_enough(self):
        assert len(bundled_catalog()) >= 12

    def test_covers_every_provider_and_market(self):
        combos = {(t.provider, t.market) for t in bundled_catalog()}
        assert combos == {(p, m) for p in Provider for m in MarketSpace}

    def test_every_type_is_well_formed(self):
        for typ in bundled_catalog():
            assert typ.capacity > 0
            assert typ.price_per_slot > 0
            assert typ.spot_only_flag == (typ.market is MarketSpace.SPOT)
            assert typ.price_per_capacity > 0

    def test_stable_across_loads(self):
        assert bundled_catalog() == bundled_catalog()


class TestFilterCatalog:
    def test_empty_query_returns_everything_sorted(self):
        types = bundled_catalog()
        result = filter_catalog(types)
        assert set(result) == set(types) and len(result) == len(types)
        keys = [(t.provider.value, t.name, t.market.value) for t in result]
        assert keys == sorted(keys)

    def test_prototype_filter_example(self):
        # everything except Google Cloud, any market, capacity at least 5,
        # price at most 1000
        types = bundled_catalog()
        query = CatalogQuery(
            providers=frozenset(Provider) - {Provider.GOOGLE_CLOUD},
            min_capacity=5.0,
            max_price=1000.0,
        )
        result = filter_catalog(types, query)
        expected = sorted(
            (
                t
                for t in types
                if t.provider is not Provider.GOOGLE_CLOUD
                and t.capacity >= 5.0
                and t.price_per_slot <= 1000.0
            ),
            key=lambda t: (t.provider.value, t.name, t.market.value),
        )
        assert result == expected
        assert result
        assert all(t.provider is not Provider.GOOGLE_CLOUD for t in result)
        # each criterion must actually have excluded something
        assert any(t.provider is Provider.GOOGLE_CLOUD for t in types)
        assert any(t.capacity < 5.0 for t in types)
        assert any(t.price_per_slot > 1000.0 for t in types)

    def test_min_capacity_above_everything_gives_empty(self):
        types = bundled_catalog()
        top = max(t.capacity for t in types)
        assert filter_catalog(types, CatalogQuery(min_capacity=top + 1)) == []

    def test_boundaries_are_inclusive(self):
        types = [mk_type(id="t", capacity=5.0, price=1000.0)]
        assert filter_catalog(types, CatalogQuery(min_capacity=5.0, max_price=1000.0)) == types

    def test_market_filter(self):
        spot_only = filter_catalog(bundled_catalog(), CatalogQuery(markets={MarketSpace.SPOT}))
        assert spot_only
        assert all(t.market is MarketSpace.SPOT for t in spot_only)

    def test_accepts_plain_strings_in_query(self):
        query = CatalogQuery(providers={"aws"}, markets={"reserved"})
        result = filter_catalog(bundled_catalog(), query)
        assert result
        assert all(
            t.provider is Provider.AWS and t.market is MarketSpace.RESERVED for t in result
        )

    def test_idempotent(self):
        types = bundled_catalog()
        for query in (
            CatalogQuery(),
            CatalogQuery(min_capacity=5.0),
            CatalogQuery(providers={Provider.AWS}, max_price=1.0),
            CatalogQuery(markets={MarketSpace.SPOT, MarketSpace.RESERVED}),
        ):
            once = filter_catalog(types, query)
            assert filter_catalog(once, query) == once

    def test_subset_and_order_independent_of_input_order(self):
        types = bundled_catalog()
        shuffled = types[:]
        random.Random(5).shuffle(shuffled)
        query = CatalogQuery(min_capacity=4.0)
        assert filter_catalog(shuffled, query) == filter_catalog(types, query)
        assert set(filter_catalog(shuffled, query)) <= set(types)
