"""Instance-type catalog: bundled dataset, file ingestion, filter queries.

The catalog is static after import.  Files are validated row by row and
imported all-or-nothing: the first malformed or invalid row aborts the
whole import with the offending line or field named.
"""

from __future__ import annotations

import io
import json
from csv import reader as csv_reader
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .domain import InstanceType, MarketSpace, Provider

__all__ = [
    "CSV_HEADER",
    "CatalogError",
    "CatalogQuery",
    "bundled_catalog",
    "filter_catalog",
    "import_catalog",
]

CSV_HEADER = ["provider", "name", "market", "capacity", "price_per_slot"]

_BUNDLED_RESOURCE = "data/instance_catalog.csv"


class CatalogError(ValueError):
    """A catalog file could not be parsed or failed validation."""


def _derive_id(provider: Provider, name: str, market: MarketSpace) -> str:
    return f"{provider.value}:{name}:{market.value}"


def _build_type(
    raw: Mapping[str, object], row_ref: str, path: Path
) -> InstanceType:
    def fail(field: str, reason: str) -> None:
        raise CatalogError(f"{path}: {row_ref}: field {field!r}: {reason}")

    provider_s = str(raw["provider"]).strip()
    try:
        provider = Provider(provider_s)
    except ValueError:
        fail("provider", f"unknown provider {provider_s!r}")
    market_s = str(raw["market"]).strip()
    try:
        market = MarketSpace(market_s)
    except ValueError:
        fail("market", f"unknown market {market_s!r}")
    name = str(raw["name"]).strip()
    if not name:
        fail("name", "must not be empty")
    capacity = float(raw["capacity"])
    if capacity <= 0:
        fail("capacity", f"must be > 0, got {capacity}")
    price = float(raw["price_per_slot"])
    if price <= 0:
        fail("price_per_slot", f"must be > 0, got {price}")
    type_id = str(raw.get("id") or _derive_id(provider, name, market))
    try:
        return InstanceType(
            id=type_id,
            provider=provider,
            name=name,
            market=market,
            capacity=capacity,
            price_per_slot=price,
            spot_only_flag=(
                bool(raw["spot_only_flag"]) if raw.get("spot_only_flag") is not None else None
            ),
        )
    except ValueError as exc:
        raise CatalogError(f"{path}: {row_ref}: {exc}") from exc


def _import_csv(path: Path, text: str) -> list[InstanceType]:
    rows = csv_reader(io.StringIO(text))
    header = next(rows, None)
    expected = ",".join(CSV_HEADER)
    if header is None:
        raise CatalogError(f"{path}: line 1: missing header, expected {expected!r}")
    if header != CSV_HEADER:
        raise CatalogError(
            f"{path}: line 1: header must be exactly {expected!r}, got {','.join(header)!r}"
        )
    types: list[InstanceType] = []
    seen: set[tuple[Provider, str, MarketSpace]] = set()
    for row in rows:
        line = rows.line_num
        if not row:
            continue
        if len(row) != len(CSV_HEADER):
            raise CatalogError(
                f"{path}: line {line}: expected {len(CSV_HEADER)} fields, got {len(row)}"
            )
        raw: dict[str, object] = dict(zip(CSV_HEADER, row))
        for field in ("capacity", "price_per_slot"):
            try:
                raw[field] = float(str(raw[field]))
            except ValueError as exc:
                raise CatalogError(f"{path}: line {line}: field {field!r}: {exc}") from exc
        typ = _build_type(raw, f"row {line}", path)
        key = (typ.provider, typ.name, typ.market)
        if key in seen:
            raise CatalogError(
                f"{path}: row {line}: field 'name': duplicate type "
                f"{typ.name!r} for {typ.provider.value} on {typ.market.value}"
            )
        seen.add(key)
        types.append(typ)
    return types


def _import_json(path: Path, text: str) -> list[InstanceType]:
    try:
        body = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CatalogError(f"{path}: line {exc.lineno}: {exc.msg}") from exc
    if not isinstance(body, list):
        raise CatalogError(f"{path}: top-level value must be a list of instance types")
    types: list[InstanceType] = []
    seen: set[tuple[Provider, str, MarketSpace]] = set()
    for i, entry in enumerate(body, start=1):
        if not isinstance(entry, Mapping):
            raise CatalogError(f"{path}: row {i}: entry must be an object")
        for field in CSV_HEADER:
            if field not in entry:
                raise CatalogError(f"{path}: row {i}: field {field!r}: missing")
        for field in ("capacity", "price_per_slot"):
            if not isinstance(entry[field], (int, float)) or isinstance(entry[field], bool):
                raise CatalogError(
                    f"{path}: row {i}: field {field!r}: expected a number, "
                    f"got {entry[field]!r}"
                )
        typ = _build_type(entry, f"row {i}", path)
        key = (typ.provider, typ.name, typ.market)
        if key in seen:
            raise CatalogError(
                f"{path}: row {i}: field 'name': duplicate type "
                f"{typ.name!r} for {typ.provider.value} on {typ.market.value}"
            )
        seen.add(key)
        types.append(typ)
    return types


def import_catalog(path: str | Path, format: str = "csv") -> list[InstanceType]:
    """Load instance types from a CSV or JSON file, all-or-nothing."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise OSError(f"cannot read catalog from {path}: {exc}") from exc
    if format == "csv":
        return _import_csv(path, text)
    if format == "json":
        return _import_json(path, text)
    raise ValueError(f"unknown catalog format {format!r}")


def bundled_catalog() -> list[InstanceType]:
    """The instance types shipped with the package."""
    ref = resources.files(__package__).joinpath(_BUNDLED_RESOURCE)
    with resources.as_file(ref) as path:
        return import_catalog(path, format="csv")


@dataclass(frozen=True)
class CatalogQuery:
    """Conjunctive filter; criteria left as None match everything."""

    providers: frozenset[Provider] | None = None
    markets: frozenset[MarketSpace] | None = None
    min_capacity: float | None = None
    max_price: float | None = None

    def __post_init__(self):
        if self.providers is not None:
            object.__setattr__(
                self, "providers", frozenset(Provider(p) for p in self.providers)
            )
        if self.markets is not None:
            object.__setattr__(
                self, "markets", frozenset(MarketSpace(m) for m in self.markets)
            )

    def matches(self, typ: InstanceType) -> bool:
        if self.providers is not None and typ.provider not in self.providers:
            return False
        if self.markets is not None and typ.market not in self.markets:
            return False
        if self.min_capacity is not None and typ.capacity < self.min_capacity:
            return False
        if self.max_price is not None and typ.price_per_slot > self.max_price:
            return False
        return True


def filter_catalog(
    types: Iterable[InstanceType], query: CatalogQuery | None = None
) -> list[InstanceType]:
    """Select the types matching every given criterion, deterministically
    ordered by provider, name, then market."""
    query = query if query is not None else CatalogQuery()
    return sorted(
        (t for t in types if query.matches(t)),
        key=lambda t: (t.provider.value, t.name, t.market.value),
    )
