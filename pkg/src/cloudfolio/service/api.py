"""HTTP API: accounts, instance queries, application and portfolio CRUD
with versioning, and asynchronous allocation jobs.

Every entity is owner-scoped; requests for another account's entities
return 404 so existence never leaks.  Validation failures carry a
field-level detail object.  FastAPI's native 422 responses are remapped
to 400 to keep one validation status code.
"""

from __future__ import annotations

import time
import uuid
from contextlib import asynccontextmanager
from dataclasses import replace
from datetime import datetime, timezone
from pathlib import Path
from typing import Mapping

from fastapi import Body, FastAPI, HTTPException, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from .. import erich, georg
from ..catalog import CatalogQuery, bundled_catalog, filter_catalog
from ..domain import Algorithm, Application, MarketSpace, Portfolio, Provider
from ..erich import ErichInput
from ..georg import GaConfig
from .auth import (
    MIN_PASSWORD_LENGTH,
    hash_password,
    new_token,
    token_digest,
    valid_email,
    verify_password,
)
from .config import ServiceConfig
from .jobs import JobRunner, JobStatus
from .store import DocumentStore

__all__ = ["create_app"]

ACCOUNTS = "accounts"
SESSIONS = "sessions"
APPS = "applications"
PORTFOLIOS = "portfolios"
ALLOCATIONS = "allocations"
JOBS = "jobs"

APP_FIELDS = {"name", "mu", "sigma", "preemptible", "start", "finish"}
PORTFOLIO_FIELDS = {"name", "providers", "q_min", "app_ids"}
GA_FIELDS = {
    "population_size",
    "max_generations",
    "mutation_rate",
    "stagnation_window",
    "convergence_epsilon",
    "seed",
}


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="microseconds")


def _new_id(prefix: str) -> str:
    return f"{prefix}-{uuid.uuid4().hex[:12]}"


def _bad(field: str, message: str) -> None:
    raise HTTPException(status_code=400, detail={"field": field, "message": message})


def _conflict(field: str, message: str) -> None:
    raise HTTPException(status_code=409, detail={"field": field, "message": message})


def _unauthorized() -> None:
    raise HTTPException(status_code=401, detail="invalid credentials")


def _not_found() -> None:
    raise HTTPException(status_code=404, detail="not found")


def _require_object(body) -> Mapping:
    if not isinstance(body, Mapping):
        _bad("body", "expected a JSON object")
    return body


def _str_field(body: Mapping, field: str) -> str:
    value = body.get(field)
    if not isinstance(value, str) or not value.strip():
        _bad(field, "must be a non-empty string")
    return value.strip()


def _num_field(body: Mapping, field: str, minimum: float | None = None) -> float:
    value = body.get(field)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        _bad(field, "must be a number")
    if minimum is not None and value < minimum:
        _bad(field, f"must be >= {minimum}")
    return float(value)


def _int_field(body: Mapping, field: str, minimum: int | None = None) -> int:
    value = body.get(field)
    if isinstance(value, bool) or not isinstance(value, int):
        _bad(field, "must be an integer")
    if minimum is not None and value < minimum:
        _bad(field, f"must be >= {minimum}")
    return int(value)


def _bool_field(body: Mapping, field: str, default: bool | None = None) -> bool:
    value = body.get(field, default)
    if not isinstance(value, bool):
        _bad(field, "must be true or false")
    return value


def _reject_unknown(body: Mapping, allowed: set[str]) -> None:
    for key in body:
        if key not in allowed:
            _bad(key, "unknown field")


def _parse_app_payload(body) -> dict:
    body = _require_object(body)
    _reject_unknown(body, APP_FIELDS)
    name = _str_field(body, "name")
    mu = _num_field(body, "mu", minimum=0.0)
    sigma = _num_field(body, "sigma", minimum=0.0)
    preemptible = _bool_field(body, "preemptible", default=False)
    start = _int_field(body, "start", minimum=0)
    finish = _int_field(body, "finish")
    if finish <= start:
        _bad("finish", "finish must be strictly after start")
    try:
        Application(
            id="probe", name=name, mu=mu, sigma=sigma,
            preemptible=preemptible, start=start, finish=finish,
        )
    except ValueError as exc:
        _bad("body", str(exc))
    return {
        "name": name, "mu": mu, "sigma": sigma,
        "preemptible": preemptible, "start": start, "finish": finish,
    }


def _public(doc: dict, *, drop: tuple[str, ...] = ("owner_id",)) -> dict:
    return {k: v for k, v in doc.items() if k not in drop}


def _alloc_public(doc: dict) -> dict:
    return _public(doc, drop=("owner_id", "apps_snapshot"))


def create_app(
    config: ServiceConfig | None = None,
    static_dir: str | Path | None = None,
    catalog: list | None = None,
) -> FastAPI:
    """Build a fully wired service instance around a document store."""
    config = config if config is not None else ServiceConfig.from_env()
    store = DocumentStore(config.data_dir)
    runner = JobRunner(store, workers=config.workers)
    catalog = catalog if catalog is not None else bundled_catalog()
    # verifying against this digest makes login timing independent of
    # whether the email exists
    decoy_digest = hash_password("decoy password")

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        yield
        runner.shutdown(wait=True)

    app = FastAPI(title="cloudfolio", lifespan=lifespan)
    app.state.config = config
    app.state.store = store
    app.state.runner = runner
    app.state.catalog = catalog

    @app.exception_handler(RequestValidationError)
    async def _remap_validation(request: Request, exc: RequestValidationError):
        return JSONResponse(
            status_code=400,
            content={"detail": {"field": "body", "message": "invalid request body"}},
        )

    def authed(request: Request) -> dict:
        header = request.headers.get("authorization") or ""
        if not header.lower().startswith("bearer "):
            _unauthorized()
        digest = token_digest(header[7:].strip())
        session = store.get(SESSIONS, digest)
        if session is None:
            _unauthorized()
        if session["expires_at"] <= time.time():
            store.delete(SESSIONS, digest)
            _unauthorized()
        account = store.get(ACCOUNTS, session["account_id"])
        if account is None:
            _unauthorized()
        return account

    def owned(collection: str, doc_id: str, owner_id: str) -> dict:
        doc = store.get(collection, doc_id)
        if doc is None or doc.get("owner_id") != owner_id:
            _not_found()
        return doc

    def my_docs(collection: str, owner_id: str) -> list[dict]:
        docs = [d for d in store.all(collection) if d.get("owner_id") == owner_id]
        docs.sort(key=lambda d: (d.get("created_at", ""), d["id"]))
        return docs

    def bump_portfolios_containing(app_id: str, owner_id: str, remove: bool = False) -> None:
        for pdoc in store.all(PORTFOLIOS):
            if pdoc.get("owner_id") != owner_id or app_id not in pdoc["app_ids"]:
                continue
            if remove:
                pdoc["app_ids"] = [i for i in pdoc["app_ids"] if i != app_id]
            pdoc["version"] += 1
            store.put(PORTFOLIOS, pdoc["id"], pdoc)

    # ---- accounts ------------------------------------------------------

    @app.post("/api/register", status_code=201)
    def register(body=Body(...)):
        body = _require_object(body)
        _reject_unknown(body, {"email", "username", "password"})
        email = _str_field(body, "email").lower()
        if not valid_email(email):
            _bad("email", "not a valid email address")
        username = _str_field(body, "username")
        password = body.get("password")
        if not isinstance(password, str) or len(password) < MIN_PASSWORD_LENGTH:
            _bad("password", f"must be at least {MIN_PASSWORD_LENGTH} characters")
        if any(a["email"] == email for a in store.all(ACCOUNTS)):
            _conflict("email", "email already registered")
        doc = {
            "id": _new_id("acct"),
            "email": email,
            "username": username,
            "password_digest": hash_password(password),
            "created_at": _now(),
        }
        store.put(ACCOUNTS, doc["id"], doc)
        return _public(doc, drop=("password_digest",))

    @app.post("/api/login")
    def login(body=Body(...)):
        body = _require_object(body)
        email = body.get("email")
        password = body.get("password")
        if not isinstance(email, str) or not isinstance(password, str):
            _unauthorized()
        account = next(
            (a for a in store.all(ACCOUNTS) if a["email"] == email.strip().lower()), None
        )
        digest = account["password_digest"] if account else decoy_digest
        if not verify_password(password, digest) or account is None:
            _unauthorized()
        token = new_token()
        session = {
            "id": token_digest(token),
            "account_id": account["id"],
            "created_at": _now(),
            "expires_at": time.time() + config.token_lifetime_s,
        }
        store.put(SESSIONS, session["id"], session)
        return {"token": token, "expires_at": session["expires_at"]}

    @app.post("/api/logout")
    def logout(request: Request):
        authed(request)
        header = request.headers.get("authorization") or ""
        store.delete(SESSIONS, token_digest(header[7:].strip()))
        return {"ok": True}

    # ---- catalog -------------------------------------------------------

    @app.get("/api/instances")
    def list_instances(
        request: Request,
        providers: str | None = None,
        markets: str | None = None,
        min_capacity: str | None = None,
        max_price: str | None = None,
    ):
        authed(request)

        def split(raw: str | None, cast, field: str):
            if raw is None or raw.strip() == "":
                return None
            out = set()
            for part in raw.split(","):
                try:
                    out.add(cast(part.strip()))
                except ValueError:
                    _bad(field, f"unknown value {part.strip()!r}")
            return frozenset(out)

        def number(raw: str | None, field: str):
            if raw is None or raw.strip() == "":
                return None
            try:
                return float(raw)
            except ValueError:
                _bad(field, f"expected a number, got {raw!r}")

        query = CatalogQuery(
            providers=split(providers, Provider, "providers"),
            markets=split(markets, MarketSpace, "markets"),
            min_capacity=number(min_capacity, "min_capacity"),
            max_price=number(max_price, "max_price"),
        )
        return [t.to_dict() for t in filter_catalog(catalog, query)]

    # ---- applications --------------------------------------------------

    @app.get("/api/applications")
    def list_applications(request: Request):
        account = authed(request)
        return [_public(d) for d in my_docs(APPS, account["id"])]

    @app.post("/api/applications", status_code=201)
    def create_application(request: Request, body=Body(...)):
        account = authed(request)
        fields = _parse_app_payload(body)
        if any(
            d["name"] == fields["name"] for d in my_docs(APPS, account["id"])
        ):
            _conflict("name", f"an application named {fields['name']!r} already exists")
        doc = {"id": _new_id("app"), "owner_id": account["id"], "created_at": _now(), **fields}
        store.put(APPS, doc["id"], doc)
        return _public(doc)

    @app.put("/api/applications/{app_id}")
    def update_application(app_id: str, request: Request, body=Body(...)):
        account = authed(request)
        doc = owned(APPS, app_id, account["id"])
        fields = _parse_app_payload(body)
        if any(
            d["name"] == fields["name"] and d["id"] != app_id
            for d in my_docs(APPS, account["id"])
        ):
            _conflict("name", f"an application named {fields['name']!r} already exists")
        doc.update(fields)
        store.put(APPS, app_id, doc)
        bump_portfolios_containing(app_id, account["id"])
        return _public(doc)

    @app.delete("/api/applications/{app_id}")
    def delete_application(app_id: str, request: Request):
        account = authed(request)
        owned(APPS, app_id, account["id"])
        bump_portfolios_containing(app_id, account["id"], remove=True)
        store.delete(APPS, app_id)
        return {"ok": True, "id": app_id}

    @app.post("/api/applications/{app_id}/copy", status_code=201)
    def copy_application(app_id: str, request: Request):
        account = authed(request)
        doc = owned(APPS, app_id, account["id"])
        copy_name = doc["name"] + "_copy"
        if any(d["name"] == copy_name for d in my_docs(APPS, account["id"])):
            _conflict("name", f"an application named {copy_name!r} already exists")
        clone = {
            **doc,
            "id": _new_id("app"),
            "name": copy_name,
            "created_at": _now(),
        }
        store.put(APPS, clone["id"], clone)
        return _public(clone)

    # ---- portfolios ----------------------------------------------------

    def _parse_portfolio_payload(body, owner_id: str) -> dict:
        body = _require_object(body)
        _reject_unknown(body, PORTFOLIO_FIELDS)
        name = _str_field(body, "name")
        raw_providers = body.get("providers")
        if not isinstance(raw_providers, list) or not raw_providers:
            _bad("providers", "must list at least one provider")
        providers = []
        for p in raw_providers:
            try:
                providers.append(Provider(p))
            except ValueError:
                _bad("providers", f"unknown provider {p!r}")
        q_min = _num_field(body, "q_min")
        if not 0.0 <= q_min <= 1.0:
            _bad("q_min", "must be between 0 and 1")
        raw_app_ids = body.get("app_ids", [])
        if not isinstance(raw_app_ids, list):
            _bad("app_ids", "must be a list of application ids")
        app_ids = []
        for aid in raw_app_ids:
            doc = store.get(APPS, aid) if isinstance(aid, str) else None
            if doc is None or doc.get("owner_id") != owner_id:
                _bad("app_ids", f"unknown application id {aid!r}")
            if aid not in app_ids:
                app_ids.append(aid)
        try:
            Portfolio(
                id="probe", name=name, providers=frozenset(providers),
                q_min=q_min, app_ids=frozenset(app_ids),
            )
        except ValueError as exc:
            _bad("body", str(exc))
        return {
            "name": name,
            "providers": sorted(p.value for p in providers),
            "q_min": q_min,
            "app_ids": sorted(app_ids),
        }

    @app.get("/api/portfolios")
    def list_portfolios(request: Request):
        account = authed(request)
        return [_public(d) for d in my_docs(PORTFOLIOS, account["id"])]

    @app.post("/api/portfolios", status_code=201)
    def create_portfolio(request: Request, body=Body(...)):
        account = authed(request)
        fields = _parse_portfolio_payload(body, account["id"])
        if any(d["name"] == fields["name"] for d in my_docs(PORTFOLIOS, account["id"])):
            _conflict("name", f"a portfolio named {fields['name']!r} already exists")
        doc = {
            "id": _new_id("pf"), "owner_id": account["id"],
            "version": 1, "created_at": _now(), **fields,
        }
        store.put(PORTFOLIOS, doc["id"], doc)
        return _public(doc)

    @app.put("/api/portfolios/{pf_id}")
    def update_portfolio(pf_id: str, request: Request, body=Body(...)):
        account = authed(request)
        doc = owned(PORTFOLIOS, pf_id, account["id"])
        fields = _parse_portfolio_payload(body, account["id"])
        if any(
            d["name"] == fields["name"] and d["id"] != pf_id
            for d in my_docs(PORTFOLIOS, account["id"])
        ):
            _conflict("name", f"a portfolio named {fields['name']!r} already exists")
        doc.update(fields)
        doc["version"] += 1
        store.put(PORTFOLIOS, pf_id, doc)
        return _public(doc)

    @app.delete("/api/portfolios/{pf_id}")
    def delete_portfolio(pf_id: str, request: Request):
        account = authed(request)
        owned(PORTFOLIOS, pf_id, account["id"])
        for adoc in store.all(ALLOCATIONS):
            if adoc.get("owner_id") == account["id"] and adoc["portfolio_id"] == pf_id:
                store.delete(ALLOCATIONS, adoc["id"])
                if adoc.get("job_id"):
                    store.delete(JOBS, adoc["job_id"])
        store.delete(PORTFOLIOS, pf_id)
        return {"ok": True, "id": pf_id}

    # ---- allocations and jobs ------------------------------------------

    @app.get("/api/portfolios/{pf_id}/allocations")
    def list_allocations(pf_id: str, request: Request):
        account = authed(request)
        owned(PORTFOLIOS, pf_id, account["id"])
        docs = [
            d
            for d in my_docs(ALLOCATIONS, account["id"])
            if d["portfolio_id"] == pf_id
        ]
        return [_alloc_public(d) for d in docs]

    @app.post("/api/portfolios/{pf_id}/allocations", status_code=201)
    def create_allocation(pf_id: str, request: Request, body=Body(default=None)):
        account = authed(request)
        pdoc = owned(PORTFOLIOS, pf_id, account["id"])
        body = _require_object(body if body is not None else {})
        _reject_unknown(body, {"algorithm", "ga_config"})
        try:
            algorithm = Algorithm(body.get("algorithm", Algorithm.ERICH.value))
        except ValueError:
            _bad("algorithm", f"unknown algorithm {body.get('algorithm')!r}")
        ga_body = body.get("ga_config") or {}
        if not isinstance(ga_body, Mapping):
            _bad("ga_config", "must be an object")
        _reject_unknown(ga_body, GA_FIELDS)
        try:
            cfg = GaConfig(**ga_body)
        except (TypeError, ValueError) as exc:
            _bad("ga_config", str(exc))

        if not pdoc["app_ids"]:
            _bad("app_ids", "portfolio has no applications")
        snapshot = [store.get(APPS, aid) for aid in sorted(pdoc["app_ids"])]
        domain_apps = [Application.from_dict(d) for d in snapshot]
        types = filter_catalog(
            catalog, CatalogQuery(providers=frozenset(pdoc["providers"]))
        )
        if not types:
            _bad("providers", "no instance types match the portfolio providers")

        allocation_id = _new_id("alloc")
        job_id = _new_id("job")
        created = _now()
        adoc = {
            "id": allocation_id,
            "owner_id": account["id"],
            "job_id": job_id,
            "portfolio_id": pf_id,
            "portfolio_version": pdoc["version"],
            "algorithm": algorithm.value,
            "parameters": {},
            "status": "pending",
            "created_at": created,
            "apps_snapshot": [a.to_dict() for a in domain_apps],
        }
        store.put(ALLOCATIONS, allocation_id, adoc)
        jdoc = {
            "id": job_id,
            "owner_id": account["id"],
            "allocation_id": allocation_id,
            "status": JobStatus.PENDING.value,
            "progress": None,
            "error": None,
            "created_at": created,
        }
        store.put(JOBS, job_id, jdoc)

        q_min = pdoc["q_min"]
        version = pdoc["version"]

        def task():
            try:
                inp = ErichInput.from_sets(
                    apps=domain_apps,
                    types=types,
                    q_min=q_min,
                    horizon=config.horizon,
                    reserved_term=config.reserved_term,
                )
                if algorithm is Algorithm.ERICH:
                    alloc = erich.optimize(inp)
                else:
                    alloc, _trace = georg.run(
                        inp,
                        cfg,
                        progress_sink=lambda g, b, m: runner.update_progress(
                            job_id, g, b, m
                        ),
                    )
            except Exception as exc:
                failed = store.get(ALLOCATIONS, allocation_id)
                if failed is not None:
                    failed["status"] = "failed"
                    failed["error"] = str(exc)
                    store.put(ALLOCATIONS, allocation_id, failed)
                raise
            alloc = replace(
                alloc, id=allocation_id, portfolio_id=pf_id, portfolio_version=version
            )
            done = alloc.to_dict()
            done["owner_id"] = account["id"]
            done["job_id"] = job_id
            done["created_at"] = created
            done["apps_snapshot"] = adoc["apps_snapshot"]
            store.put(ALLOCATIONS, allocation_id, done)

        runner.submit(job_id, task)
        return _public(jdoc)

    @app.delete("/api/allocations/{alloc_id}")
    def delete_allocation(alloc_id: str, request: Request):
        account = authed(request)
        doc = owned(ALLOCATIONS, alloc_id, account["id"])
        store.delete(ALLOCATIONS, alloc_id)
        if doc.get("job_id"):
            store.delete(JOBS, doc["job_id"])
        return {"ok": True, "id": alloc_id}

    @app.get("/api/jobs/{job_id}")
    def get_job(job_id: str, request: Request):
        account = authed(request)
        return _public(owned(JOBS, job_id, account["id"]))

    @app.get("/api/health")
    def health():
        return {"status": "ok"}

    if static_dir is not None and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")

    return app
