// In-memory stand-in for the allocation service, installed as a fetch stub.
// Response shapes mirror the real API; optimization results are canned.

import type {
  AllocationDoc,
  AppDoc,
  InstanceTypeDoc,
  JobDoc,
  PortfolioDoc,
} from "../src/types.js";

export const MOCK_CATALOG: InstanceTypeDoc[] = [
  { id: "aws:m5.large:on_demand", provider: "aws", name: "m5.large", market: "on_demand", capacity: 2, price_per_slot: 0.096, spot_only_flag: false },
  { id: "aws:m5.2xlarge:reserved", provider: "aws", name: "m5.2xlarge", market: "reserved", capacity: 8, price_per_slot: 0.242, spot_only_flag: false },
  { id: "aws:m5.2xlarge:spot", provider: "aws", name: "m5.2xlarge", market: "spot", capacity: 8, price_per_slot: 0.115, spot_only_flag: true },
  { id: "google_cloud:n2-standard-4:on_demand", provider: "google_cloud", name: "n2-standard-4", market: "on_demand", capacity: 4, price_per_slot: 0.194, spot_only_flag: false },
  { id: "azure:D16s_v5:reserved", provider: "azure", name: "D16s_v5", market: "reserved", capacity: 16, price_per_slot: 0.46, spot_only_flag: false },
  { id: "azure:D16s_v5:spot", provider: "azure", name: "D16s_v5", market: "spot", capacity: 16, price_per_slot: 0.14, spot_only_flag: true },
  { id: "alibaba:ecs.g7.xlarge:on_demand", provider: "alibaba", name: "ecs.g7.xlarge", market: "on_demand", capacity: 4, price_per_slot: 0.201, spot_only_flag: false },
  { id: "alibaba:ecs.re6.26xlarge:on_demand", provider: "alibaba", name: "ecs.re6.26xlarge", market: "on_demand", capacity: 104, price_per_slot: 1820.0, spot_only_flag: false },
];

const EMAIL_SHAPE = /^[^@\s]+@[^@\s]+\.[^@\s]+$/;
const PROVIDERS = ["aws", "google_cloud", "azure", "alibaba"];
const MARKETS = ["reserved", "on_demand", "spot"];

interface Owned {
  owner: string;
}

type StoredApp = AppDoc & Owned;
type StoredPortfolio = PortfolioDoc & Owned;
type StoredAllocation = Partial<AllocationDoc> &
  Owned & {
    id: string;
    portfolio_id: string;
    portfolio_version: number;
    algorithm: "erich" | "georg";
    parameters: Record<string, unknown>;
    status: string;
    job_id: string;
    created_at: string;
  };
type StoredJob = JobDoc & Owned;

export interface LoggedRequest {
  method: string;
  path: string;
  body: unknown;
}

function jsonResponse(status: number, body: unknown): Response {
  return {
    ok: status >= 200 && status < 300,
    status,
    json: async () => body,
  } as unknown as Response;
}

function fieldError(status: number, field: string, message: string): Response {
  return jsonResponse(status, { detail: { field, message } });
}

export class MockServer {
  accounts = new Map<string, string>();
  tokens = new Map<string, string>();
  apps = new Map<string, StoredApp>();
  portfolios = new Map<string, StoredPortfolio>();
  allocations = new Map<string, StoredAllocation>();
  jobs = new Map<string, StoredJob>();
  requests: LoggedRequest[] = [];
  private counter = 0;

  install(): void {
    globalThis.fetch = ((input: RequestInfo | URL, init?: RequestInit) =>
      this.handle(String(input), init)) as typeof fetch;
  }

  private nextId(prefix: string): string {
    this.counter += 1;
    return `${prefix}-${String(this.counter).padStart(4, "0")}`;
  }

  /** Flips every queued job to completed and fills in a canned allocation. */
  settleJobs(): void {
    for (const job of this.jobs.values()) {
      if (job.status !== "pending" && job.status !== "running") continue;
      const alloc = this.allocations.get(job.allocation_id);
      if (!alloc) continue;
      job.status = "completed";
      job.progress = null;
      const erich = alloc.algorithm === "erich";
      const reserved = MOCK_CATALOG[1];
      const spot = MOCK_CATALOG[5];
      alloc.status = "completed";
      alloc.total_cost = erich ? 0.484 : 0.532;
      alloc.mean_utilization = erich ? 0.41 : 0.37;
      alloc.instances = [
        { id: "i-res-1", type_ref: reserved, begin: 0, end: 2 },
        { id: "i-spot-1", type_ref: spot, begin: 2, end: 4 },
      ];
      alloc.assignment = { "app-0001": { "0": "i-res-1", "1": "i-res-1" } };
      // the service reports every market, zeroed when unused
      alloc.per_market_stats = {
        reserved: { instance_count: 1, total_cost: reserved.price_per_slot * 2, capacity_slots: 16, assigned_demand: 4.0, utilization: erich ? 0.5 : 0.45 },
        on_demand: { instance_count: 0, total_cost: 0, capacity_slots: 0, assigned_demand: 0, utilization: 0 },
        spot: { instance_count: 1, total_cost: spot.price_per_slot * 2, capacity_slots: 32, assigned_demand: 6.4, utilization: erich ? 0.2 : 0.18 },
      };
    }
  }

  async handle(url: string, init?: RequestInit): Promise<Response> {
    const method = (init?.method ?? "GET").toUpperCase();
    const [path, query = ""] = url.split("?");
    let body: unknown;
    if (init?.body) {
      body = JSON.parse(String(init.body));
    }
    this.requests.push({ method, path, body });

    if (path === "/api/health") {
      return jsonResponse(200, { status: "ok" });
    }
    if (path === "/api/register" && method === "POST") {
      return this.register(body);
    }
    if (path === "/api/login" && method === "POST") {
      return this.login(body);
    }

    const owner = this.authedEmail(init);
    if (!owner) {
      return jsonResponse(401, { detail: "invalid credentials" });
    }

    if (path === "/api/logout" && method === "POST") {
      const header = this.bearer(init);
      if (header) this.tokens.delete(header);
      return jsonResponse(200, { ok: true });
    }
    if (path === "/api/instances" && method === "GET") {
      return this.listInstances(query);
    }
    if (path === "/api/applications" && method === "GET") {
      return jsonResponse(200, this.ownedApps(owner).map(publicApp));
    }
    if (path === "/api/applications" && method === "POST") {
      return this.createApp(owner, body);
    }
    let match = path.match(/^\/api\/applications\/([^/]+)\/copy$/);
    if (match && method === "POST") {
      return this.copyApp(owner, match[1]);
    }
    match = path.match(/^\/api\/applications\/([^/]+)$/);
    if (match) {
      if (method === "PUT") return this.updateApp(owner, match[1], body);
      if (method === "DELETE") return this.deleteApp(owner, match[1]);
    }
    if (path === "/api/portfolios" && method === "GET") {
      return jsonResponse(200, this.ownedPortfolios(owner).map(publicPortfolio));
    }
    if (path === "/api/portfolios" && method === "POST") {
      return this.createPortfolio(owner, body);
    }
    match = path.match(/^\/api\/portfolios\/([^/]+)\/allocations$/);
    if (match) {
      if (method === "GET") return this.listAllocations(owner, match[1]);
      if (method === "POST") return this.createAllocation(owner, match[1], body);
    }
    match = path.match(/^\/api\/portfolios\/([^/]+)$/);
    if (match) {
      if (method === "PUT") return this.updatePortfolio(owner, match[1], body);
      if (method === "DELETE") return this.deletePortfolio(owner, match[1]);
    }
    match = path.match(/^\/api\/allocations\/([^/]+)$/);
    if (match && method === "DELETE") {
      return this.deleteAllocation(owner, match[1]);
    }
    match = path.match(/^\/api\/jobs\/([^/]+)$/);
    if (match && method === "GET") {
      const job = this.jobs.get(match[1]);
      if (!job || job.owner !== owner) return jsonResponse(404, { detail: "not found" });
      const { owner: _, ...doc } = job;
      return jsonResponse(200, doc);
    }
    return jsonResponse(404, { detail: "not found" });
  }

  private bearer(init?: RequestInit): string | null {
    const headers = (init?.headers ?? {}) as Record<string, string>;
    const value = headers["Authorization"] ?? headers["authorization"];
    if (!value || !value.startsWith("Bearer ")) return null;
    return value.slice("Bearer ".length);
  }

  private authedEmail(init?: RequestInit): string | null {
    const token = this.bearer(init);
    if (!token) return null;
    return this.tokens.get(token) ?? null;
  }

  private register(body: unknown): Response {
    const { email, username, password } = body as {
      email?: string;
      username?: string;
      password?: string;
    };
    if (!email || !EMAIL_SHAPE.test(email)) {
      return fieldError(400, "email", "not a valid email address");
    }
    if (typeof username !== "string" || username.trim() === "") {
      return fieldError(400, "username", "must be a non-empty string");
    }
    if (!password || password.length < 8) {
      return fieldError(400, "password", "must be at least 8 characters");
    }
    const key = email.toLowerCase();
    if (this.accounts.has(key)) {
      return fieldError(409, "email", "email already registered");
    }
    this.accounts.set(key, password);
    return jsonResponse(201, {
      id: this.nextId("acct"),
      email: key,
      username,
      created_at: now(),
    });
  }

  private login(body: unknown): Response {
    const { email, password } = body as { email?: string; password?: string };
    const key = (email ?? "").toLowerCase();
    if (!this.accounts.has(key) || this.accounts.get(key) !== password) {
      return jsonResponse(401, { detail: "invalid credentials" });
    }
    const token = `tok-${key}-${this.counter++}`;
    this.tokens.set(token, key);
    return jsonResponse(200, { token, expires_at: now() });
  }

  private listInstances(query: string): Response {
    const params = new URLSearchParams(query);
    let result = [...MOCK_CATALOG];
    const providers = params.get("providers");
    if (providers !== null) {
      const wanted = providers.split(",").map((s) => s.trim());
      for (const p of wanted) {
        if (!PROVIDERS.includes(p)) return fieldError(400, "providers", `unknown value '${p}'`);
      }
      result = result.filter((t) => wanted.includes(t.provider));
    }
    const markets = params.get("markets");
    if (markets !== null) {
      const wanted = markets.split(",").map((s) => s.trim());
      for (const m of wanted) {
        if (!MARKETS.includes(m)) return fieldError(400, "markets", `unknown value '${m}'`);
      }
      result = result.filter((t) => wanted.includes(t.market));
    }
    const minCapacity = params.get("min_capacity");
    if (minCapacity !== null) {
      const n = Number(minCapacity);
      if (!Number.isFinite(n)) return fieldError(400, "min_capacity", `expected a number, got '${minCapacity}'`);
      result = result.filter((t) => t.capacity >= n);
    }
    const maxPrice = params.get("max_price");
    if (maxPrice !== null) {
      const n = Number(maxPrice);
      if (!Number.isFinite(n)) return fieldError(400, "max_price", `expected a number, got '${maxPrice}'`);
      result = result.filter((t) => t.price_per_slot <= n);
    }
    result.sort((a, b) =>
      a.provider.localeCompare(b.provider) ||
      a.name.localeCompare(b.name) ||
      a.market.localeCompare(b.market),
    );
    return jsonResponse(200, result);
  }

  private ownedApps(owner: string): StoredApp[] {
    return [...this.apps.values()].filter((a) => a.owner === owner);
  }

  private ownedPortfolios(owner: string): StoredPortfolio[] {
    return [...this.portfolios.values()].filter((p) => p.owner === owner);
  }

  private validateAppPayload(body: unknown): Response | { payload: Omit<AppDoc, "id" | "created_at"> } {
    const b = body as Record<string, unknown>;
    const name = b.name;
    if (typeof name !== "string" || name.trim() === "") {
      return fieldError(400, "name", "must be a non-empty string");
    }
    const mu = b.mu;
    if (typeof mu !== "number" || !Number.isFinite(mu) || mu < 0) {
      return fieldError(400, "mu", "must be >= 0.0");
    }
    const sigma = b.sigma;
    if (typeof sigma !== "number" || !Number.isFinite(sigma) || sigma < 0) {
      return fieldError(400, "sigma", "must be >= 0.0");
    }
    const start = b.start;
    if (!Number.isInteger(start) || (start as number) < 0) {
      return fieldError(400, "start", "must be >= 0");
    }
    const finish = b.finish;
    if (!Number.isInteger(finish)) {
      return fieldError(400, "finish", "must be an integer");
    }
    if ((finish as number) <= (start as number)) {
      return fieldError(400, "finish", "finish must be strictly after start");
    }
    return {
      payload: {
        name: name.trim(),
        mu: mu as number,
        sigma: sigma as number,
        preemptible: Boolean(b.preemptible),
        start: start as number,
        finish: finish as number,
      },
    };
  }

  private createApp(owner: string, body: unknown): Response {
    const checked = this.validateAppPayload(body);
    if ("status" in checked) return checked;
    const { payload } = checked;
    if (this.ownedApps(owner).some((a) => a.name === payload.name)) {
      return fieldError(409, "name", "an application with this name already exists");
    }
    const doc: StoredApp = { ...payload, id: this.nextId("app"), created_at: now(), owner };
    this.apps.set(doc.id, doc);
    return jsonResponse(201, publicApp(doc));
  }

  private updateApp(owner: string, id: string, body: unknown): Response {
    const existing = this.apps.get(id);
    if (!existing || existing.owner !== owner) return jsonResponse(404, { detail: "not found" });
    const checked = this.validateAppPayload(body);
    if ("status" in checked) return checked;
    const { payload } = checked;
    if (this.ownedApps(owner).some((a) => a.id !== id && a.name === payload.name)) {
      return fieldError(409, "name", "an application with this name already exists");
    }
    Object.assign(existing, payload);
    this.bumpPortfoliosContaining(id);
    return jsonResponse(200, publicApp(existing));
  }

  private deleteApp(owner: string, id: string): Response {
    const existing = this.apps.get(id);
    if (!existing || existing.owner !== owner) return jsonResponse(404, { detail: "not found" });
    for (const pf of this.portfolios.values()) {
      if (pf.app_ids.includes(id)) {
        pf.app_ids = pf.app_ids.filter((a) => a !== id);
        pf.version += 1;
      }
    }
    this.apps.delete(id);
    return jsonResponse(200, { ok: true, id });
  }

  private copyApp(owner: string, id: string): Response {
    const existing = this.apps.get(id);
    if (!existing || existing.owner !== owner) return jsonResponse(404, { detail: "not found" });
    const name = `${existing.name}_copy`;
    if (this.ownedApps(owner).some((a) => a.name === name)) {
      return fieldError(409, "name", "an application with this name already exists");
    }
    const doc: StoredApp = { ...existing, id: this.nextId("app"), name, created_at: now() };
    this.apps.set(doc.id, doc);
    return jsonResponse(201, publicApp(doc));
  }

  private bumpPortfoliosContaining(appId: string): void {
    for (const pf of this.portfolios.values()) {
      if (pf.app_ids.includes(appId)) pf.version += 1;
    }
  }

  private validatePortfolioPayload(owner: string, body: unknown): Response | { payload: Omit<PortfolioDoc, "id" | "version" | "created_at"> } {
    const b = body as Record<string, unknown>;
    if (typeof b.name !== "string" || b.name.trim() === "") {
      return fieldError(400, "name", "must be a non-empty string");
    }
    const providers = b.providers;
    if (!Array.isArray(providers) || providers.length === 0) {
      return fieldError(400, "providers", "must list at least one provider");
    }
    for (const p of providers) {
      if (!PROVIDERS.includes(p)) return fieldError(400, "providers", `unknown provider '${p}'`);
    }
    const q = b.q_min;
    if (typeof q !== "number" || q < 0 || q > 1) {
      return fieldError(400, "q_min", "must be between 0 and 1");
    }
    const appIds = (b.app_ids ?? []) as unknown[];
    if (!Array.isArray(appIds)) {
      return fieldError(400, "app_ids", "must be a list of application ids");
    }
    for (const aid of appIds) {
      const app = this.apps.get(String(aid));
      if (!app || app.owner !== owner) {
        return fieldError(400, "app_ids", `unknown application id '${aid}'`);
      }
    }
    return {
      payload: {
        name: (b.name as string).trim(),
        providers: [...(providers as PortfolioDoc["providers"])],
        q_min: q as number,
        app_ids: [...new Set(appIds.map(String))].sort(),
      },
    };
  }

  private createPortfolio(owner: string, body: unknown): Response {
    const checked = this.validatePortfolioPayload(owner, body);
    if ("status" in checked) return checked;
    const { payload } = checked;
    if (this.ownedPortfolios(owner).some((p) => p.name === payload.name)) {
      return fieldError(409, "name", "a portfolio with this name already exists");
    }
    const doc: StoredPortfolio = { ...payload, id: this.nextId("pf"), version: 1, created_at: now(), owner };
    this.portfolios.set(doc.id, doc);
    return jsonResponse(201, publicPortfolio(doc));
  }

  private updatePortfolio(owner: string, id: string, body: unknown): Response {
    const existing = this.portfolios.get(id);
    if (!existing || existing.owner !== owner) return jsonResponse(404, { detail: "not found" });
    const checked = this.validatePortfolioPayload(owner, body);
    if ("status" in checked) return checked;
    const { payload } = checked;
    if (this.ownedPortfolios(owner).some((p) => p.id !== id && p.name === payload.name)) {
      return fieldError(409, "name", "a portfolio with this name already exists");
    }
    Object.assign(existing, payload);
    existing.version += 1;
    return jsonResponse(200, publicPortfolio(existing));
  }

  private deletePortfolio(owner: string, id: string): Response {
    const existing = this.portfolios.get(id);
    if (!existing || existing.owner !== owner) return jsonResponse(404, { detail: "not found" });
    for (const alloc of [...this.allocations.values()]) {
      if (alloc.portfolio_id === id) {
        this.jobs.delete(alloc.job_id);
        this.allocations.delete(alloc.id);
      }
    }
    this.portfolios.delete(id);
    return jsonResponse(200, { ok: true, id });
  }

  private listAllocations(owner: string, portfolioId: string): Response {
    const pf = this.portfolios.get(portfolioId);
    if (!pf || pf.owner !== owner) return jsonResponse(404, { detail: "not found" });
    const docs = [...this.allocations.values()]
      .filter((a) => a.portfolio_id === portfolioId)
      .map(publicAllocation);
    return jsonResponse(200, docs);
  }

  private createAllocation(owner: string, portfolioId: string, body: unknown): Response {
    const pf = this.portfolios.get(portfolioId);
    if (!pf || pf.owner !== owner) return jsonResponse(404, { detail: "not found" });
    const b = (body ?? {}) as Record<string, unknown>;
    const algorithm = (b.algorithm ?? "erich") as string;
    if (algorithm !== "erich" && algorithm !== "georg") {
      return fieldError(400, "algorithm", `unknown algorithm '${algorithm}'`);
    }
    if (pf.app_ids.length === 0) {
      return fieldError(400, "app_ids", "portfolio has no applications");
    }
    const parameters: Record<string, unknown> = { algorithm };
    if (algorithm === "georg" && b.ga_config !== undefined) {
      parameters.ga_config = b.ga_config;
    }
    const allocId = this.nextId("alloc");
    const jobId = this.nextId("job");
    const alloc: StoredAllocation = {
      id: allocId,
      portfolio_id: portfolioId,
      portfolio_version: pf.version,
      algorithm,
      parameters,
      status: "pending",
      job_id: jobId,
      created_at: now(),
      owner,
    };
    this.allocations.set(allocId, alloc);
    const job: StoredJob = {
      id: jobId,
      allocation_id: allocId,
      status: "pending",
      progress: null,
      error: null,
      created_at: now(),
      owner,
    };
    this.jobs.set(jobId, job);
    // mirrors the service: submission answers with the tracking job
    const { owner: _, ...publicJob } = job;
    return jsonResponse(201, publicJob);
  }

  private deleteAllocation(owner: string, id: string): Response {
    const existing = this.allocations.get(id);
    if (!existing || existing.owner !== owner) return jsonResponse(404, { detail: "not found" });
    this.jobs.delete(existing.job_id);
    this.allocations.delete(id);
    return jsonResponse(200, { ok: true, id });
  }
}

function now(): string {
  return new Date().toISOString();
}

function publicApp(doc: StoredApp): AppDoc {
  const { owner: _, ...rest } = doc;
  return rest;
}

function publicPortfolio(doc: StoredPortfolio): PortfolioDoc {
  const { owner: _, ...rest } = doc;
  return { ...rest, app_ids: [...rest.app_ids] };
}

function publicAllocation(doc: StoredAllocation): Record<string, unknown> {
  const { owner: _, ...rest } = doc;
  return {
    instances: [],
    assignment: {},
    per_market_stats: {},
    total_cost: 0,
    mean_utilization: 0,
    ...rest,
  };
}
