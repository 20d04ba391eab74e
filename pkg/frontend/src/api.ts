// Thin fetch wrapper around the allocation service.  Every method returns
// parsed JSON or throws an ApiError carrying the server's field + message.

import type {
  Algorithm,
  AllocationDoc,
  AppDoc,
  AppPayload,
  GaParams,
  InstanceFilter,
  InstanceTypeDoc,
  JobDoc,
  LoginResult,
  PortfolioDoc,
  PortfolioPayload,
} from "./types.js";

export class ApiError extends Error {
  status: number;
  field: string | null;

  constructor(status: number, message: string, field: string | null = null) {
    super(message);
    this.name = "ApiError";
    this.status = status;
    this.field = field;
  }
}

const TOKEN_KEY = "cloudfolio.token";
const EMAIL_KEY = "cloudfolio.email";

export function storedToken(): string | null {
  return window.localStorage.getItem(TOKEN_KEY);
}

export function storedEmail(): string | null {
  return window.localStorage.getItem(EMAIL_KEY);
}

function rememberSession(token: string, email: string): void {
  window.localStorage.setItem(TOKEN_KEY, token);
  window.localStorage.setItem(EMAIL_KEY, email);
}

function forgetSession(): void {
  window.localStorage.removeItem(TOKEN_KEY);
  window.localStorage.removeItem(EMAIL_KEY);
}

async function request<T>(
  method: string,
  path: string,
  body?: unknown,
): Promise<T> {
  const headers: Record<string, string> = {};
  const token = storedToken();
  if (token) {
    headers["Authorization"] = `Bearer ${token}`;
  }
  const init: RequestInit = { method, headers };
  if (body !== undefined) {
    headers["Content-Type"] = "application/json";
    init.body = JSON.stringify(body);
  }

  let response: Response;
  try {
    response = await fetch(path, init);
  } catch {
    throw new ApiError(0, "service unreachable");
  }

  if (response.status === 204) {
    return undefined as T;
  }
  const payload = await response.json().catch(() => null);
  if (!response.ok) {
    throw toApiError(response.status, payload);
  }
  return payload as T;
}

function toApiError(status: number, payload: unknown): ApiError {
  if (payload && typeof payload === "object" && "detail" in payload) {
    const detail = (payload as { detail: unknown }).detail;
    if (typeof detail === "string") {
      return new ApiError(status, detail);
    }
    if (detail && typeof detail === "object") {
      const d = detail as { field?: unknown; message?: unknown };
      const message = typeof d.message === "string" ? d.message : "request failed";
      const field = typeof d.field === "string" ? d.field : null;
      return new ApiError(status, message, field);
    }
  }
  return new ApiError(status, `request failed (${status})`);
}

export async function register(email: string, username: string, password: string): Promise<void> {
  await request("POST", "/api/register", { email, username, password });
}

export async function login(email: string, password: string): Promise<LoginResult> {
  const account = email.trim().toLowerCase();
  const result = await request<LoginResult>("POST", "/api/login", { email: account, password });
  rememberSession(result.token, account);
  return result;
}

export async function logout(): Promise<void> {
  try {
    await request("POST", "/api/logout");
  } finally {
    forgetSession();
  }
}

export async function listInstances(filter: InstanceFilter = {}): Promise<InstanceTypeDoc[]> {
  const params = new URLSearchParams();
  if (filter.providers && filter.providers.length > 0) {
    params.set("providers", filter.providers.join(","));
  }
  if (filter.markets && filter.markets.length > 0) {
    params.set("markets", filter.markets.join(","));
  }
  if (filter.min_capacity !== undefined) {
    params.set("min_capacity", String(filter.min_capacity));
  }
  if (filter.max_price !== undefined) {
    params.set("max_price", String(filter.max_price));
  }
  const query = params.toString();
  return request("GET", query ? `/api/instances?${query}` : "/api/instances");
}

export async function listApps(): Promise<AppDoc[]> {
  return request("GET", "/api/applications");
}

export async function createApp(payload: AppPayload): Promise<AppDoc> {
  return request("POST", "/api/applications", payload);
}

export async function updateApp(id: string, payload: AppPayload): Promise<AppDoc> {
  return request("PUT", `/api/applications/${id}`, payload);
}

export async function deleteApp(id: string): Promise<void> {
  await request("DELETE", `/api/applications/${id}`);
}

export async function copyApp(id: string): Promise<AppDoc> {
  return request("POST", `/api/applications/${id}/copy`);
}

export async function listPortfolios(): Promise<PortfolioDoc[]> {
  return request("GET", "/api/portfolios");
}

export async function createPortfolio(payload: PortfolioPayload): Promise<PortfolioDoc> {
  return request("POST", "/api/portfolios", payload);
}

export async function updatePortfolio(
  id: string,
  payload: PortfolioPayload,
): Promise<PortfolioDoc> {
  return request("PUT", `/api/portfolios/${id}`, payload);
}

export async function deletePortfolio(id: string): Promise<void> {
  await request("DELETE", `/api/portfolios/${id}`);
}

export async function listAllocations(portfolioId: string): Promise<AllocationDoc[]> {
  return request("GET", `/api/portfolios/${portfolioId}/allocations`);
}

// The service answers allocation submissions with the tracking job, not the
// allocation itself; the allocation shows up in the portfolio's list.
export async function createAllocation(
  portfolioId: string,
  algorithm: Algorithm,
  gaConfig?: GaParams,
): Promise<JobDoc> {
  const body: Record<string, unknown> = { algorithm };
  if (algorithm === "georg" && gaConfig) {
    body.ga_config = gaConfig;
  }
  return request("POST", `/api/portfolios/${portfolioId}/allocations`, body);
}

export async function deleteAllocation(id: string): Promise<void> {
  await request("DELETE", `/api/allocations/${id}`);
}

export async function getJob(id: string): Promise<JobDoc> {
  return request("GET", `/api/jobs/${id}`);
}
