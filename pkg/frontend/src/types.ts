// Wire types for the allocation service REST API.

export type Provider = "aws" | "google_cloud" | "azure" | "alibaba";
export type Market = "reserved" | "on_demand" | "spot";
export type Algorithm = "erich" | "georg";
export type JobStatus = "pending" | "running" | "completed" | "failed";

export const PROVIDERS: Provider[] = ["aws", "google_cloud", "azure", "alibaba"];
export const MARKETS: Market[] = ["reserved", "on_demand", "spot"];

export interface InstanceTypeDoc {
  id: string;
  provider: Provider;
  name: string;
  market: Market;
  capacity: number;
  price_per_slot: number;
  spot_only_flag: boolean;
}

export interface AppDoc {
  id: string;
  name: string;
  mu: number;
  sigma: number;
  preemptible: boolean;
  start: number;
  finish: number;
  created_at: string;
}

export interface AppPayload {
  name: string;
  mu: number;
  sigma: number;
  preemptible: boolean;
  start: number;
  finish: number;
}

export interface PortfolioDoc {
  id: string;
  name: string;
  providers: Provider[];
  q_min: number;
  app_ids: string[];
  version: number;
  created_at: string;
}

export interface PortfolioPayload {
  name: string;
  providers: Provider[];
  q_min: number;
  app_ids: string[];
}

export interface GaParams {
  population_size: number;
  max_generations: number;
  mutation_rate: number;
  stagnation_window: number;
  convergence_epsilon: number;
  seed: number;
}

export const GA_DEFAULTS: GaParams = {
  population_size: 20,
  max_generations: 10,
  mutation_rate: 0.2,
  stagnation_window: 5,
  convergence_epsilon: 0.01,
  seed: 0,
};

export interface ProvisionedInstanceDoc {
  id: string;
  type_ref: InstanceTypeDoc;
  begin: number;
  end: number;
}

export interface MarketStatsDoc {
  instance_count: number;
  total_cost: number;
  capacity_slots: number;
  assigned_demand: number;
  utilization: number;
}

export interface AllocationDoc {
  id: string;
  portfolio_id: string;
  portfolio_version: number;
  algorithm: Algorithm;
  parameters: Record<string, unknown>;
  instances: ProvisionedInstanceDoc[];
  assignment: Record<string, Record<string, string>>;
  status: string;
  total_cost: number;
  mean_utilization: number;
  per_market_stats: Record<string, MarketStatsDoc>;
  job_id: string;
  created_at: string;
  error?: string;
}

export interface JobProgress {
  generation: number;
  best_cost: number;
  mean_cost: number;
}

export interface JobDoc {
  id: string;
  allocation_id: string;
  status: JobStatus;
  progress: JobProgress | null;
  error: string | null;
  created_at: string;
}

export interface LoginResult {
  token: string;
  expires_at: string;
}

export interface InstanceFilter {
  providers?: Provider[];
  markets?: Market[];
  min_capacity?: number;
  max_price?: number;
}
