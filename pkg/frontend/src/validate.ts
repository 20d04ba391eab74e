// Client-side input checks mirroring the service's rules, so forms can give
// instant feedback without a round trip.  The service stays authoritative.

import { PROVIDERS } from "./types.js";

export interface FieldError {
  field: string;
  message: string;
}

const EMAIL_SHAPE = /^[^@\s]+@[^@\s]+\.[^@\s]+$/;
export const MIN_PASSWORD_LENGTH = 8;

export function validateCredentials(
  email: string,
  password: string,
  username?: string,
): FieldError[] {
  const errors: FieldError[] = [];
  if (!EMAIL_SHAPE.test(email)) {
    errors.push({ field: "email", message: "not a valid email address" });
  }
  // username only exists on the registration form
  if (username !== undefined && username.trim() === "") {
    errors.push({ field: "username", message: "must be a non-empty string" });
  }
  if (password.length < MIN_PASSWORD_LENGTH) {
    errors.push({
      field: "password",
      message: `must be at least ${MIN_PASSWORD_LENGTH} characters`,
    });
  }
  return errors;
}

export interface AppFormValues {
  name: string;
  mu: string;
  sigma: string;
  start: string;
  finish: string;
}

export function validateAppForm(values: AppFormValues): FieldError[] {
  const errors: FieldError[] = [];
  if (values.name.trim() === "") {
    errors.push({ field: "name", message: "must be a non-empty string" });
  }
  const mu = Number(values.mu);
  if (values.mu.trim() === "" || !Number.isFinite(mu) || mu < 0) {
    errors.push({ field: "mu", message: "must be a number >= 0" });
  }
  const sigma = Number(values.sigma);
  if (values.sigma.trim() === "" || !Number.isFinite(sigma) || sigma < 0) {
    errors.push({ field: "sigma", message: "must be a number >= 0" });
  }
  const start = Number(values.start);
  const startOk = Number.isInteger(start) && values.start.trim() !== "" && start >= 0;
  if (!startOk) {
    errors.push({ field: "start", message: "must be an integer >= 0" });
  }
  const finish = Number(values.finish);
  const finishOk = Number.isInteger(finish) && values.finish.trim() !== "";
  if (!finishOk) {
    errors.push({ field: "finish", message: "must be an integer" });
  } else if (startOk && finish <= start) {
    errors.push({ field: "finish", message: "finish must be strictly after start" });
  }
  return errors;
}

export interface PortfolioFormValues {
  name: string;
  providers: string[];
  q_min: string;
}

export function validatePortfolioForm(values: PortfolioFormValues): FieldError[] {
  const errors: FieldError[] = [];
  if (values.name.trim() === "") {
    errors.push({ field: "name", message: "must be a non-empty string" });
  }
  if (values.providers.length === 0) {
    errors.push({ field: "providers", message: "must list at least one provider" });
  } else {
    for (const p of values.providers) {
      if (!(PROVIDERS as string[]).includes(p)) {
        errors.push({ field: "providers", message: `unknown provider '${p}'` });
        break;
      }
    }
  }
  const q = Number(values.q_min);
  if (values.q_min.trim() === "" || !Number.isFinite(q) || q < 0 || q > 1) {
    errors.push({ field: "q_min", message: "must be between 0 and 1" });
  }
  return errors;
}

export interface GaFormValues {
  population_size: string;
  max_generations: string;
  mutation_rate: string;
  stagnation_window: string;
  convergence_epsilon: string;
  seed: string;
}

export function validateGaForm(values: GaFormValues): FieldError[] {
  const errors: FieldError[] = [];
  const intAtLeast = (field: keyof GaFormValues, label: string, minimum: number) => {
    const n = Number(values[field]);
    if (!Number.isInteger(n) || values[field].trim() === "" || n < minimum) {
      errors.push({ field, message: `${label} must be an integer >= ${minimum}` });
    }
  };
  intAtLeast("population_size", "population size", 2);
  intAtLeast("max_generations", "max generations", 1);
  intAtLeast("stagnation_window", "stagnation window", 1);
  const rate = Number(values.mutation_rate);
  if (values.mutation_rate.trim() === "" || !Number.isFinite(rate) || rate < 0 || rate > 1) {
    errors.push({ field: "mutation_rate", message: "mutation rate must be between 0 and 1" });
  }
  const eps = Number(values.convergence_epsilon);
  if (values.convergence_epsilon.trim() === "" || !Number.isFinite(eps) || eps < 0) {
    errors.push({ field: "convergence_epsilon", message: "epsilon must be a number >= 0" });
  }
  const seed = Number(values.seed);
  if (!Number.isInteger(seed) || values.seed.trim() === "") {
    errors.push({ field: "seed", message: "seed must be an integer" });
  }
  return errors;
}
