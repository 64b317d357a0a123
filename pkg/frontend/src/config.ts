// Config defaults and live validation: a client-side mirror of the server
// schema, so drafts are checked before submission and the submit button can
// stay disabled while a field is invalid.

import type { RunConfig, ScalarOrInterval, SigmaValue } from './types.js';

export function defaultConfig(): RunConfig {
  return {
    seed: 0,
    epsilon: 10.0,
    network: { n: 100, d: 15, weight: 1.0 },
    production: { q: 0.0, b: 0.95 },
    dyn: {
      alpha: 0.5,
      alpha_p: null,
      beta: null,
      beta_p: null,
      omega: 0.1,
      omega_p: null,
      sigma: 0.1,
      lambda_forecast: 1.0,
    },
    household: { theta0: 'random', phi: 1.0, L0: 1.0, Gamma: 1.0 },
    run: { T: 5000, delta: 1e-3, seeds: [0], window: null, stride: 5 },
  };
}

export interface ValidationIssue {
  path: string;
  message: string;
}

function checkScalarOrInterval(
  value: ScalarOrInterval | null | undefined,
  path: string,
  issues: ValidationIssue[],
  optional = false,
): void {
  if (value === null || value === undefined) {
    if (!optional) issues.push({ path, message: 'required' });
    return;
  }
  if (Array.isArray(value)) {
    if (value.length !== 2) {
      issues.push({ path, message: 'interval must be [lo, hi]' });
      return;
    }
    const [lo, hi] = value;
    if (!(lo >= 0) || !(hi >= 0)) issues.push({ path, message: 'must be non-negative' });
    if (lo > hi) issues.push({ path, message: 'lo must not exceed hi' });
    return;
  }
  if (!(value >= 0)) issues.push({ path, message: 'must be non-negative' });
}

export function validateConfig(config: RunConfig): ValidationIssue[] {
  const issues: ValidationIssue[] = [];
  const { network, production, dyn, household, run } = config;

  if (!Number.isInteger(network.n) || network.n <= 0) {
    issues.push({ path: 'network.n', message: 'must be a positive integer' });
  }
  if (!Number.isInteger(network.d) || network.d <= 0) {
    issues.push({ path: 'network.d', message: 'must be a positive integer' });
  }
  if (network.d >= network.n) {
    issues.push({ path: 'network.d', message: 'must be smaller than n' });
  }
  if (!(network.weight > 0)) {
    issues.push({ path: 'network.weight', message: 'must be positive' });
  }

  if (production.q !== 'inf' && !(production.q >= 0)) {
    issues.push({ path: 'production.q', message: "must be >= 0 or 'inf'" });
  }
  if (!(production.b > 0)) {
    issues.push({ path: 'production.b', message: 'must be positive' });
  }

  checkScalarOrInterval(dyn.alpha, 'dyn.alpha', issues);
  checkScalarOrInterval(dyn.alpha_p, 'dyn.alpha_p', issues, true);
  checkScalarOrInterval(dyn.beta, 'dyn.beta', issues, true);
  checkScalarOrInterval(dyn.beta_p, 'dyn.beta_p', issues, true);
  if (!(dyn.omega >= 0)) issues.push({ path: 'dyn.omega', message: 'must be non-negative' });
  if (dyn.sigma !== 'inf') checkScalarOrInterval(dyn.sigma, 'dyn.sigma', issues);
  if (!(dyn.lambda_forecast >= 0 && dyn.lambda_forecast <= 1)) {
    issues.push({ path: 'dyn.lambda_forecast', message: 'must lie in [0, 1]' });
  }

  if (household.phi !== 'inf' && !(household.phi > 0)) {
    issues.push({ path: 'household.phi', message: "must be positive or 'inf'" });
  }
  if (!(household.L0 > 0)) issues.push({ path: 'household.L0', message: 'must be positive' });
  if (!(household.Gamma > 0)) issues.push({ path: 'household.Gamma', message: 'must be positive' });

  if (!Number.isInteger(run.T) || run.T <= 0) {
    issues.push({ path: 'run.T', message: 'must be a positive integer' });
  }
  if (!(run.delta >= 0)) issues.push({ path: 'run.delta', message: 'must be non-negative' });
  if (run.seeds.length === 0 || run.seeds.some((s) => !Number.isInteger(s))) {
    issues.push({ path: 'run.seeds', message: 'needs at least one integer seed' });
  }
  if (!Number.isInteger(run.stride) || run.stride <= 0) {
    issues.push({ path: 'run.stride', message: 'must be a positive integer' });
  }

  if (config.sweep) {
    for (const key of ['axis1', 'axis2'] as const) {
      const axis = config.sweep[key];
      if (!axis.name) issues.push({ path: `sweep.${key}.name`, message: 'required' });
      if (axis.values.length === 0) {
        issues.push({ path: `sweep.${key}.values`, message: 'needs at least one value' });
      }
    }
  }
  return issues;
}

// Perishability presets: non-perishable goods keep forever, immediately
// perishable goods vanish within the step.
export function sigmaPreset(kind: 'non-perishable' | 'immediately-perishable'): SigmaValue {
  return kind === 'non-perishable' ? 0 : 'inf';
}

export function cloneConfig(config: RunConfig): RunConfig {
  return JSON.parse(JSON.stringify(config)) as RunConfig;
}

// One-click steering: nudge a numeric leaf (e.g. 'dyn.omega') by a factor.
export function nudge(config: RunConfig, path: string, factor: number): RunConfig {
  const copy = cloneConfig(config);
  const parts = path.split('.');
  let node: any = copy;
  for (const part of parts.slice(0, -1)) node = node[part];
  const leaf = parts[parts.length - 1];
  const value = node[leaf];
  if (typeof value === 'number') {
    node[leaf] = value * factor;
  } else if (Array.isArray(value) && value.length === 2) {
    node[leaf] = [value[0] * factor, value[1] * factor];
  }
  return copy;
}
