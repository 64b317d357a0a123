// Client-side mirror of the service's JSON contract (/api/v1).

export type Scalar = number;
export type Interval = [number, number];
export type ScalarOrInterval = Scalar | Interval;
export type SigmaValue = ScalarOrInterval | 'inf';

export interface NetworkConfig {
  n: number;
  d: number;
  weight: number;
  undirected?: boolean;
}

export interface ProductionConfig {
  q: number | 'inf';
  b: number;
}

export interface DynConfig {
  alpha: ScalarOrInterval;
  alpha_p?: ScalarOrInterval | null;
  beta?: ScalarOrInterval | null;
  beta_p?: ScalarOrInterval | null;
  omega: number;
  omega_p?: number | null;
  sigma: SigmaValue;
  lambda_forecast: number;
}

export interface HouseholdConfig {
  theta0: 'random' | 'uniform' | number[];
  phi: number | 'inf';
  L0: number;
  Gamma: number;
}

export interface RunBlock {
  T: number;
  delta: number;
  seeds: number[];
  window?: number | null;
  stride: number;
}

export interface SweepAxis {
  name: string;
  values: (number | 'inf')[];
}

export interface SweepBlock {
  axis1: SweepAxis;
  axis2: SweepAxis;
}

export interface RunConfig {
  seed: number;
  epsilon: number | null;
  network: NetworkConfig;
  production: ProductionConfig;
  dyn: DynConfig;
  household: HouseholdConfig;
  run: RunBlock;
  sweep?: SweepBlock | null;
}

export type PhaseLabel =
  | 'competitive_equilibrium'
  | 'deflationary_equilibrium'
  | 'oscillations'
  | 'crises'
  | 'crash';

export const PHASE_LABELS: PhaseLabel[] = [
  'competitive_equilibrium',
  'deflationary_equilibrium',
  'oscillations',
  'crises',
  'crash',
];

export interface JobRecord {
  id: string;
  kind: 'simulate' | 'sweep';
  status: 'queued' | 'running' | 'done' | 'failed';
  progress: number;
  error: string | null;
  config_fingerprint: string;
}

export interface TrajectoryPayload {
  columns: string[];
  series: Record<string, (number | null)[]>;
  status: 'ok' | 'diverged';
  halt?: number;
}

export interface ClassificationPayload {
  label: PhaseLabel;
  subtag: string | null;
  stats: Record<string, number | null>;
}

export interface SimulateResult {
  trajectory: TrajectoryPayload;
  classification: ClassificationPayload;
  config: unknown;
  config_fingerprint: string;
}

export interface PhaseDiagramPayload {
  axis1: { name: string; values: (number | 'inf')[] };
  axis2: { name: string; values: (number | 'inf')[] };
  labels: PhaseLabel[][];
  subtags: (string | null)[][];
  stats: Record<string, (number | null)[][]>;
}

export interface SweepResult {
  phase_diagram: PhaseDiagramPayload;
  legend: PhaseLabel[];
  config: unknown;
  config_fingerprint: string;
}

export interface EquilibriumResult {
  eps: number;
  realisable: boolean;
  prices_eq: number[];
  gammas_eq: number[];
  residuals: { profit: number; clearing: number };
  config_fingerprint: string;
}
