// DOM wiring: parameter panel, run-and-plot view, phase-diagram view.
// The session model owns all state; this module only renders and forwards
// user intent to the API client.

import { ApiClient } from './api.js';
import { drawChart, Series } from './charts.js';
import { defaultConfig, sigmaPreset, validateConfig } from './config.js';
import { PHASE_COLORS, PHASE_TITLES, hitTest, legendEntries, render } from './heatmap.js';
import { SessionModel } from './session.js';
import type { PhaseDiagramPayload, RunConfig, SimulateResult } from './types.js';

const PALETTE = ['#2b83ba', '#fdae61', '#d7191c', '#80bfac', '#756bb1', '#636363'];

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) node.setAttribute(key, value);
  if (text !== undefined) node.textContent = text;
  return node;
}

interface FieldSpec {
  label: string;
  path: string;
  parse: (raw: string) => unknown;
  format: (value: unknown) => string;
  hint?: string;
}

// Interval-aware numeric fields: "0.5" or "0.6,0.7" (per-firm draws).
function parseScalarOrInterval(raw: string): unknown {
  const trimmed = raw.trim();
  if (trimmed === 'inf') return 'inf';
  if (trimmed.includes(',')) {
    const parts = trimmed.split(',').map((p) => Number(p.trim()));
    return [parts[0], parts[1]];
  }
  return Number(trimmed);
}

function formatValue(value: unknown): string {
  if (Array.isArray(value)) return value.join(', ');
  if (value === null || value === undefined) return '';
  return String(value);
}

const FIELDS: FieldSpec[] = [
  { label: 'firms N', path: 'network.n', parse: Number, format: formatValue },
  { label: 'links d', path: 'network.d', parse: Number, format: formatValue },
  { label: 'epsilon', path: 'epsilon', parse: Number, format: formatValue },
  { label: 'returns b', path: 'production.b', parse: Number, format: formatValue },
  { label: 'alpha (a=a\'=b=b\')', path: 'dyn.alpha', parse: parseScalarOrInterval,
    format: formatValue, hint: 'scalar or lo,hi' },
  { label: 'beta\'', path: 'dyn.beta_p', parse: parseScalarOrInterval, format: formatValue,
    hint: 'blank = alpha' },
  { label: 'omega', path: 'dyn.omega', parse: Number, format: formatValue },
  { label: 'sigma', path: 'dyn.sigma', parse: parseScalarOrInterval, format: formatValue,
    hint: "scalar, lo,hi or 'inf'" },
  { label: 'T steps', path: 'run.T', parse: Number, format: formatValue },
  { label: 'delta', path: 'run.delta', parse: Number, format: formatValue },
  { label: 'seed', path: 'seed', parse: Number, format: formatValue },
];

function getPath(config: RunConfig, path: string): unknown {
  let node: any = config;
  for (const part of path.split('.')) node = node?.[part];
  return node;
}

function setPath(config: RunConfig, path: string, value: unknown): void {
  const parts = path.split('.');
  let node: any = config;
  for (const part of parts.slice(0, -1)) node = node[part];
  const leaf = parts[parts.length - 1];
  node[leaf] = value === '' ? null : value;
}

export class Explorer {
  session = new SessionModel();
  private panel!: HTMLElement;
  private issuesBox!: HTMLElement;
  private submitRun!: HTMLButtonElement;
  private submitSweep!: HTMLButtonElement;
  private badge!: HTMLElement;
  private statusLine!: HTMLElement;
  private chartCanvas!: HTMLCanvasElement;
  private heatmapCanvas!: HTMLCanvasElement;
  private legendBox!: HTMLElement;
  private logToggle!: HTMLInputElement;
  private lastResult: SimulateResult | null = null;
  private lastDiagram: PhaseDiagramPayload | null = null;

  constructor(private root: HTMLElement, private api: ApiClient) {}

  mount(): void {
    const layout = el('div', { class: 'layout' });
    this.panel = el('div', { class: 'panel' });
    const views = el('div', { class: 'views' });

    this.issuesBox = el('div', { class: 'issues' });
    this.submitRun = el('button', {}, 'run simulation');
    this.submitSweep = el('button', {}, 'run sweep');
    const defaults = el('button', {}, 'defaults');
    defaults.onclick = () => {
      this.session.resetDraft();
      this.renderPanel();
    };
    const perishable = el('button', {}, 'perishable goods');
    perishable.onclick = () => {
      this.session.draft.dyn.sigma = sigmaPreset('immediately-perishable');
      this.renderPanel();
    };
    const durable = el('button', {}, 'durable goods');
    durable.onclick = () => {
      this.session.draft.dyn.sigma = sigmaPreset('non-perishable');
      this.renderPanel();
    };

    this.submitRun.onclick = () => void this.launchSimulate();
    this.submitSweep.onclick = () => void this.launchSweep();

    this.badge = el('span', { class: 'badge' }, 'no run yet');
    this.statusLine = el('div', { class: 'status' });
    this.chartCanvas = el('canvas', { width: '760', height: '320' });
    this.heatmapCanvas = el('canvas', { width: '560', height: '420' });
    this.legendBox = el('div', { class: 'legend' });
    this.logToggle = el('input', { type: 'checkbox' }) as HTMLInputElement;
    this.logToggle.onchange = () => this.renderTrajectory();

    this.heatmapCanvas.onclick = (event) => this.onCellClick(event);

    const logLabel = el('label', {}, ' log |p/p_eq - 1| ');
    logLabel.prepend(this.logToggle);

    views.append(
      el('h2', {}, 'trajectory'),
      this.badge,
      logLabel,
      this.chartCanvas,
      el('h2', {}, 'phase diagram'),
      this.heatmapCanvas,
      this.legendBox,
      this.statusLine,
    );
    layout.append(this.panel, views);
    this.root.append(layout);

    this.renderPanel();
    this.panel.append(defaults, durable, perishable, this.submitRun,
                      this.submitSweep, this.issuesBox);
  }

  renderPanel(): void {
    const existing = this.panel.querySelector('.fields');
    if (existing) existing.remove();
    const box = el('div', { class: 'fields' });
    for (const field of FIELDS) {
      const row = el('div', { class: 'field' });
      const label = el('label', {}, field.label);
      const input = el('input', {
        value: field.format(getPath(this.session.draft, field.path)),
        title: field.hint ?? '',
      }) as HTMLInputElement;
      input.onchange = () => {
        setPath(this.session.draft, field.path, field.parse(input.value));
        this.refreshValidation();
      };
      row.append(label, input);
      box.append(row);
    }
    this.panel.prepend(box);
    this.refreshValidation();
  }

  refreshValidation(): void {
    const issues = validateConfig(this.session.draft);
    this.issuesBox.textContent = issues
      .map((issue) => `${issue.path}: ${issue.message}`)
      .join('\n');
    const blocked = issues.length > 0;
    if (this.submitRun) this.submitRun.disabled = blocked;
    if (this.submitSweep) this.submitSweep.disabled = blocked;
  }

  async launchSimulate(): Promise<void> {
    const config = JSON.parse(JSON.stringify(this.session.draft)) as RunConfig;
    delete (config as any).sweep;
    this.statusLine.textContent = 'submitting...';
    const record = await this.api.submitSimulate(config);
    this.session.trackJob(record);
    const final = await this.api.waitForJob(record.id, (r) => {
      this.statusLine.textContent = `job ${r.id}: ${r.status}`;
      this.session.updateJob(r);
    });
    if (final.status === 'failed') {
      this.statusLine.textContent = `job failed: ${final.error}`;
      return;
    }
    const result = await this.api.simulateResult(record.id);
    this.lastResult = result;
    this.session.recordResult({
      fingerprint: result.config_fingerprint,
      kind: 'simulate',
      label: result.classification.label,
      config,
      jobId: record.id,
      finishedAt: Date.now(),
    });
    this.badge.textContent = `${PHASE_TITLES[result.classification.label]}`
      + (result.classification.subtag ? ` (${result.classification.subtag})` : '');
    this.badge.style.background = PHASE_COLORS[result.classification.label];
    this.statusLine.textContent =
      `done; fingerprint ${result.config_fingerprint}`
      + (result.trajectory.status === 'diverged' ? ' - diverged (truncated series)' : '');
    this.renderTrajectory();
  }

  renderTrajectory(): void {
    if (!this.lastResult) return;
    const { series } = this.lastResult.trajectory;
    const times = series['t'];
    const names = Object.keys(series).filter((name) => name.startsWith('p_')).slice(0, 6);
    const plotted: Series[] = names.map((name, k) => ({
      name,
      values: series[name],
      color: PALETTE[k % PALETTE.length],
    }));
    drawChart(this.chartCanvas, times, plotted, {
      logAbs: this.logToggle.checked,
      yLabel: this.logToggle.checked ? 'log10 price' : 'price (wage units)',
    });
  }

  async launchSweep(): Promise<void> {
    const config = JSON.parse(JSON.stringify(this.session.draft)) as RunConfig;
    if (!config.sweep) {
      // Default steering grid around the current draft: alpha vs sigma.
      config.sweep = {
        axis1: { name: 'alpha', values: [0.2, 0.4, 0.6, 0.8, 1.0] },
        axis2: { name: 'sigma', values: [0.1, 0.3, 0.5, 0.8, 'inf'] },
      };
    }
    this.statusLine.textContent = 'submitting sweep...';
    const record = await this.api.submitSweep(config);
    this.session.trackJob(record);
    const final = await this.api.waitForJob(record.id, (r) => {
      this.statusLine.textContent =
        `sweep ${r.id}: ${r.status} ${(r.progress * 100).toFixed(0)}%`;
      this.session.updateJob(r);
    });
    if (final.status === 'failed') {
      this.statusLine.textContent = `sweep failed: ${final.error}`;
      return;
    }
    const result = await this.api.sweepResult(record.id);
    this.lastDiagram = result.phase_diagram;
    this.session.recordResult({
      fingerprint: result.config_fingerprint,
      kind: 'sweep',
      config,
      jobId: record.id,
      finishedAt: Date.now(),
    });
    render(this.heatmapCanvas, result.phase_diagram);
    this.renderLegend();
    this.statusLine.textContent = `sweep done; fingerprint ${result.config_fingerprint}`;
  }

  renderLegend(): void {
    this.legendBox.textContent = '';
    if (!this.lastDiagram) return;
    for (const entry of legendEntries(this.lastDiagram)) {
      const item = el('span', { class: 'legend-item' }, PHASE_TITLES[entry.label]);
      item.style.borderLeft = `14px solid ${entry.color}`;
      item.style.opacity = entry.present ? '1' : '0.35';
      this.legendBox.append(item);
    }
  }

  // Cell click: load that cell's exact parameters into the panel for an
  // immediate single-run what-if.
  onCellClick(event: MouseEvent): void {
    if (!this.lastDiagram) return;
    const rect = this.heatmapCanvas.getBoundingClientRect();
    const hit = hitTest(this.lastDiagram, event.clientX - rect.left,
                        event.clientY - rect.top,
                        rect.width, rect.height);
    if (!hit) return;
    applyCellToConfig(this.session.draft, hit.axis1.name, hit.axis1.value);
    applyCellToConfig(this.session.draft, hit.axis2.name, hit.axis2.value);
    this.renderPanel();
    this.statusLine.textContent =
      `loaded cell ${hit.axis1.name}=${hit.axis1.value}, `
      + `${hit.axis2.name}=${hit.axis2.value} (${PHASE_TITLES[hit.label]})`;
  }
}

// Sweep axes map onto config fields exactly as the server applies them.
export function applyCellToConfig(
  config: RunConfig,
  axis: string,
  value: number | 'inf',
): void {
  switch (axis) {
    case 'alpha':
      config.dyn.alpha = value as number;
      config.dyn.alpha_p = null;
      config.dyn.beta = null;
      config.dyn.beta_p = null;
      break;
    case 'sigma':
      config.dyn.sigma = value;
      break;
    case 'omega':
      config.dyn.omega = value as number;
      config.dyn.omega_p = null;
      break;
    case 'epsilon':
      config.epsilon = value as number;
      break;
    case 'beta_p':
      config.dyn.beta_p = value as number;
      break;
    default:
      throw new Error(`unknown sweep axis ${axis}`);
  }
}
