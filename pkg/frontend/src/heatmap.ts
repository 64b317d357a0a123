// Phase-diagram heatmap: pure grid geometry (testable) plus a canvas
// renderer.  Clicking a cell yields the exact parameter pair of that cell so
// the parameter panel can be steered from the picture.

import type { PhaseDiagramPayload, PhaseLabel } from './types.js';
import { PHASE_LABELS } from './types.js';

export const PHASE_COLORS: Record<PhaseLabel, string> = {
  competitive_equilibrium: '#2b83ba',
  deflationary_equilibrium: '#80bfac',
  oscillations: '#fdae61',
  crises: '#d7191c',
  crash: '#1a1a1a',
};

export const PHASE_TITLES: Record<PhaseLabel, string> = {
  competitive_equilibrium: 'competitive equilibrium',
  deflationary_equilibrium: 'deflationary equilibrium',
  oscillations: 'oscillations',
  crises: 'crises',
  crash: 'crash',
};

export interface CellHit {
  i: number;
  j: number;
  axis1: { name: string; value: number | 'inf' };
  axis2: { name: string; value: number | 'inf' };
  label: PhaseLabel;
}

export function cellCount(diagram: PhaseDiagramPayload): number {
  return diagram.labels.length * (diagram.labels[0]?.length ?? 0);
}

// Legend entries: the full phase enum, in enum order, marking which ones
// actually occur in the grid.
export function legendEntries(
  diagram: PhaseDiagramPayload,
): { label: PhaseLabel; color: string; present: boolean }[] {
  const present = new Set(diagram.labels.flat());
  return PHASE_LABELS.map((label) => ({
    label,
    color: PHASE_COLORS[label],
    present: present.has(label),
  }));
}

// Map a pixel position inside a width x height canvas to the grid cell and
// its parameter values.  Rows (axis1) run top to bottom, columns (axis2)
// left to right.
export function hitTest(
  diagram: PhaseDiagramPayload,
  x: number,
  y: number,
  width: number,
  height: number,
): CellHit | null {
  const rows = diagram.labels.length;
  const cols = diagram.labels[0]?.length ?? 0;
  if (rows === 0 || cols === 0) return null;
  if (x < 0 || y < 0 || x >= width || y >= height) return null;
  const i = Math.min(rows - 1, Math.floor((y / height) * rows));
  const j = Math.min(cols - 1, Math.floor((x / width) * cols));
  return {
    i,
    j,
    axis1: { name: diagram.axis1.name, value: diagram.axis1.values[i] },
    axis2: { name: diagram.axis2.name, value: diagram.axis2.values[j] },
    label: diagram.labels[i][j],
  };
}

export function render(
  canvas: HTMLCanvasElement,
  diagram: PhaseDiagramPayload,
): void {
  const ctx = canvas.getContext('2d');
  if (!ctx) return;
  const rows = diagram.labels.length;
  const cols = diagram.labels[0]?.length ?? 0;
  const { width, height } = canvas;
  ctx.clearRect(0, 0, width, height);
  for (let i = 0; i < rows; i++) {
    for (let j = 0; j < cols; j++) {
      ctx.fillStyle = PHASE_COLORS[diagram.labels[i][j]] ?? '#999999';
      const x0 = Math.round((j / cols) * width);
      const y0 = Math.round((i / rows) * height);
      const x1 = Math.round(((j + 1) / cols) * width);
      const y1 = Math.round(((i + 1) / rows) * height);
      ctx.fillRect(x0, y0, x1 - x0, y1 - y0);
    }
  }
}

// Partial grids during progress: unlabelled cells are null.
export function renderPartial(
  canvas: HTMLCanvasElement,
  labels: (PhaseLabel | null)[][],
): void {
  const ctx = canvas.getContext('2d');
  if (!ctx) return;
  const rows = labels.length;
  const cols = labels[0]?.length ?? 0;
  const { width, height } = canvas;
  ctx.clearRect(0, 0, width, height);
  ctx.fillStyle = '#f2f2f2';
  ctx.fillRect(0, 0, width, height);
  for (let i = 0; i < rows; i++) {
    for (let j = 0; j < cols; j++) {
      const label = labels[i][j];
      if (!label) continue;
      ctx.fillStyle = PHASE_COLORS[label];
      ctx.fillRect(
        Math.round((j / cols) * width),
        Math.round((i / rows) * height),
        Math.ceil(width / cols),
        Math.ceil(height / rows),
      );
    }
  }
}
