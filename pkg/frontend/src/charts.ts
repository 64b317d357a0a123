// Minimal canvas line charts for trajectory views.  No model math here:
// the series arrive fully computed from the server.

export interface Series {
  name: string;
  values: (number | null)[];
  color: string;
}

export interface ChartOptions {
  logAbs?: boolean;           // plot log10 |y| (distance-to-equilibrium view)
  referenceLines?: number[];  // horizontal guides (e.g. equilibrium levels)
  yLabel?: string;
}

function transform(value: number, logAbs: boolean): number | null {
  if (logAbs) {
    const magnitude = Math.abs(value);
    return magnitude > 0 ? Math.log10(magnitude) : null;
  }
  return value;
}

export function drawChart(
  canvas: HTMLCanvasElement,
  times: (number | null)[],
  seriesList: Series[],
  options: ChartOptions = {},
): void {
  const ctx = canvas.getContext('2d');
  if (!ctx) return;
  const { width, height } = canvas;
  const pad = 34;
  ctx.clearRect(0, 0, width, height);

  const logAbs = options.logAbs ?? false;
  let yMin = Infinity;
  let yMax = -Infinity;
  let xMin = Infinity;
  let xMax = -Infinity;
  for (const series of seriesList) {
    series.values.forEach((value, k) => {
      const t = times[k];
      if (value === null || t === null) return;
      const y = transform(value, logAbs);
      if (y === null || !isFinite(y)) return;
      yMin = Math.min(yMin, y);
      yMax = Math.max(yMax, y);
      xMin = Math.min(xMin, t);
      xMax = Math.max(xMax, t);
    });
  }
  for (const ref of options.referenceLines ?? []) {
    const y = transform(ref, logAbs);
    if (y !== null && isFinite(y)) {
      yMin = Math.min(yMin, y);
      yMax = Math.max(yMax, y);
    }
  }
  if (!isFinite(yMin) || !isFinite(xMin)) return;
  if (yMax === yMin) {
    yMax += 1;
    yMin -= 1;
  }

  const toX = (t: number) => pad + ((t - xMin) / (xMax - xMin || 1)) * (width - 2 * pad);
  const toY = (y: number) => height - pad - ((y - yMin) / (yMax - yMin)) * (height - 2 * pad);

  ctx.strokeStyle = '#cccccc';
  ctx.strokeRect(pad, pad, width - 2 * pad, height - 2 * pad);
  ctx.fillStyle = '#555555';
  ctx.font = '11px sans-serif';
  ctx.fillText(`${yMax.toPrecision(3)}`, 2, pad + 4);
  ctx.fillText(`${yMin.toPrecision(3)}`, 2, height - pad);
  ctx.fillText(`t=${xMax}`, width - pad - 30, height - 10);
  if (options.yLabel) ctx.fillText(options.yLabel, pad, 12);

  ctx.strokeStyle = '#dddddd';
  for (const ref of options.referenceLines ?? []) {
    const y = transform(ref, logAbs);
    if (y === null || !isFinite(y)) continue;
    ctx.beginPath();
    ctx.moveTo(pad, toY(y));
    ctx.lineTo(width - pad, toY(y));
    ctx.stroke();
  }

  for (const series of seriesList) {
    ctx.strokeStyle = series.color;
    ctx.beginPath();
    let pen = false;
    series.values.forEach((value, k) => {
      const t = times[k];
      if (value === null || t === null) {
        pen = false;
        return;
      }
      const y = transform(value, logAbs);
      if (y === null || !isFinite(y)) {
        pen = false;
        return;
      }
      if (pen) {
        ctx.lineTo(toX(t), toY(y));
      } else {
        ctx.moveTo(toX(t), toY(y));
        pen = true;
      }
    });
    ctx.stroke();
  }
}
