// Lightweight SVG charting for sensor graphs: rolling time-evolution
// polylines and scatter plots. Retained history is capped so an
// always-on dashboard doesn't grow without bound.

export const MAX_POINTS = 600;

export class RollingSeries {
  readonly names: string[] = [];
  private data = new Map<string, number[]>();

  constructor(private cap: number = MAX_POINTS) {}

  push(names: string[], values: number[]): void {
    names.forEach((name, i) => {
      let series = this.data.get(name);
      if (!series) {
        series = [];
        this.data.set(name, series);
        this.names.push(name);
      }
      series.push(values[i]);
      if (series.length > this.cap) {
        series.splice(0, series.length - this.cap);
      }
    });
  }

  get(name: string): number[] {
    return this.data.get(name) ?? [];
  }

  length(name: string): number {
    return this.get(name).length;
  }
}

const PALETTE = ["#2c7be5", "#e55353", "#2eb85c", "#f9b115", "#6f42c1", "#17a2b8"];

function scale(value: number, min: number, max: number, size: number): number {
  if (max <= min) return size / 2;
  return ((value - min) / (max - min)) * size;
}

export function polylinePoints(values: number[], width: number, height: number,
                               yMin: number, yMax: number): string {
  if (values.length === 0) return "";
  const step = values.length > 1 ? width / (values.length - 1) : 0;
  return values
    .map((v, i) => {
      const x = (i * step).toFixed(1);
      const y = (height - scale(v, yMin, yMax, height)).toFixed(1);
      return `${x},${y}`;
    })
    .join(" ");
}

const SVG_NS = "http://www.w3.org/2000/svg";

export function renderTimeChart(svg: SVGElement, series: RollingSeries,
                                axes: { y_min?: number; y_max?: number }): void {
  const width = 360;
  const height = 140;
  const yMin = axes.y_min ?? -1;
  const yMax = axes.y_max ?? 1;
  svg.setAttribute("viewBox", `0 0 ${width} ${height}`);
  svg.replaceChildren();
  const zero = document.createElementNS(SVG_NS, "line");
  const zeroY = height - scale(0, yMin, yMax, height);
  zero.setAttribute("x1", "0");
  zero.setAttribute("x2", String(width));
  zero.setAttribute("y1", zeroY.toFixed(1));
  zero.setAttribute("y2", zeroY.toFixed(1));
  zero.setAttribute("class", "chart-axis");
  svg.appendChild(zero);
  series.names.forEach((name, i) => {
    const line = document.createElementNS(SVG_NS, "polyline");
    line.setAttribute("points",
                      polylinePoints(series.get(name), width, height, yMin, yMax));
    line.setAttribute("fill", "none");
    line.setAttribute("stroke", PALETTE[i % PALETTE.length]);
    line.setAttribute("stroke-width", "1.5");
    svg.appendChild(line);
  });
}

export function renderScatter(svg: SVGElement, xs: number[], ys: number[],
                              axes: { x_min?: number; x_max?: number;
                                      y_min?: number; y_max?: number }): void {
  const width = 360;
  const height = 140;
  const xMin = axes.x_min ?? Math.min(...xs, 0);
  const xMax = axes.x_max ?? Math.max(...xs, 1);
  const yMin = axes.y_min ?? -1;
  const yMax = axes.y_max ?? 1;
  svg.setAttribute("viewBox", `0 0 ${width} ${height}`);
  svg.replaceChildren();
  xs.forEach((x, i) => {
    const dot = document.createElementNS(SVG_NS, "circle");
    dot.setAttribute("cx", scale(x, xMin, xMax, width).toFixed(1));
    dot.setAttribute("cy", (height - scale(ys[i], yMin, yMax, height)).toFixed(1));
    dot.setAttribute("r", "3");
    dot.setAttribute("fill", PALETTE[0]);
    svg.appendChild(dot);
  });
}
