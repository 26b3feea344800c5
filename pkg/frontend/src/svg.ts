/** Minimal SVG assembly: linear scales, axes, and element helpers. */

export interface Scale {
  (value: number): number;
  domain: [number, number];
  range: [number, number];
}

export function linearScale(domain: [number, number], range: [number, number]): Scale {
  const [d0, d1] = domain;
  const [r0, r1] = range;
  const span = d1 - d0 === 0 ? 1 : d1 - d0;
  const fn = ((value: number) => r0 + ((value - d0) / span) * (r1 - r0)) as Scale;
  fn.domain = domain;
  fn.range = range;
  return fn;
}

export function ticks(domain: [number, number], count = 6): number[] {
  const [lo, hi] = domain;
  if (!(hi > lo)) return [lo];
  const rawStep = (hi - lo) / count;
  const mag = 10 ** Math.floor(Math.log10(rawStep));
  const step = [1, 2, 5, 10].map((m) => m * mag).find((s) => (hi - lo) / s <= count) ?? mag * 10;
  const start = Math.ceil(lo / step) * step;
  const out: number[] = [];
  for (let v = start; v <= hi + 1e-12; v += step) out.push(Number(v.toPrecision(12)));
  return out;
}

const esc = (s: string) => s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");

export class SvgDoc {
  private parts: string[] = [];

  constructor(
    readonly width: number,
    readonly height: number,
  ) {}

  rect(x: number, y: number, w: number, h: number, fill: string, extra = ""): void {
    this.parts.push(
      `<rect x="${fmt(x)}" y="${fmt(y)}" width="${fmt(w)}" height="${fmt(h)}" fill="${fill}" ${extra}/>`,
    );
  }

  circle(cx: number, cy: number, r: number, fill: string): void {
    this.parts.push(`<circle cx="${fmt(cx)}" cy="${fmt(cy)}" r="${fmt(r)}" fill="${fill}"/>`);
  }

  line(x1: number, y1: number, x2: number, y2: number, stroke: string, width = 1): void {
    this.parts.push(
      `<line x1="${fmt(x1)}" y1="${fmt(y1)}" x2="${fmt(x2)}" y2="${fmt(y2)}" stroke="${stroke}" stroke-width="${width}"/>`,
    );
  }

  polyline(points: Array<[number, number]>, stroke: string, width = 1): void {
    const attr = points.map(([x, y]) => `${fmt(x)},${fmt(y)}`).join(" ");
    this.parts.push(
      `<polyline points="${attr}" fill="none" stroke="${stroke}" stroke-width="${width}"/>`,
    );
  }

  text(x: number, y: number, content: string, extra = ""): void {
    this.parts.push(`<text x="${fmt(x)}" y="${fmt(y)}" ${extra}>${esc(content)}</text>`);
  }

  raw(markup: string): void {
    this.parts.push(markup);
  }

  axes(
    xScale: Scale,
    yScale: Scale,
    xLabel: string,
    yLabel: string,
    margin: { left: number; bottom: number },
  ): void {
    const [x0, x1] = xScale.range;
    const [y0, y1] = yScale.range;
    const axisY = Math.max(y0, y1);
    this.line(x0, axisY, x1, axisY, "#333");
    this.line(x0, y0, x0, y1, "#333");
    for (const t of ticks(xScale.domain)) {
      const px = xScale(t);
      this.line(px, axisY, px, axisY + 4, "#333");
      this.text(px, axisY + 16, trim(t), 'text-anchor="middle" font-size="10"');
    }
    for (const t of ticks(yScale.domain)) {
      const py = yScale(t);
      this.line(x0 - 4, py, x0, py, "#333");
      this.text(x0 - 6, py + 3, trim(t), 'text-anchor="end" font-size="10"');
    }
    this.text(
      (x0 + x1) / 2,
      axisY + margin.bottom - 6,
      xLabel,
      'text-anchor="middle" font-size="12"',
    );
    this.text(
      14,
      (y0 + y1) / 2,
      yLabel,
      `text-anchor="middle" font-size="12" transform="rotate(-90 14 ${fmt((y0 + y1) / 2)})"`,
    );
  }

  render(): string {
    return [
      `<svg xmlns="http://www.w3.org/2000/svg" width="${this.width}" height="${this.height}" viewBox="0 0 ${this.width} ${this.height}">`,
      `<rect width="${this.width}" height="${this.height}" fill="white"/>`,
      ...this.parts,
      "</svg>",
    ].join("\n");
  }
}

function fmt(v: number): string {
  return Number.isInteger(v) ? String(v) : v.toFixed(2);
}

function trim(v: number): string {
  return Math.abs(v) >= 1000 || (v !== 0 && Math.abs(v) < 0.01)
    ? v.toExponential(1)
    : String(Number(v.toPrecision(6)));
}

/** Blue-to-red heat ramp over [0, 1]. */
export function heatColor(unit: number): string {
  const u = Math.min(1, Math.max(0, unit));
  const r = Math.round(255 * Math.min(1, 1.6 * u));
  const g = Math.round(255 * Math.min(1, 1.8 * (u < 0.5 ? u : 1 - u) + 0.05));
  const b = Math.round(255 * Math.min(1, 1.6 * (1 - u)));
  return `rgb(${r},${g},${b})`;
}

export const LABEL_COLORS = [
  "#1f77b4",
  "#d62728",
  "#2ca02c",
  "#9467bd",
  "#ff7f0e",
  "#8c564b",
];
