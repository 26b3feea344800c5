/**
 * Figure builders: lossless mappings from stored records to SVG (and the
 * report table to markdown). One marker per flash, one pixel row per stored
 * time slice, one polyline vertex per trajectory sample — counts always equal
 * record counts, nothing is filtered or recomputed.
 */

import type { DensityFile, FlashFile, ReportFile, TrajectoryFile } from "./formats.js";
import { LABEL_COLORS, SvgDoc, heatColor, linearScale } from "./svg.js";

export interface AxisRanges {
  xMin?: number;
  xMax?: number;
  tMin?: number;
  tMax?: number;
}

export interface FigureResult {
  svg: string;
  /** number of drawn data elements (markers, pixels, vertices, or rows) */
  drawn: number;
}

const W = 640;
const H = 480;
const MARGIN = { left: 56, right: 20, top: 36, bottom: 44 };

function frame(doc: SvgDoc, title: string): void {
  doc.text(W / 2, 20, title, 'text-anchor="middle" font-size="14" font-weight="bold"');
}

/** Space-time flash scatter: space horizontal, time vertical, label-colored. */
export function plotFlashes(data: FlashFile, ranges: AxisRanges = {}): FigureResult {
  const doc = new SvgDoc(W, H);
  const grid = data.record.grid;
  frame(doc, `flashes — ${data.record.theory}, seed ${data.record.master_seed}`);
  if (data.flashes.length === 0) {
    doc.text(
      W / 2,
      H / 2,
      "no flashes in this record",
      'text-anchor="middle" font-size="13" fill="#b00"',
    );
    return { svg: doc.render(), drawn: 0 };
  }
  const tHi = ranges.tMax ?? Math.max(...data.flashes.map((f) => f.t));
  const x = linearScale(
    [ranges.xMin ?? grid.origin, ranges.xMax ?? grid.origin + grid.length],
    [MARGIN.left, W - MARGIN.right],
  );
  const y = linearScale([ranges.tMin ?? 0, tHi], [H - MARGIN.bottom, MARGIN.top]);
  doc.axes(x, y, "position", "time", { left: MARGIN.left, bottom: MARGIN.bottom });
  for (const f of data.flashes) {
    doc.circle(x(f.x), y(f.t), 3, LABEL_COLORS[(f.label - 1) % LABEL_COLORS.length]);
  }
  return { svg: doc.render(), drawn: data.flashes.length };
}

/** Matter-density heatmap: one colored cell per stored (time, space) value,
 * color scale normalized to the recorded total mass. */
export function plotDensity(data: DensityFile, ranges: AxisRanges = {}): FigureResult {
  const doc = new SvgDoc(W, H);
  frame(doc, `matter density — ${data.record.theory}, seed ${data.record.master_seed}`);
  const nT = data.times.length;
  const x = linearScale(
    [ranges.xMin ?? data.origin, ranges.xMax ?? data.origin + data.length],
    [MARGIN.left, W - MARGIN.right],
  );
  const y = linearScale(
    [ranges.tMin ?? data.times[0], ranges.tMax ?? data.times[nT - 1]],
    [H - MARGIN.bottom, MARGIN.top],
  );
  // uniform density level == totalMass / length; saturate a few times above it
  const vMax = (3 * data.totalMass) / data.length;
  const dx = data.length / data.cells;
  let drawn = 0;
  for (let ti = 0; ti < nT; ti++) {
    const t0 = ti === 0 ? data.times[0] : (data.times[ti - 1] + data.times[ti]) / 2;
    const t1 = ti === nT - 1 ? data.times[nT - 1] : (data.times[ti] + data.times[ti + 1]) / 2;
    const rowTop = Math.min(y(t0), y(t1));
    const rowH = Math.max(Math.abs(y(t1) - y(t0)), 1);
    for (let j = 0; j < data.cells; j++) {
      const left = data.origin + (j - 0.5) * dx;
      const v = data.values[ti * data.cells + j];
      doc.rect(x(left), rowTop, Math.abs(x(left + dx) - x(left)) + 0.5, rowH, heatColor(v / vMax));
      drawn++;
    }
  }
  doc.axes(x, y, "position", "time", { left: MARGIN.left, bottom: MARGIN.bottom });
  doc.text(
    W - MARGIN.right,
    16,
    `total mass ${data.totalMass}`,
    'text-anchor="end" font-size="10" fill="#333"',
  );
  return { svg: doc.render(), drawn };
}

/** Trajectory bundle: one polyline per coordinate, every sample a vertex. */
export function plotTrajectories(data: TrajectoryFile, ranges: AxisRanges = {}): FigureResult {
  const doc = new SvgDoc(W, H);
  const grid = data.record.grid;
  frame(doc, `trajectory — ${data.record.theory}, seed ${data.record.master_seed}`);
  if (data.times.length === 0) {
    doc.text(W / 2, H / 2, "empty trajectory", 'text-anchor="middle" font-size="13" fill="#b00"');
    return { svg: doc.render(), drawn: 0 };
  }
  const x = linearScale(
    [ranges.xMin ?? grid.origin, ranges.xMax ?? grid.origin + grid.length],
    [MARGIN.left, W - MARGIN.right],
  );
  const y = linearScale(
    [ranges.tMin ?? data.times[0], ranges.tMax ?? data.times[data.times.length - 1]],
    [H - MARGIN.bottom, MARGIN.top],
  );
  doc.axes(x, y, "position", "time", { left: MARGIN.left, bottom: MARGIN.bottom });
  const nCoords = data.configs[0].length;
  let drawn = 0;
  for (let c = 0; c < nCoords; c++) {
    // split the polyline where the coordinate wraps around the periodic seam
    let segment: Array<[number, number]> = [];
    for (let i = 0; i < data.times.length; i++) {
      const q = data.configs[i][c];
      if (segment.length > 0) {
        const prevQ = data.configs[i - 1][c];
        if (Math.abs(q - prevQ) > grid.length / 2) {
          doc.polyline(segment, LABEL_COLORS[c % LABEL_COLORS.length], 1.5);
          segment = [];
        }
      }
      segment.push([x(q), y(data.times[i])]);
      drawn++;
    }
    if (segment.length) doc.polyline(segment, LABEL_COLORS[c % LABEL_COLORS.length], 1.5);
  }
  return { svg: doc.render(), drawn };
}

/** Markdown table of a check report, failures called out. */
export function renderReportMarkdown(report: ReportFile): string {
  const lines = [
    "| check | verdict | statistic | p-value | samples |",
    "|---|---|---|---|---|",
  ];
  for (const r of report.reports) {
    const verdict = r.verdict === "pass" ? "pass" : `**${r.verdict.toUpperCase()}**`;
    const p = r.p_value === null || r.p_value === undefined ? "—" : r.p_value.toPrecision(3);
    lines.push(
      `| ${r.name} | ${verdict} | ${r.statistic.toPrecision(6)} | ${p} | ${r.n_samples.join("×") || "—"} |`,
    );
  }
  lines.push("");
  lines.push(report.allPassed ? "All checks passed." : "Some checks FAILED.");
  return lines.join("\n");
}

/** SVG table of a check report: one row per entry, failed rows highlighted. */
export function renderReportTable(report: ReportFile): FigureResult {
  const rowH = 22;
  const header = 58;
  const height = header + rowH * (report.reports.length + 1) + 16;
  const doc = new SvgDoc(760, height);
  doc.text(380, 24, "verification report", 'text-anchor="middle" font-size="14" font-weight="bold"');
  const cols = [16, 330, 430, 560, 660];
  const titles = ["check", "verdict", "statistic", "p-value", "samples"];
  titles.forEach((t, i) => doc.text(cols[i], header - 14, t, 'font-size="11" font-weight="bold"'));
  doc.line(10, header - 8, 750, header - 8, "#333");
  let drawn = 0;
  report.reports.forEach((r, i) => {
    const yRow = header + i * rowH;
    if (r.verdict !== "pass") {
      doc.rect(10, yRow - 14, 740, rowH - 2, "#ffe0e0");
    }
    const p = r.p_value === null || r.p_value === undefined ? "—" : r.p_value.toPrecision(3);
    const cells = [
      r.name,
      r.verdict,
      r.statistic.toPrecision(6),
      p,
      r.n_samples.join("×") || "—",
    ];
    cells.forEach((c, j) => doc.text(cols[j], yRow, c, 'font-size="11"'));
    drawn++;
  });
  const footY = header + report.reports.length * rowH + 6;
  doc.text(
    16,
    footY,
    report.allPassed ? "all checks passed" : "some checks failed",
    `font-size="12" fill="${report.allPassed ? "#060" : "#b00"}"`,
  );
  return { svg: doc.render(), drawn };
}
