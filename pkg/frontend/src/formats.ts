/**
 * Readers for the simulator's documented output formats. Every file begins
 * with one JSON header line carrying the run record; these readers parse, they
 * never recompute physics.
 */

import { readFileSync } from "node:fs";

export interface RunRecord {
  master_seed: number;
  theory: string;
  grid: { n_particles: number; cells: number; length: number; origin: number };
  params: Record<string, unknown>;
  hamiltonian_digest: string;
  initial_state: string;
  run_index: number;
  extra: Record<string, unknown>;
}

export interface Flash {
  t: number;
  x: number;
  label: number;
}

export interface FlashFile {
  record: RunRecord;
  flashes: Flash[];
}

export interface DensityFile {
  record: RunRecord;
  times: Float64Array;
  cells: number;
  length: number;
  origin: number;
  totalMass: number;
  /** time-major: values[t * cells + j] */
  values: Float64Array;
}

export interface TrajectoryFile {
  record: RunRecord;
  times: number[];
  /** configs[i] holds the N coordinates at times[i] */
  configs: number[][];
}

export interface ReportEntry {
  name: string;
  statistic: number;
  p_value: number | null;
  distance: number | null;
  alpha: number | null;
  verdict: "pass" | "fail" | "inconclusive";
  n_samples: number[];
  seed: number | null;
  details: Record<string, unknown>;
}

export interface ReportFile {
  reports: ReportEntry[];
  allPassed: boolean;
}

function parseHeader(line: string): RunRecord {
  const parsed = JSON.parse(line);
  if (!parsed.run_record) {
    throw new Error("file does not start with a run-record header line");
  }
  return parsed.run_record as RunRecord;
}

export function readFlashFile(path: string): FlashFile {
  const lines = readFileSync(path, "utf-8").split("\n");
  const record = parseHeader(lines[0]);
  const flashes: Flash[] = [];
  for (const line of lines.slice(1)) {
    const text = line.trim();
    if (!text) continue;
    const row = JSON.parse(text);
    if (typeof row.t !== "number" || typeof row.x !== "number" || typeof row.label !== "number") {
      throw new Error(`malformed flash row: ${text}`);
    }
    flashes.push(row as Flash);
  }
  return { record, flashes };
}

export function readDensityFile(path: string): DensityFile {
  const raw = readFileSync(path);
  const cut = raw.indexOf(0x0a);
  if (cut < 0) throw new Error("density file has no header line");
  const header = JSON.parse(raw.subarray(0, cut).toString("utf-8"));
  if (!header.run_record || !header.matter_density) {
    throw new Error("density file header is missing its schema sections");
  }
  const meta = header.matter_density;
  if (meta.dtype !== "<f8" || meta.layout !== "time-major") {
    throw new Error(`unsupported density encoding: ${meta.dtype}/${meta.layout}`);
  }
  const body = raw.subarray(cut + 1);
  // copy so the Float64Array is aligned regardless of the header length
  const aligned = new Uint8Array(body.length);
  aligned.set(body);
  const doubles = new Float64Array(aligned.buffer, 0, body.length >> 3);
  const nTimes: number = meta.n_times;
  const cells: number = meta.cells;
  if (doubles.length < nTimes + nTimes * cells) {
    throw new Error("density file body is shorter than its header declares");
  }
  return {
    record: header.run_record as RunRecord,
    times: doubles.slice(0, nTimes),
    cells,
    length: meta.length,
    origin: meta.origin,
    totalMass: meta.total_mass,
    values: doubles.slice(nTimes, nTimes + nTimes * cells),
  };
}

export function readTrajectoryFile(path: string): TrajectoryFile {
  const lines = readFileSync(path, "utf-8").split("\n");
  const record = parseHeader(lines[0]);
  const columns = lines[1]?.trim().split(",") ?? [];
  if (columns[0] !== "t") {
    throw new Error("trajectory file is missing its column row");
  }
  const times: number[] = [];
  const configs: number[][] = [];
  for (const line of lines.slice(2)) {
    const text = line.trim();
    if (!text) continue;
    const parts = text.split(",").map(Number);
    if (parts.some((v) => Number.isNaN(v)) || parts.length !== columns.length) {
      throw new Error(`malformed trajectory row: ${text}`);
    }
    times.push(parts[0]);
    configs.push(parts.slice(1));
  }
  return { record, times, configs };
}

export function readReportFile(path: string): ReportFile {
  const parsed = JSON.parse(readFileSync(path, "utf-8"));
  if (!Array.isArray(parsed.reports)) {
    throw new Error("report file has no reports array");
  }
  return { reports: parsed.reports as ReportEntry[], allPassed: Boolean(parsed.all_passed) };
}
