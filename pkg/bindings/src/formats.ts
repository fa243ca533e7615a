/** Readers and writers for the engine's on-disk formats.
 *
 * Directivity and sampled-field files carry a JSON header line, a column
 * row, then CSV data. Spectrum files are plain CSV with a JSON sidecar.
 * Numbers are written in shortest round-trip form, which any IEEE-754
 * parser (including the engine's) restores to the identical double.
 */

import { readFileSync, writeFileSync, existsSync } from 'node:fs';

import { ComplexArray, asComplex, shIndex } from './arrays.js';
import { IoError } from './errors.js';

export interface Spectrum {
  frequencies: Float64Array;
  values: ComplexArray;
  methodTag: string;
  metadata: Record<string, unknown>;
}

export interface Directivity {
  r0: number;
  maxOrder: number;
  frequencies: Float64Array;
  kind: 'source' | 'receiver';
  /** frequency-major, (maxOrder+1)^2 coefficients per frequency */
  coeffs: ComplexArray;
}

export interface SampledField {
  r0: number;
  frequencies: Float64Array;
  /** (theta, phi) pairs, sample-major */
  directions: Float64Array;
  /** frequency-major, one entry per (frequency, sample) */
  pressure: ComplexArray;
}

const fmt = (x: number): string => String(x);

function readLines(path: string): string[] {
  let text: string;
  try {
    text = readFileSync(path, 'utf8');
  } catch (err) {
    throw new IoError(`${path}: ${(err as Error).message}`);
  }
  return text.split('\n');
}

function parseNumber(token: string, path: string, line: number, what: string): number {
  const val = Number(token);
  if (token.trim() === '' || Number.isNaN(val)) {
    throw new IoError(`${path}: line ${line}: bad ${what} value ${JSON.stringify(token)}`);
  }
  return val;
}

function parseHeader(path: string, line: string, required: string[]): Record<string, unknown> {
  let header: unknown;
  try {
    header = JSON.parse(line);
  } catch (err) {
    throw new IoError(`${path}: line 1: invalid JSON header: ${(err as Error).message}`);
  }
  if (typeof header !== 'object' || header === null || Array.isArray(header)) {
    throw new IoError(`${path}: line 1: header must be a JSON object`);
  }
  const doc = header as Record<string, unknown>;
  for (const key of required) {
    if (!(key in doc)) {
      throw new IoError(`${path}: line 1: header missing key ${key}`);
    }
  }
  if (doc.version !== 1) {
    throw new IoError(`${path}: line 1: unsupported format version ${String(doc.version)}`);
  }
  return doc;
}

export function readSpectrum(csvPath: string): Spectrum {
  const lines = readLines(csvPath);
  if ((lines[0] ?? '').trim() !== 'freq_hz,re,im') {
    throw new IoError(`${csvPath}: line 1: expected header 'freq_hz,re,im'`);
  }
  const freqs: number[] = [];
  const re: number[] = [];
  const im: number[] = [];
  for (let i = 1; i < lines.length; i++) {
    const line = lines[i]!;
    if (!line.trim()) continue;
    const parts = line.split(',');
    if (parts.length !== 3) {
      throw new IoError(`${csvPath}: line ${i + 1}: expected 3 columns, got ${parts.length}`);
    }
    freqs.push(parseNumber(parts[0]!, csvPath, i + 1, 'frequency'));
    re.push(parseNumber(parts[1]!, csvPath, i + 1, 're'));
    im.push(parseNumber(parts[2]!, csvPath, i + 1, 'im'));
  }
  let methodTag = 'DEISM';
  let metadata: Record<string, unknown> = {};
  const sidecar = csvPath.replace(/\.csv$/, '.json');
  if (sidecar !== csvPath && existsSync(sidecar)) {
    try {
      const doc = JSON.parse(readFileSync(sidecar, 'utf8'));
      if (typeof doc === 'object' && doc !== null) {
        metadata = doc as Record<string, unknown>;
        if (typeof metadata.method === 'string') methodTag = metadata.method;
      }
    } catch (err) {
      throw new IoError(`${sidecar}: invalid sidecar JSON: ${(err as Error).message}`);
    }
  }
  return {
    frequencies: Float64Array.from(freqs),
    values: asComplex(Float64Array.from(re), Float64Array.from(im)),
    methodTag,
    metadata,
  };
}

export function writeSpectrum(
  csvPath: string,
  spectrum: Spectrum,
  extraMetadata: Record<string, unknown> = {},
): void {
  const lines = ['freq_hz,re,im'];
  for (let i = 0; i < spectrum.frequencies.length; i++) {
    lines.push(
      `${fmt(spectrum.frequencies[i]!)},${fmt(spectrum.values.re[i]!)},${fmt(spectrum.values.im[i]!)}`,
    );
  }
  writeFileSync(csvPath, lines.join('\n') + '\n');
  const sidecar: Record<string, unknown> = {
    version: 1,
    method: spectrum.methodTag,
    n_frequencies: spectrum.frequencies.length,
    ...spectrum.metadata,
    ...extraMetadata,
  };
  writeFileSync(
    csvPath.replace(/\.csv$/, '.json'),
    JSON.stringify(sidecar, Object.keys(sidecar).sort(), 2) + '\n',
  );
}

export function readDirectivity(path: string): Directivity {
  const lines = readLines(path);
  if (lines.length < 2) {
    throw new IoError(`${path}: line 1: file too short for header and column row`);
  }
  const header = parseHeader(path, lines[0]!, [
    'version',
    'kind',
    'r0_m',
    'max_order',
    'frequencies_hz',
  ]);
  if ((lines[1] ?? '').trim() !== 'freq_hz,n,m,re,im') {
    throw new IoError(`${path}: line 2: unexpected column row`);
  }
  const frequencies = Float64Array.from(header.frequencies_hz as number[]);
  const maxOrder = header.max_order as number;
  const nCoeff = (maxOrder + 1) ** 2;
  const re = new Float64Array(frequencies.length * nCoeff).fill(NaN);
  const im = new Float64Array(frequencies.length * nCoeff).fill(NaN);
  const freqIndex = new Map<number, number>();
  frequencies.forEach((f, i) => freqIndex.set(f, i));
  let rows = 0;
  for (let i = 2; i < lines.length; i++) {
    const line = lines[i]!;
    if (!line.trim()) continue;
    const parts = line.split(',');
    if (parts.length !== 5) {
      throw new IoError(`${path}: line ${i + 1}: expected 5 columns, got ${parts.length}`);
    }
    const f = parseNumber(parts[0]!, path, i + 1, 'frequency');
    const fi = freqIndex.get(f);
    if (fi === undefined) {
      throw new IoError(`${path}: line ${i + 1}: frequency ${parts[0]} not in header grid`);
    }
    const n = parseNumber(parts[1]!, path, i + 1, 'order');
    const m = parseNumber(parts[2]!, path, i + 1, 'mode');
    if (!Number.isInteger(n) || !Number.isInteger(m) || n < 0 || n > maxOrder || Math.abs(m) > n) {
      throw new IoError(`${path}: line ${i + 1}: invalid (n, m) = (${n}, ${m})`);
    }
    const at = fi * nCoeff + shIndex(n, m);
    re[at] = parseNumber(parts[3]!, path, i + 1, 're');
    im[at] = parseNumber(parts[4]!, path, i + 1, 'im');
    rows++;
  }
  if (rows !== frequencies.length * nCoeff || re.some(Number.isNaN) || im.some(Number.isNaN)) {
    throw new IoError(
      `${path}: expected ${frequencies.length * nCoeff} coefficient rows covering the full grid, got ${rows}`,
    );
  }
  return {
    r0: header.r0_m as number,
    maxOrder,
    frequencies,
    kind: header.kind as 'source' | 'receiver',
    coeffs: asComplex(re, im),
  };
}

export function writeDirectivity(path: string, d: Directivity): void {
  const nCoeff = (d.maxOrder + 1) ** 2;
  if (d.coeffs.length !== d.frequencies.length * nCoeff) {
    throw new RangeError(
      `coefficient count ${d.coeffs.length} does not match ` +
        `${d.frequencies.length} frequencies x ${nCoeff} modes`,
    );
  }
  const header = {
    version: 1,
    kind: d.kind,
    r0_m: d.r0,
    max_order: d.maxOrder,
    frequencies_hz: Array.from(d.frequencies),
  };
  const lines = [JSON.stringify(header), 'freq_hz,n,m,re,im'];
  for (let fi = 0; fi < d.frequencies.length; fi++) {
    for (let n = 0; n <= d.maxOrder; n++) {
      for (let m = -n; m <= n; m++) {
        const at = fi * nCoeff + shIndex(n, m);
        lines.push(
          `${fmt(d.frequencies[fi]!)},${n},${m},${fmt(d.coeffs.re[at]!)},${fmt(d.coeffs.im[at]!)}`,
        );
      }
    }
  }
  writeFileSync(path, lines.join('\n') + '\n');
}

export function readSampledField(path: string): SampledField {
  const lines = readLines(path);
  if (lines.length < 2) {
    throw new IoError(`${path}: line 1: file too short for header and column row`);
  }
  const header = parseHeader(path, lines[0]!, ['version', 'r0_m', 'frequencies_hz']);
  if ((lines[1] ?? '').trim() !== 'theta_rad,phi_rad,freq_hz,re,im') {
    throw new IoError(`${path}: line 2: unexpected column row`);
  }
  const frequencies = Float64Array.from(header.frequencies_hz as number[]);
  const freqIndex = new Map<number, number>();
  frequencies.forEach((f, i) => freqIndex.set(f, i));
  const dirIndex = new Map<string, number>();
  const directions: number[] = [];
  const entries: Array<[number, number, number, number]> = [];
  for (let i = 2; i < lines.length; i++) {
    const line = lines[i]!;
    if (!line.trim()) continue;
    const parts = line.split(',');
    if (parts.length !== 5) {
      throw new IoError(`${path}: line ${i + 1}: expected 5 columns, got ${parts.length}`);
    }
    const theta = parseNumber(parts[0]!, path, i + 1, 'theta');
    const phi = parseNumber(parts[1]!, path, i + 1, 'phi');
    const fi = freqIndex.get(parseNumber(parts[2]!, path, i + 1, 'frequency'));
    if (fi === undefined) {
      throw new IoError(`${path}: line ${i + 1}: frequency ${parts[2]} not in header grid`);
    }
    const key = `${parts[0]},${parts[1]}`;
    let j = dirIndex.get(key);
    if (j === undefined) {
      j = dirIndex.size;
      dirIndex.set(key, j);
      directions.push(theta, phi);
    }
    entries.push([
      fi,
      j,
      parseNumber(parts[3]!, path, i + 1, 're'),
      parseNumber(parts[4]!, path, i + 1, 'im'),
    ]);
  }
  const nDir = dirIndex.size;
  if (nDir === 0) throw new IoError(`${path}: no samples`);
  const re = new Float64Array(frequencies.length * nDir).fill(NaN);
  const im = new Float64Array(frequencies.length * nDir).fill(NaN);
  for (const [fi, j, r, i2] of entries) {
    re[fi * nDir + j] = r;
    im[fi * nDir + j] = i2;
  }
  if (re.some(Number.isNaN)) {
    throw new IoError(`${path}: samples do not cover every (direction, frequency) pair`);
  }
  return {
    r0: header.r0_m as number,
    frequencies,
    directions: Float64Array.from(directions),
    pressure: asComplex(re, im),
  };
}

export function writeSampledField(path: string, field: SampledField): void {
  const nDir = field.directions.length / 2;
  if (!Number.isInteger(nDir) || field.pressure.length !== field.frequencies.length * nDir) {
    throw new RangeError('pressure length must equal n_frequencies x n_directions');
  }
  const header = {
    version: 1,
    r0_m: field.r0,
    frequencies_hz: Array.from(field.frequencies),
  };
  const lines = [JSON.stringify(header), 'theta_rad,phi_rad,freq_hz,re,im'];
  for (let j = 0; j < nDir; j++) {
    for (let fi = 0; fi < field.frequencies.length; fi++) {
      const at = fi * nDir + j;
      lines.push(
        `${fmt(field.directions[2 * j]!)},${fmt(field.directions[2 * j + 1]!)},` +
          `${fmt(field.frequencies[fi]!)},${fmt(field.pressure.re[at]!)},${fmt(field.pressure.im[at]!)}`,
      );
    }
  }
  writeFileSync(path, lines.join('\n') + '\n');
}
