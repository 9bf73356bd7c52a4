/**
 * Minimal hand-rolled SVG charts: a time-series line plot and a
 * feasibility-region map.  No rendering dependencies; output is plain
 * text diffable in review.
 */

import type { FeasibilitySweep } from "./feasibility.js";

const W = 640;
const H = 360;
const ML = 64;
const MR = 20;
const MT = 40;
const MB = 52;
const PW = W - ML - MR;
const PH = H - MT - MB;

function esc(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

export function niceTicks(min: number, max: number, count: number): number[] {
  const range = max - min || 1;
  const rough = range / count;
  const mag = Math.pow(10, Math.floor(Math.log10(rough)));
  const step = [1, 2, 5, 10].map((m) => m * mag).find((n) => n >= rough) ?? rough;
  const start = Math.ceil(min / step) * step;
  const ticks: number[] = [];
  for (let v = start; v <= max + step * 1e-9; v += step) {
    ticks.push(Math.abs(v) < step * 1e-9 ? 0 : v);
  }
  return ticks;
}

export function logTicks(min: number, max: number): number[] {
  const lo = Math.floor(Math.log10(min));
  const hi = Math.ceil(Math.log10(max));
  const ticks: number[] = [];
  for (let e = lo; e <= hi; e++) ticks.push(Math.pow(10, e));
  return ticks;
}

function fmt(v: number): string {
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 1e5 || a < 1e-3) return v.toExponential(1);
  return String(Math.round(v * 1e6) / 1e6);
}

export interface LineChartSpec {
  title: string;
  yLabel: string;
  points: Array<[number, number]>;
  logY?: boolean;
  /** vertical dashed marker (last finite time before a flagged record) */
  markerT?: number | null;
  markerLabel?: string;
}

export function buildLineChart(spec: LineChartSpec): string {
  const { points } = spec;
  const ts = points.map((p) => p[0]);
  let vals = points.map((p) => p[1]);
  const logY = spec.logY === true;
  if (logY) {
    vals = vals.map((v) => Math.max(v, Number.MIN_VALUE));
  }
  const tMin = Math.min(...ts);
  let tMax = Math.max(...ts);
  if (spec.markerT != null) tMax = Math.max(tMax, spec.markerT);
  const vMinRaw = Math.min(...vals);
  const vMaxRaw = Math.max(...vals);
  const pad = (vMaxRaw - vMinRaw || Math.abs(vMaxRaw) || 1) * 0.05;
  const vMin = logY ? vMinRaw : vMinRaw - pad;
  const vMax = logY ? vMaxRaw : vMaxRaw + pad;

  const xOf = (t: number) => ML + ((t - tMin) / (tMax - tMin || 1)) * PW;
  const yOf = (v: number) => {
    if (logY) {
      const lo = Math.log10(vMin);
      const hi = Math.log10(vMax);
      return MT + PH - ((Math.log10(v) - lo) / (hi - lo || 1)) * PH;
    }
    return MT + PH - ((v - vMin) / (vMax - vMin || 1)) * PH;
  };

  let s = `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${W} ${H}" font-family="Helvetica, Arial, sans-serif">\n`;
  s += `<rect width="${W}" height="${H}" fill="#fff"/>\n`;
  s += `<text x="${ML}" y="${MT - 16}" font-size="13" font-weight="600" fill="#222">${esc(spec.title)}</text>\n`;

  const yTicks = logY ? logTicks(vMin, vMax) : niceTicks(vMin, vMax, 5);
  for (const v of yTicks) {
    if (v < vMin || v > vMax) continue;
    const y = yOf(v);
    s += `<line x1="${ML}" y1="${y.toFixed(1)}" x2="${ML + PW}" y2="${y.toFixed(1)}" stroke="#eee"/>\n`;
    s += `<text x="${ML - 6}" y="${(y + 3).toFixed(1)}" font-size="9" fill="#555" text-anchor="end">${fmt(v)}</text>\n`;
  }
  for (const t of niceTicks(tMin, tMax, 6)) {
    if (t < tMin || t > tMax) continue;
    const x = xOf(t);
    s += `<line x1="${x.toFixed(1)}" y1="${MT + PH}" x2="${x.toFixed(1)}" y2="${MT + PH + 4}" stroke="#888"/>\n`;
    s += `<text x="${x.toFixed(1)}" y="${MT + PH + 16}" font-size="9" fill="#555" text-anchor="middle">${fmt(t)}</text>\n`;
  }
  s += `<rect x="${ML}" y="${MT}" width="${PW}" height="${PH}" fill="none" stroke="#888"/>\n`;
  s += `<text x="${ML + PW / 2}" y="${H - 14}" font-size="11" fill="#333" text-anchor="middle">t</text>\n`;
  s += `<text x="16" y="${MT + PH / 2}" font-size="11" fill="#333" text-anchor="middle" transform="rotate(-90 16 ${MT + PH / 2})">${esc(spec.yLabel)}</text>\n`;

  const path = points
    .map(([t, v], i) => `${i === 0 ? "M" : "L"}${xOf(t).toFixed(2)},${yOf(logY ? Math.max(v, Number.MIN_VALUE) : v).toFixed(2)}`)
    .join(" ");
  s += `<path d="${path}" fill="none" stroke="#4361ee" stroke-width="1.4"/>\n`;

  if (spec.markerT != null) {
    const x = xOf(spec.markerT);
    s += `<line x1="${x.toFixed(1)}" y1="${MT}" x2="${x.toFixed(1)}" y2="${MT + PH}" stroke="#e63946" stroke-width="1.2" stroke-dasharray="5,4"/>\n`;
    s += `<text x="${(x - 4).toFixed(1)}" y="${MT + 12}" font-size="9" fill="#e63946" text-anchor="end">${esc(
      spec.markerLabel ?? `flagged at t=${fmt(spec.markerT)}`,
    )}</text>\n`;
  }
  s += `</svg>\n`;
  return s;
}

export function buildFeasibilityChart(sweep: FeasibilitySweep, title: string): string {
  const { theta, sigma, feasible } = sweep;
  const tMin = Math.min(...theta);
  const tMax = Math.max(...theta);
  const sMin = Math.min(...sigma);
  const sMax = Math.max(...sigma);
  const xOf = (t: number) => ML + ((t - tMin) / (tMax - tMin || 1)) * PW;
  const yOf = (v: number) => MT + PH - ((v - sMin) / (sMax - sMin || 1)) * PH;
  const cellW = PW / Math.max(theta.length - 1, 1);
  const cellH = PH / Math.max(sigma.length - 1, 1);

  let s = `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${W} ${H}" font-family="Helvetica, Arial, sans-serif">\n`;
  s += `<rect width="${W}" height="${H}" fill="#fff"/>\n`;
  s += `<text x="${ML}" y="${MT - 16}" font-size="13" font-weight="600" fill="#222">${esc(title)}</text>\n`;
  if (sweep.dLabel) {
    s += `<text x="${ML}" y="${MT - 4}" font-size="9" fill="#888">${esc(sweep.dLabel)}</text>\n`;
  }
  for (let si = 0; si < sigma.length; si++) {
    for (let ti = 0; ti < theta.length; ti++) {
      if (!feasible[si][ti]) continue;
      const x = xOf(theta[ti]) - cellW / 2;
      const y = yOf(sigma[si]) - cellH / 2;
      s += `<rect class="feasible-cell" x="${x.toFixed(2)}" y="${y.toFixed(2)}" width="${cellW.toFixed(2)}" height="${cellH.toFixed(2)}" fill="#2d6a4f" fill-opacity="0.75"/>\n`;
    }
  }
  for (const t of niceTicks(tMin, tMax, 6)) {
    if (t < tMin || t > tMax) continue;
    const x = xOf(t);
    s += `<text x="${x.toFixed(1)}" y="${MT + PH + 16}" font-size="9" fill="#555" text-anchor="middle">${fmt(t)}</text>\n`;
  }
  for (const v of niceTicks(sMin, sMax, 5)) {
    if (v < sMin || v > sMax) continue;
    const y = yOf(v);
    s += `<text x="${ML - 6}" y="${(y + 3).toFixed(1)}" font-size="9" fill="#555" text-anchor="end">${fmt(v)}</text>\n`;
  }
  s += `<rect x="${ML}" y="${MT}" width="${PW}" height="${PH}" fill="none" stroke="#888"/>\n`;
  s += `<text x="${ML + PW / 2}" y="${H - 14}" font-size="11" fill="#333" text-anchor="middle">theta</text>\n`;
  s += `<text x="16" y="${MT + PH / 2}" font-size="11" fill="#333" text-anchor="middle" transform="rotate(-90 16 ${MT + PH / 2})">sigma</text>\n`;
  s += `</svg>\n`;
  return s;
}
