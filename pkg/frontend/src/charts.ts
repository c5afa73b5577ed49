/**
 * Dependency-free SVG chart strings: line, scatter, bar.
 *
 * Charts never derive new analytics — they plot the numbers handed to them
 * and carry the raw values in data attributes so tests (and curious users)
 * can read back exactly what the service sent.
 */

export interface XY {
  x: number;
  y: number;
  label?: string;
}

export interface Bar {
  label: string;
  value: number;
  title?: string;
}

const WIDTH = 360;
const HEIGHT = 160;
const PAD = 28;

export function esc(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

function scale(values: number[], lo: number, hi: number): (v: number) => number {
  const min = Math.min(...values);
  const max = Math.max(...values);
  const span = max - min || 1;
  return (v) => lo + ((v - min) / span) * (hi - lo);
}

function frame(body: string, cls: string): string {
  return (
    `<svg class="chart ${cls}" viewBox="0 0 ${WIDTH} ${HEIGHT}" role="img">` +
    `<rect class="chart-bg" x="0" y="0" width="${WIDTH}" height="${HEIGHT}"/>` +
    body +
    `</svg>`
  );
}

export function lineChart(points: XY[], cls = "line"): string {
  if (points.length === 0) return frame(emptyNote(), cls);
  const sx = scale(points.map((p) => p.x), PAD, WIDTH - PAD);
  const sy = scale(points.map((p) => p.y), HEIGHT - PAD, PAD);
  const path = points
    .map((p, i) => `${i ? "L" : "M"}${sx(p.x).toFixed(1)},${sy(p.y).toFixed(1)}`)
    .join(" ");
  const dots = points
    .map(
      (p) =>
        `<circle class="dot" cx="${sx(p.x).toFixed(1)}" cy="${sy(p.y).toFixed(1)}" r="3" ` +
        `data-x="${p.x}" data-y="${p.y}"><title>${esc(p.label ?? `${p.x}: ${p.y}`)}</title></circle>`,
    )
    .join("");
  return frame(`<path class="series" d="${path}" fill="none"/>` + dots, cls);
}

export function scatterChart(points: XY[], cls = "scatter"): string {
  if (points.length === 0) return frame(emptyNote(), cls);
  const sx = scale(points.map((p) => p.x), PAD, WIDTH - PAD);
  const sy = scale(points.map((p) => p.y), HEIGHT - PAD, PAD);
  const dots = points
    .map(
      (p) =>
        `<circle class="dot" cx="${sx(p.x).toFixed(1)}" cy="${sy(p.y).toFixed(1)}" r="3.5" ` +
        `data-x="${p.x}" data-y="${p.y}"${p.label ? ` data-label="${esc(p.label)}"` : ""}>` +
        `<title>${esc(p.label ?? "")} (${p.x}, ${p.y})</title></circle>`,
    )
    .join("");
  return frame(dots, cls);
}

export function barChart(bars: Bar[], cls = "bars"): string {
  if (bars.length === 0) return frame(emptyNote(), cls);
  const sy = scale([0, ...bars.map((b) => b.value)], HEIGHT - PAD, PAD);
  const slot = (WIDTH - 2 * PAD) / bars.length;
  const width = Math.min(40, slot * 0.7);
  const body = bars
    .map((b, i) => {
      const x = PAD + i * slot + (slot - width) / 2;
      const y = sy(b.value);
      const h = HEIGHT - PAD - y;
      return (
        `<g class="bar" data-label="${esc(b.label)}" data-value="${b.value}">` +
        `<rect x="${x.toFixed(1)}" y="${y.toFixed(1)}" width="${width.toFixed(1)}" height="${h.toFixed(1)}">` +
        (b.title ? `<title>${esc(b.title)}</title>` : "") +
        `</rect>` +
        `<text class="bar-label" x="${(x + width / 2).toFixed(1)}" y="${HEIGHT - 8}" text-anchor="middle">${esc(b.label)}</text>` +
        `<text class="bar-value" x="${(x + width / 2).toFixed(1)}" y="${(y - 4).toFixed(1)}" text-anchor="middle">${b.value}</text>` +
        `</g>`
      );
    })
    .join("");
  return frame(body, cls);
}

function emptyNote(): string {
  return `<text class="empty" x="${WIDTH / 2}" y="${HEIGHT / 2}" text-anchor="middle">no data</text>`;
}
