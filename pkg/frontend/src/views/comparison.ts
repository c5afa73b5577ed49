/**
 * Parameter comparison: pick two indicators, plot one point per student,
 * export the CSV the service returns. Picking the same indicator twice is
 * blocked client-side before any query is made.
 */

import { esc, scatterChart } from "../charts.js";
import { INDICATOR_CHOICES, type ComparisonPayload } from "../types.js";

export function axesValid(x: string, y: string): string | null {
  if (!x || !y) return "choose both indicators";
  if (x === y) return "x and y must be different indicators";
  return null;
}

export function renderAxisPicker(name: "x" | "y", selected: string): string {
  const options = INDICATOR_CHOICES.map(
    (ind) =>
      `<option value="${ind}"${ind === selected ? " selected" : ""}>${ind.replace("_", " ")}</option>`,
  ).join("");
  return `<select class="axis-picker" data-axis="${name}">${options}</select>`;
}

export function renderComparison(payload: ComparisonPayload): string {
  const scatter = scatterChart(
    payload.points.map((p) => ({ x: p.x, y: p.y, label: p.user })),
    "comparison",
  );
  const fit =
    payload.pearson_r === null
      ? ""
      : `<p class="fit">r = <span class="pearson-r" data-r="${payload.pearson_r}">${payload.pearson_r.toFixed(2)}</span>` +
        (payload.ci95
          ? ` (95% CI ${payload.ci95[0].toFixed(2)}..${payload.ci95[1].toFixed(2)})`
          : "") +
        `</p>`;
  const exportHref =
    `/courses/${encodeURIComponent(payload.course_id)}/indicators` +
    `?x=${encodeURIComponent(payload.x)}&y=${encodeURIComponent(payload.y)}`;
  return (
    `<section class="comparison" data-x="${esc(payload.x)}" data-y="${esc(payload.y)}">` +
    `<h2>${esc(payload.x)} vs ${esc(payload.y)} — ${esc(payload.course_id)}</h2>` +
    scatter +
    fit +
    `<p>${payload.points.length} students</p>` +
    `<a class="export" href="${exportHref}" download="${esc(payload.course_id)}-${esc(payload.x)}-${esc(payload.y)}.json">Export</a>` +
    `</section>`
  );
}

export function renderAxisError(message: string): string {
  return `<p class="axis-error" role="alert">${esc(message)}</p>`;
}
