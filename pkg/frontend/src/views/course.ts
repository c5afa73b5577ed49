/** Course overview: category counts, ratios and the five dropout rates. */

import { esc } from "../charts.js";
import type { CoursePayload, SummaryPayload } from "../types.js";

const RATE_LABELS: Record<string, string> = {
  certified_to_registrants: "certified / registrants",
  certified_to_active: "certified / active",
  completers_to_registrants: "completers / registrants",
  completers_to_active: "completers / active",
  active_to_registrants: "active / registrants",
};

function pct(value: number | null): string {
  return value === null ? "n/a" : `${value.toFixed(2)}%`;
}

export function renderCoursePicker(courses: CoursePayload[], selected?: string): string {
  const options = courses
    .map(
      (c) =>
        `<option value="${esc(c.course_id)}"${c.course_id === selected ? " selected" : ""}>` +
        `${esc(c.title)} (${esc(c.course_id)})</option>`,
    )
    .join("");
  return `<select class="course-picker">${options}</select>`;
}

export function renderCourseSummary(summary: SummaryPayload): string {
  const categories = (
    [
      ["registrants", summary.registrants, null],
      ["active", summary.active, summary.ratios.active_pct],
      ["completers", summary.completers, summary.ratios.completer_pct],
      ["certified", summary.certified, summary.ratios.certified_pct],
    ] as const
  )
    .map(
      ([name, count, ratio]) =>
        `<tr class="category" data-category="${name}" data-count="${count}">` +
        `<td>${name}</td><td>${count}</td><td>${ratio === null ? "—" : pct(ratio)}</td></tr>`,
    )
    .join("");
  const rates = Object.entries(summary.dropout_rates)
    .map(
      ([key, value]) =>
        `<tr class="rate" data-rate="${esc(key)}" data-value="${value ?? ""}">` +
        `<td>${esc(RATE_LABELS[key] ?? key)}</td><td>${pct(value)}</td></tr>`,
    )
    .join("");
  return (
    `<section class="course-summary" data-course="${esc(summary.course_id)}">` +
    `<h2>${esc(summary.course_id)}</h2>` +
    `<table class="categories"><thead><tr><th>category</th><th>count</th><th>of registrants</th></tr></thead>` +
    `<tbody>${categories}</tbody></table>` +
    `<h3>Dropout rates</h3>` +
    `<table class="dropout-rates"><thead><tr><th>definition</th><th>rate</th></tr></thead>` +
    `<tbody>${rates}</tbody></table>` +
    `</section>`
  );
}
