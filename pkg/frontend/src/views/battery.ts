/**
 * Battery distribution panel: one bar per status over the course's active
 * students, with the battery symbol and the exact feedback text as the
 * hover tooltip. The week picker only offers weeks inside the course.
 */

import { barChart, esc } from "../charts.js";
import type { BatteryPayload } from "../types.js";

export function renderWeekPicker(duration: number, selected: number): string {
  const options = [];
  for (let week = 1; week <= duration; week++) {
    options.push(
      `<option value="${week}"${week === selected ? " selected" : ""}>week ${week}</option>`,
    );
  }
  return `<select class="week-picker">${options.join("")}</select>`;
}

export function renderBatteryPanel(payload: BatteryPayload): string {
  const statuses = Object.keys(payload.tooltips)
    .map(Number)
    .sort((a, b) => a - b);
  const bars = barChart(
    statuses.map((percent) => ({
      label: `${percent}%`,
      value: payload.distribution[String(percent)] ?? 0,
      title: payload.tooltips[String(percent)] ?? "",
    })),
    "battery-distribution",
  );
  const legend = statuses
    .map(
      (percent) =>
        `<figure class="battery-symbol" data-symbol="battery-${percent}" title="${esc(payload.tooltips[String(percent)] ?? "")}">` +
        `<figcaption>${percent}% — <span class="count" data-count="${payload.distribution[String(percent)] ?? 0}">${payload.distribution[String(percent)] ?? 0}</span> students</figcaption>` +
        `</figure>`,
    )
    .join("");
  const ratio =
    payload.active_ratio_pct === null
      ? "n/a"
      : `${payload.active_ratio_pct.toFixed(1)}%`;
  return (
    `<section class="battery-panel" data-week="${payload.week}" data-mode="${esc(payload.mode)}">` +
    `<h2>Battery statuses — ${esc(payload.course_id)}, week ${payload.week}</h2>` +
    bars +
    `<div class="battery-legend">${legend}</div>` +
    `<p class="active-ratio">active students: <span data-active="${payload.active}">${payload.active}</span>` +
    ` of <span data-registrants="${payload.registrants}">${payload.registrants}</span> (${ratio})</p>` +
    `</section>`
  );
}
