/**
 * The per-student dashboard: quiz attempts with a score line, downloaded
 * files, login/read/post activity by week, and a per-video drill-down that
 * links to the retention detail. Zero-activity students render explicit
 * zeros, never blank panels.
 */

import { barChart, esc, lineChart } from "../charts.js";
import type { ProfilePayload, RetentionPayload, WeeklyRow } from "../types.js";

function weeklyBars(weekly: WeeklyRow[], field: keyof WeeklyRow): string {
  const inCourse = weekly.filter((row) => row.week >= 1);
  return barChart(
    inCourse.map((row) => ({
      label: `w${row.week}`,
      value: row[field] as number,
      title: `week ${row.week}: ${row[field]}`,
    })),
    `weekly-${String(field)}`,
  );
}

function total(weekly: WeeklyRow[], field: keyof WeeklyRow): number {
  // display-only sum of the payload's weekly rows (the rows stay visible)
  return weekly.reduce((acc, row) => acc + (row[field] as number), 0);
}

export function renderUserDashboard(profile: ProfilePayload): string {
  const quizzes = profile.quizzes
    .map((quiz) => {
      const line = lineChart(
        quiz.attempts.map((score, i) => ({
          x: i + 1,
          y: score,
          label: `attempt ${i + 1}: ${score}`,
        })),
        "quiz-scores",
      );
      return (
        `<article class="quiz" data-quiz="${esc(quiz.quiz_id)}" data-recorded="${quiz.recorded}">` +
        `<h4>Quiz ${esc(quiz.quiz_id)}</h4>` +
        `<p>attempts: <span class="attempt-scores">${quiz.attempts.map(String).join(", ")}</span>` +
        ` — recorded <strong class="recorded">${quiz.recorded}</strong>` +
        ` (${quiz.passed ? "passed" : "not passed"})</p>` +
        line +
        `</article>`
      );
    })
    .join("");

  const downloads = profile.downloads.length
    ? `<ul class="downloads">` +
      profile.downloads
        .map((d) => `<li data-file="${esc(d.file_id)}">${esc(d.file_id)} <time>${esc(d.at)}</time></li>`)
        .join("") +
      `</ul>`
    : `<p class="empty-state">0 downloads</p>`;

  const videos = profile.videos.length
    ? `<ul class="videos">` +
      profile.videos
        .map(
          (v) =>
            `<li><a class="video-link" href="#" data-video="${esc(v.video_id)}">${esc(v.video_id)}</a>` +
            ` <span class="video-events" data-events="${v.events}">${v.events} events</span></li>`,
        )
        .join("") +
      `</ul>`
    : `<p class="empty-state">0 video interactions</p>`;

  const battery = profile.battery
    .map(
      (b) =>
        `<span class="battery-cell" data-week="${b.week}" data-percent="${b.percent}" title="${esc(b.tooltip)}">` +
        `w${b.week}: ${b.percent}%</span>`,
    )
    .join("");

  return (
    `<section class="user-dashboard" data-user="${esc(profile.user_id)}" data-course="${esc(profile.course_id)}">` +
    `<h2>${esc(profile.user_id)} — ${esc(profile.course_id)}</h2>` +
    `<div class="panels">` +
    `<section class="panel panel-quizzes"><h3>Quiz attempts &amp; scores</h3>${quizzes || '<p class="empty-state">0 quiz attempts</p>'}</section>` +
    `<section class="panel panel-downloads"><h3>Downloads (${profile.downloads.length})</h3>${downloads}</section>` +
    `<section class="panel panel-logins"><h3>Logins (total ${total(profile.weekly, "logins")})</h3>${weeklyBars(profile.weekly, "logins")}</section>` +
    `<section class="panel panel-reads"><h3>Forum reads (total ${total(profile.weekly, "forum_reads")})</h3>${weeklyBars(profile.weekly, "forum_reads")}</section>` +
    `<section class="panel panel-posts"><h3>Forum posts (total ${total(profile.weekly, "forum_posts")})</h3>${weeklyBars(profile.weekly, "forum_posts")}</section>` +
    `<section class="panel panel-videos"><h3>Videos</h3>${videos}</section>` +
    `<section class="panel panel-battery"><h3>Weekly battery</h3><div class="battery-strip">${battery}</div></section>` +
    `</div>` +
    `</section>`
  );
}

/** Retention drill-down shown when a video id is clicked. */
export function renderRetentionDetail(retention: RetentionPayload): string {
  const watchers = lineChart(
    retention.positions.map((p, i) => ({
      x: p,
      y: retention.watchers_at[i] ?? 0,
      label: `${p}${retention.granularity === "percent" ? "%" : "s"}: ${retention.watchers_at[i]} watching`,
    })),
    "retention-watchers",
  );
  const views = lineChart(
    retention.positions.map((p, i) => ({
      x: p,
      y: retention.views_at[i] ?? 0,
    })),
    "retention-views",
  );
  return (
    `<section class="retention-detail" data-video="${esc(retention.video_id)}">` +
    `<h3>Video ${esc(retention.video_id)} retention</h3>` +
    `<h4>Watchers</h4>${watchers}` +
    `<h4>Views (replays included)</h4>${views}` +
    `</section>`
  );
}
