/**
 * Browser bootstrap: a hash router over the pure view renderers.
 *
 * The URL hash is the single source of view state (deep-linkable; reload
 * reproduces the view). Every number on screen comes from a service payload
 * field — this layer only fetches, renders, and wires events. Stale
 * responses are discarded by per-panel request sequence numbers. The API
 * token is pasted into the settings panel and kept for the session only.
 */

import { ApiClient, ApiError, RequestSequencer } from "./api.js";
import { esc } from "./charts.js";
import { decodeState, encodeState, type ViewState } from "./state.js";
import { renderAnonymizeForm } from "./views/anonymize.js";
import { renderBatteryPanel, renderWeekPicker } from "./views/battery.js";
import {
  axesValid,
  renderAxisError,
  renderAxisPicker,
  renderComparison,
} from "./views/comparison.js";
import { renderCoursePicker, renderCourseSummary } from "./views/course.js";
import { renderRetentionDetail, renderUserDashboard } from "./views/user.js";

const TOKEN_KEY = "moocmetrics-token";

export class App {
  private readonly sequencer = new RequestSequencer();

  constructor(
    private readonly root: HTMLElement,
    private readonly api: ApiClient,
  ) {}

  start(): void {
    window.addEventListener("hashchange", () => void this.route());
    void this.route();
  }

  navigate(state: ViewState): void {
    window.location.hash = encodeState(state);
  }

  private async route(): Promise<void> {
    const state = decodeState(window.location.hash);
    const seq = this.sequencer.begin("main");
    try {
      const html = await this.render(state);
      if (this.sequencer.isCurrent("main", seq)) {
        this.root.innerHTML = this.chrome(state) + html;
        this.wire(state);
      }
    } catch (err) {
      if (!this.sequencer.isCurrent("main", seq)) return;
      const detail =
        err instanceof ApiError ? `${err.status}: ${err.detail}` : String(err);
      this.root.innerHTML =
        this.chrome(state) +
        `<div class="error-banner" role="alert">Request failed (${esc(detail)}) ` +
        `<button class="retry">Retry</button></div>`;
      this.root.querySelector(".retry")?.addEventListener("click", () => void this.route());
    }
  }

  private async render(state: ViewState): Promise<string> {
    switch (state.view) {
      case "course": {
        if (!state.course) return `<p class="hint">Pick a course above.</p>`;
        return renderCourseSummary(await this.api.summary(state.course));
      }
      case "user": {
        if (!state.course || !state.user)
          return `<p class="hint">Pick a course and enter a student id.</p>`;
        return renderUserDashboard(await this.api.profile(state.course, state.user));
      }
      case "compare": {
        if (!state.course) return `<p class="hint">Pick a course above.</p>`;
        const x = state.x ?? "forum_reads";
        const y = state.y ?? "quiz_score";
        const pickers =
          `<div class="axis-row">${renderAxisPicker("x", x)} vs ${renderAxisPicker("y", y)}</div>`;
        const problem = axesValid(x, y);
        if (problem) return pickers + renderAxisError(problem); // no query
        return pickers + renderComparison(await this.api.comparison(state.course, x, y));
      }
      case "battery": {
        if (!state.course) return `<p class="hint">Pick a course above.</p>`;
        const courses = await this.api.courses();
        const duration =
          courses.find((c) => c.course_id === state.course)?.duration_weeks ?? 1;
        const week = Math.min(Math.max(state.week ?? 1, 1), duration);
        return (
          renderWeekPicker(duration, week) +
          renderBatteryPanel(await this.api.battery(state.course, week))
        );
      }
      case "anonymize":
        return renderAnonymizeForm();
    }
  }

  private chrome(state: ViewState): string {
    const tab = (view: ViewState["view"], label: string) =>
      `<a class="tab${state.view === view ? " active" : ""}" ` +
      `href="${encodeState({ ...state, view })}">${label}</a>`;
    return (
      `<nav class="tabs">` +
      tab("course", "Course") +
      tab("user", "Student") +
      tab("compare", "Compare") +
      tab("battery", "Battery") +
      tab("anonymize", "Anonymize") +
      `<span class="spacer"></span>` +
      `<span class="course-slot"></span>` +
      `<input class="user-input" placeholder="student id" value="${esc(state.user ?? "")}">` +
      `<input class="token-input" type="password" placeholder="API token" ` +
      `value="${esc(sessionStorage.getItem(TOKEN_KEY) ?? "")}">` +
      `</nav>`
    );
  }

  private wire(state: ViewState): void {
    const courseSlot = this.root.querySelector(".course-slot");
    if (courseSlot) {
      void this.api
        .courses()
        .then((courses) => {
          courseSlot.innerHTML = renderCoursePicker(courses, state.course);
          courseSlot.querySelector(".course-picker")?.addEventListener("change", (e) => {
            const course = (e.target as HTMLSelectElement).value;
            this.navigate({ ...state, course });
          });
          if (!state.course && courses.length) {
            this.navigate({ ...state, course: courses[0]!.course_id });
          }
        })
        .catch(() => {
          courseSlot.textContent = "courses unavailable";
        });
    }

    this.root.querySelector(".token-input")?.addEventListener("change", (e) => {
      const token = (e.target as HTMLInputElement).value;
      sessionStorage.setItem(TOKEN_KEY, token);
      this.api.setToken(token);
    });

    this.root.querySelector(".user-input")?.addEventListener("change", (e) => {
      this.navigate({ ...state, view: "user", user: (e.target as HTMLInputElement).value });
    });

    for (const picker of this.root.querySelectorAll(".axis-picker")) {
      picker.addEventListener("change", (e) => {
        const el = e.target as HTMLSelectElement;
        const axis = el.dataset.axis as "x" | "y";
        this.navigate({ ...state, view: "compare", [axis]: el.value });
      });
    }

    this.root.querySelector(".week-picker")?.addEventListener("change", (e) => {
      this.navigate({
        ...state,
        view: "battery",
        week: Number((e.target as HTMLSelectElement).value),
      });
    });

    for (const link of this.root.querySelectorAll(".video-link")) {
      link.addEventListener("click", (e) => {
        e.preventDefault();
        const video = (e.currentTarget as HTMLElement).dataset.video;
        if (!state.course || !video) return;
        const seq = this.sequencer.begin("retention");
        void this.api.retention(state.course, video).then((payload) => {
          if (!this.sequencer.isCurrent("retention", seq)) return;
          const panel = this.root.querySelector(".panel-videos");
          if (panel) {
            panel.querySelector(".retention-detail")?.remove();
            panel.insertAdjacentHTML("beforeend", renderRetentionDetail(payload));
          }
        });
      });
    }

    const form = this.root.querySelector<HTMLFormElement>(".anonymize-form");
    form?.addEventListener("submit", (e) => {
      e.preventDefault();
      const status = this.root.querySelector(".anonymize-status")!;
      const fileInput = form.querySelector<HTMLInputElement>("input[name=file]")!;
      const file = fileInput.files?.[0];
      if (!file) {
        status.textContent = "choose a CSV file first";
        return;
      }
      const recipe = form.querySelector<HTMLTextAreaElement>("textarea[name=recipe]")!.value;
      const delimiter = form.querySelector<HTMLSelectElement>("select[name=delimiter]")!.value;
      status.textContent = "anonymizing…";
      this.api
        .anonymize(file, recipe, delimiter)
        .then((csv) => {
          status.textContent = "done — downloading";
          const blob = new Blob([csv], { type: "text/csv" });
          const a = document.createElement("a");
          a.href = URL.createObjectURL(blob);
          a.download = "anonymized.csv";
          a.click();
          URL.revokeObjectURL(a.href);
        })
        .catch((err) => {
          status.textContent = `failed: ${err instanceof ApiError ? err.detail : err}`;
        });
    });
  }
}

export function main(): void {
  const root = document.getElementById("app");
  if (!root) throw new Error("missing #app mount point");
  const api = new ApiClient("", sessionStorage.getItem(TOKEN_KEY) ?? "");
  new App(root, api).start();
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  main();
}
