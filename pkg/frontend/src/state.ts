/**
 * View state <-> URL hash codec.
 *
 * Every view is fully determined by its filter state, so a reload of the
 * same URL reproduces the same dashboard. encode/decode are inverse on
 * canonical states (unknown keys are dropped, parameter order is fixed).
 */

export type ViewName =
  | "course"
  | "user"
  | "compare"
  | "battery"
  | "anonymize";

export interface ViewState {
  view: ViewName;
  course?: string;
  user?: string;
  week?: number;
  x?: string;
  y?: string;
  video?: string;
  from?: string;
  to?: string;
}

const VIEWS: ViewName[] = ["course", "user", "compare", "battery", "anonymize"];

// fixed serialization order keeps encode deterministic
const PARAM_ORDER = ["course", "user", "week", "x", "y", "video", "from", "to"] as const;

export function encodeState(state: ViewState): string {
  const params = new URLSearchParams();
  for (const key of PARAM_ORDER) {
    const value = state[key];
    if (value !== undefined && value !== "") {
      params.set(key, String(value));
    }
  }
  const query = params.toString();
  return `#/${state.view}${query ? "?" + query : ""}`;
}

export function decodeState(hash: string): ViewState {
  const raw = hash.startsWith("#") ? hash.slice(1) : hash;
  const [pathPart, queryPart] = splitOnce(raw.startsWith("/") ? raw.slice(1) : raw, "?");
  const view = (VIEWS as string[]).includes(pathPart) ? (pathPart as ViewName) : "course";
  const params = new URLSearchParams(queryPart ?? "");
  const state: ViewState = { view };
  const course = params.get("course");
  if (course) state.course = course;
  const user = params.get("user");
  if (user) state.user = user;
  const week = params.get("week");
  if (week !== null && /^\d+$/.test(week)) state.week = Number(week);
  const x = params.get("x");
  if (x) state.x = x;
  const y = params.get("y");
  if (y) state.y = y;
  const video = params.get("video");
  if (video) state.video = video;
  const from = params.get("from");
  if (from) state.from = from;
  const to = params.get("to");
  if (to) state.to = to;
  return state;
}

function splitOnce(text: string, sep: string): [string, string | undefined] {
  const i = text.indexOf(sep);
  return i < 0 ? [text, undefined] : [text.slice(0, i), text.slice(i + 1)];
}
