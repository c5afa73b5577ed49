/** Typed client for the analytics service plus stale-response bookkeeping. */

import type {
  BatteryPayload,
  ComparisonPayload,
  CoursePayload,
  ProfilePayload,
  RetentionPayload,
  SummaryPayload,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: string,
  ) {
    super(`HTTP ${status}: ${detail}`);
  }
}

type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private readonly baseUrl: string = "",
    private token: string = "",
    private readonly fetchFn: FetchLike = (...args) => fetch(...args),
  ) {}

  setToken(token: string): void {
    this.token = token;
  }

  private headers(): Record<string, string> {
    return this.token ? { Authorization: `Bearer ${this.token}` } : {};
  }

  async get<T>(path: string): Promise<T> {
    const response = await this.fetchFn(this.baseUrl + path, {
      headers: this.headers(),
    });
    if (!response.ok) {
      throw new ApiError(response.status, await response.text());
    }
    return (await response.json()) as T;
  }

  courses(): Promise<CoursePayload[]> {
    return this.get("/courses");
  }

  summary(course: string): Promise<SummaryPayload> {
    return this.get(`/courses/${encodeURIComponent(course)}/summary`);
  }

  profile(course: string, user: string): Promise<ProfilePayload> {
    return this.get(
      `/courses/${encodeURIComponent(course)}/students/${encodeURIComponent(user)}/profile`,
    );
  }

  comparison(course: string, x: string, y: string): Promise<ComparisonPayload> {
    const params = new URLSearchParams({ x, y });
    return this.get(`/courses/${encodeURIComponent(course)}/indicators?${params}`);
  }

  battery(course: string, week: number): Promise<BatteryPayload> {
    return this.get(`/courses/${encodeURIComponent(course)}/battery?week=${week}`);
  }

  retention(course: string, video: string): Promise<RetentionPayload> {
    return this.get(
      `/courses/${encodeURIComponent(course)}/videos/${encodeURIComponent(video)}/retention`,
    );
  }

  /** POST a CSV and recipe; resolves to the anonymized CSV text. */
  async anonymize(file: Blob, recipe: string, delimiter = ","): Promise<string> {
    const form = new FormData();
    form.append("file", file, "upload.csv");
    form.append("recipe", recipe);
    form.append("delimiter", delimiter);
    const response = await this.fetchFn(this.baseUrl + "/anonymize", {
      method: "POST",
      headers: this.headers(),
      body: form,
    });
    if (!response.ok) {
      throw new ApiError(response.status, await response.text());
    }
    return response.text();
  }
}

/**
 * Per-panel request sequencing: concurrent fetches for the same panel keep
 * only the newest response; anything older is discarded on arrival.
 */
export class RequestSequencer {
  private readonly latest = new Map<string, number>();

  begin(panel: string): number {
    const id = (this.latest.get(panel) ?? 0) + 1;
    this.latest.set(panel, id);
    return id;
  }

  isCurrent(panel: string, id: number): boolean {
    return this.latest.get(panel) === id;
  }
}
