/** Response shapes of the analytics service (mirrored by the CLI's JSON mode). */

export interface CoursePayload {
  course_id: string;
  title: string;
  start: string;
  duration_weeks: number;
  pass_threshold_pct: number;
  max_quiz_attempts: number;
  registrants: number;
}

export interface Ratios {
  active_pct: number | null;
  completer_pct: number | null;
  certified_pct: number | null;
}

export interface SummaryPayload {
  course_id: string;
  registrants: number;
  active: number;
  completers: number;
  certified: number;
  ratios: Ratios;
  dropout_rates: Record<string, number | null>;
}

export interface WeeklyRow {
  week: number;
  logins: number;
  forum_reads: number;
  forum_posts: number;
  video_events: number;
  quiz_attempts: number;
  downloads: number;
  /** weekly weighted activity score (higher = lower estimated risk) */
  success_rate: number;
}

export interface QuizRow {
  quiz_id: string;
  attempts: number[];
  recorded: number;
  passed: boolean;
}

export interface BatteryRow {
  week: number;
  percent: number;
  symbol_id: string;
  tooltip: string;
}

export interface ProfilePayload {
  course_id: string;
  user_id: string;
  weekly: WeeklyRow[];
  quizzes: QuizRow[];
  videos: { video_id: string; events: number }[];
  downloads: { file_id: string; at: string }[];
  battery: BatteryRow[];
}

export interface ComparisonPoint {
  user: string;
  x: number;
  y: number;
}

export interface ComparisonPayload {
  course_id: string;
  x: string;
  y: string;
  points: ComparisonPoint[];
  pearson_r: number | null;
  ci95: [number, number] | null;
}

export interface BatteryPayload {
  course_id: string;
  week: number;
  mode: string;
  distribution: Record<string, number>;
  active: number;
  registrants: number;
  active_ratio_pct: number | null;
  tooltips: Record<string, string>;
}

export interface RetentionPayload {
  course_id: string;
  video_id: string;
  granularity: string;
  positions: number[];
  watchers_at: number[];
  views_at: number[];
  drop_ratio_at: number[];
}

export const INDICATOR_CHOICES = [
  "logins",
  "forum_reads",
  "forum_posts",
  "video_events",
  "quiz_attempts",
  "downloads",
  "quiz_score",
] as const;

export type Indicator = (typeof INDICATOR_CHOICES)[number];
