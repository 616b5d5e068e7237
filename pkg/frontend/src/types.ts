// Wire payload mirrors. The server is authoritative for every rule; the
// client never computes grades or eligibility locally.

export interface RequestView {
  id: string;
  state: "pending" | "claimed" | "completed" | "cancelled";
  session: string;
  students: string[];
  requested: string[];
  rechecks: Record<string, string[]>;
  submitted_at: number;
  claimed_at: number | null;
  completed_at: number | null;
  claimed_by: string | null;
  position: number | null;
}

export interface FeedEntry {
  request: string;
  students: string[];
  requested: string[];
  rechecks: Record<string, string[]>;
  submitted_at: number;
  wait_ms: number;
  position: number;
}

export interface BurndownView {
  target: string;
  ideal: [number, number][];
  actual: [number, number][];
}

export interface ProgressView {
  student: string;
  passed: string[];
  grade: string | null;
  attainable: string[];
  attempts_used: number;
  pending_rechecks: string[];
  burndown: BurndownView;
}

export interface VerdictEntry {
  student: string;
  achievement: string;
  verdict: "pass" | "fail" | "pushback";
}

export interface SessionView {
  id: string;
  opens_at: number;
  closes_at: number;
  examiners: string[];
  open: boolean;
}

export interface HealthView {
  status: string;
  students: number;
  events: number;
  open_session: string | null;
}

export interface WaitSeries {
  count: number;
  mean_ms: number | null;
  median_ms: number | null;
  p90_ms: number | null;
  max_ms: number | null;
}

export interface WaitStats {
  total: WaitSeries;
  queue_only: WaitSeries;
}

export interface CatalogGroup {
  id: string;
  name: string;
}

export interface CatalogAchievement {
  id: string;
  name: string;
  group: string;
  level: string;
  kind: string;
  context: string;
}

export interface CatalogDoc {
  levels: string[];
  groups: CatalogGroup[];
  achievements: CatalogAchievement[];
  [extra: string]: unknown;
}
