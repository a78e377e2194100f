// Mirrors of the service's response documents.  The console never derives
// metrics itself: every number rendered comes from one of these payloads.

export interface Finding {
  code: string;
  severity: "error" | "warning";
  message: string;
}

export interface InstanceSummary {
  instance_id: string;
  revision: number;
  summary: {
    students: number;
    faculty: number;
    groups: number;
    slots: number;
    m1: number;
    weights: Record<string, number>;
    digest: string;
  };
  grid: GridDoc;
}

export interface GridDoc {
  days: { index: number; label: string; has_night: boolean }[];
  slots: SlotDoc[];
}

export interface SlotDoc {
  id: number;
  day: number;
  seq: number;
  label: string;
  night: boolean;
  available: boolean;
}

export interface GroupRow {
  id: number;
  label: string;
  kind: "coordinated" | "meeting-time";
  sections: string[];
  n_students: number;
  pinned_slot: number | null;
  blocked_slots: number[];
}

export interface GroupingDoc {
  revision: number;
  groups: GroupRow[];
  ambiguous_sections: { section: string; candidates: string[] }[];
  forced_overlap_pairs: [string, string, string][];
}

export interface ReportDoc {
  schema_version: number;
  kind: "inconvenience_report";
  rows: Record<string, number>;
  head_counts: Record<string, number>;
  occurrences: Record<string, number>;
  forced_overlap_count: number;
  weighted_objective: number;
  weights: Record<string, number>;
  details: Record<string, string[]>;
}

export interface ReportDelta {
  head_counts: Record<string, number>;
  occurrences: Record<string, number>;
  weighted_objective: number;
}

export interface ScheduleDoc {
  schedule_id: string;
  name: string;
  instance_id: string;
  revision: number;
  stale: boolean;
  assignment: Record<string, number>;
  report: ReportDoc;
  undo_depth: number;
}

export type MoveResponse = ScheduleDoc & { delta: ReportDelta };

export interface MoveRejection {
  rule: string;
  group?: string;
  slot?: number;
}

export interface OverlapMatrixDoc {
  labels: string[];
  current: number[][];
  historical: number[][] | null;
}

export interface PortfolioManifest {
  runs: {
    weight_set: string;
    k: number;
    seed: number;
    status: string;
    objective: number | null;
    schedule_file: string | null;
    error: string | null;
  }[];
  best: Record<
    string,
    { k: number; objective: number; schedule_file: string; report_rows: Record<string, number> }
  >;
}

export interface JobDoc {
  job_id: string;
  status: "pending" | "running" | "done" | "failed";
  result: { manifest: PortfolioManifest; schedules: Record<string, string> } | null;
  error: string | null;
}

export interface WhatIfColumnDoc {
  label: string;
  feasible: boolean;
  rows: Record<string, number> | null;
  objective: number | null;
  reason: string | null;
}

export interface WhatIfDoc {
  day_delta: number;
  metric_rows: string[];
  weight_sets: Record<string, { base: WhatIfColumnDoc; modified: WhatIfColumnDoc }>;
}

export interface ValidationDoc {
  revision: number;
  findings: Finding[];
  ok: boolean;
}

export const REPORT_ROW_ORDER = [
  "Students with an Unforced Overlap",
  "Students with 3 Exams in 24 Hours",
  "Students with 4 Exams in 48 Hours",
  "Students with Back-to-Back Exams",
  "Students with Night-to-Morning Exams",
  "Students with at Least One Inconvenience",
  "Faculty with an Unforced Overlap",
  "Faculty with Back-to-Back Exams",
] as const;
