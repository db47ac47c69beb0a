/** Shapes mirrored from the review API; never mutated client-side. */

export interface ReviewItemView {
  id: string;
  domain: string;
  class_id: string;
  media_paths: string[];
  media_kind: string;
  question: string;
  caption: string;
  status: string;
  attempt: number;
  updated_at: string;
  preview_urls: string[];
}

export interface StatsSnapshot {
  by_status: Record<string, number>;
  by_domain: Record<string, number>;
  total: number;
}

export type Verdict = "good" | "bad";

export interface VerdictEntry {
  classId: string;
  verdict: Verdict;
  note: string;
  affected: number;
  at: string;
}
