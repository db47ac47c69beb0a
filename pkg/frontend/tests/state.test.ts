import { describe, expect, it } from "vitest";

import { SessionState } from "../src/state.js";
import type { ReviewItemView } from "../src/types.js";

function item(id: string, classId: string): ReviewItemView {
  return {
    id,
    domain: "static_images",
    class_id: classId,
    media_paths: [`media/${id}.ppm`],
    media_kind: "image",
    question: "q",
    caption: `caption ${id}`,
    status: "qa_sampled",
    attempt: 0,
    updated_at: "2026-01-01T00:00:00Z",
    preview_urls: [`/api/media/${id}?frame=0`],
  };
}

describe("SessionState", () => {
  it("groups the queue by class, preserving order within a class", () => {
    const state = new SessionState();
    state.setBatch([item("a1", "A"), item("b1", "B"), item("a2", "A")]);
    const groups = state.classGroups();
    expect([...groups.keys()]).toEqual(["A", "B"]);
    expect(groups.get("A")!.map((i) => i.id)).toEqual(["a1", "a2"]);
  });

  it("allows a single in-flight verdict per class", () => {
    const state = new SessionState();
    expect(state.beginVerdict("A")).toBe(true);
    expect(state.beginVerdict("A")).toBe(false);
    expect(state.beginVerdict("B")).toBe(true);
  });

  it("records history only on completion and drops the class items", () => {
    const state = new SessionState();
    state.setBatch([item("a1", "A"), item("b1", "B")]);
    state.beginVerdict("A");
    expect(state.history).toEqual([]);
    state.completeVerdict({ classId: "A", verdict: "bad", note: "", affected: 5, at: "t" });
    expect(state.history).toHaveLength(1);
    expect(state.queue.map((i) => i.class_id)).toEqual(["B"]);
    expect(state.verdictInFlight("A")).toBe(false);
  });

  it("keeps the queue on failure and surfaces the error", () => {
    const state = new SessionState();
    state.setBatch([item("a1", "A")]);
    state.beginVerdict("A");
    state.failVerdict("A", "boom");
    expect(state.queue).toHaveLength(1);
    expect(state.history).toEqual([]);
    expect(state.lastError).toBe("boom");
    expect(state.verdictInFlight("A")).toBe(false);
  });

  it("keeps the last stats snapshot when a poll fails", () => {
    const state = new SessionState();
    const snapshot = { by_status: { captioned: 3 }, by_domain: {}, total: 3 };
    state.setStats(snapshot);
    state.markStatsStale();
    expect(state.stats).toEqual(snapshot);
    expect(state.statsStale).toBe(true);
    state.setStats(snapshot);
    expect(state.statsStale).toBe(false);
  });

  it("never mutates caption text", () => {
    const state = new SessionState();
    const original = "  caption with   spaces \n and newline ";
    const entry = item("x", "A");
    entry.caption = original;
    state.setBatch([entry]);
    expect(state.queue[0]!.caption).toBe(original);
  });
});
