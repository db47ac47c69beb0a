/** Session state: the review queue, verdict history, and stats snapshot.
 *
 * Pure bookkeeping, no DOM and no fetch, so every rule is unit-testable:
 * queue items are grouped by class, a verdict is recorded in history only
 * after the server acknowledged it, and at most one verdict per class is in
 * flight at any time.
 */

import type { ReviewItemView, StatsSnapshot, VerdictEntry } from "./types.js";

export class SessionState {
  queue: ReviewItemView[] = [];
  history: VerdictEntry[] = [];
  stats: StatsSnapshot | null = null;
  statsStale = false;
  lastError: string | null = null;
  private inFlight = new Set<string>();

  setBatch(items: ReviewItemView[]): void {
    // group by class, preserving server order inside each class
    const byClass = new Map<string, ReviewItemView[]>();
    for (const item of items) {
      const group = byClass.get(item.class_id);
      if (group) group.push(item);
      else byClass.set(item.class_id, [item]);
    }
    this.queue = [...byClass.values()].flat();
    this.lastError = null;
  }

  classGroups(): Map<string, ReviewItemView[]> {
    const groups = new Map<string, ReviewItemView[]>();
    for (const item of this.queue) {
      const group = groups.get(item.class_id);
      if (group) group.push(item);
      else groups.set(item.class_id, [item]);
    }
    return groups;
  }

  /** Reserve the class for a verdict round-trip; false if one is in flight. */
  beginVerdict(classId: string): boolean {
    if (this.inFlight.has(classId)) return false;
    this.inFlight.add(classId);
    return true;
  }

  completeVerdict(entry: VerdictEntry): void {
    this.inFlight.delete(entry.classId);
    this.queue = this.queue.filter((item) => item.class_id !== entry.classId);
    this.history.push(entry);
    this.lastError = null;
  }

  failVerdict(classId: string, message: string): void {
    this.inFlight.delete(classId);
    this.lastError = message; // items stay queued, nothing optimistic
  }

  verdictInFlight(classId: string): boolean {
    return this.inFlight.has(classId);
  }

  setStats(snapshot: StatsSnapshot): void {
    this.stats = snapshot;
    this.statsStale = false;
  }

  markStatsStale(): void {
    this.statsStale = true; // keep the last snapshot visible
  }

  setError(message: string): void {
    this.lastError = message;
  }
}
