/** Controller tying the API client to session state. */

import { ApiError, ReviewApi } from "./api.js";
import { SessionState } from "./state.js";
import type { Verdict } from "./types.js";

function message(err: unknown): string {
  return err instanceof Error ? err.message : String(err);
}

export class ReviewSession {
  constructor(
    readonly api: ReviewApi,
    readonly state: SessionState = new SessionState(),
  ) {}

  /** Fill the queue with up to `limit` sampled items; errors are retryable. */
  async loadBatch(limit = 50): Promise<boolean> {
    try {
      this.state.setBatch(await this.api.loadBatch(limit));
      return true;
    } catch (err) {
      this.state.setError(message(err));
      return false;
    }
  }

  /**
   * Send one class verdict. On acknowledgement the class leaves the queue,
   * the verdict lands in history, and stats refresh; on failure the queue is
   * untouched. Returns the acknowledged count, or null on failure/duplicate.
   */
  async submitVerdict(classId: string, verdict: Verdict, note = ""): Promise<number | null> {
    if (!this.state.beginVerdict(classId)) return null;
    try {
      const ack = await this.api.submitVerdict(classId, verdict, note);
      this.state.completeVerdict({
        classId,
        verdict,
        note,
        affected: ack.affected,
        at: new Date().toISOString(),
      });
    } catch (err) {
      this.state.failVerdict(classId, message(err));
      return null;
    }
    await this.refreshStats();
    return this.state.history[this.state.history.length - 1]?.affected ?? null;
  }

  /** Poll stats; a failed poll keeps the last snapshot and flags it stale. */
  async refreshStats(): Promise<void> {
    try {
      this.state.setStats(await this.api.fetchStats());
    } catch (err) {
      this.state.markStatsStale();
      if (!(err instanceof ApiError) || !err.retryable) {
        this.state.setError(message(err));
      }
    }
  }
}
