/** Thin typed client for the review service.
 *
 * The only write this client can issue is the verdict POST; everything else
 * is read-only, matching the reviewer role.
 */

import type { ReviewItemView, StatsSnapshot, Verdict } from "./types.js";

export class ApiError extends Error {
  constructor(
    message: string,
    readonly status: number,
    readonly retryable: boolean,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

async function asApiError(resp: Response): Promise<ApiError> {
  let detail = "";
  try {
    const body = (await resp.json()) as { detail?: string };
    detail = body.detail ?? "";
  } catch {
    /* non-JSON error body */
  }
  return new ApiError(detail || `${resp.status} ${resp.statusText}`, resp.status, resp.status >= 500);
}

export class ReviewApi {
  constructor(readonly baseUrl: string = "") {}

  private async get<T>(path: string): Promise<T> {
    let resp: Response;
    try {
      resp = await fetch(this.baseUrl + path);
    } catch (err) {
      throw new ApiError(`service unreachable: ${String(err)}`, 0, true);
    }
    if (!resp.ok) throw await asApiError(resp);
    return (await resp.json()) as T;
  }

  loadBatch(limit: number): Promise<ReviewItemView[]> {
    return this.get<ReviewItemView[]>(`/api/qa/batch?limit=${limit}`);
  }

  fetchStats(): Promise<StatsSnapshot> {
    return this.get<StatsSnapshot>("/api/stats");
  }

  async submitVerdict(classId: string, verdict: Verdict, note: string): Promise<{ affected: number }> {
    let resp: Response;
    try {
      resp = await fetch(this.baseUrl + "/api/qa/verdict", {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify({ class_id: classId, verdict, note }),
      });
    } catch (err) {
      throw new ApiError(`service unreachable: ${String(err)}`, 0, true);
    }
    if (!resp.ok) throw await asApiError(resp);
    return (await resp.json()) as { affected: number };
  }

  mediaUrl(previewUrl: string): string {
    return this.baseUrl + previewUrl;
  }

  async fetchMedia(previewUrl: string): Promise<{ mime: string; bytes: Uint8Array }> {
    let resp: Response;
    try {
      resp = await fetch(this.mediaUrl(previewUrl));
    } catch (err) {
      throw new ApiError(`service unreachable: ${String(err)}`, 0, true);
    }
    if (!resp.ok) throw await asApiError(resp);
    const mime = resp.headers.get("content-type") ?? "application/octet-stream";
    return { mime, bytes: new Uint8Array(await resp.arrayBuffer()) };
  }
}
