// Thin fetch wrapper over the review service HTTP+JSON contract.

import type { ItemView, StatsReport, SubmitResult, TargetId, Verdict } from "./types";

export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    public readonly reviewerId: string,
  ) {}

  private headers(): Record<string, string> {
    return {
      "Content-Type": "application/json",
      "X-Reviewer-Id": this.reviewerId,
    };
  }

  async fetchItems(): Promise<ItemView[]> {
    const response = await fetch(`${this.baseUrl}/items`, { headers: this.headers() });
    if (!response.ok) {
      throw new Error(`GET /items failed with ${response.status}`);
    }
    return (await response.json()) as ItemView[];
  }

  async submitVerdict(
    itemId: number,
    target: TargetId,
    verdict: Verdict,
    comment: string,
  ): Promise<SubmitResult> {
    const response = await fetch(`${this.baseUrl}/items/${itemId}/verdicts`, {
      method: "POST",
      headers: this.headers(),
      body: JSON.stringify({
        reviewer_id: this.reviewerId,
        target,
        verdict,
        comment,
      }),
    });
    if (response.ok) {
      return { ok: true, status: response.status, detail: "" };
    }
    let detail = `HTTP ${response.status}`;
    try {
      const payload = (await response.json()) as { detail?: unknown };
      if (typeof payload.detail === "string") {
        detail = payload.detail;
      }
    } catch {
      // body was not JSON; keep the status text
    }
    return { ok: false, status: response.status, detail };
  }

  /** Agreement stats, or null while reviewer overlap is still insufficient. */
  async fetchStats(): Promise<StatsReport | null> {
    const response = await fetch(`${this.baseUrl}/stats`, { headers: this.headers() });
    if (response.status === 409) {
      return null;
    }
    if (!response.ok) {
      throw new Error(`GET /stats failed with ${response.status}`);
    }
    return (await response.json()) as StatsReport;
  }

  async fetchStatsText(): Promise<string | null> {
    const response = await fetch(`${this.baseUrl}/stats`, { headers: this.headers() });
    if (response.status === 409) {
      return null;
    }
    return await response.text();
  }

  async fetchExport(): Promise<string> {
    const response = await fetch(`${this.baseUrl}/export`, { headers: this.headers() });
    if (!response.ok) {
      throw new Error(`GET /export failed with ${response.status}`);
    }
    return await response.text();
  }
}
