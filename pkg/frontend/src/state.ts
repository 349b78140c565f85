// Review session state: the item queue, the cursor over ratable
// targets, and verdict submission with optimistic update + rollback.
//
// The server is the source of truth: a verdict only sticks locally when
// the POST succeeded, and an inappropriate verdict with an empty comment
// is blocked before any request is made (mirroring the server rule so
// the reviewer gets instant feedback).

import type { ApiClient } from "./api";
import type { ItemView, SubmitResult, TargetId, Verdict } from "./types";

export interface QueueEntry {
  itemId: number;
  target: TargetId;
}

export interface Progress {
  done: number;
  total: number;
}

export type SubmitOutcome =
  | { kind: "accepted" }
  | { kind: "blocked"; reason: string }
  | { kind: "rejected"; reason: string }
  | { kind: "network-error"; reason: string };

export const EMPTY_COMMENT_MESSAGE =
  "A reason is required when marking something inappropriate.";

export class ReviewState {
  items: ItemView[] = [];
  cursor = 0;
  lastError: string | null = null;

  constructor(private readonly api: ApiClient) {}

  get reviewerId(): string {
    return this.api.reviewerId;
  }

  async load(): Promise<void> {
    this.items = await this.api.fetchItems();
    this.cursor = Math.min(this.cursor, Math.max(this.queue().length - 1, 0));
  }

  /** Flattened rating queue: every (item, target) pair in server order. */
  queue(): QueueEntry[] {
    const entries: QueueEntry[] = [];
    for (const item of this.items) {
      for (const target of item.targets) {
        entries.push({ itemId: item.item_id, target });
      }
    }
    return entries;
  }

  progress(): Progress {
    let done = 0;
    let total = 0;
    for (const item of this.items) {
      total += item.targets.length;
      done += item.targets.filter((t) => item.own_verdicts[t] !== undefined).length;
    }
    return { done, total };
  }

  current(): QueueEntry | null {
    const queue = this.queue();
    return queue.length ? queue[Math.min(this.cursor, queue.length - 1)] : null;
  }

  itemById(itemId: number): ItemView | undefined {
    return this.items.find((item) => item.item_id === itemId);
  }

  advance(step: 1 | -1): void {
    const size = this.queue().length;
    if (size === 0) return;
    this.cursor = (this.cursor + step + size) % size;
  }

  /** Jump the cursor to the first unrated target, if any. */
  seekUnrated(): void {
    const queue = this.queue();
    for (let index = 0; index < queue.length; index += 1) {
      const item = this.itemById(queue[index].itemId);
      if (item && item.own_verdicts[queue[index].target] === undefined) {
        this.cursor = index;
        return;
      }
    }
  }

  async submit(
    itemId: number,
    target: TargetId,
    verdict: Verdict,
    comment: string,
  ): Promise<SubmitOutcome> {
    const item = this.itemById(itemId);
    if (!item) {
      return { kind: "rejected", reason: `unknown item ${itemId}` };
    }
    if (verdict === "inappropriate" && comment.trim() === "") {
      // no POST: the server would 422 anyway, surface the rule inline
      this.lastError = EMPTY_COMMENT_MESSAGE;
      return { kind: "blocked", reason: EMPTY_COMMENT_MESSAGE };
    }
    const previous = item.own_verdicts[target];
    item.own_verdicts[target] = { verdict, comment };
    let result: SubmitResult;
    try {
      result = await this.api.submitVerdict(itemId, target, verdict, comment);
    } catch (error) {
      // roll back the optimistic update; the caller offers a retry
      this.restore(item, target, previous);
      const reason = error instanceof Error ? error.message : String(error);
      this.lastError = `Network problem, verdict not saved: ${reason}`;
      return { kind: "network-error", reason };
    }
    if (!result.ok) {
      this.restore(item, target, previous);
      this.lastError = result.detail;
      return { kind: "rejected", reason: result.detail };
    }
    this.lastError = null;
    return { kind: "accepted" };
  }

  private restore(
    item: ItemView,
    target: TargetId,
    previous: ItemView["own_verdicts"][string] | undefined,
  ): void {
    if (previous === undefined) {
      delete item.own_verdicts[target];
    } else {
      item.own_verdicts[target] = previous;
    }
  }
}
