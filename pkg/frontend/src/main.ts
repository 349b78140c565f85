// DOM bootstrap: wires the state and renderers to the page and the
// keyboard. All view logic lives in render.ts; all rules in state.ts.

import { ApiClient } from "./api";
import { renderOfflineBanner, renderQueue, renderStatsPanel } from "./render";
import { ReviewState } from "./state";
import type { TargetId, Verdict } from "./types";

const app = document.getElementById("app")!;
const statsHost = document.getElementById("stats")!;

function reviewerId(): string {
  let id = window.localStorage.getItem("reviewer_id") ?? "";
  while (!id.trim()) {
    id = window.prompt("Reviewer id:") ?? "";
  }
  window.localStorage.setItem("reviewer_id", id);
  return id;
}

const api = new ApiClient("", reviewerId());
const state = new ReviewState(api);

function draw(): void {
  app.innerHTML = renderQueue(state.items, state.current(), state.progress(), state.lastError);
  const active = app.querySelector(".target-row.active");
  active?.scrollIntoView({ block: "center" });
}

async function drawStats(): Promise<void> {
  try {
    statsHost.innerHTML = renderStatsPanel(await api.fetchStats());
  } catch {
    statsHost.innerHTML = renderStatsPanel(null);
  }
}

function commentFor(itemId: number, target: TargetId): string {
  const input = app.querySelector<HTMLInputElement>(
    `[data-comment-for="${itemId}:${target}"]`,
  );
  return input?.value ?? "";
}

async function submit(itemId: number, target: TargetId, verdict: Verdict): Promise<void> {
  const outcome = await state.submit(itemId, target, verdict, commentFor(itemId, target));
  if (outcome.kind === "accepted") {
    state.seekUnrated();
    void drawStats();
  }
  draw();
  if (outcome.kind === "blocked") {
    app
      .querySelector<HTMLInputElement>(`[data-comment-for="${itemId}:${target}"]`)
      ?.focus();
  }
}

app.addEventListener("click", (event) => {
  const button = (event.target as HTMLElement).closest<HTMLElement>("button[data-action]");
  if (!button) return;
  const action = button.dataset.action;
  if (action === "retry-load") {
    void boot();
    return;
  }
  if (action === "appropriate" || action === "inappropriate") {
    const itemId = Number(button.dataset.item);
    const target = button.dataset.target as TargetId;
    void submit(itemId, target, action);
  }
});

document.addEventListener("keydown", (event) => {
  if ((event.target as HTMLElement).tagName === "INPUT") {
    if (event.key === "Enter") {
      const input = event.target as HTMLInputElement;
      const [itemId, target] = (input.dataset.commentFor ?? ":").split(":");
      if (itemId && target) {
        void submit(Number(itemId), target as TargetId, "inappropriate");
      }
    }
    return;
  }
  const entry = state.current();
  if (!entry) return;
  switch (event.key) {
    case "a":
      void submit(entry.itemId, entry.target, "appropriate");
      break;
    case "i":
      void submit(entry.itemId, entry.target, "inappropriate");
      break;
    case "j":
    case "ArrowRight":
      state.advance(1);
      draw();
      break;
    case "k":
    case "ArrowLeft":
      state.advance(-1);
      draw();
      break;
  }
});

async function boot(): Promise<void> {
  try {
    await state.load();
    state.seekUnrated();
    draw();
    void drawStats();
  } catch (error) {
    const reason = error instanceof Error ? error.message : String(error);
    app.innerHTML = renderOfflineBanner(reason);
  }
}

void boot();
