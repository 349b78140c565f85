// Pure HTML renderers. Every function returns a string so the view
// logic is testable without a browser; main.ts owns the DOM wiring.

import type { Progress, QueueEntry } from "./state";
import type { ItemView, StatsReport, TargetId } from "./types";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;")
    .replace(/'/g, "&#39;");
}

const OPTION_LETTERS = ["a", "b", "c", "d"];

export function targetLabel(item: ItemView, target: TargetId): string {
  if (target === "stem") {
    return "Stem";
  }
  const word = item.target_words[target];
  return word ? `Distractor “${word}”` : target;
}

export function renderProgress(progress: Progress): string {
  return `<div class="progress" data-done="${progress.done}" data-total="${progress.total}">
    ${progress.done}/${progress.total} reviewed</div>`;
}

export function renderOfflineBanner(message: string): string {
  return `<div class="banner offline" role="alert">Connection problem: ${escapeHtml(message)}
    <button data-action="retry-load">Retry</button></div>`;
}

export function renderError(message: string | null): string {
  if (!message) {
    return "";
  }
  return `<div class="inline-error" role="alert">${escapeHtml(message)}</div>`;
}

function renderTargetRow(
  item: ItemView,
  target: TargetId,
  active: boolean,
  error: string | null,
): string {
  const own = item.own_verdicts[target];
  const verdictClass = own ? ` rated ${own.verdict}` : "";
  const status = own
    ? `<span class="verdict-status">${own.verdict}${
        own.comment ? `: ${escapeHtml(own.comment)}` : ""
      }</span>`
    : `<span class="verdict-status unrated">unrated</span>`;
  const commentBox = `<input type="text" class="comment"
      data-comment-for="${item.item_id}:${target}"
      placeholder="Reason (required when inappropriate)"
      value="${own ? escapeHtml(own.comment) : ""}">`;
  return `<div class="target-row${active ? " active" : ""}${verdictClass}"
       data-item="${item.item_id}" data-target="${target}">
    <span class="target-label">${targetLabel(item, target)}</span>
    <button data-action="appropriate" data-item="${item.item_id}" data-target="${target}"
      title="appropriate (a)">appropriate</button>
    <button data-action="inappropriate" data-item="${item.item_id}" data-target="${target}"
      title="inappropriate (i)">inappropriate</button>
    ${commentBox}
    ${status}
    ${active ? renderError(error) : ""}
  </div>`;
}

export function renderCard(
  item: ItemView,
  activeTarget: TargetId | null,
  error: string | null,
): string {
  const options = item.options
    .map((option, index) => `<li>${OPTION_LETTERS[index] ?? "?"}. ${escapeHtml(option)}</li>`)
    .join("\n");
  const rows = item.targets
    .map((target) => renderTargetRow(item, target, target === activeTarget, error))
    .join("\n");
  return `<article class="card${activeTarget ? " active" : ""}" data-item="${item.item_id}">
    <h3>Item ${item.item_id}</h3>
    <p class="stem">${escapeHtml(item.stem)}</p>
    <ol class="options">${options}</ol>
    <div class="targets">${rows}</div>
  </article>`;
}

export function renderQueue(
  items: ItemView[],
  current: QueueEntry | null,
  progress: Progress,
  error: string | null,
): string {
  const cards = items
    .map((item) =>
      renderCard(
        item,
        current && current.itemId === item.item_id ? current.target : null,
        error,
      ),
    )
    .join("\n");
  return `${renderProgress(progress)}
    <p class="hint">Shortcuts: a appropriate, i inappropriate, Enter submit comment,
      j/k next/previous.</p>
    <div class="queue">${cards}</div>`;
}

export function renderStatsPanel(report: StatsReport | null): string {
  if (report === null) {
    // hidden until two reviewers overlap
    return `<aside class="stats hidden" aria-hidden="true"></aside>`;
  }
  const rows = Object.entries(report)
    .map(
      ([kind, stats]) => `<tr>
        <td>${escapeHtml(kind)}</td>
        <td>${stats.kappa.toFixed(2)}</td>
        <td>${stats.percent_agreement_exact} (${stats.percent_agreement.toFixed(2)})</td>
        <td>${stats.n}</td>
      </tr>`,
    )
    .join("\n");
  return `<aside class="stats">
    <h3>Agreement</h3>
    <table>
      <thead><tr><th>kind</th><th>kappa</th><th>agreement</th><th>n</th></tr></thead>
      <tbody>${rows}</tbody>
    </table>
  </aside>`;
}
