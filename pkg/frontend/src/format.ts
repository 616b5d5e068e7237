// Pure view rendering: wire payloads in, HTML strings out. Keeping these
// DOM-free makes every user-visible rule testable under node.

import type {
  BurndownView,
  CatalogDoc,
  FeedEntry,
  RequestView,
} from "./types.js";

export function escapeHtml(value: string): string {
  return value
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

// Submit errors, verbatim from the server's code enumeration.
const ERROR_TEXT: Record<string, string> = {
  SessionClosed: "No lab session is open right now.",
  AlreadyPending: "You already have an open request. Wait for it or cancel it first.",
  TooManyAchievements: "That is more achievements than one demonstration can carry.",
  PushBackLocked: "One of these achievements is blocked for you until the session ends.",
  BudgetExhausted: "No demonstration attempts left (course or session limit).",
  AlreadyPassed: "You have already passed one of these achievements.",
  UnknownAchievement: "One of these achievements does not exist in the catalog.",
  PairSizeInvalid: "A request is for one or two distinct students.",
  AlreadyClaimed: "Another examiner claimed this demonstration first.",
  SheetMismatch: "Verdicts must cover exactly the stated achievements.",
  NotSessionExaminer: "You are not an examiner of this session.",
  RetryLater: "The server is busy, try again in a moment.",
  NotAuthorized: "Your role does not allow this action.",
  NotAuthenticated: "Token not accepted. Check it and reload.",
};

export function errorText(code: string, fallback: string): string {
  return ERROR_TEXT[code] ?? fallback;
}

export function conflictToast(code: string, fallback = "Action failed."): string {
  return `<div class="toast toast-error" role="alert">${escapeHtml(errorText(code, fallback))}</div>`;
}

// --- student dashboard -------------------------------------------------------

export function groupedPicker(
  catalog: CatalogDoc,
  passed: Set<string>,
  selected: Set<string>,
): string {
  const byGroup = new Map<string, string[]>();
  for (const achievement of catalog.achievements) {
    const bucket = byGroup.get(achievement.group) ?? [];
    bucket.push(achievement.id);
    byGroup.set(achievement.group, bucket);
  }
  const parts: string[] = [];
  for (const group of catalog.groups) {
    const ids = byGroup.get(group.id);
    if (!ids) continue;
    const items = ids
      .map((id) => {
        const achievement = catalog.achievements.find((a) => a.id === id)!;
        const done = passed.has(id);
        const checked = selected.has(id) ? " checked" : "";
        const disabled = done ? " disabled" : "";
        const cls = done ? "achievement passed" : "achievement";
        return (
          `<label class="${cls}" data-level="${escapeHtml(achievement.level)}">` +
          `<input type="checkbox" value="${escapeHtml(id)}"${checked}${disabled}>` +
          `${escapeHtml(achievement.name)}` +
          `<span class="level">${escapeHtml(achievement.level)}</span>` +
          `</label>`
        );
      })
      .join("");
    parts.push(
      `<fieldset class="group"><legend>${escapeHtml(group.name)}</legend>${items}</fieldset>`,
    );
  }
  return parts.join("");
}

export function capCounter(selectedCount: number, cap: number): string {
  const cls = selectedCount > cap ? "cap over" : selectedCount === cap ? "cap full" : "cap";
  return `<span class="${cls}">${selectedCount} / ${cap} achievements chosen</span>`;
}

export function requestBanner(view: RequestView | null): string {
  if (view === null) {
    return `<div class="banner idle">No open request.</div>`;
  }
  switch (view.state) {
    case "pending": {
      const ahead = view.position ?? 0;
      const queueText =
        ahead === 0 ? "You are first in line." : `${ahead} in front of you.`;
      return `<div class="banner pending">Waiting to demonstrate: ${escapeHtml(
        view.requested.join(", "),
      )}. ${queueText}</div>`;
    }
    case "claimed":
      return `<div class="banner claimed">Picked up by <strong>${escapeHtml(
        view.claimed_by ?? "?",
      )}</strong> — they are on their way.</div>`;
    case "completed":
      return `<div class="banner completed">Demonstration graded.</div>`;
    case "cancelled":
      return `<div class="banner cancelled">Request cancelled.</div>`;
  }
}

export function burndownSvg(burndown: BurndownView, width = 480, height = 200): string {
  const all = [...burndown.ideal, ...burndown.actual];
  if (all.length === 0) return `<svg class="burndown" viewBox="0 0 ${width} ${height}"></svg>`;
  const xs = all.map(([t]) => t);
  const ys = all.map(([, v]) => v);
  const xMin = Math.min(...xs);
  const xMax = Math.max(...xs, xMin + 1);
  const yMax = Math.max(...ys, 1);
  const px = (t: number) => ((t - xMin) / (xMax - xMin)) * (width - 20) + 10;
  const py = (v: number) => height - 10 - (v / yMax) * (height - 20);

  const idealPoints = burndown.ideal
    .map(([t, v]) => `${px(t).toFixed(1)},${py(v).toFixed(1)}`)
    .join(" ");
  // actual is a step function: hold the previous value until each grade entry
  const stepPoints: string[] = [];
  let previous: [number, number] | null = null;
  for (const [t, v] of burndown.actual) {
    if (previous !== null) stepPoints.push(`${px(t).toFixed(1)},${py(previous[1]).toFixed(1)}`);
    stepPoints.push(`${px(t).toFixed(1)},${py(v).toFixed(1)}`);
    previous = [t, v];
  }
  return (
    `<svg class="burndown" viewBox="0 0 ${width} ${height}" role="img" aria-label="burndown to grade ${escapeHtml(burndown.target)}">` +
    `<polyline class="ideal" fill="none" points="${idealPoints}"/>` +
    `<polyline class="actual" fill="none" points="${stepPoints.join(" ")}"/>` +
    `</svg>`
  );
}

// --- examiner feed --------------------------------------------------------------

export function feedTable(entries: FeedEntry[]): string {
  if (entries.length === 0) {
    return `<p class="empty">No pending requests.</p>`;
  }
  const rows = entries
    .map((entry) => {
      const recheckBadges = Object.entries(entry.rechecks)
        .flatMap(([student, achievements]) =>
          achievements.map(
            (a) =>
              `<span class="recheck" title="re-check for ${escapeHtml(student)}">↻ ${escapeHtml(a)}</span>`,
          ),
        )
        .join(" ");
      const waitMin = Math.floor(entry.wait_ms / 60000);
      return (
        `<tr data-request="${escapeHtml(entry.request)}">` +
        `<td>${entry.position + 1}</td>` +
        `<td>${escapeHtml(entry.students.join(" + "))}</td>` +
        `<td>${escapeHtml(entry.requested.join(", "))} ${recheckBadges}</td>` +
        `<td>${waitMin} min</td>` +
        `<td><button class="claim" data-request="${escapeHtml(entry.request)}">Claim</button></td>` +
        `</tr>`
      );
    })
    .join("");
  return (
    `<table class="feed"><thead><tr>` +
    `<th>#</th><th>Students</th><th>Achievements</th><th>Waiting</th><th></th>` +
    `</tr></thead><tbody>${rows}</tbody></table>`
  );
}

/** Stated achievements for one student: the pitch plus their re-checks. */
export function statedAchievements(view: RequestView, student: string): string[] {
  const stated = [...view.requested];
  for (const achievement of view.rechecks[student] ?? []) {
    if (!stated.includes(achievement)) stated.push(achievement);
  }
  return stated;
}

export function gradingSheet(view: RequestView): string {
  const verdicts: Array<"pass" | "fail" | "pushback"> = ["pass", "fail", "pushback"];
  const sections = view.students
    .map((student) => {
      const rechecks = new Set(view.rechecks[student] ?? []);
      const rows = statedAchievements(view, student)
        .map((achievement) => {
          const isRecheck = rechecks.has(achievement);
          const buttons = verdicts
            .map(
              (verdict) =>
                `<label><input type="radio" name="v-${escapeHtml(student)}-${escapeHtml(
                  achievement,
                )}" value="${verdict}">${verdict === "pushback" ? "push-back" : verdict}</label>`,
            )
            .join(" ");
          const cls = isRecheck ? "sheet-row recheck" : "sheet-row";
          const badge = isRecheck ? `<span class="recheck">↻ re-check</span> ` : "";
          return `<tr class="${cls}"><td>${badge}${escapeHtml(achievement)}</td><td>${buttons}</td></tr>`;
        })
        .join("");
      return (
        `<section class="sheet-student"><h3>${escapeHtml(student)}</h3>` +
        `<table class="sheet">${rows}</table></section>`
      );
    })
    .join("");
  return sections + `<button class="send-results" data-request="${escapeHtml(view.id)}">Enter results</button>`;
}
