import assert from "node:assert/strict";
import test from "node:test";

import {
  burndownSvg,
  capCounter,
  errorText,
  escapeHtml,
  feedTable,
  groupedPicker,
  requestBanner,
} from "../src/format.js";
import { MAX_POLL_INTERVAL_MS, Poller } from "../src/poll.js";
import type { CatalogDoc, FeedEntry, RequestView } from "../src/types.js";

const catalog: CatalogDoc = {
  levels: ["3", "4", "5"],
  groups: [
    { id: "abstraction", name: "Abstraction" },
    { id: "pointers", name: "Pointers" },
  ],
  achievements: [
    { id: "abs-1", name: "Name things well", group: "abstraction", level: "3", kind: "regular", context: "lab-demonstrable" },
    { id: "abs-2", name: "Hide information", group: "abstraction", level: "4", kind: "regular", context: "lab-demonstrable" },
    { id: "ptr-1", name: "Walk a linked list", group: "pointers", level: "3", kind: "regular", context: "lab-demonstrable" },
  ],
};

test("picker groups achievements under named group legends", () => {
  const html = groupedPicker(catalog, new Set(), new Set());
  const abstraction = html.indexOf("<legend>Abstraction</legend>");
  const pointers = html.indexOf("<legend>Pointers</legend>");
  assert.ok(abstraction !== -1 && pointers !== -1);
  assert.ok(abstraction < html.indexOf("abs-1"));
  assert.ok(html.indexOf("abs-2") < pointers);
  assert.ok(html.indexOf("ptr-1") > pointers);
});

test("picker disables already-passed achievements", () => {
  const html = groupedPicker(catalog, new Set(["abs-1"]), new Set());
  const passedRow = html.slice(html.indexOf("abs-1") - 120, html.indexOf("abs-1") + 60);
  assert.ok(passedRow.includes("disabled"));
  assert.ok(passedRow.includes("passed"));
});

test("cap counter warns at and beyond the cap", () => {
  assert.ok(capCounter(2, 4).includes("2 / 4"));
  assert.ok(capCounter(4, 4).includes('class="cap full"'));
  assert.ok(capCounter(5, 4).includes('class="cap over"'));
});

test("feed shows achievements and flags injected re-checks", () => {
  const entries: FeedEntry[] = [
    {
      request: "r7",
      students: ["anna", "bert"],
      requested: ["abs-1", "ptr-1"],
      rechecks: { bert: ["abs-2"] },
      submitted_at: 0,
      wait_ms: 180000,
      position: 0,
    },
  ];
  const html = feedTable(entries);
  assert.ok(html.includes("abs-1, ptr-1"));
  assert.ok(html.includes('class="recheck"'));
  assert.ok(html.includes("↻ abs-2"));
  assert.ok(html.includes("3 min"));
  assert.ok(html.includes('data-request="r7"'));
});

test("burndown svg draws the ideal line and stepped actual", () => {
  const svg = burndownSvg({
    target: "5",
    ideal: [
      [0, 10],
      [100, 0],
    ],
    actual: [
      [0, 10],
      [50, 8],
    ],
  });
  assert.ok(svg.includes('polyline class="ideal"'));
  assert.ok(svg.includes('polyline class="actual"'));
  assert.ok(svg.includes('aria-label="burndown to grade 5"'));
});

test("pending banner shows queue position; claimed shows who", () => {
  const base: RequestView = {
    id: "r1",
    state: "pending",
    session: "s1",
    students: ["anna"],
    requested: ["abs-1"],
    rechecks: {},
    submitted_at: 0,
    claimed_at: null,
    completed_at: null,
    claimed_by: null,
    position: 2,
  };
  assert.ok(requestBanner(base).includes("2 in front of you"));
  const claimed = { ...base, state: "claimed" as const, claimed_by: "tutor9", position: null };
  assert.ok(requestBanner(claimed).includes("tutor9"));
  assert.ok(requestBanner(null).includes("No open request"));
});

test("error text maps known codes and falls back to the server message", () => {
  assert.ok(errorText("PushBackLocked", "x").includes("blocked"));
  assert.equal(errorText("SomethingNew", "server says hi"), "server says hi");
});

test("html is escaped in rendered fragments", () => {
  assert.equal(escapeHtml('<b a="1">&'), "&lt;b a=&quot;1&quot;&gt;&amp;");
  const sneaky: CatalogDoc = {
    levels: ["3"],
    groups: [{ id: "g", name: '<script>alert("x")</script>' }],
    achievements: [
      { id: "a", name: "<img onerror=x>", group: "g", level: "3", kind: "regular", context: "lab-demonstrable" },
    ],
  };
  const html = groupedPicker(sneaky, new Set(), new Set());
  assert.ok(!html.includes("<script>"));
  assert.ok(!html.includes("<img"));
});

test("poll interval is capped at five seconds", () => {
  const poller = new Poller(async () => {}, 60_000);
  assert.ok(poller.intervalMs <= MAX_POLL_INTERVAL_MS);
  assert.equal(new Poller(async () => {}, 2_000).intervalMs, 2_000);
});
