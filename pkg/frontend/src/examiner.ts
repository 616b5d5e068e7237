// Examiner view: live feed with one-click claim, grading sheet limited to
// the stated achievements, conflict toast when another examiner wins a race.

import { ApiError, Client } from "./api.js";
import { conflictToast, feedTable, gradingSheet, statedAchievements } from "./format.js";
import { Poller } from "./poll.js";
import type { RequestView, VerdictEntry } from "./types.js";

export class ExaminerFeed {
  private poller: Poller;
  private current: RequestView | null = null;

  constructor(
    private client: Client,
    private root: HTMLElement,
  ) {
    this.poller = new Poller(() => this.refresh());
  }

  async run(): Promise<void> {
    this.root.innerHTML = `
      <section class="panel">
        <h2>Pending demonstrations</h2>
        <div id="toast"></div>
        <div id="feed"></div>
      </section>
      <section class="panel">
        <h2>Grading</h2>
        <div id="sheet"><p class="empty">Claim a request to grade it.</p></div>
      </section>`;
    this.poller.start();
  }

  stop(): void {
    this.poller.stop();
  }

  private async refresh(): Promise<void> {
    const entries = await this.client.feed();
    const feed = this.root.querySelector<HTMLElement>("#feed")!;
    feed.innerHTML = feedTable(entries);
    feed.querySelectorAll<HTMLButtonElement>("button.claim").forEach((button) => {
      button.addEventListener("click", () => void this.claim(button.dataset.request!));
    });
    if (this.current) {
      // re-fetch rather than trust the cached view
      this.current = await this.client.getRequest(this.current.id);
      if (this.current.state !== "claimed") {
        this.current = null;
        this.renderSheet();
      }
    }
  }

  private async claim(requestId: string): Promise<void> {
    try {
      this.current = await this.client.claim(requestId);
      this.root.querySelector<HTMLElement>("#toast")!.innerHTML = "";
    } catch (error) {
      if (error instanceof ApiError) {
        // lost the race (or similar): surface and move on
        this.root.querySelector<HTMLElement>("#toast")!.innerHTML = conflictToast(
          error.code,
          error.message,
        );
      } else {
        throw error;
      }
    }
    this.renderSheet();
    await this.refresh();
  }

  private renderSheet(): void {
    const container = this.root.querySelector<HTMLElement>("#sheet")!;
    if (!this.current) {
      container.innerHTML = `<p class="empty">Claim a request to grade it.</p>`;
      return;
    }
    container.innerHTML = gradingSheet(this.current);
    container.querySelector<HTMLButtonElement>("button.send-results")!.addEventListener(
      "click",
      () => void this.sendResults(),
    );
  }

  private async sendResults(): Promise<void> {
    if (!this.current) return;
    const view = this.current;
    const verdicts: VerdictEntry[] = [];
    for (const student of view.students) {
      for (const achievement of statedAchievements(view, student)) {
        const chosen = this.root.querySelector<HTMLInputElement>(
          `input[name="v-${student}-${achievement}"]:checked`,
        );
        if (!chosen) {
          this.root.querySelector<HTMLElement>("#toast")!.innerHTML = conflictToast(
            "SheetMismatch",
            `Missing verdict for ${student} / ${achievement}.`,
          );
          return;
        }
        verdicts.push({
          student,
          achievement,
          verdict: chosen.value as VerdictEntry["verdict"],
        });
      }
    }
    try {
      await this.client.recordResults(view.id, verdicts);
      this.current = null;
      this.renderSheet();
    } catch (error) {
      if (error instanceof ApiError) {
        this.root.querySelector<HTMLElement>("#toast")!.innerHTML = conflictToast(
          error.code,
          error.message,
        );
      } else {
        throw error;
      }
    }
    await this.refresh();
  }
}
