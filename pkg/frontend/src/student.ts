// Student dashboard: grouped achievement picker with a live cap counter,
// request submission, queue-position polling, claimed-by banner, burndown.
//
// After every action the dashboard refetches server state; nothing user-
// visible is derived from a local cache.

import { ApiError, Client } from "./api.js";
import {
  burndownSvg,
  capCounter,
  conflictToast,
  groupedPicker,
  requestBanner,
} from "./format.js";
import { Poller } from "./poll.js";
import type { CatalogDoc, RequestView } from "./types.js";

const OPEN_REQUEST_KEY = "masteryops.request";

export class StudentDashboard {
  private selected = new Set<string>();
  private catalog: CatalogDoc | null = null;
  private cap = 4;
  private poller: Poller;

  constructor(
    private client: Client,
    private me: string,
    private root: HTMLElement,
  ) {
    this.poller = new Poller(() => this.refresh());
  }

  async run(): Promise<void> {
    this.root.innerHTML = `
      <section class="panel">
        <div id="banner"></div>
        <div id="toast"></div>
        <h2>Request a demonstration</h2>
        <div id="cap"></div>
        <form id="picker"></form>
        <button id="submit">Request demonstration</button>
        <button id="cancel" hidden>Cancel request</button>
      </section>
      <section class="panel">
        <h2>Progress</h2>
        <div id="summary"></div>
        <div id="burndown"></div>
      </section>`;

    const [catalog, policy] = await Promise.all([
      this.client.getCatalog(),
      this.client.getPolicy(),
    ]);
    this.catalog = catalog;
    this.cap = policy.per_attempt_cap;

    this.root.querySelector<HTMLButtonElement>("#submit")!.addEventListener("click", async (event) => {
      event.preventDefault();
      try {
        const view = await this.client.submitRequest([this.me], [...this.selected]);
        sessionStorage.setItem(OPEN_REQUEST_KEY, view.id);
        this.selected.clear();
        this.root.querySelector<HTMLElement>("#toast")!.innerHTML = "";
      } catch (error) {
        if (error instanceof ApiError) this.toast(error.code, error.message);
        else throw error;
      }
      await this.refresh();
    });

    this.root.querySelector<HTMLButtonElement>("#cancel")!.addEventListener("click", async (event) => {
      event.preventDefault();
      const id = this.requestId();
      if (!id) return;
      try {
        await this.client.cancelRequest(id);
        sessionStorage.removeItem(OPEN_REQUEST_KEY);
      } catch (error) {
        if (error instanceof ApiError) this.toast(error.code, error.message);
        else throw error;
      }
      await this.refresh();
    });

    this.poller.start();
  }

  stop(): void {
    this.poller.stop();
  }

  private requestId(): string | null {
    return sessionStorage.getItem(OPEN_REQUEST_KEY);
  }

  private async refresh(): Promise<void> {
    const progress = await this.client.progress(this.me);
    const passed = new Set(progress.passed);

    if (this.catalog) {
      const picker = this.root.querySelector<HTMLElement>("#picker")!;
      picker.innerHTML = groupedPicker(this.catalog, passed, this.selected);
      picker.querySelectorAll<HTMLInputElement>("input[type=checkbox]").forEach((box) => {
        box.addEventListener("change", () => {
          if (box.checked) this.selected.add(box.value);
          else this.selected.delete(box.value);
          this.renderCap();
        });
      });
    }
    this.renderCap();

    const summary = this.root.querySelector<HTMLElement>("#summary")!;
    summary.innerHTML =
      `<p>Passed <strong>${progress.passed.length}</strong> achievements; ` +
      `current grade <strong>${progress.grade ?? "none yet"}</strong>; ` +
      `attainable: ${progress.attainable.join(", ") || "none"}; ` +
      `attempts used: ${progress.attempts_used}.</p>` +
      (progress.pending_rechecks.length
        ? `<p class="recheck">Outstanding re-checks: ${progress.pending_rechecks.join(", ")}</p>`
        : "");
    this.root.querySelector<HTMLElement>("#burndown")!.innerHTML = burndownSvg(
      progress.burndown,
    );

    let view: RequestView | null = null;
    const id = this.requestId();
    if (id) {
      view = await this.client.getRequest(id);
      if (view.state === "completed" || view.state === "cancelled") {
        sessionStorage.removeItem(OPEN_REQUEST_KEY);
      }
    }
    this.root.querySelector<HTMLElement>("#banner")!.innerHTML = requestBanner(view);
    this.root.querySelector<HTMLButtonElement>("#cancel")!.hidden =
      view === null || view.state !== "pending";
  }

  private renderCap(): void {
    this.root.querySelector<HTMLElement>("#cap")!.innerHTML = capCounter(
      this.selected.size,
      this.cap,
    );
  }

  private toast(code: string, fallback: string): void {
    this.root.querySelector<HTMLElement>("#toast")!.innerHTML = conflictToast(code, fallback);
  }
}
