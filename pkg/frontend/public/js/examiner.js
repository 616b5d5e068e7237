// Examiner view: live feed with one-click claim, grading sheet limited to
// the stated achievements, conflict toast when another examiner wins a race.
import { ApiError } from "./api.js";
import { conflictToast, feedTable, gradingSheet, statedAchievements } from "./format.js";
import { Poller } from "./poll.js";
export class ExaminerFeed {
    client;
    root;
    poller;
    current = null;
    constructor(client, root) {
        this.client = client;
        this.root = root;
        this.poller = new Poller(() => this.refresh());
    }
    async run() {
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
    stop() {
        this.poller.stop();
    }
    async refresh() {
        const entries = await this.client.feed();
        const feed = this.root.querySelector("#feed");
        feed.innerHTML = feedTable(entries);
        feed.querySelectorAll("button.claim").forEach((button) => {
            button.addEventListener("click", () => void this.claim(button.dataset.request));
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
    async claim(requestId) {
        try {
            this.current = await this.client.claim(requestId);
            this.root.querySelector("#toast").innerHTML = "";
        }
        catch (error) {
            if (error instanceof ApiError) {
                // lost the race (or similar): surface and move on
                this.root.querySelector("#toast").innerHTML = conflictToast(error.code, error.message);
            }
            else {
                throw error;
            }
        }
        this.renderSheet();
        await this.refresh();
    }
    renderSheet() {
        const container = this.root.querySelector("#sheet");
        if (!this.current) {
            container.innerHTML = `<p class="empty">Claim a request to grade it.</p>`;
            return;
        }
        container.innerHTML = gradingSheet(this.current);
        container.querySelector("button.send-results").addEventListener("click", () => void this.sendResults());
    }
    async sendResults() {
        if (!this.current)
            return;
        const view = this.current;
        const verdicts = [];
        for (const student of view.students) {
            for (const achievement of statedAchievements(view, student)) {
                const chosen = this.root.querySelector(`input[name="v-${student}-${achievement}"]:checked`);
                if (!chosen) {
                    this.root.querySelector("#toast").innerHTML = conflictToast("SheetMismatch", `Missing verdict for ${student} / ${achievement}.`);
                    return;
                }
                verdicts.push({
                    student,
                    achievement,
                    verdict: chosen.value,
                });
            }
        }
        try {
            await this.client.recordResults(view.id, verdicts);
            this.current = null;
            this.renderSheet();
        }
        catch (error) {
            if (error instanceof ApiError) {
                this.root.querySelector("#toast").innerHTML = conflictToast(error.code, error.message);
            }
            else {
                throw error;
            }
        }
        await this.refresh();
    }
}
//# sourceMappingURL=examiner.js.map