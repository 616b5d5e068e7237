// Admin panel: catalog upload, session open/close, manual corrections.
// The correction note is mandatory; the form will not submit without it.
import { ApiError } from "./api.js";
import { conflictToast } from "./format.js";
export class AdminPanel {
    client;
    root;
    constructor(client, root) {
        this.client = client;
        this.root = root;
    }
    async run() {
        this.root.innerHTML = `
      <div id="toast"></div>
      <section class="panel">
        <h2>Lab session</h2>
        <form id="session-form">
          <input id="session-id" placeholder="session id" required>
          <input id="session-hours" type="number" value="4" min="1" max="12"> hours
          <input id="session-examiners" placeholder="examiners, comma-separated" required>
          <button id="open-session">Open</button>
          <button id="close-session" type="button">Close current</button>
        </form>
        <div id="session-status"></div>
      </section>
      <section class="panel">
        <h2>Manual correction</h2>
        <form id="correction-form">
          <input id="corr-student" placeholder="student id" required>
          <input id="corr-achievement" placeholder="achievement id" required>
          <select id="corr-direction">
            <option value="pass">pass</option>
            <option value="revoke">revoke</option>
          </select>
          <input id="corr-note" placeholder="why (required)" required>
          <button id="corr-send" disabled>Apply</button>
        </form>
      </section>
      <section class="panel">
        <h2>Catalog upload</h2>
        <input id="catalog-file" type="file" accept="application/json">
        <button id="catalog-send">Upload</button>
      </section>`;
        const note = this.root.querySelector("#corr-note");
        const send = this.root.querySelector("#corr-send");
        note.addEventListener("input", () => {
            send.disabled = note.value.trim() === "";
        });
        this.root.querySelector("#open-session").addEventListener("click", async (event) => {
            event.preventDefault();
            const id = this.root.querySelector("#session-id").value.trim();
            const hours = Number(this.root.querySelector("#session-hours").value);
            const examiners = this.root
                .querySelector("#session-examiners")
                .value.split(",")
                .map((e) => e.trim())
                .filter(Boolean);
            const now = Date.now();
            await this.guard(async () => {
                await this.client.openSession(id, now, now + hours * 3_600_000, examiners);
                this.status(`Session ${id} open with ${examiners.length} examiners.`);
            });
        });
        this.root.querySelector("#close-session").addEventListener("click", async () => {
            await this.guard(async () => {
                const result = await this.client.closeSession();
                this.status(`Session closed; ${result.cancelled} pending request(s) cancelled.`);
            });
        });
        send.addEventListener("click", async (event) => {
            event.preventDefault();
            const student = this.root.querySelector("#corr-student").value.trim();
            const achievement = this.root.querySelector("#corr-achievement").value.trim();
            const direction = this.root.querySelector("#corr-direction").value;
            await this.guard(async () => {
                await this.client.correction(student, achievement, direction, note.value);
                this.status(`Correction recorded for ${student}/${achievement}.`);
                note.value = "";
                send.disabled = true;
            });
        });
        this.root.querySelector("#catalog-send").addEventListener("click", async () => {
            const input = this.root.querySelector("#catalog-file");
            const file = input.files?.[0];
            if (!file)
                return;
            const doc = JSON.parse(await file.text());
            await this.guard(async () => {
                await this.client.uploadCatalog(doc);
                this.status("Catalog replaced.");
            });
        });
    }
    status(text) {
        this.root.querySelector("#session-status").textContent = text;
    }
    async guard(action) {
        try {
            await action();
            this.root.querySelector("#toast").innerHTML = "";
        }
        catch (error) {
            if (error instanceof ApiError) {
                this.root.querySelector("#toast").innerHTML = conflictToast(error.code, error.message);
            }
            else {
                throw error;
            }
        }
    }
}
//# sourceMappingURL=admin.js.map