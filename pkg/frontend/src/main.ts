import { Client } from "./api.js";
import { AdminPanel } from "./admin.js";
import { ExaminerFeed } from "./examiner.js";
import { StudentDashboard } from "./student.js";

const TOKEN_KEY = "masteryops.token";
const ROLE_KEY = "masteryops.role";
const ACTOR_KEY = "masteryops.actor";

function boot(): void {
  const root = document.getElementById("app")!;
  const token = sessionStorage.getItem(TOKEN_KEY);
  const role = sessionStorage.getItem(ROLE_KEY);
  const actor = sessionStorage.getItem(ACTOR_KEY);
  if (!token || !role || !actor) {
    renderLogin(root);
    return;
  }
  const client = new Client("", token);
  if (role === "student") {
    void new StudentDashboard(client, actor, root).run();
  } else if (role === "examiner") {
    void new ExaminerFeed(client, root).run();
  } else {
    void new AdminPanel(client, root).run();
  }
}

function renderLogin(root: HTMLElement): void {
  root.innerHTML = `
    <section class="panel login">
      <h2>Sign in</h2>
      <form id="login">
        <input id="actor" placeholder="your id (e.g. anna)" required>
        <input id="token" placeholder="access token" required>
        <select id="role">
          <option value="student">student</option>
          <option value="examiner">examiner</option>
          <option value="admin">admin</option>
        </select>
        <button>Enter</button>
      </form>
    </section>`;
  document.getElementById("login")!.addEventListener("submit", (event) => {
    event.preventDefault();
    sessionStorage.setItem(TOKEN_KEY, (document.getElementById("token") as HTMLInputElement).value.trim());
    sessionStorage.setItem(ACTOR_KEY, (document.getElementById("actor") as HTMLInputElement).value.trim());
    sessionStorage.setItem(ROLE_KEY, (document.getElementById("role") as HTMLSelectElement).value);
    boot();
  });
}

document.addEventListener("DOMContentLoaded", boot);
