// Thin typed client over the wire API. Every error body carries a stable
// machine-readable code which the UI maps to human text.

import type {
  CatalogDoc,
  FeedEntry,
  HealthView,
  ProgressView,
  RequestView,
  SessionView,
  VerdictEntry,
  WaitStats,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
  }
}

export class Client {
  constructor(
    readonly baseUrl: string,
    private token: string,
  ) {}

  private async call<T>(method: string, path: string, body?: unknown): Promise<T> {
    const response = await fetch(this.baseUrl + path, {
      method,
      headers: {
        Authorization: `Bearer ${this.token}`,
        ...(body !== undefined ? { "Content-Type": "application/json" } : {}),
      },
      body: body !== undefined ? JSON.stringify(body) : undefined,
    });
    const text = await response.text();
    let parsed: unknown = null;
    try {
      parsed = text ? JSON.parse(text) : null;
    } catch {
      parsed = null;
    }
    if (!response.ok) {
      const err = (parsed ?? {}) as { code?: string; message?: string };
      throw new ApiError(
        response.status,
        err.code ?? `HTTP${response.status}`,
        err.message ?? response.statusText,
      );
    }
    return parsed as T;
  }

  health(): Promise<HealthView> {
    return this.call("GET", "/health");
  }

  getCatalog(): Promise<CatalogDoc> {
    return this.call("GET", "/catalog");
  }

  getPolicy(): Promise<{ per_attempt_cap: number; attempt_budget: number; per_session_attempt_cap: number }> {
    return this.call("GET", "/policy");
  }

  submitRequest(students: string[], achievements: string[]): Promise<RequestView> {
    return this.call("POST", "/requests", { students, achievements });
  }

  getRequest(id: string): Promise<RequestView> {
    return this.call("GET", `/requests/${encodeURIComponent(id)}`);
  }

  cancelRequest(id: string): Promise<void> {
    return this.call("DELETE", `/requests/${encodeURIComponent(id)}`);
  }

  feed(): Promise<FeedEntry[]> {
    return this.call("GET", "/feed");
  }

  claim(id: string): Promise<RequestView> {
    return this.call("POST", `/requests/${encodeURIComponent(id)}/claim`);
  }

  recordResults(id: string, verdicts: VerdictEntry[]): Promise<RequestView> {
    return this.call("POST", `/requests/${encodeURIComponent(id)}/results`, { verdicts });
  }

  progress(student: string, target?: string): Promise<ProgressView> {
    const query = target ? `?target=${encodeURIComponent(target)}` : "";
    return this.call("GET", `/students/${encodeURIComponent(student)}/progress${query}`);
  }

  statsWaiting(): Promise<WaitStats> {
    return this.call("GET", "/stats/waiting");
  }

  openSession(id: string, opensAt: number, closesAt: number, examiners: string[]): Promise<SessionView> {
    return this.call("POST", "/admin/sessions/open", {
      id,
      opens_at: opensAt,
      closes_at: closesAt,
      examiners,
    });
  }

  closeSession(): Promise<{ cancelled: number }> {
    return this.call("POST", "/admin/sessions/close");
  }

  correction(student: string, achievement: string, direction: "pass" | "revoke", note: string): Promise<void> {
    return this.call("POST", "/admin/corrections", { student, achievement, direction, note });
  }

  uploadCatalog(doc: unknown): Promise<void> {
    return this.call("POST", "/admin/catalog", doc);
  }
}
