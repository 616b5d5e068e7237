// Thin typed client over the wire API. Every error body carries a stable
// machine-readable code which the UI maps to human text.
export class ApiError extends Error {
    status;
    code;
    constructor(status, code, message) {
        super(message);
        this.status = status;
        this.code = code;
    }
}
export class Client {
    baseUrl;
    token;
    constructor(baseUrl, token) {
        this.baseUrl = baseUrl;
        this.token = token;
    }
    async call(method, path, body) {
        const response = await fetch(this.baseUrl + path, {
            method,
            headers: {
                Authorization: `Bearer ${this.token}`,
                ...(body !== undefined ? { "Content-Type": "application/json" } : {}),
            },
            body: body !== undefined ? JSON.stringify(body) : undefined,
        });
        const text = await response.text();
        let parsed = null;
        try {
            parsed = text ? JSON.parse(text) : null;
        }
        catch {
            parsed = null;
        }
        if (!response.ok) {
            const err = (parsed ?? {});
            throw new ApiError(response.status, err.code ?? `HTTP${response.status}`, err.message ?? response.statusText);
        }
        return parsed;
    }
    health() {
        return this.call("GET", "/health");
    }
    getCatalog() {
        return this.call("GET", "/catalog");
    }
    getPolicy() {
        return this.call("GET", "/policy");
    }
    submitRequest(students, achievements) {
        return this.call("POST", "/requests", { students, achievements });
    }
    getRequest(id) {
        return this.call("GET", `/requests/${encodeURIComponent(id)}`);
    }
    cancelRequest(id) {
        return this.call("DELETE", `/requests/${encodeURIComponent(id)}`);
    }
    feed() {
        return this.call("GET", "/feed");
    }
    claim(id) {
        return this.call("POST", `/requests/${encodeURIComponent(id)}/claim`);
    }
    recordResults(id, verdicts) {
        return this.call("POST", `/requests/${encodeURIComponent(id)}/results`, { verdicts });
    }
    progress(student, target) {
        const query = target ? `?target=${encodeURIComponent(target)}` : "";
        return this.call("GET", `/students/${encodeURIComponent(student)}/progress${query}`);
    }
    statsWaiting() {
        return this.call("GET", "/stats/waiting");
    }
    openSession(id, opensAt, closesAt, examiners) {
        return this.call("POST", "/admin/sessions/open", {
            id,
            opens_at: opensAt,
            closes_at: closesAt,
            examiners,
        });
    }
    closeSession() {
        return this.call("POST", "/admin/sessions/close");
    }
    correction(student, achievement, direction, note) {
        return this.call("POST", "/admin/corrections", { student, achievement, direction, note });
    }
    uploadCatalog(doc) {
        return this.call("POST", "/admin/catalog", doc);
    }
}
//# sourceMappingURL=api.js.map