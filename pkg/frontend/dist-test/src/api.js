/** Thin typed client for the exploration service endpoints. */
export class ApiError extends Error {
    constructor(kind, message, status = null, prerequisites = []) {
        super(message);
        this.kind = kind;
        this.status = status;
        this.prerequisites = prerequisites;
    }
}
export class ServiceClient {
    constructor(base, fetchImpl) {
        this.base = base.replace(/\/$/, "");
        this.fetchImpl = fetchImpl ?? ((url, init) => fetch(url, init));
    }
    async request(path, init) {
        let response;
        try {
            response = await this.fetchImpl(this.base + path, init);
        }
        catch (err) {
            throw new ApiError("unreachable", `service unreachable: ${err}`);
        }
        let body = null;
        try {
            body = await response.json();
        }
        catch {
            // non-JSON error bodies fall through to the generic branches below
        }
        if (response.ok) {
            return body;
        }
        const doc = (body ?? {});
        const message = doc.message ?? `HTTP ${response.status}`;
        if (response.status === 404) {
            throw new ApiError("target-not-found", message, 404);
        }
        if (response.status === 409 && Array.isArray(doc.prerequisites)) {
            throw new ApiError("dependency", message, 409, doc.prerequisites);
        }
        throw new ApiError("http", message, response.status);
    }
    network() {
        return this.request("/api/network");
    }
    stats() {
        return this.request("/api/stats");
    }
    expand(target) {
        return this.request("/api/expand", {
            method: "POST",
            headers: { "Content-Type": "application/json" },
            body: JSON.stringify({ target }),
        });
    }
    undo() {
        return this.request("/api/undo", {
            method: "POST",
            headers: { "Content-Type": "application/json" },
            body: "{}",
        });
    }
}
