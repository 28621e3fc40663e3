"use strict";
/** Thin typed client over the JSON API. The fetch function is injectable
 * so view tests can run against fixture bodies. */
Object.defineProperty(exports, "__esModule", { value: true });
exports.Client = exports.ApiRequestError = void 0;
exports.encodeNodePath = encodeNodePath;
class ApiRequestError extends Error {
    constructor(status, errorCode, message) {
        super(message);
        this.status = status;
        this.errorCode = errorCode;
    }
}
exports.ApiRequestError = ApiRequestError;
class Client {
    constructor(doFetch, base = "/api/v1") {
        this.doFetch = doFetch;
        this.base = base;
    }
    async get(path) {
        const resp = await this.doFetch(this.base + path);
        if (!resp.ok) {
            let code = "Error";
            let message = `HTTP ${resp.status}`;
            try {
                const body = (await resp.json());
                code = body.error_code ?? code;
                message = body.message ?? message;
            }
            catch {
                // non-JSON error body: keep the generic message
            }
            throw new ApiRequestError(resp.status, code, message);
        }
        return (await resp.json());
    }
    sessions() {
        return this.get("/sessions");
    }
    tree(session) {
        return this.get(`/sessions/${encodeURIComponent(session)}/tree`);
    }
    timeline(session, tid, bucketNs) {
        const query = bucketNs === undefined ? "" : `?bucket_ns=${bucketNs}`;
        return this.get(`/sessions/${encodeURIComponent(session)}/threads/${tid}/timeline${query}`);
    }
    flame(session, tid, metric) {
        return this.get(`/sessions/${encodeURIComponent(session)}/threads/${tid}` +
            `/flame?metric=${encodeURIComponent(metric)}&mode=aggregated`);
    }
    chron(session, tid) {
        return this.get(`/sessions/${encodeURIComponent(session)}/threads/${tid}` +
            `/flame?metric=walltime&mode=chronological`);
    }
    search(session, tid, metric, pattern) {
        return this.get(`/sessions/${encodeURIComponent(session)}/threads/${tid}` +
            `/flame/search?metric=${encodeURIComponent(metric)}` +
            `&q=${encodeURIComponent(pattern)}`);
    }
    spawnstack(session, tid) {
        return this.get(`/sessions/${encodeURIComponent(session)}/threads/${tid}/spawnstack`);
    }
    lines(session, tid, metric, nodePath) {
        return this.get(`/sessions/${encodeURIComponent(session)}/threads/${tid}` +
            `/lines?metric=${encodeURIComponent(metric)}&node=${encodeURIComponent(nodePath)}`);
    }
    source(session, file) {
        return this.get(`/sessions/${encodeURIComponent(session)}/source?file=${encodeURIComponent(file)}`);
    }
    /** null when the bundle has no roofline data (404). */
    async roofline(session) {
        try {
            return await this.get(`/sessions/${encodeURIComponent(session)}/roofline`);
        }
        catch (err) {
            if (err instanceof ApiRequestError && err.status === 404)
                return null;
            throw err;
        }
    }
}
exports.Client = Client;
/** Slash-joined percent-encoded function names, the API's node addressing. */
function encodeNodePath(path) {
    return path.map((seg) => encodeURIComponent(seg)).join("/");
}
