/** Thin typed client over the JSON API. The fetch function is injectable
 * so view tests can run against fixture bodies. */

import type {
  Chron,
  FlameNode,
  LinesResponse,
  Roofline,
  SearchResponse,
  SessionManifest,
  SourceResponse,
  SpawnStack,
  Timeline,
  Tree,
} from "./types.js";

export type FetchLike = (url: string) => Promise<{
  ok: boolean;
  status: number;
  json(): Promise<unknown>;
}>;

export class ApiRequestError extends Error {
  constructor(
    readonly status: number,
    readonly errorCode: string,
    message: string,
  ) {
    super(message);
  }
}

export class Client {
  constructor(
    private readonly doFetch: FetchLike,
    private readonly base = "/api/v1",
  ) {}

  private async get<T>(path: string): Promise<T> {
    const resp = await this.doFetch(this.base + path);
    if (!resp.ok) {
      let code = "Error";
      let message = `HTTP ${resp.status}`;
      try {
        const body = (await resp.json()) as { error_code?: string; message?: string };
        code = body.error_code ?? code;
        message = body.message ?? message;
      } catch {
        // non-JSON error body: keep the generic message
      }
      throw new ApiRequestError(resp.status, code, message);
    }
    return (await resp.json()) as T;
  }

  sessions(): Promise<SessionManifest[]> {
    return this.get("/sessions");
  }

  tree(session: string): Promise<Tree> {
    return this.get(`/sessions/${encodeURIComponent(session)}/tree`);
  }

  timeline(session: string, tid: number, bucketNs?: number): Promise<Timeline> {
    const query = bucketNs === undefined ? "" : `?bucket_ns=${bucketNs}`;
    return this.get(
      `/sessions/${encodeURIComponent(session)}/threads/${tid}/timeline${query}`,
    );
  }

  flame(session: string, tid: number, metric: string): Promise<FlameNode> {
    return this.get(
      `/sessions/${encodeURIComponent(session)}/threads/${tid}` +
        `/flame?metric=${encodeURIComponent(metric)}&mode=aggregated`,
    );
  }

  chron(session: string, tid: number): Promise<Chron> {
    return this.get(
      `/sessions/${encodeURIComponent(session)}/threads/${tid}` +
        `/flame?metric=walltime&mode=chronological`,
    );
  }

  search(
    session: string,
    tid: number,
    metric: string,
    pattern: string,
  ): Promise<SearchResponse> {
    return this.get(
      `/sessions/${encodeURIComponent(session)}/threads/${tid}` +
        `/flame/search?metric=${encodeURIComponent(metric)}` +
        `&q=${encodeURIComponent(pattern)}`,
    );
  }

  spawnstack(session: string, tid: number): Promise<SpawnStack> {
    return this.get(
      `/sessions/${encodeURIComponent(session)}/threads/${tid}/spawnstack`,
    );
  }

  lines(
    session: string,
    tid: number,
    metric: string,
    nodePath: string,
  ): Promise<LinesResponse> {
    return this.get(
      `/sessions/${encodeURIComponent(session)}/threads/${tid}` +
        `/lines?metric=${encodeURIComponent(metric)}&node=${encodeURIComponent(nodePath)}`,
    );
  }

  source(session: string, file: string): Promise<SourceResponse> {
    return this.get(
      `/sessions/${encodeURIComponent(session)}/source?file=${encodeURIComponent(file)}`,
    );
  }

  /** null when the bundle has no roofline data (404). */
  async roofline(session: string): Promise<Roofline | null> {
    try {
      return await this.get(`/sessions/${encodeURIComponent(session)}/roofline`);
    } catch (err) {
      if (err instanceof ApiRequestError && err.status === 404) return null;
      throw err;
    }
  }
}

/** Slash-joined percent-encoded function names, the API's node addressing. */
export function encodeNodePath(path: string[]): string {
  return path.map((seg) => encodeURIComponent(seg)).join("/");
}
