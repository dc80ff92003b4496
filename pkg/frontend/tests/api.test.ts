import { describe, expect, it } from "vitest";

import { ApiClient, ApiError, bootstrapApiBase } from "../src/api.js";

interface Call {
  method: string;
  url: string;
  headers: Record<string, string>;
  body: string | undefined;
}

function recordingFetcher(status = 200, payload: unknown = {}) {
  const calls: Call[] = [];
  const fetcher = (async (input: RequestInfo | URL, init?: RequestInit) => {
    calls.push({
      method: init?.method ?? "GET",
      url: String(input),
      headers: (init?.headers as Record<string, string>) ?? {},
      body: init?.body as string | undefined,
    });
    return new Response(JSON.stringify(payload), {
      status,
      headers: { "Content-Type": "application/json" },
    });
  }) as typeof fetch;
  return { calls, fetcher };
}

const DOCUMENTED = [
  /^\/auth\/login$/,
  /^\/users$/,
  /^\/whoami$/,
  /^\/teams(\/[^/]+\/members(\/[^/]+)?)?$/,
  /^\/grants$/,
  /^\/access$/,
  /^\/hosts(\/[^/]+\/poll)?$/,
  /^\/workflows(\/[^/]+(\/cancel)?)?$/,
  /^\/jobs(\/[^/]+(\/logs|\/status)?)?$/,
  /^\/workers\/[^/]+\/(next|done)$/,
  /^\/contents(\/search|\/[^/]+(\/launch)?)?$/,
  /^\/assets(\/[^/]+)?$/,
];

describe("ApiClient", () => {
  it("talks only to documented endpoints", async () => {
    const { calls, fetcher } = recordingFetcher(200, {
      token: "t",
      user: {},
      contents: [],
      results: [],
      jobs: [],
      assets: [],
      workflow_id: "wf-1",
      content_id: "c-1",
    });
    const api = new ApiClient("http://x/api/v1", fetcher);
    await api.login("u", "p");
    await api.whoami();
    await api.listContents("model");
    await api.getContent("c-1");
    await api.registerContent({});
    await api.deleteContent("c-1");
    await api.search("q", "model");
    await api.launch("c-1");
    await api.submitWorkflow({});
    await api.getWorkflow("wf-1");
    await api.cancelWorkflow("wf-1");
    await api.listJobs("wf-1", "RUNNING");
    await api.getLogs("j-1", 10);
    await api.listAssets();
    for (const call of calls) {
      const path = new URL(call.url).pathname.replace(/^\/api\/v1/, "");
      expect(
        DOCUMENTED.some((pattern) => pattern.test(path)),
        `undocumented endpoint: ${path}`,
      ).toBe(true);
    }
  });

  it("sends the bearer token once logged in", async () => {
    const { calls, fetcher } = recordingFetcher(200, { token: "tok-1", user: {}, jobs: [] });
    const api = new ApiClient("http://x/api/v1", fetcher);
    await api.login("u", "p");
    await api.listJobs();
    expect(calls[1]!.headers["Authorization"]).toBe("Bearer tok-1");
  });

  it("passes query parameters through", async () => {
    const { calls, fetcher } = recordingFetcher(200, { jobs: [] });
    const api = new ApiClient("http://x/api/v1", fetcher);
    await api.listJobs("wf-9", "QUEUED");
    expect(calls[0]!.url).toContain("workflow=wf-9");
    expect(calls[0]!.url).toContain("state=QUEUED");
  });

  it("rebuilds typed errors from the wire shape", async () => {
    const { fetcher } = recordingFetcher(403, {
      error: { code: "AccessDenied", message: "nope" },
    });
    const api = new ApiClient("http://x/api/v1", fetcher);
    const err = await api.listJobs().catch((e: unknown) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect((err as ApiError).code).toBe("AccessDenied");
    expect((err as ApiError).status).toBe(403);
  });
});

describe("bootstrapApiBase", () => {
  it("reads api_base from bootstrap.json", async () => {
    const fetcher = (async () =>
      new Response(JSON.stringify({ api_base: "/api/v1" }), { status: 200 })) as typeof fetch;
    expect(await bootstrapApiBase(fetcher)).toBe("/api/v1");
  });

  it("falls back when the file is missing", async () => {
    const fetcher = (async () => new Response("nope", { status: 404 })) as typeof fetch;
    expect(await bootstrapApiBase(fetcher)).toBe("/api/v1");
  });
});
