/**
 * Typed client for the platform's /api/v1 surface.
 *
 * Every call the console makes goes through here, so the full set of
 * endpoints the UI can touch is exactly the documented list below. Errors
 * carry the server's stable code string.
 */

export interface ParamSpec {
  param_name: string;
  title: string;
  widget: string;
  default: unknown;
  min: number | null;
  max: number | null;
  step: number | null;
  options: unknown[] | null;
  description: string;
}

export interface ContentDocument {
  content_id: string;
  content_type: string;
  name: string;
  version: string;
  owner: string;
  uri: string;
  description: string;
  tags: string[];
  public: boolean;
  service: { command: string[]; port?: number } | null;
  parameters: ParamSpec[];
  workflow_template: unknown;
}

export interface JobRecord {
  job_id: string;
  workflow_id: string;
  name: string;
  state: string;
  started_at: number | null;
  ended_at: number | null;
  parameters: Record<string, unknown>;
  assets: string[];
  log_size: number;
  cancel_requested: boolean;
  workflow_cancel_requested: boolean;
}

export interface AssetRecord {
  asset_id: string;
  owner: string;
  kind: string;
  uri: string;
  metadata: Record<string, unknown>;
  source_job_id: string | null;
}

export interface SearchResult {
  content_id: string;
  score: number;
  name: string;
  content_type: string;
}

export class ApiError extends Error {
  code: string;
  status: number;

  constructor(code: string, message: string, status: number) {
    super(message);
    this.code = code;
    this.status = status;
  }
}

type Fetcher = typeof fetch;

export class ApiClient {
  base: string;
  token: string | null = null;
  private fetcher: Fetcher;

  constructor(base: string, fetcher: Fetcher = fetch.bind(globalThis)) {
    this.base = base.replace(/\/$/, "");
    this.fetcher = fetcher;
  }

  private async request(
    method: string,
    path: string,
    body?: unknown,
    params?: Record<string, string>,
  ): Promise<Response> {
    let url = this.base + path;
    if (params) {
      const qs = new URLSearchParams(params).toString();
      if (qs) url += "?" + qs;
    }
    const headers: Record<string, string> = {};
    if (this.token) headers["Authorization"] = `Bearer ${this.token}`;
    if (body !== undefined) headers["Content-Type"] = "application/json";
    const response = await this.fetcher(url, {
      method,
      headers,
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (!response.ok) {
      let code = "HttpError";
      let message = `HTTP ${response.status}`;
      try {
        const payload = (await response.json()) as { error?: { code: string; message: string } };
        if (payload.error) {
          code = payload.error.code;
          message = payload.error.message;
        }
      } catch {
        /* non-JSON error body; keep the generic message */
      }
      throw new ApiError(code, message, response.status);
    }
    return response;
  }

  private async json<T>(response: Promise<Response>): Promise<T> {
    return (await response).json() as Promise<T>;
  }

  async login(username: string, password: string): Promise<{ token: string; user: unknown }> {
    const data = await this.json<{ token: string; user: unknown }>(
      this.request("POST", "/auth/login", { username, password }),
    );
    this.token = data.token;
    return data;
  }

  whoami(): Promise<{ node_id: string; attributes: Record<string, unknown> }> {
    return this.json(this.request("GET", "/whoami"));
  }

  async listContents(type?: string): Promise<ContentDocument[]> {
    const params: Record<string, string> = {};
    if (type) params["type"] = type;
    const data = await this.json<{ contents: ContentDocument[] }>(
      this.request("GET", "/contents", undefined, params),
    );
    return data.contents;
  }

  getContent(contentId: string): Promise<ContentDocument> {
    return this.json(this.request("GET", `/contents/${contentId}`));
  }

  async registerContent(doc: unknown): Promise<string> {
    const data = await this.json<{ content_id: string }>(
      this.request("POST", "/contents", doc),
    );
    return data.content_id;
  }

  async deleteContent(contentId: string): Promise<void> {
    await this.request("DELETE", `/contents/${contentId}`);
  }

  async search(query: string, type?: string): Promise<SearchResult[]> {
    const params: Record<string, string> = { q: query };
    if (type) params["type"] = type;
    const data = await this.json<{ results: SearchResult[] }>(
      this.request("GET", "/contents/search", undefined, params),
    );
    return data.results;
  }

  async launch(contentId: string, runnerKind = "process"): Promise<string> {
    const data = await this.json<{ workflow_id: string }>(
      this.request("POST", `/contents/${contentId}/launch`, { runner_kind: runnerKind }),
    );
    return data.workflow_id;
  }

  async submitWorkflow(body: unknown): Promise<string> {
    const data = await this.json<{ workflow_id: string }>(
      this.request("POST", "/workflows", body),
    );
    return data.workflow_id;
  }

  getWorkflow(workflowId: string): Promise<Record<string, unknown>> {
    return this.json(this.request("GET", `/workflows/${workflowId}`));
  }

  async cancelWorkflow(workflowId: string): Promise<void> {
    await this.request("POST", `/workflows/${workflowId}/cancel`);
  }

  async listJobs(workflowId?: string, state?: string): Promise<JobRecord[]> {
    const params: Record<string, string> = {};
    if (workflowId) params["workflow"] = workflowId;
    if (state) params["state"] = state;
    const data = await this.json<{ jobs: JobRecord[] }>(
      this.request("GET", "/jobs", undefined, params),
    );
    return data.jobs;
  }

  async getLogs(jobId: string, from: number): Promise<string> {
    const response = await this.request("GET", `/jobs/${jobId}/logs`, undefined, {
      from: String(from),
    });
    return response.text();
  }

  async listAssets(): Promise<AssetRecord[]> {
    const data = await this.json<{ assets: AssetRecord[] }>(this.request("GET", "/assets"));
    return data.assets;
  }
}

/** Read the deployment's bootstrap file; falls back to /api/v1 in dev. */
export async function bootstrapApiBase(fetcher: Fetcher = fetch.bind(globalThis)): Promise<string> {
  try {
    const response = await fetcher("./bootstrap.json");
    if (response.ok) {
      const config = (await response.json()) as { api_base?: string };
      if (config.api_base) return config.api_base;
    }
  } catch {
    /* fall through to the default */
  }
  return "/api/v1";
}
