/**
 * Console shell: login, then three live panels — contents (browse,
 * search, register, launch, delete), compose (schema-driven parameter
 * form with TRAIN/TEST submission), and jobs (polling table with log
 * tail and cancel). All data flows through the typed ApiClient; the job
 * table and log panel poll every 2 seconds.
 */

import { ApiClient, ApiError, bootstrapApiBase } from "./api.js";
import type { AssetRecord, ContentDocument, JobRecord } from "./api.js";
import { clear, el, fmtStamp } from "./dom.js";
import { buildForm, parseRawValue, setValue, workflowBody } from "./form.js";
import type { FormModel } from "./form.js";
import {
  POLL_INTERVAL_MS,
  appendLog,
  applyPoll,
  applyPollFailure,
  describeParameters,
  initialJobsState,
  initialLogState,
  sortRows,
} from "./jobs.js";
import type { JobsState, LogState } from "./jobs.js";

interface AppState {
  api: ApiClient;
  user: string | null;
  contents: ContentDocument[];
  selectedDoc: ContentDocument | null;
  form: FormModel | null;
  assets: AssetRecord[];
  selectedAssetUri: string | null;
  jobs: JobsState;
  jobsFilter: string | null; // workflow id
  selectedJob: string | null;
  log: LogState;
  banner: string | null;
  composeError: string | null;
}

export async function startApp(root: HTMLElement, apiBase?: string): Promise<AppState> {
  const base = apiBase ?? (await bootstrapApiBase());
  const api = new ApiClient(base);
  const state: AppState = {
    api,
    user: null,
    contents: [],
    selectedDoc: null,
    form: null,
    assets: [],
    selectedAssetUri: null,
    jobs: initialJobsState(),
    jobsFilter: null,
    selectedJob: null,
    log: initialLogState(),
    banner: null,
    composeError: null,
  };

  const saved = sessionStorage.getItem("flowdesk-token");
  if (saved) {
    api.token = saved;
    try {
      const me = await api.whoami();
      state.user = me.node_id;
    } catch {
      api.token = null;
      sessionStorage.removeItem("flowdesk-token");
    }
  }

  render(root, state);
  if (state.user) {
    await refreshContents(root, state);
  }

  window.setInterval(() => {
    if (state.user) void pollJobs(root, state);
  }, POLL_INTERVAL_MS);
  window.setInterval(() => {
    if (state.user && state.selectedJob) void pollLog(root, state);
  }, POLL_INTERVAL_MS);

  return state;
}

// -- data refreshers ---------------------------------------------------------

async function refreshContents(root: HTMLElement, state: AppState): Promise<void> {
  try {
    state.contents = await state.api.listContents();
    state.assets = await state.api.listAssets();
    state.banner = null;
  } catch (error) {
    state.banner = `cannot load contents: ${describeError(error)}`;
  }
  render(root, state);
}

async function pollJobs(root: HTMLElement, state: AppState): Promise<void> {
  try {
    const jobs = await state.api.listJobs(state.jobsFilter ?? undefined);
    state.jobs = applyPoll(state.jobs, jobs, Date.now());
    state.assets = await state.api.listAssets(); // keep the TEST asset picker fresh
    if (state.banner?.startsWith("API unreachable")) state.banner = null;
  } catch (error) {
    state.jobs = applyPollFailure(state.jobs, describeError(error), Date.now());
    state.banner = `API unreachable — retrying (${describeError(error)})`;
  }
  render(root, state);
}

async function pollLog(root: HTMLElement, state: AppState): Promise<void> {
  if (!state.selectedJob) return;
  try {
    const suffix = await state.api.getLogs(state.selectedJob, state.log.offset);
    const bytes = new TextEncoder().encode(suffix).length;
    state.log = appendLog(state.log, suffix, bytes);
    render(root, state);
  } catch {
    /* surfaced by the jobs poll banner */
  }
}

function describeError(error: unknown): string {
  if (error instanceof ApiError) return `${error.code}: ${error.message}`;
  return String(error);
}

// -- rendering ----------------------------------------------------------------

export function render(root: HTMLElement, state: AppState): void {
  clear(root);
  if (!state.user) {
    root.append(loginView(root, state));
    return;
  }
  root.append(
    el("header", { class: "topbar" }, [
      el("strong", {}, ["flowdesk console"]),
      el("span", { class: "who" }, [`signed in as ${state.user}`]),
      el("button", {
        class: "linkish",
        onclick: () => {
          state.user = null;
          state.api.token = null;
          sessionStorage.removeItem("flowdesk-token");
          render(root, state);
        },
      }, ["log out"]),
    ]),
  );
  if (state.banner) {
    root.append(el("div", { class: "banner", role: "alert" }, [state.banner]));
  }
  const main = el("main", { class: "panels" });
  main.append(contentsPanel(root, state), composePanel(root, state), jobsPanel(root, state));
  root.append(main);
}

function loginView(root: HTMLElement, state: AppState): HTMLElement {
  const username = el("input", { name: "username", placeholder: "username" });
  const password = el("input", { name: "password", type: "password", placeholder: "password" });
  const error = el("div", { class: "error", "data-role": "login-error" });
  return el("section", { class: "login" }, [
    el("h1", {}, ["flowdesk"]),
    username,
    password,
    el("button", {
      "data-role": "login",
      onclick: () => {
        void (async () => {
          try {
            await state.api.login(username.value, password.value);
            sessionStorage.setItem("flowdesk-token", state.api.token ?? "");
            const me = await state.api.whoami();
            state.user = me.node_id;
            render(root, state);
            await refreshContents(root, state);
            await pollJobs(root, state);
          } catch (err) {
            error.textContent = describeError(err);
          }
        })();
      },
    }, ["log in"]),
    error,
  ]);
}

// -- contents panel -------------------------------------------------------------

function contentsPanel(root: HTMLElement, state: AppState): HTMLElement {
  const listing = el("div", { "data-role": "content-list" });
  const typeFilter = el("select", { "data-role": "type-filter" }, [
    el("option", { value: "" }, ["all types"]),
    ...["model", "app", "workflow", "asset"].map((t) => el("option", { value: t }, [t])),
  ]);
  const searchBox = el("input", { placeholder: "search tokens", "data-role": "search" });
  const renderList = (docs: ContentDocument[]) => {
    clear(listing);
    for (const doc of docs) {
      listing.append(contentRow(root, state, doc));
    }
    if (!docs.length) listing.append(el("p", { class: "muted" }, ["no contents"]));
  };

  const applyFilters = async () => {
    const type = typeFilter.value || undefined;
    const query = searchBox.value.trim();
    try {
      if (query) {
        const hits = await state.api.search(query, type);
        const byId = new Map(state.contents.map((d) => [d.content_id, d]));
        renderList(hits.map((h) => byId.get(h.content_id)).filter((d): d is ContentDocument => !!d));
      } else {
        renderList(type ? state.contents.filter((d) => d.content_type === type) : state.contents);
      }
    } catch (error) {
      state.banner = describeError(error);
      render(root, state);
    }
  };
  typeFilter.addEventListener("change", () => void applyFilters());
  searchBox.addEventListener("input", () => void applyFilters());
  renderList(state.contents);

  return el("section", { class: "panel", "data-panel": "contents" }, [
    el("h2", {}, ["contents"]),
    el("div", { class: "controls" }, [typeFilter, searchBox]),
    listing,
    registerBox(root, state),
  ]);
}

function contentRow(root: HTMLElement, state: AppState, doc: ContentDocument): HTMLElement {
  const actions: HTMLElement[] = [];
  if (doc.content_type === "app" && doc.service) {
    actions.push(
      el("button", {
        onclick: () => {
          void (async () => {
            try {
              const workflowId = await state.api.launch(doc.content_id);
              state.jobsFilter = workflowId;
              await pollJobs(root, state);
            } catch (error) {
              state.banner = describeError(error);
              render(root, state);
            }
          })();
        },
      }, ["launch"]),
    );
  }
  actions.push(
    el("button", {
      onclick: () => {
        void (async () => {
          try {
            await state.api.deleteContent(doc.content_id);
            await refreshContents(root, state);
          } catch (error) {
            state.banner = describeError(error);
            render(root, state);
          }
        })();
      },
    }, ["delete"]),
  );
  return el("div", { class: "content-row", "data-content": doc.content_id }, [
    el("span", { class: "content-name" }, [doc.name]),
    el("span", { class: "muted" }, [` ${doc.content_type} v${doc.version}`]),
    el("span", { class: "actions" }, actions),
  ]);
}

function registerBox(root: HTMLElement, state: AppState): HTMLElement {
  const name = el("input", { placeholder: "name" });
  const type = el("select", {}, [
    ...["model", "app", "workflow"].map((t) => el("option", { value: t }, [t])),
  ]);
  const version = el("input", { placeholder: "version", value: "1.0" });
  const uri = el("input", { placeholder: "uri (pointer to the content)" });
  const description = el("input", { placeholder: "description" });
  const publicBox = el("input", { type: "checkbox" });
  const rawJson = el("textarea", {
    placeholder: "…or paste a full content document (JSON)",
    "data-role": "raw-doc",
  });
  const status = el("div", { class: "error", "data-role": "register-error" });

  const submit = async (doc: unknown) => {
    try {
      await state.api.registerContent(doc);
      status.textContent = "";
      await refreshContents(root, state);
    } catch (error) {
      status.textContent = describeError(error);
    }
  };

  return el("details", { class: "register" }, [
    el("summary", {}, ["register content"]),
    el("div", { class: "register-form" }, [
      name, type, version, uri, description,
      el("label", {}, [publicBox, " public"]),
      el("button", {
        "data-role": "register-form",
        onclick: () => {
          void submit({
            content_type: type.value,
            name: name.value,
            version: version.value,
            uri: uri.value,
            description: description.value,
            tags: [],
            public: publicBox.checked,
            service: null,
            parameters: [],
            workflow_template: null,
          });
        },
      }, ["register"]),
    ]),
    rawJson,
    el("button", {
      "data-role": "register-json",
      onclick: () => {
        try {
          void submit(JSON.parse(rawJson.value));
        } catch (error) {
          status.textContent = `invalid JSON: ${String(error)}`;
        }
      },
    }, ["upload document"]),
    status,
  ]);
}

// -- compose panel -----------------------------------------------------------------

function composePanel(root: HTMLElement, state: AppState): HTMLElement {
  const models = state.contents.filter((d) => d.parameters.length > 0);
  const picker = el("select", { "data-role": "model-picker" }, [
    el("option", { value: "" }, ["choose a model"]),
    ...models.map((d) =>
      el("option", { value: d.content_id, ...(state.selectedDoc?.content_id === d.content_id ? { selected: "" } : {}) }, [
        `${d.name} v${d.version}`,
      ]),
    ),
  ]);
  picker.addEventListener("change", () => {
    const doc = models.find((d) => d.content_id === picker.value) ?? null;
    selectDocument(state, doc);
    render(root, state);
  });

  const body: (Node | string)[] = [el("h2", {}, ["compose"]), picker];
  if (state.form && state.selectedDoc) {
    const formBox = el("div", { class: "form", "data-role": "param-form" });
    for (const field of state.form.fields) {
      formBox.append(fieldWidget(root, state, field.spec.param_name));
    }
    body.push(formBox);
    if (state.composeError) {
      body.push(el("div", { class: "error", "data-role": "compose-error" }, [state.composeError]));
    }
    body.push(assetPicker(state));
    body.push(
      el("div", { class: "controls" }, [
        submitButton(root, state, "TRAIN"),
        submitButton(root, state, "TEST"),
      ]),
    );
  } else {
    body.push(el("p", { class: "muted" }, ["pick a model to generate its parameter form"]));
  }
  return el("section", { class: "panel", "data-panel": "compose" }, body);
}

export function selectDocument(state: AppState, doc: ContentDocument | null): void {
  state.selectedDoc = doc;
  state.form = doc ? buildForm(doc) : null;
  state.composeError = null;
}

function assetPicker(state: AppState): HTMLElement {
  const trained = state.assets.filter((a) => a.kind === "trained-model");
  const picker = el("select", { "data-role": "asset-picker" }, [
    el("option", { value: "" }, ["trained model for TEST (optional)"]),
    ...trained.map((a) =>
      el("option", { value: a.uri, ...(state.selectedAssetUri === a.uri ? { selected: "" } : {}) }, [
        `${a.asset_id} ${a.uri}`,
      ]),
    ),
  ]);
  picker.addEventListener("change", () => {
    state.selectedAssetUri = picker.value || null;
  });
  return picker;
}

function submitButton(root: HTMLElement, state: AppState, action: "TRAIN" | "TEST"): HTMLElement {
  const disabled = !state.form || !state.form.valid;
  return el("button", {
    "data-role": `submit-${action.toLowerCase()}`,
    ...(disabled ? { disabled: true } : {}),
    onclick: () => {
      if (!state.form || !state.form.valid) return;
      const extra: Record<string, unknown> = {};
      if (action === "TEST" && state.selectedAssetUri) {
        extra["model_uri"] = state.selectedAssetUri;
      }
      const body = workflowBody(state.form, action, { extraParameters: extra });
      void (async () => {
        try {
          const workflowId = await state.api.submitWorkflow(body);
          state.composeError = null;
          state.jobsFilter = workflowId; // navigate the table to this workflow
          await pollJobs(root, state);
        } catch (error) {
          applyServerRejection(state, error);
          render(root, state);
        }
      })();
    },
  }, [action]);
}

/** Attach a server rejection to the field it names, else to the banner. */
export function applyServerRejection(state: AppState, error: unknown): void {
  const message = describeError(error);
  if (state.form) {
    for (const field of state.form.fields) {
      if (message.includes(field.spec.param_name)) {
        state.form = {
          ...state.form,
          fields: state.form.fields.map((f) =>
            f.spec.param_name === field.spec.param_name ? { ...f, error: message } : f,
          ),
        };
        state.composeError = null;
        return;
      }
    }
  }
  state.composeError = message;
}

function fieldWidget(root: HTMLElement, state: AppState, paramName: string): HTMLElement {
  const form = state.form;
  if (!form) return el("div");
  const field = form.fields.find((f) => f.spec.param_name === paramName);
  if (!field) return el("div");
  const spec = field.spec;

  const update = (raw: string | boolean) => {
    if (!state.form) return;
    state.form = setValue(state.form, paramName, parseRawValue(spec, raw));
    render(root, state);
  };

  let control: HTMLElement;
  if (!field.supported) {
    control = el("div", { class: "error" }, [`unsupported widget kind: ${spec.widget}`]);
  } else if (spec.widget === "int_slider" || spec.widget === "float_slider") {
    const slider = el("input", {
      type: "range",
      name: spec.param_name,
      min: String(spec.min ?? 0),
      max: String(spec.max ?? 100),
      step: String(spec.step ?? (spec.widget === "int_slider" ? 1 : 0.001)),
      value: String(field.value),
      oninput: (event) => update((event.target as HTMLInputElement).value),
    });
    control = el("span", { class: "slider" }, [slider, el("code", {}, [String(field.value)])]);
  } else if (spec.widget === "dropdown") {
    control = el("select", {
      name: spec.param_name,
      onchange: (event) => update((event.target as HTMLSelectElement).value),
    }, (spec.options ?? []).map((option) =>
      el("option", { value: String(option), ...(option === field.value ? { selected: "" } : {}) }, [String(option)]),
    ));
  } else if (spec.widget === "radio") {
    control = el("span", { class: "radio-group" }, (spec.options ?? []).map((option) =>
      el("label", {}, [
        el("input", {
          type: "radio",
          name: spec.param_name,
          value: String(option),
          ...(option === field.value ? { checked: true } : {}),
          onchange: () => update(String(option)),
        }),
        String(option),
      ]),
    ));
  } else if (spec.widget === "checkbox") {
    control = el("input", {
      type: "checkbox",
      name: spec.param_name,
      ...(field.value ? { checked: true } : {}),
      onchange: (event) => update((event.target as HTMLInputElement).checked),
    });
  } else if (spec.widget === "number") {
    control = el("input", {
      type: "number",
      name: spec.param_name,
      value: String(field.value),
      ...(spec.min !== null ? { min: String(spec.min) } : {}),
      ...(spec.max !== null ? { max: String(spec.max) } : {}),
      ...(spec.step !== null ? { step: String(spec.step) } : {}),
      oninput: (event) => update((event.target as HTMLInputElement).value),
    });
  } else {
    control = el("input", {
      type: "text",
      name: spec.param_name,
      value: String(field.value),
      oninput: (event) => update((event.target as HTMLInputElement).value),
    });
  }

  return el("div", { class: "field", "data-field": spec.param_name }, [
    el("label", {}, [spec.title || spec.param_name]),
    control,
    el("small", { class: "muted" }, [spec.description]),
    el("div", { class: "error", "data-role": "field-error" }, [field.error ?? ""]),
  ]);
}

// -- jobs panel -----------------------------------------------------------------------

function jobsPanel(root: HTMLElement, state: AppState): HTMLElement {
  const filterBox = el("input", {
    placeholder: "filter by workflow id",
    value: state.jobsFilter ?? "",
    "data-role": "workflow-filter",
    onchange: (event) => {
      state.jobsFilter = (event.target as HTMLInputElement).value.trim() || null;
      void pollJobs(root, state);
    },
  });

  const table = el("table", { class: "jobs", "data-role": "job-table" }, [
    el("thead", {}, [
      el("tr", {}, ["job", "state", "started", "ended", "parameters", ""].map((h) => el("th", {}, [h]))),
    ]),
  ]);
  const tbody = el("tbody");
  const descriptions: Record<string, string> = {};
  for (const doc of state.contents) {
    for (const param of doc.parameters) descriptions[param.param_name] = param.description;
  }
  for (const job of sortRows(state.jobs.rows)) {
    tbody.append(jobRow(root, state, job, descriptions));
  }
  table.append(tbody);

  const body: (Node | string)[] = [
    el("h2", {}, [
      "jobs",
      ...(state.jobs.stale ? [el("span", { class: "stale", "data-role": "stale" }, [" (stale)"])] : []),
    ]),
    filterBox,
    table,
  ];
  if (state.selectedJob) {
    body.push(
      el("h3", {}, [`log: ${state.selectedJob}`]),
      el("pre", { class: "log", "data-role": "log-panel" }, [state.log.text]),
    );
  }
  return el("section", { class: "panel", "data-panel": "jobs" }, body);
}

function jobRow(
  root: HTMLElement,
  state: AppState,
  job: JobRecord,
  descriptions: Record<string, string>,
): HTMLElement {
  const params = describeParameters(job.parameters, descriptions)
    .map((p) => (p.description ? `${p.name}=${p.value} (${p.description})` : `${p.name}=${p.value}`))
    .join(", ");
  const cancelable = job.state === "QUEUED" || job.state === "RUNNING";
  return el("tr", { "data-job": job.job_id, "data-state": job.state }, [
    el("td", {}, [
      el("a", {
        href: "#",
        onclick: (event) => {
          event.preventDefault();
          state.selectedJob = job.job_id;
          state.log = initialLogState();
          void pollLog(root, state);
        },
      }, [job.name || job.job_id]),
    ]),
    el("td", { class: `state-${job.state}` }, [job.state]),
    el("td", {}, [fmtStamp(job.started_at)]),
    el("td", {}, [fmtStamp(job.ended_at)]),
    el("td", { class: "params" }, [params]),
    el("td", {}, cancelable
      ? [
          el("button", {
            "data-role": "cancel",
            onclick: () => {
              void (async () => {
                try {
                  await state.api.cancelWorkflow(job.workflow_id);
                  await pollJobs(root, state);
                } catch (error) {
                  state.banner = describeError(error);
                  render(root, state);
                }
              })();
            },
          }, ["cancel"]),
        ]
      : []),
  ]);
}

declare global {
  interface Window {
    flowdeskStart?: typeof startApp;
  }
}

if (typeof window !== "undefined") {
  window.flowdeskStart = startApp;
  const root = document.getElementById("app");
  if (root) void startApp(root);
}
