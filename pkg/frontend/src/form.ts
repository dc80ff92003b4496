/**
 * Form model: a pure projection of a content document's parameter schema
 * into widget state. Building twice from the same document yields the same
 * model; switching documents is just building from the other one. Values
 * are validated against each widget's constraints and submission stays
 * disabled while anything is invalid.
 */

import type { ContentDocument, ParamSpec } from "./api.js";

export const SUPPORTED_WIDGETS = [
  "int_slider",
  "float_slider",
  "dropdown",
  "radio",
  "checkbox",
  "text",
  "number",
] as const;

export interface FormField {
  spec: ParamSpec;
  value: unknown;
  error: string | null;
  supported: boolean;
}

export interface FormModel {
  contentId: string;
  contentName: string;
  fields: FormField[];
  valid: boolean;
}

export function validateValue(spec: ParamSpec, value: unknown): string | null {
  switch (spec.widget) {
    case "int_slider":
      if (typeof value !== "number" || !Number.isInteger(value)) return "must be an integer";
      return checkBounds(spec, value);
    case "float_slider":
    case "number":
      if (typeof value !== "number" || Number.isNaN(value)) return "must be a number";
      return checkBounds(spec, value);
    case "dropdown":
    case "radio":
      if (!spec.options || !spec.options.some((option) => option === value)) {
        return "must be one of the listed options";
      }
      return null;
    case "checkbox":
      return typeof value === "boolean" ? null : "must be a boolean";
    case "text":
      return typeof value === "string" ? null : "must be text";
    default:
      return `unsupported widget kind: ${spec.widget}`;
  }
}

function checkBounds(spec: ParamSpec, value: number): string | null {
  if (spec.min !== null && spec.min !== undefined && value < spec.min) {
    return `must be at least ${spec.min}`;
  }
  if (spec.max !== null && spec.max !== undefined && value > spec.max) {
    return `must be at most ${spec.max}`;
  }
  return null;
}

/** Build the widget tree for a document, every field at its default. */
export function buildForm(doc: ContentDocument): FormModel {
  const fields: FormField[] = doc.parameters.map((spec) => {
    const supported = (SUPPORTED_WIDGETS as readonly string[]).includes(spec.widget);
    return {
      spec,
      value: spec.default,
      error: supported ? validateValue(spec, spec.default) : `unsupported widget kind: ${spec.widget}`,
      supported,
    };
  });
  return withValidity({ contentId: doc.content_id, contentName: doc.name, fields, valid: false });
}

/** Parse a widget's raw DOM string into the typed value the schema expects. */
export function parseRawValue(spec: ParamSpec, raw: string | boolean): unknown {
  if (spec.widget === "checkbox") return Boolean(raw);
  if (typeof raw === "boolean") return raw;
  if (spec.widget === "int_slider") {
    const parsed = Number.parseInt(raw, 10);
    return Number.isNaN(parsed) ? raw : parsed;
  }
  if (spec.widget === "float_slider" || spec.widget === "number") {
    if (raw.trim() === "") return raw;
    const parsed = Number(raw);
    return Number.isNaN(parsed) ? raw : parsed;
  }
  return raw;
}

/** Immutable value update; revalidates the touched field only. */
export function setValue(form: FormModel, paramName: string, value: unknown): FormModel {
  const fields = form.fields.map((field) => {
    if (field.spec.param_name !== paramName) return field;
    return {
      ...field,
      value,
      error: field.supported ? validateValue(field.spec, value) : field.error,
    };
  });
  return withValidity({ ...form, fields });
}

function withValidity(form: FormModel): FormModel {
  // Unsupported widgets render an inline error but do not gate submission;
  // their values are never submitted.
  const valid = form.fields.every((field) => !field.supported || field.error === null);
  return { ...form, valid };
}

/** Values ready to submit: supported fields only. */
export function formValues(form: FormModel): Record<string, unknown> {
  const values: Record<string, unknown> = {};
  for (const field of form.fields) {
    if (field.supported) values[field.spec.param_name] = field.value;
  }
  return values;
}

/**
 * The single-job workflow a TRAIN/TEST submission posts: the form values
 * ride along as the job's parameters (the hyperparameter record).
 */
export function workflowBody(
  form: FormModel,
  action: "TRAIN" | "TEST",
  options: { runnerKind?: string; command?: string[]; extraParameters?: Record<string, unknown> } = {},
): Record<string, unknown> {
  const parameters: Record<string, unknown> = {
    action,
    ...formValues(form),
    ...(options.extraParameters ?? {}),
  };
  const command =
    options.command ?? [`log:${action} ${form.contentName}`, ...(action === "TRAIN" ? [trainAssetToken(form)] : [])];
  return {
    name: `${action} ${form.contentName}`,
    jobs: [
      {
        job_id: action.toLowerCase(),
        name: `${action} ${form.contentName}`,
        runner_kind: options.runnerKind ?? "mock",
        command,
        parameters,
      },
    ],
    num_workers: 1,
    worker_request: { cpu: 1, gpu: 0 },
  };
}

function trainAssetToken(form: FormModel): string {
  const stamp = Date.now().toString(36);
  return `asset:trained-model:file:///tmp/console-${form.contentId}-${stamp}.bin`;
}
