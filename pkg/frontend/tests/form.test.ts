import { describe, expect, it } from "vitest";

import { buildForm, formValues, parseRawValue, setValue, validateValue, workflowBody } from "../src/form.js";
import { demoModelDoc, otherModelDoc, param } from "./fixtures.js";

describe("buildForm", () => {
  it("renders one field per parameter, initialized to defaults", () => {
    const form = buildForm(demoModelDoc());
    expect(form.fields).toHaveLength(7);
    expect(form.fields.map((f) => f.spec.widget)).toEqual([
      "int_slider",
      "float_slider",
      "dropdown",
      "radio",
      "checkbox",
      "text",
      "number",
    ]);
    expect(formValues(form)).toEqual({
      epochs: 30,
      learning_rate: 0.01,
      optimizer: "adam",
      sampling: "random",
      normalize: true,
      notes: "",
      confidence_threshold: 0.5,
    });
    expect(form.valid).toBe(true);
  });

  it("is a pure function of the document", () => {
    expect(buildForm(demoModelDoc())).toEqual(buildForm(demoModelDoc()));
  });

  it("switching documents rebuilds the widget tree", () => {
    const first = buildForm(demoModelDoc());
    const second = buildForm(otherModelDoc());
    expect(second.fields.map((f) => f.spec.param_name)).toEqual(["sigma", "mode"]);
    expect(second.contentId).not.toBe(first.contentId);
    // and switching back restores the original tree exactly
    expect(buildForm(demoModelDoc())).toEqual(first);
  });

  it("flags unsupported widget kinds but keeps other fields usable", () => {
    const doc = demoModelDoc();
    doc.parameters = [
      param({ param_name: "weird", widget: "holo_dial", default: 1 }),
      ...doc.parameters,
    ];
    const form = buildForm(doc);
    const weird = form.fields[0]!;
    expect(weird.supported).toBe(false);
    expect(weird.error).toContain("unsupported widget kind");
    expect(form.valid).toBe(true); // unsupported fields don't gate submission
    expect(Object.keys(formValues(form))).not.toContain("weird");
  });
});

describe("validateValue", () => {
  const epochs = demoModelDoc().parameters[0]!;
  const optimizer = demoModelDoc().parameters[2]!;
  const threshold = demoModelDoc().parameters[6]!;

  it("enforces integer sliders with bounds", () => {
    expect(validateValue(epochs, 30)).toBeNull();
    expect(validateValue(epochs, 0)).toMatch(/at least 1/);
    expect(validateValue(epochs, 201)).toMatch(/at most 200/);
    expect(validateValue(epochs, 1.5)).toMatch(/integer/);
    expect(validateValue(epochs, "30")).toMatch(/integer/);
  });

  it("enforces dropdown options", () => {
    expect(validateValue(optimizer, "sgd")).toBeNull();
    expect(validateValue(optimizer, "zzz")).toMatch(/options/);
  });

  it("enforces numeric bounds on number widgets", () => {
    expect(validateValue(threshold, 0.4)).toBeNull();
    expect(validateValue(threshold, 1.2)).toMatch(/at most 1/);
    expect(validateValue(threshold, -0.1)).toMatch(/at least 0/);
  });

  it("enforces checkbox and text types", () => {
    const flag = param({ param_name: "flag", widget: "checkbox", default: true });
    const note = param({ param_name: "note", widget: "text", default: "" });
    expect(validateValue(flag, true)).toBeNull();
    expect(validateValue(flag, "yes")).toMatch(/boolean/);
    expect(validateValue(note, "hi")).toBeNull();
    expect(validateValue(note, 4)).toMatch(/text/);
  });
});

describe("setValue", () => {
  it("updates one field and recomputes validity", () => {
    const form = buildForm(demoModelDoc());
    const broken = setValue(form, "epochs", 999);
    expect(broken.valid).toBe(false);
    expect(broken.fields[0]!.error).toMatch(/at most 200/);
    expect(form.valid).toBe(true); // original untouched
    const fixed = setValue(broken, "epochs", 50);
    expect(fixed.valid).toBe(true);
  });
});

describe("parseRawValue", () => {
  const doc = demoModelDoc();
  it("parses DOM strings into schema types", () => {
    expect(parseRawValue(doc.parameters[0]!, "42")).toBe(42);
    expect(parseRawValue(doc.parameters[1]!, "0.25")).toBe(0.25);
    expect(parseRawValue(doc.parameters[4]!, true)).toBe(true);
    expect(parseRawValue(doc.parameters[5]!, "hello")).toBe("hello");
    expect(parseRawValue(doc.parameters[6]!, "0.7")).toBe(0.7);
  });
});

describe("workflowBody", () => {
  it("builds a single-job workflow carrying form values as parameters", () => {
    const form = buildForm(demoModelDoc());
    const body = workflowBody(form, "TRAIN") as {
      jobs: { job_id: string; parameters: Record<string, unknown> }[];
      num_workers: number;
    };
    expect(body.jobs).toHaveLength(1);
    expect(body.num_workers).toBe(1);
    expect(body.jobs[0]!.job_id).toBe("train");
    expect(body.jobs[0]!.parameters["action"]).toBe("TRAIN");
    expect(body.jobs[0]!.parameters["epochs"]).toBe(30);
  });

  it("TEST submissions carry the selected trained asset uri", () => {
    const form = buildForm(demoModelDoc());
    const body = workflowBody(form, "TEST", {
      extraParameters: { model_uri: "file:///m.bin" },
    }) as { jobs: { parameters: Record<string, unknown> }[] };
    expect(body.jobs[0]!.parameters["model_uri"]).toBe("file:///m.bin");
    expect(body.jobs[0]!.parameters["action"]).toBe("TEST");
  });
});
