/** Test fixtures mirroring the platform's seeded demo documents. */

import type { ContentDocument, ParamSpec } from "../src/api.js";

export function param(overrides: Partial<ParamSpec> & { param_name: string; widget: string; default: unknown }): ParamSpec {
  return {
    title: overrides.param_name,
    min: null,
    max: null,
    step: null,
    options: null,
    description: "",
    ...overrides,
  } as ParamSpec;
}

export function demoModelDoc(): ContentDocument {
  return {
    content_id: "c-model1",
    content_type: "model",
    name: "pixel-segmenter",
    version: "1.0.0",
    owner: "u-owner",
    uri: "https://example.org/models/pixel-segmenter.git",
    description: "Per-pixel classifier with a train-then-apply flow.",
    tags: ["segmentation"],
    public: false,
    service: null,
    workflow_template: null,
    parameters: [
      param({
        param_name: "epochs",
        title: "Training epochs",
        widget: "int_slider",
        default: 30,
        min: 1,
        max: 200,
        step: 1,
        description: "Passes over the annotated set.",
      }),
      param({
        param_name: "learning_rate",
        widget: "float_slider",
        default: 0.01,
        min: 0.0001,
        max: 0.5,
        step: 0.0001,
      }),
      param({
        param_name: "optimizer",
        widget: "dropdown",
        default: "adam",
        options: ["adam", "sgd", "rmsprop"],
      }),
      param({
        param_name: "sampling",
        widget: "radio",
        default: "random",
        options: ["random", "contiguous"],
      }),
      param({ param_name: "normalize", widget: "checkbox", default: true }),
      param({ param_name: "notes", widget: "text", default: "" }),
      param({
        param_name: "confidence_threshold",
        widget: "number",
        default: 0.5,
        min: 0,
        max: 1,
        step: 0.05,
      }),
    ],
  };
}

export function otherModelDoc(): ContentDocument {
  return {
    ...demoModelDoc(),
    content_id: "c-model2",
    name: "edge-detector",
    parameters: [
      param({ param_name: "sigma", widget: "number", default: 1.5, min: 0.1, max: 8 }),
      param({ param_name: "mode", widget: "dropdown", default: "sobel", options: ["sobel", "canny"] }),
    ],
  };
}
