"""Demo fixture pack: content documents and job commands for the seeded demo.

The model document exercises every widget kind the form generator knows;
the three labeling apps are public and launchable; the workflow template
shows the registry holding a reusable two-step skeleton. Job commands come
in a process flavor (real child process) and a mock flavor (scripted
runner), both of which declare produced artifacts via asset marker lines.
"""

from __future__ import annotations

import sys

OWNER = "demo-owner"
TEAMMATE = "demo-teammate"
STRANGER = "demo-stranger"
DEMO_PASSWORDS = {OWNER: "owner-pass", TEAMMATE: "teammate-pass", STRANGER: "stranger-pass"}

MODEL_NAME = "pixel-segmenter"


def segmentation_model_doc() -> dict:
    """Private segmentation model whose schema spans all seven widget kinds."""
    return {
        "content_type": "model",
        "name": MODEL_NAME,
        "version": "1.0.0",
        "uri": "https://example.org/models/pixel-segmenter.git",
        "description": (
            "Trains a per-pixel classifier from annotated regions, saves the "
            "learned model, then applies it to the full image stack."
        ),
        "tags": ["segmentation", "imaging", "supervised"],
        "public": False,
        "service": None,
        "parameters": [
            {
                "param_name": "epochs",
                "title": "Training epochs",
                "widget": "int_slider",
                "default": 30,
                "min": 1,
                "max": 200,
                "step": 1,
                "options": None,
                "description": "Number of passes over the annotated set.",
            },
            {
                "param_name": "learning_rate",
                "title": "Learning rate",
                "widget": "float_slider",
                "default": 0.01,
                "min": 0.0001,
                "max": 0.5,
                "step": 0.0001,
                "options": None,
                "description": "Step size for the optimizer.",
            },
            {
                "param_name": "optimizer",
                "title": "Optimizer",
                "widget": "dropdown",
                "default": "adam",
                "min": None,
                "max": None,
                "step": None,
                "options": ["adam", "sgd", "rmsprop"],
                "description": "Weight update rule.",
            },
            {
                "param_name": "sampling",
                "title": "Patch sampling",
                "widget": "radio",
                "default": "random",
                "min": None,
                "max": None,
                "step": None,
                "options": ["random", "contiguous"],
                "description": "How training patches are drawn from the stack.",
            },
            {
                "param_name": "normalize",
                "title": "Normalize intensities",
                "widget": "checkbox",
                "default": True,
                "min": None,
                "max": None,
                "step": None,
                "options": None,
                "description": "Scale pixel intensities to unit range first.",
            },
            {
                "param_name": "notes",
                "title": "Run notes",
                "widget": "text",
                "default": "",
                "min": None,
                "max": None,
                "step": None,
                "options": None,
                "description": "Free-form note stored with the run.",
            },
            {
                "param_name": "confidence_threshold",
                "title": "Confidence threshold",
                "widget": "number",
                "default": 0.5,
                "min": 0.0,
                "max": 1.0,
                "step": 0.05,
                "options": None,
                "description": "Minimum class probability to color a pixel.",
            },
        ],
        "workflow_template": None,
    }


def labeling_app_docs() -> list:
    """Three public standalone apps; service commands exit immediately so a
    desk-scale launch demonstrably completes."""

    def app(name, description, tags, port, banner):
        return {
            "content_type": "app",
            "name": name,
            "version": "1.0.0",
            "uri": f"https://example.org/apps/{name.lower().replace(' ', '-')}.git",
            "description": description,
            "tags": tags,
            "public": True,
            "service": {
                "command": [sys.executable, "-c", f"print({banner!r})"],
                "port": port,
            },
            "parameters": [],
            "workflow_template": None,
        }

    return [
        app(
            "Label Maker",
            "Annotation surface for tagging images by hand or from model suggestions.",
            ["annotation", "imaging"],
            8051,
            "label maker ready",
        ),
        app(
            "Data Clinic",
            "Ranks images by latent-space similarity so lookalikes can be tagged in batches.",
            ["similarity", "autoencoder", "unsupervised"],
            8052,
            "data clinic ready",
        ),
        app(
            "MLCoach",
            "Trains an image classifier from tagged examples and scores the whole stack per class.",
            ["coach", "classifier", "supervised"],
            8053,
            "mlcoach ready",
        ),
    ]


def workflow_template_doc() -> dict:
    """Registry-held two-step skeleton: train, then apply the saved model."""
    return {
        "content_type": "workflow",
        "name": "train-then-apply",
        "version": "1.0.0",
        "uri": "https://example.org/workflows/train-then-apply.json",
        "description": "Two-step template: fit a model, then apply it to the full stack.",
        "tags": ["template", "segmentation"],
        "public": True,
        "service": None,
        "parameters": [],
        "workflow_template": {
            "jobs": [
                {"job_id": "train", "command": [], "depends_on": []},
                {"job_id": "apply", "command": [], "depends_on": ["train"]},
            ],
            "num_workers": 1,
            "worker_request": {"cpu": 1, "gpu": 0},
        },
    }


def train_job_command(runner_kind: str, model_path: str) -> list:
    """Command for the TRAIN step: write placeholder weights, declare the asset."""
    uri = f"file://{model_path}"
    if runner_kind == "mock":
        return [
            "log:pass 1/2 loss 0.42",
            "log:pass 2/2 loss 0.17",
            f"asset:trained-model:{uri}",
        ]
    marker = {"uri": uri, "kind": "trained-model"}
    script = (
        "import json\n"
        f"path = {model_path!r}\n"
        "open(path, 'w').write('placeholder weights\\n')\n"
        "print('pass 1/2 loss 0.42')\n"
        "print('pass 2/2 loss 0.17')\n"
        f"print('::asset::' + json.dumps({marker!r}))\n"
    )
    return [sys.executable, "-c", script]


def test_job_command(runner_kind: str, model_uri: str) -> list:
    """Command for the TEST step: apply the saved model to the stack."""
    if runner_kind == "mock":
        return [
            f"log:loading model {model_uri}",
            "log:segmented 128/128 frames",
        ]
    script = (
        f"print('loading model {model_uri}')\n"
        "print('segmented 128/128 frames')\n"
    )
    return [sys.executable, "-c", script]
