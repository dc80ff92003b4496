"""Content registry: documents describing models, apps, workflows, and assets.

The registry stores *descriptions* plus a pointer URI — never the content
bytes themselves. Documents arrive as JSON (form output or a raw upload)
and are parsed strictly: unknown or missing keys are rejected by name, and
each parameter widget's constraints are validated up front so forms built
from the schema can trust it.

Search is a small inverted index over name/description/tags tokens with
set-semantics scoring: one point per distinct query token present.
"""

from __future__ import annotations

import re
import uuid
from dataclasses import dataclass, field

from .access import AccessGraph, COMMUNITY_ID
from .errors import (
    AccessDenied,
    DuplicateContent,
    SchemaViolation,
    UnknownAsset,
    UnknownContent,
    UnknownContentType,
)

CONTENT_TYPES = ("model", "app", "workflow", "asset")

WIDGETS = ("int_slider", "float_slider", "dropdown", "radio", "checkbox", "text", "number")

_TOKEN_RE = re.compile(r"[0-9a-z]+")

_PARAM_KEYS = {"param_name", "title", "widget", "default", "min", "max", "step", "options", "description"}
_SERVICE_KEYS = {"command", "port"}
_DOC_KEYS = {
    "content_type",
    "name",
    "version",
    "uri",
    "description",
    "tags",
    "public",
    "service",
    "parameters",
    "workflow_template",
}
_DOC_REQUIRED = ("content_type", "name", "version", "uri")


def tokenize(text: str) -> set[str]:
    return set(_TOKEN_RE.findall(text.lower()))


@dataclass
class ParamSpec:
    """One widget description from which a form field is generated."""

    param_name: str
    widget: str
    default: object
    title: str = ""
    min: float | None = None
    max: float | None = None
    step: float | None = None
    options: list | None = None
    description: str = ""

    def to_dict(self) -> dict:
        return {
            "param_name": self.param_name,
            "title": self.title,
            "widget": self.widget,
            "default": self.default,
            "min": self.min,
            "max": self.max,
            "step": self.step,
            "options": self.options,
            "description": self.description,
        }

    @classmethod
    def parse(cls, raw: dict, where: str) -> "ParamSpec":
        if not isinstance(raw, dict):
            raise SchemaViolation(f"{where}: parameter entry must be an object")
        unknown = set(raw) - _PARAM_KEYS
        if unknown:
            raise SchemaViolation(f"{where}: unknown parameter key {sorted(unknown)[0]!r}")
        for required in ("param_name", "widget"):
            if required not in raw:
                raise SchemaViolation(f"{where}: missing parameter key {required!r}")
        if "default" not in raw:
            raise SchemaViolation(f"{where}.{raw['param_name']}: missing parameter key 'default'")
        spec = cls(
            param_name=raw["param_name"],
            widget=raw["widget"],
            default=raw["default"],
            title=raw.get("title") or raw["param_name"],
            min=raw.get("min"),
            max=raw.get("max"),
            step=raw.get("step"),
            options=raw.get("options"),
            description=raw.get("description", ""),
        )
        spec._validate(f"{where}.{spec.param_name}")
        return spec

    def _validate(self, where: str) -> None:
        if self.widget not in WIDGETS:
            raise SchemaViolation(f"{where}: unknown widget {self.widget!r}")
        if self.widget in ("int_slider", "float_slider", "number"):
            self._validate_numeric(where)
        elif self.widget in ("dropdown", "radio"):
            if not self.options:
                raise SchemaViolation(f"{where}: options required for {self.widget}")
            if self.default not in self.options:
                raise SchemaViolation(f"{where}: default not in options")
        elif self.widget == "checkbox":
            if not isinstance(self.default, bool):
                raise SchemaViolation(f"{where}: checkbox default must be a boolean")
        elif self.widget == "text":
            if not isinstance(self.default, str):
                raise SchemaViolation(f"{where}: text default must be a string")

    def _validate_numeric(self, where: str) -> None:
        integral = self.widget == "int_slider"
        number_type = int if integral else (int, float)
        for label, value in (("default", self.default), ("min", self.min), ("max", self.max)):
            if value is None and label != "default" and self.widget == "number":
                continue  # number widgets may be unbounded
            if not isinstance(value, number_type) or isinstance(value, bool):
                kind = "an integer" if integral else "a number"
                raise SchemaViolation(f"{where}: {label} must be {kind}")
        if self.min is not None and self.default < self.min:
            raise SchemaViolation(f"{where}: default below min")
        if self.max is not None and self.default > self.max:
            raise SchemaViolation(f"{where}: default above max")
        if self.min is not None and self.max is not None and self.min > self.max:
            raise SchemaViolation(f"{where}: min exceeds max")
        if self.step is not None and (
            not isinstance(self.step, (int, float)) or isinstance(self.step, bool) or self.step <= 0
        ):
            raise SchemaViolation(f"{where}: step must be positive")


@dataclass
class ContentDocument:
    """Registry entry for one model, app, workflow, or asset-like content."""

    content_id: str
    content_type: str
    name: str
    version: str
    owner: str
    uri: str
    description: str = ""
    tags: list = field(default_factory=list)
    public: bool = False
    service: dict | None = None
    parameters: list = field(default_factory=list)  # list[ParamSpec]
    workflow_template: dict | None = None

    def to_dict(self) -> dict:
        return {
            "content_id": self.content_id,
            "content_type": self.content_type,
            "name": self.name,
            "version": self.version,
            "owner": self.owner,
            "uri": self.uri,
            "description": self.description,
            "tags": list(self.tags),
            "public": self.public,
            "service": self.service,
            "parameters": [p.to_dict() for p in self.parameters],
            "workflow_template": self.workflow_template,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ContentDocument":
        doc = cls(**{k: v for k, v in d.items() if k != "parameters"})
        doc.parameters = [ParamSpec(**p) for p in d.get("parameters", [])]
        return doc

    def token_set(self) -> set[str]:
        tokens = tokenize(self.name) | tokenize(self.description)
        for tag in self.tags:
            tokens |= tokenize(tag)
        return tokens


def parse_content_document(raw: dict) -> dict:
    """Strictly validate an uploaded document body; returns normalized fields.

    Rejects unknown keys by name, enforces the per-type shape rules
    (parameters only on models/apps, workflow_template only on workflows,
    service only on apps), and validates every ParamSpec.
    """
    if not isinstance(raw, dict):
        raise SchemaViolation("content document must be a JSON object")
    unknown = set(raw) - _DOC_KEYS
    if unknown:
        raise SchemaViolation(f"unknown content document key {sorted(unknown)[0]!r}")
    for required in _DOC_REQUIRED:
        if required not in raw:
            raise SchemaViolation(f"missing content document key {required!r}")
    content_type = raw["content_type"]
    if content_type not in CONTENT_TYPES:
        raise UnknownContentType(f"unknown content_type {content_type!r}")
    for key, expected in (("name", str), ("version", str), ("uri", str)):
        if not isinstance(raw[key], expected):
            raise SchemaViolation(f"{key} must be a string")
    if not raw["name"]:
        raise SchemaViolation("name must be non-empty")
    tags = raw.get("tags", [])
    if not isinstance(tags, list) or not all(isinstance(t, str) for t in tags):
        raise SchemaViolation("tags must be a list of strings")
    public = raw.get("public", False)
    if not isinstance(public, bool):
        raise SchemaViolation("public must be a boolean")

    parameters = raw.get("parameters", [])
    if not isinstance(parameters, list):
        raise SchemaViolation("parameters must be a list")
    if parameters and content_type not in ("model", "app"):
        raise SchemaViolation("parameters allowed only for model and app contents")
    parsed_params = [ParamSpec.parse(p, "parameters") for p in parameters]
    names = [p.param_name for p in parsed_params]
    if len(set(names)) != len(names):
        raise SchemaViolation("duplicate param_name in parameters")

    workflow_template = raw.get("workflow_template")
    if workflow_template is not None and content_type != "workflow":
        raise SchemaViolation("workflow_template allowed only for workflow contents")

    service = raw.get("service")
    if service is not None:
        if content_type != "app":
            raise SchemaViolation("service allowed only for app contents")
        if not isinstance(service, dict):
            raise SchemaViolation("service must be an object")
        unknown = set(service) - _SERVICE_KEYS
        if unknown:
            raise SchemaViolation(f"unknown service key {sorted(unknown)[0]!r}")
        command = service.get("command")
        if not isinstance(command, list) or not command or not all(isinstance(c, str) for c in command):
            raise SchemaViolation("service.command must be a non-empty list of strings")
        if "port" in service and not isinstance(service["port"], int):
            raise SchemaViolation("service.port must be an integer")

    return {
        "content_type": content_type,
        "name": raw["name"],
        "version": raw["version"],
        "uri": raw["uri"],
        "description": raw.get("description", ""),
        "tags": tags,
        "public": public,
        "service": service,
        "parameters": parsed_params,
        "workflow_template": workflow_template,
    }


@dataclass
class AssetRecord:
    """Metadata record for an artifact produced by a job or owned by a user."""

    asset_id: str
    owner: str
    kind: str
    uri: str
    metadata: dict = field(default_factory=dict)
    source_job_id: str | None = None

    def to_dict(self) -> dict:
        return {
            "asset_id": self.asset_id,
            "owner": self.owner,
            "kind": self.kind,
            "uri": self.uri,
            "metadata": self.metadata,
            "source_job_id": self.source_job_id,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "AssetRecord":
        return cls(**d)


class ContentRegistry:
    """Document and asset store wired to the access graph for visibility.

    Registering creates a resource node owned by the registrant; public
    documents additionally get a community read grant, so every later
    visibility question reduces to one check_access call.
    """

    def __init__(self, graph: AccessGraph, journal=None):
        self._graph = graph
        self._journal = journal
        self.contents: dict[str, ContentDocument] = {}
        self.assets: dict[str, AssetRecord] = {}
        self._index: dict[str, set[str]] = {}  # token -> content ids

    def restore(self, tables: dict) -> None:
        for raw in tables.get("contents", {}).values():
            doc = ContentDocument.from_dict(raw)
            self.contents[doc.content_id] = doc
            self._index_doc(doc)
        for raw in tables.get("assets", {}).values():
            asset = AssetRecord.from_dict(raw)
            self.assets[asset.asset_id] = asset

    # -- contents ----------------------------------------------------------

    def register_content(self, raw_doc: dict, principal: str) -> str:
        fields = parse_content_document(raw_doc)
        for doc in self.contents.values():
            if (
                doc.content_type == fields["content_type"]
                and doc.owner == principal
                and doc.name == fields["name"]
                and doc.version == fields["version"]
            ):
                raise DuplicateContent(
                    f"{fields['content_type']} {fields['name']!r} v{fields['version']} "
                    f"already registered by {principal}"
                )
        content_id = f"c-{uuid.uuid4().hex[:8]}"
        doc = ContentDocument(content_id=content_id, owner=principal, **fields)
        self._graph.create_resource(content_id, {"name": doc.name, "type": doc.content_type})
        self._graph.set_owner(principal, content_id)
        if doc.public:
            self._graph.grant(principal, COMMUNITY_ID, {"read"}, content_id)
        self.contents[content_id] = doc
        self._index_doc(doc)
        if self._journal:
            self._journal.record_put("contents", content_id, doc.to_dict())
        return content_id

    def get_content(self, content_id: str, principal: str) -> ContentDocument:
        doc = self.contents.get(content_id)
        if doc is None:
            raise UnknownContent(f"no such content: {content_id}")
        if not self._graph.is_allowed(principal, "read", content_id):
            raise AccessDenied(f"{principal} may not read {content_id}")
        return doc

    def list_contents(
        self, principal: str, content_type: str | None = None, owner: str | None = None
    ) -> list[ContentDocument]:
        if content_type is not None and content_type not in CONTENT_TYPES:
            raise UnknownContentType(f"unknown content_type {content_type!r}")
        docs = [
            doc
            for doc in self.contents.values()
            if (content_type is None or doc.content_type == content_type)
            and (owner is None or doc.owner == owner)
            and self._graph.is_allowed(principal, "read", doc.content_id)
        ]
        docs.sort(key=lambda d: (d.name, d.version, d.content_id))
        return docs

    def delete_content(self, content_id: str, principal: str) -> None:
        doc = self.contents.get(content_id)
        if doc is None:
            raise UnknownContent(f"no such content: {content_id}")
        if not self._graph.is_allowed(principal, "delete", content_id):
            raise AccessDenied(f"{principal} may not delete {content_id}")
        del self.contents[content_id]
        self._unindex_doc(doc)
        self._graph.remove_resource(content_id)
        if self._journal:
            self._journal.record_del("contents", content_id)

    # -- search ------------------------------------------------------------

    def _index_doc(self, doc: ContentDocument) -> None:
        for token in doc.token_set():
            self._index.setdefault(token, set()).add(doc.content_id)

    def _unindex_doc(self, doc: ContentDocument) -> None:
        for token in doc.token_set():
            ids = self._index.get(token)
            if ids is not None:
                ids.discard(doc.content_id)
                if not ids:
                    del self._index[token]

    def search_contents(
        self, query: str, principal: str, content_type: str | None = None
    ) -> list[tuple[str, int]]:
        """Rank visible documents by distinct-query-token overlap.

        Assets are indexed nowhere and so never appear. Zero-score documents
        are omitted; ties order by name ascending.
        """
        if content_type is not None and content_type not in CONTENT_TYPES:
            raise UnknownContentType(f"unknown content_type {content_type!r}")
        scores: dict[str, int] = {}
        for token in tokenize(query):
            for content_id in self._index.get(token, ()):
                scores[content_id] = scores.get(content_id, 0) + 1
        ranked = []
        for content_id, score in scores.items():
            doc = self.contents[content_id]
            if content_type is not None and doc.content_type != content_type:
                continue
            if not self._graph.is_allowed(principal, "read", content_id):
                continue
            ranked.append((content_id, score, doc.name))
        ranked.sort(key=lambda t: (-t[1], t[2]))
        return [(content_id, score) for content_id, score, _ in ranked]

    # -- assets --------------------------------------------------------------

    def register_asset(
        self,
        owner: str,
        kind: str,
        uri: str,
        metadata: dict | None = None,
        source_job_id: str | None = None,
    ) -> str:
        if not uri or not isinstance(uri, str):
            raise SchemaViolation("asset uri must be a non-empty string")
        if not isinstance(kind, str) or not kind:
            raise SchemaViolation("asset kind must be a non-empty string")
        asset_id = f"a-{uuid.uuid4().hex[:8]}"
        asset = AssetRecord(asset_id, owner, kind, uri, dict(metadata or {}), source_job_id)
        self._graph.create_resource(asset_id, {"kind": kind})
        self._graph.set_owner(owner, asset_id)
        self.assets[asset_id] = asset
        if self._journal:
            self._journal.record_put("assets", asset_id, asset.to_dict())
        return asset_id

    def get_asset(self, asset_id: str, principal: str) -> AssetRecord:
        asset = self.assets.get(asset_id)
        if asset is None:
            raise UnknownAsset(f"no such asset: {asset_id}")
        if not self._graph.is_allowed(principal, "read", asset_id):
            raise AccessDenied(f"{principal} may not read {asset_id}")
        return asset

    def list_assets(self, principal: str) -> list[AssetRecord]:
        visible = [
            a for a in self.assets.values() if self._graph.is_allowed(principal, "read", a.asset_id)
        ]
        visible.sort(key=lambda a: a.asset_id)
        return visible

    def delete_asset(self, asset_id: str, principal: str) -> None:
        asset = self.assets.get(asset_id)
        if asset is None:
            raise UnknownAsset(f"no such asset: {asset_id}")
        if not self._graph.is_allowed(principal, "delete", asset_id):
            raise AccessDenied(f"{principal} may not delete {asset_id}")
        del self.assets[asset_id]
        self._graph.remove_resource(asset_id)
        if self._journal:
            self._journal.record_del("assets", asset_id)
