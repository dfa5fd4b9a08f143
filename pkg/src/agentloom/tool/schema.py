"""Tool JSON schemas and automatic derivation from Python callables."""

from __future__ import annotations

import inspect
import re
from dataclasses import dataclass, field
from typing import Any, Callable, get_args, get_origin, get_type_hints

from ..errors import ValidationError

_NAME_RE = re.compile(r"^[A-Za-z0-9_-]+$")

_PY_TO_JSON = {
    str: "string",
    int: "integer",
    float: "number",
    bool: "boolean",
    list: "array",
    dict: "object",
}


@dataclass
class ToolSchema:
    """Function-calling schema: name, description, JSON-Schema parameters."""

    name: str
    description: str = ""
    parameters: dict[str, Any] = field(default_factory=lambda: {"type": "object", "properties": {}})

    def __post_init__(self) -> None:
        if not _NAME_RE.match(self.name):
            raise ValidationError(f"invalid tool name {self.name!r}")
        if not isinstance(self.parameters, dict) or self.parameters.get("type") != "object":
            raise ValidationError(f"tool {self.name!r}: parameters must be an object schema")
        self.parameters.setdefault("properties", {})

    def to_function_call_schema(self) -> dict[str, Any]:
        """The chat-completions ``tools`` array entry shape."""
        return {
            "type": "function",
            "function": {
                "name": self.name,
                "description": self.description,
                "parameters": self.parameters,
            },
        }

    def copy(self) -> "ToolSchema":
        import copy

        return ToolSchema(
            name=self.name,
            description=self.description,
            parameters=copy.deepcopy(self.parameters),
        )


def _json_type_for(annotation: Any) -> dict[str, Any]:
    if annotation is inspect.Parameter.empty or annotation is Any:
        return {}
    origin = get_origin(annotation)
    if origin in (list, tuple, set):
        args = get_args(annotation)
        item = _json_type_for(args[0]) if args else {}
        return {"type": "array", **({"items": item} if item else {})}
    if origin is dict:
        return {"type": "object"}
    if origin is not None:  # Optional[...] and friends: use the first concrete arg
        for arg in get_args(annotation):
            if arg is not type(None):
                return _json_type_for(arg)
        return {}
    if annotation in _PY_TO_JSON:
        return {"type": _PY_TO_JSON[annotation]}
    return {}


_SECTION_HEADERS = {
    "returns", "raises", "yields", "example", "examples", "note", "notes", "attributes",
}


def _doc_param_descriptions(doc: str) -> dict[str, str]:
    """Parse ``Args:`` sections of Google-style docstrings."""
    out: dict[str, str] = {}
    in_args = False
    current: str | None = None
    for line in doc.splitlines():
        stripped = line.strip()
        if stripped.lower() in ("args:", "arguments:", "parameters:"):
            in_args = True
            current = None
            continue
        if not in_args:
            continue
        if not stripped or stripped.rstrip(":").lower() in _SECTION_HEADERS:
            break
        match = re.match(r"^(\w+)\s*(?:\([^)]*\))?\s*:\s*(.*)$", stripped)
        if match:
            current = match.group(1)
            out[current] = match.group(2)
        elif current:
            out[current] += " " + stripped
    return out


def schema_from_callable(
    fn: Callable[..., Any],
    name: str | None = None,
    description: str | None = None,
) -> ToolSchema:
    """Derive a schema from a callable's signature, hints, and docstring.

    Parameters without defaults become required. ``*args``/``**kwargs``
    are ignored.
    """
    fn_name = name or getattr(fn, "__name__", None)
    if not fn_name:
        raise ValidationError("cannot derive a tool name; pass one explicitly")
    doc = inspect.getdoc(fn) or ""
    if description is None:
        description = doc.split("\n\n")[0].strip()
    param_docs = _doc_param_descriptions(doc)
    try:
        hints = get_type_hints(fn)
    except Exception:
        hints = {}
    properties: dict[str, Any] = {}
    required: list[str] = []
    signature = inspect.signature(fn)
    for param in signature.parameters.values():
        if param.kind in (inspect.Parameter.VAR_POSITIONAL, inspect.Parameter.VAR_KEYWORD):
            continue
        if param.name == "self":
            continue
        prop = _json_type_for(hints.get(param.name, param.annotation))
        if param.name in param_docs:
            prop = {**prop, "description": param_docs[param.name]}
        if param.default is not inspect.Parameter.empty and param.default is not None:
            prop = {**prop, "default": param.default}
        properties[param.name] = prop
        if param.default is inspect.Parameter.empty:
            required.append(param.name)
    parameters: dict[str, Any] = {"type": "object", "properties": properties}
    if required:
        parameters["required"] = required
    return ToolSchema(name=fn_name, description=description, parameters=parameters)


def extension_fragment(extend_model: Any) -> tuple[dict[str, Any], list[str]]:
    """Extra (properties, required) from a schema extension.

    Accepts a pydantic ``BaseModel`` subclass, a ``{"properties": ...,
    "required": [...]}`` dict, or a bare properties mapping.
    """
    if extend_model is None:
        return {}, []
    model_json_schema = getattr(extend_model, "model_json_schema", None)
    if callable(model_json_schema):
        schema = model_json_schema()
        return schema.get("properties", {}), schema.get("required", [])
    if isinstance(extend_model, dict):
        if "properties" in extend_model:
            return extend_model["properties"], extend_model.get("required", [])
        return extend_model, []
    raise ValidationError(
        "extend_model must be a pydantic model class or a properties mapping"
    )
