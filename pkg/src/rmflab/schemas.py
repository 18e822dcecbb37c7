"""JSON schemas (draft 2020-12) for the file formats the CLI accepts.

The same dictionaries are dumped verbatim under schema/v1/ in the
repository; SCHEMA_VERSION names that directory.
"""

from __future__ import annotations

import jsonschema

SCHEMA_VERSION = "v1"

SPACE_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "space",
    "oneOf": [
        {
            "type": "object",
            "properties": {
                "kind": {"const": "lp"},
                "p": {
                    "oneOf": [{"type": "number", "minimum": 1}, {"const": "inf"}]
                },
                "dim": {"type": "integer", "minimum": 1},
            },
            "required": ["kind", "p", "dim"],
            "additionalProperties": False,
        },
        {
            "type": "object",
            "properties": {
                "kind": {"const": "schatten"},
                "p": {"type": "number", "minimum": 1},
                "rows": {"type": "integer", "minimum": 1},
                "cols": {"type": "integer", "minimum": 1},
            },
            "required": ["kind", "p", "rows", "cols"],
            "additionalProperties": False,
        },
        {
            "type": "object",
            "properties": {
                "kind": {"const": "hilbert_op"},
                "rows": {"type": "integer", "minimum": 1},
                "cols": {"type": "integer", "minimum": 1},
            },
            "required": ["kind", "rows", "cols"],
            "additionalProperties": False,
        },
    ],
}

_VECTOR = {"type": "array", "items": {"type": "number"}, "minItems": 1}

VECTORSET_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "vectorset",
    "type": "object",
    "properties": {
        "space": SPACE_SCHEMA,
        "vectors": {"type": "array", "items": _VECTOR, "minItems": 1},
    },
    "required": ["space", "vectors"],
    "additionalProperties": False,
}

FILTRATION_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "filtration",
    "type": "object",
    "properties": {
        "masses": {
            "type": "array",
            "items": {"type": "number", "exclusiveMinimum": 0},
            "minItems": 1,
        },
        "levels": {
            "type": "array",
            "items": {"type": "array", "items": {"type": "integer", "minimum": 0}},
            "minItems": 1,
        },
    },
    "required": ["masses", "levels"],
    "additionalProperties": False,
}

STEP_FUNCTION_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "step_function",
    "type": "object",
    "properties": {
        "space": SPACE_SCHEMA,
        "masses": {
            "type": "array",
            "items": {"type": "number", "exclusiveMinimum": 0},
            "minItems": 1,
        },
        "values": {"type": "array", "items": _VECTOR, "minItems": 1},
    },
    "required": ["space", "masses", "values"],
    "additionalProperties": False,
}

MARTINGALE_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "martingale",
    "type": "object",
    "properties": {
        "space": SPACE_SCHEMA,
        "filtration": FILTRATION_SCHEMA,
        "levels": {
            "type": "array",
            "items": {"type": "array", "items": _VECTOR},
            "minItems": 1,
        },
    },
    "required": ["space", "filtration", "levels"],
    "additionalProperties": False,
}

CONCAVE_SAMPLES_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "concave_samples",
    "type": "object",
    "properties": {
        "space": SPACE_SCHEMA,
        "samples": {
            "type": "array",
            "items": {
                "type": "object",
                "properties": {
                    "set": {"type": "array", "items": _VECTOR},
                    "point": _VECTOR,
                },
                "required": ["set", "point"],
                "additionalProperties": False,
            },
        },
        "midpoints": {
            "type": "array",
            "items": {
                "type": "object",
                "properties": {
                    "set": {"type": "array", "items": _VECTOR},
                    "a": _VECTOR,
                    "b": _VECTOR,
                },
                "required": ["set", "a", "b"],
                "additionalProperties": False,
            },
        },
    },
    "required": ["space", "samples"],
    "additionalProperties": False,
}

CONFIG_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "experiment_config",
    "type": "object",
    "properties": {
        "seed": {"type": "integer", "minimum": 0},
        "exact_threshold": {"type": "integer", "minimum": 1},
        "mc_samples": {"type": "integer", "minimum": 1},
        "restarts": {"type": "integer", "minimum": 0},
        "tol": {"type": "number", "exclusiveMinimum": 0},
        "out": {"type": "string"},
        "format": {"enum": ["json", "csv"]},
        "space": SPACE_SCHEMA,
        "vectors": {"type": "string"},
        "function": {"type": "string"},
        "martingale": {"type": "string"},
        "samples": {"type": "string"},
        "p": {"oneOf": [{"type": "number", "minimum": 1}, {"const": "inf"}]},
        "q": {"type": "number", "minimum": 1},
        "c": {"type": "number", "minimum": 0},
        "kind": {"type": "string"},
        "exponent": {"oneOf": [{"type": "number", "minimum": 1}, {"const": "inf"}]},
        "count": {"type": "integer", "minimum": 1},
        "multiplicity": {"type": "integer", "minimum": 1},
        "grid_step": {"type": "number", "exclusiveMinimum": 0},
        "grid_exponent": {"type": "integer", "minimum": 1},
        "steps": {"type": "integer", "minimum": 0},
        "instances": {"type": "integer", "minimum": 0},
        "lambdas": {"type": "string"},
        "lambda_points": {"type": "integer", "minimum": 1},
        "beta": {"type": "number", "exclusiveMinimum": 0},
        "delta": {"type": "number", "exclusiveMinimum": 0},
        "eps": {"type": "number", "exclusiveMinimum": 0},
        "scale": {"type": "number", "exclusiveMinimum": 0},
        "perturb": {"type": "boolean"},
        "subsample": {"type": "integer", "minimum": 1},
        "candidate": {"enum": ["zero", "penalty"]},
        "truncation": {"type": "integer", "minimum": 0},
    },
    "additionalProperties": False,
}

ALL_SCHEMAS = {
    "space": SPACE_SCHEMA,
    "vectorset": VECTORSET_SCHEMA,
    "filtration": FILTRATION_SCHEMA,
    "step_function": STEP_FUNCTION_SCHEMA,
    "martingale": MARTINGALE_SCHEMA,
    "concave_samples": CONCAVE_SAMPLES_SCHEMA,
    "config": CONFIG_SCHEMA,
}


class SchemaViolation(ValueError):
    """Input failed schema validation; message carries the JSON path."""


def validate(obj, schema_name: str, source: str = "<input>") -> None:
    schema = ALL_SCHEMAS[schema_name]
    validator = jsonschema.Draft202012Validator(schema)
    errors = sorted(validator.iter_errors(obj), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        path = "$" + "".join(
            f"[{p!r}]" if isinstance(p, str) else f"[{p}]" for p in err.absolute_path
        )
        raise SchemaViolation(
            f"{source}: {schema_name} schema violated at {path}: {err.message}"
        )
