"""JSON schemas for command inputs, checked with jsonschema."""
from __future__ import annotations

import math
import re

import jsonschema

from .errors import InputError

_FRACTION = re.compile(r"^-?(0|[1-9][0-9]*)(/[1-9][0-9]*)?$")

format_checker = jsonschema.FormatChecker()


@format_checker.checks("fraction")
def _is_fraction(value) -> bool:
    if not isinstance(value, str):
        return True  # type errors are reported by "type"
    m = _FRACTION.match(value)
    if not m:
        return False
    if "/" in value:
        num, den = value.lstrip("-").split("/")
        return den != "1" and math.gcd(int(num), int(den)) == 1
    return True


@format_checker.checks("nonneg-fraction")
def _is_nonneg_fraction(value) -> bool:
    return _is_fraction(value) and not (isinstance(value, str) and value.startswith("-"))


FRACTION = {"type": "string", "format": "fraction"}
NONNEG = {"type": "string", "format": "nonneg-fraction"}
NAT = {"type": "integer", "minimum": 0}
POS = {"type": "integer", "minimum": 1}
LABEL = {"type": ["integer", "string"]}

GROUP = {
    "type": "object",
    "properties": {
        "free_rank": NAT,
        "primary": {
            "type": "array",
            "items": {
                "type": "object",
                "properties": {
                    "p": {"type": "integer", "minimum": 2},
                    "n": POS,
                    "mult": {"oneOf": [NAT, {"const": "inf"}]},
                    "trunc": POS,
                },
                "required": ["p", "n", "mult"],
                "additionalProperties": False,
            },
        },
    },
    "required": ["primary"],
    "additionalProperties": False,
}

CHARACTER = {"type": "object", "additionalProperties": FRACTION}

METRIC = {
    "type": "object",
    "properties": {
        "points": {"type": "array", "items": LABEL},
        "dist": {"type": "array", "items": {"type": "array", "items": NONNEG}},
    },
    "required": ["dist"],
}

METRIC_GROUP = {
    "type": "object",
    "properties": {
        "table": {"type": "array", "items": {"type": "array", "items": NAT}},
        "points": {"type": "array", "items": LABEL},
        "dist": {"type": "array", "items": {"type": "array", "items": NONNEG}},
    },
    "required": ["table", "dist"],
}

VALUE_GROUP = {"oneOf": [METRIC_GROUP, {"type": "object", "properties": {"circle": POS}, "required": ["circle"],
                                        "additionalProperties": False}]}

WORD = {
    "type": "array",
    "items": {
        "oneOf": [
            {"type": "object", "properties": {"abelian": {"type": "array", "items": {"type": "integer"}}},
             "required": ["abelian"], "additionalProperties": False},
            {"type": "object", "properties": {"free": {"type": "string"}},
             "required": ["free"], "additionalProperties": False},
        ]
    },
}

ACTION = {"type": "object", "additionalProperties": {"type": "array", "items": NAT}}

ABGROUP_INPUT = {
    "type": "object",
    "properties": {
        "group": GROUP,
        "extend_character": {
            "type": "object",
            "properties": {
                "delta_gens": {"type": "array", "items": {"type": "array", "items": {"type": "integer"}}},
                "theta": {"type": "array", "items": FRACTION},
            },
            "required": ["delta_gens", "theta"],
        },
        "hit_target": {
            "type": "object",
            "properties": {
                "delta_gens": {"type": "array", "items": {"type": "array", "items": {"type": "integer"}}},
                "psis": {"type": "array", "items": {"type": "array", "items": FRACTION}},
                "x": {"type": "array", "items": FRACTION},
            },
            "required": ["delta_gens", "psis", "x"],
        },
        "torus_generators": {"type": "array", "items": {"type": "array", "items": FRACTION}},
    },
    "required": ["group"],
}

INDUCE_INPUT = {
    "type": "object",
    "properties": {
        "K": METRIC_GROUP,
        "gamma": {"type": "array", "items": NAT},
        "Z": METRIC,
        "alpha": ACTION,
        "rescale": {"type": "boolean"},
    },
    "required": ["K", "gamma", "Z", "alpha"],
}

KATETOV_INPUT = {
    "type": "object",
    "properties": {
        "space": METRIC,
        "mode": {"enum": ["saturate", "extend_isometry", "audit"]},
        "s": NAT,
        "D": POS,
        "R": NONNEG,
        "strategy": {"type": "string"},
        "map": {"type": "object", "additionalProperties": NAT},
        "cap": NONNEG,
    },
    "required": ["space", "mode"],
}

LZERO_INPUT = {
    "type": "object",
    "properties": {
        "mode": {"enum": ["surjective_hom", "density", "refine"]},
        "level": NAT,
        "group": GROUP,
        "K": VALUE_GROUP,
        "generators": {"type": "array", "items": {"type": "array"}},
        "map": {"type": "array"},
        "to_level": NAT,
    },
    "required": ["mode", "level"],
}

FREEPROD_INPUT = {
    "type": "object",
    "properties": {
        "d": NAT,
        "n": NAT,
        "words": {"type": "array", "items": WORD},
        "p": {"type": "array", "items": POS},
        "relaxed": {"type": "boolean"},
    },
    "required": ["d", "n", "words"],
}

REP = {
    "type": "object",
    "properties": {"group": GROUP, "chars": {"type": "array", "items": CHARACTER}},
    "required": ["group", "chars"],
}

UNITARY_INPUT = {
    "type": "object",
    "properties": {
        "rep": REP,
        "xi": {"type": "array", "items": {"type": "array", "items": FRACTION}},
        "gammas": {"type": "array", "items": {"type": "array", "items": {"type": "integer"}}},
        "f": {"type": "array", "items": FRACTION},
        "eps": NONNEG,
    },
    "required": ["rep", "xi"],
}

MANIFEST = {
    "type": "object",
    "properties": {
        "stages": {
            "type": "array",
            "items": {
                "type": "object",
                "properties": {"command": {"type": "string"}, "input": {}, "args": {"type": "object"}},
                "required": ["command"],
            },
        }
    },
    "required": ["stages"],
}

SCHEMAS = {
    "group": GROUP,
    "metric": METRIC,
    "metric_group": METRIC_GROUP,
    "word": WORD,
    "rep": REP,
    "abgroup": ABGROUP_INPUT,
    "induce": INDUCE_INPUT,
    "katetov": KATETOV_INPUT,
    "lzero": LZERO_INPUT,
    "freeprod": FREEPROD_INPUT,
    "unitary": UNITARY_INPUT,
    "manifest": MANIFEST,
}


def _path(err) -> str:
    out = "$"
    for p in err.absolute_path:
        out += f"[{p}]" if isinstance(p, int) else f".{p}"
    return out


def check(kind: str, obj) -> None:
    """Raise InputError naming the offending field if ``obj`` does not match schema ``kind``."""
    if kind not in SCHEMAS:
        raise InputError(f"unknown schema {kind!r}; choose from {sorted(SCHEMAS)}")
    validator = jsonschema.Draft202012Validator(SCHEMAS[kind], format_checker=format_checker)
    errors = list(validator.iter_errors(obj))
    if errors:
        # the deepest error points at the concrete field
        err = max(errors, key=lambda e: (len(list(e.absolute_path)), -len(_path(e))))
        detail = err.message
        if err.validator == "format":
            detail = f"{err.instance!r} is not a valid {err.validator_value}"
            if err.validator_value == "nonneg-fraction" and isinstance(err.instance, str) and err.instance.startswith("-"):
                detail = f"negative value {err.instance!r}"
            elif isinstance(err.instance, str) and "/" in err.instance:
                detail += " (fractions must be reduced, denominator > 1)"
        raise InputError(f"{_path(err)}: {detail}", path=_path(err))


def detect(obj) -> str:
    """Guess the schema of a standalone document from its keys."""
    if isinstance(obj, list):
        return "word"
    if not isinstance(obj, dict):
        raise InputError("document must be a JSON object or list")
    if "stages" in obj:
        return "manifest"
    if "table" in obj:
        return "metric_group"
    if "dist" in obj:
        return "metric"
    if "chars" in obj:
        return "rep"
    if "primary" in obj:
        return "group"
    raise InputError("cannot tell the document kind; pass --kind")
