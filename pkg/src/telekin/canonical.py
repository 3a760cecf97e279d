"""Canonical number formatting and JSON emission.

Every float that gets persisted is first rounded to 9 significant decimal
digits.  A 9-digit decimal survives the trip through binary64 and back, so
``canon_float`` is idempotent and parse(serialize(x)) returns bit-identical
floats.  That single rule is what makes whole-file byte stability possible:
identical values always print identically.
"""

from __future__ import annotations

import json
import math
from typing import Any

from telekin.errors import ValidationError

SIG_DIGITS = 9


def canon_float(x: float) -> float:
    if not math.isfinite(x):
        raise ValidationError(f"non-finite number not serializable: {x!r}")
    return float(f"{x:.{SIG_DIGITS}g}")


def canon_value(value: Any) -> Any:
    """Recursively canonicalize floats inside plain JSON-style structures."""
    if isinstance(value, bool) or value is None or isinstance(value, (int, str)):
        return value
    if isinstance(value, float):
        return canon_float(value)
    if isinstance(value, (list, tuple)):
        return [canon_value(v) for v in value]
    if isinstance(value, dict):
        return {k: canon_value(v) for k, v in value.items()}
    raise ValidationError(f"value of type {type(value).__name__} is not serializable")


def dumps(obj: Any) -> str:
    """Compact deterministic JSON: canonical floats, insertion-ordered keys."""
    return json.dumps(canon_value(obj), separators=(",", ":"), ensure_ascii=False)


def dumps_pretty(obj: Any) -> str:
    return json.dumps(canon_value(obj), indent=2, ensure_ascii=False) + "\n"
