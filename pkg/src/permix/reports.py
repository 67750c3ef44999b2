"""Canonical report serialisation.

Reports are plain dicts rendered as sorted-key JSON with a trailing
newline, so identical runs produce byte-identical files. Fractions render
as "num/den" strings; floats use repr via the json module (shortest
round-trip form), which is deterministic for a deterministic computation.
"""

from __future__ import annotations

import json
from fractions import Fraction
from typing import Any


def jsonable(obj: Any) -> Any:
    """Recursively convert report values to JSON-compatible types."""
    if isinstance(obj, Fraction):
        return f"{obj.numerator}/{obj.denominator}"
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if hasattr(obj, "to_json"):
        return jsonable(obj.to_json())
    if isinstance(obj, (bool, int, str)) or obj is None:
        return obj
    if isinstance(obj, float):
        return obj
    if hasattr(obj, "item"):  # numpy scalars
        return obj.item()
    raise TypeError(f"value {obj!r} has no report form")


def canonical_json(obj: Any) -> str:
    return json.dumps(jsonable(obj), sort_keys=True, separators=(",", ": "), indent=1) + "\n"


def experiment_report(
    params: dict[str, Any],
    mode: str,
    value: Any,
    *,
    seed: int | None = None,
    trials: int | None = None,
    ci95: tuple[float, float] | None = None,
    extra: dict[str, Any] | None = None,
) -> dict:
    """Standard experiment envelope: params, mode, value, optional MC fields."""
    out: dict[str, Any] = {"params": params, "mode": mode, "value": value}
    if seed is not None:
        out["seed"] = seed
    if trials is not None:
        out["trials"] = trials
    if ci95 is not None:
        out["ci95"] = [ci95[0], ci95[1]]
    if extra:
        out.update(extra)
    return out
