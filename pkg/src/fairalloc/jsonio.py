"""JSON text formats for instances and allocations.

Instance: ``{"agents": n, "goods": m, "valuations": [[...], ...]}``.
Allocation: ``{"bundles": [[...], ...], "pool": [...]}`` with sorted indices.
"""

from __future__ import annotations

import json
from typing import Union

from .model import Instance, PartialAllocation, ValidationError, allocation, new_instance


def instance_to_json(inst: Instance) -> str:
    payload = {"agents": inst.n, "goods": inst.m, "valuations": [list(r) for r in inst.v]}
    return json.dumps(payload, indent=2) + "\n"


def instance_from_json(text: str) -> Instance:
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"bad instance JSON: {exc}") from exc
    if not isinstance(payload, dict) or "valuations" not in payload:
        raise ValidationError("instance JSON must carry a 'valuations' matrix")
    inst = new_instance(payload["valuations"])
    if "agents" in payload and payload["agents"] != inst.n:
        raise ValidationError("'agents' field disagrees with the matrix")
    if "goods" in payload and payload["goods"] != inst.m:
        raise ValidationError("'goods' field disagrees with the matrix")
    return inst


def allocation_to_json(x: PartialAllocation) -> str:
    payload = {
        "bundles": [sorted(b) for b in x.bundles],
        "pool": sorted(x.pool),
    }
    return json.dumps(payload, indent=2) + "\n"


def allocation_from_json(text: str) -> PartialAllocation:
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"bad allocation JSON: {exc}") from exc
    if not isinstance(payload, dict) or "bundles" not in payload:
        raise ValidationError("allocation JSON must carry a 'bundles' list")
    return allocation(payload["bundles"], payload.get("pool", ()))
