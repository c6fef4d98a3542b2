"""Canonical payloads and digests for cross-checking solver and oracle runs.

An instance digest covers the space, the objective, and the parameters that
determine the run, so a certificate can only be cross-checked against an
oracle result computed on the same instance.
"""

from __future__ import annotations

import hashlib
import json
import math
from typing import Any, Mapping

from .space import QpmSpace


def space_payload(space: QpmSpace) -> dict[str, Any]:
    if space.is_finite:
        return {"points": list(space.points),
                "matrix": [[float(v) for v in row] for row in space.matrix]}
    return {"formula": space.formula, "params": dict(space.params)}


def objective_payload(objective) -> dict[str, Any]:
    if objective.values is not None:
        vals = {k: ("inf" if math.isinf(v) else float(v))
                for k, v in objective.values.items()}
        return {"values": dict(sorted(vals.items()))}
    return {"formula": objective.formula or "opaque-callable"}


def instance_digest(space: QpmSpace, objective, params: Mapping[str, Any]) -> str:
    payload = {
        "space": space_payload(space),
        "objective": objective_payload(objective),
        "params": {k: params[k] for k in sorted(params)},
    }
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()
