"""File formats: spaces, objectives, sequences, certificates, reports.

Everything is JSON with a schema_version field, written deterministically
(sorted keys, fixed separators), so identical runs produce byte-identical
files.  Infinite objective values serialize as the token "inf".  Probe
traces export as CSV with header ``n,g_value,dist``.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Any

from .hashing import objective_payload, space_payload
from .oracle import FalsifyReport, OracleResult
from .sequences import PointSeq
from .space import AxiomReport, QpmSpace
from .strong import MinimizingTrace, StrongCertificate
from .variational import ConditionCheck, EkelandCertificate, Objective

SCHEMA_VERSION = 1

#: Index-to-point rules for implicit sequence files.
SEQUENCE_FORMULAS = {
    "harmonic": lambda i, params: 1.0 / (i + 1),
    "arith_ray": lambda i, params: i * params.get("step", 1.0),
}


def _scrub(obj: Any) -> Any:
    """Make a payload strict-JSON safe (inf -> "inf", tuples -> lists)."""
    if isinstance(obj, float) and math.isinf(obj):
        return "inf" if obj > 0 else "-inf"
    if isinstance(obj, dict):
        return {str(k): _scrub(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, set, frozenset)):
        items = sorted(obj) if isinstance(obj, (set, frozenset)) else obj
        return [_scrub(v) for v in items]
    return obj


def dumps_report(payload: dict) -> str:
    body = dict(payload)
    body.setdefault("schema_version", SCHEMA_VERSION)
    return json.dumps(_scrub(body), sort_keys=True, indent=2, allow_nan=False) + "\n"


def write_report(path: str | Path, payload: dict) -> None:
    Path(path).write_text(dumps_report(payload))


# ---------------------------------------------------------------------------
# Spaces
# ---------------------------------------------------------------------------

def space_to_dict(space: QpmSpace) -> dict:
    return {"schema_version": SCHEMA_VERSION, **space_payload(space)}


def space_from_dict(doc: dict) -> QpmSpace:
    if "matrix" in doc:
        return QpmSpace.finite(list(doc["points"]), doc["matrix"])
    if "formula" in doc:
        return QpmSpace.implicit(doc["formula"], **doc.get("params", {}))
    raise ValueError("space document needs either points+matrix or formula")


def save_space(path: str | Path, space: QpmSpace) -> None:
    write_report(path, space_to_dict(space))


def load_space(path: str | Path) -> QpmSpace:
    return space_from_dict(json.loads(Path(path).read_text()))


# ---------------------------------------------------------------------------
# Objectives
# ---------------------------------------------------------------------------

def objective_to_dict(f: Objective) -> dict:
    return {"schema_version": SCHEMA_VERSION, **objective_payload(f)}


def objective_from_dict(doc: dict) -> Objective:
    if "values" in doc:
        values = {k: (math.inf if v == "inf" else float(v))
                  for k, v in doc["values"].items()}
        return Objective.from_values(values)
    if "formula" in doc:
        return Objective.from_formula(doc["formula"])
    raise ValueError("objective document needs either values or formula")


def save_objective(path: str | Path, f: Objective) -> None:
    write_report(path, objective_to_dict(f))


def load_objective(path: str | Path) -> Objective:
    return objective_from_dict(json.loads(Path(path).read_text()))


# ---------------------------------------------------------------------------
# Sequences
# ---------------------------------------------------------------------------

def sequence_to_dict(space: QpmSpace, seq: PointSeq) -> dict:
    if not space.is_finite:
        raise ValueError("only index-based sequences serialize; use a formula file")
    return {"schema_version": SCHEMA_VERSION,
            "indices": [space.index(p) for p in seq.items]}


def sequence_from_dict(space: QpmSpace, doc: dict) -> PointSeq:
    if "indices" in doc:
        return PointSeq(tuple(space.points[i] for i in doc["indices"]))
    if "formula" in doc:
        rule = SEQUENCE_FORMULAS[doc["formula"]]
        params = doc.get("params", {})
        gen = lambda i: rule(i, params)
        return PointSeq.from_generator(gen, int(doc["length"]))
    raise ValueError("sequence document needs either indices or formula+length")


def load_sequence(space: QpmSpace, path: str | Path) -> PointSeq:
    return sequence_from_dict(space, json.loads(Path(path).read_text()))


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------

def axiom_report_to_dict(report: AxiomReport) -> dict:
    return {"kind": "axiom_report", **report.__dict__}


def _condition_to_dict(check: ConditionCheck) -> dict:
    return {"status": check.status, "witness": check.witness}


def ekeland_certificate_to_dict(cert: EkelandCertificate) -> dict:
    return {
        "kind": "ekeland_certificate",
        "z": cert.z, "x0": cert.x0, "alpha": cert.alpha,
        "eps": cert.eps, "lam": cert.lam, "lam_prime": cert.lam_prime,
        "conditions": {k: _condition_to_dict(c) for k, c in cert.conditions.items()},
        "picard_trace": list(cert.picard_trace),
        "instance_hash": cert.instance_hash,
        "all_pass": cert.all_pass,
    }


def strong_certificate_to_dict(cert: StrongCertificate) -> dict:
    return {
        "kind": "strong_certificate",
        "flavor": cert.flavor, "z": cert.z, "x0": cert.x0,
        "gamma": cert.gamma, "delta": cert.delta, "lam": cert.lam,
        "lambda_internal": list(cert.lambda_internal) if cert.lambda_internal else None,
        "restricted_set": list(cert.restricted_set) if cert.restricted_set else None,
        "conditions": {k: _condition_to_dict(c) for k, c in cert.conditions.items()},
        "internal": dict(cert.internal),
        "picard_trace": list(cert.picard_trace),
        "instance_hash": cert.instance_hash,
        "d_order": cert.d_order,
        "all_pass": cert.all_pass,
        "internal_ok": cert.internal_ok,
    }


def oracle_result_to_dict(result: OracleResult) -> dict:
    return {"kind": "oracle_result",
            "admissible": list(result.admissible),
            "per_condition": result.per_condition,
            "instance_hash": result.instance_hash}


def falsify_report_to_dict(report: FalsifyReport) -> dict:
    return {"kind": "falsify_report", "ok": report.ok,
            "counterexample": report.counterexample,
            "checked": report.checked, "notes": list(report.notes)}


def write_trace_csv(path: str | Path, trace: MinimizingTrace) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["n", "g_value", "dist"])
        for n, (g, dist) in enumerate(zip(trace.g_values, trace.dists)):
            writer.writerow([n, repr(float(g)), repr(float(dist))])
