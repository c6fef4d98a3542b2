"""Command-line front end.

Subcommands: validate, gen, ekeland, strong, probe, falsify.  Instances
come either from files (--space/--objective) or from a generator spec
(--gen "n=..,seed=..,family=.."), never both.  Reports are deterministic
JSON; probe traces export as CSV.

Exit codes: 0 all conditions pass, 1 condition failure or counterexample,
2 usage or input error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import serialize
from .oracle import (
    CapExceededError,
    cross_check,
    falsify,
    oracle_ekeland_all,
    oracle_strong_all,
)
from .space import (
    MalformedSpaceError,
    QpmSpace,
    canonical_space,
    generate_random_qpm,
    validate_axioms,
)
from .strong import (
    minimizing_sequence_probe,
    strong_ekeland_georgiev,
    strong_ekeland_suzuki,
)
from .variational import CONDITION_TOL, Objective, ekeland_point, ekeland_point_prime


class UsageError(ValueError):
    pass


def _parse_gen_spec(spec: str) -> dict:
    out: dict = {}
    for item in spec.split(","):
        if not item:
            continue
        if "=" not in item:
            raise UsageError(f"bad generator entry {item!r}; expected key=value")
        key, value = item.split("=", 1)
        try:
            out[key] = int(value)
        except ValueError:
            try:
                out[key] = float(value)
            except ValueError:
                out[key] = value
    return out


def _gen_space(spec: dict) -> QpmSpace:
    family = spec.get("family", "random")
    if family == "random":
        return generate_random_qpm(int(spec.get("n", 8)), int(spec.get("seed", 0)),
                                   zero_density=float(spec.get("zero_density", 0.2)),
                                   scale=float(spec.get("scale", 1.0)))
    params = {k: v for k, v in spec.items() if k not in ("family", "n", "seed", "inf_frac")}
    if family == "directed_cycle":
        params.setdefault("n", int(spec.get("n", 3)))
    return canonical_space(family, **params)


def _gen_objective(space: QpmSpace, seed: int, inf_frac: float = 0.0) -> Objective:
    rng = np.random.default_rng([seed, 1])
    n = len(space.points)
    vals = rng.uniform(0.0, 10.0, size=n)
    mask = rng.random(n) < inf_frac
    mask[int(rng.integers(n))] = False
    return Objective.from_values(
        {p: (math.inf if mask[i] else float(vals[i])) for i, p in enumerate(space.points)})


def _resolve_space(args) -> tuple[QpmSpace, dict | None]:
    if bool(args.space) == bool(args.gen):
        raise UsageError("exactly one of --space and --gen is required")
    if args.space:
        return serialize.load_space(args.space), None
    spec = _parse_gen_spec(args.gen)
    return _gen_space(spec), spec


def _resolve_objective(args, space: QpmSpace, spec: dict | None) -> Objective:
    if getattr(args, "objective", None):
        return serialize.load_objective(args.objective)
    if getattr(args, "objective_formula", None):
        return Objective.from_formula(args.objective_formula)
    if spec is None:
        raise UsageError("need --objective (no generator spec to derive one from)")
    return _gen_objective(space, int(spec.get("seed", 0)),
                          inf_frac=float(spec.get("inf_frac", 0.0)))


def _default_x0(space: QpmSpace, f: Objective) -> str:
    for p in space.points:
        if math.isfinite(f.value(p)):
            return p
    raise UsageError("objective has no finite value on this space")


def _emit(args, payload: dict) -> None:
    if args.out:
        serialize.write_report(args.out, payload)
    else:
        sys.stdout.write(serialize.dumps_report(payload))


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_validate(args) -> int:
    space, _ = _resolve_space(args)
    report = validate_axioms(space, tol=args.tol if args.tol else 1e-12)
    _emit(args, serialize.axiom_report_to_dict(report))
    return 0 if report.ok else 1


def cmd_gen(args) -> int:
    spec = _parse_gen_spec(args.gen)
    space = _gen_space(spec)
    serialize.save_space(args.out or "space.json", space)
    if args.objective_out:
        if not space.is_finite:
            raise UsageError("cannot generate a value table for an implicit space")
        f = _gen_objective(space, int(spec.get("seed", 0)),
                           inf_frac=float(spec.get("inf_frac", 0.0)))
        serialize.save_objective(args.objective_out, f)
    return 0


def cmd_ekeland(args) -> int:
    space, spec = _resolve_space(args)
    f = _resolve_objective(args, space, spec)
    x0 = args.x0 or _default_x0(space, f)
    tol = args.tol or CONDITION_TOL
    if args.lam_prime is not None:
        cert = ekeland_point_prime(space, f, args.lam_prime, x0, eps=args.eps, tol=tol)
    else:
        if args.eps is None or args.lam is None:
            raise UsageError("need --eps and --lambda (or --lambda-prime)")
        cert = ekeland_point(space, f, args.eps, args.lam, x0, tol=tol)
    payload = serialize.ekeland_certificate_to_dict(cert)
    ok = cert.all_pass
    if args.oracle:
        eps = args.eps if args.eps is not None else cert.alpha
        lam = args.lam if args.lam is not None else eps / cert.alpha
        result = oracle_ekeland_all(space, f, eps, lam, x0)
        report = cross_check(cert, result)
        payload["oracle"] = serialize.oracle_result_to_dict(result)
        payload["cross_check"] = {"ok": report.ok, "mismatches": list(report.mismatches)}
        ok = ok and report.ok and bool(result.admissible)
    _emit(args, payload)
    return 0 if ok else 1


def cmd_strong(args) -> int:
    space, spec = _resolve_space(args)
    f = _resolve_objective(args, space, spec)
    x0 = args.x0 or _default_x0(space, f)
    tol = args.tol or CONDITION_TOL
    if args.flavor == "georgiev":
        if args.gamma is None or args.delta is None:
            raise UsageError("georgiev flavor needs --gamma and --delta")
        cert = strong_ekeland_georgiev(space, f, args.gamma, args.delta, x0,
                                       d_order=args.d_order, tol=tol)
        rate = args.gamma
    else:
        if args.lam is None:
            raise UsageError("suzuki flavor needs --lambda")
        cert = strong_ekeland_suzuki(space, f, args.lam, x0,
                                     d_order=args.d_order, tol=tol)
        rate = args.lam
    payload = serialize.strong_certificate_to_dict(cert)
    ok = cert.all_pass and cert.internal_ok
    if args.oracle:
        result = oracle_strong_all(space, f, rate, args.delta, x0,
                                   flavor=args.flavor, d_order=args.d_order)
        report = cross_check(cert, result)
        payload["oracle"] = serialize.oracle_result_to_dict(result)
        payload["cross_check"] = {"ok": report.ok, "mismatches": list(report.mismatches)}
        ok = ok and report.ok and bool(result.admissible)
    if args.probe:
        traces = minimizing_sequence_probe(space, f, rate, cert.z,
                                           trials=args.probe, seed=args.seed,
                                           d_order=args.d_order)
        payload["probe"] = [{"verdict": t.verdict, "witness_index": t.witness_index}
                            for t in traces]
        stem = Path(args.out) if args.out else Path("strong_report.json")
        for k, trace in enumerate(traces):
            serialize.write_trace_csv(stem.with_suffix(f".trace{k}.csv"), trace)
        ok = ok and all(t.verdict == "converges_to_z" for t in traces)
    _emit(args, payload)
    return 0 if ok else 1


def cmd_probe(args) -> int:
    space, spec = _resolve_space(args)
    f = _resolve_objective(args, space, spec)
    z = float(args.z) if not space.is_finite else args.z
    if z is None:
        raise UsageError("probe needs --z")
    traces = minimizing_sequence_probe(space, f, args.gamma, z,
                                       trials=args.trials, horizon=args.horizon,
                                       seed=args.seed, d_order=args.d_order)
    payload = {
        "kind": "probe_report",
        "z": z, "gamma": args.gamma, "trials": args.trials, "horizon": args.horizon,
        "traces": [{"verdict": t.verdict, "witness_index": t.witness_index,
                    "final_g": t.g_values[-1], "final_dist": t.dists[-1]}
                   for t in traces],
    }
    stem = Path(args.out) if args.out else Path("probe_report.json")
    for k, trace in enumerate(traces):
        serialize.write_trace_csv(stem.with_suffix(f".trace{k}.csv"), trace)
    _emit(args, payload)
    return 0 if all(t.verdict == "converges_to_z" for t in traces) else 1


def cmd_falsify(args) -> int:
    report = falsify(family=args.family, budget=args.budget, seed=args.seed,
                     mutate=args.mutate, jobs=args.jobs)
    _emit(args, serialize.falsify_report_to_dict(report))
    return 0 if report.ok else 1


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="quasivar",
        description="Certify Ekeland-type variational principles on "
                    "quasi-pseudometric spaces.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, objective=True):
        p.add_argument("--space", help="space JSON file")
        p.add_argument("--gen", help="generator spec, e.g. n=8,seed=1,family=random")
        if objective:
            p.add_argument("--objective", help="objective JSON file")
            p.add_argument("--objective-formula", dest="objective_formula",
                           help="named objective formula (implicit spaces)")
        p.add_argument("--out", help="report path (defaults to stdout)")
        p.add_argument("--tol", type=float, default=None,
                       help="condition tolerance override")

    p = sub.add_parser("validate", help="check the distance axioms")
    add_common(p, objective=False)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("gen", help="generate a space (and optional objective) file")
    p.add_argument("--gen", required=True)
    p.add_argument("--out", help="space output path (default space.json)")
    p.add_argument("--objective-out", dest="objective_out")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("ekeland", help="run the plain principle solver")
    add_common(p)
    p.add_argument("--eps", type=float)
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--lambda-prime", dest="lam_prime", type=float)
    p.add_argument("--x0")
    p.add_argument("--oracle", action="store_true",
                   help="also enumerate the admissible set and cross-check")
    p.set_defaults(func=cmd_ekeland)

    p = sub.add_parser("strong", help="run a strong-principle solver")
    add_common(p)
    p.add_argument("--flavor", choices=["georgiev", "suzuki"], default="georgiev")
    p.add_argument("--gamma", type=float)
    p.add_argument("--delta", type=float)
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--x0")
    p.add_argument("--oracle", action="store_true")
    p.add_argument("--probe", type=int, default=0,
                   help="export this many minimizing-sequence traces")
    p.add_argument("--d-order", dest="d_order", choices=["proof", "statement"],
                   default="proof")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_strong)

    p = sub.add_parser("probe", help="minimizing-sequence probe around a point")
    add_common(p)
    p.add_argument("--z", required=True)
    p.add_argument("--gamma", type=float, default=0.0)
    p.add_argument("--trials", type=int, default=8)
    p.add_argument("--horizon", type=int, default=64)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--d-order", dest="d_order", choices=["proof", "statement"],
                   default="proof")
    p.set_defaults(func=cmd_probe)

    p = sub.add_parser("falsify", help="random-instance counterexample search")
    p.add_argument("--family", choices=["random", "tied", "probe"], default="random")
    p.add_argument("--budget", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mutate", default=None,
                   help="enable one seeded checker defect (self-test)")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", help="report path (defaults to stdout)")
    p.set_defaults(func=cmd_falsify)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, MalformedSpaceError, CapExceededError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (FileNotFoundError, json.JSONDecodeError, KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
