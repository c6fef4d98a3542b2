"""Brute-force ground truth on finite spaces.

For every candidate point the oracle evaluates each theorem condition by
direct enumeration, independently of the solvers, yielding the full
admissible set.  Cross-checking asserts that a solver certificate lands
inside that set with matching per-condition flags.  The falsifier drives
both sides over random instances hunting for disagreement: with clean code
it must find nothing (the conditions are theorem conclusions on finite
spaces), and with any seeded mutation it must find a counterexample,
guarding the suite against vacuous passes.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import mutation
from .hashing import instance_digest
from .space import QpmSpace, generate_random_qpm
from .strong import strong_ekeland_georgiev, strong_ekeland_suzuki
from .variational import (
    CONDITION_TOL,
    MEMBERSHIP_TOL,
    Objective,
    ekeland_point,
    ekeland_point_prime,
)

DEFAULT_CAP = 64


class CapExceededError(RuntimeError):
    """Instance too large for exhaustive enumeration."""


class InstanceMismatchError(ValueError):
    """Certificate and oracle result come from different instances."""


@dataclass(frozen=True)
class OracleResult:
    admissible: tuple[str, ...]
    per_condition: dict[str, dict[str, str]]
    instance_hash: str


def _close(a: float, b: float, rtol: float = CONDITION_TOL) -> bool:
    if math.isinf(a) or math.isinf(b):
        return a == b
    return abs(a - b) <= rtol * max(1.0, abs(b))


def _flag(ok: bool) -> str:
    return "pass" if ok else "fail"


def _require_cap(space: QpmSpace, cap: int):
    space._require_finite("oracle enumeration")
    if len(space.points) > cap:
        raise CapExceededError(f"{len(space.points)} points exceeds cap {cap}")


def oracle_ekeland_all(space: QpmSpace, f: Objective, eps: float, lam: float,
                       x0: str, cap: int = DEFAULT_CAP) -> OracleResult:
    """Every z tested against the plain-principle conditions by enumeration."""
    _require_cap(space, cap)
    alpha = eps / lam
    fv = f.as_array(space)
    d = space.matrix
    x0i = space.index(x0)
    inf_f = float(fv[np.isfinite(fv)].min())
    applicable = fv[x0i] <= eps + inf_f

    per_condition: dict[str, dict[str, str]] = {}
    admissible = []
    for zi, z in enumerate(space.points):
        member = fv + alpha * d[:, zi] <= fv[zi] + MEMBERSHIP_TOL
        flags = {
            "i": _flag(fv[zi] + alpha * d[zi, x0i] <= fv[x0i] + CONDITION_TOL),
            "ii": _flag(all(_close(fv[y], fv[zi]) for y in np.flatnonzero(member))),
            "iii": _flag(all(fv[zi] < fv[x] + alpha * d[x, zi] + CONDITION_TOL
                             for x in np.flatnonzero(~member))),
            "iv": (_flag(d[zi, x0i] <= lam + CONDITION_TOL)
                   if applicable else "not_applicable"),
        }
        per_condition[z] = flags
        if all(v != "fail" for v in flags.values()):
            admissible.append(z)

    digest = instance_digest(space, f, {"op": "ekeland", "alpha": alpha, "x0": x0})
    return OracleResult(tuple(admissible), per_condition, digest)


def oracle_strong_all(space: QpmSpace, f: Objective, gamma: float,
                      delta: float | None, x0: str, flavor: str = "georgiev",
                      d_order: str = "proof", cap: int = DEFAULT_CAP) -> OracleResult:
    """Every z tested against the strong conditions (slack flavor or not)."""
    _require_cap(space, cap)
    if flavor not in ("georgiev", "suzuki"):
        raise ValueError(f"unknown flavor {flavor!r}")
    if flavor == "georgiev" and delta is None:
        raise ValueError("the georgiev flavor needs a slack delta")
    fv = f.as_array(space)
    d = space.matrix
    x0i = space.index(x0)
    slack = delta if flavor == "georgiev" else 0.0
    keys = ("a", "b", "c", "d") if flavor == "georgiev" else ("i", "ii", "iii", "iv")

    per_condition: dict[str, dict[str, str]] = {}
    admissible = []
    for zi, z in enumerate(space.points):
        member = fv + gamma * d[:, zi] <= fv[zi] + MEMBERSHIP_TOL
        prem_dist = d[:, zi] if d_order == "proof" else d[zi, :]
        g = fv + gamma * prem_dist
        strong_ok = all(d[y, zi] <= MEMBERSHIP_TOL
                        for y in range(len(fv)) if _close(g[y], fv[zi]))
        flags = dict(zip(keys, (
            _flag(fv[zi] + gamma * d[zi, x0i] <= fv[x0i] + slack + CONDITION_TOL),
            _flag(all(_close(fv[y], fv[zi]) for y in np.flatnonzero(member))),
            _flag(all(fv[zi] < fv[x] + gamma * d[x, zi] + CONDITION_TOL
                      for x in np.flatnonzero(~member))),
            _flag(strong_ok),
        )))
        per_condition[z] = flags
        if all(v != "fail" for v in flags.values()):
            admissible.append(z)

    params = {"op": "strong", "flavor": flavor, "x0": x0, "d_order": d_order}
    params.update({"gamma": gamma, "delta": delta} if flavor == "georgiev"
                  else {"lam": gamma})
    return OracleResult(tuple(admissible), per_condition,
                        instance_digest(space, f, params))


@dataclass(frozen=True)
class CrossCheckReport:
    ok: bool
    mismatches: tuple[dict, ...]


def cross_check(cert, oracle: OracleResult) -> CrossCheckReport:
    """Certificate z must be admissible with flags agreeing condition-wise."""
    if cert.instance_hash != oracle.instance_hash:
        raise InstanceMismatchError("certificate and oracle hash different instances")
    mismatches = []
    if cert.z not in oracle.admissible:
        mismatches.append({"kind": "z_not_admissible", "z": cert.z,
                           "oracle_flags": oracle.per_condition.get(cert.z)})
    oracle_flags = oracle.per_condition.get(cert.z, {})
    for key, check in cert.conditions.items():
        if key in oracle_flags and check.status != oracle_flags[key]:
            mismatches.append({"kind": "flag_mismatch", "condition": key,
                               "certificate": check.status,
                               "certificate_witness": check.witness,
                               "oracle": oracle_flags[key]})
    return CrossCheckReport(not mismatches, tuple(mismatches))


# ---------------------------------------------------------------------------
# Random instances and the falsifier
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RandomInstance:
    space: QpmSpace
    objective: Objective
    eps: float
    lam: float
    gamma: float
    delta: float
    x0: str


def random_instance(seed, n_range=(3, 12), zero_density: float = 0.3,
                    inf_frac: float = 0.1, value_style: str = "uniform",
                    param_range=(0.2, 3.0), scale: float = 1.0) -> RandomInstance:
    """Seeded (space, objective, parameters, start point) tuple.

    ``value_style`` "uniform" draws objective values from a continuum;
    "tied" draws from a coarse grid so exact value ties (and zero-distance
    duplicates from the generator) occur routinely.
    """
    rng = np.random.default_rng(seed)
    n = int(rng.integers(n_range[0], n_range[1] + 1))
    space = generate_random_qpm(n, seed=int(rng.integers(2 ** 31)),
                                zero_density=zero_density, scale=scale)
    if value_style == "tied":
        vals = rng.choice([0.0, 0.5, 1.0, 1.5, 2.0], size=n)
    else:
        vals = rng.uniform(0.0, 10.0, size=n)
    inf_mask = rng.random(n) < inf_frac
    inf_mask[int(rng.integers(n))] = False  # keep the objective proper
    values = {p: (math.inf if inf_mask[i] else float(vals[i]))
              for i, p in enumerate(space.points)}
    objective = Objective.from_values(values)
    dom = [p for p, v in values.items() if math.isfinite(v)]
    lo, hi = param_range
    return RandomInstance(
        space=space, objective=objective,
        eps=float(rng.uniform(lo, hi)), lam=float(rng.uniform(lo, hi)),
        gamma=float(rng.uniform(lo, hi)), delta=float(rng.uniform(lo, hi)),
        x0=dom[int(rng.integers(len(dom)))])


@dataclass(frozen=True)
class FalsifyReport:
    counterexample: dict | None
    checked: int
    notes: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return self.counterexample is None


def _check_one_instance(inst: RandomInstance, index: int) -> dict | None:
    """Full solver-vs-oracle pipeline on one instance; None when consistent."""
    def bad(stage: str, **detail):
        return {"instance": index, "stage": stage, **detail}

    cert = ekeland_point(inst.space, inst.objective, inst.eps, inst.lam, inst.x0)
    if not cert.all_pass:
        return bad("ekeland_certificate", conditions={
            k: c.status for k, c in cert.conditions.items()})
    result = oracle_ekeland_all(inst.space, inst.objective, inst.eps, inst.lam, inst.x0)
    if not result.admissible:
        return bad("ekeland_admissible_empty")
    report = cross_check(cert, result)
    if not report.ok:
        return bad("ekeland_cross_check", mismatches=list(report.mismatches))

    prime = ekeland_point_prime(inst.space, inst.objective, inst.eps / inst.lam,
                                inst.x0, eps=inst.eps)
    if prime.z != cert.z or any(prime.conditions[k].status != cert.conditions[k].status
                                for k in cert.conditions):
        return bad("substitution_coherence", z=cert.z, z_prime=prime.z)

    geo = strong_ekeland_georgiev(inst.space, inst.objective, inst.gamma,
                                  inst.delta, inst.x0)
    if not geo.all_pass or not geo.internal_ok:
        return bad("georgiev_certificate",
                   conditions={k: c.status for k, c in geo.conditions.items()},
                   internal=geo.internal)
    geo_oracle = oracle_strong_all(inst.space, inst.objective, inst.gamma,
                                   inst.delta, inst.x0, flavor="georgiev")
    if not geo_oracle.admissible:
        return bad("georgiev_admissible_empty")
    report = cross_check(geo, geo_oracle)
    if not report.ok:
        return bad("georgiev_cross_check", mismatches=list(report.mismatches))

    suz = strong_ekeland_suzuki(inst.space, inst.objective, inst.gamma, inst.x0)
    if not suz.all_pass:
        return bad("suzuki_certificate", conditions={
            k: c.status for k, c in suz.conditions.items()})
    suz_oracle = oracle_strong_all(inst.space, inst.objective, inst.gamma,
                                   None, inst.x0, flavor="suzuki")
    if not suz_oracle.admissible:
        return bad("suzuki_admissible_empty")
    report = cross_check(suz, suz_oracle)
    if not report.ok:
        return bad("suzuki_cross_check", mismatches=list(report.mismatches))
    return None


def _probe_notes(budget: int, seed: int) -> list[str]:
    """Descriptive probes; observations only, no ground-truth claims."""
    from .sequences import PointSeq, classify_cauchy, classify_convergence
    from .space import canonical_space
    from .strong import minimizing_sequence_probe

    notes = []
    ray = canonical_space("metric_ray", step=1.0)
    f = Objective.from_formula("x2_exp_decay")
    traces = minimizing_sequence_probe(ray, f, gamma=0.0, z=0.0, trials=4,
                                       horizon=48, seed=seed)
    diverging = sum(t.verdict == "diverges" for t in traces)
    notes.append(
        f"unbounded-ray probe: {diverging}/{len(traces)} minimizing traces for the "
        "rise-then-decay objective leave the strict minimum, so the strict minimum "
        "is not strong on the implicit ray (no claim about general hypotheses)")

    found = None
    for k in range(min(budget, 200)):
        space = generate_random_qpm(int(5 + k % 6), seed=seed * 7919 + k,
                                    zero_density=0.35)
        d = space.matrix
        for xi in range(len(space.points)):
            zero_row = np.flatnonzero((d[xi, :] == 0))
            pair = [(a, b) for a in zero_row for b in zero_row
                    if a != b and d[a, b] > 0.25]
            if pair:
                a, b = pair[0]
                seq = PointSeq(tuple(space.points[a] if i % 2 == 0 else space.points[b]
                                     for i in range(48)))
                conv = classify_convergence(space, seq, [space.points[xi]], tol=0.0)
                cauchy = classify_cauchy(space, seq)
                if space.points[xi] in conv.d_limits and cauchy.left_k_cauchy == "no":
                    found = (k, space.points[xi], space.points[a], space.points[b])
                    break
        if found:
            break
    if found:
        notes.append(
            "separation probe: instance %d has a sequence forward-converging to %r "
            "that is not left K-Cauchy (alternating %r, %r)" % found)
    else:
        notes.append("separation probe: no forward-convergent non-left-K-Cauchy "
                     "example found within budget")
    return notes


def falsify(family: str = "random", budget: int = 1000, seed: int = 0,
            mutate: str | None = None, jobs: int = 1) -> FalsifyReport:
    """Search random instances for solver/oracle disagreement.

    Families: "random" (continuum objective values), "tied" (grid values,
    rich in exact ties), "probe" (descriptive-only explorations; never
    yields a counterexample).  ``mutate`` enables one seeded defect for the
    duration of the search.  Always terminates within budget; instances are
    seeded by index so results merge deterministically regardless of
    ``jobs``.
    """
    if family == "probe":
        return FalsifyReport(None, 0, tuple(_probe_notes(budget, seed)))
    if family not in ("random", "tied"):
        raise ValueError(f"unknown family {family!r}")
    style = "tied" if family == "tied" else "uniform"

    def run(index: int) -> dict | None:
        inst = random_instance([seed, index], value_style=style)
        try:
            return _check_one_instance(inst, index)
        except Exception as exc:  # a crash under mutation is also a finding
            return {"instance": index, "stage": "exception", "error": repr(exc)}

    counterexample = None
    checked = 0
    with mutation.enabled(mutate):
        if jobs <= 1:
            for index in range(budget):
                checked += 1
                counterexample = run(index)
                if counterexample:
                    break
        else:
            with ThreadPoolExecutor(max_workers=jobs) as pool:
                for start in range(0, budget, jobs):
                    block = range(start, min(start + jobs, budget))
                    results = list(pool.map(run, block))
                    checked += len(results)
                    hit = next((r for r in results if r), None)
                    if hit:
                        counterexample = hit
                        break
    return FalsifyReport(counterexample, checked, ())
