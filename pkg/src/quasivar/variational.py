"""Sublevel-map machinery and the Ekeland point solvers.

The central object is the descent set of a perturbed objective,

    S(x) = { y : f(y) + alpha * d(y, x) <= f(x) },

whose nesting properties drive a deterministic minimization walk: from the
current point, step to the cheapest member of its descent set, and stop
once no member improves f.  On a finite space this terminates after at
most |dom f| strict decreases, and the terminal point z satisfies the
Ekeland conditions, which are then certified one by one with explicit
witnesses on failure.

Two solver entry points exist: ``ekeland_point`` parameterized by
(eps, lam) with perturbation rate eps/lam, and ``ekeland_point_prime``
parameterized by the rate itself.  Given lam_prime = eps/lam they produce
identical certificates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Callable, Mapping

import numpy as np

from . import mutation
from .hashing import instance_digest
from .space import Point, QpmSpace

#: Absolute slack on the defining inequality of descent-set membership.
MEMBERSHIP_TOL = 1e-12
#: Slack for certificate-level comparisons (equalities are relative to
#: max(1, |reference|), inequalities additive).
CONDITION_TOL = 1e-9

#: Objective formulas for implicit spaces (points are nonnegative reals).
OBJECTIVE_FORMULAS: dict[str, Callable[[float], float]] = {
    "x2_exp_decay": lambda x: x * x * math.exp(-x),
    "linear": lambda x: float(x),
    "zero": lambda x: 0.0,
}


def values_close(a: float, b: float, rtol: float = CONDITION_TOL) -> bool:
    """Equality up to ``rtol`` relative to max(1, |b|); exact for infinities."""
    if math.isinf(a) or math.isinf(b):
        return a == b
    return abs(a - b) <= rtol * max(1.0, abs(b))


# ---------------------------------------------------------------------------
# Objectives
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Objective:
    """Extended-real-valued function on points; +inf marks points outside dom.

    Finite spaces use an explicit ``values`` map (every point id must be
    covered; ``math.inf`` is the distinguished infinite value).  Implicit
    spaces use a callable, normally named by ``formula`` from
    :data:`OBJECTIVE_FORMULAS`.
    """

    values: Mapping[str, float] | None = None
    func: Callable[[float], float] | None = None
    formula: str | None = None

    def __post_init__(self):
        if (self.values is None) == (self.func is None):
            raise ValueError("exactly one of values/func must be given")
        if self.values is not None:
            vals = dict(self.values)
            if any(v < math.inf and not math.isfinite(v) for v in vals.values()):
                raise ValueError("objective values must be finite or +inf")
            if all(math.isinf(v) for v in vals.values()):
                raise ValueError("objective is improper: no finite value")
            object.__setattr__(self, "values", vals)

    @classmethod
    def from_values(cls, values: Mapping[str, float]) -> "Objective":
        return cls(values=values)

    @classmethod
    def from_formula(cls, name: str) -> "Objective":
        return cls(func=OBJECTIVE_FORMULAS[name], formula=name)

    def value(self, x: Point) -> float:
        if self.values is not None:
            try:
                return self.values[x]  # type: ignore[index]
            except KeyError:
                raise KeyError(f"objective has no value for point {x!r}") from None
        return float(self.func(float(x)))

    def as_array(self, space: QpmSpace) -> np.ndarray:
        return np.asarray([self.value(p) for p in space.points], dtype=float)

    def dom_ids(self, space: QpmSpace) -> tuple[str, ...]:
        return tuple(p for p in space.points if math.isfinite(self.value(p)))

    def inf_value(self, space: QpmSpace) -> float:
        """Greatest lower bound over a finite space (always attained)."""
        fv = self.as_array(space)
        finite = fv[np.isfinite(fv)]
        if finite.size == 0:
            raise ValueError("objective is improper on this space")
        return float(finite.min())

    def restrict(self, ids) -> "Objective":
        if self.values is None:
            raise ValueError("cannot restrict a formula-backed objective")
        keep = set(ids)
        return Objective(values={k: v for k, v in self.values.items() if k in keep})


# ---------------------------------------------------------------------------
# Sublevel sets
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SublevelSet:
    base: str
    alpha: float
    members: frozenset[str]


def sublevel_bitmap(space: QpmSpace, fv: np.ndarray, alpha: float,
                    mtol: float = MEMBERSHIP_TOL) -> np.ndarray:
    """Bool matrix S with S[y, x] true iff f(y) + alpha*d(y, x) <= f(x).

    Columns with f(x) = +inf come out all-true (inf <= inf), matching the
    convention that the descent set of an infinite point is the whole space.
    """
    return fv[:, None] + alpha * space.matrix <= fv[None, :] + mtol


def sublevel_set(space: QpmSpace, f: Objective, alpha: float, x: str) -> SublevelSet:
    """Exact membership by evaluation; alpha must be positive."""
    space._require_finite("sublevel_set")
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    fv = f.as_array(space)
    col = sublevel_bitmap(space, fv, alpha)[:, space.index(x)]
    return SublevelSet(base=x, alpha=alpha,
                       members=frozenset(space.points[i] for i in np.flatnonzero(col)))


@dataclass(frozen=True)
class SublevelPropertyReport:
    ok: bool
    failed_property: str | None
    witness: dict | None
    checked: int


def check_sublevel_properties(space: QpmSpace, f: Objective, alpha: float,
                              tol: float = CONDITION_TOL) -> SublevelPropertyReport:
    """Verify the descent-set proposition on every finite-valued base point.

    Checked for each x in dom f (strict inequalities carry additive slack
    ``tol``; a failure is an implementation-bug witness, not expected data):

      contains_base_and_in_dom  x in S(x) and S(x) subset of dom f
      monotone_nesting          y in S(x) implies f(y) <= f(x) and S(y) subset of S(x)
      strict_descent_off_closure  y in S(x), d(y,x) > 0 implies f(y) < f(x)
      infimum_gap               S(x) leaves the closure of {x} implies f(x) > inf f(S(x))
      closed_when_lsc           if f is lsc (d(w,y)=0 implies f(w) <= f(y)),
                                every S(x) is closed
    """
    space._require_finite("check_sublevel_properties")
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    fv = f.as_array(space)
    d = space.matrix
    s = sublevel_bitmap(space, fv, alpha)
    dom = np.flatnonzero(np.isfinite(fv))
    pts = space.points
    checked = 0

    def fail(prop, **witness):
        return SublevelPropertyReport(False, prop, witness, checked)

    for x in dom:
        checked += 1
        col = s[:, x]
        members = np.flatnonzero(col)
        if not col[x]:
            return fail("contains_base_and_in_dom", x=pts[x])
        if not np.isfinite(fv[members]).all():
            y = members[~np.isfinite(fv[members])][0]
            return fail("contains_base_and_in_dom", x=pts[x], y=pts[int(y)])

        high = members[fv[members] >= fv[x] + tol]
        if high.size:
            return fail("monotone_nesting", x=pts[x], y=pts[int(high[0])],
                        f_y=float(fv[high[0]]), f_x=float(fv[x]))
        escape = s[:, members] & ~col[:, None]
        if escape.any():
            w, j = map(int, np.argwhere(escape)[0])
            return fail("monotone_nesting", x=pts[x], y=pts[int(members[j])], w=pts[w])

        off_closure = members[d[members, x] > 0]
        bad = off_closure[fv[off_closure] >= fv[x] + tol]
        if bad.size:
            return fail("strict_descent_off_closure", x=pts[x], y=pts[int(bad[0])])

        if off_closure.size and not fv[x] > fv[members].min() - tol:
            return fail("infimum_gap", x=pts[x], inf_sublevel=float(fv[members].min()))

    zero_pairs = d == 0
    lsc = bool((fv[:, None] <= fv[None, :] + MEMBERSHIP_TOL)[zero_pairs].all())
    if lsc:
        closure_hull = (zero_pairs.astype(np.int8) @ s.astype(np.int8)) > 0
        leaking = closure_hull & ~s
        if leaking.any():
            w, x = map(int, np.argwhere(leaking)[0])
            return fail("closed_when_lsc", x=pts[x], w=pts[w])

    return SublevelPropertyReport(True, None, None, checked)


# ---------------------------------------------------------------------------
# Deterministic descent walk
# ---------------------------------------------------------------------------

def picard_sequence(space: QpmSpace, f: Objective, alpha: float, x0: str,
                    eps_schedule=None, max_iter: int | None = None
                    ) -> tuple[tuple[str, ...], str]:
    """Iterate x_{n+1} = argmin of f over the descent set of x_n.

    Ties break to the lowest point index.  Stops at the first iterate whose
    descent set offers no strictly smaller value; that point z then
    satisfies f(y) = f(z) = inf f(S(z)) for every member y, and every such
    member's own descent set collapses into its closure.  ``eps_schedule``
    is accepted for near-infimal selection on non-finite extensions and is
    ignored here, where minimization is exact.

    Returns (trace, z) with trace[0] = x0 and trace[-1] = z.
    """
    space._require_finite("picard_sequence")
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    fv = f.as_array(space)
    cur = space.index(x0)
    if not math.isfinite(fv[cur]):
        raise ValueError(f"starting point {x0!r} is not in dom f")
    rate = 2.0 * alpha if mutation.is_active(mutation.PICARD_RATE_DOUBLED) else alpha
    s = sublevel_bitmap(space, fv, rate)
    trace = [x0]
    cap = max_iter if max_iter is not None else len(space.points) + 2
    for _ in range(cap):
        members = np.flatnonzero(s[:, cur])
        if mutation.is_active(mutation.PICARD_ARGMAX):
            best = int(members[np.argmax(fv[members])])
        else:
            best = int(members[np.argmin(fv[members])])
        if fv[best] < fv[cur]:
            cur = best
            trace.append(space.points[cur])
            continue
        _assert_terminal(space, fv, s, cur, alpha)
        return tuple(trace), space.points[cur]
    raise RuntimeError(
        "descent walk exceeded its iteration cap; impossible on a finite space")


def _assert_terminal(space: QpmSpace, fv: np.ndarray, s: np.ndarray, z: int,
                     alpha: float) -> None:
    """Safety net: the no-improvement point must be a genuine fixed point."""
    if mutation.active() is not None:
        return
    members = np.flatnonzero(s[:, z])
    flat_spread = CONDITION_TOL * max(1.0, abs(fv[z]))
    if not np.all(np.abs(fv[members] - fv[z]) <= flat_spread):
        raise RuntimeError("internal error: terminal descent set is not f-flat")
    # members within the flat spread can sit at most this far apart
    closure_tol = (2.0 * flat_spread + MEMBERSHIP_TOL) / alpha + MEMBERSHIP_TOL
    for y in members:
        inner = np.flatnonzero(s[:, y])
        if not np.all(space.matrix[inner, y] <= closure_tol):
            raise RuntimeError("internal error: terminal member keeps a descent direction")


# ---------------------------------------------------------------------------
# Certificates
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConditionCheck:
    status: str  # "pass" | "fail" | "not_applicable"
    witness: dict | None = None

    @property
    def passed(self) -> bool:
        return self.status != "fail"


def _check_pass(ok: bool, **witness) -> ConditionCheck:
    return ConditionCheck("pass") if ok else ConditionCheck("fail", witness)


@dataclass(frozen=True)
class EkelandCertificate:
    """A candidate point plus per-condition verdicts with failure witnesses.

    Conditions, with g the perturbation rate ``alpha``:
      i    f(z) + g*d(z, x0) <= f(x0)
      ii   f(y) = f(z) for every y in S(z)
      iii  f(z) < f(x) + g*d(x, z) for every x outside S(z)
      iv   (only when eps is given and f(x0) <= eps + inf f)
           d(z, x0) <= bound, bound = lam or eps/lam_prime
    """

    z: str
    x0: str
    alpha: float
    eps: float | None
    lam: float | None
    lam_prime: float | None
    cond_i: ConditionCheck
    cond_ii: ConditionCheck
    cond_iii: ConditionCheck
    cond_iv: ConditionCheck
    picard_trace: tuple[str, ...]
    instance_hash: str

    @property
    def conditions(self) -> dict[str, ConditionCheck]:
        return {"i": self.cond_i, "ii": self.cond_ii, "iii": self.cond_iii,
                "iv": self.cond_iv}

    @property
    def all_pass(self) -> bool:
        return all(c.passed for c in self.conditions.values())


def certify_ekeland_conditions(space: QpmSpace, f: Objective, alpha: float,
                               z: str, x0: str, eps: float | None,
                               iv_bound: float | None,
                               tol: float = CONDITION_TOL):
    """Evaluate the four conditions for an already chosen z."""
    fv = f.as_array(space)
    d = space.matrix
    zi, x0i = space.index(z), space.index(x0)

    d_z_x0 = d[x0i, zi] if mutation.is_active(mutation.CERT_I_SWAPPED_DISTANCE) else d[zi, x0i]
    lhs = fv[zi] + alpha * d_z_x0
    cond_i = _check_pass(lhs <= fv[x0i] + tol, lhs=float(lhs), rhs=float(fv[x0i]))

    member = fv + alpha * d[:, zi] <= fv[zi] + MEMBERSHIP_TOL

    cond_ii = ConditionCheck("pass")
    for y in np.flatnonzero(member):
        if not values_close(fv[y], fv[zi], tol):
            cond_ii = ConditionCheck("fail", {"y": space.points[y],
                                              "f_y": float(fv[y]), "f_z": float(fv[zi])})
            break

    cond_iii = ConditionCheck("pass")
    for x in np.flatnonzero(~member):
        if not fv[zi] < fv[x] + alpha * d[x, zi] + tol:
            cond_iii = ConditionCheck("fail", {"x": space.points[x],
                                               "lhs": float(fv[zi]),
                                               "rhs": float(fv[x] + alpha * d[x, zi])})
            break

    if eps is None or iv_bound is None:
        cond_iv = ConditionCheck("not_applicable")
    else:
        inf_f = f.inf_value(space)
        if fv[x0i] <= eps + inf_f:
            cond_iv = _check_pass(d[zi, x0i] <= iv_bound + tol,
                                  dist=float(d[zi, x0i]), bound=float(iv_bound))
        else:
            cond_iv = ConditionCheck("not_applicable")
    return cond_i, cond_ii, cond_iii, cond_iv


def ekeland_point(space: QpmSpace, f: Objective, eps: float, lam: float,
                  x0: str, tol: float = CONDITION_TOL) -> EkelandCertificate:
    """Run the descent walk at rate eps/lam from x0 and certify the result.

    Finite spaces are sequentially right K-complete, so hypotheses beyond
    x0 in dom f are automatic.
    """
    if eps <= 0 or lam <= 0:
        raise ValueError("eps and lam must be positive")
    alpha = eps / lam
    trace, z = picard_sequence(space, f, alpha, x0)
    ci, cii, ciii, civ = certify_ekeland_conditions(space, f, alpha, z, x0,
                                                    eps=eps, iv_bound=lam, tol=tol)
    digest = instance_digest(space, f, {"op": "ekeland", "alpha": alpha, "x0": x0})
    return EkelandCertificate(z=z, x0=x0, alpha=alpha, eps=eps, lam=lam,
                              lam_prime=None, cond_i=ci, cond_ii=cii,
                              cond_iii=ciii, cond_iv=civ, picard_trace=trace,
                              instance_hash=digest)


def ekeland_point_prime(space: QpmSpace, f: Objective, lam_prime: float,
                        x0: str, eps: float | None = None,
                        tol: float = CONDITION_TOL) -> EkelandCertificate:
    """Same solver parameterized by the perturbation rate directly.

    With lam_prime = eps/lam this produces the same z and flags as
    :func:`ekeland_point`; the localization bound becomes eps/lam_prime and
    is only certified when ``eps`` is supplied.
    """
    if lam_prime <= 0:
        raise ValueError("lam_prime must be positive")
    if eps is not None and eps <= 0:
        raise ValueError("eps must be positive when given")
    trace, z = picard_sequence(space, f, lam_prime, x0)
    bound = eps / lam_prime if eps is not None else None
    ci, cii, ciii, civ = certify_ekeland_conditions(space, f, lam_prime, z, x0,
                                                    eps=eps, iv_bound=bound, tol=tol)
    digest = instance_digest(space, f, {"op": "ekeland", "alpha": lam_prime, "x0": x0})
    return EkelandCertificate(z=z, x0=x0, alpha=lam_prime, eps=eps, lam=None,
                              lam_prime=lam_prime, cond_i=ci, cond_ii=cii,
                              cond_iii=ciii, cond_iv=civ, picard_trace=trace,
                              instance_hash=digest)
