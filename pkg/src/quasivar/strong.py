"""Strong Ekeland constructions: restriction-based and compactness-based.

Both produce a point z whose perturbed objective g(x) = f(x) + gamma*d(x, z)
has z not merely as a strict minimum but as a strong one: any sequence
driving g down to f(z) must collapse onto z in distance.  On a finite space
that property has an exact characterization -- every g-tie of f(z) must sit
at distance zero from z -- which is validated here against direct sequence
simulation.

The restriction construction first confines the search to the band
X0 = {y : f(y) <= f(x0) + delta}, picks an interpolation weight whose
slack equation saturates delta, and runs the plain solver at the reduced
rate (1 - weight) * gamma.  The compactness-flavored construction runs the
plain solver at the given rate on the whole space; on finite spaces its
subsequence hypothesis holds by pigeonhole.

Distance-argument order: theorem-style statements of the strong-minimum
condition sometimes write the premise with the distance reversed.  Every
check here takes ``d_order``: "proof" uses g(x) = f(x) + gamma*d(x, z)
(the default, matching the descent-set functional), "statement" uses
gamma*d(z, x) in the premise.  The conclusion is always d(x_n, z) -> 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import mutation
from .hashing import instance_digest
from .sequences import PointSeq, classify_convergence, random_right_k_cauchy_prefix
from .space import Point, QpmSpace
from .variational import (
    CONDITION_TOL,
    MEMBERSHIP_TOL,
    ConditionCheck,
    Objective,
    certify_ekeland_conditions,
    ekeland_point_prime,
    sublevel_bitmap,
    values_close,
)

#: Conclusion tolerance: a "distance zero" tie may sit this far from z.
DIST_TOL = 1e-9
_SLACK_FLOOR = 1e-12


@dataclass(frozen=True)
class StrongCertificate:
    """Certificate for either strong construction.

    ``conditions`` is keyed "a".."d" for the restriction flavor and
    "i".."iv" for the compactness flavor; the last key is always the
    strong-minimum condition.  ``internal`` records the construction's own
    consistency checks (weight equation, rate ordering, set nesting,
    restricted infimum); these are implementation guards, not theorem
    conclusions.
    """

    flavor: str
    z: str
    x0: str
    gamma: float | None
    delta: float | None
    lam: float | None
    lambda_internal: tuple[float, float] | None
    restricted_set: tuple[str, ...] | None
    conditions: dict[str, ConditionCheck]
    internal: dict[str, bool]
    picard_trace: tuple[str, ...]
    instance_hash: str
    d_order: str

    @property
    def all_pass(self) -> bool:
        return all(c.passed for c in self.conditions.values())

    @property
    def internal_ok(self) -> bool:
        return all(self.internal.values())


def _g_array(space: QpmSpace, fv: np.ndarray, gamma: float, zi: int,
             d_order: str) -> np.ndarray:
    if d_order == "proof":
        return fv + gamma * space.matrix[:, zi]
    if d_order == "statement":
        return fv + gamma * space.matrix[zi, :]
    raise ValueError(f"d_order must be 'proof' or 'statement', got {d_order!r}")


def check_strong_min_finite(space: QpmSpace, f: Objective, gamma: float,
                            z: str, d_order: str = "proof",
                            rtol: float = CONDITION_TOL) -> ConditionCheck:
    """Finite characterization of the strong-minimum condition at z.

    Holds iff every y whose perturbed value f(y) + gamma*d(y, z) ties f(z)
    (within ``rtol`` relative) satisfies d(y, z) = 0.  On a finite space
    this is equivalent to the sequence formulation: perturbed values take
    finitely many levels, so a sequence converging to f(z) eventually sits
    exactly on the tie set.
    """
    space._require_finite("check_strong_min_finite")
    if gamma < 0:
        raise ValueError("gamma must be nonnegative")
    fv = f.as_array(space)
    zi = space.index(z)
    fz = fv[zi]

    if mutation.is_active(mutation.STRONGMIN_ANY_TIE):
        for y in range(len(space.points)):
            if y != zi and values_close(fv[y], fz, rtol):
                return ConditionCheck("fail", {"y": space.points[y]})
        return ConditionCheck("pass")

    g = _g_array(space, fv, gamma, zi, d_order)
    for y in range(len(space.points)):
        if values_close(g[y], fz, rtol) and space.matrix[y, zi] > MEMBERSHIP_TOL:
            return ConditionCheck("fail", {"y": space.points[y],
                                           "g_y": float(g[y]), "f_z": float(fz),
                                           "dist": float(space.matrix[y, zi])})
    return ConditionCheck("pass")


# ---------------------------------------------------------------------------
# The two constructions
# ---------------------------------------------------------------------------

def strong_ekeland_georgiev(space: QpmSpace, f: Objective, gamma: float,
                            delta: float, x0: str, d_order: str = "proof",
                            tol: float = CONDITION_TOL) -> StrongCertificate:
    """Restriction construction with slack delta.

    Builds the band X0 = {y : f(y) <= f(x0) + delta}, chooses the weight
    lam = delta / (delta + (f(x0) - inf f)) so that lam/(1-lam) times the
    initial gap equals delta exactly (lam = 1/2 when the gap is zero), and
    runs the plain solver on the restricted space at rate (1-lam)*gamma.

    Certifies on the full space:
      a  f(z) + gamma*d(z, x0) <= f(x0) + delta
      b  f(y) = f(z) for every y in the rate-gamma descent set of z
      c  f(z) < f(x) + gamma*d(x, z) for every x outside that set
      d  the strong-minimum condition at z (finite characterization)
    """
    space._require_finite("strong_ekeland_georgiev")
    if gamma <= 0 or delta <= 0:
        raise ValueError("gamma and delta must be positive")
    fv = f.as_array(space)
    x0i = space.index(x0)
    if not math.isfinite(fv[x0i]):
        raise ValueError(f"starting point {x0!r} is not in dom f")

    band = fv <= fv[x0i] + delta + MEMBERSHIP_TOL
    restricted_ids = tuple(space.points[i] for i in np.flatnonzero(band))
    sub_space = space.restrict(restricted_ids)
    sub_f = f.restrict(restricted_ids)

    inf_full = f.inf_value(space)
    gap = float(fv[x0i] - inf_full)
    if mutation.is_active(mutation.GEORGIEV_LAMBDA_EXTREME):
        lam = 1.0 - 1e-9
    elif gap <= 0.0:
        lam = 0.5
    else:
        lam = delta / (delta + gap)
    lam_prime = (1.0 - lam) * gamma

    inner = ekeland_point_prime(sub_space, sub_f, lam_prime, x0)
    z = inner.z
    zi = space.index(z)

    lhs_a = fv[zi] + gamma * space.matrix[zi, x0i]
    if lhs_a <= fv[x0i] + delta + tol:
        cond_a = ConditionCheck("pass")
    else:
        cond_a = ConditionCheck("fail", {"lhs": float(lhs_a),
                                         "rhs": float(fv[x0i] + delta)})
    _, cond_b, cond_c, _ = certify_ekeland_conditions(space, f, gamma, z, x0,
                                                      eps=None, iv_bound=None, tol=tol)
    cond_d = check_strong_min_finite(space, f, gamma, z, d_order=d_order, rtol=tol)

    s_gamma = sublevel_bitmap(space, fv, gamma)[:, zi]
    s_lam_prime = sublevel_bitmap(space, fv, lam_prime)[:, zi]
    internal = {
        "lambda_in_unit_interval": 0.0 < lam < 1.0,
        "lambda_slack_equation": lam / (1.0 - lam) * gap <= delta * (1.0 + CONDITION_TOL) + CONDITION_TOL,
        "lambda_prime_below_gamma": lam_prime < gamma,
        "rate_gamma_set_nested_in_reduced": bool((~s_gamma | s_lam_prime).all()),
        "reduced_set_inside_band": bool((~s_lam_prime | band).all()),
        "restricted_inf_equals_full": values_close(sub_f.inf_value(sub_space), inf_full),
    }

    digest = instance_digest(space, f, {"op": "strong", "flavor": "georgiev",
                                        "gamma": gamma, "delta": delta, "x0": x0,
                                        "d_order": d_order})
    return StrongCertificate(flavor="georgiev", z=z, x0=x0, gamma=gamma,
                             delta=delta, lam=None,
                             lambda_internal=(lam, lam_prime),
                             restricted_set=restricted_ids,
                             conditions={"a": cond_a, "b": cond_b,
                                         "c": cond_c, "d": cond_d},
                             internal=internal,
                             picard_trace=inner.picard_trace,
                             instance_hash=digest, d_order=d_order)


def strong_ekeland_suzuki(space: QpmSpace, f: Objective, lam: float, x0: str,
                          d_order: str = "proof",
                          tol: float = CONDITION_TOL) -> StrongCertificate:
    """Compactness-flavored construction at rate lam on the whole space.

    Finite spaces satisfy the required subsequence hypothesis (every
    reverse-bounded sequence has a symmetrized-convergent subsequence) by
    pigeonhole, so the strong-minimum conclusion is certified directly.
    """
    space._require_finite("strong_ekeland_suzuki")
    if lam <= 0:
        raise ValueError("lam must be positive")
    inner = ekeland_point_prime(space, f, lam, x0)
    z = inner.z
    cond_i, cond_ii, cond_iii, _ = certify_ekeland_conditions(space, f, lam, z, x0,
                                                              eps=None, iv_bound=None,
                                                              tol=tol)
    cond_iv = check_strong_min_finite(space, f, lam, z, d_order=d_order, rtol=tol)
    digest = instance_digest(space, f, {"op": "strong", "flavor": "suzuki",
                                        "lam": lam, "x0": x0, "d_order": d_order})
    return StrongCertificate(flavor="suzuki", z=z, x0=x0, gamma=None, delta=None,
                             lam=lam, lambda_internal=None, restricted_set=None,
                             conditions={"i": cond_i, "ii": cond_ii,
                                         "iii": cond_iii, "iv": cond_iv},
                             internal={}, picard_trace=inner.picard_trace,
                             instance_hash=digest, d_order=d_order)


# ---------------------------------------------------------------------------
# Sequence probes
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MinimizingTrace:
    """One probe sequence with its perturbed values and distances to z."""

    seq: tuple[Point, ...]
    g_values: tuple[float, ...]
    dists: tuple[float, ...]
    verdict: str  # "converges_to_z" | "diverges"
    witness_index: int | None = None


def _probe_pool(space: QpmSpace, f: Objective, gamma: float, z: Point,
                horizon: int, d_order: str, pool_size: int | None):
    """(points, g-values, dists-to-z) over the candidate pool."""
    if space.is_finite:
        fv = f.as_array(space)
        zi = space.index(z)
        g = _g_array(space, fv, gamma, zi, d_order)
        return list(space.points), g, space.matrix[:, zi].copy()
    size = pool_size if pool_size is not None else max(4 * horizon, 128)
    pts = [space.sample(k) for k in range(size)]
    if z not in pts:
        pts.append(z)
    arr = np.asarray(pts, dtype=float)
    fvals = np.asarray([f.value(p) for p in pts])
    prem = space.dist_many(arr, float(z)) if d_order == "proof" \
        else space.dist_many(float(z), arr)
    return pts, fvals + gamma * prem, np.asarray(space.dist_many(arr, float(z)))


def _slack_schedule(g: np.ndarray, fz: float, horizon: int) -> np.ndarray:
    finite = g[np.isfinite(g)]
    spread = max(float(np.abs(finite - fz).max(initial=0.0)), 1.0)
    return np.maximum(spread * 2.0 ** -np.arange(horizon), _SLACK_FLOOR)


def minimizing_sequence_probe(space: QpmSpace, f: Objective, gamma: float,
                              z: Point, trials: int = 8, horizon: int = 64,
                              seed: int = 0, d_order: str = "proof",
                              pool_size: int | None = None) -> list[MinimizingTrace]:
    """Random sequences biased toward perturbed values near f(z).

    Each step draws uniformly from the pool points whose perturbed value
    lies within a geometrically shrinking band around f(z); the band always
    contains z, so every trace is a minimizing sequence for the perturbed
    objective by construction.  The verdict records whether the distances
    to z collapse on the tail window.  For a z certified by either strong
    construction every trace must converge; probing an uncertified strict
    minimum may (and on the unbounded ray does) produce diverging traces.
    """
    if horizon < 2:
        raise ValueError("horizon must be >= 2")
    if gamma < 0:
        raise ValueError("gamma must be nonnegative")
    fz = f.value(z)
    if not math.isfinite(fz):
        raise ValueError("probe target z must have a finite objective value")
    pts, g, dist_to_z = _probe_pool(space, f, gamma, z, horizon, d_order, pool_size)
    slacks = _slack_schedule(g, fz, horizon)
    bands = [np.flatnonzero(np.abs(g - fz) <= s) for s in slacks]
    window = max(2, horizon // 8)
    traces = []
    for t in range(trials):
        rng = np.random.default_rng([seed, t])
        idx = np.asarray([band[rng.integers(len(band))] for band in bands])
        dists = dist_to_z[idx]
        tail = dists[-window:]
        if (tail <= DIST_TOL).all():
            verdict, witness = "converges_to_z", None
        else:
            verdict = "diverges"
            witness = int(np.flatnonzero(tail > DIST_TOL)[0]) + horizon - window
        traces.append(MinimizingTrace(
            seq=tuple(pts[i] for i in idx),
            g_values=tuple(float(v) for v in g[idx]),
            dists=tuple(float(v) for v in dists),
            verdict=verdict, witness_index=witness))
    return traces


def simulate_minimizing_batch(space: QpmSpace, f: Objective, gamma: float,
                              z: str, n_sequences: int, horizon: int = 32,
                              seed: int = 0, d_order: str = "proof"
                              ) -> tuple[int, dict | None]:
    """Vectorized probe on a finite space: (violation count, first witness).

    A violation is a sequence whose perturbed values reach f(z) while some
    tail distance to z stays above :data:`DIST_TOL`.  Used to validate the
    finite strong-minimum characterization at scale.
    """
    space._require_finite("simulate_minimizing_batch")
    fv = f.as_array(space)
    zi = space.index(z)
    g = _g_array(space, fv, gamma, zi, d_order)
    fz = fv[zi]
    slacks = _slack_schedule(g, fz, horizon)
    rng = np.random.default_rng(seed)
    idx = np.empty((n_sequences, horizon), dtype=np.intp)
    for n, s in enumerate(slacks):
        band = np.flatnonzero(np.abs(g - fz) <= s)
        idx[:, n] = band[rng.integers(len(band), size=n_sequences)]
    window = max(2, horizon // 8)
    tail = space.matrix[idx[:, -window:], zi]
    violating = (tail > DIST_TOL).any(axis=1)
    count = int(violating.sum())
    witness = None
    if count:
        row = int(np.flatnonzero(violating)[0])
        col = int(np.argmax(tail[row]))
        witness = {"sequence": row,
                   "point": space.points[idx[row, horizon - window + col]],
                   "dist": float(tail[row, col])}
    return count, witness


# ---------------------------------------------------------------------------
# Hypothesis checks
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DbarBoundednessReport:
    bounded: bool
    radius: float
    anchor: Point
    prefix_only: bool
    unbounded_trend: bool

    def __bool__(self) -> bool:
        return self.bounded


def check_dbar_bounded(space: QpmSpace, seq: PointSeq) -> DbarBoundednessReport:
    """Reverse-distance boundedness of the prefix from its first point.

    Finite-space prefixes are always bounded.  Implicit prefixes report the
    observed radius only; a radius record set within the final quarter of
    the prefix is flagged as an unbounded trend.
    """
    anchor = seq.items[0]
    if space.is_finite:
        ai = space.index(anchor)
        radii = space.matrix[[space.index(p) for p in seq.items], ai]
        return DbarBoundednessReport(True, float(radii.max()), anchor, False, False)
    arr = np.asarray(seq.items, dtype=float)
    radii = np.asarray(space.dist_many(arr, float(anchor)), dtype=float)
    running = np.maximum.accumulate(radii)
    quarter = max(1, len(radii) // 4)
    trend = bool(running[-1] > 0 and running[-1] > running[-quarter - 1]) \
        if len(radii) > quarter else bool(running[-1] > 0)
    return DbarBoundednessReport(True, float(running[-1]), anchor, True, trend)


@dataclass(frozen=True)
class SmythReport:
    ok: bool
    trials: int
    failures: tuple[dict, ...]


def check_smyth_hypothesis(space: QpmSpace, trials: int = 100, seed: int = 0,
                           prefix_length: int | None = None) -> SmythReport:
    """Empirical completeness check on a finite space.

    Every generated prefix consistent with the right K-Cauchy definition
    must admit a symmetrized-distance limit among the points recurring in
    its tail.  Any failure witnesses an implementation bug.
    """
    space._require_finite("check_smyth_hypothesis")
    length = prefix_length if prefix_length is not None else max(2 * len(space.points), 40)
    window = min(10, max(2, length // 4))
    failures = []
    for t in range(trials):
        seq = random_right_k_cauchy_prefix(space, length, seed=[seed, t])
        tail_points = set(seq.items[-window:])
        verdict = classify_convergence(space, seq, tail_points, tol=MEMBERSHIP_TOL,
                                       tail=window)
        if not verdict.ds_limits:
            failures.append({"trial": t, "tail": [str(p) for p in seq.items[-window:]]})
    return SmythReport(not failures, trials, tuple(failures))
