"""Sequence classification: convergence modes, Cauchy types, separation.

All verdicts here are prefix-verdicts: a finite prefix can only ever be
*consistent* with an asymptotic property, so "yes" means "consistent with
the definition on this prefix" and is computed against an explicit tail
window.  Convergence is checked in three modes: forward distance to the
candidate ("d", i.e. d(x, x_n) -> 0), reversed ("dbar", d(x_n, x) -> 0),
and their max ("ds").
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .space import Point, QpmSpace, conjugate

DEFAULT_SEQ_TOL = 1e-9
#: Default epsilon schedule for Cauchy checks: 1/2, 1/4, ..., 2^-10.
DEFAULT_EPS_SCHEDULE = tuple(2.0 ** -k for k in range(1, 11))


class PreconditionError(RuntimeError):
    """An operation refused to run because its stated precondition failed."""


@dataclass(frozen=True)
class PointSeq:
    """A finite prefix of a conceptual infinite sequence of points.

    ``generator`` optionally extends the prefix (index -> point); its
    presence marks the sequence as implicit, which weakens Cauchy verdicts
    to "inconclusive" since the tail cannot be bounded from a prefix.
    """

    items: tuple[Point, ...]
    generator: Callable[[int], Point] | None = None

    def __post_init__(self):
        if not self.items:
            raise ValueError("sequence prefix must be nonempty")
        object.__setattr__(self, "items", tuple(self.items))

    @classmethod
    def from_generator(cls, gen: Callable[[int], Point], length: int) -> "PointSeq":
        return cls(tuple(gen(i) for i in range(length)), generator=gen)

    def __len__(self) -> int:
        return len(self.items)


@dataclass(frozen=True)
class SeqVerdict:
    """Limit sets and Cauchy verdicts for one sequence prefix.

    ``witness`` is (direction, n, m, eps) for the first "no" Cauchy verdict:
    a pair n < m past every consistent settling index whose distance in the
    tested direction is >= eps.
    """

    d_limits: frozenset[Point] | None = None
    dbar_limits: frozenset[Point] | None = None
    ds_limits: frozenset[Point] | None = None
    left_k_cauchy: str | None = None
    right_k_cauchy: str | None = None
    witness: tuple[str, int, int, float] | None = None


def _prefix_matrix(space: QpmSpace, items: Sequence[Point]) -> np.ndarray:
    """P[i, j] = dist(items[i], items[j]) over the prefix."""
    if space.is_finite:
        idx = np.asarray([space.index(p) for p in items])
        return space.dist_many(idx[:, None], idx[None, :])
    arr = np.asarray(items, dtype=float)
    return space.dist_many(arr[:, None], arr[None, :])


def _cross_matrix(space: QpmSpace, rows: Sequence[Point], cols: Sequence[Point]) -> np.ndarray:
    if space.is_finite:
        ri = np.asarray([space.index(p) for p in rows])
        ci = np.asarray([space.index(p) for p in cols])
        return space.dist_many(ri[:, None], ci[None, :])
    r = np.asarray(rows, dtype=float)
    c = np.asarray(cols, dtype=float)
    return space.dist_many(r[:, None], c[None, :])


def classify_convergence(space: QpmSpace, seq: PointSeq, candidates: Iterable[Point],
                         tol: float = DEFAULT_SEQ_TOL, tail: int = 10) -> SeqVerdict:
    """Which candidates the prefix converges to, per mode.

    A candidate x is a d-limit when dist(x, x_n) <= tol for every n in the
    last ``tail`` entries; dbar uses dist(x_n, x); ds needs both.  With
    tol=0 on a finite space this is exact for eventually-constant-distance
    sequences.
    """
    cands = list(candidates)
    if not cands:
        raise ValueError("candidate set must be nonempty")
    if tail < 1 or len(seq) < tail:
        raise ValueError(f"prefix length {len(seq)} is shorter than tail {tail}")
    window = seq.items[-tail:]
    fwd = _cross_matrix(space, cands, window)   # dist(candidate, x_n)
    bwd = _cross_matrix(space, window, cands)   # dist(x_n, candidate)
    d_ok = (fwd <= tol).all(axis=1)
    dbar_ok = (bwd <= tol).all(axis=0)
    d_limits = frozenset(c for c, ok in zip(cands, d_ok) if ok)
    dbar_limits = frozenset(c for c, ok in zip(cands, dbar_ok) if ok)
    return SeqVerdict(d_limits=d_limits, dbar_limits=dbar_limits,
                      ds_limits=d_limits & dbar_limits)


def _cauchy_direction(pair_dist: np.ndarray, eps_schedule: Sequence[float]):
    """Settling analysis for one direction.

    ``pair_dist[n, m]`` (n < m) is the distance tested by the definition.
    For each eps the minimal consistent settling index is one past the last
    violating n; the prefix supports the claim only if that index leaves at
    least one testable pair.  Returns (verdict, witness) with witness
    (n, m, eps) drawn from the final violating pair.
    """
    n_len = pair_dist.shape[0]
    upper = np.triu(np.ones_like(pair_dist, dtype=bool), k=1)
    worst = np.where(upper, pair_dist, -np.inf).max(axis=1)  # worst outgoing pair per n
    for eps in eps_schedule:
        violating = np.flatnonzero(worst >= eps)
        if violating.size and violating[-1] + 1 > n_len - 2:
            n = int(violating[-1])
            m = int(np.argmax(np.where(upper[n], pair_dist[n], -np.inf)))
            return "no", (n, m, float(eps))
    return "yes", None


def classify_cauchy(space: QpmSpace, seq: PointSeq,
                    eps_schedule: Sequence[float] | None = None) -> SeqVerdict:
    """Left/right K-Cauchy verdicts on the prefix.

    Right K-Cauchy tests dist(x_m, x_n) < eps for pairs n < m past a
    settling index; left tests dist(x_n, x_m).  Implicit sequences (those
    carrying a generator) come back "inconclusive" instead of "yes" because
    the unseen tail cannot be bounded.  Requires prefix length >= 4x the
    schedule length so the smallest eps has room to settle.
    """
    schedule = tuple(eps_schedule) if eps_schedule is not None else DEFAULT_EPS_SCHEDULE
    if any(b >= a for a, b in zip(schedule, schedule[1:])) or any(e <= 0 for e in schedule):
        raise ValueError("eps schedule must be strictly decreasing and positive")
    if len(seq) < 4 * len(schedule):
        raise ValueError(
            f"prefix length {len(seq)} too short for schedule length {len(schedule)}; "
            "need at least 4x")
    p = _prefix_matrix(space, seq.items)
    right, right_wit = _cauchy_direction(p.T, schedule)  # d(x_m, x_n) = p[m, n]
    left, left_wit = _cauchy_direction(p, schedule)
    if seq.generator is not None:
        right = "inconclusive" if right == "yes" else right
        left = "inconclusive" if left == "yes" else left
    witness = None
    if right == "no":
        witness = ("right", *right_wit)
    elif left == "no":
        witness = ("left", *left_wit)
    return SeqVerdict(left_k_cauchy=left, right_k_cauchy=right, witness=witness)


def separation_class(space: QpmSpace) -> str:
    """"not_T0", "T0_not_T1", or "T1", decided from the matrix."""
    space._require_finite("separation_class")
    d = space.matrix
    off = ~np.eye(len(space.points), dtype=bool)
    if bool(((d == 0) & (d.T == 0) & off).any()):
        return "not_T0"
    if bool(((d == 0) & off).any()):
        return "T0_not_T1"
    return "T1"


def check_subsequence_promotion(space: QpmSpace, seq: PointSeq,
                                subseq_indices: Sequence[int], limit: Point,
                                which: str = "d", tol: float = DEFAULT_SEQ_TOL,
                                tail: int = 10) -> tuple[bool, int | None]:
    """Promote subsequence convergence to the whole prefix.

    For a right-K-Cauchy sequence, convergence of any subsequence forces
    convergence of the full sequence in the same mode.  Refuses (raises
    :class:`PreconditionError`) when the prefix is verifiably not right
    K-Cauchy; raises ValueError when the subsequence itself does not
    converge to ``limit``.  Returns (True, None) when the full prefix also
    converges, else (False, first_violating_index) -- which on a genuinely
    right-K-Cauchy input would indicate an implementation bug.
    """
    idx = list(subseq_indices)
    if any(b <= a for a, b in zip(idx, idx[1:])):
        raise ValueError("subsequence indices must be strictly increasing")
    if idx and (idx[0] < 0 or idx[-1] >= len(seq)):
        raise IndexError("subsequence index out of range")
    if which not in ("d", "dbar", "ds"):
        raise ValueError(f"unknown mode: {which!r}")

    verdict = classify_cauchy(space, seq)
    if verdict.right_k_cauchy == "no":
        raise PreconditionError(
            f"sequence is not right K-Cauchy on its prefix; witness {verdict.witness}")

    sub = PointSeq(tuple(seq.items[i] for i in idx))
    sub_verdict = classify_convergence(space, sub, [limit], tol=tol, tail=min(tail, len(sub)))
    if limit not in getattr(sub_verdict, f"{'ds' if which == 'ds' else which}_limits"):
        raise ValueError("subsequence does not converge to the claimed limit in this mode")

    full_verdict = classify_convergence(space, seq, [limit], tol=tol, tail=tail)
    if limit in getattr(full_verdict, f"{'ds' if which == 'ds' else which}_limits"):
        return True, None
    window = seq.items[-tail:]
    fwd = _cross_matrix(space, [limit], window)[0]
    bwd = _cross_matrix(space, window, [limit])[:, 0]
    per_entry = {"d": fwd, "dbar": bwd, "ds": np.maximum(fwd, bwd)}[which]
    witness = int(np.flatnonzero(per_entry > tol)[0]) + len(seq) - tail
    return False, witness


def random_right_k_cauchy_prefix(space: QpmSpace, length: int, seed,
                                 head_frac: float = 0.25) -> PointSeq:
    """Random prefix consistent with the right K-Cauchy definition.

    After a random head, the walk follows reverse-zero edges (next point w
    with dist(w, current) = 0), so every later-to-earlier distance in the
    tail is exactly zero by the triangle inequality.  The final half of the
    walk is confined to the current mutual-zero class, so the prefix also
    stabilizes.  Finite spaces only.
    """
    space._require_finite("random_right_k_cauchy_prefix")
    if length < 2:
        raise ValueError("length must be >= 2")
    rng = np.random.default_rng(seed)
    d = space.matrix
    n = len(space.points)
    head_len = max(1, int(length * head_frac))
    items = [space.points[rng.integers(n)] for _ in range(head_len)]
    cur = space.index(items[-1])
    for step in range(length - head_len):
        if step < (length - head_len) // 2:
            options = np.flatnonzero(d[:, cur] == 0)          # d(next, cur) = 0
        else:
            options = np.flatnonzero((d[:, cur] == 0) & (d[cur, :] == 0))
        cur = int(options[rng.integers(len(options))])
        items.append(space.points[cur])
    return PointSeq(tuple(items[:length]))
