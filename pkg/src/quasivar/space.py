"""Quasi-pseudometric spaces: construction, validation, canonical examples.

A quasi-pseudometric keeps zero self-distance and the triangle inequality
but drops symmetry: d(x, y) and d(y, x) may differ, and distinct points may
sit at distance zero in one direction.  Finite spaces store a dense
from->to matrix (entry (i, j) is the distance from point i to point j).
Implicit spaces evaluate a registered distance formula on numeric points
and expose an enumerable sampler; exhaustive operations reject them.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

Point = str | float

# Min-plus closure introduces float rounding; triangle checks get this slack.
TRIANGLE_TOL = 1e-12


class MalformedSpaceError(ValueError):
    """Distance table violates basic sanity (negative or non-finite entry)."""


# ---------------------------------------------------------------------------
# Implicit distance formulas
# ---------------------------------------------------------------------------

def _upper_dist(x, y):
    return np.maximum(np.asarray(y, dtype=float) - np.asarray(x, dtype=float), 0.0)


def _lower_dist(x, y):
    return np.maximum(np.asarray(x, dtype=float) - np.asarray(y, dtype=float), 0.0)


def _abs_dist(x, y):
    return np.abs(np.asarray(x, dtype=float) - np.asarray(y, dtype=float))


@dataclass(frozen=True)
class DistanceFormula:
    name: str
    fn: Callable[..., np.ndarray]
    conjugate: str
    symmetrized: str


#: Formulas usable by implicit spaces.  Points are nonnegative reals; the
#: sampler enumerates the arithmetic ray {0, step, 2*step, ...}.
FORMULAS: dict[str, DistanceFormula] = {
    "upper_ray": DistanceFormula("upper_ray", _upper_dist, "lower_ray", "metric_ray"),
    "lower_ray": DistanceFormula("lower_ray", _lower_dist, "upper_ray", "metric_ray"),
    "metric_ray": DistanceFormula("metric_ray", _abs_dist, "metric_ray", "metric_ray"),
}


# ---------------------------------------------------------------------------
# The space type
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class QpmSpace:
    """A point universe plus an asymmetric distance oracle.

    Finite: ``points`` lists opaque ids and ``matrix[i, j]`` is the distance
    from ``points[i]`` to ``points[j]``.  Implicit: ``formula`` names an
    entry of :data:`FORMULAS` and points are floats; ``sample(k)`` yields
    ``k * step``.

    Immutable after construction; all operations on it are pure.
    """

    points: tuple[str, ...]
    matrix: np.ndarray | None
    formula: str | None = None
    params: Mapping[str, float] | None = None

    def __post_init__(self):
        if self.matrix is not None:
            mat = np.array(self.matrix, dtype=float)
            if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
                raise ValueError(f"distance matrix must be square, got {mat.shape}")
            if len(self.points) != mat.shape[0]:
                raise ValueError("point list and matrix size disagree")
            mat.flags.writeable = False
            object.__setattr__(self, "matrix", mat)
            object.__setattr__(self, "points", tuple(self.points))
        else:
            if self.formula not in FORMULAS:
                raise ValueError(f"unknown distance formula: {self.formula!r}")
            object.__setattr__(self, "params", dict(self.params or {}))

    # -- constructors -------------------------------------------------------

    @classmethod
    def finite(cls, points: Sequence[str], matrix) -> "QpmSpace":
        return cls(points=tuple(points), matrix=np.asarray(matrix, dtype=float))

    @classmethod
    def implicit(cls, formula: str, **params: float) -> "QpmSpace":
        return cls(points=(), matrix=None, formula=formula, params=params)

    # -- basic queries -------------------------------------------------------

    @property
    def kind(self) -> str:
        return "finite" if self.matrix is not None else "implicit"

    @property
    def is_finite(self) -> bool:
        return self.matrix is not None

    @property
    def n(self) -> int:
        self._require_finite("n")
        return len(self.points)

    @cached_property
    def _index(self) -> dict[str, int]:
        return {p: i for i, p in enumerate(self.points)}

    def index(self, point: str) -> int:
        try:
            return self._index[point]
        except KeyError:
            raise KeyError(f"unknown point id: {point!r}") from None

    @property
    def step(self) -> float:
        return float((self.params or {}).get("step", 1.0))

    def sample(self, k: int) -> float:
        """k-th point of the implicit enumeration."""
        self._require_implicit("sample")
        return k * self.step

    def dist(self, x: Point, y: Point) -> float:
        if self.is_finite:
            return float(self.matrix[self.index(x), self.index(y)])
        return float(FORMULAS[self.formula].fn(x, y))

    def dist_many(self, xs, ys) -> np.ndarray:
        """Vectorized distances; broadcasts like numpy over point arrays.

        For finite spaces the arguments are index arrays into ``points``.
        """
        if self.is_finite:
            return self.matrix[np.asarray(xs), np.asarray(ys)]
        return np.asarray(FORMULAS[self.formula].fn(xs, ys), dtype=float)

    def restrict(self, ids: Iterable[str]) -> "QpmSpace":
        """Sub-space on the given ids, preserving the original point order."""
        self._require_finite("restrict")
        keep = [i for i, p in enumerate(self.points) if p in set(ids)]
        sub = self.matrix[np.ix_(keep, keep)]
        return QpmSpace.finite([self.points[i] for i in keep], sub)

    def _require_finite(self, op: str):
        if not self.is_finite:
            raise ValueError(f"{op} requires a finite space; this one is implicit")

    def _require_implicit(self, op: str):
        if self.is_finite:
            raise ValueError(f"{op} only applies to implicit spaces")


def same_space(a: QpmSpace, b: QpmSpace) -> bool:
    """Elementwise equality of two finite spaces."""
    return a.points == b.points and np.array_equal(a.matrix, b.matrix)


# ---------------------------------------------------------------------------
# Axiom validation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AxiomReport:
    """Outcome of checking the distance axioms on a (sampled) matrix.

    ``qm2_witness`` is a triple (x, y, z) with d(x,z) > d(x,y) + d(y,z),
    present exactly when ``qm2_ok`` is false.  ``t0_witness`` is a pair of
    distinct points at mutual distance zero (separation failure);
    ``t1_witness`` is a pair x != y with d(x,y) = 0.
    """

    qm1_ok: bool
    qm2_ok: bool
    qm2_witness: tuple[str, str, str] | None
    is_quasi_metric: bool
    is_t1: bool
    t0_witness: tuple[str, str] | None
    t1_witness: tuple[str, str] | None
    sampled: bool = False

    @property
    def ok(self) -> bool:
        return self.qm1_ok and self.qm2_ok


def validate_axioms(space: QpmSpace, sample_size: int = 32, tol: float = TRIANGLE_TOL) -> AxiomReport:
    """Check QM1 (zero diagonal), QM2 (triangle), QM3 and the T1 criterion.

    Implicit spaces are validated on the first ``sample_size`` sampled
    points and the report is flagged ``sampled``.  Negative or non-finite
    entries raise :class:`MalformedSpaceError` naming the offending pair.
    """
    if not space.is_finite:
        pts = [space.sample(k) for k in range(sample_size)]
        ids = [f"{v:g}" for v in pts]
        arr = np.asarray(pts, dtype=float)
        mat = space.dist_many(arr[:, None], arr[None, :])
        finite_view = QpmSpace.finite(ids, mat)
        report = validate_axioms(finite_view, tol=tol)
        return AxiomReport(**{**report.__dict__, "sampled": True})

    d = space.matrix
    bad = ~np.isfinite(d) | (d < 0)
    if bad.any():
        i, j = map(int, np.argwhere(bad)[0])
        raise MalformedSpaceError(
            f"entry ({space.points[i]!r}, {space.points[j]!r}) = {d[i, j]!r} "
            "is negative or non-finite"
        )

    qm1_ok = bool((np.abs(np.diagonal(d)) <= tol).all())

    # d(x,z) <= d(x,y) + d(y,z): axes (x, y, z).
    viol = d[:, None, :] > d[:, :, None] + d[None, :, :] + tol
    qm2_ok = not bool(viol.any())
    qm2_witness = None
    if not qm2_ok:
        x, y, z = map(int, np.argwhere(viol)[0])
        qm2_witness = (space.points[x], space.points[y], space.points[z])

    off = ~np.eye(len(space.points), dtype=bool)
    both_zero = (d == 0) & (d.T == 0) & off
    is_quasi_metric = not bool(both_zero.any())
    t0_witness = None
    if not is_quasi_metric:
        i, j = map(int, np.argwhere(both_zero)[0])
        t0_witness = (space.points[i], space.points[j])

    one_zero = (d == 0) & off
    is_t1 = not bool(one_zero.any())
    t1_witness = None
    if not is_t1:
        i, j = map(int, np.argwhere(one_zero)[0])
        t1_witness = (space.points[i], space.points[j])

    return AxiomReport(qm1_ok, qm2_ok, qm2_witness, is_quasi_metric, is_t1,
                       t0_witness, t1_witness)


# ---------------------------------------------------------------------------
# Transforms
# ---------------------------------------------------------------------------

def conjugate(space: QpmSpace) -> QpmSpace:
    """Reverse the distance: dist'(x, y) = dist(y, x).  An involution."""
    if space.is_finite:
        return QpmSpace.finite(space.points, space.matrix.T)
    return QpmSpace.implicit(FORMULAS[space.formula].conjugate, **space.params)


def symmetrize(space: QpmSpace) -> QpmSpace:
    """Pointwise max of the distance and its reverse; always symmetric."""
    if space.is_finite:
        return QpmSpace.finite(space.points, np.maximum(space.matrix, space.matrix.T))
    return QpmSpace.implicit(FORMULAS[space.formula].symmetrized, **space.params)


def ball(space: QpmSpace, center: str, r: float, shape: str = "open",
         which: str = "d") -> frozenset[str]:
    """Members of the ball around ``center`` of radius ``r``.

    ``which`` selects the forward distance ("d"), the reversed one ("dbar"),
    or their max ("ds").  Open balls use strict <, closed balls use <=.
    """
    space._require_finite("ball")
    if shape not in ("open", "closed"):
        raise ValueError(f"shape must be 'open' or 'closed', got {shape!r}")
    c = space.index(center)
    row = {"d": space.matrix[c, :],
           "dbar": space.matrix[:, c],
           "ds": np.maximum(space.matrix[c, :], space.matrix[:, c])}[which]
    if shape == "open":
        if r <= 0:
            warnings.warn(f"open ball with radius {r} <= 0 is empty", stacklevel=2)
            return frozenset()
        mask = row < r
    else:
        mask = row <= r
    return frozenset(space.points[i] for i in np.flatnonzero(mask))


def closure_of_singleton(space: QpmSpace, z: str) -> frozenset[str]:
    """Points y with dist(y, z) = 0; the topological closure of {z}."""
    space._require_finite("closure_of_singleton")
    col = space.matrix[:, space.index(z)]
    return frozenset(space.points[i] for i in np.flatnonzero(col == 0))


# ---------------------------------------------------------------------------
# Generators
# ---------------------------------------------------------------------------

def minplus_closure(matrix: np.ndarray) -> np.ndarray:
    """All-pairs shortest paths in the (min, +) semiring (Floyd-Warshall)."""
    d = np.array(matrix, dtype=float)
    for k in range(d.shape[0]):
        np.minimum(d, d[:, k][:, None] + d[k, :][None, :], out=d)
    return d


def generate_random_qpm(n: int, seed: int, zero_density: float = 0.2,
                        scale: float = 1.0) -> QpmSpace:
    """Random valid finite space, deterministic per seed.

    Draws a nonnegative matrix with zero diagonal (a ``zero_density``
    fraction of off-diagonal entries is forced to exact zero, producing
    non-T1 and non-T0 structure), then takes the min-plus closure so the
    triangle inequality holds by construction.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(seed)
    raw = rng.uniform(0.0, scale, size=(n, n))
    raw[rng.random((n, n)) < zero_density] = 0.0
    np.fill_diagonal(raw, 0.0)
    ids = [f"p{i}" for i in range(n)]
    return QpmSpace.finite(ids, minplus_closure(raw))


def _grid_values(lo: float, hi: float, step: float) -> list[float]:
    if step <= 0:
        raise ValueError("step must be positive")
    count = int(round((hi - lo) / step)) + 1
    if count < 1 or hi < lo:
        raise ValueError("empty grid range")
    return [lo + k * step for k in range(count)]


def canonical_space(name: str, **params) -> QpmSpace:
    """Documented formula-backed spaces.

    finite families:
      upper_grid(lo, hi, step)       max(y - x, 0) on an arithmetic grid
      symmetric_metric(lo, hi, step) |x - y| on an arithmetic grid
      directed_cycle(n, weight)      one-way ring, min-plus closed
      asymmetric_graph(points, edges) shortest paths of weighted directed edges
    implicit families (unbounded ray {0, step, 2*step, ...}):
      upper_ray(step), metric_ray(step)
    """
    if name == "upper_grid" or name == "symmetric_metric":
        vals = _grid_values(params.get("lo", 0.0), params.get("hi", 1.0),
                            params.get("step", 0.5))
        arr = np.asarray(vals)
        fn = _upper_dist if name == "upper_grid" else _abs_dist
        mat = fn(arr[:, None], arr[None, :])
        return QpmSpace.finite([f"{v:g}" for v in vals], mat)
    if name == "directed_cycle":
        n = int(params.get("n", 3))
        w = float(params.get("weight", 1.0))
        if n < 1 or w <= 0:
            raise ValueError("directed_cycle needs n >= 1 and weight > 0")
        big = n * w + 1.0
        raw = np.full((n, n), big)
        np.fill_diagonal(raw, 0.0)
        for i in range(n):
            raw[i, (i + 1) % n] = w
        return QpmSpace.finite([f"p{i}" for i in range(n)], minplus_closure(raw))
    if name == "asymmetric_graph":
        pts = list(params["points"])
        edges = params["edges"]
        idx = {p: i for i, p in enumerate(pts)}
        raw = np.full((len(pts), len(pts)), np.inf)
        np.fill_diagonal(raw, 0.0)
        for src, dst, w in edges:
            if w < 0:
                raise ValueError(f"negative edge weight on ({src}, {dst})")
            raw[idx[src], idx[dst]] = min(raw[idx[src], idx[dst]], float(w))
        closed = minplus_closure(raw)
        if not np.isfinite(closed).all():
            raise ValueError("graph is not strongly connected; distances would be infinite")
        return QpmSpace.finite(pts, closed)
    if name in ("upper_ray", "metric_ray"):
        step = float(params.get("step", 1.0))
        if step <= 0:
            raise ValueError("step must be positive")
        return QpmSpace.implicit(name, step=step)
    raise ValueError(f"unknown canonical space: {name!r}")
