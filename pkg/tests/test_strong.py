import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from quasivar import (
    Objective,
    PointSeq,
    QpmSpace,
    canonical_space,
    check_dbar_bounded,
    check_smyth_hypothesis,
    check_strong_min_finite,
    cross_check,
    ekeland_point_prime,
    generate_random_qpm,
    minimizing_sequence_probe,
    oracle_strong_all,
    random_right_k_cauchy_prefix,
    strong_ekeland_georgiev,
    strong_ekeland_suzuki,
    sublevel_set,
)
from quasivar.oracle import random_instance
from quasivar.strong import simulate_minimizing_batch

seeds = st.integers(0, 10**6)


# ---------------------------------------------------------------------------
# Restriction construction
# ---------------------------------------------------------------------------

def test_georgiev_three_point_fixture(three_point):
    space, f = three_point
    cert = strong_ekeland_georgiev(space, f, 1.0, 0.5, "a")
    assert cert.all_pass and cert.internal_ok
    result = oracle_strong_all(space, f, 1.0, 0.5, "a", flavor="georgiev")
    assert cross_check(cert, result).ok


def test_georgiev_constant_objective(upper_grid):
    f = Objective.from_values({p: 2.0 for p in upper_grid.points})
    cert = strong_ekeland_georgiev(upper_grid, f, 1.5, 0.25, "1")
    assert cert.z == "1"
    assert cert.all_pass and cert.internal_ok


def test_georgiev_large_delta_covers_domain(three_point):
    space, f = three_point
    delta = 10.0  # exceeds f(x0) - inf f for every start
    cert = strong_ekeland_georgiev(space, f, 1.0, delta, "a")
    assert set(cert.restricted_set) == set(f.dom_ids(space))
    lam, lam_prime = cert.lambda_internal
    full = ekeland_point_prime(space, f, lam_prime, "a")
    assert cert.z == full.z


def test_georgiev_parameter_errors(three_point):
    space, f = three_point
    with pytest.raises(ValueError):
        strong_ekeland_georgiev(space, f, 0.0, 0.5, "a")
    with pytest.raises(ValueError):
        strong_ekeland_georgiev(space, f, 1.0, -0.5, "a")


@given(seeds)
@settings(max_examples=40, deadline=None)
def test_georgiev_internal_invariants(seed):
    inst = random_instance(seed, n_range=(1, 12))
    cert = strong_ekeland_georgiev(inst.space, inst.objective, inst.gamma,
                                   inst.delta, inst.x0)
    assert cert.all_pass, cert.conditions
    assert cert.internal_ok, cert.internal
    lam, lam_prime = cert.lambda_internal
    assert 0 < lam < 1 and lam_prime < inst.gamma
    s_gamma = sublevel_set(inst.space, inst.objective, inst.gamma, cert.z).members
    s_reduced = sublevel_set(inst.space, inst.objective, lam_prime, cert.z).members
    assert s_gamma <= s_reduced <= set(cert.restricted_set)


# ---------------------------------------------------------------------------
# Compactness-flavored construction
# ---------------------------------------------------------------------------

def test_suzuki_three_point_fixture(three_point):
    space, f = three_point
    cert = strong_ekeland_suzuki(space, f, 1.0, "a")
    assert cert.all_pass
    result = oracle_strong_all(space, f, 1.0, None, "a", flavor="suzuki")
    assert cert.z in result.admissible
    assert cross_check(cert, result).ok


def test_suzuki_constant_objective(upper_grid):
    f = Objective.from_values({p: 0.5 for p in upper_grid.points})
    cert = strong_ekeland_suzuki(upper_grid, f, 2.0, "0.5")
    assert cert.z == "0.5" and cert.all_pass


def test_suzuki_bound_implies_slack_bound(three_point):
    # certificate condition i is the slack condition with delta = 0
    space, f = three_point
    cert = strong_ekeland_suzuki(space, f, 1.0, "b")
    z = cert.z
    lhs = f.value(z) + 1.0 * space.dist(z, "b")
    assert lhs <= f.value("b") + 1e-9
    for delta in (0.1, 1.0, 7.0):
        assert lhs <= f.value("b") + delta + 1e-9


@given(seeds)
@settings(max_examples=40, deadline=None)
def test_suzuki_random_instances_pass(seed):
    inst = random_instance(seed, n_range=(1, 12),
                           value_style="tied" if seed % 2 else "uniform")
    cert = strong_ekeland_suzuki(inst.space, inst.objective, inst.gamma, inst.x0)
    assert cert.all_pass, cert.conditions


# ---------------------------------------------------------------------------
# Strong-minimum characterization
# ---------------------------------------------------------------------------

def test_strong_min_unique_minimizer_passes():
    space = canonical_space("symmetric_metric", lo=0.0, hi=2.0, step=1.0)
    f = Objective.from_values({"0": 0.0, "1": 1.0, "2": 2.0})
    assert check_strong_min_finite(space, f, 1.0, "0").status == "pass"


def test_strong_min_zero_distance_tie_allowed():
    space = QpmSpace.finite(["a", "b"], [[0, 0], [0, 0]])
    f = Objective.from_values({"a": 1.0, "b": 1.0})
    assert check_strong_min_finite(space, f, 1.0, "a").status == "pass"


def test_strong_min_two_point_failure_confirmed_by_simulation():
    # With f(b) = gamma * d(a, b), the point a reaches f(b) in perturbed
    # value while sitting a full unit away: b cannot be a strong minimum.
    space = QpmSpace.finite(["a", "b"], [[0, 1], [1, 0]])
    f = Objective.from_values({"a": 0.0, "b": 1.0})
    bad = check_strong_min_finite(space, f, 1.0, "b")
    assert bad.status == "fail" and bad.witness["y"] == "a"
    violations, witness = simulate_minimizing_batch(space, f, 1.0, "b", 2000,
                                                    horizon=48, seed=5)
    assert violations > 0 and witness["point"] == "a"

    good = check_strong_min_finite(space, f, 1.0, "a")
    assert good.status == "pass"
    violations, _ = simulate_minimizing_batch(space, f, 1.0, "a", 2000,
                                              horizon=48, seed=5)
    assert violations == 0


def test_strong_min_argument_order_switch():
    # one-way zero distance: the reversed premise counts b as a tie of a,
    # the forward premise does not
    space = QpmSpace.finite(["a", "b"], [[0, 0], [1, 0]])
    f = Objective.from_values({"a": 0.0, "b": 0.0})
    assert check_strong_min_finite(space, f, 1.0, "a", d_order="proof").status == "pass"
    flipped = check_strong_min_finite(space, f, 1.0, "a", d_order="statement")
    assert flipped.status == "fail" and flipped.witness["y"] == "b"


def test_strong_min_rejects_unknown_order(three_point):
    space, f = three_point
    with pytest.raises(ValueError, match="d_order"):
        check_strong_min_finite(space, f, 1.0, "a", d_order="sideways")


@given(seeds)
@settings(max_examples=25, deadline=None)
def test_characterization_agrees_with_simulation(seed):
    inst = random_instance(seed, n_range=(2, 8), value_style="tied")
    rng = np.random.default_rng(seed)
    dom = inst.objective.dom_ids(inst.space)
    z = dom[int(rng.integers(len(dom)))]
    verdict = check_strong_min_finite(inst.space, inst.objective, inst.gamma, z)
    violations, _ = simulate_minimizing_batch(inst.space, inst.objective,
                                              inst.gamma, z, 3000, horizon=48,
                                              seed=seed)
    assert (verdict.status == "pass") == (violations == 0)


# ---------------------------------------------------------------------------
# Probes
# ---------------------------------------------------------------------------

def test_probe_certified_point_always_converges(three_point):
    space, f = three_point
    cert = strong_ekeland_suzuki(space, f, 1.0, "a")
    traces = minimizing_sequence_probe(space, f, 1.0, cert.z, trials=12, horizon=48)
    assert all(t.verdict == "converges_to_z" for t in traces)
    fz = f.value(cert.z)
    for t in traces:
        assert all(g >= fz - 1e-12 for g in t.g_values)


def test_probe_on_unbounded_ray_finds_divergence():
    ray = canonical_space("metric_ray", step=1.0)
    f = Objective.from_formula("x2_exp_decay")
    assert abs(f.value(50.0)) < 1e-18
    traces = minimizing_sequence_probe(ray, f, 0.0, 0.0, trials=6, horizon=64, seed=3)
    diverging = [t for t in traces if t.verdict == "diverges"]
    assert diverging
    t = diverging[0]
    assert t.witness_index is not None
    assert t.dists[t.witness_index] > 1.0


def test_probe_validates_arguments(three_point):
    space, f = three_point
    with pytest.raises(ValueError, match="horizon"):
        minimizing_sequence_probe(space, f, 1.0, "a", horizon=1)
    with pytest.raises(ValueError, match="finite"):
        bad = Objective.from_values({"a": math.inf, "b": 0.0, "c": 0.0})
        minimizing_sequence_probe(space, bad, 1.0, "a")


def test_probe_deterministic_per_seed(three_point):
    space, f = three_point
    a = minimizing_sequence_probe(space, f, 1.0, "c", trials=3, seed=9)
    b = minimizing_sequence_probe(space, f, 1.0, "c", trials=3, seed=9)
    assert [t.seq for t in a] == [t.seq for t in b]


# ---------------------------------------------------------------------------
# Hypothesis checks
# ---------------------------------------------------------------------------

def test_dbar_bounded_on_finite_space(three_point):
    space, _ = three_point
    report = check_dbar_bounded(space, PointSeq(("a", "b", "c", "a")))
    assert report and not report.prefix_only and not report.unbounded_trend


def test_dbar_bounded_flags_growing_ray_prefix():
    ray = canonical_space("metric_ray", step=1.0)
    seq = PointSeq(tuple(float(i) for i in range(64)))
    report = check_dbar_bounded(ray, seq)
    assert report.bounded and report.prefix_only
    assert report.unbounded_trend
    assert report.radius == 63.0


def test_dbar_bounded_stable_ray_prefix_no_trend():
    ray = canonical_space("metric_ray", step=1.0)
    seq = PointSeq((5.0,) * 30 + (6.0,) * 30)
    assert not check_dbar_bounded(ray, seq).unbounded_trend


def test_dbar_bounded_on_cauchy_prefix():
    space = generate_random_qpm(8, 17, zero_density=0.3)
    seq = random_right_k_cauchy_prefix(space, 40, seed=17)
    assert check_dbar_bounded(space, seq).bounded


@given(seeds)
@settings(max_examples=15, deadline=None)
def test_smyth_hypothesis_on_random_spaces(seed):
    space = generate_random_qpm(8, seed, zero_density=0.3)
    report = check_smyth_hypothesis(space, trials=25, seed=seed)
    assert report.ok, report.failures


def test_smyth_constant_sequences_trivially_converge():
    space = generate_random_qpm(3, 4, zero_density=0.0)
    report = check_smyth_hypothesis(space, trials=10, seed=0)
    assert report.ok
