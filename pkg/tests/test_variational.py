import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from quasivar import (
    Objective,
    QpmSpace,
    check_sublevel_properties,
    closure_of_singleton,
    ekeland_point,
    ekeland_point_prime,
    generate_random_qpm,
    picard_sequence,
    sublevel_set,
)
from quasivar.oracle import random_instance

seeds = st.integers(0, 10**6)


def brute_sublevel(space, f, alpha, x):
    """Independent oracle: test every candidate against the inequality."""
    fx = f.value(x)
    if math.isinf(fx):
        return set(space.points)
    return {y for y in space.points
            if f.value(y) + alpha * space.dist(y, x) <= fx + 1e-12}


# ---------------------------------------------------------------------------
# Objectives
# ---------------------------------------------------------------------------

def test_objective_rejects_improper():
    with pytest.raises(ValueError, match="improper"):
        Objective.from_values({"a": math.inf})


def test_objective_inf_and_dom(three_point):
    space, _ = three_point
    f = Objective.from_values({"a": 1.0, "b": math.inf, "c": 0.5})
    assert f.dom_ids(space) == ("a", "c")
    assert f.inf_value(space) == 0.5


def test_objective_formula_backed():
    f = Objective.from_formula("x2_exp_decay")
    assert f.value(0.0) == 0.0
    assert f.value(2.0) == pytest.approx(4 * math.exp(-2))


# ---------------------------------------------------------------------------
# Sublevel sets
# ---------------------------------------------------------------------------

def test_sublevel_constant_objective_is_closure(upper_grid):
    f = Objective.from_values({p: 2.0 for p in upper_grid.points})
    for x in upper_grid.points:
        assert sublevel_set(upper_grid, f, 1.0, x).members == \
            closure_of_singleton(upper_grid, x)


def test_sublevel_infinite_base_is_everything(three_point):
    space, _ = three_point
    f = Objective.from_values({"a": math.inf, "b": 1.0, "c": 0.0})
    assert sublevel_set(space, f, 1.0, "a").members == set(space.points)


def test_sublevel_three_point_fixture(three_point):
    space, f = three_point
    got = sublevel_set(space, f, 1.0, "a").members
    assert got == brute_sublevel(space, f, 1.0, "a") == {"a", "b", "c"}


def test_sublevel_requires_positive_alpha(three_point):
    space, f = three_point
    with pytest.raises(ValueError, match="positive"):
        sublevel_set(space, f, 0.0, "a")


@given(seeds, st.floats(0.1, 2.0), st.floats(0.1, 2.0))
@settings(max_examples=30, deadline=None)
def test_sublevel_monotone_in_alpha(seed, a, b):
    inst = random_instance(seed, n_range=(2, 8))
    lo, hi = sorted((a, b))
    for x in inst.space.points:
        big = sublevel_set(inst.space, inst.objective, hi, x).members
        small = sublevel_set(inst.space, inst.objective, lo, x).members
        assert big <= small


def test_sublevel_matches_brute_force_on_random_instances():
    for seed in range(25):
        inst = random_instance(seed, n_range=(2, 9), value_style="tied")
        for x in inst.space.points:
            got = sublevel_set(inst.space, inst.objective, inst.gamma, x).members
            assert got == brute_sublevel(inst.space, inst.objective, inst.gamma, x)


@given(seeds, st.floats(0.05, 4.0))
@settings(max_examples=50, deadline=None)
def test_sublevel_properties_hold(seed, alpha):
    inst = random_instance(seed, n_range=(1, 10),
                           value_style="tied" if seed % 2 else "uniform")
    report = check_sublevel_properties(inst.space, inst.objective, alpha)
    assert report.ok, report


def test_sublevel_nesting_on_fixture(three_point):
    space, f = three_point
    s_a = sublevel_set(space, f, 1.0, "a").members
    assert "b" in s_a
    assert sublevel_set(space, f, 1.0, "b").members <= s_a


# ---------------------------------------------------------------------------
# Descent walk
# ---------------------------------------------------------------------------

def test_picard_fixed_point_at_start(three_point):
    space, f = three_point
    trace, z = picard_sequence(space, f, 1.0, "c")
    assert trace == ("c",) and z == "c"


def test_picard_three_point_descends_to_minimum(three_point):
    space, f = three_point
    trace, z = picard_sequence(space, f, 1.0, "a")
    assert z == "c" and f.value(z) == 0.0
    assert trace == ("a", "c")


def test_picard_constant_objective_stays_put(upper_grid):
    f = Objective.from_values({p: 1.0 for p in upper_grid.points})
    for x0 in upper_grid.points:
        trace, z = picard_sequence(upper_grid, f, 0.7, x0)
        assert z == x0 and trace == (x0,)


def test_picard_rejects_infinite_start(three_point):
    space, _ = three_point
    f = Objective.from_values({"a": math.inf, "b": 1.0, "c": 0.0})
    with pytest.raises(ValueError, match="dom"):
        picard_sequence(space, f, 1.0, "a")


@given(seeds)
@settings(max_examples=40, deadline=None)
def test_picard_trace_descends_with_nested_sets(seed):
    inst = random_instance(seed, n_range=(2, 10))
    alpha = inst.eps / inst.lam
    trace, z = picard_sequence(inst.space, inst.objective, alpha, inst.x0)
    assert trace[-1] == z
    values = [inst.objective.value(p) for p in trace]
    assert all(b < a for a, b in zip(values, values[1:]))
    sets = [sublevel_set(inst.space, inst.objective, alpha, p).members for p in trace]
    assert all(later <= earlier for earlier, later in zip(sets, sets[1:]))


# ---------------------------------------------------------------------------
# Solvers
# ---------------------------------------------------------------------------

def test_ekeland_three_point_from_a(three_point):
    space, f = three_point
    cert = ekeland_point(space, f, 1.0, 1.0, "a")
    assert cert.z == "c"
    assert cert.cond_i.status == "pass"       # 0 + d(c, a) = 2 <= 3
    assert cert.cond_ii.status == "pass"
    assert cert.cond_iii.status == "pass"
    assert cert.cond_iv.status == "not_applicable"  # f(a) = 3 > eps + inf = 1


def test_ekeland_three_point_localization(three_point):
    space, f = three_point
    cert = ekeland_point(space, f, 1.0, 1.0, "b")   # f(b) = 1 <= eps + inf
    assert cert.cond_iv.status == "pass"
    assert space.dist(cert.z, "b") <= 1.0 + 1e-9


def test_ekeland_constant_objective(upper_grid):
    f = Objective.from_values({p: 1.0 for p in upper_grid.points})
    cert = ekeland_point(upper_grid, f, 2.0, 0.5, "1")
    assert cert.z == "1"
    assert cert.all_pass


def test_ekeland_parameter_errors(three_point):
    space, f = three_point
    with pytest.raises(ValueError):
        ekeland_point(space, f, 0.0, 1.0, "a")
    with pytest.raises(ValueError):
        ekeland_point(space, f, 1.0, -2.0, "a")
    with pytest.raises(ValueError):
        ekeland_point_prime(space, f, 0.0, "a")
    bad_f = Objective.from_values({"a": math.inf, "b": 1.0, "c": 0.0})
    with pytest.raises(ValueError, match="dom"):
        ekeland_point(space, bad_f, 1.0, 1.0, "a")


def test_prime_form_matches_fixture(three_point):
    space, f = three_point
    cert = ekeland_point_prime(space, f, 1.0, "b", eps=1.0)
    assert cert.z == "c"
    assert cert.cond_iv.status == "pass"
    assert space.dist(cert.z, "b") <= 1.0 + 1e-9  # eps / lam_prime = 1


def test_prime_form_without_eps_skips_localization(three_point):
    space, f = three_point
    cert = ekeland_point_prime(space, f, 1.0, "b")
    assert cert.cond_iv.status == "not_applicable"


@given(seeds)
@settings(max_examples=40, deadline=None)
def test_substitution_coherence(seed):
    inst = random_instance(seed, n_range=(2, 12))
    plain = ekeland_point(inst.space, inst.objective, inst.eps, inst.lam, inst.x0)
    primed = ekeland_point_prime(inst.space, inst.objective, inst.eps / inst.lam,
                                 inst.x0, eps=inst.eps)
    assert plain.z == primed.z
    assert plain.picard_trace == primed.picard_trace
    assert {k: c.status for k, c in plain.conditions.items()} == \
           {k: c.status for k, c in primed.conditions.items()}


@given(seeds)
@settings(max_examples=40, deadline=None)
def test_certificates_always_pass_on_random_instances(seed):
    inst = random_instance(seed, n_range=(1, 14),
                           value_style="tied" if seed % 3 == 0 else "uniform")
    cert = ekeland_point(inst.space, inst.objective, inst.eps, inst.lam, inst.x0)
    assert cert.all_pass, {k: c.witness for k, c in cert.conditions.items()}
