import math

import pytest
from hypothesis import given, strategies as st

from chowlab.functions import Product, character_group, parse_spec
from chowlab.pretense import (SearchConfig, aperiodicity_mean, distance_profile, distance_sq,
                              distance_to_archimedean, min_distance, strong_aperiodicity_scan)

POOL = ["liouville", "mobius", "one", "root_of_unity:3", "complete_root_of_unity:4",
        "archimedean:0.5", "archimedean:-2.25", "character:5:1", "character:7:3",
        "character:8:2", {"conjugate": {"root_of_unity": 5}},
        {"table": {"default": [[0.6, 0.8]], "primes": {"3": [[0, 0]]}}}]

spec_st = st.sampled_from(POOL).map(parse_spec)
N_st = st.sampled_from([10 ** 3, 10 ** 4, 10 ** 5])


def test_distance_examples():
    expected = 2 * sum(1 / p for p in (2, 3, 5, 7, 11, 13, 17, 19))
    assert abs(distance_sq("liouville", "one", 20) - expected) <= 1e-15
    assert abs(distance_sq("liouville", "one", 20) - 2.9109556) <= 1e-6
    assert distance_sq("liouville", "liouville", 10 ** 4) == 0
    assert distance_sq("mobius", "liouville", 10 ** 6) == 0


def test_distance_rejects_small_N():
    with pytest.raises(ValueError):
        distance_sq("one", "one", 1)


def test_archimedean_distance_examples():
    assert distance_to_archimedean("one", 0.0, 10 ** 5) == 0
    assert distance_to_archimedean("archimedean:1.75", 1.75, 10 ** 5) <= 1e-12
    v = distance_to_archimedean("one", 1.0, 10 ** 6)
    assert abs(math.sqrt(v) - math.sqrt(math.log(1 + math.log(10 ** 6)))) <= 2


@given(spec_st, spec_st, spec_st, N_st)
def test_triangle_inequality(f, g, h, N):
    d = lambda a, b: math.sqrt(distance_sq(a, b, N))  # noqa: E731
    assert d(f, g) <= d(f, h) + d(h, g) + 1e-9


@given(spec_st, spec_st, spec_st, spec_st, N_st)
def test_product_inequality(f1, f2, g1, g2, N):
    lhs = math.sqrt(distance_sq(Product((f1, f2)), Product((g1, g2)), N))
    rhs = math.sqrt(distance_sq(f1, g1, N)) + math.sqrt(distance_sq(f2, g2, N))
    assert lhs <= rhs + 1e-9


@given(spec_st, spec_st, st.integers(2, 5000), st.integers(0, 5000))
def test_monotone_in_N(f, g, N1, extra):
    assert distance_sq(f, g, N1) <= distance_sq(f, g, N1 + extra)


def test_distance_profile():
    prof = distance_profile("root_of_unity:3", "one", [10, 100, 1000, 10_000])
    assert prof.values == sorted(prof.values)
    assert prof.values[-1] == distance_sq("root_of_unity:3", "one", 10_000)
    assert distance_profile("liouville", 0.0, [10]).values[0] == distance_sq(
        "liouville", "one", 10)


def test_min_distance_examples():
    r = min_distance("one", 10 ** 4)
    assert (r.t_star, r.value) == (0.0, 0.0)
    r = min_distance("archimedean:0.5", 10 ** 4)
    assert r.value <= 1e-6 and abs(r.t_star - 0.5) <= 1e-3


@pytest.mark.parametrize("f", ["liouville", "root_of_unity:3", "character:5:2",
                               "character:4:1", "complete_root_of_unity:3"])
@pytest.mark.parametrize("N", [10 ** 3, 10 ** 4])
def test_min_distance_bounds(f, N):
    r = min_distance(f, N)
    assert 0 <= r.value <= r.grid_value <= distance_to_archimedean(f, 0.0, N) + 1e-12
    assert abs(r.t_star) <= N
    assert abs(distance_to_archimedean(f, r.t_star, N) - r.value) <= 1e-12
    # a nested finer grid cannot raise the grid minimum
    fine = min_distance(f, N, SearchConfig(step_scale=0.125, log_step=0.025))
    assert fine.grid_value <= r.grid_value + 1e-9


def test_grid_covers_range():
    ts = SearchConfig().grid(10 ** 4)
    assert ts.min() >= -10 ** 4 and ts.max() <= 10 ** 4
    assert 0.0 in ts and ts.max() > 0.9 * 10 ** 4
    small = ts[abs(ts) < 0.5]
    step = 1 / (4 * math.log(10 ** 4) ** 2)
    assert abs(small[1:] - small[:-1] - step).max() <= 1e-12
    assert 1.0 in ts and -1.0 in ts


def test_root_of_unity_curve_increases():
    vals = [min_distance("root_of_unity:3", N).value for N in (10 ** 4, 10 ** 5)]
    assert vals[0] < vals[1]


def test_scan_verdicts():
    assert strong_aperiodicity_scan("one", 3, [100, 1000]).verdict == "evidence-not"
    chi = character_group(4)[1]
    rep = strong_aperiodicity_scan(chi, 4, [1000, 10_000])
    assert rep.verdict == "evidence-not"
    # the twist by chi itself pretends to be 1 away from p = 2
    c = next(c for c in rep.curves if c.q == 4 and c.index == 1)
    assert abs(c.values[-1] - 0.5) <= 1e-9
    rows = list(rep.rows())
    assert len(rows) == 2 * sum(len(character_group(q)) for q in range(1, 5))


def test_scan_validates_cutoffs():
    with pytest.raises(ValueError):
        strong_aperiodicity_scan("liouville", 2, [1000, 100])


def test_aperiodicity_mean_examples():
    assert aperiodicity_mean("one", 3, 2, 1000) == 1
    assert abs(aperiodicity_mean("liouville", 1, 0, 10 ** 6)) <= 0.01
    chi = character_group(3)[1]
    assert aperiodicity_mean(chi, 3, 1, 3 * 10 ** 5) == 1
    assert aperiodicity_mean(chi, 3, 0, 100) == 0
