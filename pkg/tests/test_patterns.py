import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from chowlab.functions import tabulate
from chowlab.patterns import (PatternError, PatternQuery, all_patterns, cyclotomic,
                              expanded_residue_indicator, expanded_sign_indicator,
                              pattern_densities, pattern_scan, residue_pattern_density,
                              sign_pattern_density)
from chowlab.sieve import factor


def sign_q(eps, M=10 ** 4, family="n,n^2", point=(3,), functions=("liouville",)):
    return PatternQuery("sign", family, point, M, eps=eps, functions=functions)


def res_q(b, a, counters=("omega",), M=10 ** 4, family="n,n^2", point=(3,)):
    return PatternQuery("residue", family, point, M, moduli=b, residues=a, counters=counters)


def test_single_slot_liouville():
    r = sign_pattern_density(PatternQuery("sign", None, (), 10 ** 6, eps=(1,)))
    assert abs(r.density - 0.5) <= 0.01 and r.target == 0.5
    res = pattern_densities(PatternQuery("sign", None, (), 10 ** 6, eps=(1,)))
    assert res[0].count + res[1].count == 10 ** 6


def test_cyclotomic():
    assert cyclotomic(1) == (-1, 1)
    assert cyclotomic(4) == (1, 0, 1)
    assert cyclotomic(6) == (1, -1, 1)
    assert cyclotomic(12) == (1, 0, -1, 0, 1)


def test_constant_one_sign_mode():
    q = PatternQuery("sign", "n", (4,), 1000, eps=(1, 1), functions=("one",))
    assert sign_pattern_density(q).density == 1
    q = PatternQuery("sign", "n", (4,), 1000, eps=(-1, 1), functions=("one",))
    assert sign_pattern_density(q).density == 0


def test_residue_trivial_modulus():
    q = PatternQuery("residue", "n", (1,), 5000, moduli=(1, 1), residues=(0, 0))
    assert residue_pattern_density(q).density == 1


def test_residue_omega_mod_two_is_liouville_sign():
    r = residue_pattern_density(PatternQuery("residue", "n", (2,), 10 ** 6, moduli=(2, 1),
                                             residues=(0, 0), counters=("Omega",)))
    s = sign_pattern_density(PatternQuery("sign", "n", (2,), 10 ** 6, eps=(1, 1),
                                          functions=("liouville", "one")))
    assert r.count == s.count and abs(r.density - 0.5) <= 0.01


def _oracle_count(q):
    hits = 0
    shifts = q.shifts()
    for m in range(1, q.M + 1):
        ok = True
        for j, s in enumerate(shifts):
            f = factor(m + s)
            if q.mode == "sign":
                ok &= (-1) ** f.big_omega == q.eps[j]
            else:
                c = f.omega if q.counters[j] == "omega" else f.big_omega
                ok &= c % q.moduli[j] == q.residues[j]
        hits += ok
    return hits


@pytest.mark.parametrize("q", [
    sign_q((1, -1, 1), M=2000), sign_q((-1, -1, -1), M=2000, point=(7,)),
    res_q((2, 3, 2), (1, 2, 0), M=2000), res_q((3, 4), (0, 1), ("Omega", "omega"), 2000, "n^2",
                                              (5,)),
])
def test_direct_count_matches_factor_oracle(q):
    r = (sign_pattern_density if q.mode == "sign" else residue_pattern_density)(q)
    assert r.count == _oracle_count(q)


def test_all_eight_sign_patterns():
    q = sign_q((1, 1, 1), M=10 ** 5, point=(10,))
    res = pattern_densities(q)
    assert len(res) == 8 and len({r.query.label for r in res}) == 8
    assert sum(r.count for r in res) == q.M
    for r in res:
        assert abs(r.density - r.expansion_density) <= 1e-9
        assert r.target == 0.125


def test_all_twelve_residue_patterns():
    q = res_q((2, 3, 2), (0, 0, 0), M=10 ** 5, point=(10,))
    res = pattern_densities(q)
    assert len(res) == 12 and sum(r.count for r in res) == q.M
    for r in res:
        assert abs(r.density - r.expansion_density) <= 1e-9
        assert abs(r.expansion_imag) <= 1e-9
        assert r.target == 1 / 12


@given(st.sampled_from(["n", "n,n^2", "n^2 + 1,3*n", "n - 1"]), st.integers(2, 40),
       st.integers(1, 3000), st.data())
def test_expansion_agrees_everywhere(family, n, M, data):
    q0 = PatternQuery("residue", family, (n,), M, moduli=(1,) * (family.count(",") + 2),
                      residues=(0,) * (family.count(",") + 2))
    k = q0.slots
    b = tuple(data.draw(st.integers(1, 5)) for _ in range(k))
    a = tuple(data.draw(st.integers(0, x - 1)) for x in b)
    c = tuple(data.draw(st.sampled_from(["omega", "Omega"])) for _ in range(k))
    q = PatternQuery("residue", family, (n,), M, moduli=b, residues=a, counters=c)
    res = pattern_densities(q)
    assert sum(r.count for r in res) == M
    for r in res:
        assert abs(r.density - r.expansion_density) <= 1e-9
        assert abs(r.expansion_imag) <= 1e-9
    eps = tuple(data.draw(st.sampled_from([1, -1])) for _ in range(k))
    fs = tuple(data.draw(st.sampled_from(["liouville", "one", "character:4:1"]))
               for _ in range(k))
    sq = PatternQuery("sign", family, (n,), M, eps=eps, functions=fs)
    try:
        res = pattern_densities(sq)
    except PatternError:
        return  # a character mod 4 vanishes on even arguments
    assert sum(r.count for r in res) == M
    for r in res:
        assert abs(r.density - r.expansion_density) <= 1e-9


@pytest.mark.parametrize("b", [2, 3, 4])
@pytest.mark.parametrize("spec", ["root_of_unity", "complete_root_of_unity"])
def test_pointwise_residue_identity(b, spec):
    t = tabulate(f"{spec}:{b}", 1, 100_001)
    for a in range(b):
        exact, z = expanded_residue_indicator(t.exponents, b, a)
        ind = (t.exponents.astype(int) % b) == a
        one = np.zeros(exact.shape[1], dtype=np.int64)
        one[0] = 1
        assert np.array_equal(exact, b * np.outer(ind, one))
        assert np.abs(z - ind).max() <= 1e-12


def test_pointwise_sign_identity():
    v = tabulate("liouville", 1, 100_001).values.real
    for eps in (1, -1):
        assert np.array_equal(expanded_sign_indicator(v, eps), (v == eps).astype(float))


def test_errors():
    with pytest.raises(PatternError, match="residue 3"):
        res_q((2, 3, 2), (0, 3, 0))
    with pytest.raises(PatternError):
        sign_q((1, 2, 1))
    with pytest.raises(PatternError, match=r"f1\(4\)"):
        sign_pattern_density(PatternQuery("sign", "n", (2,), 100, eps=(1, 1),
                                          functions=("liouville", "mobius")))
    with pytest.raises(PatternError, match="undefined"):
        residue_pattern_density(PatternQuery("residue", "n - 5", (1,), 10, moduli=(2, 2),
                                             residues=(0, 0)))
    with pytest.raises(PatternError):
        PatternQuery("colour", "n", (1,), 10)


def test_pattern_order():
    q = sign_q((1, 1, 1))
    pats = list(all_patterns(q))
    assert pats[0] == (1, 1, 1) and pats[1] == (-1, 1, 1) and pats[-1] == (-1, -1, -1)
    assert len(set(pats)) == 8
    rq = res_q((2, 3, 2), (0, 0, 0))
    assert list(all_patterns(rq))[:3] == [(0, 0, 0), (1, 0, 0), (0, 1, 0)]
    assert set(all_patterns(rq)) == set(itertools.product(range(2), range(3), range(2)))


def test_scan_constant_one():
    tmpl = PatternQuery("sign", "n,n^2", (1,), 1, eps=(1, 1, 1), functions=("one",))
    s = pattern_scan(tmpl, "1:15", [100, 1000])
    assert s.summary == [1 - 0.125, 1 - 0.125]
    assert all(r.density == 1 for (_, _), res in s.results.items() for r in res[:1])


def test_scan_single_point_matches_query():
    tmpl = sign_q((1, -1, 1), M=1)
    s = pattern_scan(tmpl, "10:10", [20_000])
    r = sign_pattern_density(sign_q((1, -1, 1), M=20_000, point=(10,)))
    got = next(x for x in s.results[((10,), 20_000)] if x.query.label == "+-+")
    assert (got.density, got.expansion_density) == (r.density, r.expansion_density)


def test_scan_records_errors_and_continues():
    tmpl = PatternQuery("sign", "n - 3", (1,), 1, eps=(1, 1))
    s = pattern_scan(tmpl, "1:6", [50])
    # n = 1, 2 reach f(0) = 0
    assert set(s.errors) == {(1,), (2,)}
    assert len(s.results) == 4
