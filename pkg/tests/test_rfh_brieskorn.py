import math
from fractions import Fraction

import pytest

from brieskorn_rfh import rfh_brieskorn as rfh
from brieskorn_rfh.errors import DegreeInForbiddenWindow, InputError, NotExact


@pytest.fixture(scope="module")
def equal_model():
    return rfh.chain_model((4, 4, 4, 4), 40)


@pytest.fixture(scope="module")
def sphere_model():
    return rfh.chain_model((2, 2, 2, 13), 40)


def test_policy_ladder(sphere_model):
    m = sphere_model
    rules = {p.rule for d in range(-30, 30) for p in m.pairs(d)}
    assert rules <= {rfh.FORCED_ACTION, rfh.FORCED_MORSE, rfh.SYMMETRY, rfh.UNKNOWN}
    for d in range(-30, 30):
        for p in m.pairs(d):
            if p.target.L > p.source.L:
                assert p.rule == rfh.FORCED_ACTION
            elif p.target.L == p.source.L:
                assert p.rule == rfh.FORCED_MORSE


def test_symmetry_windows():
    assert rfh.symmetry_windows((2, 2, 2), (-5, 5)) == [(-math.inf, math.inf)]
    assert rfh.symmetry_windows((2, 2, 2, 13), (-5, 5)) == [(5, 11), (-10, -4)]
    assert rfh.symmetry_windows((4, 4, 4, 4), (-5, 5)) == []
    assert (5, 8) in rfh.symmetry_windows((2, 2, 2, 10), (-30, 30))


def test_equal_tuple_table(equal_model):
    table = rfh.rfh_dims(equal_model, range(-30, 31))
    for d, e in table.entries.items():
        if d in (-2, 3):
            assert e.kind == "infinite" and e.slope == Fraction(1, 4)
        elif d in (0, 1):
            assert e.kind in ("unknown", "at_least")
        else:
            assert (e.kind, e.value) == ("exact", 0)


def test_equal_tuple_census_and_growth(equal_model):
    for sign, degree in (("+", 3), ("-", -2)):
        cutoffs, counts = rfh.census(equal_model, sign, degree)
        assert counts == list(range(1, 11))
        assert cutoffs[0] == pytest.approx(4 * math.pi / 2)
        g = rfh.growth_rate(equal_model, sign, "id", degree)
        assert (g.gamma, g.exact) == (1.0, True)
        assert rfh.growth_rate(equal_model, sign, "log", degree).gamma == math.inf
        assert rfh.growth_rate(equal_model, sign, "exp", degree).gamma == 0.0


def test_growth_shapes():
    a = list(range(1, 21))
    assert rfh.growth_from_counts(a, [0] * 20, "id")[:2] == (-math.inf, True)
    assert rfh.growth_from_counts(a, [3] * 20, "id")[:2] == (0.0, True)
    assert rfh.growth_from_counts(a, [math.exp(x) for x in a], "id")[0] == math.inf
    assert rfh.growth_from_counts(a, [x**2 for x in a], "id")[0] == pytest.approx(2.0, abs=0.05)
    with pytest.raises(InputError):
        rfh.growth_from_counts(a, a, "sqrt")


def test_sphere_family_windows(sphere_model):
    table = rfh.rfh_dims(sphere_model, range(-12, 13))
    for d in list(range(5, 12)) + list(range(-10, -3)):
        e = table[d]
        assert (e.kind, e.value) == ("exact", 2)
        assert rfh.SYMMETRY in e.rules


def test_uncovered_degrees_are_unknown():
    model = rfh.chain_model((2, 2, 2, 13), 4)
    lo, hi = model.covered_range()
    e = rfh.rfh_entry(model, hi + 5)
    assert e.kind == "unknown" and e.rules == ("uncovered",)


def test_sstar_table():
    table = rfh.sstar_s2_table()
    assert len(table.entries) == 41
    assert all((e.kind, e.value) == ("exact", 2) for e in table.entries.values())


def test_distinguish_sigma_l():
    w = rfh.distinguish((2, 2, 2, 10), (2, 2, 2, 14))
    assert w is not None
    assert w.first.interval()[1] <= 1 and w.second.interval() == (2, 2)
    assert rfh.distinguish((2, 2, 2, 10), (2, 2, 2, 10)) is None


def test_connected_sum():
    b = rfh.rfh_dims(rfh.chain_model((2, 2, 2, 13), 40), [7, 8])
    s = rfh.connected_sum_dims([b, b], 3)
    assert s[7].value == 8
    with pytest.raises(DegreeInForbiddenWindow):
        rfh.connected_sum_dims([b, b], 1, [2])
    u = rfh.rfh_dims(rfh.chain_model((2, 2, 2, 13), 2), [30])
    with pytest.raises(NotExact):
        rfh.connected_sum_dims([b, u], 1, [30])


def test_table_serialisation(sphere_model):
    table = rfh.rfh_dims(sphere_model, range(5, 8))
    assert table.to_csv().splitlines()[0] == "degree,kind,value,lo,hi,slope,rules"
    assert [e["degree"] for e in table.as_dict()["degrees"]] == [5, 6, 7]
