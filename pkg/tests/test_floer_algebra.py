import json

import numpy as np
import pytest

from brieskorn_rfh import floer_algebra as fa
from brieskorn_rfh.errors import AxiomViolation, InputError

from .oracles import window_homology


def random_triples(count=100, seed=2024):
    rng = np.random.default_rng(seed)
    return [fa.random_triple(rng, int(rng.integers(1, 13)), max_action=5) for _ in range(count)]


def test_worked_example():
    t = fa.worked_example()
    assert fa.validate(t).ok
    h = fa.homology_window(t)
    assert h.dim == 2
    red = fa.build_reduction(t)
    assert fa.reduced_boundary_terms(red) == [("[a1]", ["[b0]"])]
    r = fa.reduced_homology(red)
    assert r.dim == r.fh_dim == 2 and r.isomorphism and r.filtration_preserving


def test_zero_boundary_gives_chain_complex():
    t = fa.zero_triple(["x", "y", "z"], [0, 1, 1], [0, 1, 2])
    assert fa.homology_window(t).dims_by_degree == {0: 1, 1: 1, 2: 1}


def test_axiom_violations():
    bad_order = fa.FloerTriple.build([("x", 0, 1), ("y", 1, 0)], [("x", "y")])
    rep = fa.validate(bad_order)
    assert not rep.ok and rep.axiom == "ii"
    not_square_zero = fa.FloerTriple.build([("x", 2, 2), ("y", 1, 1), ("z", 0, 0)], [("x", "y"), ("y", "z")])
    assert fa.validate(not_square_zero).axiom == "iii"
    with pytest.raises(AxiomViolation):
        fa.homology_window(not_square_zero)


def test_json_round_trip(tmp_path):
    t = fa.worked_example()
    again = fa.FloerTriple.from_json(json.dumps(t.to_dict()))
    assert again.names == t.names and np.array_equal(again.D % 2, t.D % 2)
    with pytest.raises(InputError):
        fa.FloerTriple.from_json("{")
    with pytest.raises(InputError):
        fa.FloerTriple.from_dict({"generators": [{"name": "x"}]})


@pytest.mark.parametrize("prefer", ["lowest", "highest"])
def test_reduction_matches_direct_homology(prefer):
    for t in random_triples():
        assert fa.validate(t).ok
        r = fa.reduced_homology(fa.build_reduction(t, prefer))
        assert r.isomorphism and r.filtration_preserving
        assert {d: k for d, k in r.dims_by_degree.items() if k} == window_homology(t, -np.inf, np.inf)


def test_window_homology_matches_oracle():
    for t in random_triples(40, seed=7):
        for a, b in ((0, 2), (1, 4), (3, 5)):
            got = fa.homology_window(t, a, b).dims_by_degree
            assert {d: k for d, k in got.items() if k} == window_homology(t, a, b)


def test_limit_stabilises():
    for t in random_triples():
        lim = fa.limit_homology(t)
        assert lim.certified
        assert lim.dim == fa.homology_window(t).dim


def test_long_exact_sequence():
    for t in random_triples(40, seed=11):
        assert fa.les_check(t, 0, 2, 5).exact
        assert fa.les_check(t, 1, 1, 3).exact
    with pytest.raises(InputError):
        fa.les_check(fa.worked_example(), 2, 1, 3)
