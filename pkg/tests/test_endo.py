import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lielat.endo import (
    EndoError,
    PrecisionExhausted,
    Witness,
    d_infinity,
    default_precision,
    diag_weights,
    domain,
    escape_sweep,
    escape_witness,
    index,
    kernel_intersection_trivial,
    replay,
)
from lielat.lattice import bracket, build_family
from lielat.ring import make_ring
from lielat.ssindex import F

FAMS = [("sl", 2), ("sl", 3), ("sl", 4), ("sp", 2), ("sp", 4), ("sp", 6),
        ("so_even", 4), ("so_even", 6), ("so_odd", 3), ("so_odd", 5), ("so_odd", 7)]


def _endo(family, n, k=1, ring=None):
    return diag_weights(build_family(family, n, ring), k)


def test_weights_sl3():
    w = _endo("sl", 3).weights
    assert w["e13"] == w["e23"] == -1
    assert w["e31"] == w["e32"] == 1
    assert all(w[lab] == 0 for lab in ("h1", "h2", "e12", "e21"))


def test_weights_sp4_and_so3():
    assert _endo("sp", 4).weights["q22"] == -2
    assert _endo("sp", 4).weights["n22"] == 2
    w = _endo("so_odd", 3).weights
    assert (w["b1"], w["c1"], w["m11"]) == (-1, 1, 0)


@pytest.mark.parametrize("family,n", FAMS)
@pytest.mark.parametrize("k", [1, 2, 3])
def test_weight_antisymmetry(family, n, k):
    endo = _endo(family, n, k)
    lat = endo.lattice
    for i in lat.root_indices:
        neg = lat.grade_index(tuple(-g for g in lat.grades[i]))
        assert endo.weights[lat.labels[i]] == -endo.weights[lat.labels[neg]]
    assert all(endo.weights[lat.labels[i]] == 0 for i in lat.h_indices)


def test_domain_examples():
    c = domain(_endo("sl", 3)).exponents
    assert {lab for lab, v in c.items() if v} == {"e13", "e23"} and c["e13"] == 1
    c = domain(_endo("sp", 4)).exponents
    assert sorted(v for v in c.values() if v) == [1, 1, 2]
    assert c["q22"] == 2


@pytest.mark.parametrize("family,n", FAMS)
def test_domain_doubles_with_k(family, n):
    c1 = domain(_endo(family, n, 1)).exponents
    c2 = domain(_endo(family, n, 2)).exponents
    assert c2 == {lab: 2 * v for lab, v in c1.items()}


def test_index_examples():
    assert index(_endo("sl", 3), 3) == 9
    assert index(_endo("sp", 4), 3) == 81
    assert index(_endo("so_odd", 3, 2), 5) == 25


@pytest.mark.parametrize("family,n", FAMS)
@pytest.mark.parametrize("k", [1, 2, 3])
def test_index_exponent_and_shift(family, n, k):
    endo = _endo(family, n, k)
    for q in (3, 5, 9):
        want = q ** (F(family, n) * k)
        assert index(endo, q) == want
        assert index(endo, q, shift=2) == want


def test_index_rejects_wrong_q():
    with pytest.raises(EndoError):
        index(_endo("sl", 2, ring=make_ring(3, m=2)), 5)


def test_d_infinity_examples():
    assert set(d_infinity(_endo("sl", 3)).dropped) == {"e13", "e23"}
    assert len(d_infinity(_endo("so_even", 4)).dropped) == 2
    assert d_infinity(_endo("so_odd", 3)).dropped == ("b1",)


@pytest.mark.parametrize("family,n", FAMS)
def test_d_infinity_contains_h_and_closed_under_h(family, n):
    R = make_ring(3, m=3)
    endo = _endo(family, n, ring=R)
    dinf = d_infinity(endo)
    lat = endo.lattice
    assert all(lat.labels[i] in dinf.kept for i in lat.h_indices)
    for i in lat.h_indices:
        for lab in dinf.kept:
            y = bracket(lat.basis_element(lat.labels[i], R), lat.basis_element(lab, R))
            assert dinf.contains(y)


def test_kernel_intersection():
    sl3 = _endo("sl", 3)
    assert kernel_intersection_trivial(sl3.lattice, sl3.outside_psi)
    sp4 = _endo("sp", 4)
    assert kernel_intersection_trivial(sp4.lattice, sp4.outside_psi)
    assert not kernel_intersection_trivial(sl3.lattice, [sl3.lattice.root_of("e12")])
    with pytest.raises(EndoError):
        kernel_intersection_trivial(sl3.lattice, [])


R34 = make_ring(3, m=default_precision(1, 1))
SL3 = _endo("sl", 3, ring=R34)


def _x(label, s=1):
    return SL3.lattice.basis_element(label, R34, s)


def test_witness_case_one():
    w = escape_witness(_x("e13"), SL3, 1)
    assert w.steps == [] and w.escaping_label == "e13" and w.cases == (1,)


def test_witness_case_two():
    w = escape_witness(_x("h1"), SL3, 1)
    assert w.steps == [("e13", 1)] and w.cases == (2,)
    out = replay(_x("h1"), SL3, w)
    assert out.support() == ["e13"] and out["e13"].valuation() == 2


def test_witness_case_three():
    w = escape_witness(_x("e31"), SL3, 1)
    assert [lab for lab, _ in w.steps] == ["e13", "e13"] and w.cases == (3, 2)
    mid = bracket(_x("e31"), _x("e13"))
    assert all(lab.startswith("h") for lab in mid.support())
    assert not d_infinity(SL3).contains(replay(_x("e31"), SL3, w))


def test_witness_errors():
    with pytest.raises(PrecisionExhausted):
        escape_witness(SL3.lattice.zero(R34), SL3, 1)
    with pytest.raises(EndoError):
        escape_witness(_x("h1", 0), SL3, 1)


def test_witness_json_round_trip():
    w = escape_witness(_x("e31"), SL3, 1)
    data = w.to_json()
    assert set(data) == {"steps", "escaping_label", "valuation"}
    back = Witness.from_json(data)
    assert back.steps == w.steps and replay(_x("e31"), SL3, back) == replay(_x("e31"), SL3, w)


LATS = {fn: _endo(*fn, ring=make_ring(5, m=default_precision(1, 1)))
        for fn in [("sl", 3), ("sp", 4), ("so_odd", 5), ("so_even", 4)]}


@settings(max_examples=80)
@given(st.sampled_from(sorted(LATS)), st.data())
def test_witness_random_elements(fn, data):
    endo = LATS[fn]
    lat, R = endo.lattice, endo.lattice.ring
    coeffs = data.draw(st.lists(st.integers(0, R.size - 1), min_size=lat.dim, max_size=lat.dim))
    x = lat.element([R(5 * c) for c in coeffs], R)
    if x.is_zero():
        return
    w = escape_witness(x, endo, 1)
    assert len(w.steps) <= 2
    final = replay(x, endo, w)
    assert not d_infinity(endo).contains(final)
    assert final[w.escaping_label].valuation() == w.valuation < R.m


@pytest.mark.parametrize("family,n,p,m", [("sl", 2, 3, 0), ("sl", 2, 5, 1), ("sl", 3, 3, 1),
                                          ("so_odd", 3, 3, 0), ("so_even", 4, 3, 1)])
def test_sweep_small(family, n, p, m):
    rep = escape_sweep(build_family(family, n), p, m)
    assert rep.ok
    assert rep.cosets == p ** build_family(family, n).dim - 1
    assert sum(rep.by_case.values()) == rep.cosets
    assert rep.max_valuation < rep.precision


def test_sweep_over_ramified_ring():
    rep = escape_sweep(build_family("sl", 2), 3, 1, e=2, defining_data=[-3, 0, 1])
    assert rep.ok and rep.cosets == 3 ** 3 - 1
