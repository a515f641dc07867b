import pytest
from hypothesis import given, strategies as st

from lielat.counting import formula_order
from lielat.endo import diag_weights, index
from lielat.lattice import build_family
from lielat.ssindex import (
    F,
    FieldParams,
    IndexQuery,
    PreconditionViolation,
    SSIndexError,
    check_preconditions,
    dims,
    evaluate,
    min_index_bound,
    ss_index,
)

GROUP_OF = {"SL": "SL", "Sp": "Sp", "SO_even": "SO", "SO_odd": "SO"}
LATTICE_OF = {"SL": "sl", "Sp": "sp", "SO_even": "so_even", "SO_odd": "so_odd"}


def test_field_params():
    fp = FieldParams(5, 2, 3)
    assert (fp.d, fp.q, fp.theta) == (6, 125, 1)
    for bad in (2, 4, 9):
        with pytest.raises(SSIndexError):
            FieldParams(bad)


def test_query_validation():
    assert IndexQuery("sl", 2).n == 3
    assert IndexQuery("SO_odd", 2).n == 5
    assert IndexQuery("Sp", 1, level="congruence").level == "congruence_group"
    for kw in (dict(family="gl", l=1), dict(family="SL", l=0), dict(family="SL", l=1, k=0),
               dict(family="SL", l=1, level="tree")):
        with pytest.raises(SSIndexError):
            IndexQuery(**kw)


def test_precondition_examples():
    assert check_preconditions(IndexQuery("SL", 1), FieldParams(3)) == []
    (v,) = check_preconditions(IndexQuery("SL", 2), FieldParams(3))
    assert str(v) == "(l^2+2l)d <= p: 8 > 3"
    assert check_preconditions(IndexQuery("Sp", 1, level="lattice"), FieldParams(5)) == []
    assert check_preconditions(IndexQuery("Sp", 9, level="lattice"), FieldParams(3)) == []


def test_precondition_m_and_l():
    bad = check_preconditions(IndexQuery("SL", 1, m=1), FieldParams(101, e=2))
    assert [v.name for v in bad] == ["m >= e"]
    bad = check_preconditions(IndexQuery("SO_even", 1), FieldParams(101))
    assert "l >= 2" in [v.name for v in bad]
    bad = check_preconditions(IndexQuery("SO_even", 1, level="lattice"), FieldParams(101))
    assert [v.name for v in bad] == ["l >= 2"]
    bad = check_preconditions(IndexQuery("SO_odd", 1, level="congruence"), FieldParams(3))
    assert "n >= 3" not in [v.name for v in bad] and bad == []
    with pytest.raises(PreconditionViolation) as err:
        ss_index(IndexQuery("SL", 2), FieldParams(3))
    assert "8 > 3" in str(err.value)


def test_index_examples():
    assert ss_index(IndexQuery("SL", 1, 1, 1), FieldParams(3)) == 72
    for m in (1, 2, 3):
        assert ss_index(IndexQuery("SL", 1, 2, m, "congruence_group"), FieldParams(3)) == 9
    assert ss_index(IndexQuery("Sp", 1, 1, 0, "lattice"), FieldParams(3)) == 9


def test_bound_examples():
    assert min_index_bound(IndexQuery("SL", 1, level="congruence"), FieldParams(3)) == 3
    assert min_index_bound(IndexQuery("SL", 1), FieldParams(3)) == 72
    assert min_index_bound(IndexQuery("SO_odd", 2, level="congruence"), FieldParams(11)) == 11 ** 3
    assert min_index_bound(IndexQuery("SL", 1, k=3, m=4), FieldParams(3)) == 72


def test_dims_examples():
    assert dims("SL", 3, 1) == 8
    assert dims("Sp", 4, 2) == 20
    assert dims("SO", 5, 1) == 10
    with pytest.raises(SSIndexError):
        dims("Sp", 3)


@pytest.mark.parametrize("family,n", [("sl", n) for n in range(2, 7)] + [("sp", 4), ("sp", 6),
                                      ("so_even", 6), ("so_odd", 7)])
def test_dims_match_basis(family, n):
    for d in (1, 2, 4):
        assert dims(family, n, d) == build_family(family, n).dim * d


def _grid():
    for p in (3, 5, 7, 11):
        for family in GROUP_OF:
            for l in (1, 2, 3):
                for k in (1, 2, 3):
                    for m in (1, 2, 3):
                        yield family, l, p, k, m


def test_bridge_identity_grid():
    checked = 0
    for family, l, p, k, m in _grid():
        fp = FieldParams(p)
        q = IndexQuery(family, l, k, m)
        if check_preconditions(q, fp):
            continue
        want = formula_order(GROUP_OF[family], q.n, fp.q, m).value * \
            ss_index(IndexQuery(family, l, k, m, "congruence_group"), fp)
        assert ss_index(q, fp) == want
        checked += 1
    assert checked > 0


@given(st.sampled_from(sorted(GROUP_OF)), st.integers(1, 3), st.integers(1, 3),
       st.integers(0, 4), st.sampled_from([(3, 1, 1), (5, 1, 2), (7, 2, 1), (101, 1, 1)]))
def test_lattice_equals_congruence_and_endo(family, l, k, m, pef):
    if family == "SO_even" and l < 2:
        return
    fp = FieldParams(*pef)
    lat = ss_index(IndexQuery(family, l, k, m, "lattice"), fp)
    assert lat == fp.q ** (F(family, IndexQuery(family, l).n) * k)
    cq = IndexQuery(family, l, k, max(m, fp.e), "congruence_group")
    if not check_preconditions(cq, fp):
        assert ss_index(cq, fp) == lat
    endo = diag_weights(build_family(LATTICE_OF[family], cq.n), k)
    assert index(endo, fp.q) == lat


@given(st.sampled_from(sorted(GROUP_OF)), st.integers(1, 4), st.integers(1, 4),
       st.integers(1, 4), st.sampled_from([3, 9, 25, 27]))
def test_full_group_values_are_integers(family, l, k, m, q):
    from lielat.ssindex import full_group_index
    if family == "SO_even" and l < 2:
        return
    v = full_group_index(family, l, q, k, m)
    assert isinstance(v, int) and v >= 1


def test_record_json():
    rec = evaluate(IndexQuery("SL", 1), FieldParams(3)).to_json()
    assert rec["value"] == "72" and rec["preconditions"] == [] and rec["level"] == "full_group"
    rec = evaluate(IndexQuery("SL", 2), FieldParams(3)).to_json()
    assert rec["value"] is None and rec["preconditions"] == ["(l^2+2l)d <= p: 8 > 3"]
    rec = evaluate(IndexQuery("SL", 1, level="bound", bound_of="congruence"), FieldParams(3)).to_json()
    assert rec["level"] == "bound_congruence" and rec["value"] == "3"
