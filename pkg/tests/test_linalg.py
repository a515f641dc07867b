import pytest
from hypothesis import given, strategies as st

from lielat.linalg import (
    DimensionError,
    FormKind,
    Mat,
    block_membership,
    complete_to_invertible,
    gram,
    is_member,
)
from lielat.ring import NotInvertible, make_ring

Z3 = make_ring(3)
Z9 = make_ring(3, m=2)
GR = make_ring(3, f=2, defining_data=[1, 0, 1])


def mats(ring, n):
    entry = st.tuples(*[st.integers(0, mod - 1) for mod in ring.moduli])
    return st.lists(st.lists(entry, min_size=n, max_size=n), min_size=n, max_size=n).map(
        lambda rows: Mat.from_rows(ring, rows))


@given(mats(Z9, 3), mats(Z9, 3))
def test_det_multiplicative(a, b):
    assert (a @ b).det() == a.det() * b.det()


@given(mats(GR, 2))
def test_inverse_when_det_unit(a):
    if a.det().is_unit():
        assert a @ a.inverse() == Mat.identity(GR, 2)
    else:
        with pytest.raises(NotInvertible):
            a.inverse()


def test_forms():
    S4 = gram(FormKind.ORTH_EVEN, 4, Z3)
    assert S4.det() == Z3(1)
    assert S4.to_literal() == "0,0,1,0;0,0,0,1;1,0,0,0;0,1,0,0"
    assert gram("orth_odd", 3, Z3).to_literal() == "0,1,0;1,0,0;0,0,1"
    assert gram("sympl", 2, Z3).to_literal() == "0,1;2,0"
    assert gram("so_split_odd", 3, Z3).to_literal() == "1,0,0;0,0,1;0,1,0"
    with pytest.raises(DimensionError):
        gram("orth_even", 3, Z3)


def test_membership_examples():
    D = Mat.diag(Z9, [2, 5])
    assert D.det() == Z9.one and is_member(D, "SL")
    a = Z9(2)
    anti = Mat.from_rows(Z9, [[0, a], [a.inverse(), 0]])
    assert is_member(anti, "O") and not is_member(anti, "SO")
    assert is_member(Mat.parse(Z3, "1,1;0,1"), "Sp")
    assert not is_member(Mat.parse(Z3, "1,1;0,1"), "O")


def test_parse_and_literal():
    M = Mat.parse(GR, "1:2,0;0,1")
    assert M[0, 0] == GR((1, 2))
    assert Mat.parse(GR, M.to_literal()) == M


def test_block_equations_even():
    l = 2
    I, Z = Mat.identity(Z9, l), Mat.zeros(Z9, l)
    W = Mat.parse(Z9, "0,1;8,0")
    ok = block_membership([[I, Z], [W, I]])
    assert ok and "W + W^t = 0" in ok.checked
    bad = block_membership([[I, Z], [Mat.parse(Z9, "1,0;0,0"), I]])
    assert not bad and "W + W^t = 0" in bad.failed


def test_block_equations_odd_unitriangular():
    l = 1
    I, Z = Mat.identity(Z9, l), Mat.zeros(Z9, l)
    x = Mat.parse(Z9, "3")
    # W + W^t = -x^t x = -9 = 0, so W = 0
    W = Mat.from_rows(Z9, [[0]])
    v = Mat.from_rows(Z9, [[-3]])
    zc = Mat.zeros(Z9, 1, 1)
    res = block_membership([[I, Z, zc], [W, I, v], [x, Z, Z9.one]])
    assert res, res.failed
    assert "v = -w x^t" in res.checked
    wrong = block_membership([[I, Z, zc], [W, I, zc], [x, Z, Z9.one]])
    assert "v = -w x^t" in wrong.failed


@given(st.lists(st.integers(0, 8), min_size=4, max_size=4))
def test_complete_to_invertible(vals):
    x = Mat.column(Z9, vals)
    if not any(Z9(v).is_unit() for v in vals):
        with pytest.raises(NotInvertible):
            complete_to_invertible(x)
        return
    M = complete_to_invertible(x)
    assert M.is_invertible()
    assert M.col(0) == x.col(0)


def test_det_size_limit():
    with pytest.raises(DimensionError):
        Mat.identity(Z3, 9).det()
