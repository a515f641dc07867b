import numpy as np
import pytest
from hypothesis import given, strategies as st

from lielat.counting import (
    CountingError,
    IsotropicVector,
    StabilizerParams,
    brute_count,
    brute_count_Cn,
    brute_elements,
    brute_isotropic_vectors,
    cn_closed,
    cn_recursive,
    cn_symbolic_check,
    complete_to_orthogonal,
    coords_to_mat,
    formula_Cn,
    formula_order,
    orbit_count,
    stabilizer_element,
    stabilizer_params,
    stabilizer_size,
)
from lielat.linalg import Mat, gram, is_member
from lielat.ring import BudgetExceeded, make_ring

# values of the naive enumerations in oracles.py, frozen
ORACLE_ORDERS = {
    ("O", 1, 3, 1): 2, ("O", 1, 3, 2): 2, ("O", 2, 3, 1): 4, ("O", 2, 5, 1): 8,
    ("O", 2, 3, 2): 12, ("O", 2, 5, 2): 40, ("O", 3, 3, 1): 48, ("O", 3, 5, 1): 240,
    ("SO", 1, 3, 1): 1, ("SO", 2, 3, 1): 2, ("SO", 2, 5, 1): 4, ("SO", 2, 3, 2): 6,
    ("SO", 2, 5, 2): 20, ("SO", 3, 3, 1): 24, ("SO", 3, 5, 1): 120,
    ("Sp", 2, 3, 1): 24, ("Sp", 2, 5, 1): 120, ("Sp", 2, 7, 1): 336, ("Sp", 2, 3, 2): 648,
    ("Sp", 2, 5, 2): 15000,
    ("SL", 2, 3, 1): 24, ("SL", 2, 5, 1): 120, ("SL", 2, 7, 1): 336, ("SL", 2, 3, 2): 648,
    ("SL", 2, 5, 2): 15000, ("SL", 3, 3, 1): 5616,
}
ORACLE_CN = {
    (2, 3, 1): 4, (3, 3, 1): 8, (4, 3, 1): 32, (5, 3, 1): 80, (2, 3, 2): 12, (3, 3, 2): 72,
    (4, 3, 2): 864, (2, 5, 1): 8, (3, 5, 1): 24, (4, 5, 1): 144, (2, 5, 2): 40, (3, 5, 2): 600,
}


def test_formula_examples():
    assert formula_order("SO", 3, 3, 1).value == 24
    assert formula_order("O", 2, 3, 1).value == 4
    assert formula_order("SL", 2, 3, 1).value == 24
    assert formula_Cn(2, 3, 1) == 4 and formula_Cn(3, 3, 1) == 8
    for q in (3, 5, 9):
        assert cn_closed(2, q) == 2 * q - 1 == cn_recursive(2, q)


@pytest.mark.parametrize("key", sorted(ORACLE_ORDERS))
def test_orders_against_oracle(key):
    group, n, p, m = key
    ring = make_ring(p, m=m)
    want = ORACLE_ORDERS[key]
    assert brute_count(group, n, ring).value == want
    assert formula_order(group, n, ring.q, m).value == want
    if group in ("O", "SO"):
        assert orbit_count(group, n, ring).value == want
        assert orbit_count(group, n, ring, cn_method="brute").value == want


@pytest.mark.parametrize("key", sorted(ORACLE_CN))
def test_cn_against_oracle(key):
    n, p, m = key
    assert brute_count_Cn(n, make_ring(p, m=m)) == ORACLE_CN[key] == formula_Cn(n, p, m)


@pytest.mark.parametrize("group,n,p,m", [("O", 3, 3, 2), ("SO", 3, 5, 2), ("O", 4, 3, 1),
                                          ("SO", 4, 5, 1), ("O", 4, 5, 1), ("Sp", 2, 7, 2),
                                          ("SL", 2, 7, 2), ("Sp", 4, 3, 1)])
def test_three_way_larger(group, n, p, m):
    ring = make_ring(p, m=m)
    values = {brute_count(group, n, ring).value, formula_order(group, n, ring.q, m).value}
    if group in ("O", "SO"):
        values.add(orbit_count(group, n, ring).value)
    assert len(values) == 1


def test_galois_ring_orders():
    ring = make_ring(3, f=2, m=1, defining_data=[1, 0, 1])
    assert brute_count("SO", 3, ring).value == formula_order("SO", 3, 9, 1).value == 720
    assert brute_count("SL", 2, ring).value == formula_order("SL", 2, 9, 1).value
    assert brute_count_Cn(3, ring) == formula_Cn(3, 9, 1)
    eis = make_ring(3, e=2, m=2, defining_data=[3, 0, 1])
    assert brute_count("O", 2, eis).value == orbit_count("O", 2, eis).value == \
        formula_order("O", 2, 3, 2).value


def test_budget_reports_need():
    with pytest.raises(BudgetExceeded) as err:
        brute_count("O", 4, make_ring(3, m=2), budget=10 ** 6)
    assert err.value.needed > 10 ** 6


@given(st.sampled_from([3, 5, 7, 9, 25, 27, 121]), st.integers(1, 4))
def test_sp2_equals_sl2_and_o_twice_so(q, m):
    assert formula_order("Sp", 2, q, m).value == formula_order("SL", 2, q, m).value
    for n in range(1, 8):
        assert formula_order("O", n, q, m).value == 2 * formula_order("SO", n, q, m).value


def test_formula_errors():
    with pytest.raises(CountingError):
        formula_order("Sp", 3, 3, 1)
    with pytest.raises(CountingError):
        formula_order("SL", 2, 4, 1)
    with pytest.raises(CountingError):
        formula_order("SL", 2, 6, 1)


def test_cn_recursion_symbolic():
    assert cn_symbolic_check(12)
    for q in (3, 5, 9):
        for n in range(2, 13):
            assert cn_recursive(n, q) == cn_closed(n, q)
            assert formula_Cn(n, q, 1) == cn_closed(n, q) - 1


@pytest.mark.parametrize("n,m", [(2, 2), (3, 2), (2, 3), (3, 3)])
def test_congruence_kernel_has_det_one(n, m):
    ring = make_ring(3, m=m)
    mats = brute_elements("O", n, ring)
    eye = np.zeros_like(mats[0])
    eye[np.arange(n), np.arange(n), 0] = 1
    kernel = [M for M in mats if np.all((M - eye) % 3 == 0)]
    assert len(kernel) == formula_order("O", n, 3, m).value // formula_order("O", n, 3, 1).value
    assert all(coords_to_mat(ring, M).det() == ring.one for M in kernel)


@pytest.mark.parametrize("n,p", [(2, 3), (3, 3), (4, 3), (2, 5), (3, 5)])
def test_fiber_structure(n, p):
    base = brute_count_Cn(n, make_ring(p))
    for m in (2, 3):
        if p ** (m * n) > 10 ** 6:
            continue
        assert brute_count_Cn(n, make_ring(p, m=m)) == base * p ** ((m - 1) * (n - 1))


def test_coset_separation_o3():
    ring = make_ring(3)
    mats = brute_elements("O", 3, ring)
    firsts = {}
    for M in mats:
        key = tuple(M[:, 0, 0])
        firsts[key] = firsts.get(key, 0) + 1
    iso = {tuple(v[:, 0]) for v in brute_isotropic_vectors(3, ring)}
    assert set(firsts) == iso and len(iso) == 8
    assert set(firsts.values()) == {6} == {stabilizer_size(3, ring)}


def _vec(ring, vals):
    return Mat.column(ring, list(vals))


def test_completion_examples():
    R3 = make_ring(3)
    M = complete_to_orthogonal(_vec(R3, [1, 0, 0, 0]))
    assert M == Mat.identity(R3, 4)
    S = gram("orth_even", 4, R3)
    assert IsotropicVector.certify(_vec(R3, [0, 0, 1, 0])).pivot == "flip"
    assert complete_to_orthogonal(_vec(R3, [0, 0, 1, 0])) == S
    x = _vec(R3, [1, 1, 1])
    M = complete_to_orthogonal(x)
    S3 = gram("orth_odd", 3, R3)
    assert M.T @ S3 @ M == S3 and M @ _vec(R3, [1, 0, 0]) == x


def test_completion_rejects():
    R3 = make_ring(3)
    with pytest.raises(CountingError):
        complete_to_orthogonal(_vec(R3, [1, 0, 1, 0]))
    with pytest.raises(CountingError):
        complete_to_orthogonal(_vec(make_ring(3, m=2), [3, 0, 0, 0]))


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_completion_exhaustive_small(n):
    ring = make_ring(3)
    kind = "orth_odd" if n % 2 else "orth_even"
    S = gram(kind, n, ring)
    e1 = _vec(ring, [1] + [0] * (n - 1))
    for v in brute_isotropic_vectors(n, ring):
        x = coords_to_mat(ring, v[:, None, :])
        M = complete_to_orthogonal(x)
        assert M.T @ S @ M == S and M @ e1 == x


def test_stabilizer_n3_matches_brute_force():
    ring = make_ring(3)
    built = {stabilizer_element(3, ring, prm).to_literal() for prm in stabilizer_params(3, ring)}
    e1 = np.array([1, 0, 0])
    brute = {coords_to_mat(ring, M).to_literal()
             for M in brute_elements("O", 3, ring) if np.array_equal(M[:, 0, 0], e1)}
    assert len(built) == 6 and built == brute


def test_stabilizer_identity_and_n3_entries():
    ring = make_ring(3)
    assert stabilizer_element(4, ring, StabilizerParams((0,), (0,), None, None)) == \
        Mat.identity(ring, 4)
    inner = Mat.from_rows(ring, [[-1]])
    M = stabilizer_element(3, ring, StabilizerParams((), (), ring(1), inner))
    half = ring(2).inverse()
    assert M[1, 1] == ring.one and M[0, 1] == -(ring(1) * half)
    assert M[0, 2] == ring(1)  # -gamma * nu with gamma = -1


@pytest.mark.parametrize("n,m", [(4, 1), (5, 1), (4, 2)])
def test_stabilizer_larger(n, m):
    ring = make_ring(3, m=m)
    e1 = _vec(ring, [1] + [0] * (n - 1))
    seen = set()
    for prm in stabilizer_params(n, ring):
        M = stabilizer_element(n, ring, prm)
        assert is_member(M, "O") and M @ e1 == e1
        seen.add(M.to_literal())
    assert len(seen) == stabilizer_size(n, ring)
