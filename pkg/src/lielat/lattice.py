"""Root-graded classical Lie lattices sl_n, sp_2l, so_2l and so_2l+1.

A lattice is built from its explicit integer basis matrices.  Brackets are
computed once as matrix commutators and re-expanded in the basis, which
yields the integer structure-constant table that everything else uses.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from . import _exact
from .linalg import Mat
from .ring import RingSpec

FAMILIES = ("sl", "sp", "so_even", "so_odd")


class LatticeError(ValueError):
    pass


@dataclass(frozen=True)
class RootSystem:
    """Roots as integer vectors in the epsilon basis (dual to h_1..h_c)."""

    rank: int
    roots: tuple
    family: str

    def __post_init__(self):
        rs = set(self.roots)
        if len(rs) != len(self.roots):
            raise LatticeError("repeated root")
        if tuple([0] * self.rank) in rs:
            raise LatticeError("0 is not a root")
        if any(tuple(-c for c in r) not in rs for r in rs):
            raise LatticeError("root system is not symmetric")
        kind, c = self.family[0], self.rank
        expected = {"A": (c + 1) ** 2 - (c + 1), "B": 2 * c * c, "C": 2 * c * c,
                    "D": 2 * c * c - 2 * c}[kind]
        if len(rs) != expected:
            raise LatticeError(f"{self.family} should have {expected} roots, got {len(rs)}")


def _label(prefix, *idx):
    if all(i < 10 for i in idx):
        return prefix + "".join(str(i) for i in idx)
    return prefix + ",".join(str(i) for i in idx)


def _unit(n, r, c):
    a = np.zeros((n, n), dtype=np.int64)
    a[r, c] = 1
    return a


def _eps(c, *pairs):
    v = [0] * c
    for i, s in pairs:
        v[i - 1] += s
    return tuple(v)


def _sl_basis(n):
    c = n - 1
    labels, mats, grades = [], [], []
    for i in range(1, n):
        labels.append(_label("h", i))
        mats.append(_unit(n, i - 1, i - 1) - _unit(n, n - 1, n - 1))
        grades.append((0,) * c)
    sigma = (1,) * c
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            if i == j:
                continue
            labels.append(_label("e", i, j))
            mats.append(_unit(n, i - 1, j - 1))
            if i < n and j < n:
                g = _eps(c, (i, 1), (j, -1))
            elif j == n:
                g = tuple(s + int(t == i - 1) for t, s in enumerate(sigma))
            else:
                g = tuple(-s - int(t == j - 1) for t, s in enumerate(sigma))
            grades.append(g)
    return c, labels, mats, grades, "A"


def _sp_so_even_basis(n, symplectic):
    l = n // 2
    labels, mats, grades = [], [], []
    sign = 1 if symplectic else -1

    def m(i, j):
        return _unit(n, i - 1, j - 1) - _unit(n, l + j - 1, l + i - 1)

    for i in range(1, l + 1):
        labels.append(_label("m", i, i))
        mats.append(m(i, i))
        grades.append((0,) * l)
    for i in range(1, l + 1):
        for j in range(1, l + 1):
            if i != j:
                labels.append(_label("m", i, j))
                mats.append(m(i, j))
                grades.append(_eps(l, (i, 1), (j, -1)))
    # n_ji (i <= j, or i < j for so) has root eps_i + eps_j; q_ij has -eps_i - eps_j
    for i in range(1, l + 1):
        for j in range(i if symplectic else i + 1, l + 1):
            labels.append(_label("n", j, i))
            if i == j:
                mats.append(_unit(n, i - 1, l + i - 1))
            else:
                mats.append(_unit(n, j - 1, l + i - 1) + sign * _unit(n, i - 1, l + j - 1))
            grades.append(_eps(l, (i, 1), (j, 1)))
    for i in range(1, l + 1):
        for j in range(i if symplectic else i + 1, l + 1):
            labels.append(_label("q", i, j))
            if i == j:
                mats.append(_unit(n, l + i - 1, i - 1))
            else:
                mats.append(_unit(n, l + i - 1, j - 1) + sign * _unit(n, l + j - 1, i - 1))
            grades.append(_eps(l, (i, -1), (j, -1)))
    return l, labels, mats, grades, "C" if symplectic else "D"


def _so_odd_basis(n):
    # indices counted from 0: blocks are {0}, {1..l}, {l+1..2l}
    l = (n - 1) // 2
    labels, mats, grades = [], [], []

    def m(i, j):
        return _unit(n, i, j) - _unit(n, l + j, l + i)

    for i in range(1, l + 1):
        labels.append(_label("m", i, i))
        mats.append(m(i, i))
        grades.append((0,) * l)
    for i in range(1, l + 1):
        labels.append(_label("c", i))
        mats.append(_unit(n, i, 0) - _unit(n, 0, l + i))
        grades.append(_eps(l, (i, 1)))
    for j in range(1, l + 1):
        labels.append(_label("b", j))
        mats.append(_unit(n, 0, j) - _unit(n, l + j, 0))
        grades.append(_eps(l, (j, -1)))
    for i in range(1, l + 1):
        for j in range(1, l + 1):
            if i != j:
                labels.append(_label("m", i, j))
                mats.append(m(i, j))
                grades.append(_eps(l, (i, 1), (j, -1)))
    for i in range(1, l + 1):
        for j in range(i + 1, l + 1):
            labels.append(_label("n", j, i))
            mats.append(_unit(n, j, l + i) - _unit(n, i, l + j))
            grades.append(_eps(l, (i, 1), (j, 1)))
    for i in range(1, l + 1):
        for j in range(i + 1, l + 1):
            labels.append(_label("q", i, j))
            mats.append(_unit(n, l + i, j) - _unit(n, l + j, i))
            grades.append(_eps(l, (i, -1), (j, -1)))
    return l, labels, mats, grades, "B"


def _check_params(family, n):
    if family not in FAMILIES:
        raise LatticeError(f"unknown family {family!r}; expected one of {FAMILIES}")
    if family == "sl" and n < 2:
        raise LatticeError("sl_n needs n >= 2")
    if family == "sp" and (n < 2 or n % 2):
        raise LatticeError("sp_n needs even n >= 2")
    if family == "so_even" and (n % 2 or n < 4):
        raise LatticeError("so_even needs even n >= 4 (l >= 2)")
    if family == "so_odd" and (n % 2 == 0 or n < 3):
        raise LatticeError("so_odd needs odd n >= 3")


class _Coordinates:
    """Exact left inverse of the basis embedding into gl_n."""

    def __init__(self, mats):
        n = mats[0].shape[0]
        self.n = n
        cols = np.stack([a.reshape(-1) for a in mats], axis=1)  # (n^2, dim)
        self.embed = cols
        rows = independent_rows(cols)
        sub = [[int(x) for x in cols[r]] for r in rows]
        inv = _exact.inverse(sub)  # dim x dim, maps selected entries -> coords
        self.rows = rows
        self.inv = inv
        self.integral = all(x.denominator == 1 for row in inv for x in row)
        self.inv_int = np.array([[int(x) for x in row] for row in inv], dtype=np.int64) \
            if self.integral else None

    def exact(self, mat) -> list:
        """Rational coordinates of an integer matrix; raises if outside the span."""
        flat = np.asarray(mat).reshape(-1)
        sel = [Fraction(int(flat[r])) for r in self.rows]
        coords = [sum(a * b for a, b in zip(row, sel)) for row in self.inv]
        back = [sum(Fraction(int(self.embed[t, k])) * coords[k] for k in range(len(coords)))
                for t in range(flat.size)]
        if any(b != int(v) for b, v in zip(back, flat)):
            raise LatticeError("matrix is not in the span of the basis")
        return coords

    def integer_batch(self, mats):
        """Integer coordinates for a stack (N, n, n); verifies each lies in the span."""
        flat = mats.reshape(mats.shape[0], -1)
        coords = flat[:, self.rows] @ self.inv_int.T
        if not np.array_equal(coords @ self.embed.T, flat):
            raise LatticeError("bracket left the span of the basis")
        return coords


def independent_rows(cols):
    return _exact.independent_rows([[int(x) for x in row] for row in cols])


@lru_cache(maxsize=None)
def _integral_data(family, n):
    if family == "sl":
        data = _sl_basis(n)
    elif family == "sp":
        data = _sp_so_even_basis(n, True)
    elif family == "so_even":
        data = _sp_so_even_basis(n, False)
    else:
        data = _so_odd_basis(n)
    rank, labels, mats, grades, kind = data
    coords = _Coordinates(mats)
    stack = np.stack(mats)
    dim = len(mats)
    comm = np.einsum("iab,jbc->ijac", stack, stack) - np.einsum("jab,ibc->ijac", stack, stack)
    if coords.integral:
        table = coords.integer_batch(comm.reshape(dim * dim, n, n)).reshape(dim, dim, dim)
    else:  # pragma: no cover - every family here has an integral coordinate map
        table = np.empty((dim, dim, dim), dtype=object)
        for i in range(dim):
            for j in range(dim):
                table[i, j] = coords.exact(comm[i, j])
    roots = tuple(g for g in grades if any(g))
    rs = RootSystem(rank, roots, f"{kind}{rank}")
    return rank, tuple(labels), tuple(mats), tuple(grades), rs, coords, table


class GradedLattice:
    """Basis (h_1..h_c; e_alpha), grading, realization and structure constants."""

    def __init__(self, family, n, ring=None, _constants=None):
        _check_params(family, n)
        rank, labels, mats, grades, rs, coords, table = _integral_data(family, n)
        self.family = family
        self.n = n
        self.rank = rank
        self.labels = labels
        self.grades = grades
        self.root_system = rs
        self.ring = ring
        self._mats = mats
        self._coords = coords
        self.constants = table if _constants is None else _constants
        self._index = {lab: i for i, lab in enumerate(labels)}
        self.h_indices = tuple(i for i, g in enumerate(grades) if not any(g))
        self.root_indices = tuple(i for i, g in enumerate(grades) if any(g))
        self._by_grade = {g: i for i, g in enumerate(grades) if any(g)}

    @property
    def dim(self) -> int:
        return len(self.labels)

    @property
    def l(self) -> int:
        return self.rank

    def index_of(self, label: str) -> int:
        try:
            return self._index[label]
        except KeyError:
            raise LatticeError(f"no basis element {label!r}") from None

    def label_of_root(self, root) -> str:
        return self.labels[self._by_grade[tuple(root)]]

    def root_of(self, label):
        return self.grades[self.index_of(label)]

    def grade_index(self, grade):
        """Basis index spanning L_grade (None when L_grade = 0 or grade = 0)."""
        return self._by_grade.get(tuple(grade))

    def matrix(self, label) -> np.ndarray:
        return self._mats[self.index_of(label)].copy()

    def realization(self, ring: RingSpec | None = None) -> dict:
        ring = ring or self.ring
        if ring is None:
            raise LatticeError("no ring to realise the lattice over")
        return {lab: Mat.from_rows(ring, a.tolist()) for lab, a in zip(self.labels, self._mats)}

    def coordinates(self, mat) -> list:
        """Exact coordinates of an integer matrix in this basis."""
        return self._coords.exact(mat)

    def structure_constant(self, i, j, k) -> int:
        return self.constants[i, j, k]

    def with_constant(self, i, j, k, value) -> "GradedLattice":
        """Copy with one structure constant overwritten (for fault injection)."""
        table = self.constants.copy()
        table[i, j, k] = value
        return GradedLattice(self.family, self.n, self.ring, _constants=table)

    # -- elements ---------------------------------------------------------------
    def element(self, coeffs, ring: RingSpec | None = None) -> "LatticeElem":
        ring = ring or self.ring
        if isinstance(coeffs, dict):
            vec = [0] * self.dim
            for lab, c in coeffs.items():
                vec[self.index_of(lab)] = c
            coeffs = vec
        if len(coeffs) != self.dim:
            raise LatticeError(f"expected {self.dim} coefficients")
        return LatticeElem(self, ring, tuple(ring(c) for c in coeffs))

    def basis_element(self, label, ring=None, scale_exponent=0) -> "LatticeElem":
        ring = ring or self.ring
        return self.element({label: ring.pi ** scale_exponent}, ring)

    def zero(self, ring=None) -> "LatticeElem":
        ring = ring or self.ring
        return self.element([0] * self.dim, ring)

    def to_json(self) -> dict:
        triples = [[int(i), int(j), int(k), int(self.constants[i, j, k])]
                   for i, j, k in zip(*np.nonzero(self.constants))]
        return {
            "family": self.family,
            "n": self.n,
            "rank": self.rank,
            "basis": list(self.labels),
            "roots": {lab: list(g) for lab, g in zip(self.labels, self.grades) if any(g)},
            "structure_constants": triples,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json())

    def __repr__(self):
        return f"GradedLattice({self.family!r}, {self.n})"


def build_family(family: str, n: int, ring: RingSpec | None = None) -> GradedLattice:
    return GradedLattice(family, n, ring)


class LatticeElem:
    """Coefficient vector over the lattice basis, entries in a ring R/P^N."""

    __slots__ = ("lattice", "ring", "coeffs")

    def __init__(self, lattice, ring, coeffs):
        self.lattice = lattice
        self.ring = ring
        self.coeffs = coeffs

    def _check(self, other):
        if not isinstance(other, LatticeElem) or other.lattice is not self.lattice \
                and other.lattice.labels != self.lattice.labels:
            raise LatticeError("elements of different lattices")
        if other.ring != self.ring:
            raise LatticeError("elements over different rings")

    def __add__(self, other):
        self._check(other)
        return LatticeElem(self.lattice, self.ring,
                           tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    def __sub__(self, other):
        self._check(other)
        return LatticeElem(self.lattice, self.ring,
                           tuple(a - b for a, b in zip(self.coeffs, other.coeffs)))

    def __neg__(self):
        return LatticeElem(self.lattice, self.ring, tuple(-a for a in self.coeffs))

    def __rmul__(self, c):
        c = self.ring(c)
        return LatticeElem(self.lattice, self.ring, tuple(c * a for a in self.coeffs))

    def __eq__(self, other):
        return (isinstance(other, LatticeElem) and self.lattice.labels == other.lattice.labels
                and self.coeffs == other.coeffs)

    def __hash__(self):
        return hash(self.coeffs)

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def __getitem__(self, label):
        return self.coeffs[self.lattice.index_of(label)]

    def support(self):
        return [lab for lab, c in zip(self.lattice.labels, self.coeffs) if c]

    def min_valuation(self) -> int:
        return min(c.valuation() for c in self.coeffs)

    def __repr__(self):
        terms = [f"{c}*{lab}" for lab, c in zip(self.lattice.labels, self.coeffs) if c]
        return " + ".join(terms) if terms else "0"

    def to_matrix(self) -> Mat:
        real = self.lattice.realization(self.ring)
        out = Mat.zeros(self.ring, self.lattice.n)
        for lab, c in zip(self.lattice.labels, self.coeffs):
            if c:
                out = out + real[lab].scale(c)
        return out


def bracket(x: LatticeElem, y: LatticeElem) -> LatticeElem:
    """Lie bracket through the integer structure constants."""
    x._check(y)
    table = x.lattice.constants
    ring = x.ring
    dim = x.lattice.dim
    acc = [ring.zero] * dim
    xs = [(i, c) for i, c in enumerate(x.coeffs) if c]
    ys = [(j, c) for j, c in enumerate(y.coeffs) if c]
    for i, a in xs:
        for j, b in ys:
            row = table[i, j]
            nz = np.nonzero(row)[0]
            if nz.size == 0:
                continue
            ab = a * b
            for k in nz:
                acc[k] = acc[k] + ab * int(row[k])
    return LatticeElem(x.lattice, ring, tuple(acc))


def project(x: LatticeElem, gamma) -> LatticeElem:
    """Component of x in L_gamma (gamma = 0 gives the Cartan part)."""
    gamma = tuple(gamma)
    lat = x.lattice
    if len(gamma) != lat.rank:
        raise LatticeError(f"grade must have {lat.rank} coordinates")
    zero = x.ring.zero
    return LatticeElem(lat, x.ring, tuple(c if g == gamma else zero
                                          for c, g in zip(x.coeffs, lat.grades)))


# -- structure verification ------------------------------------------------------

@dataclass
class PropertyResult:
    passed: bool
    counterexample: str | None = None


@dataclass
class StructureReport:
    family: str
    n: int
    results: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results.values())

    def failed(self):
        return [k for k, r in self.results.items() if not r.passed]

    def lines(self):
        for name, r in self.results.items():
            status = "pass" if r.passed else f"FAIL ({r.counterexample})"
            yield f"{name}: {status}"


def _support_str(lat, vec):
    return " + ".join(f"{int(c)}*{lat.labels[k]}" for k, c in enumerate(vec) if c) or "0"


def verify_structure(lat: GradedLattice, jacobi: bool = True) -> StructureReport:
    """Check the six root-grading axioms exhaustively over the basis."""
    rep = StructureReport(lat.family, lat.n)
    C = lat.constants
    dim = lat.dim
    labels = lat.labels
    grades = lat.grades
    zero_g = (0,) * lat.rank

    # (1) integrality, re-derived from the matrix commutators.  With an integral
    # coordinate map the integer solve is exact; otherwise fall back to rationals.
    bad = None
    mismatch = None
    stack = np.stack(lat._mats)
    n = lat.n
    comm = (np.einsum("iab,jbc->ijac", stack, stack)
            - np.einsum("jab,ibc->ijac", stack, stack)).reshape(dim * dim, n, n)
    coords_map = lat._coords
    if coords_map.integral:
        flat = comm.reshape(dim * dim, -1)
        coords = flat[:, coords_map.rows] @ coords_map.inv_int.T
        in_span = np.all(coords @ coords_map.embed.T == flat, axis=1)
        if not in_span.all():
            t = int(np.argmin(in_span))
            bad = f"[{labels[t // dim]}, {labels[t % dim]}] not in span"
        table = np.asarray(C, dtype=object).reshape(dim * dim, dim)
        same = np.array([all(int(a) == int(b) for a, b in zip(row, trow))
                         for row, trow in zip(coords, table)])
        if not same.all():
            t = int(np.argmin(same))
            mismatch = f"table [{labels[t // dim]}, {labels[t % dim]}] disagrees with the commutator"
    else:  # pragma: no cover - every family here has an integral coordinate map
        for t in range(dim * dim):
            try:
                exact = lat.coordinates(comm[t])
            except LatticeError:
                bad = bad or f"[{labels[t // dim]}, {labels[t % dim]}] not in span"
                continue
            if any(c.denominator != 1 for c in exact):
                bad = bad or f"[{labels[t // dim]}, {labels[t % dim]}] has non-integral coordinates"
            elif mismatch is None and [int(c) for c in exact] != [int(v) for v in C[t // dim, t % dim]]:
                mismatch = f"table [{labels[t // dim]}, {labels[t % dim]}] disagrees with the commutator"
    tab_int = all(float(v).is_integer() for v in np.asarray(C, dtype=object).ravel())
    rep.results["(1) integer structure constants"] = PropertyResult(bad is None and tab_int, bad)
    rep.results["realization"] = PropertyResult(mismatch is None, mismatch)

    # (2) [h_i, h_j] = 0
    cex = None
    for i in lat.h_indices:
        for j in lat.h_indices:
            if np.any(C[i, j]):
                cex = cex or f"[{labels[i]}, {labels[j]}] = {_support_str(lat, C[i, j])}"
    rep.results["(2) Cartan part abelian"] = PropertyResult(cex is None, cex)

    # (3) [L_a, L_b] in L_{a+b}
    cex = None
    for i in range(dim):
        for j in range(dim):
            s = tuple(a + b for a, b in zip(grades[i], grades[j]))
            for k in np.nonzero(C[i, j])[0]:
                if grades[k] != s:
                    cex = cex or f"[{labels[i]}, {labels[j]}] has {labels[k]} outside grade {s}"
    rep.results["(3) grading"] = PropertyResult(cex is None, cex)

    # (4) [h, e_a] = a(h) e_a
    cex = None
    for hi, i in enumerate(lat.h_indices):
        for j in lat.root_indices:
            expect = np.zeros(dim, dtype=np.int64)
            expect[j] = grades[j][hi]
            if not np.array_equal(np.asarray(C[i, j], dtype=np.int64), expect):
                cex = cex or (f"[{labels[i]}, {labels[j]}] = {_support_str(lat, C[i, j])}, "
                              f"expected {_support_str(lat, expect)}")
    rep.results["(4) root action"] = PropertyResult(cex is None, cex)

    # (5) [e_a, e_-a] != 0
    cex = None
    for j in lat.root_indices:
        neg = lat.grade_index(tuple(-c for c in grades[j]))
        if neg is None or not np.any(C[j, neg]):
            cex = cex or f"[{labels[j]}, e_-alpha] = 0"
    rep.results["(5) opposite roots pair"] = PropertyResult(cex is None, cex)

    # (6) pi_gamma([x, y]) = [pi_{gamma-beta}(x), y] for y in L_beta; x runs over
    # the basis and a few generic combinations
    cex = None
    Ci = np.asarray(C, dtype=np.int64)
    rng = np.random.default_rng(0)
    xs = np.concatenate([np.eye(dim, dtype=np.int64), rng.integers(-3, 4, size=(4, dim))])
    gid = {}
    grade_id = np.array([gid.setdefault(g, len(gid)) for g in grades])
    for j in range(dim):
        beta = grades[j]
        shifted = [tuple(a + b for a, b in zip(g, beta)) for g in grades]
        sid = np.array([gid.setdefault(g, len(gid)) for g in shifted])
        groups = np.unique(np.concatenate([sid, grade_id]))
        onehot = (sid[None, :] == groups[:, None]).astype(np.int64)  # (G, dim)
        rhs = np.einsum("bi,gi,ik->bgk", xs, onehot, Ci[:, j, :])
        full = xs @ Ci[:, j, :]
        lhs = full[:, None, :] * (grade_id[None, :] == groups[:, None])[None, :, :]
        if not np.array_equal(lhs, rhs):
            b, g, _ = np.argwhere(lhs != rhs)[0]
            gamma = next(k for k, v in gid.items() if v == groups[g])
            cex = cex or f"grade {gamma}, y = {labels[j]}"
    rep.results["(6) projection identity"] = PropertyResult(cex is None, cex)

    if jacobi:
        A = np.tensordot(Ci, Ci, axes=([2], [0]))  # A[i,j,l,m] = sum_k C[i,j,k] C[k,l,m]
        J = A + np.einsum("jlim->ijlm", A) + np.einsum("lijm->ijlm", A)
        nz = np.argwhere(J)
        cex = None
        if nz.size:
            i, j, l, _ = nz[0]
            cex = f"({labels[i]}, {labels[j]}, {labels[l]})"
        rep.results["Jacobi identity"] = PropertyResult(cex is None, cex)
    return rep


def is_powerful(lat: GradedLattice, m: int, theta: int = 1, *, p: int | None = None,
                e: int | None = None) -> bool:
    """Whether [pi^m L, pi^m L] lies in p^theta pi^m L, coefficient by coefficient.

    A structure constant c contributes pi^(2m) c, of valuation
    e v_p(c) + 2m; it must reach theta e + m.
    """
    ring = lat.ring
    p = p if p is not None else (ring.p if ring is not None else None)
    e = e if e is not None else (ring.e if ring is not None else 1)
    if p is None:
        raise LatticeError("a prime p is needed to test powerfulness")
    if m < 0:
        raise LatticeError("m must be >= 0")
    for c in set(int(v) for v in np.asarray(lat.constants).ravel() if v):
        if e * _exact.vp(c, p) + 2 * m < theta * e + m:
            return False
    return True
