"""Finite quotients R/P^m of rings of integers of p-adic fields.

Three families are supported:

* ``Z/p^m`` (unramified, inertia degree 1),
* Galois rings ``(Z/p^m)[x]/(g)`` with ``g`` monic and irreducible mod p,
* totally ramified rings ``Z_p[pi]/(E)`` truncated at ``pi^m``, with ``E``
  an Eisenstein polynomial.

Elements carry a coordinate vector over the basis ``1, x, ..., x^(f-1)``
(resp. ``1, pi, ..., pi^(e-1)``), each coordinate reduced modulo its own
modulus, so equality is plain tuple equality.

Besides scalar :class:`RingElem` arithmetic the ring offers vectorised
``v*`` operations on numpy coordinate arrays of shape ``(..., d)``; the
brute-force counters and the escape sweep are built on those.
"""
from __future__ import annotations

import itertools
import math
import os
import re

import numpy as np

DEFAULT_BUDGET = 10**8


def default_budget() -> int:
    """Enumeration budget, overridable through ``LIELAT_BUDGET``."""
    return int(os.environ.get("LIELAT_BUDGET", DEFAULT_BUDGET))


class RingError(ValueError):
    """Invalid ring parameters or defining data."""


class NotInvertible(ArithmeticError):
    pass


class BudgetExceeded(RuntimeError):
    def __init__(self, needed, budget, what="enumeration"):
        self.needed = needed
        self.budget = budget
        super().__init__(f"{what} needs {needed} elements touched, budget is {budget}")


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    r = math.isqrt(n)
    return all(n % d for d in range(3, r + 1, 2))


def prime_power(q: int) -> tuple[int, int] | None:
    """Return ``(p, f)`` with ``q = p^f``, or None."""
    if q < 2:
        return None
    for p in range(2, math.isqrt(q) + 2):
        if q % p == 0:
            f = 0
            while q % p == 0:
                q //= p
                f += 1
            return (p, f) if q == 1 else None
    return (q, 1)


def _irreducible_mod_p(coeffs, p) -> bool:
    import sympy

    x = sympy.Symbol("x")
    poly = sympy.Poly(list(reversed(coeffs)), x, modulus=p)
    return poly.degree() == len(coeffs) - 1 and poly.is_irreducible


class RingSpec:
    """The finite local ring R/P^m.

    Use :func:`make_ring` rather than calling this directly.  Instances are
    immutable; two specs compare equal when their defining parameters agree.
    """

    def __init__(self, p: int, e: int, f: int, m: int, poly=None):
        self.p, self.e, self.f, self.m = p, e, f, m
        self.poly = tuple(poly) if poly is not None else None
        self.d = e * f
        self.q = p**f
        if f > 1:
            self.kind = "galois"
            self.moduli = (p**m,) * f
            self._scale, self._offset = 1, (0,) * f
        elif e > 1:
            self.kind = "eisenstein"
            self.moduli = tuple(p ** max(0, -(-(m - i) // e)) for i in range(e))
            self._scale, self._offset = e, tuple(range(e))
        else:
            self.kind = "zp"
            self.moduli = (p**m,)
            self._scale, self._offset = 1, (0,)
        self._exps = tuple(round(math.log(mod, p)) if mod > 1 else 0 for mod in self.moduli)
        self._table = self._structure_table()
        biggest = max(self.moduli)
        self._vec_dtype = np.int64 if biggest**3 * self.d**2 < 2**62 else object
        self._mods_arr = np.array(self.moduli, dtype=self._vec_dtype)

    # -- construction helpers -------------------------------------------
    def _structure_table(self):
        """table[i][j] = list of (k, c): basis_i * basis_j = sum c * basis_k."""
        d = self.d
        if d == 1:
            return [[[(0, 1)]]]
        lead = list(self.poly[:-1])  # b^d = -sum lead[k] b^k
        if self.kind == "eisenstein":
            work_mod = self.p ** (-(-self.m // self.e) + 1)
        else:
            work_mod = self.p**self.m
        powers = []
        cur = [0] * d
        cur[0] = 1
        for _ in range(2 * d - 1):
            powers.append([c % work_mod for c in cur])
            top = cur[-1]
            cur = [0] + cur[:-1]
            if top:
                cur = [(c - top * a) for c, a in zip(cur, lead)]
        table = []
        for i in range(d):
            row = []
            for j in range(d):
                vec = powers[i + j]
                row.append([(k, c % mod) for k, (c, mod) in enumerate(zip(vec, self.moduli))
                            if c % mod])
            table.append(row)
        return table

    # -- basic data -------------------------------------------------------
    @property
    def size(self) -> int:
        return self.q**self.m

    @property
    def epsilon(self) -> int:
        """floor(e/(p-1)) + 1; the exp/log convergence bound (not used elsewhere)."""
        return self.e // (self.p - 1) + 1

    @property
    def theta(self) -> int:
        return 1 if self.p >= 3 else 2

    def _key(self):
        return (self.p, self.e, self.f, self.m, self.poly)

    def __eq__(self, other):
        return isinstance(other, RingSpec) and self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def __repr__(self):
        return f"RingSpec({self.to_string()!r})"

    def to_string(self) -> str:
        if self.kind == "zp":
            return f"{self.p}^{self.m}"
        poly = ",".join(str(c) for c in self.poly)
        if self.kind == "galois":
            return f"GR({self.p},{self.m},{self.f}):{poly}"
        return f"Eis({self.p},{self.m}):{poly}"

    def with_precision(self, m: int) -> "RingSpec":
        return make_ring(self.p, self.e, self.f, m, self.poly)

    # -- elements ---------------------------------------------------------
    def __call__(self, value) -> "RingElem":
        if isinstance(value, RingElem):
            if value.ring != self:
                raise RingError("element belongs to a different ring")
            return value
        if isinstance(value, (int, np.integer)):
            coords = [0] * self.d
            coords[0] = int(value)
            return self._make(coords)
        if isinstance(value, str):
            return self.parse(value)
        coords = [int(c) for c in value]
        if len(coords) != self.d:
            raise RingError(f"expected {self.d} coordinates, got {len(coords)}")
        return self._make(coords)

    def _make(self, coords) -> "RingElem":
        return RingElem(self, tuple(c % mod for c, mod in zip(coords, self.moduli)))

    @property
    def zero(self) -> "RingElem":
        return self(0)

    @property
    def one(self) -> "RingElem":
        return self(1)

    @property
    def pi(self) -> "RingElem":
        """The uniformizer: p when e = 1, the root of the Eisenstein polynomial otherwise."""
        if self.kind == "eisenstein":
            return self._make([0, 1] + [0] * (self.d - 2))
        return self(self.p)

    def pi_power(self, k: int) -> "RingElem":
        return self.pi**k

    def parse(self, text: str) -> "RingElem":
        parts = text.strip().split(":")
        if len(parts) == 1:
            return self(int(parts[0]))
        if len(parts) != self.d:
            raise RingError(f"cannot parse {text!r} as an element with {self.d} coordinates")
        return self([int(t) for t in parts])

    def enumerate(self, budget: int | None = None):
        """Yield every element exactly once, in lexicographic coordinate order."""
        budget = default_budget() if budget is None else budget
        if self.size > budget:
            raise BudgetExceeded(self.size, budget)
        for coords in itertools.product(*(range(mod) for mod in self.moduli)):
            yield RingElem(self, coords)

    def units(self, budget: int | None = None):
        return (a for a in self.enumerate(budget) if a.is_unit())

    def residue_digits(self) -> np.ndarray:
        """Coordinate array (q, d) of a fixed set of representatives of R/P."""
        if self.kind == "galois":
            digits = list(itertools.product(range(self.p), repeat=self.d))
        else:
            digits = [[c] + [0] * (self.d - 1) for c in range(self.p)]
        return np.array(digits, dtype=self._vec_dtype).reshape(self.q, self.d) % self._mods_arr

    # -- scalar arithmetic on coordinate tuples ------------------------------
    def _add(self, a, b):
        return tuple((x + y) % mod for x, y, mod in zip(a, b, self.moduli))

    def _sub(self, a, b):
        return tuple((x - y) % mod for x, y, mod in zip(a, b, self.moduli))

    def _neg(self, a):
        return tuple((-x) % mod for x, mod in zip(a, self.moduli))

    def _mul(self, a, b):
        if self.d == 1:
            return ((a[0] * b[0]) % self.moduli[0],)
        acc = [0] * self.d
        for i, ai in enumerate(a):
            if not ai:
                continue
            for j, bj in enumerate(b):
                if not bj:
                    continue
                prod = ai * bj
                for k, c in self._table[i][j]:
                    acc[k] += prod * c
        return tuple(x % mod for x, mod in zip(acc, self.moduli))

    def _valuation(self, a) -> int:
        best = self.m
        p = self.p
        for c, k, off in zip(a, self._exps, self._offset):
            if c == 0:
                continue
            v = 0
            while c % p == 0:
                c //= p
                v += 1
            best = min(best, self._scale * v + off)
        return best

    # -- vectorised arithmetic on coordinate arrays (..., d) ------------------
    def varray(self, data) -> np.ndarray:
        return np.asarray(data, dtype=self._vec_dtype) % self._mods_arr

    def vadd(self, a, b):
        return (a + b) % self._mods_arr

    def vsub(self, a, b):
        return (a - b) % self._mods_arr

    def vneg(self, a):
        return (-a) % self._mods_arr

    def vscale(self, a, n: int):
        """Multiply by an integer."""
        return (a * n) % self._mods_arr

    def vmul(self, a, b):
        a = np.asarray(a)
        b = np.asarray(b)
        if self.d == 1:
            return (a * b) % self._mods_arr
        shape = np.broadcast_shapes(a.shape, b.shape)
        out = np.zeros(shape, dtype=self._vec_dtype)
        for i in range(self.d):
            for j in range(self.d):
                entries = self._table[i][j]
                if not entries:
                    continue
                prod = a[..., i] * b[..., j]
                for k, c in entries:
                    out[..., k] += prod * c
        return out % self._mods_arr

    def vdot(self, a, b, axis=-2):
        """Sum over ``axis`` of the elementwise products (axis counted on (..., n, d) arrays)."""
        prod = self.vmul(a, b)
        return prod.sum(axis=axis) % self._mods_arr

    def vvaluation(self, a) -> np.ndarray:
        a = np.asarray(a)
        best = np.full(a.shape[:-1], self.m, dtype=np.int64)
        for i, (k, off) in enumerate(zip(self._exps, self._offset)):
            c = a[..., i]
            v = np.zeros(c.shape, dtype=np.int64)
            for s in range(1, k + 1):
                v += (c % (self.p**s) == 0)
            nonzero = c != 0
            cand = np.where(nonzero, self._scale * v + off, self.m)
            best = np.minimum(best, cand)
        return best

    def vis_zero(self, a) -> np.ndarray:
        return np.all(np.asarray(a) == 0, axis=-1)

    def all_coords(self, budget: int | None = None) -> np.ndarray:
        """Coordinate array (size, d) of every element, same order as :meth:`enumerate`."""
        budget = default_budget() if budget is None else budget
        if self.size > budget:
            raise BudgetExceeded(self.size, budget)
        grids = np.meshgrid(*(np.arange(mod) for mod in self.moduli), indexing="ij")
        return np.stack([g.reshape(-1) for g in grids], axis=-1).astype(self._vec_dtype)

    def from_coords(self, row) -> "RingElem":
        return RingElem(self, tuple(int(c) for c in row))


class RingElem:
    """An element of a :class:`RingSpec`, stored in canonical coordinates."""

    __slots__ = ("ring", "coords")

    def __init__(self, ring: RingSpec, coords: tuple):
        self.ring = ring
        self.coords = coords

    def _coerce(self, other):
        if isinstance(other, RingElem):
            if other.ring != self.ring:
                raise RingError("mixed rings")
            return other.coords
        if isinstance(other, (int, np.integer)):
            return self.ring(int(other)).coords
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return RingElem(self.ring, self.ring._add(self.coords, o))

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return RingElem(self.ring, self.ring._sub(self.coords, o))

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return RingElem(self.ring, self.ring._sub(o, self.coords))

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return RingElem(self.ring, self.ring._mul(self.coords, o))

    __rmul__ = __mul__

    def __neg__(self):
        return RingElem(self.ring, self.ring._neg(self.coords))

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        result = self.ring.one
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __eq__(self, other):
        if isinstance(other, RingElem):
            return self.ring == other.ring and self.coords == other.coords
        if isinstance(other, (int, np.integer)):
            return self.coords == self.ring(int(other)).coords
        return NotImplemented

    def __hash__(self):
        return hash((self.ring, self.coords))

    def __bool__(self):
        return any(self.coords)

    def __repr__(self):
        return str(self)

    def __str__(self):
        if self.ring.d == 1:
            return str(self.coords[0])
        return ":".join(str(c) for c in self.coords)

    def valuation(self) -> int:
        """pi-adic valuation, truncated at the precision m (so val(0) = m)."""
        return self.ring._valuation(self.coords)

    def is_unit(self) -> bool:
        return self.valuation() == 0

    def inverse(self) -> "RingElem":
        if not self.is_unit():
            raise NotInvertible(f"{self} is not invertible, valuation {self.valuation()} >= 1")
        r = self.ring
        # the unit group has order (q - 1) q^(m-1)
        return self ** ((r.q - 1) * r.q ** (r.m - 1) - 1)


_RING_RE = [
    (re.compile(r"^\s*(\d+)\s*\^\s*(\d+)\s*$"), "zp"),
    (re.compile(r"^\s*(\d+)\s*$"), "prime"),
    (re.compile(r"^\s*GR\(\s*(\d+)\s*,\s*(\d+)\s*,\s*(\d+)\s*\)\s*:\s*([-\d,\s]+)$"), "galois"),
    (re.compile(r"^\s*Eis\(\s*(\d+)\s*,\s*(\d+)\s*\)\s*:\s*([-\d,\s]+)$"), "eisenstein"),
]


def make_ring(p: int, e: int = 1, f: int = 1, m: int = 1, defining_data=None) -> RingSpec:
    """Validate parameters and build R/P^m.

    ``defining_data`` is a coefficient list, constant term first, of a monic
    polynomial: degree f and irreducible mod p when f > 1, or degree e and
    Eisenstein when e > 1.
    """
    if not isinstance(p, int) or not is_prime(p):
        raise RingError(f"{p} is not prime")
    if p == 2:
        raise RingError("residue characteristic 2 is not supported")
    if min(e, f, m) < 1:
        raise RingError("e, f, m must be >= 1")
    if e > 1 and f > 1:
        raise RingError("mixed ramified/unramified extensions are not supported")
    poly = None
    if e > 1 or f > 1:
        deg = max(e, f)
        if defining_data is None:
            raise RingError(f"a monic degree-{deg} defining polynomial is required")
        poly = [int(c) for c in defining_data]
        if len(poly) != deg + 1 or poly[-1] != 1:
            raise RingError(f"defining polynomial must be monic of degree {deg}")
        if f > 1:
            if not _irreducible_mod_p(poly, p):
                raise RingError(f"{poly} is not irreducible mod {p}")
            poly = [c % p**m for c in poly[:-1]] + [1]
        else:
            if any(c % p for c in poly[:-1]) or poly[0] % (p * p) == 0:
                raise RingError(f"{poly} is not Eisenstein at {p}")
            prec = p ** (-(-m // e) + 1)
            poly = [c % prec for c in poly[:-1]] + [1]
    elif defining_data:
        raise RingError("Z/p^m takes no defining polynomial")
    return RingSpec(p, e, f, m, poly)


def parse_ring(text: str) -> RingSpec:
    """Parse "p^m", "p", "GR(p,m,f):c0,c1,..." or "Eis(p,m):c0,c1,..."."""
    for rx, kind in _RING_RE:
        mt = rx.match(text)
        if not mt:
            continue
        g = mt.groups()
        if kind == "zp":
            return make_ring(int(g[0]), m=int(g[1]))
        if kind == "prime":
            return make_ring(int(g[0]))
        coeffs = [int(c) for c in g[-1].split(",") if c.strip()]
        if kind == "galois":
            return make_ring(int(g[0]), 1, int(g[2]), int(g[1]), coeffs)
        return make_ring(int(g[0]), len(coeffs) - 1, 1, int(g[1]), coeffs)
    raise RingError(f"unrecognised ring specification {text!r}")


def square_roots_of_one(ring: RingSpec, budget: int | None = None) -> set:
    """All a with a^2 = 1, found by exhaustive search; always {1, -1} here."""
    coords = ring.all_coords(budget)
    squares = ring.vmul(coords, coords)
    one = ring.varray(ring.one.coords)
    hits = coords[np.all(squares == one, axis=-1)]
    roots = {ring.from_coords(r) for r in hits}
    assert roots == {ring.one, -ring.one}, roots
    return roots
