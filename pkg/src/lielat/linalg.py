"""Dense matrices over a finite local ring, bilinear forms, and group membership."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import lru_cache

from .ring import NotInvertible, RingElem, RingError, RingSpec

MAX_DET_SIZE = 8


class DimensionError(ValueError):
    pass


class Mat:
    """Immutable rows x cols matrix with entries in one ring (row-major)."""

    __slots__ = ("ring", "rows", "cols", "entries")

    def __init__(self, ring: RingSpec, rows: int, cols: int, entries):
        entries = tuple(ring(x) for x in entries)
        if rows < 1 or cols < 1 or len(entries) != rows * cols:
            raise DimensionError(f"bad shape {rows}x{cols} for {len(entries)} entries")
        self.ring = ring
        self.rows = rows
        self.cols = cols
        self.entries = entries

    # -- constructors -----------------------------------------------------
    @classmethod
    def from_rows(cls, ring, rows) -> "Mat":
        rows = [list(r) for r in rows]
        if not rows or any(len(r) != len(rows[0]) for r in rows):
            raise DimensionError("ragged rows")
        return cls(ring, len(rows), len(rows[0]), [x for r in rows for x in r])

    @classmethod
    def identity(cls, ring, n) -> "Mat":
        return cls(ring, n, n, [int(i == j) for i in range(n) for j in range(n)])

    @classmethod
    def zeros(cls, ring, rows, cols=None) -> "Mat":
        cols = rows if cols is None else cols
        return cls(ring, rows, cols, [0] * (rows * cols))

    @classmethod
    def column(cls, ring, values) -> "Mat":
        values = list(values)
        return cls(ring, len(values), 1, values)

    @classmethod
    def diag(cls, ring, values) -> "Mat":
        values = list(values)
        n = len(values)
        return cls(ring, n, n, [values[i] if i == j else 0 for i in range(n) for j in range(n)])

    @classmethod
    def block(cls, blocks) -> "Mat":
        """Assemble a block matrix from a nested list of Mats.

        Blocks of zero size are not representable; layouts that would need
        them should simply leave the block row/column out.
        """
        ring = blocks[0][0].ring
        heights = [row[0].rows for row in blocks]
        widths = [b.cols for b in blocks[0]]
        out = []
        for bi, brow in enumerate(blocks):
            if len(brow) != len(widths):
                raise DimensionError("ragged block rows")
            for b, w in zip(brow, widths):
                if b.ring != ring:
                    raise RingError("mixed rings")
                if b.rows != heights[bi] or b.cols != w:
                    raise DimensionError("block sizes do not line up")
            for i in range(heights[bi]):
                for b in brow:
                    out.extend(b.entries[i * b.cols:(i + 1) * b.cols])
        return cls(ring, sum(heights), sum(widths), out)

    @classmethod
    def parse(cls, ring, text: str) -> "Mat":
        """Parse "a,b;c,d" (rows separated by ';', entries by ',')."""
        rows = [[ring.parse(tok) for tok in row.split(",")] for row in text.strip().split(";")]
        return cls.from_rows(ring, rows)

    # -- access -------------------------------------------------------------
    def __getitem__(self, ij) -> RingElem:
        i, j = ij
        return self.entries[i * self.cols + j]

    def row(self, i):
        return list(self.entries[i * self.cols:(i + 1) * self.cols])

    def col(self, j):
        return [self.entries[i * self.cols + j] for i in range(self.rows)]

    def to_rows(self):
        return [self.row(i) for i in range(self.rows)]

    def submatrix(self, r0, r1, c0, c1) -> "Mat":
        return Mat(self.ring, r1 - r0, c1 - c0,
                   [self[i, j] for i in range(r0, r1) for j in range(c0, c1)])

    def split(self, row_sizes, col_sizes):
        if sum(row_sizes) != self.rows or sum(col_sizes) != self.cols:
            raise DimensionError("block sizes do not cover the matrix")
        out = []
        r0 = 0
        for h in row_sizes:
            row = []
            c0 = 0
            for w in col_sizes:
                row.append(self.submatrix(r0, r0 + h, c0, c0 + w))
                c0 += w
            out.append(row)
            r0 += h
        return out

    @property
    def shape(self):
        return (self.rows, self.cols)

    @property
    def T(self) -> "Mat":
        return Mat(self.ring, self.cols, self.rows,
                   [self[i, j] for j in range(self.cols) for i in range(self.rows)])

    def transpose(self) -> "Mat":
        return self.T

    # -- arithmetic ----------------------------------------------------------
    def _check_same(self, other):
        if not isinstance(other, Mat):
            raise TypeError("expected a Mat")
        if other.ring != self.ring:
            raise RingError("mixed rings")
        if other.shape != self.shape:
            raise DimensionError(f"shape mismatch {self.shape} vs {other.shape}")

    def __add__(self, other):
        self._check_same(other)
        return Mat(self.ring, self.rows, self.cols,
                   [a + b for a, b in zip(self.entries, other.entries)])

    def __sub__(self, other):
        self._check_same(other)
        return Mat(self.ring, self.rows, self.cols,
                   [a - b for a, b in zip(self.entries, other.entries)])

    def __neg__(self):
        return Mat(self.ring, self.rows, self.cols, [-a for a in self.entries])

    def scale(self, c) -> "Mat":
        c = self.ring(c)
        return Mat(self.ring, self.rows, self.cols, [c * a for a in self.entries])

    def __matmul__(self, other):
        if not isinstance(other, Mat):
            return NotImplemented
        if other.ring != self.ring:
            raise RingError("mixed rings")
        if self.cols != other.rows:
            raise DimensionError(f"cannot multiply {self.shape} by {other.shape}")
        ring = self.ring
        out = []
        ocols = [other.col(j) for j in range(other.cols)]
        for i in range(self.rows):
            r = self.row(i)
            for c in ocols:
                acc = ring.zero
                for a, b in zip(r, c):
                    acc = acc + a * b
                out.append(acc)
        return Mat(ring, self.rows, other.cols, out)

    __mul__ = __matmul__

    def __eq__(self, other):
        return (isinstance(other, Mat) and self.ring == other.ring
                and self.shape == other.shape and self.entries == other.entries)

    def __hash__(self):
        return hash((self.ring, self.shape, self.entries))

    def __repr__(self):
        return f"Mat({self.to_literal()!r})"

    def to_literal(self) -> str:
        return ";".join(",".join(str(x) for x in self.row(i)) for i in range(self.rows))

    def is_zero(self) -> bool:
        return not any(self.entries)

    # -- determinant / inverse ---------------------------------------------------
    def det(self) -> RingElem:
        """Laplace expansion with memoised minors (no division: rings have zero divisors)."""
        if self.rows != self.cols:
            raise DimensionError("determinant of a non-square matrix")
        n = self.rows
        if n > MAX_DET_SIZE:
            raise DimensionError(f"determinant limited to n <= {MAX_DET_SIZE}")
        ring = self.ring
        e = self.entries

        @lru_cache(maxsize=None)
        def minor(r: int, cols: tuple) -> RingElem:
            # determinant of rows r.. restricted to the given columns
            if r == n:
                return ring.one
            acc = ring.zero
            for pos, c in enumerate(cols):
                a = e[r * n + c]
                if not a:
                    continue
                term = a * minor(r + 1, cols[:pos] + cols[pos + 1:])
                acc = acc - term if pos % 2 else acc + term
            return acc

        return minor(0, tuple(range(n)))

    def inverse(self) -> "Mat":
        """Gauss-Jordan with unit pivots (always available over a local ring)."""
        if self.rows != self.cols:
            raise DimensionError("inverse of a non-square matrix")
        n = self.rows
        ring = self.ring
        a = [self.row(i) + [ring(int(i == j)) for j in range(n)] for i in range(n)]
        for c in range(n):
            piv = next((i for i in range(c, n) if a[i][c].is_unit()), None)
            if piv is None:
                raise NotInvertible("matrix is not invertible")
            a[c], a[piv] = a[piv], a[c]
            inv = a[c][c].inverse()
            a[c] = [x * inv for x in a[c]]
            for i in range(n):
                if i != c and a[i][c]:
                    t = a[i][c]
                    a[i] = [x - t * y for x, y in zip(a[i], a[c])]
        return Mat(ring, n, n, [x for row in a for x in row[n:]])

    def is_invertible(self) -> bool:
        return self.rows == self.cols and self.det().is_unit()


def unit_vector(ring, n: int, i: int) -> Mat:
    """e_{i+1} as an n x 1 column (0-based index i)."""
    return Mat.column(ring, [int(k == i) for k in range(n)])


class FormKind(str, enum.Enum):
    ORTH_EVEN = "orth_even"          # S = [0 I; I 0]
    ORTH_ODD = "orth_odd"            # S = [0 I 0; I 0 0; 0 0 1]
    SYMPL = "sympl"                  # s = [0 I; -I 0]
    SO_SPLIT_EVEN = "so_split_even"  # Lie-algebra s, even size (same matrix as ORTH_EVEN)
    SO_SPLIT_ODD = "so_split_odd"    # Lie-algebra s, odd size, index 0 first: [1 0 0; 0 0 I; 0 I 0]


def gram_template(kind: FormKind | str, n: int) -> list:
    """Integer entries (0, 1, -1) of the Gram matrix of a split form."""
    kind = FormKind(kind)
    l = n // 2
    g = [[0] * n for _ in range(n)]
    if kind in (FormKind.ORTH_EVEN, FormKind.SO_SPLIT_EVEN, FormKind.SYMPL):
        if n % 2 or n < 2:
            raise DimensionError(f"{kind.value} needs even n >= 2")
        for i in range(l):
            g[i][l + i] = 1
            g[l + i][i] = -1 if kind is FormKind.SYMPL else 1
    elif kind is FormKind.ORTH_ODD:
        if n % 2 == 0:
            raise DimensionError("orth_odd needs odd n")
        for i in range(l):
            g[i][l + i] = g[l + i][i] = 1
        g[n - 1][n - 1] = 1
    else:
        if n % 2 == 0:
            raise DimensionError("so_split_odd needs odd n")
        g[0][0] = 1
        for i in range(1, l + 1):
            g[i][l + i] = g[l + i][i] = 1
    return g


def gram(kind: FormKind | str, n: int, ring: RingSpec) -> Mat:
    """Gram matrix of the given split form on R^n."""
    return Mat.from_rows(ring, gram_template(kind, n))


def default_form(group: str, n: int) -> FormKind:
    if group == "Sp":
        return FormKind.SYMPL
    return FormKind.ORTH_EVEN if n % 2 == 0 else FormKind.ORTH_ODD


def is_member(M: Mat, group: str, form: FormKind | str | None = None) -> bool:
    """Membership of M in O, SO, SL or Sp (for the given or default form)."""
    if M.rows != M.cols:
        raise DimensionError("group elements are square")
    n = M.rows
    if group == "SL":
        return M.det() == 1
    if group not in ("O", "SO", "Sp"):
        raise ValueError(f"unknown group {group!r}")
    form = default_form(group, n) if form is None else FormKind(form)
    S = gram(form, n, M.ring)
    if M.T @ S @ M != S:
        return False
    return group != "SO" or M.det() == 1


@dataclass
class BlockCheck:
    """Outcome of the block-form orthogonality equations."""

    ok: bool
    checked: list = field(default_factory=list)
    failed: list = field(default_factory=list)

    def __bool__(self):
        return self.ok


def _as_mat(x, ring):
    if isinstance(x, Mat):
        return x
    return Mat(ring, 1, 1, [x])


def block_membership(blocks, form: FormKind | str | None = None) -> BlockCheck:
    """Evaluate the block equations characterising O_{2l} or O_{2l+1}.

    ``blocks`` is ``[[A, B], [C, D]]`` for n = 2l, or
    ``[[A, B, u], [C, D, v], [x, y, w]]`` for n = 2l + 1, with A..D of size
    l x l, u and v columns, x and y rows, and w a 1x1 block or ring element.
    The general system is always evaluated; the diagonal and unitriangular
    special shapes contribute their own equations when the blocks have that
    shape.
    """
    if len(blocks) not in (2, 3) or any(len(r) != len(blocks) for r in blocks):
        raise DimensionError("expected a 2x2 or 3x3 block layout")
    odd = len(blocks) == 3
    ring = blocks[0][0].ring
    if form is not None and FormKind(form) not in (
            (FormKind.ORTH_ODD,) if odd else (FormKind.ORTH_EVEN, FormKind.SO_SPLIT_EVEN)):
        raise DimensionError(f"form {form} does not match the block layout")
    A, B = blocks[0][0], blocks[0][1]
    C, D = blocks[1][0], blocks[1][1]
    l = A.rows
    for X in (A, B, C, D):
        if X.shape != (l, l):
            raise DimensionError("A, B, C, D must be l x l")
    I = Mat.identity(ring, l)
    Z = Mat.zeros(ring, l)
    eqs = []
    if not odd:
        eqs += [
            ("A^tC + C^tA = 0", A.T @ C + C.T @ A == Z),
            ("A^tD + C^tB = Id", A.T @ D + C.T @ B == I),
            ("B^tD + D^tB = 0", B.T @ D + D.T @ B == Z),
        ]
        if B.is_zero() and C.is_zero():
            eqs.append(("U^t = V^-1", A.T @ D == I and D @ A.T == I))
        if A == I and B.is_zero() and D == I:
            eqs.append(("W + W^t = 0", C + C.T == Z))
    else:
        u, v = blocks[0][2], blocks[1][2]
        x, y = blocks[2][0], blocks[2][1]
        w = _as_mat(blocks[2][2], ring)
        if u.shape != (l, 1) or v.shape != (l, 1) or x.shape != (1, l) or y.shape != (1, l):
            raise DimensionError("u, v must be l x 1 and x, y must be 1 x l")
        if w.shape != (1, 1):
            raise DimensionError("omega must be 1 x 1")
        zc = Mat.zeros(ring, l, 1)
        one = Mat.identity(ring, 1)
        eqs += [
            ("A^tC + C^tA + x^tx = 0", A.T @ C + C.T @ A + x.T @ x == Z),
            ("A^tD + C^tB + x^ty = Id", A.T @ D + C.T @ B + x.T @ y == I),
            ("B^tD + D^tB + y^ty = 0", B.T @ D + D.T @ B + y.T @ y == Z),
            ("A^tv + C^tu + w x^t = 0", A.T @ v + C.T @ u + x.T.scale(w[0, 0]) == zc),
            ("B^tv + D^tu + w y^t = 0", B.T @ v + D.T @ u + y.T.scale(w[0, 0]) == zc),
            ("u^tv + v^tu + w^2 = 1", u.T @ v + v.T @ u + w @ w == one),
        ]
        if B.is_zero() and C.is_zero() and u.is_zero() and v.is_zero() and x.is_zero() and y.is_zero():
            eqs.append(("U^t = V^-1", A.T @ D == I and D @ A.T == I))
            eqs.append(("w^2 = 1", w @ w == one))
        if A == I and B.is_zero() and u.is_zero() and D == I and y.is_zero():
            eqs.append(("W + W^t = -x^tx", C + C.T == -(x.T @ x)))
            eqs.append(("v = -w x^t", v == -(x.T.scale(w[0, 0]))))
            eqs.append(("w^2 = 1", w @ w == one))
    failed = [name for name, ok in eqs if not ok]
    return BlockCheck(ok=not failed, checked=[name for name, _ in eqs], failed=failed)


def complete_to_invertible(x: Mat) -> Mat:
    """Some M in GL_n with M e_1 = x, for x with a unit entry.

    The lowest-index unit entry is swapped to the top; the result is then
    the permuted elementary matrix [x_1 0; x_rest Id].
    """
    if x.cols != 1:
        raise DimensionError("expected a column vector")
    n = x.rows
    ring = x.ring
    vals = x.col(0)
    i0 = next((i for i, a in enumerate(vals) if a.is_unit()), None)
    if i0 is None:
        raise NotInvertible("vector has no unit entry")
    perm = list(range(n))
    perm[0], perm[i0] = perm[i0], perm[0]
    swapped = [vals[perm[i]] for i in range(n)]
    rows = [[0] * n for _ in range(n)]
    for i in range(n):
        rows[i][0] = swapped[i]
        if i:
            rows[i][i] = 1
    # undo the swap on the rows: M = P U with P the transposition
    rows = [rows[perm[i]] for i in range(n)]
    return Mat.from_rows(ring, rows)
