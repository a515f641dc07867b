"""Exact rational linear algebra helpers (no floating point anywhere)."""
from __future__ import annotations

from fractions import Fraction


def vp(n: int, p: int) -> int:
    """p-adic valuation of a nonzero integer."""
    if n == 0:
        raise ValueError("valuation of 0 is infinite")
    n = abs(n)
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def _frac_rows(rows):
    return [[Fraction(x) for x in row] for row in rows]


def rank(rows) -> int:
    """Rank over Q of an integer/rational matrix given as a list of rows."""
    a = _frac_rows(rows)
    if not a:
        return 0
    ncols = len(a[0])
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(a)) if a[i][c] != 0), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        for i in range(len(a)):
            if i != r and a[i][c] != 0:
                t = a[i][c] / a[r][c]
                a[i] = [x - t * y for x, y in zip(a[i], a[r])]
        r += 1
        if r == len(a):
            break
    return r


def independent_rows(rows) -> list[int]:
    """Greedy choice of row indices forming a basis of the row space."""
    chosen: list[int] = []
    reduced: list[tuple[int, list[Fraction]]] = []  # (pivot col, row)
    for idx, row in enumerate(rows):
        v = [Fraction(x) for x in row]
        for c, r in reduced:
            if v[c] != 0:
                t = v[c] / r[c]
                v = [x - t * y for x, y in zip(v, r)]
        piv = next((c for c, x in enumerate(v) if x != 0), None)
        if piv is not None:
            reduced.append((piv, v))
            chosen.append(idx)
    return chosen


def inverse(square) -> list[list[Fraction]]:
    """Inverse of a nonsingular square rational matrix by Gauss-Jordan."""
    n = len(square)
    a = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)]
         for i, row in enumerate(square)]
    for c in range(n):
        piv = next((i for i in range(c, n) if a[i][c] != 0), None)
        if piv is None:
            raise ZeroDivisionError("singular matrix")
        a[c], a[piv] = a[piv], a[c]
        inv = 1 / a[c][c]
        a[c] = [x * inv for x in a[c]]
        for i in range(n):
            if i != c and a[i][c] != 0:
                t = a[i][c]
                a[i] = [x - t * y for x, y in zip(a[i], a[c])]
    return [row[n:] for row in a]


def _val(x: Fraction, p: int) -> float:
    if x == 0:
        return float("inf")
    return vp(x.numerator, p) - vp(x.denominator, p)


def dvr_elementary_valuations(rows, p: int) -> list[float]:
    """Valuations of the elementary divisors over the localization Z_(p).

    Pivot on an entry of minimal p-adic valuation and clear its row and
    column; every multiplier used is p-integral, so the operations are
    invertible over Z_(p).  Returns one valuation per pivot, with ``inf``
    for each missing rank.
    """
    a = _frac_rows(rows)
    nrows = len(a)
    ncols = len(a[0]) if a else 0
    out: list[float] = []
    live_r = list(range(nrows))
    live_c = list(range(ncols))
    while live_r and live_c:
        best = min(((_val(a[i][j], p), i, j) for i in live_r for j in live_c),
                   key=lambda t: t[0])
        v, pi, pj = best
        if v == float("inf"):
            break
        out.append(v)
        piv = a[pi][pj]
        for i in live_r:
            if i != pi and a[i][pj] != 0:
                t = a[i][pj] / piv
                a[i] = [x - t * y for x, y in zip(a[i], a[pi])]
        for j in live_c:
            if j != pj and a[pi][j] != 0:
                t = a[pi][j] / piv
                for i in live_r:
                    a[i][j] -= t * a[i][pj]
        live_r.remove(pi)
        live_c.remove(pj)
    out.extend(float("inf") for _ in range(min(nrows, ncols) - len(out)))
    return out
