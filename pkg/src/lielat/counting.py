"""Orders of O_n, SO_n, SL_n and Sp_n over R/P^m.

Three independent routes: closed product formulas, the orbit-stabilizer
recursion through isotropic vectors, and pruned brute-force enumeration.
"""
from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field

import numpy as np

from .linalg import Mat, complete_to_invertible, default_form, gram, gram_template, is_member
from .ring import BudgetExceeded, RingElem, RingSpec, default_budget, prime_power

GROUPS = ("O", "SO", "SL", "Sp")


class CountingError(ValueError):
    pass


@dataclass
class OrderResult:
    group: str
    n: int
    q: int
    m: int
    value: int
    method: str
    ring: RingSpec | None = None
    elapsed_ms: float = 0.0

    def to_json(self) -> dict:
        if self.ring is not None:
            p, e, f = self.ring.p, self.ring.e, self.ring.f
        else:
            p, f = prime_power(self.q)
            e = 1
        out = {"group": self.group, "n": self.n, "p": p, "e": e, "f": f, "m": self.m,
               "method": self.method, "value": str(self.value),
               "elapsed_ms": round(self.elapsed_ms, 3)}
        if self.ring is not None and self.ring.d > 1:
            out["ring"] = self.ring.to_string()  # the defining polynomial is needed to replay
        return out


def _check_q(q: int):
    pp = prime_power(q)
    if pp is None:
        raise CountingError(f"q = {q} is not a prime power")
    if pp[0] == 2:
        raise CountingError("q must be odd")


def _check_group(group: str, n: int):
    if group not in GROUPS:
        raise CountingError(f"unknown group {group!r}; expected one of {GROUPS}")
    if group in ("O", "SO") and n < 1:
        raise CountingError("O_n and SO_n need n >= 1")
    if group == "SL" and n < 2:
        raise CountingError("SL_n needs n >= 2")
    if group == "Sp" and (n < 2 or n % 2):
        raise CountingError("Sp_n needs even n >= 2")


def _factored(q: int, top: int, js) -> int:
    """q^top * prod(1 - q^-j), evaluated as q^(top - sum j) * prod(q^j - 1)."""
    js = list(js)
    shift = top - sum(js)
    if shift < 0:
        raise CountingError("q-power does not absorb the product")
    out = q ** shift
    for j in js:
        out *= q ** j - 1
    return out


def so_order(n: int, q: int, m: int) -> int:
    l = n // 2
    if n % 2:
        return _factored(q, (2 * l * l + l) * m, [2 * i for i in range(1, l + 1)])
    return _factored(q, (2 * l * l - l) * m, [l] + [2 * i for i in range(1, l)])


def formula_order(group: str, n: int, q: int, m: int, ring: RingSpec | None = None) -> OrderResult:
    t0 = time.perf_counter()
    _check_group(group, n)
    _check_q(q)
    if m < 1:
        raise CountingError("m must be >= 1")
    if group == "SO":
        value = so_order(n, q, m)
    elif group == "O":
        value = 2 * so_order(n, q, m)
    elif group == "SL":
        value = _factored(q, (n * n - 1) * m, range(2, n + 1))
    else:
        l = n // 2
        value = _factored(q, (2 * l * l + l) * m, [2 * i for i in range(1, l + 1)])
    return OrderResult(group, n, q, m, value, "formula", ring, (time.perf_counter() - t0) * 1e3)


def formula_Cn(n: int, q: int, m: int) -> int:
    """Number of unimodular isotropic vectors of the split form over R/P^m."""
    if n < 1:
        raise CountingError("n must be >= 1")
    _check_q(q)
    if m < 1:
        raise CountingError("m must be >= 1")
    lift = q ** ((m - 1) * (n - 1))
    if n % 2 == 0:
        l = n // 2
        return (q ** l - 1) * (q ** (l - 1) + 1) * lift
    return (q ** (n - 1) - 1) * lift


def cn_recursive(n: int, q: int) -> int:
    """All isotropic vectors (zero included) of the split form over F_q."""
    if n < 1:
        raise CountingError("n must be >= 1")
    c = {1: 1, 2: 2 * q - 1}
    for j in range(3, n + 1):
        c[j] = c[j - 2] * q + q ** (j - 2) * (q - 1)
    return c[n]


def cn_closed(n: int, q: int) -> int:
    if n < 1:
        raise CountingError("n must be >= 1")
    if n % 2:
        return q ** (n - 1)
    l = n // 2
    return q ** (l - 1) * (q ** l + q - 1)


def cn_symbolic_check(n_max: int = 12) -> bool:
    """The recursion and the closed form agree as polynomials in q, and |C_n| = c_n - 1."""
    import sympy

    q = sympy.Symbol("q")
    c = {1: sympy.Integer(1), 2: 2 * q - 1}
    for j in range(3, n_max + 1):
        c[j] = sympy.expand(c[j - 2] * q + q ** (j - 2) * (q - 1))
    for j in range(1, n_max + 1):
        l = j // 2
        closed = q ** (j - 1) if j % 2 else q ** (l - 1) * (q ** l + q - 1)
        if sympy.expand(c[j] - closed) != 0:
            return False
        if j >= 2:
            cn = (q ** l - 1) * (q ** (l - 1) + 1) if j % 2 == 0 else q ** (j - 1) - 1
            if sympy.expand(cn - (closed - 1)) != 0:
                return False
    return True


# -- brute force ----------------------------------------------------------------

class _Budget:
    def __init__(self, budget, what):
        self.budget = default_budget() if budget is None else budget
        self.used = 0
        self.what = what

    def spend(self, amount, progress=None):
        self.used += int(amount)
        if self.used > self.budget:
            needed = self.used
            if progress:  # extrapolate from the fraction of first-level work done
                needed = int(self.used / max(progress, 1e-9))
            raise BudgetExceeded(needed, self.budget, self.what)


def _all_vectors(ring: RingSpec, n: int, budget: _Budget) -> np.ndarray:
    size = ring.size
    volume = size ** n * n * ring.d
    if volume > budget.budget:
        raise BudgetExceeded(volume, budget.budget, f"vectors of R^{n}")
    budget.spend(volume)
    elems = ring.all_coords()
    idx = np.indices((size,) * n).reshape(n, -1).T  # (size^n, n)
    return elems[idx]  # (N, n, d)


def _apply_int(ring, S, V):
    return ring.varray(np.einsum("ij,bjd->bid", np.asarray(S, dtype=np.int64), V))


def _coords_of(ring, value):
    return np.asarray(ring(value).coords, dtype=ring._vec_dtype)


def _cofactors(ring, cols):
    """Cofactor vector of the last column: det = sum_i v_i cof_i."""
    n = len(cols) + 1
    rows = [[ring.from_coords(cols[j][i]) for j in range(n - 1)] for i in range(n)]
    out = []
    for i in range(n):
        minor = Mat.from_rows(ring, [r for t, r in enumerate(rows) if t != i]) if n > 1 else None
        d = minor.det() if n > 1 else ring.one
        sign = 1 if (i + n - 1) % 2 == 0 else -1
        out.append(np.asarray((d * sign).coords, dtype=ring._vec_dtype))
    return np.stack(out)  # (n, d)


def _vdet(ring: RingSpec, mats: np.ndarray) -> np.ndarray:
    """Determinants of a batch (B, n, n, d) by the Leibniz expansion."""
    n = mats.shape[1]
    B = mats.shape[0]
    acc = np.zeros((B, ring.d), dtype=ring._vec_dtype)
    for perm in itertools.permutations(range(n)):
        term = mats[:, perm[0], 0, :]
        for col in range(1, n):
            term = ring.vmul(term, mats[:, perm[col], col, :])
        inversions = sum(1 for a in range(n) for b in range(a + 1, n) if perm[a] > perm[b])
        acc = ring.varray(acc - term if inversions % 2 else acc + term)
    return acc


def _form_dfs(group, n, ring, budget, collect):
    """Column-by-column search for M with M^t S M = S (and det 1 for SO)."""
    kind = default_form("O" if group == "SO" else group, n)
    S = gram_template(kind, n)
    V = _all_vectors(ring, n, budget)
    SV = _apply_int(ring, S, V)
    Q = ring.vdot(V, SV)  # (N, d): v^t S v
    target = {v: _coords_of(ring, v) for v in (-1, 0, 1)}
    pools = [np.nonzero(np.all(Q == target[S[j][j]], axis=1))[0] for j in range(n)]
    budget.spend(V.shape[0] * n)
    total = 0
    found = []
    pending = []  # full matrices awaiting the determinant filter (SO only)
    pending_size = 0
    one = _coords_of(ring, 1)
    first = len(pools[0])

    def flush():
        nonlocal total, pending_size
        if not pending:
            return
        idx = np.concatenate(pending)  # (B, n) column indices
        mats = V[idx].transpose(0, 2, 1, 3)  # (B, n, n, d)
        pending.clear()
        pending_size = 0
        mats = mats[np.all(_vdet(ring, mats) == one, axis=1)]
        total += len(mats)
        if collect:
            found.extend(mats)

    def rec(j, chosen, cands, progress):
        nonlocal total, pending_size
        if j == n - 1:
            live = cands[j]
            if group == "SO":
                if len(live):
                    idx = np.empty((len(live), n), dtype=np.int64)
                    idx[:, :-1] = chosen
                    idx[:, -1] = live
                    pending.append(idx)
                    pending_size += len(live)
                    if pending_size >= 1 << 14:
                        flush()
                budget.spend(len(live) * n * n, progress)
                return
            total += len(live)
            if collect:
                for c in live:
                    found.append(np.stack([V[t] for t in chosen + [c]], axis=1))
            return
        for pos, c in enumerate(cands[j]):
            prog = progress if j else (pos + 1) / first
            col = SV[c]  # S c, so B(v, c) = v . (S c)
            nxt = dict(cands)
            for t in range(j + 1, n):
                pool = cands[t]
                vals = ring.vdot(V[pool], col[None, :, :])
                nxt[t] = pool[np.all(vals == target[S[j][t]], axis=1)]
                budget.spend(len(pool) * n, prog)
            rec(j + 1, chosen + [c], nxt, prog)

    rec(0, [], {j: pools[j] for j in range(n)}, None)
    flush()
    return total, found


def _sl_dfs(n, ring, budget, collect):
    V = _all_vectors(ring, n, budget)
    N = V.shape[0]
    one = _coords_of(ring, 1)
    total = 0
    found = []
    count_first = [0]

    def rec(chosen):
        nonlocal total
        if len(chosen) == n - 1:
            cof = _cofactors(ring, [V[c] for c in chosen])
            if not any(ring.from_coords(c).is_unit() for c in cof):
                return
            dets = ring.vdot(V, cof[None, :, :])
            live = np.nonzero(np.all(dets == one, axis=1))[0]
            budget.spend(N * n, (count_first[0] + 1) / N)
            total += len(live)
            if collect:
                for c in live:
                    found.append(np.stack([V[t] for t in chosen + [c]], axis=1))
            return
        for c in range(N):
            if not chosen:
                count_first[0] = c
            rec(chosen + [c])

    rec([])
    return total, found


def _brute(group, n, ring, budget, collect):
    _check_group(group, n)
    b = _Budget(budget, f"brute force {group}_{n}")
    if group == "SL":
        return _sl_dfs(n, ring, b, collect)
    return _form_dfs(group, n, ring, b, collect)


def brute_count(group: str, n: int, ring: RingSpec, budget: int | None = None) -> OrderResult:
    """|{M over R/P^m : M in group}| by pruned enumeration."""
    t0 = time.perf_counter()
    total, _ = _brute(group, n, ring, budget, collect=False)
    return OrderResult(group, n, ring.q, ring.m, total, "brute_force", ring,
                       (time.perf_counter() - t0) * 1e3)


def brute_elements(group: str, n: int, ring: RingSpec, budget: int | None = None) -> np.ndarray:
    """All elements as a coordinate array of shape (count, n, n, d)."""
    _, found = _brute(group, n, ring, budget, collect=True)
    if not found:
        return np.zeros((0, n, n, ring.d), dtype=ring._vec_dtype)
    return np.stack(found)


def coords_to_mat(ring: RingSpec, arr) -> Mat:
    n = arr.shape[0]
    return Mat.from_rows(ring, [[ring.from_coords(arr[i, j]) for j in range(arr.shape[1])]
                                for i in range(n)])


def _isotropic_mask(ring, V, n):
    S = gram_template(default_form("O", n), n)
    Q = ring.vdot(V, _apply_int(ring, S, V))
    iso = np.all(Q == 0, axis=1)
    unimod = (ring.vvaluation(V) == 0).any(axis=1)
    return iso & unimod


def _vector_chunks(ring: RingSpec, n: int, budget: _Budget, chunk: int = 1 << 18):
    size = ring.size
    volume = size ** n * n * ring.d
    if volume > budget.budget:
        raise BudgetExceeded(volume, budget.budget, f"vectors of R^{n}")
    budget.spend(volume)
    elems = ring.all_coords()
    powers = size ** np.arange(n - 1, -1, -1, dtype=np.int64)
    for start in range(0, size ** n, chunk):
        idx = np.arange(start, min(start + chunk, size ** n), dtype=np.int64)
        yield elems[(idx[:, None] // powers[None, :]) % size]


def brute_count_Cn(n: int, ring: RingSpec, budget: int | None = None) -> int:
    """Isotropic unimodular vectors counted by streaming through R^n."""
    b = _Budget(budget, f"isotropic vectors in R^{n}")
    return int(sum(_isotropic_mask(ring, V, n).sum() for V in _vector_chunks(ring, n, b)))


def brute_isotropic_vectors(n: int, ring: RingSpec, budget: int | None = None):
    b = _Budget(budget, f"isotropic vectors in R^{n}")
    V = _all_vectors(ring, n, b)
    return V[_isotropic_mask(ring, V, n)]


def orbit_count(group: str, n: int, ring: RingSpec, cn_method: str = "formula",
                budget: int | None = None) -> OrderResult:
    """|O_n| = |C_n| |O_{n-2}| |R|^(n-2), bottoming out at |O_1| = 2 and |O_0| = 1."""
    t0 = time.perf_counter()
    if group not in ("O", "SO"):
        raise CountingError("the orbit recursion covers O and SO only")
    if n < 1:
        raise CountingError("n must be >= 1")
    if cn_method not in ("formula", "brute"):
        raise CountingError("cn_method is 'formula' or 'brute'")
    size = ring.size

    def o(j):
        if j == 0:
            return 1
        if j == 1:
            return 2
        cn = formula_Cn(j, ring.q, ring.m) if cn_method == "formula" else brute_count_Cn(j, ring, budget)
        return cn * o(j - 2) * size ** (j - 2)

    value = o(n)
    if group == "SO":
        value //= 2
    return OrderResult(group, n, ring.q, ring.m, value, "orbit_recursion", ring,
                       (time.perf_counter() - t0) * 1e3)


# -- constructive pieces ----------------------------------------------------------

@dataclass(frozen=True)
class IsotropicVector:
    """A unimodular isotropic vector with the index of a unit entry.

    ``pivot`` is the first unit index in the top half, or "flip" when the
    only units below position n sit in the bottom half.
    """

    x: Mat
    pivot: int | str

    @classmethod
    def certify(cls, x: Mat) -> "IsotropicVector":
        if x.cols != 1:
            raise CountingError("expected a column vector")
        n = x.rows
        l = n // 2
        S = gram(default_form("O", n), n, x.ring)
        if not (x.T @ S @ x).is_zero():
            raise CountingError("vector is not isotropic")
        vals = x.col(0)
        units = [i for i, a in enumerate(vals) if a.is_unit()]
        if not units:
            raise CountingError("vector is not unimodular")
        top = [i for i in units if i < l]
        if top:
            return cls(x, top[0])
        if any(i < 2 * l for i in units):
            return cls(x, "flip")
        # an odd vector with only x_n a unit cannot be isotropic
        raise CountingError("unit only in the last coordinate")  # pragma: no cover


def _complete_top(x: Mat) -> Mat:
    ring = x.ring
    n = x.rows
    l = n // 2
    odd = n % 2 == 1
    vals = x.col(0)
    top = Mat.column(ring, vals[:l])
    bot = Mat.column(ring, vals[l:2 * l])
    U = complete_to_invertible(top)
    y = U.T @ bot
    yv = y.col(0)
    Wrows = [[ring.zero] * l for _ in range(l)]
    for i in range(l):
        Wrows[i][0] = yv[i]
    for j in range(1, l):
        Wrows[0][j] = -yv[j]
    W = Mat.from_rows(ring, Wrows)
    Uinv_t = U.inverse().T
    I = Mat.identity(ring, l)
    Z = Mat.zeros(ring, l)
    if not odd:
        left = Mat.block([[U, Z], [Z, Uinv_t]])
        right = Mat.block([[I, Z], [W, I]])
        return left @ right
    xn = vals[n - 1]
    zc = Mat.zeros(ring, l, 1)
    zr = Mat.zeros(ring, 1, l)
    one = Mat.identity(ring, 1)
    e1c = Mat.column(ring, [ring.one] + [ring.zero] * (l - 1))
    left = Mat.block([[U, Z, zc], [Z, Uinv_t, zc], [zr, zr, one]])
    right = Mat.block([[I, Z, zc], [W, I, e1c.scale(-xn)], [e1c.T.scale(xn), zr, one]])
    return left @ right


def complete_to_orthogonal(x) -> Mat:
    """Some M in O_n with M e_1 = x, for a unimodular isotropic x."""
    iv = x if isinstance(x, IsotropicVector) else IsotropicVector.certify(x)
    v = iv.x
    n = v.rows
    if n < 2:
        raise CountingError("n must be >= 2")
    S = gram(default_form("O", n), n, v.ring)
    if iv.pivot == "flip":
        M = S @ _complete_top(S @ v)
    else:
        M = _complete_top(v)
    e1 = Mat.column(v.ring, [1] + [0] * (n - 1))
    if M @ e1 != v or not is_member(M, "O"):
        raise CountingError("completion failed its postconditions")  # pragma: no cover
    return M


@dataclass(frozen=True)
class StabilizerParams:
    """Free data of an element of the stabilizer of e_1.

    x, y have length l-1, nu is used for odd n only, inner lies in O_{n-2}.
    """

    x: tuple
    y: tuple
    nu: RingElem | None
    inner: Mat | None


def _layout(n):
    """Index blocks (first, top, pivot, bottom, last) of the stabilizer layout."""
    l = n // 2
    top = list(range(1, l))
    bottom = list(range(l + 1, 2 * l))
    last = [n - 1] if n % 2 else []
    return l, top, l, bottom, last


def stabilizer_element(n: int, ring: RingSpec, params: StabilizerParams) -> Mat:
    """The element of {M in O_n : M e_1 = e_1} with the given free parameters."""
    if ring.p == 2:
        raise CountingError("2 must be a unit")
    l, top, piv, bottom, last = _layout(n)
    r = l - 1
    x = [ring(v) for v in params.x]
    y = [ring(v) for v in params.y]
    if len(x) != r or len(y) != r:
        raise CountingError(f"x and y need length {r}")
    odd = bool(last)
    nu = ring(params.nu) if odd else ring.zero
    inner_idx = top + bottom + last
    inner = params.inner if params.inner is not None else Mat.identity(ring, len(inner_idx))
    if inner.shape != (n - 2, n - 2):
        raise CountingError(f"inner element must be {n - 2} x {n - 2}")
    rows = [[ring.zero] * n for _ in range(n)]
    for a, i in enumerate(inner_idx):
        for b, j in enumerate(inner_idx):
            rows[i][j] = inner[a, b]
    rows[0][0] = ring.one
    rows[piv][piv] = ring.one
    for a, i in enumerate(top):
        rows[i][piv] = x[a]
    for a, i in enumerate(bottom):
        rows[i][piv] = y[a]
    if odd:
        rows[n - 1][piv] = nu
    half = ring(2).inverse()
    dot_xy = sum((a * b for a, b in zip(x, y)), ring.zero)
    rows[0][piv] = -(dot_xy + dot_xy + nu * nu) * half
    # row 0 on the inner columns: -(y^t [A B u] + x^t [C D v] + nu [e f gamma])
    for j in inner_idx:
        acc = ring.zero
        for a, i in enumerate(top):
            acc = acc + y[a] * rows[i][j]
        for a, i in enumerate(bottom):
            acc = acc + x[a] * rows[i][j]
        if odd:
            acc = acc + nu * rows[n - 1][j]
        rows[0][j] = -acc
    return Mat.from_rows(ring, rows)


def stabilizer_params(n: int, ring: RingSpec, budget: int | None = None):
    """Every parameter tuple for the stabilizer of e_1 in O_n(R/P^m)."""
    import itertools

    l = n // 2
    r = l - 1
    odd = n % 2 == 1
    inners = [coords_to_mat(ring, a) for a in brute_elements("O", n - 2, ring, budget)] \
        if n - 2 >= 1 else [None]
    elems = list(ring.enumerate(budget))
    nus = elems if odd else [None]
    for inner in inners:
        for xs in itertools.product(elems, repeat=r):
            for ys in itertools.product(elems, repeat=r):
                for nu in nus:
                    yield StabilizerParams(tuple(xs), tuple(ys), nu, inner)


def stabilizer_size(n: int, ring: RingSpec) -> int:
    """|T_{e_1}| = |O_{n-2}| |R|^(n-2)."""
    inner = 1 if n - 2 <= 0 else orbit_count("O", n - 2, ring).value
    return inner * ring.size ** (n - 2)
