"""Self-similarity indices of classical groups, congruence subgroups and lattices."""
from __future__ import annotations

from dataclasses import dataclass, field

from .ring import is_prime

FAMILIES = ("SL", "Sp", "SO_even", "SO_odd")
LEVELS = ("full_group", "congruence_group", "lattice", "bound")

_ALIASES = {
    "sl": "SL", "sp": "Sp", "so_even": "SO_even", "so_odd": "SO_odd",
    "SL": "SL", "Sp": "Sp", "SO_even": "SO_even", "SO_odd": "SO_odd",
}
_LEVEL_ALIASES = {"group": "full_group", "full": "full_group", "congruence": "congruence_group"}


class SSIndexError(ValueError):
    pass


class PreconditionViolation(SSIndexError):
    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(str(v) for v in self.violations))


@dataclass(frozen=True)
class FieldParams:
    p: int
    e: int = 1
    f: int = 1

    def __post_init__(self):
        if not is_prime(self.p):
            raise SSIndexError(f"p = {self.p} is not prime")
        if self.p == 2:
            raise SSIndexError("p = 2 is not supported")
        if self.e < 1 or self.f < 1:
            raise SSIndexError("e and f must be >= 1")

    @property
    def d(self) -> int:
        return self.e * self.f

    @property
    def q(self) -> int:
        return self.p ** self.f

    @property
    def theta(self) -> int:
        return 1 if self.p >= 3 else 2


@dataclass(frozen=True)
class IndexQuery:
    family: str
    l: int
    k: int = 1
    m: int | None = None
    level: str = "full_group"
    bound_of: str = "group"  # for level "bound": "group" or "congruence"

    def __post_init__(self):
        fam = _ALIASES.get(self.family)
        if fam is None:
            raise SSIndexError(f"unknown family {self.family!r}")
        object.__setattr__(self, "family", fam)
        level = _LEVEL_ALIASES.get(self.level, self.level)
        if level not in LEVELS:
            raise SSIndexError(f"unknown level {self.level!r}")
        object.__setattr__(self, "level", level)
        if self.bound_of not in ("group", "congruence"):
            raise SSIndexError("bound_of is 'group' or 'congruence'")
        if self.l < 1:
            raise SSIndexError("l must be >= 1")
        if self.k < 1:
            raise SSIndexError("k must be >= 1")

    @property
    def n(self) -> int:
        return {"SL": self.l + 1, "Sp": 2 * self.l, "SO_even": 2 * self.l,
                "SO_odd": 2 * self.l + 1}[self.family]

    def effective(self, params: FieldParams) -> tuple:
        """(k, m) after the bound level has fixed its parameters."""
        if self.level == "bound":
            if self.bound_of == "group":
                return 1, params.e
            return 1, params.e if self.m is None else self.m
        m = self.m
        if m is None:
            m = 0 if self.level == "lattice" else params.e
        return self.k, m


@dataclass(frozen=True)
class Violation:
    name: str
    lhs: int
    rhs: int
    relation: str = "<="

    @property
    def holds(self) -> bool:
        return self.lhs <= self.rhs if self.relation == "<=" else self.lhs >= self.rhs

    @property
    def negated(self) -> str:
        return {"<=": ">", ">=": "<"}[self.relation]

    def __str__(self):
        return f"{self.name}: {self.lhs} {self.negated} {self.rhs}"


def F(family: str, n: int) -> int:
    family = _ALIASES[family]
    return {"SL": n - 1, "Sp": n, "SO_even": n - 2, "SO_odd": n - 2}[family]


def _group_conditions(q: IndexQuery, fp: FieldParams):
    l, d, p = q.l, fp.d, fp.p
    if q.family == "SL":
        return [Violation("(l^2+2l)d <= p", (l * l + 2 * l) * d, p)]
    if q.family in ("Sp", "SO_odd"):
        return [Violation("(2l^2+l)d <= p", (2 * l * l + l) * d, p)]
    return [Violation("l >= 2", l, 2, ">="), Violation("(2l^2-l)d <= p", (2 * l * l - l) * d, p)]


def _congruence_conditions(q: IndexQuery, fp: FieldParams):
    n, d, p = q.n, fp.d, fp.p
    if q.family == "SL":
        return [Violation("(n^2-1)d <= p", (n * n - 1) * d, p)]
    if q.family == "Sp":
        return [Violation("(n^2+n)d <= 2p", (n * n + n) * d, 2 * p)]
    return [Violation("n >= 3", n, 3, ">="), Violation("(n^2-n)d <= 2p", (n * n - n) * d, 2 * p)]


def check_preconditions(query: IndexQuery, params: FieldParams) -> list:
    """Violated hypotheses, each with both sides evaluated (empty list = ok)."""
    k, m = query.effective(params)
    out = []
    if query.level == "lattice":
        if query.family == "SO_even" and query.l < 2:
            out.append(Violation("l >= 2", query.l, 2, ">="))
        if m < 0:
            out.append(Violation("m >= 0", m, 0, ">="))
        return out
    group_side = query.level == "full_group" or (query.level == "bound" and query.bound_of == "group")
    conds = _group_conditions(query, params) if group_side else _congruence_conditions(query, params)
    out += [c for c in conds if not c.holds]
    if m < params.e:
        out.append(Violation("m >= e", m, params.e, ">="))
    return out


def _factored(q, top, js):
    js = list(js)
    shift = top - sum(js)
    if shift < 0:
        raise SSIndexError("q-power does not absorb the product")
    out = q ** shift
    for j in js:
        out *= q ** j - 1
    return out


def full_group_index(family: str, l: int, q: int, k: int, m: int) -> int:
    """Index of a simple virtual endomorphism of the whole compact group."""
    family = _ALIASES[family]
    if family == "SL":
        return _factored(q, l * k + (l * l + 2 * l) * m, [i + 1 for i in range(1, l + 1)])
    if family == "Sp":
        return _factored(q, 2 * l * k + (2 * l * l + l) * m, [2 * i for i in range(1, l + 1)])
    if family == "SO_even":
        return _factored(q, (2 * l - 2) * k + (2 * l * l - l) * m,
                         [l] + [2 * i for i in range(1, l)])
    return _factored(q, (2 * l - 1) * k + (2 * l * l + l) * m, [2 * i for i in range(1, l + 1)])


def ss_index(query: IndexQuery, params: FieldParams) -> int:
    bad = check_preconditions(query, params)
    if bad:
        raise PreconditionViolation(bad)
    k, m = query.effective(params)
    q = params.q
    if query.level == "full_group" or (query.level == "bound" and query.bound_of == "group"):
        return full_group_index(query.family, query.l, q, k, m)
    return q ** (F(query.family, query.n) * k)


def min_index_bound(query: IndexQuery, params: FieldParams) -> int:
    """Upper bound on the least self-similarity index (k = 1; m = e for groups)."""
    if query.level != "bound":
        of = "congruence" if query.level in ("congruence_group", "lattice") else "group"
        query = IndexQuery(query.family, query.l, 1, query.m, "bound", of)
    return ss_index(query, params)


def dims(family: str, n: int, d: int = 1) -> int:
    """Dimension of the p-adic analytic group (equivalently of its Lie lattice over Z_p)."""
    fam = {"sl": "SL", "SL": "SL", "sp": "Sp", "Sp": "Sp", "so": "SO", "SO": "SO",
           "so_even": "SO", "so_odd": "SO", "SO_even": "SO", "SO_odd": "SO"}.get(family)
    if fam is None:
        raise SSIndexError(f"unknown family {family!r}")
    if n < 1 or d < 1:
        raise SSIndexError("n and d must be positive")
    if fam == "SL":
        return (n * n - 1) * d
    if fam == "Sp":
        if n % 2:
            raise SSIndexError("Sp_n needs even n")
        return (n * n + n) * d // 2
    return (n * n - n) * d // 2


@dataclass
class IndexRecord:
    query: IndexQuery
    params: FieldParams
    value: int | None
    preconditions: list = field(default_factory=list)

    def to_json(self) -> dict:
        k, m = self.query.effective(self.params)
        level = self.query.level
        if level == "bound":
            level = f"bound_{self.query.bound_of}"
        return {
            "family": self.query.family, "l": self.query.l, "n": self.query.n,
            "p": self.params.p, "e": self.params.e, "f": self.params.f, "d": self.params.d,
            "q": str(self.params.q), "k": k, "m": m, "level": level,
            "preconditions": [str(v) for v in self.preconditions],
            "value": None if self.value is None else str(self.value),
        }


def evaluate(query: IndexQuery, params: FieldParams) -> IndexRecord:
    bad = check_preconditions(query, params)
    value = None if bad else ss_index(query, params)
    return IndexRecord(query, params, value, bad)
