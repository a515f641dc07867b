"""Virtual endomorphisms given by conjugation with a diagonal matrix.

Conjugation by a = diag(pi^t_1, ..., pi^t_n) scales each basis matrix by a
pure power pi^w, so the endomorphism is fully described by the integer
weights w.  Everything below is exponent bookkeeping plus exact ring
arithmetic; nothing is ever divided by pi.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import _exact
from .lattice import GradedLattice, LatticeElem, LatticeError, bracket
from .ring import RingSpec, make_ring


class EndoError(ValueError):
    pass


class PrecisionExhausted(EndoError):
    """The element is zero at the working precision."""


class HypothesisViolated(EndoError):
    """The roots outside Psi have a common nonzero kernel on H."""


class WitnessFailure(EndoError):
    pass


def _prop_exponent(family: str, n: int) -> int:
    return {"sl": n - 1, "sp": n, "so_even": n - 2, "so_odd": n - 2}[family]


def _a_exponents(lattice: GradedLattice, k: int) -> tuple:
    n, l = lattice.n, lattice.rank
    t = [0] * n
    if lattice.family == "sl":
        t[n - 1] = k
    elif lattice.family in ("sp", "so_even"):
        t[l - 1], t[2 * l - 1] = k, -k
    else:  # so_odd, index 0 is the middle coordinate
        t[l], t[2 * l] = k, -k
    return tuple(t)


def _printed_weights(lattice: GradedLattice, k: int) -> dict:
    fam, n, l = lattice.family, lattice.n, lattice.rank
    w = {lab: 0 for lab in lattice.labels}
    if fam == "sl":
        for i in range(1, n):
            w[f"e{n}{i}" if n < 10 else f"e{n},{i}"] = k
            w[f"e{i}{n}" if n < 10 else f"e{i},{n}"] = -k
        return w
    for i in range(1, l):
        w[f"m{l}{i}"] = k
        w[f"m{i}{l}"] = -k
        w[f"n{l}{i}"] = k
        w[f"q{i}{l}"] = -k
    if fam == "sp":
        w[f"n{l}{l}"] = 2 * k
        w[f"q{l}{l}"] = -2 * k
    if fam == "so_odd":
        w[f"c{l}"] = k
        w[f"b{l}"] = -k
    return w


def _conjugation_weight(mat: np.ndarray, t) -> int:
    rows, cols = np.nonzero(mat)
    exps = {t[r] - t[c] for r, c in zip(rows, cols)}
    if len(exps) != 1:
        raise EndoError("conjugation does not scale the basis vector by a pure power of pi")
    return exps.pop()


@dataclass(frozen=True)
class WeightEndo:
    """phi(e_alpha) = pi^w(alpha) e_alpha, phi = identity on H."""

    lattice: GradedLattice
    k: int
    a_exponents: tuple
    weights: dict

    @property
    def psi(self) -> tuple:
        """Roots alpha with w(alpha) >= 0."""
        lat = self.lattice
        return tuple(lat.grades[i] for i in lat.root_indices if self.weights[lat.labels[i]] >= 0)

    @property
    def outside_psi(self) -> tuple:
        lat = self.lattice
        return tuple(lat.grades[i] for i in lat.root_indices if self.weights[lat.labels[i]] < 0)

    def weight_vector(self) -> np.ndarray:
        return np.array([self.weights[lab] for lab in self.lattice.labels], dtype=np.int64)

    def domain_exponents(self, j: int) -> dict:
        """pi-exponents of the domain D_j of phi^j, by repeated intersection.

        D_0 = L and D_j = L meet phi^{-1}(D_{j-1}); coordinate-wise this is
        c_j = max(0, c_{j-1} - w).
        """
        c = {lab: 0 for lab in self.lattice.labels}
        for _ in range(j):
            c = {lab: max(0, c[lab] - self.weights[lab]) for lab in c}
        return c


def diag_weights(lattice: GradedLattice, k: int) -> WeightEndo:
    """Weights of conjugation by the standard diagonal matrix with exponent k."""
    if k < 1:
        raise EndoError("k must be >= 1")
    t = _a_exponents(lattice, k)
    weights = {}
    for lab in lattice.labels:
        weights[lab] = _conjugation_weight(lattice.matrix(lab), t)
    expected = _printed_weights(lattice, k)
    if weights != expected:
        diff = {lab: (weights[lab], expected[lab]) for lab in weights if weights[lab] != expected[lab]}
        raise EndoError(f"conjugation weights disagree with the expected list: {diff}")
    return WeightEndo(lattice, k, t, weights)


@dataclass(frozen=True)
class DomainLattice:
    """M = sum of pi^c(label) R e_label."""

    lattice: GradedLattice
    exponents: dict

    def total(self) -> int:
        return sum(self.exponents.values())

    def contains(self, x: LatticeElem) -> bool:
        return all(c.valuation() >= self.exponents[lab]
                   for lab, c in zip(self.lattice.labels, x.coeffs))


def domain(endo: WeightEndo, m: int = 0) -> DomainLattice:
    """The domain L meet phi^{-1}(L); checks every generator of pi^m M lands in pi^m L."""
    lat = endo.lattice
    c = {lab: max(0, -endo.weights[lab]) for lab in lat.labels}
    t = endo.a_exponents
    for lab in lat.labels:
        mat = lat.matrix(lab)
        rows, cols = np.nonzero(mat)
        for r, cc in zip(rows, cols):
            if m + c[lab] + t[r] - t[cc] < m:
                raise EndoError(f"pi^m M does not map into pi^m L at {lab}")
    return DomainLattice(lat, c)


# -- index ----------------------------------------------------------------------

_FORMAL_PRIME = 2


@lru_cache(maxsize=None)
def _elementary_divisor_exponent(family: str, n: int, k: int, shift: int = 0) -> int:
    """Exponent of [L : L meet phi^{-1} L] from the elementary divisors of phi.

    The uniformizer is modelled by a formal prime; phi is computed as an
    honest matrix conjugation, re-expanded in the basis, and scaled by
    prime^T to clear denominators.  For the Smith exponents u_i of that
    integer matrix, the index exponent is sum(max(0, T - u_i)).
    """
    from .lattice import build_family

    lat = build_family(family, n)
    t = _a_exponents(lat, k)
    T = max(t) - min(t)
    ell = _FORMAL_PRIME
    scale = np.array([[ell ** (T + t[r] - t[c]) for c in range(n)] for r in range(n)],
                     dtype=np.int64)
    images = np.stack([lat.matrix(lab) * scale for lab in lat.labels])
    phi = lat._coords.integer_batch(images).T  # columns = images of basis vectors
    # on pi^shift L every image and the reference lattice pick up pi^shift
    phi = [[int(v) * ell ** shift for v in row] for row in phi]
    vals = _exact.dvr_elementary_valuations(phi, ell)
    if any(v == float("inf") for v in vals):
        raise EndoError("phi is singular")
    return int(sum(max(0, T + shift - int(v)) for v in vals))


def elementary_divisor_index(endo: WeightEndo, q: int, shift: int = 0) -> int:
    """[L : M] from the elementary divisors of phi alone, ignoring the weights."""
    lat = endo.lattice
    return q ** _elementary_divisor_exponent(lat.family, lat.n, endo.k, shift)


def index(endo: WeightEndo, q: int, shift: int = 0) -> int:
    """[L : M] = q^(sum c), cross-checked against the elementary divisors."""
    lat = endo.lattice
    if lat.ring is not None and lat.ring.q != q:
        raise EndoError(f"q = {q} does not match the lattice ring (q = {lat.ring.q})")
    total = domain(endo, shift).total()
    indep = _elementary_divisor_exponent(lat.family, lat.n, endo.k, shift)
    if indep != total:
        raise EndoError(f"index exponent {total} disagrees with elementary divisors ({indep})")
    expected = _prop_exponent(lat.family, lat.n) * endo.k
    if total != expected:
        raise EndoError(f"index exponent {total} differs from the expected {expected}")
    return q ** total


# -- D_infinity -----------------------------------------------------------------

@dataclass(frozen=True)
class DInfinity:
    """H plus the span of the e_alpha with w(alpha) >= 0."""

    lattice: GradedLattice
    kept: tuple
    dropped: tuple

    def contains(self, x: LatticeElem) -> bool:
        return all(not x[lab] for lab in self.dropped)

    def escaping_labels(self, x: LatticeElem) -> list:
        return [lab for lab in self.dropped if x[lab]]


def d_infinity(endo: WeightEndo, checks: int = 3) -> DInfinity:
    lat = endo.lattice
    for j in range(1, checks + 1):
        cj = endo.domain_exponents(j)
        for lab in lat.labels:
            w = endo.weights[lab]
            want = j * -w if w < 0 else 0
            if cj[lab] != want:
                raise EndoError(f"D_{j} exponent at {lab} is {cj[lab]}, expected {want}")
    dropped = tuple(lab for lab in lat.labels if endo.weights[lab] < 0)
    kept = tuple(lab for lab in lat.labels if endo.weights[lab] >= 0)
    return DInfinity(lat, kept, dropped)


def kernel_intersection_trivial(lattice: GradedLattice, roots) -> bool:
    roots = [tuple(r) for r in roots]
    if not roots:
        raise EndoError("need at least one root")
    return _exact.rank(roots) == lattice.rank


# -- escape witnesses -----------------------------------------------------------

def default_precision(m: int, k: int) -> int:
    return m + 2 * k + 2


@dataclass
class Witness:
    steps: list = field(default_factory=list)  # [(label, scale_exponent)]
    escaping_label: str | None = None
    valuation: int | None = None
    cases: tuple = ()

    def to_json(self) -> dict:
        return {
            "steps": [{"bracket_with": lab, "scale_exponent": s} for lab, s in self.steps],
            "escaping_label": self.escaping_label,
            "valuation": self.valuation,
        }

    @classmethod
    def from_json(cls, data) -> "Witness":
        return cls([(s["bracket_with"], int(s["scale_exponent"])) for s in data["steps"]],
                   data["escaping_label"], data["valuation"])


def _root_value(root, hcoeffs):
    acc = None
    for a, c in zip(root, hcoeffs):
        if a:
            term = c * a
            acc = term if acc is None else acc + term
    return acc


def _case_two(x: LatticeElem, endo: WeightEndo, a_scale: int):
    lat = x.lattice
    h = [x.coeffs[i] for i in lat.h_indices]
    best = None
    for root in endo.outside_psi:  # basis order breaks ties
        v = _root_value(root, h)
        if v is None or not v:
            continue
        key = v.valuation()
        if best is None or key < best[0]:
            best = (key, root)
    if best is None:
        return None
    return lat.label_of_root(best[1])


def replay(x: LatticeElem, endo: WeightEndo, witness: Witness) -> LatticeElem:
    lat = x.lattice
    y = x
    for lab, s in witness.steps:
        y = bracket(y, lat.basis_element(lab, x.ring, s))
    return y


def _check_hypothesis(endo):
    if not kernel_intersection_trivial(endo.lattice, endo.outside_psi):
        raise HypothesisViolated("the roots outside Psi do not separate H")


def escape_witness(x: LatticeElem, endo: WeightEndo, a_scale: int) -> Witness:
    """At most two brackets with elements of pi^a_scale L that push x out of D_infinity.

    Working precision is the precision of x's ring.  The witness is
    replayed before it is returned.
    """
    lat = x.lattice
    ring = x.ring
    if x.is_zero():
        raise PrecisionExhausted("x is zero at the working precision")
    if any(c.valuation() < a_scale for c in x.coeffs):
        raise EndoError(f"x is not in pi^{a_scale} L")
    _check_hypothesis(endo)
    dinf = d_infinity(endo, checks=1)
    steps, cases = [], []
    if dinf.escaping_labels(x):
        cases.append(1)
    else:
        lab = _case_two(x, endo, a_scale)
        if lab is None:
            if any(x.coeffs[i] for i in lat.h_indices):
                raise PrecisionExhausted("no root separates h at the working precision")
            psi_idx = [i for i in lat.root_indices if x.coeffs[i]]
            choice = min(psi_idx, key=lambda i: (x.coeffs[i].valuation(), i))
            neg = lat.grade_index(tuple(-g for g in lat.grades[choice]))
            steps.append((lat.labels[neg], a_scale))
            cases.append(3)
            x1 = bracket(x, lat.basis_element(lat.labels[neg], ring, a_scale))
            lab = _case_two(x1, endo, a_scale)
            if lab is None:
                raise PrecisionExhausted("Cartan part vanished at the working precision")
        steps.append((lab, a_scale))
        cases.append(2)
    w = Witness(steps, cases=tuple(cases))
    final = replay(x, endo, w)
    esc = [(final[lab].valuation(), lab) for lab in dinf.escaping_labels(final)]
    if not esc:
        raise WitnessFailure("replayed element stays inside D_infinity")
    if w.steps:
        w.escaping_label = w.steps[-1][0]
        w.valuation = final[w.escaping_label].valuation()
    else:
        w.valuation, w.escaping_label = min(esc)
    if w.valuation >= ring.m:
        raise WitnessFailure("escaping coefficient is not visible at the working precision")
    return w


# -- exhaustive sweep -----------------------------------------------------------

@dataclass
class SweepReport:
    family: str
    n: int
    p: int
    m: int
    k: int
    precision: int
    cosets: int = 0
    by_case: dict = field(default_factory=dict)
    failures: int = 0
    max_valuation: int = -1
    first_failure: list | None = None
    e: int = 1
    f: int = 1
    defining_data: list | None = None

    @property
    def ok(self) -> bool:
        return self.failures == 0 and self.cosets > 0

    def to_json(self) -> dict:
        return {"family": self.family, "n": self.n, "p": self.p, "m": self.m, "k": self.k,
                "precision": self.precision, "cosets": str(self.cosets),
                "by_case": {str(c): str(v) for c, v in sorted(self.by_case.items())},
                "failures": str(self.failures), "max_valuation": self.max_valuation,
                "e": self.e, "f": self.f, "defining_data": self.defining_data}


class _VecLattice:
    """Batched bracket-with-basis-vector over coefficient arrays (B, dim, d)."""

    def __init__(self, lat: GradedLattice, ring: RingSpec):
        self.lat = lat
        self.ring = ring
        self.C = np.asarray(lat.constants, dtype=np.int64)

    def bracket_basis(self, X, j, s_exp):
        # [X, pi^s e_j]_k = pi^s sum_i X_i C[i, j, k]
        Y = np.einsum("bid,ik->bkd", X, self.C[:, j, :])
        Y = self.ring.varray(Y)
        return self.ring.vmul(Y, self.ring.varray(self.ring.pi_power(s_exp).coords))

    def root_values(self, X, roots):
        # (B, len(roots), d): alpha(h) for each root
        H = X[:, list(self.lat.h_indices), :]
        R = np.asarray(roots, dtype=np.int64)
        return self.ring.varray(np.einsum("ri,bid->brd", R, H))


def _choose_case_two(vl, X, roots, N):
    vals = vl.ring.vvaluation(vl.root_values(X, roots))  # (B, r)
    # argmin returns the first minimum, i.e. the earliest root in basis order
    choice = np.argmin(vals, axis=1)
    ok = vals[np.arange(len(X)), choice] < N
    return choice, ok


def escape_sweep(lat: GradedLattice, p: int, m: int, k: int = 1, *, e: int = 1, f: int = 1,
                 precision: int | None = None, chunk: int = 1 << 16,
                 budget: int | None = None, sample_check: int = 64, seed: int = 0,
                 defining_data=None) -> SweepReport:
    """Run the escape procedure on every nonzero coset of pi^m L / pi^(m+1) L.

    Representatives are pi^m times residue-digit vectors.  The batch path
    mirrors escape_witness; a random sample of cosets is also pushed through
    the scalar routine and the two results must agree.
    """
    from .ring import BudgetExceeded, default_budget

    N = precision if precision is not None else default_precision(m, k)
    ring = make_ring(p, e=e, f=f, m=N, defining_data=defining_data)
    lat_r = GradedLattice(lat.family, lat.n, ring, _constants=lat.constants)
    endo = diag_weights(lat_r, k)
    _check_hypothesis(endo)
    dinf = d_infinity(endo)
    dim = lat.dim
    q = ring.q
    total = q ** dim - 1
    budget = default_budget() if budget is None else budget
    if total * dim > budget:
        raise BudgetExceeded(total * dim, budget, "escape sweep")
    vl = _VecLattice(lat_r, ring)
    digits = ring.vmul(ring.residue_digits(), ring.varray(ring.pi_power(m).coords))  # (q, d)
    out_idx = np.array([lat.index_of(lab) for lab in dinf.dropped])
    h_idx = np.array(lat.h_indices)
    psi_idx = np.array([i for i in lat.root_indices if endo.weights[lat.labels[i]] >= 0])
    out_roots = list(endo.outside_psi)
    out_label_idx = np.array([lat.grade_index(r) for r in out_roots])
    neg_of = np.array([lat.grade_index(tuple(-g for g in lat.grades[i])) for i in psi_idx])

    rep = SweepReport(lat.family, lat.n, p, m, k, N, e=e, f=f,
                      defining_data=None if defining_data is None else [int(c) for c in defining_data])
    powers = q ** np.arange(dim, dtype=np.int64)

    def record(case, vals, idxs):
        rep.by_case[case] = rep.by_case.get(case, 0) + int(len(vals))
        bad = vals >= N
        if bad.any():
            rep.failures += int(bad.sum())
            if rep.first_failure is None:
                rep.first_failure = [int(idxs[np.argmax(bad)])]
        if len(vals):
            rep.max_valuation = max(rep.max_valuation, int(vals[~bad].max()) if (~bad).any() else -1)

    def case_two(Xs, idxs, label):
        choice, ok = _choose_case_two(vl, Xs, out_roots, N)
        if (~ok).any():
            rep.failures += int((~ok).sum())
            if rep.first_failure is None:
                rep.first_failure = [int(idxs[np.argmax(~ok)])]
        for r in np.unique(choice[ok]):
            sel = ok & (choice == r)
            j = int(out_label_idx[r])
            Y = vl.bracket_basis(Xs[sel], j, m)
            record(label, ring.vvaluation(Y[:, j, :]), idxs[sel])

    for start in range(1, total + 1, chunk):
        idxs = np.arange(start, min(start + chunk, total + 1), dtype=np.int64)
        digit_idx = (idxs[:, None] // powers[None, :]) % q  # (B, dim)
        X = digits[digit_idx]  # (B, dim, d)
        rep.cosets += len(idxs)
        vals = ring.vvaluation(X)  # (B, dim)
        out_min = vals[:, out_idx].min(axis=1)
        c1 = out_min < N
        record(1, out_min[c1], idxs[c1])
        rest = ~c1
        h_nz = (vals[:, h_idx] < N).any(axis=1) & rest
        if h_nz.any():
            case_two(X[h_nz], idxs[h_nz], 2)
        c3 = rest & ~h_nz
        if c3.any():
            X3, i3 = X[c3], idxs[c3]
            pv = vals[c3][:, psi_idx]
            choice = np.argmin(pv, axis=1)  # first minimum = basis order
            for r in np.unique(choice):
                sel = choice == r
                X1 = vl.bracket_basis(X3[sel], int(neg_of[r]), m)
                case_two(X1, i3[sel], 3)

    if sample_check and total:
        rng = np.random.default_rng(seed)
        picks = rng.integers(1, total + 1, size=min(sample_check, total))
        for idx in picks:
            digit = (int(idx) // powers) % q
            coeffs = [ring.from_coords(digits[dd]) for dd in digit]
            x = lat_r.element(coeffs, ring)
            w = escape_witness(x, endo, m)
            if w.valuation >= N:
                raise WitnessFailure(f"scalar witness failed on coset {int(idx)}")
    return rep
