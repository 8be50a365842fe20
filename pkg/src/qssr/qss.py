"""Classical quasi-steady-state reduction and the search for parameter values
at which it is accurate.

Throughout, ``x1`` are the retained states and ``x2`` the QSS states; ``h1`` and
``h2`` are the matching blocks of the vector field. The QSS variety is the zero
set of ``h2`` where ``D2 h2`` (the Jacobian in ``x2``) has full rank.
"""

import random
from dataclasses import dataclass, field
from fractions import Fraction

from .calculus import epsilon_expand
from .decompose import branch_text, contained_in, split_components
from .errors import (BudgetExceeded, NotAffineLinearError, RankConditionError,
                     SingularMatrixError)
from .groebner import MonomialOrder, _as_budget, eliminate, groebner, radical_membership
from .matrix import (PolyMatrix, det, jacobian, matrix_inverse_ff, minors, rational_rank, solve_ff,
                     solve_rational)
from .poly import Polynomial, Ring, split_factors
from .rational import RationalFunction, substitute_rational


@dataclass(frozen=True)
class QssSplit:
    states: tuple
    qss: tuple

    def __post_init__(self):
        if len(set(self.qss)) != len(self.qss):
            raise ValueError("QSS species listed twice")
        for q in self.qss:
            if q not in self.states:
                raise ValueError(f"{q!r} is not a state")
        if not 1 <= len(self.slow) < len(self.states):
            raise ValueError("the QSS species must be a nonempty proper subset of the states")

    @classmethod
    def of(cls, odes, qss):
        if isinstance(qss, str):
            qss = [s.strip() for s in qss.split(",") if s.strip()]
        return cls(tuple(odes.states), tuple(qss))

    @property
    def slow(self):
        return tuple(s for s in self.states if s not in self.qss)

    @property
    def r(self):
        return len(self.slow)


@dataclass(frozen=True)
class ReducedSystem:
    """A rational vector field on a variety. ``time_scale == "slow"`` means the
    field is the coefficient of the small parameter (derivative in slow time)."""

    ring: object
    states: tuple
    field: tuple
    variety: tuple
    excluded_locus: Polynomial
    mode: str
    time_scale: str = "fast"
    extras: dict = field(default_factory=dict, compare=False)

    def component(self, name):
        return self.field[self.states.index(name)]

    def as_dict(self):
        return dict(zip(self.states, self.field))


def _blocks(odes, split):
    h = odes.field_dict()
    return [h[x] for x in split.slow], [h[x] for x in split.qss]


def excluded_locus(fields):
    """Product of the distinct factors of all denominators."""
    ring = fields[0].ring
    factors = {}
    for f in fields:
        for g in split_factors(f.den):
            factors[str(g)] = g
    out = ring.one
    for k in sorted(factors):
        out = out * factors[k]
    return out


def _inverse(M, what="D2 h2"):
    try:
        return matrix_inverse_ff(M)
    except SingularMatrixError:
        raise RankConditionError(f"{what} is singular over the fraction field; "
                                 "the rank condition on the QSS variables cannot hold") from None


def _implicit_field(h1, h2, split):
    D2 = jacobian(h2, split.qss)
    D1 = jacobian(h2, split.slow)
    P1 = D1.polynomial_entries()
    rhs = [-sum((P1[i][j] * h1[j] for j in range(len(h1))), D2.ring.zero)
           for i in range(len(h2))]
    try:
        x2dot = solve_ff(D2, rhs)
    except SingularMatrixError:
        _inverse(D2)
    return [RationalFunction(p) for p in h1] + x2dot, D2


def implicit_reduce(odes, split):
    """Field (h1, -D2h2^-1 D1h2 h1) on the variety h2 = 0."""
    h1, h2 = _blocks(odes, split)
    fld, D2 = _implicit_field(h1, h2, split)
    d = det(D2)
    return ReducedSystem(odes.ring, split.slow + split.qss, tuple(fld), tuple(h2),
                         d.num.primitive(), "implicit")


def is_affine_in(p, names):
    idx = [p.ring.index(n) for n in names]
    return all(sum(e[i] for i in idx) <= 1 for e in p.terms)


def explicit_reduce_linear(odes, split):
    """Solve h2 = M x2 + b = 0 for x2 and substitute into h1."""
    h1, h2 = _blocks(odes, split)
    for q, p in zip(split.qss, h2):
        if not is_affine_in(p, split.qss):
            raise NotAffineLinearError(
                f"not explicitly solvable: the equation for {q} is not affine-linear in "
                f"{', '.join(split.qss)}; nonlinear QSS equations need not be solvable by radicals, so no explicit "
                "reduction is attempted")
    zero = {q: 0 for q in split.qss}
    M = jacobian(h2, split.qss)
    b = [p.subs(zero) for p in h2]
    inv = _inverse(M, "the coefficient matrix of the QSS variables")
    psi = [-v for v in inv.apply(b)]
    mapping = dict(zip(split.qss, psi))
    fld = tuple(substitute_rational(p, mapping) for p in h1)
    ex = excluded_locus(list(fld) + psi)
    return ReducedSystem(odes.ring, split.slow, fld, (), ex, "explicit-linear",
                         extras={"psi": dict(mapping)})


# -- the algebraic criterion --------------------------------------------------

@dataclass(frozen=True)
class QssCriterionSystem:
    h2: tuple
    lie: tuple
    minors: tuple  # one tuple of minors per QSS component
    equations: tuple

    @property
    def ideal_J(self):
        return [p for p in self.equations if not p.is_zero]


def qss_criterion_polynomials(odes, split):
    """h2, the Lie derivatives L_h(h_k), and all (n-r+1)-minors of each A_k,
    where A_k stacks the gradients of h2 and of L_h(h_k)."""
    h1, h2 = _blocks(odes, split)
    lie = [odes.lie(p) for p in h2]
    size = len(split.qss) + 1
    all_minors = []
    for Lk in lie:
        A = jacobian(h2 + [Lk], odes.states)
        all_minors.append(tuple(minors(A, size)))
    eqs = tuple(h2) + tuple(lie) + tuple(m for ms in all_minors for m in ms)
    return QssCriterionSystem(tuple(h2), tuple(lie), tuple(all_minors), eqs)


@dataclass
class CriticalSet:
    status: str  # ok | trivial | empty | infeasible
    generators: list
    branches: list
    steps: int = 0
    message: str = ""

    def conditions(self):
        return [branch_text(b) for b in self.branches]


def find_qss_critical(odes, split, budget=None):
    """Generators of J intersected with the parameter ring, and its zero set."""
    crit = qss_criterion_polynomials(odes, split)
    params = list(odes.ring.parameters)
    budget = _as_budget(budget)
    try:
        gens = eliminate(crit.ideal_J, params, budget=budget)
    except BudgetExceeded as exc:
        return CriticalSet("infeasible", [], [], exc.steps or budget.steps, str(exc))
    gens = sorted(gens, key=lambda g: (g.total_degree(), len(g.terms), str(g)))
    if not gens:
        return CriticalSet("trivial", [], [[]], budget.steps,
                           "the elimination ideal is zero: no condition on the parameters")
    if any(g.is_constant for g in gens):
        return CriticalSet("empty", gens, [], budget.steps, "no parameter value is QSS-critical")
    try:
        branches = split_components(gens, budget=budget)
    except BudgetExceeded as exc:
        return CriticalSet("infeasible", gens, [], budget.steps, str(exc))
    return CriticalSet("ok", gens, branches, budget.steps)


# -- verification at a parameter point ------------------------------------------

def parameter_substitution(odes, pstar):
    out = {}
    for name, value in pstar.items():
        if name not in odes.ring or odes.ring.kinds[odes.ring.index(name)] != "parameter":
            raise ValueError(f"{name!r} is not a parameter of the model")
        out[name] = value if isinstance(value, Polynomial) else Fraction(value)
    return out


def _require_full(odes, pstar):
    used = set()
    for h in odes.rhs:
        used.update(v for v in h.variables() if odes.ring.kinds[odes.ring.index(v)] == "parameter")
    missing = sorted(used - set(pstar))
    if missing:
        raise ValueError(f"parameter values missing for {', '.join(missing)}")


@dataclass
class QssVerdict:
    is_critical: bool
    is_qss_pv: object  # True, False or None (inconclusive)
    rank_witness: dict
    invariance_certificates: dict
    strict_certificates: dict
    status: str
    first_failing: str = None
    variety: list = field(default_factory=list)


def _sample_variety_point(odes, split, h2, D2, rng, attempts, numeric_fallback=True):
    """Point on h2 = 0 where D2 is invertible: exact when h2 is affine in x2."""
    affine = all(is_affine_in(p, split.qss) for p in h2)
    zero = {q: 0 for q in split.qss}
    for _ in range(attempts):
        x1 = {x: Fraction(rng.randint(1, 64), rng.randint(1, 32)) for x in split.slow}
        if affine:
            M = [[p.diff(q).evaluate({**x1, **zero}) for q in split.qss] for p in h2]
            b = [p.evaluate({**x1, **zero}) for p in h2]
            if rational_rank(M) < len(split.qss):
                continue
            x2 = solve_rational(M, [-v for v in b])
            point = {**x1, **dict(zip(split.qss, x2))}
            if rational_rank(D2.evaluate(point)) == len(split.qss):
                return point, "exact"
        elif numeric_fallback:
            from .numeric import newton_solve

            guess = {q: rng.uniform(0.0, 2.0) for q in split.qss}
            sol = newton_solve(h2, split.qss, {k: float(v) for k, v in x1.items()}, guess)
            if sol is None:
                continue
            point = {**{k: float(v) for k, v in x1.items()}, **sol}
            import numpy as np

            J = np.array([[float(_feval(e, point)) for e in row] for row in D2.entries])
            if np.linalg.matrix_rank(J, tol=1e-8 * max(1.0, np.abs(J).max())) == len(split.qss):
                return point, "numeric"
    return None, None


def _feval(rf, point):
    num = sum(float(c) * _mono(e, rf.ring.names, point) for e, c in rf.num.terms.items())
    den = sum(float(c) * _mono(e, rf.ring.names, point) for e, c in rf.den.terms.items())
    return num / den


def _mono(e, names, point):
    out = 1.0
    for n, k in zip(names, e):
        if k:
            out *= point[n] ** k
    return out


def verify_qss_parameter_value(odes, split, pstar, budget=None, attempts=256, seed=0):
    """Invariance of the QSS variety and the rank condition at a parameter point.

    Invariance is tested as L_h(h_j) * det(D2 h2) in the radical of <h2>, i.e. on
    the part of the zero set where the rank condition holds (the QSS variety).
    ``strict_certificates`` records the plain test L_h(h_j) in rad<h2>."""
    _require_full(odes, pstar)
    sub = parameter_substitution(odes, pstar)
    star = odes.substitute(sub)
    h1, h2 = _blocks(star, split)
    D2 = jacobian(h2, split.qss)
    d = det(D2).num
    certs, strict = {}, {}
    first = None
    for q, p in zip(split.qss, h2):
        L = star.lie(p)
        strict[q] = radical_membership(L, h2, budget)
        certs[q] = strict[q] or (not d.is_zero and radical_membership(L * d, h2, budget))
        if not certs[q] and first is None:
            first = q
    critical = all(certs.values())
    if d.is_zero or radical_membership(d, h2, budget):
        return QssVerdict(critical, False, None, certs, strict,
                          "rank condition fails on the whole zero set", first, [str(p) for p in h2])
    if not critical:
        return QssVerdict(False, False, None, certs, strict, "QSS variety is not invariant",
                          first, [str(p) for p in h2])
    rng = random.Random(seed)
    point, kind = _sample_variety_point(star, split, h2, D2, rng, attempts)
    if point is None:
        return QssVerdict(True, None, None, certs, strict, "rank witness not found", None,
                          [str(p) for p in h2])
    return QssVerdict(True, True, {"point": point, "kind": kind}, certs, strict,
                      "QSS parameter value", None, [str(p) for p in h2])


# -- affine coordinate subspaces ----------------------------------------------------

@dataclass
class AffineCandidate:
    conditions: list  # Groebner basis in (gamma, pi)
    parameter_conditions: list
    gamma: dict  # QSS species -> Polynomial in pi, or None when not unique
    rank_ok: bool

    def text(self):
        return {
            "conditions": branch_text(self.conditions),
            "parameter_conditions": branch_text(self.parameter_conditions),
            "gamma": {k: (None if v is None else str(v)) for k, v in self.gamma.items()},
            "rank_ok": self.rank_ok,
        }


@dataclass
class AffineCandidates:
    status: str
    gamma_names: dict
    coefficients: list
    candidates: list
    specializations: list
    rank_failures: list
    message: str = ""


def gamma_ring(ring, gnames):
    """``ring`` with the gamma indeterminates placed first, so that a block order
    with boundary len(gnames) rewrites gamma in terms of the rest when possible."""
    names = list(gnames.values())
    return Ring(tuple(names) + ring.names, ("auxiliary",) * len(names) + ring.kinds)


def affine_subspace_candidates(odes, split, nonnegative=False, budget=None):
    """Parameter values for which some subspace x2 = gamma is invariant with full rank.

    h2 restricted to x2 = gamma is collected by monomials in x1; its coefficients
    in (gamma, pi) must all vanish. The resulting zero set is split into branches,
    branches that violate the rank condition are set aside, and a branch whose
    parameter conditions specialise another branch's is reported separately."""
    ring = odes.ring
    gnames = {q: ring.fresh_name(f"gamma_{q}") for q in split.qss}
    big = gamma_ring(ring, gnames)
    h1, h2 = _blocks(odes, split)
    shift = {q: big.gen(g) for q, g in gnames.items()}
    h2g = [p.to_ring(big).subs(shift) for p in h2]
    coeffs = {}
    for p in h2g:
        for c in p.coefficients(list(split.slow)).values():
            c = c.primitive()
            coeffs[str(c)] = c
    coeffs = [coeffs[k] for k in sorted(coeffs)]
    try:
        branches = split_components(coeffs, nonnegative=nonnegative, budget=budget)
    except BudgetExceeded as exc:
        return AffineCandidates("infeasible", gnames, coeffs, [], [], [], str(exc))
    D2 = jacobian([p.to_ring(big) for p in h2], split.qss)
    d = det(D2).num.subs(shift)
    params = list(ring.parameters)
    good, bad = [], []
    for B in branches:
        if B:
            rank_ok = not radical_membership(d, B, budget)
            proj = eliminate(B, params, budget=budget)
            G = groebner(B, MonomialOrder("block", len(gnames)), budget)
        else:
            rank_ok = not d.is_zero
            proj, G = [], None
        gamma = {}
        for q, g in gnames.items():
            val = None
            if G is not None:
                nf = G.normal_form(big.gen(g))
                if not nf.involves(list(gnames.values())) and not nf.involves(list(split.slow)):
                    val = nf.to_ring(ring)
            gamma[q] = val
        cand = AffineCandidate(B, sorted(proj, key=str), gamma, rank_ok)
        (good if rank_ok else bad).append(cand)
    maximal, special = [], []
    for i, a in enumerate(good):
        dominated = False
        for j, b in enumerate(good):
            if i != j and contained_in(a.parameter_conditions, b.parameter_conditions, budget) \
                    and not contained_in(b.parameter_conditions, a.parameter_conditions, budget):
                dominated = True
                break
        (special if dominated else maximal).append(a)
    return AffineCandidates("ok", gnames, coeffs, maximal, special, bad)


# -- first integrals and the first-order expansion ----------------------------------

def first_integral_check(odes, pstar, split, j, budget=None):
    """``subspace-bound`` if the QSS variety lies in {x_j = gamma}, ``first-integral``
    if h_j vanishes on it, else ``neither``. Returns (verdict, gamma or None)."""
    sub = parameter_substitution(odes, pstar)
    star = odes.substitute(sub)
    h1, h2 = _blocks(star, split)
    d = det(jacobian(h2, split.qss)).num
    ring = star.ring
    t = ring.fresh_name("t_")
    big = ring.extend([t])
    sat = [p.to_ring(big) for p in h2] + [big.one - big.gen(t) * d.to_ring(big)]
    uni = eliminate(sat, [j], budget=budget)
    for g in uni:
        g = g.to_ring(ring)
        fs = split_factors(g)
        if len(fs) == 1 and fs[0].degree(j) == 1 and fs[0].total_degree() == 1:
            f = fs[0]
            gamma = -f.subs({j: 0}).constant_value() / f.diff(j).constant_value()
            return "subspace-bound", gamma
    hj = star.field_dict()[j]
    if radical_membership(hj * d, h2, budget):
        return "first-integral", None
    return "neither", None


def qss_first_order(odes, split, pstar, rho=None):
    """Order-0 and order-eps blocks of the implicit QSS reduction at pstar + eps*rho.

    The x1 block at order eps is h1^[1] - D2 h0^[1] (D2 h0^[2])^-1 h1^[2]: the
    variety moves with eps, and this is the derivative of h^[1] along it. The x2
    block at order eps is the three-term expression q(x)."""
    ser = epsilon_expand(odes.rhs, parameter_substitution(odes, pstar), rho or {}, 1)
    h0 = dict(zip(odes.states, ser.coeffs[0]))
    hh = dict(zip(odes.states, ser.coeffs[1]))
    h01 = [h0[x] for x in split.slow]
    h02 = [h0[x] for x in split.qss]
    h11 = [hh[x] for x in split.slow]
    h12 = [hh[x] for x in split.qss]
    D2h02 = jacobian(h02, split.qss)
    D1h02 = jacobian(h02, split.slow)
    inv = _inverse(D2h02, "D2 h0^[2]")
    ring = odes.ring
    order0 = [RationalFunction(p) for p in h01] + (-(inv @ D1h02)).apply(h01)
    D2h01 = jacobian(h01, split.qss)
    shift = (D2h01 @ inv).apply(h12)
    x1 = [RationalFunction(a) - b for a, b in zip(h11, shift)]
    D2h12 = jacobian(h12, split.qss)
    D1h12 = jacobian(h12, split.slow)
    col = lambda v: PolyMatrix.column(v, ring)
    q = (inv @ D2h12 @ inv @ D1h02 @ col(h01)) - (inv @ D1h12 @ col(h01)) - (inv @ D1h02 @ col(h11))
    x2 = [r[0] for r in q.entries]
    names = split.slow + split.qss
    dloc = det(D2h02).num.primitive()
    r0 = ReducedSystem(ring, names, tuple(order0), tuple(h02), dloc, "implicit")
    r1 = ReducedSystem(ring, names, tuple(x1 + x2), tuple(h02), dloc, "qss-first-order", "slow")
    return r0, r1


def reduced_invariance_selftest(reduced, budget=None):
    """L_{h_red}(h_j) vanishes on the variety for every QSS equation h_j."""
    if reduced.mode not in ("implicit",):
        raise ValueError("the self-test applies to implicit reductions")
    states = list(reduced.states)
    for p in reduced.variety:
        L = RationalFunction(reduced.ring.zero)
        for x, f in zip(states, reduced.field):
            dp = p.diff(x)
            if not dp.is_zero:
                L = L + f * dp
        if L.is_zero:
            continue
        if not radical_membership(L.num, list(reduced.variety), budget):
            return False
    return True
