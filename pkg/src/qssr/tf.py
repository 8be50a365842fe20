"""Singular perturbation (Tikhonov-Fenichel) reductions and their comparison
with classical QSS reduction.

All reduced fields here are coefficients of the small parameter eps, i.e. they
describe the flow in slow time tau = eps * t.
"""

from dataclasses import dataclass
from fractions import Fraction

from .calculus import epsilon_expand
from .errors import SingularMatrixError, SplittingError, TfReductionError
from .decompose import split_components
from .groebner import MonomialOrder, groebner, radical_equal, radical_membership
from .matrix import PolyMatrix, det, jacobian, matrix_inverse_ff, rational_rank
from .poly import Polynomial
from .qss import (ReducedSystem, excluded_locus, gamma_ring,
                  is_affine_in, parameter_substitution, qss_first_order)
from .rational import RationalFunction


@dataclass(frozen=True)
class LinvarDecomposition:
    """h0^[1] = B y + O(y^2), h0^[2] = A y + O(y^2), h1^[1] = u + O(y),
    h1^[2] = v + O(y), with y = x2 - gamma_star."""

    A: PolyMatrix
    B: PolyMatrix
    u: tuple
    v: tuple
    gamma_star: dict


@dataclass(frozen=True)
class TfDecomposition:
    P: PolyMatrix
    mu: tuple
    q: tuple


def _expansion(odes, pstar, rho):
    ser = epsilon_expand(odes.rhs, parameter_substitution(odes, pstar), rho or {}, 1)
    return list(ser.coeffs[0]), list(ser.coeffs[1])


def fully_singular_check(odes, split, pstar, gamma_star):
    """h(., pstar) vanishes identically on the subspace x2 = gamma_star.

    Every polynomial in the radical of <x2 - gamma> is zero after substituting
    x2 = gamma, so the radical membership test reduces to substitution."""
    star = odes.substitute(parameter_substitution(odes, pstar))
    at = {q: gamma_star.get(q, 0) for q in split.qss}
    return all(h.subs(at).is_zero for h in star.rhs)


def linvar_decomposition(odes, split, pstar, rho, gamma_star):
    h0, h1 = _expansion(odes, pstar, rho)
    ring = odes.ring
    idx = {x: i for i, x in enumerate(odes.states)}
    g = {q: gamma_star.get(q, 0) for q in split.qss}
    g = {q: (v if isinstance(v, Polynomial) else ring.const(Fraction(v))) for q, v in g.items()}
    shift = {q: ring.gen(q) + g[q] for q in split.qss}
    zero = {q: 0 for q in split.qss}
    h0s = [p.subs(shift) for p in h0]
    h1s = [p.subs(shift) for p in h1]
    for x, p in zip(odes.states, h0s):
        if not p.subs(zero).is_zero:
            raise TfReductionError(f"h at the parameter point does not vanish on the subspace "
                                   f"(component {x} restricts to {p.subs(zero)})")
    A = jacobian([h0s[idx[q]] for q in split.qss], split.qss).subs(zero)
    B = jacobian([h0s[idx[x]] for x in split.slow], split.qss).subs(zero)
    u = tuple(h1s[idx[x]].subs(zero) for x in split.slow)
    v = tuple(h1s[idx[q]].subs(zero) for q in split.qss)
    return LinvarDecomposition(A, B, u, v, g)


def tf_reduce_affine(odes, split, pstar, rho, gamma_star=None):
    """eps-coefficient u - B A^-1 v of the reduction onto x2 = gamma_star."""
    dec = linvar_decomposition(odes, split, pstar, rho, gamma_star or {})
    try:
        inv = matrix_inverse_ff(dec.A)
    except SingularMatrixError:
        raise TfReductionError("the linear part A of the QSS block is singular on the subspace; "
                               "the scenario is beyond standard singular perturbation theory") from None
    corr = (dec.B @ inv).apply(list(dec.v))
    fld = tuple(RationalFunction(a) - b for a, b in zip(dec.u, corr))
    ring = odes.ring
    variety = tuple(ring.gen(q) - dec.gamma_star[q] for q in split.qss)
    ex = excluded_locus(list(fld)) if fld else ring.one
    return ReducedSystem(ring, split.slow, fld, variety, ex, "tf-first-order", "slow",
                         extras={"linvar": dec})


def tf_reduce_general(odes, pstar, rho, P, mu, budget=None):
    """eps-coefficient (I - P A^-1 Dmu) q with A = Dmu P, on the variety mu = 0."""
    h0, q = _expansion(odes, pstar, rho)
    ring = odes.ring
    mu = [m if isinstance(m, Polynomial) else ring.parse(m) for m in mu]
    if not isinstance(P, PolyMatrix):
        P = PolyMatrix([[e if not isinstance(e, str) else ring.parse(e) for e in row] for row in P], ring)
    n = len(odes.states)
    if P.rows != n or P.cols != len(mu):
        raise TfReductionError(f"P must be {n} x {len(mu)}, got {P.rows} x {P.cols}")
    if len(mu) >= n:
        raise TfReductionError("mu must have fewer components than there are states "
                               "(the slow manifold needs positive dimension)")
    prod = P.apply(mu)
    for x, a, b in zip(odes.states, prod, h0):
        if a != RationalFunction(b):
            raise TfReductionError(f"P * mu does not reproduce h at the parameter point "
                                   f"(component {x})")
    Dmu = jacobian(mu, odes.states)
    A = Dmu @ P
    dA = det(A)
    if dA.is_zero or radical_membership(dA.num, mu, budget):
        raise TfReductionError("A = Dmu * P is singular on the variety mu = 0")
    inv = matrix_inverse_ff(A)
    proj = PolyMatrix.identity(ring, n) - P @ inv @ Dmu
    fld = tuple(proj.apply(q))
    ex = excluded_locus(list(fld))
    return ReducedSystem(ring, tuple(odes.states), fld, tuple(mu), ex, "tf-general", "slow",
                         extras={"projection": proj, "decomposition": TfDecomposition(P, tuple(mu), tuple(q))})


def auto_decomposition(odes, split, pstar):
    """P and mu with mu = h0^[2] when h0 is a multiple of it (one QSS species)."""
    h0 = odes.substitute(parameter_substitution(odes, pstar)).rhs
    if len(split.qss) != 1:
        raise TfReductionError("automatic P, mu is only available for a single QSS species; "
                               "supply P and mu")
    mu = h0[list(odes.states).index(split.qss[0])]
    if mu.is_zero:
        raise TfReductionError("h0 vanishes on the whole QSS component")
    col = []
    for h in h0:
        qpart, rem = h.divmod(mu)
        if not rem.is_zero:
            raise TfReductionError("h at the parameter point is not a multiple of the QSS equation")
        col.append([qpart])
    return PolyMatrix(col, odes.ring), [mu]


@dataclass
class ConsistencyResult:
    verdict: str  # consistent | inconsistent
    route: str  # affine | general
    differing: list
    witness: dict


def subspace_gamma(odes, split, pstar, budget=None):
    """A subspace x2 = gamma on which h(., pstar) vanishes identically, with
    gamma a polynomial in the parameters left free; None if there is none.

    h at x2 = gamma is collected by monomials in x1; the coefficients, which
    live in (gamma, free parameters), are split into branches. Branches that
    impose conditions on the free parameters are discarded; among the rest the
    first in sorted order is returned. The subspace x2 = 0 is tried before
    any search."""
    zero = {q: odes.ring.zero for q in split.qss}
    if fully_singular_check(odes, split, pstar, zero):
        return zero
    star = odes.substitute(parameter_substitution(odes, pstar))
    ring = star.ring
    gnames = {q: ring.fresh_name(f"gamma_{q}") for q in split.qss}
    big = gamma_ring(ring, gnames)
    shift = {q: big.gen(g) for q, g in gnames.items()}
    coeffs = {}
    for h in star.rhs:
        for c in h.to_ring(big).subs(shift).coefficients(list(split.slow)).values():
            if not c.is_zero:
                c = c.primitive()
                coeffs[str(c)] = c
    gvars = list(gnames.values())
    found = []
    for branch in split_components([coeffs[k] for k in sorted(coeffs)], budget=budget):
        if any(not g.involves(gvars) for g in branch):
            continue
        G = groebner(branch, MonomialOrder("block", len(gnames)), budget)
        gamma = {}
        for q, g in gnames.items():
            nf = G.normal_form(big.gen(g))
            if nf.involves(gvars) or nf.involves(list(split.slow)):
                break
            gamma[q] = nf.to_ring(ring)
        else:
            found.append(gamma)
    found.sort(key=lambda g: [str(g[q]) for q in split.qss])
    for gamma in found:
        if fully_singular_check(odes, split, pstar, gamma):
            return gamma
    return None


def consistency_check(odes, split, pstar, rho, P=None, mu=None, budget=None):
    """Compare the eps-order retained block of the QSS reduction with the
    singular perturbation reduction, on the QSS variety of pstar."""
    _, qss1 = qss_first_order(odes, split, pstar, rho)
    slow = list(split.slow)
    qss_x1 = list(qss1.field[:len(slow)])
    gamma = None if (P is not None or mu is not None) else subspace_gamma(odes, split, pstar, budget)
    if gamma is not None:
        tf = tf_reduce_affine(odes, split, pstar, rho, gamma)
        at = dict(gamma)
        qss_on = [f.subs(at) for f in qss_x1]
        differing = [x for x, a, b in zip(slow, qss_on, tf.field) if a != b]
        witness = {x: _witness(a, b, a - b)
                   for x, a, b in zip(slow, qss_on, tf.field) if x in differing}
        return ConsistencyResult("inconsistent" if differing else "consistent", "affine",
                                 differing, witness)
    if P is None or mu is None:
        P, mu = auto_decomposition(odes, split, pstar)
    tf = tf_reduce_general(odes, pstar, rho, P, mu, budget)
    tf_x1 = [tf.component(x) for x in slow]
    mu = list(tf.variety)
    h02 = [p for x, p in zip(odes.states, odes.substitute(parameter_substitution(odes, pstar)).rhs)
           if x in split.qss]
    if not radical_equal(h02, mu, budget):
        # the QSS variety is not the slow manifold: no first-order comparison makes sense
        return ConsistencyResult("inconsistent", "general", ["variety"],
                                 {"variety": {"qss": tuple(h02), "tf": tuple(mu)}})
    psi = _explicit_on(mu, split)
    differing, witness = [], {}
    for x, a, b in zip(slow, qss_x1, tf_x1):
        diff = a - b
        if diff.is_zero:
            continue
        if radical_membership(diff.num, mu, budget):
            continue
        differing.append(x)
        if psi is not None:
            a, b, diff = a.subs(psi), b.subs(psi), diff.subs(psi)
        witness[x] = _witness(a, b, diff)
    return ConsistencyResult("inconsistent" if differing else "consistent", "general",
                             differing, witness)


def _witness(a, b, diff):
    """Both fields, their difference, and the shift of the denominator when the
    singular perturbation field is written over the QSS numerator."""
    w = {"qss": a, "tf": b, "difference": diff}
    if not a.is_zero and not b.is_zero:
        w["denominator_shift"] = RationalFunction(a.num) / b - RationalFunction(a.den)
    return w


def _explicit_on(mu, split):
    """Solve mu = 0 for the QSS variables when it is affine in them."""
    if len(mu) != len(split.qss) or not all(is_affine_in(m, split.qss) for m in mu):
        return None
    M = jacobian(mu, split.qss)
    zero = {q: 0 for q in split.qss}
    b = [m.subs(zero) for m in mu]
    try:
        inv = matrix_inverse_ff(M)
    except SingularMatrixError:
        return None
    return dict(zip(split.qss, [-v for v in inv.apply(b)]))


# -- spectral conditions ---------------------------------------------------------

def characteristic_polynomial(M):
    """Coefficients of det(lambda I - M), highest degree first (Faddeev-LeVerrier)."""
    n = len(M)
    M = [[Fraction(x) for x in r] for r in M]
    coeffs = [Fraction(1)]
    Mk = [[Fraction(0)] * n for _ in range(n)]
    I = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    c = Fraction(1)
    for k in range(1, n + 1):
        # Mk = M (M_{k-1} + c_{k-1} I)
        T = [[Mk[i][j] + c * I[i][j] for j in range(n)] for i in range(n)]
        Mk = [[sum(M[i][l] * T[l][j] for l in range(n)) for j in range(n)] for i in range(n)]
        c = -sum(Mk[i][i] for i in range(n)) / k
        coeffs.append(c)
    return coeffs


def routh_hurwitz_stable(coeffs):
    """All roots in the open left half plane, by the Routh array over Q."""
    coeffs = [Fraction(c) for c in coeffs]
    while coeffs and coeffs[0] == 0:
        coeffs.pop(0)
    if not coeffs:
        return False
    if coeffs[0] < 0:
        coeffs = [-c for c in coeffs]
    if len(coeffs) == 1:
        return True
    if any(c <= 0 for c in coeffs):
        return False
    r1 = coeffs[0::2]
    r2 = coeffs[1::2]
    first = [r1[0], r2[0]]
    while len(r2) > 0 and any(r2):
        if r2[0] == 0:
            return False
        nxt = []
        for i in range(len(r1) - 1):
            a = r1[i + 1]
            b = r2[i + 1] if i + 1 < len(r2) else Fraction(0)
            nxt.append((r2[0] * a - r1[0] * b) / r2[0])
        r1, r2 = r2, nxt
        if r2:
            first.append(r2[0])
    return len(first) == len(coeffs) and all(x > 0 for x in first)


def hurwitz_spectrum_check(odes, pstar, point):
    """Nonzero eigenvalues of Dh(point, pstar) have negative real part.

    Parameters missing from both pstar and point take the model defaults.

    Raises SplittingError if the kernel and the image of the Jacobian are not
    complementary (zero is not a semisimple eigenvalue)."""
    star = odes.substitute(parameter_substitution(odes, pstar))
    pt = {k: Fraction(v) for k, v in odes.default_point().items() if k not in pstar}
    pt.update({k: Fraction(v) for k, v in point.items()})
    vals = [h.evaluate(pt) for h in star.rhs]
    if any(vals):
        raise ValueError("the point is not stationary for h at the parameter value")
    J = jacobian(star.rhs, star.states).evaluate(pt)
    n = len(J)
    s = n - rational_rank(J)
    chi = characteristic_polynomial(J)
    # lambda^s always divides chi; zero is semisimple iff lambda^(s+1) does not
    if chi[n - s] == 0:
        raise SplittingError("kernel and image of the Jacobian are not complementary")
    return routh_hurwitz_stable(chi[:n - s + 1])
