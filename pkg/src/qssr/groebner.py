"""Buchberger's algorithm with Gebauer-Moeller pair elimination and sugar selection.

Internally polynomials are dicts from exponent tuples to Python ints; reduction
is fraction-free and basis elements are kept primitive. Every computation runs
under a step budget (and optional wall-clock cap) and raises BudgetExceeded
when it runs out, so callers can report "infeasible" instead of hanging.
"""

import heapq
import time
from fractions import Fraction
from math import gcd, lcm

from .errors import BudgetExceeded
from .poly import Polynomial, Ring

DEFAULT_STEPS = 10 ** 6


class MonomialOrder:
    """``lex``, ``grevlex`` or ``block``: grevlex on the first ``boundary``
    variables, ties broken by grevlex on the rest (an elimination order)."""

    def __init__(self, kind="grevlex", boundary=None):
        if kind not in ("lex", "grevlex", "block"):
            raise ValueError(f"unknown monomial order {kind!r}")
        if kind == "block" and boundary is None:
            raise ValueError("block orders need a boundary")
        self.kind = kind
        self.boundary = boundary

    def __eq__(self, other):
        return isinstance(other, MonomialOrder) and (self.kind, self.boundary) == (other.kind, other.boundary)

    def __hash__(self):
        return hash((self.kind, self.boundary))

    def __repr__(self):
        if self.kind == "block":
            return f"MonomialOrder('block', {self.boundary})"
        return f"MonomialOrder({self.kind!r})"

    def descending_key(self):
        """Key whose ascending order is the descending monomial order."""
        if self.kind == "lex":
            return lambda e: tuple(-x for x in e)
        if self.kind == "grevlex":
            return lambda e: (-sum(e),) + e[::-1]
        b = self.boundary

        def key(e):
            head, tail = e[:b], e[b:]
            return (-sum(head),) + head[::-1] + (-sum(tail),) + tail[::-1]

        return key


def _ascending_key(order):
    """Key whose ascending order is the monomial order itself."""
    if order.kind == "lex":
        return lambda e: e
    if order.kind == "grevlex":
        return lambda e: (sum(e),) + tuple(-x for x in reversed(e))
    b = order.boundary

    def key(e):
        head, tail = e[:b], e[b:]
        return ((sum(head),) + tuple(-x for x in reversed(head))
                + (sum(tail),) + tuple(-x for x in reversed(tail)))

    return key


class Budget:
    def __init__(self, steps=DEFAULT_STEPS, seconds=None):
        self.max_steps = steps
        self.max_seconds = seconds
        self.steps = 0
        self.start = time.monotonic()

    def tick(self, n=1):
        self.steps += n
        if self.max_steps is not None and self.steps > self.max_steps:
            raise BudgetExceeded(f"Groebner step budget of {self.max_steps} exhausted",
                                 steps=self.steps, seconds=time.monotonic() - self.start)
        if self.max_seconds is not None and self.steps % 256 == 0:
            elapsed = time.monotonic() - self.start
            if elapsed > self.max_seconds:
                raise BudgetExceeded(f"Groebner time budget of {self.max_seconds}s exhausted",
                                     steps=self.steps, seconds=elapsed)


def _as_budget(budget):
    if isinstance(budget, Budget):
        return budget
    if budget is None:
        return Budget()
    if isinstance(budget, dict):
        return Budget(**budget)
    return Budget(steps=budget)


# -- internal integer polynomials --------------------------------------------

class _IPoly:
    __slots__ = ("terms", "lm", "lc", "sugar")

    def __init__(self, terms, key, sugar=None):
        self.terms = terms
        self.lm = min(terms, key=key)
        self.lc = terms[self.lm]
        self.sugar = max(sum(e) for e in terms) if sugar is None else sugar


def _integral_primitive(p):
    """Fraction-coefficient Polynomial -> primitive int dict (positive scale)."""
    den = 1
    for c in p.terms.values():
        den = lcm(den, c.denominator)
    out = {e: int(c * den) for e, c in p.terms.items()}
    return _primitive(out)


def _primitive(d):
    g = 0
    for c in d.values():
        g = gcd(g, c)
        if g == 1:
            return d
    if g > 1:
        return {e: c // g for e, c in d.items()}
    return d


def _divides(a, b):
    return all(x <= y for x, y in zip(a, b))


def _lcm_mono(a, b):
    return tuple(max(x, y) for x, y in zip(a, b))


def _top_reduce(f, basis, key, budget):
    """Reduce until the leading monomial is irreducible (fraction-free)."""
    f = dict(f)
    heap = [(key(m), m) for m in f]
    heapq.heapify(heap)
    while heap:
        _, m = heapq.heappop(heap)
        c = f.get(m)
        if c is None:
            continue
        g = next((g for g in basis if _divides(g.lm, m)), None)
        if g is None:
            return f
        budget.tick()
        _reduce_step(f, heap, m, c, g, key)
    return f


def _full_reduce(f, basis, key, budget):
    """Reduce every term; returns the (unnormalised) remainder dict."""
    f = dict(f)
    rem = {}
    heap = [(key(m), m) for m in f]
    heapq.heapify(heap)
    steps = 0
    while heap:
        _, m = heapq.heappop(heap)
        c = f.get(m)
        if c is None:
            continue
        g = next((g for g in basis if _divides(g.lm, m)), None)
        if g is None:
            rem[m] = c
            del f[m]
            continue
        budget.tick()
        a = _reduce_step(f, heap, m, c, g, key)
        if a != 1:
            for k in rem:
                rem[k] *= a
        steps += 1
        if steps % 8 == 0:
            _strip_content(f, rem)
    return rem


def _strip_content(*dicts):
    """Divide all the dicts by the gcd of their coefficients (fraction-free swell)."""
    g = 0
    for d in dicts:
        for c in d.values():
            g = gcd(g, c)
            if g == 1:
                return
    if g > 1:
        for d in dicts:
            for k in d:
                d[k] //= g


def _reduce_step(f, heap, m, c, g, key):
    lc = g.lc
    d = gcd(c, lc)
    a, b = lc // d, c // d
    if a < 0:
        a, b = -a, -b
    if a != 1:
        for k in f:
            f[k] *= a
    q = tuple(x - y for x, y in zip(m, g.lm))
    del f[m]
    lm = g.lm
    for e, gc in g.terms.items():
        if e == lm:
            continue
        t = tuple(x + y for x, y in zip(e, q))
        v = f.get(t)
        if v is None:
            f[t] = -b * gc
            heapq.heappush(heap, (key(t), t))
        else:
            v -= b * gc
            if v:
                f[t] = v
            else:
                del f[t]
    return a


def _spoly(f, g):
    l = _lcm_mono(f.lm, g.lm)
    qf = tuple(x - y for x, y in zip(l, f.lm))
    qg = tuple(x - y for x, y in zip(l, g.lm))
    d = gcd(f.lc, g.lc)
    af, ag = g.lc // d, f.lc // d
    out = {}
    for e, c in f.terms.items():
        if e == f.lm:
            continue
        out[tuple(x + y for x, y in zip(e, qf))] = af * c
    for e, c in g.terms.items():
        if e == g.lm:
            continue
        t = tuple(x + y for x, y in zip(e, qg))
        v = out.get(t, 0) - ag * c
        if v:
            out[t] = v
        else:
            out.pop(t, None)
    sugar = max(f.sugar + sum(qf), g.sugar + sum(qg))
    return out, sugar


def _buchberger(polys, order, budget, stop_on_unit=False):
    """Return a list of _IPoly forming a (non-reduced) Groebner basis."""
    key = order.descending_key()
    up = _ascending_key(order)
    if order.kind == "lex":
        # sugar degrees say little about lex; smallest lcm first
        select = lambda ij: (up(pairs[ij][2]), pairs[ij][0], ij)
    else:
        select = lambda ij: (pairs[ij][0], up(pairs[ij][2]), ij)
    all_polys = []
    active = []
    pairs = {}  # (i, j) -> (sugar, lcm key, lcm)

    def add(h):
        idx = len(all_polys)
        all_polys.append(h)
        hl = h.lm
        # Gebauer-Moeller update
        cand = []
        for j in active:
            g = all_polys[j]
            l = _lcm_mono(hl, g.lm)
            cand.append((j, l, all(not (x and y) for x, y in zip(hl, g.lm))))
        keep = []
        for pos, (j, l, coprime) in enumerate(cand):
            if coprime:
                keep.append((j, l, coprime))
                continue
            dominated = False
            for pos2, (j2, l2, cop2) in enumerate(cand):
                if pos2 == pos:
                    continue
                if _divides(l2, l) and (l2 != l or pos2 < pos):
                    dominated = True
                    break
            if not dominated:
                keep.append((j, l, coprime))
        for (a, b) in list(pairs):
            l = pairs[(a, b)][2]
            if _divides(hl, l):
                la = _lcm_mono(all_polys[a].lm, hl)
                lb = _lcm_mono(all_polys[b].lm, hl)
                if la != l and lb != l:
                    del pairs[(a, b)]
        for j, l, coprime in keep:
            if coprime:
                continue
            g = all_polys[j]
            sugar = max(h.sugar + sum(l) - sum(hl), g.sugar + sum(l) - sum(g.lm))
            pairs[(j, idx)] = (sugar, key(l), l)
        active[:] = [j for j in active if not _divides(hl, all_polys[j].lm)] + [idx]

    for p in polys:
        if not p:
            continue
        r = _top_reduce(p, [all_polys[j] for j in active], key, budget)
        if not r:
            continue
        h = _IPoly(_primitive(r), key)
        if stop_on_unit and not any(h.lm):
            return [h]
        add(h)
    while pairs:
        best = min(pairs, key=select)
        del pairs[best]
        f, g = all_polys[best[0]], all_polys[best[1]]
        s, sugar = _spoly(f, g)
        budget.tick()
        if not s:
            continue
        r = _full_reduce(s, [all_polys[j] for j in active], key, budget)
        if not r:
            continue
        h = _IPoly(_primitive(r), key, sugar)
        if stop_on_unit and not any(h.lm):
            return [h]
        add(h)
    return [all_polys[j] for j in active]


def _interreduce(basis, key, budget):
    basis = sorted(basis, key=lambda g: key(g.lm), reverse=True)
    out = []
    for i, g in enumerate(basis):
        others = basis[:i] + basis[i + 1:]
        r = _full_reduce(g.terms, others, key, budget)
        out.append(_IPoly(_primitive(r), key, g.sugar))
    return out


class GroebnerBasis:
    """Reduced Groebner basis with monic (Fraction) generators."""

    def __init__(self, ring, generators, order, reduced=True, steps=0):
        self.ring = ring
        self.generators = list(generators)
        self.order = order
        self.reduced = reduced
        self.steps = steps
        self._key = order.descending_key()
        self._lead = [min(g.terms, key=self._key) for g in self.generators]

    def __len__(self):
        return len(self.generators)

    def __iter__(self):
        return iter(self.generators)

    def is_unit(self):
        return any(not any(m) for m in self._lead)

    def leading_monomials(self):
        return list(self._lead)

    def normal_form(self, p):
        if p.ring != self.ring:
            raise ValueError("polynomial and basis live in different rings")
        key = self._key
        f = dict(p.terms)
        rem = {}
        heap = [(key(m), m) for m in f]
        heapq.heapify(heap)
        basis = list(zip(self._lead, self.generators))
        while heap:
            _, m = heapq.heappop(heap)
            c = f.get(m)
            if c is None:
                continue
            hit = next(((lm, g) for lm, g in basis if _divides(lm, m)), None)
            del f[m]
            if hit is None:
                rem[m] = c
                continue
            lm, g = hit
            q = tuple(x - y for x, y in zip(m, lm))
            factor = c / g.terms[lm]
            for e, gc in g.terms.items():
                if e == lm:
                    continue
                t = tuple(x + y for x, y in zip(e, q))
                v = f.get(t)
                if v is None:
                    f[t] = -factor * gc
                    heapq.heappush(heap, (key(t), t))
                else:
                    v -= factor * gc
                    if v:
                        f[t] = v
                    else:
                        del f[t]
        return Polynomial(self.ring, rem)

    def contains(self, p):
        return self.normal_form(p).is_zero

    def to_text(self):
        return [str(g) for g in self.generators]


def _to_fraction_poly(ring, ip):
    lc = ip.lc
    return Polynomial(ring, {e: Fraction(c, lc) for e, c in ip.terms.items()})


def groebner(gens, order=None, budget=None, reduced=True, stop_on_unit=False):
    """Reduced Groebner basis of the ideal generated by ``gens``."""
    gens = [g for g in gens]
    if not gens:
        raise ValueError("groebner needs at least one generator")
    ring = gens[0].ring
    for g in gens:
        if g.ring != ring:
            raise ValueError("all generators must share one ring")
    order = order or MonomialOrder("grevlex")
    budget = _as_budget(budget)
    key = order.descending_key()
    polys = [_integral_primitive(g) for g in gens if not g.is_zero]
    # smallest first tends to help
    polys.sort(key=lambda d: (len(d), key(min(d, key=key))))
    basis = _buchberger(polys, order, budget, stop_on_unit=stop_on_unit)
    if not basis:
        return GroebnerBasis(ring, [], order, True, budget.steps)
    if any(not any(g.lm) for g in basis):
        return GroebnerBasis(ring, [ring.one], order, True, budget.steps)
    # minimal basis
    basis.sort(key=lambda g: key(g.lm))
    minimal = []
    for i, g in enumerate(basis):
        if any(_divides(h.lm, g.lm) and (h.lm != g.lm or j < i)
               for j, h in enumerate(basis) if j != i):
            continue
        minimal.append(g)
    if reduced:
        minimal = _interreduce(minimal, key, budget)
    minimal.sort(key=lambda g: key(g.lm), reverse=True)
    return GroebnerBasis(ring, [_to_fraction_poly(ring, g) for g in minimal], order, reduced, budget.steps)


def normal_form(p, G):
    return G.normal_form(p)


def ideal_membership(p, gens, order=None, budget=None):
    return groebner(gens, order, budget).contains(p)


def radical_membership(p, gens, budget=None):
    """True iff p vanishes on the complex zero set of gens (Rabinowitsch)."""
    gens = list(gens)
    if not gens:
        raise ValueError("radical membership needs at least one generator")
    ring = gens[0].ring
    if p.is_zero:
        return True
    if any(g.is_constant and not g.is_zero for g in gens):
        return True
    t = ring.fresh_name("t_")
    big = ring.extend([t])
    lifted = [g.to_ring(big) for g in gens]
    lifted.append(big.one - big.gen(t) * p.to_ring(big))
    G = groebner(lifted, MonomialOrder("grevlex"), budget, reduced=False, stop_on_unit=True)
    return G.is_unit()


def radical_contains_all(ps, gens, budget=None):
    return all(radical_membership(p, gens, budget) for p in ps)


def eliminate(gens, keep, budget=None, order_kind="block"):
    """Generators of <gens> intersected with Q[keep]."""
    gens = list(gens)
    if not gens:
        raise ValueError("elimination needs at least one generator")
    ring = gens[0].ring
    keep = [n for n in ring.names if n in set(keep)]
    for n in keep:
        ring.index(n)
    drop = [n for n in ring.names if n not in set(keep)]
    if not drop:
        return [g for g in groebner(gens, budget=budget)]
    perm = Ring(drop + keep, [ring.kinds[ring.index(n)] for n in drop + keep])
    if order_kind == "lex":
        order = MonomialOrder("lex")
    else:
        order = MonomialOrder("block", len(drop))
    G = groebner([g.to_ring(perm) for g in gens], order, budget)
    nd = len(drop)
    out = []
    for g in G:
        if all(not any(e[:nd]) for e in g.terms):
            out.append(g.to_ring(ring).primitive())
    return out


def radical_equal(gens_a, gens_b, budget=None):
    """Two-way radical containment of two generator lists."""
    return (all(radical_membership(p, gens_b, budget) for p in gens_a)
            and all(radical_membership(p, gens_a, budget) for p in gens_b))
