"""Split a zero set into branches using cheap factorisation.

No primary decomposition is attempted. A branch is split whenever one of its
basis elements breaks into factors (monomial content, content in a variable,
square-free part); the union of branch zero sets always equals the input zero
set. With ``nonnegative=True`` every indeterminate is assumed >= 0, so a
generator whose coefficients all share one sign is replaced by its monomials.
"""

from .errors import BudgetExceeded
from .groebner import MonomialOrder, groebner, radical_membership
from .poly import Polynomial, split_factors


def _same_sign(p):
    signs = {c > 0 for c in p.terms.values()}
    return len(signs) == 1 and len(p.terms) > 1


def _monomials(p):
    return [Polynomial(p.ring, {e: 1}) for e in p.terms]


def split_components(gens, nonnegative=False, budget=None, max_branches=512):
    """List of branches (each a reduced Groebner basis, as a list) covering V(gens)."""
    gens = [g for g in gens if not g.is_zero]
    if not gens:
        return [[]]
    work = [gens]
    done = []
    seen = set()
    order = MonomialOrder("grevlex")
    while work:
        current = work.pop()
        G = list(groebner(current, order, budget))
        if len(G) == 1 and G[0].is_constant:
            continue
        key = tuple(sorted(str(g) for g in G))
        if key in seen:
            continue
        seen.add(key)
        if nonnegative:
            target = next((g for g in G if _same_sign(g)), None)
            if target is not None:
                rest = [g for g in G if g is not target]
                work.append(rest + _monomials(target))
                continue
        split = None
        for g in G:
            factors = split_factors(g)
            if len(factors) > 1 or (factors and factors[0] != g.primitive()):
                split = (g, factors)
                break
        if split is None:
            done.append(G)
            if len(done) > max_branches:
                raise BudgetExceeded(f"more than {max_branches} branches while splitting the zero set")
            continue
        g, factors = split
        rest = [h for h in G if h is not g]
        for f in factors:
            work.append(rest + [f])
    return drop_subsumed(done, budget)


def contained_in(a, b, budget=None):
    """V(a) is a subset of V(b): every generator of b vanishes on V(a)."""
    if not a:
        return not b or all(g.is_zero for g in b)
    return all(radical_membership(g, a, budget) for g in b)


def drop_subsumed(branches, budget=None):
    """Remove branches whose zero set lies inside another branch's zero set."""
    branches = sorted(branches, key=lambda B: (len(B), [str(g) for g in B]))
    kept = []
    for i, B in enumerate(branches):
        redundant = False
        for j, C in enumerate(branches):
            if i == j:
                continue
            if contained_in(B, C, budget):
                # equal zero sets: keep the first one only
                if j < i or not contained_in(C, B, budget):
                    redundant = True
                    break
        if not redundant:
            kept.append(B)
    return sorted(kept, key=lambda B: [str(g) for g in B])


def branch_text(branch):
    return [f"{g} = 0" for g in branch]
