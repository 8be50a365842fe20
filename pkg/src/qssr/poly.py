"""Sparse multivariate polynomials with exact rational coefficients.

Every polynomial lives over a :class:`Ring`, an ordered table of indeterminate
names tagged as ``state``, ``parameter`` or ``auxiliary``. Exponent vectors are
tuples aligned with that table, so the table order is fixed once polynomials
have been built over it.

Printing uses graded reverse lexicographic order over the table order; the
output is canonical and parses back to the same polynomial::

    >>> R = Ring(["s", "c", "k1"], ["state", "state", "parameter"])
    >>> p = R.parse("k1*(s - c)^2")
    >>> str(p)
    's^2*k1 - 2*s*c*k1 + c^2*k1'
"""

import ast
import heapq
import random
from fractions import Fraction
from math import gcd as igcd

from .errors import ExpressionSyntaxError, UnknownIndeterminateError, ZeroDenominatorError

KINDS = ("state", "parameter", "auxiliary")


def _as_fraction(value):
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value)
    raise TypeError(f"cannot use {type(value).__name__} as an exact coefficient")


def _integral(terms):
    """(exponent, int) pairs and a common denominator d with c = int / d."""
    d = 1
    for c in terms.values():
        den = c.denominator if isinstance(c, Fraction) else 1
        if den != 1:
            d = d * den // igcd(d, den)
    if d == 1:
        return [(e, int(c)) for e, c in terms.items()], 1
    return [(e, c.numerator * (d // c.denominator)) for e, c in terms.items()], d


class _LexHeap:
    """Max-heap of exponent tuples in lex order, with lazy deletion against a dict."""

    def __init__(self, keys):
        self.items = [tuple(-x for x in e) for e in keys]
        heapq.heapify(self.items)

    def push(self, e):
        heapq.heappush(self.items, tuple(-x for x in e))

    def pop_max(self, live):
        while True:
            e = tuple(-x for x in heapq.heappop(self.items))
            if e in live:
                return e


class Ring:
    """Ordered table of indeterminates shared by a family of polynomials."""

    __slots__ = ("names", "kinds", "_index", "_hash")

    def __init__(self, names, kinds=None):
        names = tuple(names)
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate indeterminate names in {names}")
        if kinds is None:
            kinds = ("auxiliary",) * len(names)
        kinds = tuple(kinds)
        if len(kinds) != len(names) or any(k not in KINDS for k in kinds):
            raise ValueError("kinds must give one of state/parameter/auxiliary per name")
        self.names = names
        self.kinds = kinds
        self._index = {n: i for i, n in enumerate(names)}
        self._hash = hash((names, kinds))

    @classmethod
    def build(cls, states=(), parameters=(), auxiliary=()):
        names = list(states) + list(parameters) + list(auxiliary)
        kinds = (["state"] * len(states) + ["parameter"] * len(parameters)
                 + ["auxiliary"] * len(auxiliary))
        return cls(names, kinds)

    def __len__(self):
        return len(self.names)

    def __eq__(self, other):
        return isinstance(other, Ring) and self.names == other.names and self.kinds == other.kinds

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"Ring({list(self.names)!r})"

    def __contains__(self, name):
        return name in self._index

    def index(self, name):
        try:
            return self._index[name]
        except KeyError:
            raise UnknownIndeterminateError(f"unknown indeterminate {name!r}") from None

    def names_of_kind(self, kind):
        return [n for n, k in zip(self.names, self.kinds) if k == kind]

    @property
    def states(self):
        return self.names_of_kind("state")

    @property
    def parameters(self):
        return self.names_of_kind("parameter")

    def fresh_name(self, base):
        name, i = base, 0
        while name in self._index:
            i += 1
            name = f"{base}{i}"
        return name

    def extend(self, names, kind="auxiliary"):
        names = list(names)
        return Ring(self.names + tuple(names), self.kinds + (kind,) * len(names))

    def const(self, value):
        value = _as_fraction(value)
        if value == 0:
            return Polynomial(self, {})
        return Polynomial(self, {(0,) * len(self.names): value})

    @property
    def zero(self):
        return Polynomial(self, {})

    @property
    def one(self):
        return self.const(1)

    def gen(self, name):
        i = self.index(name)
        exp = tuple(1 if j == i else 0 for j in range(len(self.names)))
        return Polynomial(self, {exp: Fraction(1)})

    def gens(self, *names):
        return [self.gen(n) for n in names]

    def parse(self, text):
        return parse_polynomial(text, self)


class Polynomial:
    """Immutable sparse polynomial: ``terms`` maps exponent tuples to Fractions."""

    __slots__ = ("ring", "terms")

    def __init__(self, ring, terms):
        self.ring = ring
        self.terms = {e: c for e, c in terms.items() if c != 0}

    @classmethod
    def _raw(cls, ring, terms):
        p = cls.__new__(cls)
        p.ring = ring
        p.terms = terms
        return p

    # -- coercion ---------------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, Polynomial):
            if other.ring is not self.ring and other.ring != self.ring:
                raise ValueError(f"ring mismatch: {self.ring!r} vs {other.ring!r}")
            return other
        if isinstance(other, (int, Fraction)):
            return self.ring.const(other)
        return NotImplemented

    # -- arithmetic -------------------------------------------------------
    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        terms = dict(self.terms)
        for e, c in other.terms.items():
            v = terms.get(e, 0) + c
            if v:
                terms[e] = v
            else:
                terms.pop(e, None)
        return Polynomial._raw(self.ring, terms)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial._raw(self.ring, {e: -c for e, c in self.terms.items()})

    def __pos__(self):
        return self

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other + (-self)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            if other == 0:
                return self.ring.zero
            return Polynomial._raw(self.ring, {e: c * other for e, c in self.terms.items()})
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if len(self.terms) < len(other.terms):
            a, b = self.terms, other.terms
        else:
            a, b = other.terms, self.terms
        # integer accumulation over a common denominator; Fraction ops are slow
        ia, da = _integral(a)
        ib, db = _integral(b)
        terms = {}
        get = terms.get
        for ea, ca in ia:
            for eb, cb in ib:
                e = tuple(x + y for x, y in zip(ea, eb))
                terms[e] = get(e, 0) + ca * cb
        d = da * db
        return Polynomial._raw(self.ring, {e: Fraction(c, d) for e, c in terms.items() if c})

    __rmul__ = __mul__

    def __pow__(self, k):
        if not isinstance(k, int) or k < 0:
            raise ValueError("polynomial powers must be nonnegative integers")
        result, base = self.ring.one, self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            if other == 0:
                raise ZeroDenominatorError("division by zero")
            return self * (Fraction(1) / other)
        from .rational import RationalFunction

        return RationalFunction(self, other)

    def __rtruediv__(self, other):
        from .rational import RationalFunction

        return RationalFunction(self.ring.const(other), self)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = self.ring.const(other)
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.ring == other.ring and self.terms == other.terms

    def __hash__(self):
        return hash((self.ring, frozenset(self.terms.items())))

    def __bool__(self):
        return bool(self.terms)

    # -- inspection -------------------------------------------------------
    @property
    def is_zero(self):
        return not self.terms

    @property
    def is_constant(self):
        return all(not any(e) for e in self.terms)

    def constant_value(self):
        if not self.is_constant:
            raise ValueError(f"{self} is not constant")
        return next(iter(self.terms.values()), Fraction(0))

    def total_degree(self):
        return max((sum(e) for e in self.terms), default=-1)

    def degree(self, name):
        i = self.ring.index(name)
        return max((e[i] for e in self.terms), default=-1)

    def variables(self):
        used = set()
        for e in self.terms:
            used.update(i for i, x in enumerate(e) if x)
        return [self.ring.names[i] for i in sorted(used)]

    def involves(self, names):
        idx = [self.ring.index(n) for n in names if n in self.ring]
        return any(e[i] for e in self.terms for i in idx)

    def sorted_terms(self):
        """Terms in descending graded reverse lexicographic order."""
        return sorted(self.terms.items(), key=lambda t: grevlex_key(t[0]), reverse=True)

    def leading_coefficient(self):
        if not self.terms:
            return Fraction(0)
        return max(self.terms.items(), key=lambda t: grevlex_key(t[0]))[1]

    # -- calculus and substitution ---------------------------------------
    def diff(self, name):
        i = self.ring.index(name)
        terms = {}
        for e, c in self.terms.items():
            k = e[i]
            if k:
                terms[e[:i] + (k - 1,) + e[i + 1:]] = c * k
        return Polynomial._raw(self.ring, terms)

    def subs(self, mapping):
        """Substitute polynomials (or scalars) for indeterminates, by name."""
        if not mapping:
            return self
        idx = {}
        for name, value in mapping.items():
            i = self.ring.index(name)
            if not isinstance(value, Polynomial):
                value = self.ring.const(value)
            elif value.ring != self.ring:
                raise ValueError("substituted values must live in the same ring")
            idx[i] = value
        powers = {i: [self.ring.one] for i in idx}

        def power(i, k):
            cache = powers[i]
            while len(cache) <= k:
                cache.append(cache[-1] * idx[i])
            return cache[k]

        groups = {}
        for e, c in self.terms.items():
            key = tuple(e[i] for i in sorted(idx))
            rest = tuple(0 if i in idx else x for i, x in enumerate(e))
            groups.setdefault(key, {})[rest] = c
        result = self.ring.zero
        order = sorted(idx)
        for key, rest_terms in groups.items():
            factor = Polynomial._raw(self.ring, rest_terms)
            for i, k in zip(order, key):
                if k:
                    factor = factor * power(i, k)
            result = result + factor
        return result

    def evaluate(self, point):
        """Exact value at a full assignment ``{name: rational}``."""
        values = []
        for name in self.ring.names:
            if name in point:
                values.append(_as_fraction(point[name]))
            else:
                values.append(None)
        total = Fraction(0)
        for e, c in self.terms.items():
            term = c
            for i, k in enumerate(e):
                if k:
                    if values[i] is None:
                        raise UnknownIndeterminateError(
                            f"no value given for {self.ring.names[i]!r}")
                    term *= values[i] ** k
            total += term
        return total

    def to_ring(self, ring):
        """Re-express over another table containing every used indeterminate."""
        if ring == self.ring:
            return self
        mapping = []
        for i, name in enumerate(self.ring.names):
            mapping.append(ring.index(name) if name in ring else None)
        n = len(ring.names)
        terms = {}
        for e, c in self.terms.items():
            new = [0] * n
            for i, k in enumerate(e):
                if k:
                    j = mapping[i]
                    if j is None:
                        raise UnknownIndeterminateError(
                            f"{self.ring.names[i]!r} is not in the target ring")
                    new[j] = k
            terms[tuple(new)] = c
        return Polynomial._raw(ring, terms)

    def coefficients(self, names):
        """Collect by monomials in ``names``: ``{exponents: coefficient polynomial}``."""
        idx = [self.ring.index(n) for n in names]
        out = {}
        for e, c in self.terms.items():
            key = tuple(e[i] for i in idx)
            rest = list(e)
            for i in idx:
                rest[i] = 0
            out.setdefault(key, {})[tuple(rest)] = c
        return {k: Polynomial._raw(self.ring, t) for k, t in out.items()}

    def as_univariate(self, name):
        return {k[0]: v for k, v in self.coefficients([name]).items()}

    # -- integer content --------------------------------------------------
    def content(self):
        """Positive rational c with self/c integral and primitive."""
        if not self.terms:
            return Fraction(0)
        num = 0
        den = 1
        for c in self.terms.values():
            num = igcd(num, c.numerator)
            den = den * c.denominator // igcd(den, c.denominator)
        return Fraction(num, den)

    def primitive(self):
        """Integer-coefficient primitive part with positive leading coefficient."""
        if not self.terms:
            return self
        c = self.content()
        if self.leading_coefficient() < 0:
            c = -c
        return Polynomial._raw(self.ring, {e: v / c for e, v in self.terms.items()})

    def monic(self):
        lc = self.leading_coefficient()
        return self * (1 / lc) if lc else self

    # -- division ---------------------------------------------------------
    def divmod(self, other):
        """Multivariate division by one polynomial (lex order): ``(q, r)``."""
        if other.is_zero:
            raise ZeroDenominatorError("division by zero polynomial")
        lead_e, lead_c = max(other.terms.items(), key=lambda t: t[0])
        rem = dict(self.terms)
        heap = _LexHeap(rem)
        quot = {}
        out = {}
        while rem:
            e = heap.pop_max(rem)
            c = rem[e]
            if all(a >= b for a, b in zip(e, lead_e)):
                m = tuple(a - b for a, b in zip(e, lead_e))
                f = c / lead_c
                quot[m] = quot.get(m, 0) + f
                for oe, oc in other.terms.items():
                    t = tuple(a + b for a, b in zip(oe, m))
                    v = rem.get(t, 0) - f * oc
                    if v:
                        if t not in rem:
                            heap.push(t)
                        rem[t] = v
                    else:
                        rem.pop(t, None)
            else:
                out[e] = c
                del rem[e]
        return Polynomial(self.ring, quot), Polynomial(self.ring, out)

    def try_divexact(self, other):
        """Quotient if ``other`` divides ``self`` exactly, else None (stops early)."""
        if other.is_zero:
            raise ZeroDenominatorError("division by zero polynomial")
        lead_e, lead_c = max(other.terms.items(), key=lambda t: t[0])
        rem = dict(self.terms)
        heap = _LexHeap(rem)
        quot = {}
        while rem:
            e = heap.pop_max(rem)
            if not all(a >= b for a, b in zip(e, lead_e)):
                return None
            m = tuple(a - b for a, b in zip(e, lead_e))
            f = rem[e] / lead_c
            quot[m] = f
            for oe, oc in other.terms.items():
                t = tuple(a + b for a, b in zip(oe, m))
                v = rem.get(t, 0) - f * oc
                if v:
                    if t not in rem:
                        heap.push(t)
                    rem[t] = v
                else:
                    rem.pop(t, None)
        return Polynomial(self.ring, quot)

    def divexact(self, other):
        q, r = self.divmod(other)
        if not r.is_zero:
            raise ArithmeticError(f"{other} does not divide {self}")
        return q

    def divides(self, other):
        """True if self divides other exactly."""
        return self.divmod_check(other)

    def divmod_check(self, other):
        return other.divmod(self)[1].is_zero

    # -- text -------------------------------------------------------------
    def __str__(self):
        return format_polynomial(self)

    def __repr__(self):
        return f"Polynomial({str(self)!r})"


def grevlex_key(e):
    return (sum(e), tuple(-x for x in reversed(e)))


def _format_monomial(e, names):
    parts = []
    for name, k in zip(names, e):
        if k == 1:
            parts.append(name)
        elif k > 1:
            parts.append(f"{name}^{k}")
    return "*".join(parts)


def _format_coefficient(c):
    if c.denominator == 1:
        return str(c.numerator)
    return f"{c.numerator}/{c.denominator}"


def format_polynomial(p):
    if p.is_zero:
        return "0"
    out = []
    for i, (e, c) in enumerate(p.sorted_terms()):
        neg = c < 0
        a = -c if neg else c
        mono = _format_monomial(e, p.ring.names)
        if not mono:
            body = _format_coefficient(a)
        elif a == 1:
            body = mono
        else:
            body = f"{_format_coefficient(a)}*{mono}"
        if i == 0:
            out.append(("-" if neg else "") + body)
        else:
            out.append((" - " if neg else " + ") + body)
    return "".join(out)


def parse_polynomial(text, ring):
    """Parse ``+ - * / ^`` expressions over ``ring``; division only by constants."""
    src = text.strip().replace("^", "**")
    if not src:
        raise ExpressionSyntaxError("empty expression")
    try:
        tree = ast.parse(src, mode="eval")
    except SyntaxError as exc:
        raise ExpressionSyntaxError(f"cannot parse {text!r}: {exc.msg} at column {exc.offset}") from None
    return _eval_node(tree.body, ring, text)


def _eval_node(node, ring, text):
    if isinstance(node, ast.Constant):
        if isinstance(node.value, bool) or not isinstance(node.value, (int, float)):
            raise ExpressionSyntaxError(f"unsupported constant {node.value!r} in {text!r}")
        return ring.const(Fraction(str(node.value)))
    if isinstance(node, ast.Name):
        if node.id not in ring:
            raise UnknownIndeterminateError(f"unknown indeterminate {node.id!r} in {text!r}")
        return ring.gen(node.id)
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        v = _eval_node(node.operand, ring, text)
        return -v if isinstance(node.op, ast.USub) else v
    if isinstance(node, ast.BinOp):
        left = _eval_node(node.left, ring, text)
        if isinstance(node.op, ast.Pow):
            right = _eval_node(node.right, ring, text)
            if not right.is_constant or right.constant_value().denominator != 1 or right.constant_value() < 0:
                raise ExpressionSyntaxError(f"exponents must be nonnegative integers in {text!r}")
            return left ** int(right.constant_value())
        right = _eval_node(node.right, ring, text)
        if isinstance(node.op, ast.Add):
            return left + right
        if isinstance(node.op, ast.Sub):
            return left - right
        if isinstance(node.op, ast.Mult):
            return left * right
        if isinstance(node.op, ast.Div):
            if not right.is_constant or right.is_zero:
                raise ExpressionSyntaxError(f"division only by nonzero constants in {text!r}")
            return left * (1 / right.constant_value())
    raise ExpressionSyntaxError(f"unsupported syntax in {text!r}")


# -- gcd and content-based splitting -----------------------------------------

def _from_univariate(ring, name, coeffs):
    x = ring.gen(name)
    out = ring.zero
    for k, c in coeffs.items():
        out = out + c * x ** k
    return out


def _content_in(p, name):
    """gcd of the coefficients of ``p`` viewed as a polynomial in ``name``."""
    g = None
    for c in p.as_univariate(name).values():
        g = c.primitive() if g is None else _gcd_primitive(g, c.primitive())
        if g.is_constant:
            return p.ring.one
    return g if g is not None else p.ring.zero


def _prem(f, g, name):
    """Pseudo-remainder of ``f`` by ``g`` in the variable ``name``."""
    x = p_gen = f.ring.gen(name)
    dg = g.degree(name)
    lcg = g.as_univariate(name)[dg]
    r = f
    while not r.is_zero and r.degree(name) >= dg:
        dr = r.degree(name)
        lr = r.as_univariate(name)[dr]
        r = lcg * r - lr * x ** (dr - dg) * g
    del p_gen
    return r


def _gcd_primitive(a, b):
    """gcd of two integer-primitive polynomials (recursive primitive PRS)."""
    ring = a.ring
    if a.is_zero:
        return b.primitive()
    if b.is_zero:
        return a.primitive()
    if a.is_constant or b.is_constant or gcd_is_trivial(a, b):
        return ring.one
    va, vb = set(a.variables()), set(b.variables())
    name = next(n for n in ring.names if n in va or n in vb)
    if name not in va:
        return _gcd_primitive(a, _content_in(b, name))
    if name not in vb:
        return _gcd_primitive(_content_in(a, name), b)
    ca, cb = _content_in(a, name), _content_in(b, name)
    c = _gcd_primitive(ca, cb)
    f, g = a.divexact(ca), b.divexact(cb)
    if f.degree(name) < g.degree(name):
        f, g = g, f
    while True:
        r = _prem(f, g, name)
        if r.is_zero:
            break
        if r.degree(name) <= 0:
            return c
        f, g = g, r.divexact(_content_in(r, name)).primitive()
    g = g.divexact(_content_in(g, name)).primitive()
    return (c * g).primitive()


def _image(p, i, values):
    """``p`` as a univariate {degree: Fraction} in variable ``i``, others fixed."""
    out = {}
    for e, c in p.terms.items():
        t = c
        for j, k in enumerate(e):
            if k and j != i:
                t *= values[j] ** k
        out[e[i]] = out.get(e[i], 0) + t
    return {k: v for k, v in out.items() if v}


def _uni_gcd_degree(f, g):
    f = [f.get(k, Fraction(0)) for k in range(max(f) + 1)]
    g = [g.get(k, Fraction(0)) for k in range(max(g) + 1)]
    while any(g):
        while f and not f[-1]:
            f.pop()
        while g and not g[-1]:
            g.pop()
        if len(f) < len(g):
            f, g = g, f
        while len(f) >= len(g):
            q = f[-1] / g[-1]
            shift = len(f) - len(g)
            for k, c in enumerate(g):
                f[k + shift] -= q * c
            f.pop()
            while f and not f[-1]:
                f.pop()
            if not f:
                break
        f, g = g, f
    while f and not f[-1]:
        f.pop()
    return len(f) - 1


def gcd_is_trivial(a, b, tries=3):
    """Cheap sufficient test that gcd(a, b) is a constant.

    For each variable of ``b`` the others are fixed at integers keeping both
    leading coefficients nonzero; specialising can only enlarge a common factor,
    so univariate images with constant gcd prove the gcd does not involve that
    variable. False means "unknown"."""
    ring = a.ring
    rng = random.Random(7)
    for name in b.variables():
        i = ring.index(name)
        if name not in a.variables():
            continue
        for _ in range(tries):
            values = [Fraction(rng.randint(2, 97)) for _ in ring.names]
            fa, fb = _image(a, i, values), _image(b, i, values)
            if fa and fb and max(fa) == a.degree(name) and max(fb) == b.degree(name):
                break
        else:
            return False
        if _uni_gcd_degree(fa, fb) > 0:
            return False
    return True


def poly_gcd(a, b):
    """Greatest common divisor, normalised to be integer-primitive with positive lead."""
    if a.is_zero and b.is_zero:
        return a.ring.zero
    return _gcd_primitive(a.primitive(), b.primitive())


def split_factors(p):
    """Distinct nonconstant factors found by monomial content, content in each
    variable and square-free splitting. Not a full factorisation over Q: factors
    that are primitive and square-free in every variable are left whole."""
    if p.is_zero or p.is_constant:
        return []
    p = p.primitive()
    ring = p.ring
    found = []
    # monomial content
    mins = [min(e[i] for e in p.terms) for i in range(len(ring.names))]
    if any(mins):
        for i, k in enumerate(mins):
            if k:
                found.append(ring.gen(ring.names[i]))
        shift = tuple(mins)
        p = Polynomial._raw(ring, {tuple(a - b for a, b in zip(e, shift)): c
                                   for e, c in p.terms.items()})
        if p.is_constant:
            return _dedupe(found)
    for name in p.variables():
        c = _content_in(p, name)
        if not c.is_constant:
            return _dedupe(found + split_factors(c) + split_factors(p.divexact(c)))
    for name in p.variables():
        g = poly_gcd(p, p.diff(name))
        if not g.is_constant:
            return _dedupe(found + split_factors(g) + split_factors(p.divexact(g)))
    return _dedupe(found + [p.primitive()])


def _dedupe(factors):
    seen = {}
    for f in factors:
        f = f.primitive()
        seen[str(f)] = f
    return [seen[k] for k in sorted(seen)]
