"""Quotients of polynomials over a shared ring."""

from fractions import Fraction

from .errors import ZeroDenominatorError
from .poly import Polynomial, gcd_is_trivial, poly_gcd

# gcd cancellation is only attempted below these sizes
GCD_DEGREE_LIMIT = 8
GCD_TERM_LIMIT = 300


class RationalFunction:
    """num/den with den nonzero. Equality is decided by cross-multiplication,
    so the amount of simplification applied never changes semantics."""

    __slots__ = ("num", "den")

    def __init__(self, num, den=None, simplify=True):
        if not isinstance(num, Polynomial):
            raise TypeError("numerator must be a Polynomial")
        if den is None:
            den = num.ring.one
        elif not isinstance(den, Polynomial):
            den = num.ring.const(den)
        if den.ring != num.ring:
            raise ValueError("numerator and denominator live in different rings")
        if den.is_zero:
            raise ZeroDenominatorError("zero denominator")
        if simplify:
            num, den = _normalise(num, den)
        self.num = num
        self.den = den

    @property
    def ring(self):
        return self.num.ring

    @classmethod
    def lift(cls, value, ring=None):
        if isinstance(value, RationalFunction):
            return value
        if isinstance(value, Polynomial):
            return cls(value, value.ring.one, simplify=False)
        if ring is None:
            raise TypeError("a ring is needed to lift a scalar")
        return cls(ring.const(value), ring.one, simplify=False)

    def _other(self, other):
        if isinstance(other, RationalFunction):
            return other
        if isinstance(other, (Polynomial, int, Fraction)):
            return RationalFunction.lift(other, self.ring)
        return NotImplemented

    def __add__(self, other):
        o = self._other(other)
        if o is NotImplemented:
            return o
        if self.den == o.den:
            return RationalFunction(self.num + o.num, self.den)
        return RationalFunction(self.num * o.den + o.num * self.den, self.den * o.den)

    __radd__ = __add__

    def __neg__(self):
        return RationalFunction(-self.num, self.den, simplify=False)

    def __sub__(self, other):
        o = self._other(other)
        if o is NotImplemented:
            return o
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._other(other)
        if o is NotImplemented:
            return o
        return RationalFunction(self.num * o.num, self.den * o.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._other(other)
        if o is NotImplemented:
            return o
        if o.num.is_zero:
            raise ZeroDenominatorError("division by zero rational function")
        return RationalFunction(self.num * o.den, self.den * o.num)

    def __rtruediv__(self, other):
        return RationalFunction.lift(other, self.ring) / self

    def __pow__(self, k):
        if k < 0:
            return RationalFunction(self.den, self.num) ** (-k)
        return RationalFunction(self.num ** k, self.den ** k)

    def __eq__(self, other):
        o = self._other(other)
        if o is NotImplemented:
            return o
        return (self.num * o.den - o.num * self.den).is_zero

    def __hash__(self):
        # only consistent with __eq__ for normalised representatives
        return hash((self.num, self.den))

    @property
    def is_zero(self):
        return self.num.is_zero

    @property
    def is_polynomial(self):
        return self.den.is_constant

    def as_polynomial(self):
        if not self.den.is_constant:
            raise ValueError(f"{self} is not a polynomial")
        return self.num * (1 / self.den.constant_value())

    def diff(self, name):
        return RationalFunction(self.num.diff(name) * self.den - self.num * self.den.diff(name),
                                self.den * self.den)

    def subs(self, mapping):
        """Substitute polynomials or rational functions for indeterminates."""
        poly_map = {}
        rat_map = {}
        for k, v in mapping.items():
            if isinstance(v, RationalFunction) and not v.den.is_constant:
                rat_map[k] = v
            elif isinstance(v, RationalFunction):
                poly_map[k] = v.as_polynomial()
            else:
                poly_map[k] = v
        num = self.num.subs(poly_map)
        den = self.den.subs(poly_map)
        if not rat_map:
            return RationalFunction(num, den)
        return substitute_rational(num, rat_map) / substitute_rational(den, rat_map)

    def evaluate(self, point):
        d = self.den.evaluate(point)
        if d == 0:
            raise ZeroDenominatorError(f"denominator {self.den} vanishes at the given point")
        return self.num.evaluate(point) / d

    def to_ring(self, ring):
        return RationalFunction(self.num.to_ring(ring), self.den.to_ring(ring), simplify=False)

    def __str__(self):
        if self.den.is_constant and self.den.constant_value() == 1:
            return str(self.num)
        return f"({self.num})/({self.den})"

    def __repr__(self):
        return f"RationalFunction({str(self)!r})"


def substitute_rational(p, mapping):
    """Substitute rational functions into a polynomial, returning a RationalFunction."""
    ring = p.ring
    names = list(mapping)
    coeffs = p.coefficients(names)
    out = RationalFunction(ring.zero)
    cache = {}
    for exps, c in coeffs.items():
        term = RationalFunction(c)
        for name, k in zip(names, exps):
            if k:
                key = (name, k)
                if key not in cache:
                    cache[key] = mapping[name] ** k
                term = term * cache[key]
        out = out + term
    return out


def _normalise(num, den):
    if num.is_zero:
        return num, num.ring.one
    # integer content: den becomes primitive with positive leading coefficient
    cd = den.content()
    if den.leading_coefficient() < 0:
        cd = -cd
    num = num * (1 / cd)
    den = den * (1 / cd)
    if den.is_constant:
        return num, den
    q = num.try_divexact(den)
    if q is not None:
        return q, num.ring.one
    small = (num.total_degree() <= GCD_DEGREE_LIMIT and den.total_degree() <= GCD_DEGREE_LIMIT
             and len(num.terms) + len(den.terms) <= GCD_TERM_LIMIT)
    if small and not gcd_is_trivial(num, den):
        g = poly_gcd(num, den)
        if not g.is_constant:
            num = num.divexact(g)
            den = den.divexact(g)
            cd = den.content()
            if den.leading_coefficient() < 0:
                cd = -cd
            num = num * (1 / cd)
            den = den * (1 / cd)
    return num, den
