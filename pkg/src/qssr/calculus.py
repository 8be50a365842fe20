"""Derivatives, Lie derivatives and expansions in a small parameter."""

from dataclasses import dataclass
from fractions import Fraction

from .errors import UnknownIndeterminateError
from .poly import Polynomial
from .rational import RationalFunction


def differentiate(p, name):
    if name not in p.ring:
        raise UnknownIndeterminateError(f"unknown indeterminate {name!r}")
    return p.diff(name)


def lie_derivative(theta, h, states=None):
    """L_h(theta) = D theta . h, derivatives taken in the state variables only."""
    if states is None:
        states = theta.ring.states
    states = list(states)
    h = list(h)
    if len(h) != len(states):
        raise ValueError(f"vector field has {len(h)} components for {len(states)} states")
    if isinstance(theta, RationalFunction):
        out = RationalFunction(theta.ring.zero)
        for x, hx in zip(states, h):
            out = out + theta.diff(x) * hx
        return out
    out = theta.ring.zero
    for x, hx in zip(states, h):
        d = theta.diff(x)
        if not d.is_zero:
            out = out + d * hx
    return out


def evaluate(expr, point):
    """Exact value of a Polynomial or RationalFunction at a full assignment."""
    return expr.evaluate(point)


@dataclass(frozen=True)
class EpsilonSeries:
    """coeffs[k] is the vector multiplying eps**k. ``exact`` is False when
    terms above ``order`` were dropped."""

    order: int
    coeffs: tuple
    exact: bool
    eps: str = "eps"

    def reconstruct(self, ring):
        """Sum of eps**k * coeffs[k] over ``ring``, which must contain ``eps``."""
        e = ring.gen(self.eps)
        n = len(self.coeffs[0])
        out = [ring.zero] * n
        for k, vec in enumerate(self.coeffs):
            for i, c in enumerate(vec):
                out[i] = out[i] + e ** k * c.to_ring(ring)
        return out


def perturbed_substitution(ring, pstar, rho, eps_ring, eps):
    """Map each parameter p to pstar[p] + eps*rho[p] over ``eps_ring``."""
    e = eps_ring.gen(eps)
    mapping = {}
    for name, value in pstar.items():
        if ring.kinds[ring.index(name)] != "parameter":
            raise ValueError(f"{name!r} is not a parameter")
    for name in ring.parameters:
        base = pstar.get(name)
        if base is None:
            base = eps_ring.gen(name)
        elif isinstance(base, Polynomial):
            base = base.to_ring(eps_ring)
        else:
            base = eps_ring.const(Fraction(base))
        d = rho.get(name, 0)
        if isinstance(d, Polynomial):
            d = d.to_ring(eps_ring)
        if d != 0:
            base = base + e * d
        mapping[name] = base
    for name in rho:
        if ring.kinds[ring.index(name)] != "parameter":
            raise ValueError(f"{name!r} is not a parameter")
    return mapping


def epsilon_expand(h, pstar, rho=None, order=1, eps="eps"):
    """Substitute pi = pstar + eps*rho into h and collect powers of eps.

    Parameters missing from ``pstar`` stay symbolic; ``rho`` defaults to zero."""
    h = list(h)
    if order < 1:
        raise ValueError("order must be at least 1")
    ring = h[0].ring
    rho = rho or {}
    eps_name = ring.fresh_name(eps) if eps in ring else eps
    eps_ring = ring.extend([eps_name])
    mapping = perturbed_substitution(ring, pstar, rho, eps_ring, eps_name)
    coeffs = [[ring.zero] * len(h) for _ in range(order + 1)]
    exact = True
    for i, f in enumerate(h):
        g = f.to_ring(eps_ring).subs(mapping)
        for (k,), c in g.coefficients([eps_name]).items():
            if k <= order:
                coeffs[k][i] = c.to_ring(ring)
            else:
                exact = False
    return EpsilonSeries(order, tuple(tuple(v) for v in coeffs), exact, eps_name)
