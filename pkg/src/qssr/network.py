"""Reaction networks, mass-action ODEs and linear conservation laws.

Model files are plain text with ``name:``, ``species:``, ``parameters:``,
``reactions:``, ``odes:`` and ``conserve:`` sections::

    species: s, e, c, p
    parameters: e0, s0
    reactions:
      e + s <-> c @ k1, km1
      c -> e + p @ k2
    conserve:
      e + c = e0
      p + s + c = s0

In a ``conserve`` line the first species on the left is the one eliminated.
"""

import re
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from math import gcd, lcm
from pathlib import Path

from .calculus import lie_derivative
from .errors import ConservationError, ExpressionSyntaxError, ModelSyntaxError, UnknownIndeterminateError
from .poly import Polynomial, Ring

NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*$")
SECTION_RE = re.compile(r"^(name|species|parameters|reactions|odes|conserve)\s*:(.*)$")


@dataclass(frozen=True)
class Reaction:
    reactants: tuple  # ((species, stoichiometry), ...)
    products: tuple
    forward: str
    backward: str = None

    def directions(self):
        yield dict(self.reactants), dict(self.products), self.forward
        if self.backward is not None:
            yield dict(self.products), dict(self.reactants), self.backward


@dataclass(frozen=True)
class ConservationLaw:
    weights: tuple  # ((species, int), ...)
    total: str

    def weight(self, species):
        return dict(self.weights).get(species, 0)


@dataclass(frozen=True)
class ReactionNetwork:
    species: tuple
    reactions: tuple
    parameters: tuple = ()
    defaults: tuple = ()

    @property
    def rate_symbols(self):
        out = []
        for r in self.reactions:
            out.append(r.forward)
            if r.backward is not None:
                out.append(r.backward)
        return out

    def ring(self, extra_parameters=()):
        params = list(self.parameters)
        for k in self.rate_symbols + list(extra_parameters):
            if k not in params:
                params.append(k)
        return Ring.build(states=self.species, parameters=params)

    def stoichiometric_matrix(self):
        """Rows are species, columns are reactions (reversible pairs counted once)."""
        rows = []
        for s in self.species:
            row = []
            for r in self.reactions:
                row.append(dict(r.products).get(s, 0) - dict(r.reactants).get(s, 0))
            rows.append(row)
        return rows


@dataclass(frozen=True)
class OdeSystem:
    """Polynomial vector field h over ``ring``, one component per state."""

    ring: Ring
    states: tuple
    rhs: tuple
    substitutions: tuple = ()  # ((eliminated species, Polynomial), ...)
    defaults: tuple = ()  # ((parameter, Fraction), ...)
    name: str = ""
    laws: tuple = ()
    orthant_invariance: str = "unchecked"

    def __post_init__(self):
        if len(self.states) != len(self.rhs):
            raise ValueError("one right-hand side per state is required")
        for s in self.states:
            if self.ring.kinds[self.ring.index(s)] != "state":
                raise ValueError(f"{s!r} is not a state of the ring")

    @property
    def parameters(self):
        return self.ring.parameters

    @property
    def dim(self):
        return len(self.states)

    def index(self, name):
        try:
            return self.states.index(name)
        except ValueError:
            raise UnknownIndeterminateError(f"{name!r} is not a state") from None

    def field_dict(self):
        return dict(zip(self.states, self.rhs))

    def default_point(self):
        return dict(self.defaults)

    def lie(self, theta):
        return lie_derivative(theta, self.rhs, self.states)

    def substitute(self, mapping):
        """Same states, parameters replaced (values stay in the ring)."""
        return OdeSystem(self.ring, self.states, tuple(h.subs(mapping) for h in self.rhs),
                         self.substitutions, self.defaults, self.name, self.laws)

    def to_text(self):
        return [f"{x}' = {h}" for x, h in zip(self.states, self.rhs)]


# -- parsing ------------------------------------------------------------------

def _split_names(text, lineno, col0):
    names = []
    for m in re.finditer(r"[^,\s]+", text):
        tok = m.group(0)
        if not NAME_RE.match(tok):
            raise ModelSyntaxError(f"invalid name {tok!r}", lineno, col0 + m.start() + 1)
        names.append(tok)
    return names


def _parse_parameters(text, lineno, col0):
    names, defaults = [], []
    for m in re.finditer(r"[^,]+", text):
        item = m.group(0).strip()
        if not item:
            continue
        col = col0 + m.start() + 1
        if "=" in item:
            name, value = (s.strip() for s in item.split("=", 1))
            try:
                defaults.append((name, Fraction(value)))
            except (ValueError, ZeroDivisionError):
                raise ModelSyntaxError(f"invalid default value {value!r}", lineno, col) from None
        else:
            name = item
        if not NAME_RE.match(name):
            raise ModelSyntaxError(f"invalid parameter name {name!r}", lineno, col)
        names.append(name)
    return names, defaults


def _parse_side(text, species, lineno, col0):
    text_s = text.strip()
    if text_s in ("", "0", "∅"):
        return ()
    out = {}
    pos = 0
    for part in text.split("+"):
        col = col0 + pos + 1
        pos += len(part) + 1
        m = re.fullmatch(r"\s*(\d+)?\s*\*?\s*([A-Za-z_][A-Za-z0-9_]*)\s*", part)
        if not m:
            raise ModelSyntaxError(f"cannot read complex term {part.strip()!r}", lineno, col)
        coef = int(m.group(1)) if m.group(1) else 1
        name = m.group(2)
        if name not in species:
            raise ModelSyntaxError(f"unknown species {name!r}", lineno, col + part.index(name))
        if coef <= 0:
            raise ModelSyntaxError("stoichiometric coefficients must be positive", lineno, col)
        out[name] = out.get(name, 0) + coef
    return tuple(sorted(out.items(), key=lambda t: species.index(t[0])))


def _parse_reaction(line, species, lineno):
    if "@" not in line:
        raise ModelSyntaxError("reaction needs '@ rate' (e.g. 'A -> B @ k1')", lineno, len(line) + 1)
    at = line.index("@")
    scheme, rates = line[:at], line[at + 1:]
    if "<->" in scheme:
        arrow, reversible = "<->", True
    elif "->" in scheme:
        arrow, reversible = "->", False
    else:
        raise ModelSyntaxError("reaction needs '->' or '<->'", lineno, 1)
    i = scheme.index(arrow)
    lhs = _parse_side(scheme[:i], species, lineno, 0)
    rhs = _parse_side(scheme[i + len(arrow):], species, lineno, i + len(arrow))
    names = _split_names(rates, lineno, at + 1)
    if len(names) != (2 if reversible else 1):
        want = "two rate symbols" if reversible else "one rate symbol"
        raise ModelSyntaxError(f"expected {want} after '@'", lineno, at + 2)
    return Reaction(lhs, rhs, names[0], names[1] if reversible else None)


def _sections(text):
    current = None
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        m = SECTION_RE.match(line.strip())
        if m:
            current = m.group(1)
            if current in out:
                raise ModelSyntaxError(f"section {current!r} appears twice", lineno, 1)
            out[current] = []
            rest = m.group(2)
            if rest.strip():
                col = raw.index(rest) if rest in raw else 0
                out[current].append((lineno, col, rest))
            continue
        if current is None:
            raise ModelSyntaxError("text outside of any section", lineno, 1)
        out[current].append((lineno, 0, line))
    return out


@dataclass
class Model:
    """A parsed model file: network (or raw ODEs) plus conservation data."""

    name: str
    species: list
    parameters: list
    defaults: dict
    network: ReactionNetwork = None
    odes_text: list = None
    conserve: list = field(default_factory=list)  # [(lineno, eliminated, {species: w}, total)]

    def ring(self):
        params = list(self.parameters)
        if self.network is not None:
            for k in self.network.rate_symbols:
                if k not in params:
                    params.append(k)
        for _, _, _, total in self.conserve:
            if total not in params:
                params.append(total)
        return Ring.build(states=self.species, parameters=params)

    def full_system(self):
        ring = self.ring()
        if self.network is not None:
            return mass_action_odes(self.network, ring=ring, defaults=self.defaults, name=self.name)
        rhs = []
        for lineno, state, expr in self.odes_text:
            try:
                rhs.append(ring.parse(expr))
            except (ExpressionSyntaxError, UnknownIndeterminateError) as exc:
                raise ModelSyntaxError(str(exc), lineno) from None
        return OdeSystem(ring, tuple(self.species), tuple(rhs), (),
                         tuple(sorted(self.defaults.items())), self.name)

    def laws(self):
        return [ConservationLaw(tuple(sorted(w.items(), key=lambda t: self.species.index(t[0]))), total)
                for _, _, w, total in self.conserve]

    def system(self):
        """The ODE system with every declared conservation law folded in."""
        full = self.full_system()
        if not self.conserve:
            return full
        return apply_conservation(full, self.laws(), [e for _, e, _, _ in self.conserve])


def parse_model(text, name=""):
    sections = _sections(text)
    has_r, has_o = "reactions" in sections, "odes" in sections
    if has_r == has_o:
        raise ModelSyntaxError("exactly one of 'reactions:' or 'odes:' is required")
    if "species" not in sections:
        raise ModelSyntaxError("missing 'species:' section")
    if "name" in sections and sections["name"]:
        name = sections["name"][0][2].strip()
    species = []
    for lineno, col, line in sections["species"]:
        species += _split_names(line, lineno, col)
    if len(set(species)) != len(species):
        raise ModelSyntaxError("duplicate species name")
    params, defaults = [], []
    for lineno, col, line in sections.get("parameters", []):
        p, d = _parse_parameters(line, lineno, col)
        params += p
        defaults += d
    if len(set(params)) != len(params):
        raise ModelSyntaxError("duplicate parameter name")
    clash = set(params) & set(species)
    if clash:
        raise ModelSyntaxError(f"names used both as species and parameter: {sorted(clash)}")
    model = Model(name, species, params, dict(defaults))
    if has_r:
        reactions = []
        seen = set()
        for lineno, col, line in sections["reactions"]:
            r = _parse_reaction(line, species, lineno)
            for k in (r.forward, r.backward):
                if k is None:
                    continue
                if k in seen:
                    raise ModelSyntaxError(f"duplicate rate symbol {k!r}", lineno, line.index(k) + 1)
                if k in species:
                    raise ModelSyntaxError(f"rate symbol {k!r} clashes with a species", lineno)
                seen.add(k)
            reactions.append(r)
        model.network = ReactionNetwork(tuple(species), tuple(reactions), tuple(params),
                                        tuple(sorted(defaults)))
    else:
        odes = {}
        for lineno, col, line in sections["odes"]:
            m = re.fullmatch(r"\s*([A-Za-z_][A-Za-z0-9_]*)\s*'\s*=(.*)", line)
            if not m:
                raise ModelSyntaxError("expected \"x' = <polynomial>\"", lineno, 1)
            x = m.group(1)
            if x not in species:
                raise ModelSyntaxError(f"unknown species {x!r}", lineno, line.index(x) + 1)
            if x in odes:
                raise ModelSyntaxError(f"second equation for {x!r}", lineno, 1)
            odes[x] = (lineno, x, m.group(2))
        missing = [s for s in species if s not in odes]
        if missing:
            raise ModelSyntaxError(f"no equation for species {missing}")
        model.odes_text = [odes[s] for s in species]
    for lineno, col, line in sections.get("conserve", []):
        if "=" not in line:
            raise ModelSyntaxError("conservation law must read '<weighted species> = <total>'", lineno, 1)
        lhs, total = (s.strip() for s in line.split("=", 1))
        if not NAME_RE.match(total):
            raise ModelSyntaxError(f"invalid total symbol {total!r}", lineno, line.index("=") + 2)
        if total in species:
            raise ModelSyntaxError("the total must be a parameter, not a species", lineno)
        weights = _parse_linear(lhs, species, lineno)
        first = re.search(r"[A-Za-z_][A-Za-z0-9_]*", lhs).group(0)
        model.conserve.append((lineno, first, weights, total))
    return model


def _parse_linear(text, species, lineno):
    ring = Ring(species, ["state"] * len(species))
    try:
        p = ring.parse(text)
    except (ExpressionSyntaxError, UnknownIndeterminateError) as exc:
        raise ModelSyntaxError(str(exc), lineno) from None
    weights = {}
    for e, c in p.terms.items():
        if sum(e) != 1 or c.denominator != 1:
            raise ModelSyntaxError("conservation weights must be integers on single species", lineno)
        weights[species[e.index(1)]] = int(c)
    return weights


def parse_network(text):
    """Parse bare reaction lines (or a full model file) into a ReactionNetwork."""
    if SECTION_RE.search(text.strip().splitlines()[0].strip() if text.strip() else ""):
        model = parse_model(text)
        if model.network is None:
            raise ModelSyntaxError("model has no reactions section")
        return model.network
    lines = [(i, raw.split("#", 1)[0].strip()) for i, raw in enumerate(text.splitlines(), 1)]
    lines = [(i, l) for i, l in lines if l]
    species = []
    for lineno, line in lines:
        scheme = line.split("@", 1)[0]
        for part in re.split(r"<->|->|\+", scheme):
            m = re.fullmatch(r"\s*(\d+)?\s*\*?\s*([A-Za-z_][A-Za-z0-9_]*)\s*", part)
            if m and m.group(2) not in species:
                species.append(m.group(2))
    body = "species: " + ", ".join(species) + "\nreactions:\n" + "\n".join(l for _, l in lines)
    # line numbers shift by two; re-raise with the caller's numbering
    try:
        return parse_model(body).network
    except ModelSyntaxError as exc:
        if exc.line is not None and exc.line > 2:
            msg = str(exc).split(": ", 1)[-1]
            raise ModelSyntaxError(msg, lines[exc.line - 3][0], exc.column) from None
        raise


def models_dir():
    return resources.files("qssr") / "models"


def available_models():
    return sorted(p.name[:-4] for p in models_dir().iterdir() if p.name.endswith(".rxn"))


def load_model(path_or_name):
    """Read a model file by path, or one of the bundled models by name."""
    p = Path(path_or_name)
    if p.exists():
        return parse_model(p.read_text(encoding="utf-8"), name=p.stem)
    stem = p.name[:-4] if p.name.endswith(".rxn") else p.name
    bundled = models_dir() / f"{stem}.rxn"
    if bundled.is_file():
        return parse_model(bundled.read_text(encoding="utf-8"), name=stem)
    raise FileNotFoundError(f"no model file {path_or_name!r}")


# -- mass action --------------------------------------------------------------

def mass_action_odes(net, ring=None, defaults=None, name=""):
    """x_i' = sum over reaction directions of (net change of i) * rate * monomial."""
    ring = ring or net.ring()
    n = len(ring)
    rhs = {s: {} for s in net.species}
    for r in net.reactions:
        for reac, prod, k in r.directions():
            e = [0] * n
            for s, a in reac.items():
                e[ring.index(s)] += a
            e[ring.index(k)] += 1
            e = tuple(e)
            for s in net.species:
                change = prod.get(s, 0) - reac.get(s, 0)
                if change:
                    rhs[s][e] = rhs[s].get(e, 0) + Fraction(change)
    polys = tuple(Polynomial(ring, rhs[s]) for s in net.species)
    d = tuple(sorted((defaults or dict(net.defaults)).items()))
    return OdeSystem(ring, tuple(net.species), polys, (), d, name)


def _nullspace(rows, ncols):
    """Exact rational basis of {w : rows . w = 0}."""
    a = [[Fraction(x) for x in r] for r in rows]
    pivots = []
    r = 0
    for c in range(ncols):
        p = next((i for i in range(r, len(a)) if a[i][c] != 0), None)
        if p is None:
            continue
        a[r], a[p] = a[p], a[r]
        piv = a[r][c]
        a[r] = [x / piv for x in a[r]]
        for i in range(len(a)):
            if i != r and a[i][c] != 0:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
        if r == len(a):
            break
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        w = [Fraction(0)] * ncols
        w[f] = Fraction(1)
        for i, c in enumerate(pivots):
            w[c] = -a[i][f]
        basis.append(w)
    return basis


def conservation_laws(net, totals=None):
    """Integer basis of the left null space of the stoichiometric matrix."""
    N = net.stoichiometric_matrix()
    ns = len(net.species)
    transposed = [[N[i][j] for i in range(ns)] for j in range(len(net.reactions))]
    laws = []
    for k, w in enumerate(_nullspace(transposed, ns)):
        den = 1
        for x in w:
            den = lcm(den, x.denominator)
        ints = [int(x * den) for x in w]
        g = 0
        for x in ints:
            g = gcd(g, x)
        ints = [x // g for x in ints]
        if next(x for x in ints if x) < 0:
            ints = [-x for x in ints]
        total = totals[k] if totals else f"T{k + 1}"
        laws.append(ConservationLaw(tuple((s, x) for s, x in zip(net.species, ints) if x), total))
    return laws


def apply_conservation(odes, laws, eliminate):
    """Solve each law for its eliminated species and substitute into the rest."""
    laws = list(laws)
    eliminate = list(eliminate)
    if len(laws) != len(eliminate):
        raise ConservationError("give exactly one eliminated species per conservation law")
    if len(set(eliminate)) != len(eliminate):
        raise ConservationError("a species can only be eliminated once")
    params = list(odes.ring.parameters)
    for law in laws:
        if law.total not in params:
            params.append(law.total)
    keep = [s for s in odes.states if s not in eliminate]
    big = Ring.build(states=odes.states, parameters=params)
    h = [p.to_ring(big) for p in odes.rhs]
    solved = {}
    for law, e in zip(laws, eliminate):
        if e not in odes.states:
            raise ConservationError(f"{e!r} is not a state")
        w = law.weight(e)
        if w not in (1, -1):
            raise ConservationError(f"{e!r} has weight {w} in the law for {law.total}; "
                                    "only weight +1 or -1 can be eliminated without division")
        lin = big.zero
        for s, ws in law.weights:
            lin = lin + ws * big.gen(s)
        if not lie_derivative(lin, h, odes.states).is_zero:
            raise ConservationError(f"{law.total} = {lin} is not a first integral of the system")
        solved[e] = (big.gen(law.total) - (lin - w * big.gen(e))) * w
    for _ in range(len(solved)):
        solved = {e: v.subs({k: u for k, u in solved.items() if k != e}) for e, v in solved.items()}
    for e, v in solved.items():
        if v.involves(eliminate):
            raise ConservationError("conservation laws do not determine the eliminated species")
    small = Ring.build(states=keep, parameters=params)
    rhs = tuple(h[odes.index(s)].subs(solved).to_ring(small) for s in keep)
    subs = tuple((e, solved[e].to_ring(small)) for e in eliminate)
    return OdeSystem(small, tuple(keep), rhs, odes.substitutions + subs, odes.defaults, odes.name,
                     tuple(laws))
