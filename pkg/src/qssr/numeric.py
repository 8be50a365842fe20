"""Floating-point side: compiled vector fields, integration, projection onto the
QSS variety and trajectory comparisons. Norms are max norms throughout."""

import csv
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicHermiteSpline

from .errors import IntegrationError, ProjectionError, ReductionError
from .poly import Polynomial
from .rational import RationalFunction


def _exact(v):
    if isinstance(v, Fraction):
        return v
    if isinstance(v, float):
        return Fraction(repr(v))
    return Fraction(v)


class CompiledFields:
    """A list of rational functions in ``names`` evaluated on float vectors.

    All numerators and denominators share one table of monomials, so a call is
    one power-product plus two small matrix products."""

    def __init__(self, rfs, names):
        self.names = tuple(names)
        rfs = [RationalFunction.lift(f) if not isinstance(f, RationalFunction) else f for f in rfs]
        if rfs:
            ring = rfs[0].ring
            keep = [ring.index(x) for x in self.names]
            for f in rfs:
                extra = (set(f.num.variables()) | set(f.den.variables())) - set(self.names)
                if extra:
                    raise ValueError(f"unassigned indeterminates {sorted(extra)} in a numeric field")
        monos = {}
        rows_n, rows_d = [], []
        for f in rfs:
            for part, rows in ((f.num, rows_n), (f.den, rows_d)):
                row = {}
                for e, c in part.terms.items():
                    key = tuple(e[i] for i in keep)
                    j = monos.setdefault(key, len(monos))
                    row[j] = row.get(j, 0.0) + float(c)
                rows.append(row)
        self.exponents = np.array(list(monos), dtype=float).reshape(len(monos), len(self.names))
        self.num = np.zeros((len(rfs), len(monos)))
        self.den = np.zeros((len(rfs), len(monos)))
        for i, (rn, rd) in enumerate(zip(rows_n, rows_d)):
            for j, c in rn.items():
                self.num[i, j] = c
            for j, c in rd.items():
                self.den[i, j] = c

    def __len__(self):
        return self.num.shape[0]

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        m = np.prod(x[None, :] ** self.exponents, axis=1) if len(x) else np.ones(len(self.exponents))
        return (self.num @ m) / (self.den @ m)

    def numerators(self, x):
        x = np.asarray(x, dtype=float)
        m = np.prod(x[None, :] ** self.exponents, axis=1)
        return self.num @ m, self.den @ m


def _fix(rf, params):
    rf = RationalFunction.lift(rf) if not isinstance(rf, RationalFunction) else rf
    if not params:
        return rf
    ring = rf.ring
    vals = {k: _exact(v) for k, v in params.items() if k in ring.names}
    return RationalFunction(rf.num.subs(vals), rf.den.subs(vals))


class NumericSystem:
    """x' = scale * field(x) at fixed parameter values."""

    def __init__(self, states, fields, params=None, excluded=None, scale=1.0, name=""):
        self.states = tuple(states)
        self.params = dict(params or {})
        exact = [_fix(f, self.params) for f in fields]
        self.exact_fields = exact
        self.field = CompiledFields(exact, self.states)
        self.scale = float(scale)
        self.name = name
        if excluded is None or (isinstance(excluded, Polynomial) and excluded.is_constant):
            self.excluded = None
        else:
            self.excluded = CompiledFields([_fix(excluded, self.params)], self.states)
        self._jac = None

    @property
    def dim(self):
        return len(self.states)

    @classmethod
    def from_odes(cls, odes, params, scale=1.0):
        return cls(odes.states, odes.rhs, params, None, scale, odes.name)

    @classmethod
    def from_reduced(cls, reduced, params, scale=1.0):
        return cls(reduced.states, reduced.field, params, reduced.excluded_locus, scale, reduced.mode)

    def __call__(self, t, x):
        return self.scale * self.field(x)

    def rhs(self, x):
        return self.scale * self.field(x)

    def excluded_value(self, x):
        if self.excluded is None:
            return 1.0
        return float(self.excluded(x)[0])

    def jacobian(self, x):
        if self._jac is None:
            entries = [f.diff(s) for f in self.exact_fields for s in self.states]
            self._jac = CompiledFields(entries, self.states)
        return self.scale * self._jac(x).reshape(self.dim, self.dim)

    def vector(self, point):
        return np.array([float(point[s]) for s in self.states])


@dataclass
class Trajectory:
    states: tuple
    times: np.ndarray
    values: np.ndarray  # shape (len(times), dim)
    slopes: np.ndarray
    status: str = "ok"
    spline: object = field(default=None, repr=False)

    def __post_init__(self):
        if len(self.times) >= 2:
            self.spline = CubicHermiteSpline(self.times, self.values, self.slopes, axis=0)

    @property
    def t_end(self):
        return float(self.times[-1])

    def __call__(self, t):
        if self.spline is None:
            return np.broadcast_to(self.values[0], (np.size(t), self.values.shape[1])).copy()
        return self.spline(t)

    def component(self, name):
        return self.values[:, self.states.index(name)]

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", *self.states])
            for t, row in zip(self.times, self.values):
                w.writerow([repr(float(t)), *(repr(float(v)) for v in row)])


def integrate(system, x0, T, rtol=1e-8, atol=1e-10, max_step=np.inf):
    """Adaptive RK45 (Dormand-Prince) with dense output built from the accepted steps."""
    if not T > 0:
        raise ValueError("T must be positive")
    x0 = system.vector(x0) if isinstance(x0, dict) else np.asarray(x0, dtype=float)
    if not np.all(np.isfinite(x0)):
        raise ValueError("initial value is not finite")
    ex0 = system.excluded_value(x0)
    if ex0 == 0:
        raise IntegrationError("initial value lies on the excluded locus")
    events = None
    if system.excluded is not None:
        scale = abs(ex0)

        def guard(t, x):
            return system.excluded_value(x) / scale - 1e-6 * np.sign(ex0)

        guard.terminal = True
        events = [guard]
    sol = solve_ivp(system, (0.0, float(T)), x0, method="RK45", rtol=rtol, atol=atol,
                    events=events, max_step=max_step)
    if sol.status == -1 and events is not None and abs(system.excluded_value(sol.y[:, -1])) < 1e-4 * scale:
        # the step size collapsed next to the excluded locus before the event fired
        sol.status = 1
    if sol.status == -1:
        raise IntegrationError(f"integration failed at t = {sol.t[-1]:.6g}: {sol.message}")
    status = "ok" if sol.status == 0 else "excluded-locus"
    times = sol.t
    values = sol.y.T
    keep = np.concatenate([[True], np.diff(times) > 0])
    times, values = times[keep], values[keep]
    slopes = np.array([system.rhs(v) for v in values])
    return Trajectory(system.states, times, values, slopes, status)


# -- projection ---------------------------------------------------------------------

def newton_solve(h2, qss, x1, guess, tol=1e-12, max_iter=50):
    """Solve h2 = 0 for the ``qss`` variables with the others fixed at ``x1``.

    ``h2`` are polynomials whose only free indeterminates are states. Returns a
    dict for the qss variables, or None when Newton fails."""
    names = list(x1) + list(qss)
    fields = CompiledFields([RationalFunction(p) for p in h2], names)
    jac = CompiledFields([RationalFunction(p.diff(q)) for p in h2 for q in qss], names)
    y = np.array([float(guess[q]) for q in qss])
    fixed = np.array([float(x1[k]) for k in x1])
    m = len(qss)
    for _ in range(max_iter + 1):
        pt = np.concatenate([fixed, y])
        r = fields(pt)
        if not np.all(np.isfinite(r)):
            return None
        if np.max(np.abs(r), initial=0.0) < tol:
            return dict(zip(qss, y.tolist()))
        J = jac(pt).reshape(m, m)
        try:
            step = np.linalg.solve(J, r)
        except np.linalg.LinAlgError:
            return None
        y = y - step
    return None


def project_to_variety(odes, split, params, seed_point, tol=1e-12, max_iter=50):
    """Newton in the QSS variables only, retained variables fixed."""
    vals = {k: _exact(v) for k, v in params.items()}
    h2 = [h.subs({k: v for k, v in vals.items() if k in odes.ring.names})
          for x, h in zip(odes.states, odes.rhs) if x in split.qss]
    names = list(split.slow) + list(split.qss)
    fields = CompiledFields([RationalFunction(p) for p in h2], names)
    jac = CompiledFields([RationalFunction(p.diff(q)) for p in h2 for q in split.qss], names)
    fixed = np.array([float(seed_point[x]) for x in split.slow])
    y = np.array([float(seed_point.get(q, 0.0)) for q in split.qss])
    m = len(split.qss)
    for it in range(max_iter + 1):
        pt = np.concatenate([fixed, y])
        r = fields(pt)
        if np.max(np.abs(r)) < tol:
            out = dict(seed_point)
            out.update(zip(split.qss, (float(v) for v in y)))
            return out, it
        J = jac(pt).reshape(m, m)
        if not np.all(np.isfinite(J)) or np.linalg.cond(J) > 1e14:
            raise ProjectionError("Newton matrix D2 h2 is singular near the seed point")
        y = y - np.linalg.solve(J, r)
    raise ProjectionError(f"Newton did not converge in {max_iter} iterations "
                          f"(residual {np.max(np.abs(r)):.3g})")


# -- comparisons ----------------------------------------------------------------------

def comparison_grid(a, b, T, refine=4):
    knots = np.union1d(a.times[a.times <= T], b.times[b.times <= T])
    knots = np.union1d(knots, [0.0, T])
    sub = np.linspace(0.0, 1.0, refine + 1)[:-1]
    fine = (knots[:-1, None] + np.diff(knots)[:, None] * sub[None, :]).ravel()
    return np.append(fine, T)


def compare_trajectories(a, b, T, names=None):
    """sup over [0, T] of the max-norm difference on the shared (or given) states."""
    tol = 1e-12 * max(1.0, T)
    if a.t_end < T - tol or b.t_end < T - tol:
        raise IntegrationError("trajectories do not cover the comparison interval")
    names = names or [s for s in a.states if s in b.states]
    ia = [a.states.index(s) for s in names]
    ib = [b.states.index(s) for s in names]
    grid = comparison_grid(a, b, T)
    da = a(grid)[:, ia]
    db = b(grid)[:, ib]
    return float(np.max(np.abs(da - db)))


def sup_norm(traj, T, names=None):
    names = names or traj.states
    idx = [traj.states.index(s) for s in names]
    grid = comparison_grid(traj, traj, T)
    return float(np.max(np.abs(traj(grid)[:, idx])))


# -- convergence study -------------------------------------------------------------

@dataclass
class StudyRow:
    eps: float
    error: float
    relative_error: float


@dataclass
class StudyReport:
    rows: list
    slope: object  # float or None
    verdict: str
    reduction: str
    time_scale: str

    def as_dict(self):
        return {"eps": [r.eps for r in self.rows], "error": [r.error for r in self.rows],
                "relative_error": [r.relative_error for r in self.rows],
                "slope": self.slope, "verdict": self.verdict, "reduction": self.reduction,
                "time_scale": self.time_scale}


def _params_at(odes, pstar, rho, eps):
    out = {k: _exact(v) for k, v in odes.default_point().items()}
    out.update({k: _exact(v) for k, v in pstar.items()})
    e = _exact(eps)
    for k, v in (rho or {}).items():
        out[k] = out.get(k, Fraction(0)) + e * _exact(v)
    return out


def _reduced_for(odes, split, pstar, rho, reduction, P=None, mu=None):
    from .qss import implicit_reduce
    from .tf import auto_decomposition, subspace_gamma, tf_reduce_affine, tf_reduce_general

    if reduction == "qss":
        return implicit_reduce(odes, split)
    if reduction == "tf":
        if P is None:
            gamma = subspace_gamma(odes, split, pstar)
            if gamma is not None:
                return tf_reduce_affine(odes, split, pstar, rho, gamma)
            P, mu = auto_decomposition(odes, split, pstar)
        return tf_reduce_general(odes, pstar, rho, P, mu)
    raise ValueError(f"unknown reduction {reduction!r}")


def convergence_study(odes, split, pstar, rho, eps_list, x1_anchor, T, reduction="qss",
                      time_scale="slow", rtol=1e-10, atol=1e-12, P=None, mu=None):
    """Distance between full and reduced solutions as eps shrinks.

    Each run starts on the QSS variety at pstar + eps*rho above ``x1_anchor``.
    With ``time_scale="slow"`` both systems are followed for time T/eps, i.e.
    over [0, T] in tau = eps*t. The QSS reduction is the implicit one at the
    perturbed parameters; the ``tf`` reduction is the first-order slow field."""
    eps_list = [float(e) for e in eps_list]
    if any(e <= 0 for e in eps_list):
        raise ValueError("eps values must be positive")
    trivial = not any(_exact(v) != 0 for v in (rho or {}).values())
    reduced = _reduced_for(odes, split, pstar, rho, reduction, P, mu)
    rows = []
    for eps in eps_list:
        params = _params_at(odes, pstar, rho, eps)
        slow = time_scale == "slow" and not trivial
        s_full = 1.0 / eps if slow else 1.0
        full = NumericSystem.from_odes(odes, params, scale=s_full)
        if reduced.time_scale == "slow":
            red = NumericSystem.from_reduced(reduced, params, scale=1.0 if slow else eps)
        else:
            red = NumericSystem.from_reduced(reduced, params, scale=s_full)
        seed = dict(x1_anchor)
        start, _ = project_to_variety(odes, split, params, seed)
        try:
            a = integrate(full, start, T, rtol, atol)
            b = integrate(red, start, T, rtol, atol)
        except IntegrationError as exc:
            raise IntegrationError(f"eps = {eps}: {exc}") from None
        names = list(red.states)
        err = compare_trajectories(a, b, T, names)
        scale = sup_norm(a, T, names)
        rows.append(StudyRow(eps, err, err / scale if scale else math.inf))
    if trivial:
        return StudyReport(rows, None, "exact", reduction, time_scale)
    x = np.log([r.eps for r in rows])
    y = np.log([max(r.error, 1e-300) for r in rows])
    slope = float(np.polyfit(x, y, 1)[0]) if len(rows) >= 2 else None
    if slope is None:
        verdict = "undetermined"
    elif slope > 0.5:
        verdict = "converges"
    else:
        verdict = "does-not-converge"
    return StudyReport(rows, slope, verdict, reduction, time_scale)


# -- divergence lower bound -------------------------------------------------------------

@dataclass
class BoxEstimates:
    box: dict
    R: float
    L: float
    grid: int
    inflation: float


def box_estimates(systems, box, grid=9, inflation=1.1):
    """Sampled sup of field norms and Jacobian operator norms (max norm), inflated."""
    states = systems[0].states
    axes = [np.linspace(box[s][0], box[s][1], grid) for s in states]
    R = L = 0.0
    for pt in np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, len(states)):
        for sys_ in systems:
            v = sys_.rhs(pt)
            if not np.all(np.isfinite(v)):
                raise ReductionError("field is not finite on the box")
            R = max(R, float(np.max(np.abs(v))))
            J = sys_.jacobian(pt)
            L = max(L, float(np.max(np.sum(np.abs(J), axis=1))))
    return BoxEstimates(dict(box), inflation * R, inflation * L, grid, inflation)


@dataclass
class DivergenceReport:
    rho: float
    R: float
    L: float
    t_star: float
    bound: float
    measured: float
    holds: bool
    exact_match: bool
    estimates: BoxEstimates = None

    @property
    def margin(self):
        return self.measured / self.bound if self.bound else math.inf

    def as_dict(self):
        return {"rho": self.rho, "R": self.R, "L": self.L, "t_star": self.t_star,
                "bound": self.bound, "measured": self.measured, "holds": self.holds,
                "exact_match": self.exact_match,
                "margin": None if self.exact_match else self.margin,
                "sampled_bounds_are_estimates": True}


def divergence_bound_check(odes, reduced, params, y, box, grid=9, rtol=1e-12, atol=1e-14):
    """Full and reduced solutions from y separate by at least rho^2/(2LR) at
    t* = rho/(2LR), where 2 rho = |h(y) - h_red(y)|."""
    full = NumericSystem(reduced.states, [odes.field_dict()[s] for s in reduced.states], params)
    red = NumericSystem.from_reduced(reduced, params)
    yv = full.vector(y)
    gap = float(np.max(np.abs(full.rhs(yv) - red.rhs(yv))))
    est = box_estimates([full, red], box, grid)
    if gap <= 1e-14 * max(1.0, est.R):
        return DivergenceReport(0.0, est.R, est.L, 0.0, 0.0, 0.0, True, True, est)
    rho = gap / 2
    radius = rho / (2 * est.L)
    for s, v in zip(reduced.states, yv):
        lo, hi = box[s]
        if v - radius < lo or v + radius > hi:
            raise ValueError(f"the ball of radius {radius:.3g} around y leaves the box in {s}")
    t_star = rho / (2 * est.L * est.R)
    a = integrate(full, yv, t_star, rtol, atol)
    b = integrate(red, yv, t_star, rtol, atol)
    measured = float(np.max(np.abs(a.values[-1] - b.values[-1])))
    bound = rho * rho / (2 * est.L * est.R)
    return DivergenceReport(rho, est.R, est.L, t_star, bound, measured, measured >= bound, False, est)
