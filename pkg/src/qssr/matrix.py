"""Matrices over the fraction field, with fraction-free elimination."""

from fractions import Fraction
from itertools import combinations

from .errors import SingularMatrixError, ZeroDenominatorError
from .poly import Polynomial
from .rational import RationalFunction


class PolyMatrix:
    """Rectangular matrix of RationalFunction entries over one ring."""

    __slots__ = ("ring", "rows", "cols", "entries")

    def __init__(self, entries, ring=None):
        entries = [list(r) for r in entries]
        if ring is None:
            for row in entries:
                for e in row:
                    if isinstance(e, (Polynomial, RationalFunction)):
                        ring = e.ring
                        break
                if ring is not None:
                    break
        if ring is None:
            raise ValueError("cannot infer the ring of a matrix without polynomial entries")
        if entries and len({len(r) for r in entries}) != 1:
            raise ValueError("matrix rows have different lengths")
        self.ring = ring
        self.rows = len(entries)
        self.cols = len(entries[0]) if entries else 0
        self.entries = tuple(tuple(RationalFunction.lift(e, ring) for e in row) for row in entries)

    @classmethod
    def identity(cls, ring, n):
        return cls([[ring.one if i == j else ring.zero for j in range(n)] for i in range(n)], ring)

    @classmethod
    def zeros(cls, ring, rows, cols):
        return cls([[ring.zero] * cols for _ in range(rows)], ring)

    @classmethod
    def column(cls, values, ring=None):
        return cls([[v] for v in values], ring)

    @property
    def shape(self):
        return (self.rows, self.cols)

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    def row(self, i):
        return list(self.entries[i])

    def col(self, j):
        return [r[j] for r in self.entries]

    def transpose(self):
        return PolyMatrix([list(c) for c in zip(*self.entries)], self.ring)

    def submatrix(self, rows, cols):
        return PolyMatrix([[self.entries[i][j] for j in cols] for i in rows], self.ring)

    def __add__(self, other):
        self._check_shape(other)
        return PolyMatrix([[a + b for a, b in zip(r, s)] for r, s in zip(self.entries, other.entries)], self.ring)

    def __sub__(self, other):
        self._check_shape(other)
        return PolyMatrix([[a - b for a, b in zip(r, s)] for r, s in zip(self.entries, other.entries)], self.ring)

    def __neg__(self):
        return PolyMatrix([[-a for a in r] for r in self.entries], self.ring)

    def _check_shape(self, other):
        if self.shape != other.shape:
            raise ValueError(f"shape mismatch {self.shape} vs {other.shape}")

    def __matmul__(self, other):
        if self.cols != other.rows:
            raise ValueError(f"cannot multiply {self.shape} by {other.shape}")
        out = []
        for i in range(self.rows):
            row = []
            for j in range(other.cols):
                acc = RationalFunction(self.ring.zero)
                for k in range(self.cols):
                    a, b = self.entries[i][k], other.entries[k][j]
                    if not a.is_zero and not b.is_zero:
                        acc = acc + a * b
                row.append(acc)
            out.append(row)
        return PolyMatrix(out, self.ring)

    def scale(self, value):
        return PolyMatrix([[a * value for a in r] for r in self.entries], self.ring)

    def apply(self, vector):
        """Matrix times a list of entries, as a list."""
        return [v[0] for v in (self @ PolyMatrix.column(vector, self.ring)).entries]

    def map(self, fn):
        return PolyMatrix([[fn(a) for a in r] for r in self.entries], self.ring)

    def is_zero(self):
        return all(a.is_zero for r in self.entries for a in r)

    def __eq__(self, other):
        return isinstance(other, PolyMatrix) and self.shape == other.shape and all(
            a == b for r, s in zip(self.entries, other.entries) for a, b in zip(r, s))

    __hash__ = None

    def is_polynomial(self):
        return all(a.is_polynomial for r in self.entries for a in r)

    def polynomial_entries(self):
        return [[a.as_polynomial() for a in r] for r in self.entries]

    def evaluate(self, point):
        return [[a.evaluate(point) for a in r] for r in self.entries]

    def subs(self, mapping):
        return PolyMatrix([[a.subs(mapping) for a in r] for r in self.entries], self.ring)

    def __str__(self):
        return "[" + ", ".join("[" + ", ".join(str(a) for a in r) + "]" for r in self.entries) + "]"

    def __repr__(self):
        return f"PolyMatrix({self})"


def jacobian(F, names):
    """Matrix of partial derivatives of the entries of F in the given indeterminates."""
    names = list(names)
    if not names:
        raise ValueError("jacobian needs at least one variable")
    F = list(F)
    if not F:
        raise ValueError("jacobian needs at least one function")
    ring = F[0].ring
    return PolyMatrix([[f.diff(v) for v in names] for f in F], ring)


def _clear_rows(M):
    """Multiply each row by its denominators' product: returns polynomial rows and row factors."""
    rows, factors = [], []
    for r in M.entries:
        d = M.ring.one
        for a in r:
            if not a.den.is_constant or a.den.constant_value() != 1:
                if not _divides(d, a.den):
                    d = d * a.den
        rows.append([(a.num * d).divexact(a.den) if not a.den.is_constant
                     else a.num * d * (1 / a.den.constant_value()) for a in r])
        factors.append(d)
    return rows, factors


def _divides(d, a):
    if a.is_constant:
        return True
    return d.divmod(a)[1].is_zero


def bareiss_det(rows):
    """Determinant of a square polynomial matrix (list of lists) by Bareiss elimination."""
    n = len(rows)
    if n == 0:
        return None
    ring = rows[0][0].ring
    a = [list(r) for r in rows]
    sign = 1
    prev = ring.one
    for k in range(n - 1):
        if a[k][k].is_zero:
            swap = next((i for i in range(k + 1, n) if not a[i][k].is_zero), None)
            if swap is None:
                return ring.zero
            a[k], a[swap] = a[swap], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                v = a[k][k] * a[i][j] - a[i][k] * a[k][j]
                a[i][j] = v if prev.is_constant and prev.constant_value() == 1 else v.divexact(prev)
            a[i][k] = ring.zero
        prev = a[k][k]
    d = a[n - 1][n - 1]
    return -d if sign < 0 else d


def det(M):
    """Determinant as a RationalFunction (polynomial when entries are)."""
    if M.rows != M.cols:
        raise ValueError("determinant of a non-square matrix")
    if M.rows == 0:
        return RationalFunction(M.ring.one)
    rows, factors = _clear_rows(M)
    d = bareiss_det(rows)
    denom = M.ring.one
    for f in factors:
        denom = denom * f
    return RationalFunction(d, denom)


def minors(M, k):
    """All k x k minors, rows-subset major then column-subset, both lexicographic."""
    if not 1 <= k <= min(M.rows, M.cols):
        raise ValueError(f"minor size {k} out of range for a {M.rows}x{M.cols} matrix")
    if not M.is_polynomial():
        raise ValueError("minors expects polynomial entries")
    P = M.polynomial_entries()
    out = []
    for rs in combinations(range(M.rows), k):
        for cs in combinations(range(M.cols), k):
            out.append(bareiss_det([[P[i][j] for j in cs] for i in rs]))
    return out


def _gauss_jordan_ff(rows, extra):
    """Fraction-free Gauss-Jordan on [rows | extra]; row i then reads a[i][i] * x_i = rest."""
    n = len(rows)
    ring = rows[0][0].ring
    a = [list(rows[i]) + list(extra[i]) for i in range(n)]
    width = len(a[0])
    prev = ring.one
    for k in range(n):
        if a[k][k].is_zero:
            swap = next((i for i in range(k + 1, n) if not a[i][k].is_zero), None)
            if swap is None:
                raise SingularMatrixError("matrix is singular over the fraction field")
            a[k], a[swap] = a[swap], a[k]
        piv = a[k][k]
        for i in range(n):
            if i == k:
                continue
            f = a[i][k]
            new = []
            for j in range(width):
                v = piv * a[i][j] - f * a[k][j]
                new.append(v.divexact(prev) if not prev.is_constant or prev.constant_value() != 1 else v)
            new[k] = ring.zero
            a[i] = new
        prev = piv
    return a


def solve_ff(M, b):
    """Solution of M x = b for a polynomial matrix M and polynomial vector b.

    Each component is formed as one polynomial quotient, which keeps the
    expression swell of summing rational functions out of the way."""
    if M.rows != M.cols or M.rows != len(b):
        raise ValueError("solve_ff needs a square matrix and a matching vector")
    if not M.is_polynomial():
        return matrix_inverse_ff(M).apply(b)
    n = M.rows
    try:
        a = _gauss_jordan_ff(M.polynomial_entries(), [[x] for x in b])
    except ArithmeticError as exc:
        if isinstance(exc, (SingularMatrixError, ZeroDenominatorError)):
            raise
        return matrix_inverse_ff(M).apply(b)
    return [RationalFunction(a[i][n], a[i][i]) for i in range(n)]


def matrix_inverse_ff(M):
    """Inverse over the fraction field via fraction-free Gauss-Jordan elimination.

    Raises SingularMatrixError if the determinant is the zero polynomial."""
    if M.rows != M.cols:
        raise ValueError("only square matrices can be inverted")
    n = M.rows
    ring = M.ring
    rows, factors = _clear_rows(M)
    eye = [[ring.one if i == j else ring.zero for j in range(n)] for i in range(n)]
    try:
        a = _gauss_jordan_ff(rows, eye)
        inv = [[RationalFunction(a[i][n + j], a[i][i]) for j in range(n)] for i in range(n)]
    except ArithmeticError as exc:
        if isinstance(exc, (SingularMatrixError, ZeroDenominatorError)):
            raise
        inv = _inverse_rf(M)
    # undo the row scaling: (D M)^-1 = M^-1 D^-1, so M^-1 = (D M)^-1 D
    inv = [[inv[i][j] * factors[j] for j in range(n)] for i in range(n)]
    return PolyMatrix(inv, ring)


def _inverse_rf(M):
    n = M.rows
    ring = M.ring
    one, zero = RationalFunction(ring.one), RationalFunction(ring.zero)
    rows, _ = _clear_rows(M)
    a = [[RationalFunction(x) for x in r] + [one if i == j else zero for j in range(n)]
         for i, r in enumerate(rows)]
    for k in range(n):
        p = next((i for i in range(k, n) if not a[i][k].is_zero), None)
        if p is None:
            raise SingularMatrixError("matrix is singular over the fraction field")
        a[k], a[p] = a[p], a[k]
        piv = a[k][k]
        a[k] = [x / piv for x in a[k]]
        for i in range(n):
            if i != k and not a[i][k].is_zero:
                f = a[i][k]
                a[i] = [x - f * y for x, y in zip(a[i], a[k])]
    return [r[n:] for r in a]


def generic_rank(M):
    """Rank over the fraction field of the ring."""
    rows, _ = _clear_rows(M)
    a = [list(r) for r in rows]
    ring = M.ring
    rank = 0
    prev = ring.one
    m, n = M.rows, M.cols
    for col in range(n):
        p = next((i for i in range(rank, m) if not a[i][col].is_zero), None)
        if p is None:
            continue
        a[rank], a[p] = a[p], a[rank]
        piv = a[rank][col]
        for i in range(rank + 1, m):
            f = a[i][col]
            row = []
            for j in range(n):
                v = piv * a[i][j] - f * a[rank][j]
                if not (prev.is_constant and prev.constant_value() == 1):
                    q, r = v.divmod(prev)
                    v = q if r.is_zero else v
                row.append(v)
            a[i] = row
        prev = piv
        rank += 1
        if rank == m:
            break
    return rank


def rational_rank(values):
    """Rank of a matrix of Fractions by exact Gaussian elimination."""
    a = [[Fraction(x) for x in r] for r in values]
    m = len(a)
    n = len(a[0]) if a else 0
    rank = 0
    for col in range(n):
        p = next((i for i in range(rank, m) if a[i][col] != 0), None)
        if p is None:
            continue
        a[rank], a[p] = a[p], a[rank]
        piv = a[rank][col]
        for i in range(rank + 1, m):
            f = a[i][col] / piv
            if f:
                a[i] = [x - f * y for x, y in zip(a[i], a[rank])]
        rank += 1
    return rank


def rank_at_point(M, point):
    """Rank after exact evaluation at a point."""
    return rational_rank(M.evaluate(point))


def solve_rational(A, b):
    """Solve A x = b over Q (square, nonsingular)."""
    n = len(A)
    a = [[Fraction(x) for x in r] + [Fraction(bi)] for r, bi in zip(A, b)]
    for k in range(n):
        p = next((i for i in range(k, n) if a[i][k] != 0), None)
        if p is None:
            raise SingularMatrixError("singular rational system")
        a[k], a[p] = a[p], a[k]
        piv = a[k][k]
        a[k] = [x / piv for x in a[k]]
        for i in range(n):
            if i != k and a[i][k] != 0:
                f = a[i][k]
                a[i] = [x - f * y for x, y in zip(a[i], a[k])]
    return [r[n] for r in a]
