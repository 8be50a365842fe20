"""Independent reference computations, done in sympy from plain strings."""

import sympy as sp


def sym(expr, names):
    """Parse canonical text (``^`` powers) into sympy over the given names."""
    env = {n: sp.Symbol(n) for n in names}
    return sp.sympify(str(expr).replace("^", "**"), locals=env)


def same(a, b, names):
    """a and b (text or qssr objects) agree as rational functions."""
    return sp.simplify(sym(a, names) - sym(b, names)) == 0


def sym_matrix(M, names):
    return sp.Matrix([[sym(e, names) for e in row] for row in M.entries])


def symbols(names):
    return sp.symbols(" ".join(names))
