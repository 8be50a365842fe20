"""Exception hierarchy shared by all qssr modules."""


class QssrError(Exception):
    """Base class. ``code`` is a module-qualified identifier used in reports."""

    code = "qssr.error"


class UnknownIndeterminateError(QssrError, KeyError):
    code = "core.unknown-indeterminate"

    def __str__(self):
        return Exception.__str__(self)


class ExpressionSyntaxError(QssrError, ValueError):
    code = "core.syntax"


class ZeroDenominatorError(QssrError, ZeroDivisionError):
    code = "core.zero-denominator"


class SingularMatrixError(QssrError, ArithmeticError):
    code = "core.singular-matrix"


class BudgetExceeded(QssrError):
    """A Groebner computation ran past its step or wall-clock cap.

    Callers treat this as the outcome "infeasible within budget", not as a bug.
    """

    code = "ideal.infeasible"

    def __init__(self, message, steps=None, seconds=None):
        super().__init__(message)
        self.steps = steps
        self.seconds = seconds


class ModelSyntaxError(QssrError, ValueError):
    code = "network.syntax"

    def __init__(self, message, line=None, column=None):
        loc = ""
        if line is not None:
            loc = f"line {line}" + (f", column {column}" if column is not None else "") + ": "
        super().__init__(loc + message)
        self.line = line
        self.column = column


class ConservationError(QssrError, ValueError):
    code = "network.conservation"


class ReductionError(QssrError):
    code = "qss.reduction"


class NotAffineLinearError(ReductionError):
    """Raised when the QSS equations cannot be solved by linear algebra alone."""

    code = "qss.not-explicitly-solvable"


class RankConditionError(ReductionError):
    """The Jacobian of the QSS equations in the QSS variables is singular."""

    code = "qss.rank-condition"


class RankWitnessNotFound(ReductionError):
    code = "qss.rank-witness-not-found"


class TfReductionError(QssrError):
    code = "tf.reduction"


class SplittingError(TfReductionError):
    """Kernel and image of the Jacobian are not complementary."""

    code = "tf.splitting"


class IntegrationError(QssrError):
    code = "numeric.integration"


class ProjectionError(QssrError):
    code = "numeric.projection"
