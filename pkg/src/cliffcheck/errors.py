"""Exception hierarchy shared across the package."""


class CliffcheckError(Exception):
    """Base class for all errors raised by cliffcheck."""


class AlgebraError(CliffcheckError):
    pass


class DegenerateMetricError(AlgebraError):
    """Point metric is numerically singular."""


class SignatureError(AlgebraError):
    """Point metric does not have Lorentzian signature (1,3)."""


class ExprError(CliffcheckError):
    pass


class ParseError(ExprError):
    """Syntax error in an expression string; ``column`` is 1-based."""

    def __init__(self, message: str, column: int):
        super().__init__(f"{message} (column {column})")
        self.column = column


class DomainEvalError(ExprError):
    """Expression evaluated outside its mathematical domain."""

    def __init__(self, message: str, subexpr: str):
        super().__init__(f"{message} in '{subexpr}'")
        self.subexpr = subexpr


class UnboundIdentifierError(ExprError):
    """Identifier resolves to neither a coordinate nor a declared parameter."""


class GeometryError(CliffcheckError):
    pass


class SingularMetricError(GeometryError):
    """Metric could not be evaluated or inverted at the requested point."""


class FieldError(CliffcheckError):
    """Multivector field violates a declared grade or shape constraint."""


class ScenarioValidationError(CliffcheckError):
    """Scenario file failed validation; ``problems`` lists every issue found."""

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("scenario validation failed:\n" + "\n".join(f"  - {p}" for p in self.problems))
