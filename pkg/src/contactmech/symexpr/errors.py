"""Exception types raised by the symbolic engine."""


class SymexprError(Exception):
    """Base class for all symbolic-engine errors."""


class ExprSyntaxError(SymexprError):
    """Malformed expression text.

    Carries the character position and a description of what was expected,
    so callers can point at the offending spot in a model file.
    """

    def __init__(self, message: str, position: int, expected: str = ""):
        self.position = position
        self.expected = expected
        detail = f" (expected {expected})" if expected else ""
        super().__init__(f"{message} at position {position}{detail}")


class UnknownSymbolError(SymexprError):
    """An identifier in the input does not resolve in the symbol table."""

    def __init__(self, name: str, position: int = -1):
        self.name = name
        self.position = position
        where = f" at position {position}" if position >= 0 else ""
        super().__init__(f"unknown symbol '{name}'{where}")


class EvaluationDomainError(SymexprError):
    """Numeric evaluation hit ln of a nonpositive value or a zero denominator."""


class AffinityError(SymexprError):
    """An equation handed to the linear solver is not affine in the unknowns."""


class PivotAmbiguityError(SymexprError):
    """A pivot candidate is neither provably zero nor provably nonzero.

    Raised instead of silently case-splitting; the caller must decide how
    to restrict the problem.
    """
