"""Self-contained symbolic engine: expressions, parsing, calculus, solving."""

from .errors import (
    AffinityError,
    EvaluationDomainError,
    ExprSyntaxError,
    PivotAmbiguityError,
    SymexprError,
    UnknownSymbolError,
)
from .expr import (
    Expr,
    Func,
    ONE,
    Symbol,
    ZERO,
    const,
    contains_symbol,
    cos,
    diff,
    evaluate,
    exp,
    free_symbols,
    func,
    ln,
    primitive_part,
    sin,
    substitute,
    to_expr,
)
from .dsl import parse, to_text
from .zerotest import (
    DEFAULT_SEED,
    ZeroStatus,
    is_zero,
    random_rational,
    zero_status,
)
from .linsolve import (
    LinearSolveResult,
    coefficient_class,
    group_by_nonscalar,
    provably_nonzero,
    solve_linear,
)

__all__ = [
    "AffinityError",
    "DEFAULT_SEED",
    "EvaluationDomainError",
    "Expr",
    "ExprSyntaxError",
    "Func",
    "LinearSolveResult",
    "ONE",
    "PivotAmbiguityError",
    "Symbol",
    "SymexprError",
    "UnknownSymbolError",
    "ZERO",
    "ZeroStatus",
    "coefficient_class",
    "const",
    "contains_symbol",
    "cos",
    "diff",
    "evaluate",
    "exp",
    "free_symbols",
    "group_by_nonscalar",
    "func",
    "is_zero",
    "ln",
    "parse",
    "primitive_part",
    "provably_nonzero",
    "random_rational",
    "sin",
    "solve_linear",
    "substitute",
    "to_expr",
    "to_text",
    "zero_status",
]
