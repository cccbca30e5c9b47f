"""Compile expressions to fast numeric callables for the integrator."""

from __future__ import annotations

import math
from typing import Callable, Dict, List, Sequence

from .symexpr import Expr, Func, Symbol, to_expr


def _poly_source(poly, names: Dict[Symbol, str]) -> str:
    if not poly:
        return "0.0"
    terms = []
    for coeff, mono in poly:
        pieces = [repr(float(coeff))]
        for atom, e in mono:
            if isinstance(atom, Symbol):
                base = names[atom]
            else:
                base = f"math.{'log' if atom.kind == 'ln' else atom.kind}({_expr_source(atom.arg, names)})"
            pieces.append(base if e == 1 else f"({base})**{e}")
        terms.append("*".join(pieces))
    return "(" + " + ".join(terms) + ")"


def _expr_source(e: Expr, names: Dict[Symbol, str]) -> str:
    num = _poly_source(e.num, names)
    if not e.den_nontrivial():
        return num
    return f"({num})/({_poly_source(e.den, names)})"


def compile_exprs(exprs: Sequence, symbols: Sequence[Symbol]) -> Callable:
    """Build f(values) -> tuple evaluating the expressions at float speed.

    ``values`` supplies one float per symbol, in the given order; every free
    symbol of every expression must be covered.
    """
    names = {s: f"x[{i}]" for i, s in enumerate(symbols)}
    exprs = [to_expr(e) for e in exprs]
    body = ", ".join(_expr_source(e, names) for e in exprs)
    source = f"def _compiled(x):\n    return ({body}{',' if len(exprs) == 1 else ''})"
    scope = {"math": math}
    exec(source, scope)
    return scope["_compiled"]
