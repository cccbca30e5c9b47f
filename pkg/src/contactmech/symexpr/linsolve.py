"""Gauss-Jordan elimination over the expression field with free parameters.

Equations must be affine in the unknowns.  Pivots are taken only from
entries that are provably nonzero: nonzero rational constants, single-term
products of atoms (never identically zero), or entries whose probabilistic
zero test reports nonzero.  Unknowns whose column has no admissible pivot
become fresh free-function symbols; rows that reduce to ``0 = r`` with a
nonvanishing ``r`` are returned as consistency residuals, the raw material
for constraint chains.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, List, Sequence

from .errors import AffinityError, EvaluationDomainError, PivotAmbiguityError
from .expr import (
    Expr,
    Symbol,
    ZERO,
    _P_ONE,
    _make,
    _normalize_term,
    diff,
    free_symbols,
    substitute,
    to_expr,
)
from .zerotest import DEFAULT_SEED, ZeroStatus, zero_status


def coefficient_class(e: Expr) -> int:
    """Pivot quality: 0 constants, 1 parameter terms, 2 any single term, 3 rest."""
    c = e.constant_value()
    if c is not None and c != 0:
        return 0
    if e.is_term():
        atoms = list(e.atoms())
        if all(isinstance(a, Symbol) and a.role == "parameter" for a in atoms):
            return 1
        return 2
    return 3


def provably_nonzero(e: Expr, seed: int = DEFAULT_SEED) -> bool:
    """Pivot admissibility: not identically zero, decided without branching."""
    return _provably_nonzero(to_expr(e), seed)


def group_by_nonscalar(e, is_scalar) -> dict:
    """Split an expression by the non-scalar part of each numerator term.

    ``is_scalar`` classifies atoms; the result maps each distinct non-scalar
    monomial (a tuple of atom/exponent pairs) to the sum of the scalar
    factors it carries.  The expression vanishes identically in the
    non-scalar symbols iff every group value vanishes.
    """
    groups: dict = {}
    for coeff, mono in to_expr(e).num:
        scalars = [(a, k) for a, k in mono if is_scalar(a)]
        key = tuple((a, k) for a, k in mono if not is_scalar(a))
        piece = _make(_normalize_term(coeff, scalars), _P_ONE)
        groups[key] = groups.get(key, ZERO) + piece
    return groups


def _provably_nonzero(e: Expr, seed: int) -> bool:
    cls = coefficient_class(e)
    if cls < 3:
        return not e.is_zero_canonical()
    try:
        return zero_status(e, seed=seed) is ZeroStatus.NONZERO
    except EvaluationDomainError as err:
        raise PivotAmbiguityError(
            f"cannot decide whether a pivot candidate vanishes: {e}"
        ) from err


@dataclass
class LinearSolveResult:
    """Solution of an affine system, possibly underdetermined or inconsistent."""

    particular: dict
    free_parameters: List[Symbol] = field(default_factory=list)
    consistency_residuals: List[Expr] = field(default_factory=list)

    @property
    def solvable(self) -> bool:
        return not self.consistency_residuals

    @property
    def unique(self) -> bool:
        return self.solvable and not self.free_parameters


def _fresh_free_symbols(count: int, taken: set, prefix: str) -> List[Symbol]:
    out = []
    k = 1
    while len(out) < count:
        name = f"{prefix}_{k}"
        k += 1
        if name in taken:
            continue
        taken.add(name)
        out.append(Symbol(name, "free-function"))
    return out


def solve_linear(
    equations: Sequence,
    unknowns: Sequence[Symbol],
    seed: int = DEFAULT_SEED,
    free_prefix: str = "f",
) -> LinearSolveResult:
    """Solve ``equations == 0`` for ``unknowns`` over the expression field."""
    unknowns = list(unknowns)
    eqs = [to_expr(e) for e in equations]
    unknown_set = set(unknowns)

    rows = []
    for eq in eqs:
        coeffs = [diff(eq, u) for u in unknowns]
        for c in coeffs:
            if free_symbols(c) & unknown_set:
                raise AffinityError(f"equation is not affine in the unknowns: {eq}")
        const = substitute(eq, {u: ZERO for u in unknowns})
        rows.append((coeffs, const))

    # Best-pivot-first Gauss-Jordan: at each step take the highest-quality
    # provably nonzero entry over all remaining rows and columns.  This keeps
    # denominators small and leaves the structurally undetermined coordinate
    # directions free; free-function naming still follows column order.
    n = len(unknowns)
    pivot_of_col: dict = {}
    used_rows = set()
    while True:
        best = None
        for ri, (coeffs, _) in enumerate(rows):
            if ri in used_rows:
                continue
            for col in range(n):
                if col in pivot_of_col:
                    continue
                entry = coeffs[col]
                if entry.is_zero_canonical():
                    continue
                cls = coefficient_class(entry)
                rank = (cls, col, ri)
                if best is None or rank < best:
                    if cls < 3 or _provably_nonzero(entry, seed):
                        best = rank
        if best is None:
            break
        _, col, ri = best
        pivot_of_col[col] = ri
        used_rows.add(ri)
        p_coeffs, p_const = rows[ri]
        pivot = p_coeffs[col]
        for rj in range(len(rows)):
            if rj == ri:
                continue
            c_coeffs, c_const = rows[rj]
            entry = c_coeffs[col]
            if entry.is_zero_canonical():
                continue
            factor = entry / pivot
            new_coeffs = [c - factor * p for c, p in zip(c_coeffs, p_coeffs)]
            rows[rj] = (new_coeffs, c_const - factor * p_const)

    taken = {u.name for u in unknowns}
    for eq in eqs:
        taken.update(s.name for s in free_symbols(eq))
    free_cols = [c for c in range(n) if c not in pivot_of_col]
    free_syms = _fresh_free_symbols(len(free_cols), taken, free_prefix)
    free_of_col = dict(zip(free_cols, free_syms))

    particular = {}
    for col, sym in free_of_col.items():
        particular[unknowns[col]] = to_expr(sym)
    for col, ri in pivot_of_col.items():
        coeffs, const = rows[ri]
        pivot = coeffs[col]
        value = -const
        for fc, sym in free_of_col.items():
            c = coeffs[fc]
            if not c.is_zero_canonical():
                value = value - c * sym
        particular[unknowns[col]] = value / pivot

    residuals = []
    for ri, (coeffs, const) in enumerate(rows):
        if ri in used_rows:
            continue
        if all(
            c.is_zero_canonical() or zero_status(c, seed=seed) is not ZeroStatus.NONZERO
            for c in coeffs
        ):
            if zero_status(const, seed=seed) is ZeroStatus.NONZERO:
                residuals.append(const)

    return LinearSolveResult(particular, free_syms, residuals)
