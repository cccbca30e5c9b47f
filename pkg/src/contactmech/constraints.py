"""Constraint algorithm: primaries, tangency iteration, induced chains.

Discovers primary momentum constraints from the Hessian kernel, runs the
tangency iteration on the Hamiltonian side (determining free functions of
the Reeb-free dynamics or appending new constraints), and transports
Hamiltonian chains to Lagrangian ones through the evolution operator.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from .errors import VerificationError
from .evolution import EvolutionOperator, k_derive
from .geometry import OneForm, VectorField
from .hamiltonian import hamiltonian_vf_reeb_free
from .lagrangian import (
    LagrangianModel,
    LegendreMap,
    classify_regularity,
    legendre_map,
)
from .symexpr import (
    Expr,
    PivotAmbiguityError,
    Symbol,
    ZERO,
    coefficient_class,
    diff,
    free_symbols,
    group_by_nonscalar,
    is_zero,
    primitive_part,
    solve_linear,
    substitute,
    to_expr,
)

MAX_ITERATIONS_DEFAULT = 12


@dataclass(frozen=True)
class Provenance:
    kind: str  # "primary" | "solve" | "tangency" | "image-of-k"
    parent: Optional[int] = None

    def describe(self) -> str:
        if self.parent is None:
            return self.kind
        return f"{self.kind}({self.parent})"


@dataclass
class ChainEntry:
    function: Expr
    side: str  # "hamiltonian" | "lagrangian"
    provenance: Provenance
    normalized: Expr


@dataclass
class ConstraintChain:
    entries: List[ChainEntry] = field(default_factory=list)
    determined_multipliers: Dict[Symbol, Expr] = field(default_factory=dict)
    status: str = "terminated"  # or "max-iterations"
    field_with_multipliers: Optional[VectorField] = None
    free_parameters: List[Symbol] = field(default_factory=list)

    def hamiltonian_entries(self) -> List[ChainEntry]:
        return [e for e in self.entries if e.side == "hamiltonian"]

    def lagrangian_entries(self) -> List[ChainEntry]:
        return [e for e in self.entries if e.side == "lagrangian"]


@dataclass
class PrimaryConstraints:
    constraints: List[Expr]
    needs_user_input: bool = False
    reason: str = ""


def primary_constraints(
    model: LagrangianModel, fl: Optional[LegendreMap] = None, seed=None
) -> PrimaryConstraints:
    """Momentum constraints cutting out the Legendre image.

    Each Hessian-kernel direction contributes the relation
    sum_i k^i (p_i - dL/dv^i); when both the direction and the contracted
    fibre derivative are velocity-free this is a function on phase space and
    is emitted.  Anything velocity-dependent is left to the user.
    """
    reg = classify_regularity(model, seed=seed)
    if reg.regular:
        return PrimaryConstraints([])
    if fl is None:
        fl = legendre_map(model)
    velocities = set(model.chart.fibers)
    out: List[Expr] = []
    for vec in reg.kernel_basis:
        if any(free_symbols(comp) & velocities for comp in vec):
            return PrimaryConstraints(
                [],
                needs_user_input=True,
                reason="Hessian kernel direction depends on velocities",
            )
        contraction = ZERO
        momentum_part = ZERO
        for comp, v, p in zip(vec, model.chart.fibers, fl.target.fibers):
            contraction = contraction + comp * diff(model.L, v)
            momentum_part = momentum_part + comp * p
        if free_symbols(contraction) & velocities:
            return PrimaryConstraints(
                [],
                needs_user_input=True,
                reason="momentum relation along a kernel direction keeps velocities",
            )
        out.append(primitive_part(momentum_part - contraction))
    return PrimaryConstraints(out)


def _scalar_predicate(unknowns: Sequence[Symbol]):
    unknown_set = set(unknowns)

    def is_scalar(atom) -> bool:
        if isinstance(atom, Symbol):
            return atom.role == "parameter" or atom in unknown_set
        return all(
            s.role == "parameter" or s in unknown_set
            for s in free_symbols(atom.arg)
        )

    return is_scalar


def in_span(candidate, basis: Sequence[Expr], seed=None) -> bool:
    """Membership in the linear span with parameter-expression coefficients.

    Writes candidate = sum a_k basis_k, extracts one linear equation per
    distinct coordinate monomial, and solves for the a_k over the parameter
    field.  The back-substituted combination is verified by a zero test.
    """
    kw = {} if seed is None else {"seed": seed}
    candidate = to_expr(candidate)
    if is_zero(candidate, **kw):
        return True
    if not basis:
        return False
    coeffs = [Symbol(f"_a_{k}", "multiplier") for k in range(len(basis))]
    residual = candidate
    for a, phi in zip(coeffs, basis):
        residual = residual - a * phi
    groups = group_by_nonscalar(residual, _scalar_predicate(coeffs))
    try:
        result = solve_linear(list(groups.values()), coeffs, **kw)
    except PivotAmbiguityError:
        raise
    if result.consistency_residuals:
        return False
    assignment = {}
    for a in coeffs:
        value = result.particular[a]
        value = substitute(value, {f: ZERO for f in result.free_parameters})
        assignment[a] = value
    return is_zero(substitute(residual, assignment), **kw)


def _determinable(rate: Expr, undetermined: List[Symbol], seed) -> Optional[Symbol]:
    """Pick the free function with the best nonvanishing coefficient, if any."""
    kw = {} if seed is None else {"seed": seed}
    candidates = []
    for i, f in enumerate(undetermined):
        c = diff(rate, f)
        if c.is_zero_canonical():
            continue
        if not is_zero(c, **kw):
            candidates.append((coefficient_class(c), i, f))
    if not candidates:
        return None
    return min(candidates)[2]


def run_constraint_algorithm(
    H0,
    eta0: OneForm,
    primaries: Sequence,
    max_iter: int = MAX_ITERATIONS_DEFAULT,
    seed=None,
) -> ConstraintChain:
    """Tangency iteration for the Reeb-free dynamics on the given one-form.

    The dynamics field is solved once; each pass applies it to every active
    constraint.  A rate containing an undetermined free function determines
    that function; a rate outside the span of the known constraints is
    appended as a new one.  Stops when a pass changes nothing.
    """
    kw = {} if seed is None else {"seed": seed}
    solve = hamiltonian_vf_reeb_free(to_expr(H0), eta0, **kw)
    chain = ConstraintChain()
    for phi in primaries:
        phi = to_expr(phi)
        chain.entries.append(
            ChainEntry(phi, "hamiltonian", Provenance("primary"), primitive_part(phi))
        )
    known = [e.normalized for e in chain.entries]
    for cand in solve.constraint_candidates:
        if not in_span(cand, known, seed=seed):
            chain.entries.append(
                ChainEntry(cand, "hamiltonian", Provenance("solve"), cand)
            )
            known.append(cand)

    X = solve.field
    free = list(solve.free_parameters)
    determined: Dict[Symbol, Expr] = {}
    chain.status = "max-iterations"
    for _ in range(max_iter):
        changed = False
        idx = 0
        while idx < len(chain.entries):
            entry = chain.entries[idx]
            rate = substitute(X.apply(entry.function), determined)
            if is_zero(rate, **kw):
                idx += 1
                continue
            undetermined = [f for f in free if f not in determined]
            target = _determinable(rate, undetermined, seed)
            if target is not None:
                coeff = diff(rate, target)
                rest = substitute(rate, {target: ZERO})
                value = -rest / coeff
                determined[target] = value
                determined = {
                    k: substitute(v, {target: value}) for k, v in determined.items()
                }
                determined[target] = value
                changed = True
                idx += 1
                continue
            norm = primitive_part(rate)
            if not in_span(norm, [e.normalized for e in chain.entries], seed=seed):
                chain.entries.append(
                    ChainEntry(rate, "hamiltonian", Provenance("tangency", idx), norm)
                )
                changed = True
            idx += 1
        if not changed:
            chain.status = "terminated"
            break

    chain.determined_multipliers = determined
    chain.free_parameters = [f for f in free if f not in determined]
    chain.field_with_multipliers = X.substituted(determined)
    return chain


def lagrangian_chain_via_k(
    K: EvolutionOperator, chain: ConstraintChain, seed=None
) -> List[ChainEntry]:
    """Transport Hamiltonian constraints to velocity space through K."""
    kw = {} if seed is None else {"seed": seed}
    out: List[ChainEntry] = []
    for idx, entry in enumerate(chain.hamiltonian_entries()):
        chi = k_derive(K, entry.function)
        if is_zero(chi, **kw):
            continue
        norm = primitive_part(chi)
        if in_span(norm, [e.normalized for e in out], seed=seed):
            continue
        out.append(ChainEntry(chi, "lagrangian", Provenance("image-of-k", idx), norm))
    return out


@dataclass
class HerglotzDiracSystem:
    """Symbolic residuals of the momentum-side equations of motion.

    Residual families: p - dL/dv, pdot - (dL/ds)(dL/dv) - dL/dq, sdot - L,
    written over path-jet symbols.
    """

    residuals: List[Expr]
    momenta: Tuple[Symbol, ...]
    momentum_rates: Tuple[Symbol, ...]
    action_rate: Symbol


def herglotz_dirac_residuals(
    model: LagrangianModel, fl: Optional[LegendreMap] = None
) -> HerglotzDiracSystem:
    if fl is None:
        fl = legendre_map(model)
    chart = model.chart
    L = model.L
    s = chart.action
    momenta = fl.target.fibers
    pdots = tuple(
        Symbol(f"{p.name}_dot", "parameter", p.index) for p in momenta
    )
    sdot = Symbol("s_dot", "parameter")
    residuals: List[Expr] = []
    for p, v in zip(momenta, chart.fibers):
        residuals.append(p - diff(L, v))
    for pd, q, v in zip(pdots, chart.positions, chart.fibers):
        residuals.append(pd - diff(L, s) * diff(L, v) - diff(L, q))
    residuals.append(sdot - L)
    return HerglotzDiracSystem(residuals, momenta, pdots, sdot)


def constraint_set_substitution(
    constraints: Sequence[Expr], coords: Sequence[Symbol], seed=None
) -> Dict[Symbol, Expr]:
    """Triangular solve of the constraints for coordinates, for reduction.

    Processes constraints in order; each must be solvable for a coordinate
    not already used (linear occurrence with a nonvanishing coefficient).
    The returned bindings realize 'restrict to the constraint set'.
    """
    kw = {} if seed is None else {"seed": seed}
    bindings: Dict[Symbol, Expr] = {}
    used: set = set()
    for con in constraints:
        reduced = substitute(to_expr(con), bindings)
        if is_zero(reduced, **kw):
            continue
        best = None
        for c in coords:
            if c in used:
                continue
            coeff = diff(reduced, c)
            if coeff.is_zero_canonical():
                continue
            if free_symbols(coeff) & {c}:
                continue  # nonlinear occurrence
            if not is_zero(coeff, **kw):
                rank = coefficient_class(coeff)
                if best is None or rank < best[0]:
                    best = (rank, c, coeff)
        if best is None:
            raise PivotAmbiguityError(
                "cannot triangularize the constraint set for reduction"
            )
        _, c, coeff = best
        value = -substitute(reduced, {c: ZERO}) / coeff
        bindings = {k: substitute(v, {c: value}) for k, v in bindings.items()}
        bindings[c] = value
        used.add(c)
    return bindings
