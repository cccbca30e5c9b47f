"""Lagrangian-side contact geometry on velocity space extended by the action.

Covers the energy, the contact one-form, the Legendre map with its pullback
identity, the velocity Hessian with regularity classification, the Reeb
field of regular models, Herglotz-Euler-Lagrange residuals and the
Lagrangian dynamics vector field.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from .errors import SingularModelError, VerificationError
from .geometry import (
    CoordinateChart,
    OneForm,
    TwoForm,
    VectorField,
    differential,
    exterior_derivative,
    interior_one,
    interior_two,
    phase_chart_for,
)
from .symexpr import (
    Expr,
    PivotAmbiguityError,
    Symbol,
    ZERO,
    diff,
    free_symbols,
    is_zero,
    primitive_part,
    solve_linear,
    substitute,
    to_expr,
)


@dataclass(frozen=True)
class LagrangianModel:
    chart: CoordinateChart
    L: Expr
    name: str = "model"

    def __post_init__(self):
        if self.chart.kind != "velocity":
            raise ValueError("a Lagrangian model needs a velocity chart")
        bad = {
            s.name
            for s in free_symbols(self.L)
            if s.role in ("momentum", "free-function")
        }
        if bad:
            raise ValueError(f"Lagrangian contains forbidden symbols: {sorted(bad)}")


class LegendreMap:
    """Fibre derivative: p_i -> dL/dv^i with positions and action unchanged."""

    def __init__(self, model: LagrangianModel):
        self.source = model.chart
        self.target = phase_chart_for(model.chart)
        self.bindings: Dict[Symbol, Expr] = {}
        for q in self.source.positions:
            self.bindings[q] = to_expr(q)
        for p, v in zip(self.target.fibers, self.source.fibers):
            self.bindings[p] = diff(model.L, v)
        self.bindings[self.source.action] = to_expr(self.source.action)
        residual = contact_one_form(model) - self.pullback_oneform(
            canonical_eta(self.target)
        )
        if not residual.is_zero():
            raise VerificationError("Legendre pullback of the canonical form failed")

    def pullback(self, f) -> Expr:
        """FL* on functions: substitute the momentum bindings."""
        return substitute(f, self.bindings)

    def pullback_oneform(self, alpha: OneForm) -> OneForm:
        coeffs: Dict[Symbol, Expr] = {}
        for a, coeff in alpha.coeffs.items():
            pulled = self.pullback(coeff)
            binding = self.bindings[a]
            for xi in self.source.coordinates:
                d = diff(binding, xi)
                if d.is_zero_canonical():
                    continue
                coeffs[xi] = coeffs.get(xi, ZERO) + pulled * d
        return OneForm(self.source.coordinates, coeffs)


def canonical_eta(chart: CoordinateChart) -> OneForm:
    """ds - sum p_i dq^i on a phase chart."""
    if chart.kind != "phase":
        raise ValueError("canonical contact form lives on a phase chart")
    coeffs: Dict[Symbol, Expr] = {chart.action: to_expr(1)}
    for q, p in zip(chart.positions, chart.fibers):
        coeffs[q] = -to_expr(p)
    return OneForm(chart.coordinates, coeffs)


def energy(model: LagrangianModel) -> Expr:
    """E = Delta(L) - L with Delta the Liouville field v^i d/dv^i."""
    total = -model.L
    for v in model.chart.fibers:
        total = total + v * diff(model.L, v)
    return total


def contact_one_form(model: LagrangianModel) -> OneForm:
    """eta = ds - (dL/dv^i) dq^i on the velocity chart."""
    chart = model.chart
    coeffs: Dict[Symbol, Expr] = {chart.action: to_expr(1)}
    for q, v in zip(chart.positions, chart.fibers):
        coeffs[q] = -diff(model.L, v)
    return OneForm(chart.coordinates, coeffs)


def hessian(model: LagrangianModel) -> List[List[Expr]]:
    vs = model.chart.fibers
    return [[diff(diff(model.L, vi), vj) for vj in vs] for vi in vs]


@dataclass
class Regularity:
    regular: bool
    rank: int
    kernel_basis: List[Tuple[Expr, ...]]


def classify_regularity(model: LagrangianModel, seed=None) -> Regularity:
    """Generic rank and kernel of the velocity Hessian.

    The kernel is read off a homogeneous solve: basis vectors are the free
    directions of W x = 0.  Rank is taken at generic points under the pivot
    policy, so models of nonconstant rank surface as pivot ambiguity.
    """
    W = hessian(model)
    n = len(W)
    unknowns = [Symbol(f"_ker_{i}", "multiplier") for i in range(n)]
    eqs = []
    for i in range(n):
        total = ZERO
        for j in range(n):
            total = total + W[i][j] * unknowns[j]
        eqs.append(total)
    kw = {} if seed is None else {"seed": seed}
    result = solve_linear(eqs, unknowns, **kw)
    rank = n - len(result.free_parameters)
    basis = []
    for f in result.free_parameters:
        vec = tuple(diff(result.particular[u], f) for u in unknowns)
        basis.append(vec)
    return Regularity(regular=not basis, rank=rank, kernel_basis=basis)


def legendre_map(model: LagrangianModel) -> LegendreMap:
    return LegendreMap(model)


def reeb_field(model: LagrangianModel, seed=None) -> VectorField:
    """Reeb field of a regular model: unique R with i_R deta = 0, i_R eta = 1."""
    reg = classify_regularity(model, seed=seed)
    if not reg.regular:
        raise SingularModelError(f"{model.name} is singular (rank {reg.rank})")
    chart = model.chart
    W = hessian(model)
    n = chart.dof
    unknowns = [Symbol(f"_reeb_{i}", "multiplier") for i in range(n)]
    eqs = []
    for i in range(n):
        total = diff(diff(model.L, chart.action), chart.fibers[i])
        for j in range(n):
            total = total + W[i][j] * unknowns[j]
        eqs.append(total)
    kw = {} if seed is None else {"seed": seed}
    result = solve_linear(eqs, unknowns, **kw)
    if not result.unique:
        raise SingularModelError("Hessian solve for the Reeb field was not unique")
    components: Dict[Symbol, Expr] = {chart.action: to_expr(1)}
    for v, u in zip(chart.fibers, unknowns):
        components[v] = result.particular[u]
    field = VectorField(chart.coordinates, components)
    eta = contact_one_form(model)
    deta = exterior_derivative(eta)
    kwz = {} if seed is None else {"seed": seed}
    if not interior_two(field, deta).is_zero(**kwz):
        raise VerificationError("Reeb field fails i_R deta = 0")
    if not is_zero(interior_one(field, eta) - 1, **kwz):
        raise VerificationError("Reeb field fails i_R eta = 1")
    return field


def herglotz_el_residuals(
    model: LagrangianModel,
    accelerations: Optional[Sequence[Symbol]] = None,
    sdot: Optional[Symbol] = None,
) -> List[Expr]:
    """Residuals whose zero set is the Herglotz-Euler-Lagrange solutions.

    One residual per degree of freedom, affine in the unknown accelerations,
    plus the action equation sdot - L.
    """
    chart = model.chart
    if accelerations is None:
        accelerations = acceleration_symbols(model)
    if sdot is None:
        sdot = Symbol("s_dot", "parameter")
    L = model.L
    s = chart.action
    W = hessian(model)
    out = []
    for i, vi in enumerate(chart.fibers):
        total = (
            diff(diff(L, s), vi) * L
            - diff(L, chart.positions[i])
            - diff(L, s) * diff(L, vi)
        )
        for j, vj in enumerate(chart.fibers):
            total = total + W[i][j] * accelerations[j]
            total = total + diff(diff(L, chart.positions[j]), vi) * vj
        out.append(total)
    out.append(to_expr(sdot) - L)
    return out


def acceleration_symbols(model: LagrangianModel) -> List[Symbol]:
    return [
        Symbol(f"{v.name}_dot", "parameter", v.index) for v in model.chart.fibers
    ]


@dataclass
class FieldSolveResult:
    """A vector field solved from linear equations, with leftover freedom."""

    field: VectorField
    free_parameters: List[Symbol]
    constraint_candidates: List[Expr]


def lagrangian_vector_field(model: LagrangianModel, seed=None) -> FieldSolveResult:
    """Second-order dynamics field on the velocity chart.

    Solves i_X deta = dE + (dL/ds) eta and i_X eta = -E together with the
    second-order rows X^{q^i} = v^i.  Singular models come back with
    free-function components and candidate constraints.
    """
    chart = model.chart
    coords = chart.coordinates
    unknowns = [Symbol(f"_X_{c.name}", "multiplier") for c in coords]
    X = VectorField(coords, dict(zip(coords, map(to_expr, unknowns))))
    eta = contact_one_form(model)
    deta = exterior_derivative(eta)
    E = energy(model)
    dLds = diff(model.L, chart.action)
    lhs = interior_two(X, deta)
    rhs = differential(E, coords) + eta.scaled(dLds)
    eqs = [lhs.coefficient(c) - rhs.coefficient(c) for c in coords]
    eqs.append(interior_one(X, eta) + E)
    for q, v in zip(chart.positions, chart.fibers):
        eqs.append(X.component(q) - v)
    kw = {} if seed is None else {"seed": seed}
    result = solve_linear(eqs, unknowns, **kw)
    components = {c: result.particular[u] for c, u in zip(coords, unknowns)}
    candidates = []
    for r in result.consistency_residuals:
        n = primitive_part(r)
        if n not in candidates:
            candidates.append(n)
    return FieldSolveResult(
        VectorField(coords, components),
        result.free_parameters,
        candidates,
    )
