"""Hamiltonian-side machinery on phase space extended by the action.

Includes the canonical contact form, the Darboux-coordinate Hamiltonian
field, a Reeb-free solver that works for degenerate (precontact) one-forms,
Reeb existence classification, the bundle isomorphism defined by a contact
form, the dissipation law, and graph-type restricted surfaces cut out by
momentum constraints.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from .errors import (
    DegenerateContactFormError,
    NonCanonicalFormError,
    VerificationError,
)
from .geometry import (
    CoordinateChart,
    OneForm,
    TwoForm,
    VectorField,
    differential,
    exterior_derivative,
    interior_one,
    interior_two,
    wedge,
)
from .lagrangian import FieldSolveResult, canonical_eta
from .symexpr import (
    DEFAULT_SEED,
    EvaluationDomainError,
    Expr,
    Symbol,
    ZERO,
    diff,
    evaluate,
    free_symbols,
    is_zero,
    primitive_part,
    random_rational,
    solve_linear,
    substitute,
    to_expr,
)


@dataclass(frozen=True)
class HamiltonianModel:
    chart: CoordinateChart
    H: Expr
    name: str = "model"
    eta: Optional[OneForm] = None  # defaults to the canonical form

    def __post_init__(self):
        if self.chart.kind != "phase":
            raise ValueError("a Hamiltonian model needs a phase chart")
        bad = {
            s.name
            for s in free_symbols(self.H)
            if s.role in ("velocity", "free-function")
        }
        if bad:
            raise ValueError(f"Hamiltonian contains forbidden symbols: {sorted(bad)}")

    def eta_form(self) -> OneForm:
        return self.eta if self.eta is not None else canonical_eta(self.chart)

    def has_canonical_eta(self) -> bool:
        if self.eta is None:
            return True
        return (self.eta_form() - canonical_eta(self.chart)).is_zero()


def canonical_contact_form(chart) -> OneForm:
    """ds - p_i dq^i; accepts a phase chart or a dimension."""
    if isinstance(chart, int):
        if chart < 1:
            raise ValueError("need at least one degree of freedom")
        qs = tuple(Symbol(f"q_{i+1}", "position", i) for i in range(chart))
        ps = tuple(Symbol(f"p_{i+1}", "momentum", i) for i in range(chart))
        chart = CoordinateChart(qs, ps, Symbol("s", "action"), (), "phase")
    return canonical_eta(chart)


def hamiltonian_vf_darboux(model: HamiltonianModel) -> VectorField:
    """Contact Hamiltonian field in Darboux coordinates.

    X = (dH/dp_i) d/dq^i - (dH/dq^i + p_i dH/ds) d/dp_i
        + (p_i dH/dp_i - H) d/ds.
    """
    if not model.has_canonical_eta():
        raise NonCanonicalFormError(
            "Darboux formula needs the canonical contact form"
        )
    chart = model.chart
    H = model.H
    s = chart.action
    components: Dict[Symbol, Expr] = {}
    s_component = -H
    for q, p in zip(chart.positions, chart.fibers):
        dHdp = diff(H, p)
        components[q] = dHdp
        components[p] = -(diff(H, q) + p * diff(H, s))
        s_component = s_component + p * dHdp
    components[s] = s_component
    return VectorField(chart.coordinates, components)


def hamiltonian_vf_reeb_free(
    H0: Expr, eta0: OneForm, seed=None, free_prefix: str = "f"
) -> FieldSolveResult:
    """Solve (i_X deta)^eta = (dH)^eta and i_X eta = -H without a Reeb field.

    The wedge equation is flattened into coefficients of the basis two-forms
    of the chart carried by ``eta0``; together with the scalar equation this
    is affine in the components of X.  Works for degenerate one-forms: the
    undetermined directions come back as free functions and unsatisfiable
    rows as candidate constraints.
    """
    coords = eta0.coords
    H0 = to_expr(H0)
    unknowns = [Symbol(f"_X_{c.name}", "multiplier") for c in coords]
    X = VectorField(coords, dict(zip(coords, map(to_expr, unknowns))))
    deta = exterior_derivative(eta0)
    alpha = interior_two(X, deta) - differential(H0, coords)
    eqs = []
    for i, a in enumerate(coords):
        for b in coords[i + 1 :]:
            eqs.append(
                alpha.coefficient(a) * eta0.coefficient(b)
                - alpha.coefficient(b) * eta0.coefficient(a)
            )
    eqs.append(interior_one(X, eta0) + H0)
    kw = {"free_prefix": free_prefix}
    if seed is not None:
        kw["seed"] = seed
    result = solve_linear(eqs, unknowns, **kw)
    components = {c: result.particular[u] for c, u in zip(coords, unknowns)}
    return FieldSolveResult(
        VectorField(coords, components),
        result.free_parameters,
        _normalized_candidates(result.consistency_residuals),
    )


def _normalized_candidates(residuals: Sequence[Expr]) -> List[Expr]:
    out: List[Expr] = []
    for r in residuals:
        n = primitive_part(r)
        if n not in out:
            out.append(n)
    return out


@dataclass
class ReebExistence:
    kind: str  # "unique" | "family" | "none"
    field: Optional[VectorField]
    free_parameters: List[Symbol]
    residuals: List[Expr]


def reeb_existence(eta0: OneForm, seed=None) -> ReebExistence:
    """Classify solutions of i_R deta = 0, i_R eta = 1 on eta's chart."""
    coords = eta0.coords
    unknowns = [Symbol(f"_R_{c.name}", "multiplier") for c in coords]
    R = VectorField(coords, dict(zip(coords, map(to_expr, unknowns))))
    deta = exterior_derivative(eta0)
    contraction = interior_two(R, deta)
    eqs = [contraction.coefficient(c) for c in coords]
    eqs.append(interior_one(R, eta0) - 1)
    kw = {} if seed is None else {"seed": seed}
    result = solve_linear(eqs, unknowns, **kw)
    if result.consistency_residuals:
        return ReebExistence("none", None, [], result.consistency_residuals)
    field = VectorField(
        coords, {c: result.particular[u] for c, u in zip(coords, unknowns)}
    )
    if result.free_parameters:
        return ReebExistence("family", field, result.free_parameters, [])
    return ReebExistence("unique", field, [], [])


def _contact_matrix(eta: OneForm) -> List[List[Expr]]:
    deta = exterior_derivative(eta)
    coords = eta.coords
    return [
        [
            deta.coefficient(a, b) + eta.coefficient(a) * eta.coefficient(b)
            for b in coords
        ]
        for a in coords
    ]


def assert_contact(eta: OneForm, seed=None) -> None:
    """Probabilistic contact check at a random point.

    The bundle map X -> i_X deta + (i_X eta) eta is invertible exactly where
    eta is contact; we test its matrix for nonsingularity at one random
    rational point.
    """
    if len(eta.coords) % 2 == 0:
        raise DegenerateContactFormError("contact forms need an odd-dimensional chart")
    matrix = _contact_matrix(eta)
    symbols = set()
    for row in matrix:
        for e in row:
            symbols |= free_symbols(e)
    rng = random.Random((DEFAULT_SEED if seed is None else seed) ^ 0x5EED)
    for _ in range(10):
        env = {s: random_rational(rng) for s in sorted(symbols, key=lambda s: s.name)}
        try:
            values = [[float(evaluate(e, env)) for e in row] for row in matrix]
        except EvaluationDomainError:
            continue
        if abs(_det(values)) > 1e-12:
            return
        raise DegenerateContactFormError("one-form fails the contact condition")
    raise DegenerateContactFormError("could not evaluate the contact condition")


def _det(matrix: List[List[float]]) -> float:
    m = [row[:] for row in matrix]
    n = len(m)
    det = 1.0
    for col in range(n):
        pivot_row = max(range(col, n), key=lambda r: abs(m[r][col]))
        if abs(m[pivot_row][col]) < 1e-300:
            return 0.0
        if pivot_row != col:
            m[col], m[pivot_row] = m[pivot_row], m[col]
            det = -det
        det *= m[col][col]
        for r in range(col + 1, n):
            factor = m[r][col] / m[col][col]
            for c in range(col, n):
                m[r][c] -= factor * m[col][c]
    return det


def bundle_iso(eta: OneForm, X: VectorField, seed=None) -> OneForm:
    """B(X) = i_X deta + (i_X eta) eta for a contact form eta."""
    assert_contact(eta, seed=seed)
    deta = exterior_derivative(eta)
    return interior_two(X, deta) + eta.scaled(interior_one(X, eta))


def bundle_iso_inverse(eta: OneForm, alpha: OneForm, seed=None) -> VectorField:
    """Solve B(X) = alpha; unique because eta is contact."""
    assert_contact(eta, seed=seed)
    coords = eta.coords
    unknowns = [Symbol(f"_B_{c.name}", "multiplier") for c in coords]
    X = VectorField(coords, dict(zip(coords, map(to_expr, unknowns))))
    deta = exterior_derivative(eta)
    image = interior_two(X, deta) + eta.scaled(interior_one(X, eta))
    eqs = [image.coefficient(c) - alpha.coefficient(c) for c in coords]
    kw = {} if seed is None else {"seed": seed}
    result = solve_linear(eqs, unknowns, **kw)
    if not result.unique:
        raise DegenerateContactFormError("bundle map failed to invert")
    return VectorField(
        coords, {c: result.particular[u] for c, u in zip(coords, unknowns)}
    )


def dissipation_residual(model: HamiltonianModel) -> Expr:
    """i_{X_H} dH + (dH/ds) H; vanishes identically (the dissipation law)."""
    X = hamiltonian_vf_darboux(model)
    return X.apply(model.H) + diff(model.H, model.chart.action) * model.H


def omega_equation_residual(eta: OneForm, H: Expr, X: VectorField) -> TwoForm:
    """Residual of i_X (eta ^ deta) = -H deta + dH ^ eta, as a two-form.

    Uses i_X(eta ^ deta) = (i_X eta) deta - eta ^ (i_X deta), so no
    three-form machinery is needed.
    """
    H = to_expr(H)
    deta = exterior_derivative(eta)
    lhs = deta.scaled(interior_one(X, eta)) - wedge(eta, interior_two(X, deta))
    rhs = deta.scaled(-H) + wedge(differential(H, eta.coords), eta)
    return lhs - rhs


@dataclass
class RestrictedSurface:
    """A graph-type submanifold of phase space with the induced one-form."""

    chart: CoordinateChart
    eliminated: Dict[Symbol, Expr]
    survivors: Tuple[Symbol, ...]
    eta0: OneForm  # on the surviving coordinates

    @classmethod
    def from_primaries(
        cls, chart: CoordinateChart, primaries: Sequence[Expr], seed=None
    ) -> "RestrictedSurface":
        primaries = [to_expr(p) for p in primaries]
        appearing = [
            p
            for p in chart.fibers
            if any(p in free_symbols(c) for c in primaries)
        ]
        # Keep only momenta the system is jointly affine in; anything that
        # shows up inside a coefficient survives as a coordinate instead.
        while appearing:
            violators = []
            for phi in primaries:
                for p in appearing:
                    bad = free_symbols(diff(phi, p)) & set(appearing)
                    violators.extend(bad)
            if not violators:
                break
            appearing.remove(
                max(violators, key=lambda p: chart.coordinates.index(p))
            )
        if not appearing:
            raise VerificationError(
                "primaries do not present the surface as a graph over momenta"
            )
        kw = {} if seed is None else {"seed": seed}
        result = solve_linear(primaries, appearing, free_prefix="_keep", **kw)
        if result.consistency_residuals:
            raise VerificationError("primary constraints are inconsistent")
        # Momenta in free columns survive as coordinates: map the solver's
        # placeholder symbols back to them.
        back = {}
        for f in result.free_parameters:
            owner = next(
                (u for u in appearing if result.particular[u] == to_expr(f)), None
            )
            if owner is not None:
                back[f] = owner
        eliminated: Dict[Symbol, Expr] = {}
        for u in appearing:
            val = substitute(result.particular[u], back)
            if val == to_expr(u):
                continue
            eliminated[u] = val
        survivors = tuple(c for c in chart.coordinates if c not in eliminated)
        ambient = canonical_eta(chart)
        coeffs = {
            c: substitute(e, eliminated)
            for c, e in ambient.coeffs.items()
            if c in survivors
        }
        eta0 = OneForm(survivors, coeffs)
        return cls(chart, eliminated, survivors, eta0)

    def eta0_ambient(self) -> OneForm:
        """The induced form read on the full ambient chart."""
        ambient = canonical_eta(self.chart)
        coeffs = {
            c: substitute(e, self.eliminated) for c, e in ambient.coeffs.items()
        }
        return OneForm(self.chart.coordinates, coeffs)

    def restrict(self, f: Expr) -> Expr:
        return substitute(f, self.eliminated)
