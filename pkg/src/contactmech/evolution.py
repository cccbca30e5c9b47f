"""The evolution operator: a vector field along the Legendre map.

Three independent constructions are provided (direct coordinate formula,
characterization through the contact bundle isomorphism, and the Tulczyjew
coefficient permutation), along with the induced derivation on phase-space
functions, the vertical fields of momentum-side functions, the Liouville
resolution multipliers, the decomposition through Hamiltonian fields, and
the projectability criterion.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from .errors import (
    HamiltonianMismatchError,
    InconsistentResolutionError,
    VerificationError,
)
from .geometry import OneForm, VectorField, differential
from .hamiltonian import HamiltonianModel, hamiltonian_vf_darboux
from .lagrangian import (
    LagrangianModel,
    LegendreMap,
    canonical_eta,
    contact_one_form,
    energy,
    legendre_map,
)
from .symexpr import (
    Expr,
    Symbol,
    ZERO,
    diff,
    is_zero,
    solve_linear,
    substitute,
    to_expr,
)


@dataclass
class EvolutionOperator:
    """Components (a^i, b_i, c) over the velocity chart, based along FL."""

    model: LagrangianModel
    legendre: LegendreMap
    a: Tuple[Expr, ...]
    b: Tuple[Expr, ...]
    c: Expr

    def components_by_phase_coordinate(self) -> Dict[Symbol, Expr]:
        target = self.legendre.target
        out: Dict[Symbol, Expr] = {}
        for q, ai in zip(target.positions, self.a):
            out[q] = ai
        for p, bi in zip(target.fibers, self.b):
            out[p] = bi
        out[target.action] = self.c
        return out


def build_k_direct(model: LagrangianModel) -> EvolutionOperator:
    """Coordinate formula: a^i = v^i, b_i = dL/dq^i + (dL/ds)(dL/dv^i), c = L."""
    chart = model.chart
    L = model.L
    s = chart.action
    fl = legendre_map(model)
    a = tuple(to_expr(v) for v in chart.fibers)
    b = tuple(
        diff(L, q) + diff(L, s) * diff(L, v)
        for q, v in zip(chart.positions, chart.fibers)
    )
    return EvolutionOperator(model, fl, a, b, L)


def _k_with_components(model, fl, b, c) -> EvolutionOperator:
    return EvolutionOperator(
        model, fl, tuple(to_expr(v) for v in model.chart.fibers), tuple(b), c
    )


def build_k_via_bundle_iso(model: LagrangianModel, seed=None) -> EvolutionOperator:
    """Solve FL*(B(K)) = dE + (dL/ds - E) eta_L with the second-order rows fixed.

    B is the bundle map of the canonical contact form on the target chart;
    the unknowns are the momentum components b_i and the action component c.
    """
    chart = model.chart
    fl = legendre_map(model)
    target = fl.target
    n = chart.dof
    b_unknowns = [Symbol(f"_b_{q.name}", "multiplier") for q in chart.positions]
    c_unknown = Symbol("_c", "multiplier")
    eta_q = canonical_eta(target)

    # i_K(deta_Q along FL) = -b_i dq^i + a^i dp_i with a^i = v^i.
    alpha_coeffs: Dict[Symbol, Expr] = {}
    for q, bu in zip(target.positions, b_unknowns):
        alpha_coeffs[q] = -to_expr(bu)
    for p, v in zip(target.fibers, chart.fibers):
        alpha_coeffs[p] = to_expr(v)
    # i_K(eta_Q along FL) = c - v^i dL/dv^i.
    pairing = to_expr(c_unknown)
    for v in chart.fibers:
        pairing = pairing - v * diff(model.L, v)
    bk = OneForm(target.coordinates, alpha_coeffs) + eta_q.scaled(pairing)
    lhs = fl.pullback_oneform(bk)

    E = energy(model)
    dLds = diff(model.L, chart.action)
    rhs = differential(E, chart.coordinates) + contact_one_form(model).scaled(
        dLds - E
    )
    eqs = [lhs.coefficient(x) - rhs.coefficient(x) for x in chart.coordinates]
    kw = {} if seed is None else {"seed": seed}
    result = solve_linear(eqs, b_unknowns + [c_unknown], **kw)
    if not result.unique:
        raise VerificationError("bundle-iso characterization did not close")
    b = [result.particular[u] for u in b_unknowns]
    return _k_with_components(model, fl, b, result.particular[c_unknown])


def build_k_tulczyjew(model: LagrangianModel) -> EvolutionOperator:
    """Read K off the one-form dL + L ds - (dL/ds) eta_L.

    The dv-coefficients must reproduce the Legendre bindings (the base point
    of the field along the map); the dq and ds coefficients become, after
    the coordinate swap, the momentum and action components.
    """
    chart = model.chart
    L = model.L
    s = chart.action
    fl = legendre_map(model)
    form = (
        differential(L, chart.coordinates)
        + OneForm(chart.coordinates, {s: L})
        - contact_one_form(model).scaled(diff(L, s))
    )
    for p, v in zip(fl.target.fibers, chart.fibers):
        base = form.coefficient(v) - fl.bindings[p]
        if not is_zero(base):
            raise VerificationError(
                "Tulczyjew form does not sit over the Legendre image"
            )
    b = [form.coefficient(q) for q in chart.positions]
    c = form.coefficient(s)
    return _k_with_components(model, fl, b, c)


def k_derive(K: EvolutionOperator, f) -> Expr:
    """K.f: the time derivative, on velocity space, of a phase-space function."""
    f = to_expr(f)
    fl = K.legendre
    target = fl.target
    total = ZERO
    for q, a in zip(target.positions, K.a):
        total = total + a * fl.pullback(diff(f, q))
    for p, b in zip(target.fibers, K.b):
        total = total + b * fl.pullback(diff(f, p))
    total = total + K.c * fl.pullback(diff(f, target.action))
    return total


def structural_residuals(K: EvolutionOperator, seed=None) -> Dict[str, bool]:
    """Check the defining conditions of the evolution operator.

    Returns named booleans: the second-order rows, the pairing condition
    i_K(eta along FL) = -E, and the pulled-back dynamical one-form identity.
    """
    model = K.model
    chart = model.chart
    fl = K.legendre
    kw = {} if seed is None else {"seed": seed}
    second_order = all(
        is_zero(a - v, **kw) for a, v in zip(K.a, chart.fibers)
    )
    pairing = K.c
    for (a, v) in zip(K.a, chart.fibers):
        pairing = pairing - a * diff(model.L, v)
    pairing_ok = is_zero(pairing + energy(model), **kw)

    alpha_coeffs: Dict[Symbol, Expr] = {}
    for q, b in zip(fl.target.positions, K.b):
        alpha_coeffs[q] = -b
    for p, a in zip(fl.target.fibers, K.a):
        alpha_coeffs[p] = a
    pulled = fl.pullback_oneform(OneForm(fl.target.coordinates, alpha_coeffs))
    E = energy(model)
    rhs = differential(E, chart.coordinates) + contact_one_form(model).scaled(
        diff(model.L, chart.action)
    )
    dynamical_ok = (pulled - rhs).is_zero(**kw)
    return {
        "second_order": second_order,
        "pairing": pairing_ok,
        "dynamical_one_form": dynamical_ok,
    }


def gamma_field(g, fl: LegendreMap) -> VectorField:
    """Vertical field FL*(dg/dp_i) d/dv^i of a phase-space function."""
    g = to_expr(g)
    source = fl.source
    components = {
        v: fl.pullback(diff(g, p)) for v, p in zip(source.fibers, fl.target.fibers)
    }
    return VectorField(source.coordinates, components)


@dataclass
class MultiplierSolution:
    """Liouville-resolution multipliers: Delta = Gamma_H + sum l^mu Gamma_mu."""

    lambdas: List[Expr]
    residuals: List[Expr]


def check_hamiltonian_extension(
    model: LagrangianModel, fl: LegendreMap, H, primaries: Sequence, seed=None
) -> None:
    kw = {} if seed is None else {"seed": seed}
    if not is_zero(fl.pullback(H) - energy(model), **kw):
        raise HamiltonianMismatchError(
            "H does not pull back to the Lagrangian energy"
        )
    for phi in primaries:
        if not is_zero(fl.pullback(phi), **kw):
            raise HamiltonianMismatchError(
                "a primary constraint does not vanish on the Legendre image"
            )


def solve_multipliers(
    model: LagrangianModel, H, primaries: Sequence, seed=None
) -> MultiplierSolution:
    """Solve v^i = Gamma_H^i + sum_mu l^mu Gamma_mu^i for the multipliers.

    Verifies that H extends the energy and the primaries vanish on the
    image, that the resolution closes exactly, and that the duality
    Gamma_nu(l^mu) = delta holds.
    """
    fl = legendre_map(model)
    check_hamiltonian_extension(model, fl, H, primaries, seed=seed)
    chart = model.chart
    kw = {} if seed is None else {"seed": seed}
    gH = gamma_field(H, fl)
    gammas = [gamma_field(phi, fl) for phi in primaries]
    lam_unknowns = [Symbol(f"_lam_{i}", "multiplier") for i in range(len(primaries))]
    eqs = []
    for v in chart.fibers:
        total = gH.component(v) - v
        for lam, gm in zip(lam_unknowns, gammas):
            total = total + lam * gm.component(v)
        eqs.append(total)
    result = solve_linear(eqs, lam_unknowns, **kw)
    if result.free_parameters:
        raise InconsistentResolutionError("multipliers are not determined")
    residuals = list(result.consistency_residuals)
    if residuals:
        raise InconsistentResolutionError(
            "Liouville resolution has nonvanishing residuals"
        )
    lambdas = [result.particular[u] for u in lam_unknowns]
    for nu, gnu in enumerate(gammas):
        for mu, lam in enumerate(lambdas):
            delta = 1 if nu == mu else 0
            if not is_zero(gnu.apply(lam) - delta, **kw):
                raise InconsistentResolutionError(
                    "multiplier duality Gamma_nu(l^mu) = delta failed"
                )
    return MultiplierSolution(lambdas, residuals)


def decompose_k(
    model: LagrangianModel, H, primaries: Sequence, seed=None
) -> List[Expr]:
    """Componentwise residual of K = X_H o FL + sum l^mu X_{phi_mu} o FL.

    The Hamiltonian fields are taken in Darboux form on the full phase
    chart and pulled back through the Legendre map.
    """
    K = build_k_direct(model)
    fl = K.legendre
    multipliers = solve_multipliers(model, H, primaries, seed=seed)
    target = fl.target
    XH = hamiltonian_vf_darboux(HamiltonianModel(target, to_expr(H)))
    Xphis = [
        hamiltonian_vf_darboux(HamiltonianModel(target, to_expr(phi)))
        for phi in primaries
    ]
    k_components = K.components_by_phase_coordinate()
    residuals = []
    for coord in target.coordinates:
        total = fl.pullback(XH.component(coord))
        for lam, Xphi in zip(multipliers.lambdas, Xphis):
            total = total + lam * fl.pullback(Xphi.component(coord))
        residuals.append(k_components[coord] - total)
    return residuals


@dataclass
class Projectability:
    projectable: bool
    obstructions: List[int]  # indices of obstructing primaries
    cross_check_ok: bool


def projectability_check(
    model: LagrangianModel, H, primaries: Sequence, f, seed=None
) -> Projectability:
    """Is K.f a pullback through FL?  Iff X_{phi_mu}(f) = 0 for all primaries.

    Cross-checked by applying the vertical kernel fields to K.f directly.
    """
    f = to_expr(f)
    K = build_k_direct(model)
    fl = K.legendre
    target = fl.target
    kw = {} if seed is None else {"seed": seed}
    obstructions = []
    pulled_rates = []
    for i, phi in enumerate(primaries):
        Xphi = hamiltonian_vf_darboux(HamiltonianModel(target, to_expr(phi)))
        rate = Xphi.apply(f)
        pulled_rates.append(fl.pullback(rate))
        if not is_zero(rate, **kw):
            obstructions.append(i)
    kf = k_derive(K, f)
    cross_ok = True
    for i, phi in enumerate(primaries):
        gm = gamma_field(phi, fl)
        if not is_zero(gm.apply(kf) - pulled_rates[i], **kw):
            cross_ok = False
    return Projectability(not obstructions, obstructions, cross_ok)
