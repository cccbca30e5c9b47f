"""Charts, forms, fields: algebra and exterior calculus."""

import pytest

from contactmech.geometry import (
    CoordinateChart,
    OneForm,
    TwoForm,
    VectorField,
    differential,
    exterior_derivative,
    interior_one,
    interior_two,
    velocity_chart,
    wedge,
)
from contactmech.symexpr import Symbol, ZERO, sin, to_expr

q = Symbol("q", "position")
p = Symbol("p", "momentum")
s = Symbol("s", "action")
CHART = CoordinateChart((q,), (p,), s, (), "phase")
COORDS = CHART.coordinates


def test_chart_invariants():
    with pytest.raises(ValueError):
        CoordinateChart((q,), (), s, (), "phase")
    with pytest.raises(ValueError):
        CoordinateChart((q,), (q,), s, (), "phase")
    with pytest.raises(ValueError):
        CoordinateChart((q,), (p,), Symbol("s2", "parameter"), (), "phase")


def test_velocity_chart_builder():
    chart = velocity_chart(["r", "theta"])
    assert [c.name for c in chart.positions] == ["r", "theta"]
    assert [c.name for c in chart.fibers] == ["v_r", "v_theta"]
    assert chart.action.name == "s"


def test_exterior_derivative_canonical():
    eta = OneForm(COORDS, {s: to_expr(1), q: -to_expr(p)})
    deta = exterior_derivative(eta)
    assert deta.coefficient(q, p) == to_expr(1)
    assert deta.coefficient(p, q) == to_expr(-1)
    assert deta.coefficient(q, s).is_zero_canonical()


def test_d_squared_zero():
    f = q * sin(s)
    assert exterior_derivative(differential(f, COORDS)).is_zero()


def test_two_form_antisymmetry_invariant():
    tau = TwoForm(COORDS, {(q, p): to_expr(3), (p, q): to_expr(-1)})
    # Accumulated: 3 da^db plus -1 db^da = 4 da^db.
    assert tau.coefficient(q, p) == to_expr(4)
    table = tau.full_table()
    for a in COORDS:
        assert table[(a, a)].is_zero_canonical()
        for b in COORDS:
            assert (table[(a, b)] + table[(b, a)]).is_zero_canonical()
    with pytest.raises(ValueError):
        TwoForm(COORDS, {(q, q): to_expr(1)})


def test_interior_products():
    eta = OneForm(COORDS, {s: to_expr(1), q: -to_expr(p)})
    deta = exterior_derivative(eta)
    X = VectorField(COORDS, {q: to_expr(2), p: to_expr(s), s: to_expr(p)})
    contracted = interior_two(X, deta)
    # i_X (dq^dp) = X^q dp - X^p dq.
    assert contracted.coefficient(p) == to_expr(2)
    assert contracted.coefficient(q) == -to_expr(s)
    assert interior_one(X, eta) == p - p * 2


def test_wedge_of_one_forms():
    alpha = differential(q * p, COORDS)
    beta = differential(s, COORDS)
    tau = wedge(alpha, beta)
    assert tau.coefficient(q, s) == to_expr(p)
    assert tau.coefficient(p, s) == to_expr(q)
    assert wedge(alpha, alpha).is_zero()


def test_vector_field_apply_is_directional_derivative():
    X = VectorField(COORDS, {q: to_expr(p), p: -to_expr(q)})
    assert X.apply(q * q) == 2 * q * p
    assert X.apply(q * p) == p * p - q * q


def test_form_restriction():
    eta = OneForm(COORDS, {s: to_expr(1), q: -to_expr(p)})
    sub = eta.restricted((q, s))
    assert sub.coords == (q, s)
    assert sub.coefficient(q) == -to_expr(p)


def test_component_outside_chart_rejected():
    other = Symbol("w", "parameter")
    with pytest.raises(ValueError):
        OneForm(COORDS, {other: to_expr(1)})
    with pytest.raises(ValueError):
        VectorField(COORDS, {other: to_expr(1)})
