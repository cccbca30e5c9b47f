"""Coordinate charts, differential forms and vector fields over them.

Forms and fields are sparse coefficient tables of expressions over an
ordered coordinate tuple.  Only the machinery needed by contact mechanics is
implemented: one- and two-forms, exterior derivative, interior products and
wedges of one-forms.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .symexpr import Expr, Symbol, ZERO, diff, is_zero, to_expr

Coords = Tuple[Symbol, ...]


@dataclass(frozen=True)
class CoordinateChart:
    """A global chart: positions, fibers (velocities or momenta), one action."""

    positions: Tuple[Symbol, ...]
    fibers: Tuple[Symbol, ...]
    action: Symbol
    parameters: Tuple[Symbol, ...] = ()
    kind: str = "velocity"

    def __post_init__(self):
        if self.kind not in ("velocity", "phase"):
            raise ValueError(f"unknown chart kind {self.kind!r}")
        if len(self.positions) != len(self.fibers):
            raise ValueError("positions and fibers must have equal counts")
        names = [s.name for s in self.coordinates + self.parameters]
        if len(set(names)) != len(names):
            raise ValueError("chart symbols must have distinct names")
        if self.action.role != "action":
            raise ValueError("action symbol must carry the action role")

    @property
    def coordinates(self) -> Coords:
        return self.positions + self.fibers + (self.action,)

    @property
    def dof(self) -> int:
        return len(self.positions)

    def symbol_table(self) -> Dict[str, Symbol]:
        return {s.name: s for s in self.coordinates + self.parameters}

    def index_of(self, sym: Symbol) -> int:
        return self.coordinates.index(sym)


def velocity_chart(
    names: Sequence[str], parameters: Sequence[Symbol] = (), action: str = "s"
) -> CoordinateChart:
    """Chart (q^i, v_<q>^i, s) from coordinate names."""
    qs = tuple(Symbol(n, "position", i) for i, n in enumerate(names))
    vs = tuple(Symbol(f"v_{n}", "velocity", i) for i, n in enumerate(names))
    return CoordinateChart(qs, vs, Symbol(action, "action"), tuple(parameters), "velocity")


def phase_chart_for(chart: CoordinateChart) -> CoordinateChart:
    """The momentum-side partner of a velocity chart (same q^i, s, parameters)."""
    if chart.kind != "velocity":
        raise ValueError("expected a velocity chart")
    ps = tuple(
        Symbol(f"p_{q.name}", "momentum", i) for i, q in enumerate(chart.positions)
    )
    return CoordinateChart(chart.positions, ps, chart.action, chart.parameters, "phase")


class OneForm:
    """Sparse coefficient table over d<coordinate> covectors."""

    def __init__(self, coords: Coords, coeffs: Dict[Symbol, Expr]):
        self.coords = tuple(coords)
        self.coeffs = {
            c: to_expr(e)
            for c, e in coeffs.items()
            if not to_expr(e).is_zero_canonical()
        }
        for c in self.coeffs:
            if c not in self.coords:
                raise ValueError(f"coefficient on {c!r} outside the chart")

    def coefficient(self, c: Symbol) -> Expr:
        return self.coeffs.get(c, ZERO)

    def __add__(self, other: "OneForm") -> "OneForm":
        out = dict(self.coeffs)
        for c, e in other.coeffs.items():
            out[c] = out.get(c, ZERO) + e
        return OneForm(self.coords, out)

    def __sub__(self, other: "OneForm") -> "OneForm":
        return self + other.scaled(-1)

    def scaled(self, factor) -> "OneForm":
        f = to_expr(factor)
        return OneForm(self.coords, {c: f * e for c, e in self.coeffs.items()})

    def is_zero(self, seed=None) -> bool:
        kw = {} if seed is None else {"seed": seed}
        return all(is_zero(e, **kw) for e in self.coeffs.values())

    def restricted(self, coords: Coords) -> "OneForm":
        """The same form read on a sub-collection of coordinates."""
        return OneForm(coords, {c: e for c, e in self.coeffs.items() if c in coords})

    def __repr__(self):
        if not self.coeffs:
            return "0"
        parts = [f"({e})*d{c.name}" for c, e in sorted(self.coeffs.items(), key=lambda kv: self.coords.index(kv[0]))]
        return " + ".join(parts)


class TwoForm:
    """Antisymmetric coefficient table; stores the strictly upper triangle."""

    def __init__(self, coords: Coords, upper: Dict[Tuple[Symbol, Symbol], Expr]):
        self.coords = tuple(coords)
        order = {c: i for i, c in enumerate(self.coords)}
        table: Dict[Tuple[Symbol, Symbol], Expr] = {}
        for (a, b), e in upper.items():
            e = to_expr(e)
            if a == b:
                if not e.is_zero_canonical():
                    raise ValueError("diagonal two-form coefficient must vanish")
                continue
            if order[a] > order[b]:
                a, b, e = b, a, -e
            if (a, b) in table:
                e = table[(a, b)] + e
            if e.is_zero_canonical():
                table.pop((a, b), None)
            else:
                table[(a, b)] = e
        self.upper = table

    def coefficient(self, a: Symbol, b: Symbol) -> Expr:
        if a == b:
            return ZERO
        order = {c: i for i, c in enumerate(self.coords)}
        if order[a] > order[b]:
            return -self.upper.get((b, a), ZERO)
        return self.upper.get((a, b), ZERO)

    def full_table(self) -> Dict[Tuple[Symbol, Symbol], Expr]:
        out = {}
        for a in self.coords:
            for b in self.coords:
                out[(a, b)] = self.coefficient(a, b)
        return out

    def __add__(self, other: "TwoForm") -> "TwoForm":
        out = dict(self.upper)
        for key, e in other.upper.items():
            out[key] = out.get(key, ZERO) + e
        return TwoForm(self.coords, out)

    def __sub__(self, other: "TwoForm") -> "TwoForm":
        return self + other.scaled(-1)

    def scaled(self, factor) -> "TwoForm":
        f = to_expr(factor)
        return TwoForm(self.coords, {k: f * e for k, e in self.upper.items()})

    def is_zero(self, seed=None) -> bool:
        kw = {} if seed is None else {"seed": seed}
        return all(is_zero(e, **kw) for e in self.upper.values())


class VectorField:
    """Sparse component table over coordinate directions."""

    def __init__(self, coords: Coords, components: Dict[Symbol, Expr]):
        self.coords = tuple(coords)
        self.components = {
            c: to_expr(e)
            for c, e in components.items()
            if not to_expr(e).is_zero_canonical()
        }
        for c in self.components:
            if c not in self.coords:
                raise ValueError(f"component on {c!r} outside the chart")

    def component(self, c: Symbol) -> Expr:
        return self.components.get(c, ZERO)

    def apply(self, f) -> Expr:
        """Directional derivative X(f)."""
        f = to_expr(f)
        total = ZERO
        for c, e in self.components.items():
            total = total + e * diff(f, c)
        return total

    def __add__(self, other: "VectorField") -> "VectorField":
        out = dict(self.components)
        for c, e in other.components.items():
            out[c] = out.get(c, ZERO) + e
        return VectorField(self.coords, out)

    def __sub__(self, other: "VectorField") -> "VectorField":
        return self + other.scaled(-1)

    def scaled(self, factor) -> "VectorField":
        f = to_expr(factor)
        return VectorField(self.coords, {c: f * e for c, e in self.components.items()})

    def substituted(self, bindings) -> "VectorField":
        from .symexpr import substitute

        return VectorField(
            self.coords, {c: substitute(e, bindings) for c, e in self.components.items()}
        )

    def __repr__(self):
        if not self.components:
            return "0"
        parts = [
            f"({e})*d/d{c.name}"
            for c, e in sorted(
                self.components.items(), key=lambda kv: self.coords.index(kv[0])
            )
        ]
        return " + ".join(parts)


def differential(f, coords: Coords) -> OneForm:
    """The exact one-form df on the given chart."""
    f = to_expr(f)
    return OneForm(coords, {c: diff(f, c) for c in coords})


def exterior_derivative(omega: OneForm) -> TwoForm:
    coords = omega.coords
    upper = {}
    for i, a in enumerate(coords):
        for b in coords[i + 1 :]:
            upper[(a, b)] = diff(omega.coefficient(b), a) - diff(
                omega.coefficient(a), b
            )
    return TwoForm(coords, upper)


def interior_two(X: VectorField, tau: TwoForm) -> OneForm:
    """i_X of a two-form: (i_X tau)_b = sum_a X^a tau[a, b]."""
    coeffs = {}
    for b in tau.coords:
        total = ZERO
        for (x, y), e in tau.upper.items():
            if y == b:
                total = total + X.component(x) * e
            elif x == b:
                total = total - X.component(y) * e
        coeffs[b] = total
    return OneForm(tau.coords, coeffs)


def interior_one(X: VectorField, omega: OneForm) -> Expr:
    total = ZERO
    for c, e in omega.coeffs.items():
        total = total + X.component(c) * e
    return total


def wedge(alpha: OneForm, beta: OneForm) -> TwoForm:
    coords = alpha.coords
    upper = {}
    for i, a in enumerate(coords):
        for b in coords[i + 1 :]:
            upper[(a, b)] = alpha.coefficient(a) * beta.coefficient(b) - alpha.coefficient(
                b
            ) * beta.coefficient(a)
    return TwoForm(coords, upper)
