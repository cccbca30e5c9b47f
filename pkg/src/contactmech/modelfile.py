"""Model-file ingestion: a line-oriented key/value format with sections.

Top-level keys::

    name: damped-oscillator
    coordinates: q            # ordered coordinate names
    parameters: m=1 gamma=1/2 # numeric defaults, exact rationals
    lagrangian: <DSL text over q, v_<q>, s and the parameters>
    hamiltonian: <optional DSL over q, p_<q>, s>   # else derived

Sections: ``[primaries]`` holds one phase-space DSL constraint per line
(used when automatic discovery gives up); ``[simulate]`` holds per-symbol
initial values (DSL over parameters, evaluated numerically) plus ``h`` and
``T``.  ``#`` starts a comment; blank lines separate nothing in particular.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional

from .errors import HamiltonianMismatchError, ModelFileError
from .geometry import CoordinateChart, velocity_chart
from .hamiltonian import RestrictedSurface
from .lagrangian import (
    LagrangianModel,
    LegendreMap,
    Regularity,
    classify_regularity,
    energy,
    legendre_map,
)
from .constraints import PrimaryConstraints, primary_constraints
from .symexpr import (
    AffinityError,
    Expr,
    ExprSyntaxError,
    Symbol,
    UnknownSymbolError,
    ZERO,
    evaluate,
    free_symbols,
    is_zero,
    parse,
    solve_linear,
    substitute,
    to_expr,
)

_RESERVED = {"sin", "cos", "exp", "ln", "s", "h", "T"}


@dataclass
class SimulateBlock:
    initial_text: Dict[str, str]
    step: float
    horizon: float


@dataclass
class ModelFile:
    name: str
    coordinates: List[str]
    parameters: Dict[str, Fraction]
    lagrangian_text: str
    hamiltonian_text: Optional[str] = None
    user_primaries: List[str] = field(default_factory=list)
    simulate: Optional[SimulateBlock] = None


def parse_model_text(text: str) -> ModelFile:
    keys: Dict[str, str] = {}
    sections: Dict[str, List[str]] = {}
    current: Optional[str] = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        if line.strip().startswith("[") and line.strip().endswith("]"):
            current = line.strip()[1:-1].strip().lower()
            sections.setdefault(current, [])
            continue
        if current is None:
            if ":" not in line:
                raise ModelFileError(f"expected 'key: value', got {line!r}", lineno)
            key, value = line.split(":", 1)
            keys[key.strip().lower()] = value.strip()
        else:
            sections[current].append(line.strip())

    for required in ("name", "coordinates", "lagrangian"):
        if required not in keys:
            raise ModelFileError(f"missing required key {required!r}")
    coordinates = keys["coordinates"].split()
    if not coordinates:
        raise ModelFileError("no coordinates given")
    for c in coordinates:
        if c in _RESERVED or not c.isidentifier():
            raise ModelFileError(f"bad coordinate name {c!r}")
    parameters: Dict[str, Fraction] = {}
    for item in keys.get("parameters", "").split():
        if "=" not in item:
            raise ModelFileError(f"parameter {item!r} needs a numeric default")
        pname, pval = item.split("=", 1)
        if pname in _RESERVED or not pname.isidentifier():
            raise ModelFileError(f"bad parameter name {pname!r}")
        try:
            parameters[pname] = Fraction(pval)
        except (ValueError, ZeroDivisionError) as err:
            raise ModelFileError(f"bad parameter value {pval!r}: {err}")

    simulate = None
    if "simulate" in sections:
        entries: Dict[str, str] = {}
        for line in sections["simulate"]:
            if ":" not in line:
                raise ModelFileError(f"bad simulate entry {line!r}")
            k, v = line.split(":", 1)
            entries[k.strip()] = v.strip()
        try:
            step = float(Fraction(entries.pop("h")))
            horizon = float(Fraction(entries.pop("T")))
        except KeyError as err:
            raise ModelFileError(f"simulate block needs {err.args[0]!r}")
        except (ValueError, ZeroDivisionError) as err:
            raise ModelFileError(f"bad simulate number: {err}")
        if step <= 0 or horizon <= 0:
            raise ModelFileError("simulate needs positive h and T")
        simulate = SimulateBlock(entries, step, horizon)

    return ModelFile(
        name=keys["name"],
        coordinates=coordinates,
        parameters=parameters,
        lagrangian_text=keys["lagrangian"],
        hamiltonian_text=keys.get("hamiltonian"),
        user_primaries=sections.get("primaries", []),
        simulate=simulate,
    )


def load_model_file(path: str) -> ModelFile:
    with open(path, "r", encoding="utf-8") as handle:
        return parse_model_text(handle.read())


def fixture_path(name: str) -> str:
    """Path of a model file shipped with the package."""
    from importlib.resources import files

    return str(files("contactmech").joinpath("fixtures", name))


@dataclass
class ModelBundle:
    """Everything derived from a model file that the commands share."""

    source: ModelFile
    model: LagrangianModel
    fl: LegendreMap
    regularity: Regularity
    energy: Expr
    hamiltonian: Expr
    primaries: List[Expr]
    surface: Optional[RestrictedSurface]
    needs_user_primaries: bool
    parameter_values: Dict[Symbol, Fraction]

    @property
    def chart(self) -> CoordinateChart:
        return self.model.chart

    def eta_for_dynamics(self):
        """The one-form the constraint algorithm runs on."""
        if self.surface is not None:
            return self.surface.eta0_ambient()
        from .lagrangian import canonical_eta

        return canonical_eta(self.fl.target)


def derive_hamiltonian(model: LagrangianModel, fl: LegendreMap, seed=None) -> Expr:
    """Invert an affine Legendre map and push the energy to phase space.

    Velocities the map cannot determine must cancel from the energy (they
    always do when the energy is projectable); otherwise this fails and the
    model file must supply a Hamiltonian.
    """
    kw = {} if seed is None else {"seed": seed}
    eqs = [p - fl.bindings[p] for p in fl.target.fibers]
    result = solve_linear(eqs, list(model.chart.fibers), free_prefix="_w", **kw)
    inverse = {v: result.particular[v] for v in model.chart.fibers}
    H = substitute(energy(model), inverse)
    leftover = free_symbols(H) & set(result.free_parameters)
    if leftover:
        raise HamiltonianMismatchError(
            "energy does not project through the Legendre map; "
            "supply 'hamiltonian:' in the model file"
        )
    return H


def build_bundle(source: ModelFile, seed=None) -> ModelBundle:
    params = tuple(Symbol(n, "parameter") for n in source.parameters)
    chart = velocity_chart(source.coordinates, params)
    table = chart.symbol_table()
    try:
        L = parse(source.lagrangian_text, table)
    except (ExprSyntaxError, UnknownSymbolError) as err:
        raise ModelFileError(f"lagrangian: {err}")
    model = LagrangianModel(chart, L, source.name)
    fl = legendre_map(model)
    regularity = classify_regularity(model, seed=seed)
    E = energy(model)

    phase_table = fl.target.symbol_table()
    if source.hamiltonian_text is not None:
        try:
            H = parse(source.hamiltonian_text, phase_table)
        except (ExprSyntaxError, UnknownSymbolError) as err:
            raise ModelFileError(f"hamiltonian: {err}")
        kw = {} if seed is None else {"seed": seed}
        if not is_zero(fl.pullback(H) - E, **kw):
            raise HamiltonianMismatchError(
                "hamiltonian does not pull back to the energy"
            )
    else:
        try:
            H = derive_hamiltonian(model, fl, seed=seed)
        except AffinityError:
            raise ModelFileError(
                "Legendre map is not affine in the velocities; "
                "supply 'hamiltonian:' in the model file"
            )

    needs_input = False
    if source.user_primaries:
        primaries = []
        kw = {} if seed is None else {"seed": seed}
        for text in source.user_primaries:
            try:
                phi = parse(text, phase_table)
            except (ExprSyntaxError, UnknownSymbolError) as err:
                raise ModelFileError(f"primaries: {err}")
            if not is_zero(fl.pullback(phi), **kw):
                raise ModelFileError(
                    f"primary {text!r} does not vanish on the Legendre image"
                )
            primaries.append(phi)
    else:
        found = primary_constraints(model, fl, seed=seed)
        primaries = found.constraints
        needs_input = found.needs_user_input

    surface = None
    if primaries:
        surface = RestrictedSurface.from_primaries(fl.target, primaries, seed=seed)

    values = {Symbol(n, "parameter"): v for n, v in source.parameters.items()}
    return ModelBundle(
        source=source,
        model=model,
        fl=fl,
        regularity=regularity,
        energy=E,
        hamiltonian=H,
        primaries=primaries,
        surface=surface,
        needs_user_primaries=needs_input,
        parameter_values=values,
    )


def initial_state(bundle: ModelBundle) -> List[float]:
    """Numeric initial point (q, v, s) from the simulate block."""
    spec = bundle.source
    if spec.simulate is None:
        raise ModelFileError("model file has no [simulate] section")
    chart = bundle.chart
    param_table = {p.name: p for p in chart.parameters}
    env = dict(bundle.parameter_values)
    out = []
    for sym in chart.coordinates:
        text = spec.simulate.initial_text.get(sym.name)
        if text is None:
            raise ModelFileError(f"simulate block misses initial value for {sym.name}")
        try:
            value = evaluate(parse(text, param_table), env)
        except (ExprSyntaxError, UnknownSymbolError) as err:
            raise ModelFileError(f"simulate {sym.name}: {err}")
        out.append(float(value))
    unknown = set(spec.simulate.initial_text) - {c.name for c in chart.coordinates}
    if unknown:
        raise ModelFileError(f"simulate block has unknown entries: {sorted(unknown)}")
    return out
