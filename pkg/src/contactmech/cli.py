"""Command surface: analyze | constraints | evolution | simulate | verify.

Reports are deterministic JSON (sorted keys, canonical expression text);
trajectories go to CSV with 17 significant digits.  Exit codes: 0 success,
2 verification/run failure, 3 input error, 4 undecidable pivot or missing
user primaries.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Dict, List, Optional

from .constraints import lagrangian_chain_via_k, run_constraint_algorithm
from .errors import (
    ContactMechError,
    ModelFileError,
    StepRejectedError,
)
from .evolution import (
    build_k_direct,
    build_k_tulczyjew,
    build_k_via_bundle_iso,
    decompose_k,
    projectability_check,
    solve_multipliers,
)
from .hamiltonian import reeb_existence
from .lagrangian import hessian, reeb_field
from .modelfile import ModelBundle, build_bundle, load_model_file
from .simulate import simulate
from .symexpr import (
    DEFAULT_SEED,
    ExprSyntaxError,
    PivotAmbiguityError,
    SymexprError,
    UnknownSymbolError,
    is_zero,
    to_text,
)
from .verify import run_checks

MULTIPLIER_TEXT_CAP = 400

EXIT_OK = 0
EXIT_VERIFICATION = 2
EXIT_INPUT = 3
EXIT_UNDECIDED = 4


def _field_dict(field) -> Dict[str, str]:
    return {c.name: to_text(field.component(c)) for c in field.coords}


def _oneform_dict(form) -> Dict[str, str]:
    return {c.name: to_text(form.coefficient(c)) for c in form.coords}


def _emit(report: dict, json_path: Optional[str]) -> None:
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if json_path:
        with open(json_path, "w", encoding="utf-8") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)


def cmd_analyze(bundle: ModelBundle, args) -> int:
    model = bundle.model
    from .lagrangian import contact_one_form

    report = {
        "model": bundle.source.name,
        "coordinates": [c.name for c in model.chart.positions],
        "parameters": {k: str(v) for k, v in bundle.source.parameters.items()},
        "energy": to_text(bundle.energy),
        "contact_one_form": _oneform_dict(contact_one_form(model)),
        "legendre_bindings": {
            p.name: to_text(bundle.fl.bindings[p]) for p in bundle.fl.target.fibers
        },
        "hessian": [[to_text(e) for e in row] for row in hessian(model)],
        "rank": bundle.regularity.rank,
        "regular": bundle.regularity.regular,
        "kernel_basis": [
            [to_text(e) for e in vec] for vec in bundle.regularity.kernel_basis
        ],
        "hamiltonian": to_text(bundle.hamiltonian),
        "primaries": [to_text(p) for p in bundle.primaries],
        "needs_user_primaries": bundle.needs_user_primaries,
    }
    if bundle.regularity.regular:
        report["reeb_field"] = _field_dict(reeb_field(model, seed=args.seed))
    elif bundle.surface is not None:
        existence = reeb_existence(bundle.surface.eta0, seed=args.seed)
        report["reeb_on_surface"] = {
            "kind": existence.kind,
            "free_parameters": [f.name for f in existence.free_parameters],
        }
    _emit(report, args.json)
    if bundle.needs_user_primaries:
        return EXIT_UNDECIDED
    return EXIT_OK


def _needs_primaries_report(bundle: ModelBundle, args) -> int:
    _emit(
        {
            "model": bundle.source.name,
            "needs_user_primaries": True,
            "instructions": (
                "automatic primary-constraint discovery failed; add a "
                "[primaries] section with one phase-space constraint per line"
            ),
        },
        args.json,
    )
    return EXIT_UNDECIDED


def cmd_constraints(bundle: ModelBundle, args) -> int:
    if bundle.needs_user_primaries:
        return _needs_primaries_report(bundle, args)
    chain = run_constraint_algorithm(
        bundle.hamiltonian,
        bundle.eta_for_dynamics(),
        bundle.primaries,
        max_iter=args.max_iter,
        seed=args.seed,
    )
    K = build_k_direct(bundle.model)
    lag = lagrangian_chain_via_k(K, chain, seed=args.seed)
    multipliers = {}
    for sym, value in chain.determined_multipliers.items():
        text = to_text(value)
        if len(text) > MULTIPLIER_TEXT_CAP:
            multipliers[sym.name] = f"determined ({len(text)} chars, elided)"
        else:
            multipliers[sym.name] = text
    verdicts = {}
    for entry in chain.hamiltonian_entries():
        result = projectability_check(
            bundle.model, bundle.hamiltonian, bundle.primaries, entry.function,
            seed=args.seed,
        )
        verdicts[to_text(entry.normalized)] = (
            "projectable" if result.projectable else "obstructed"
        )
    report = {
        "model": bundle.source.name,
        "status": chain.status,
        "hamiltonian_chain": [
            {
                "provenance": e.provenance.describe(),
                "function": to_text(e.function),
                "normalized": to_text(e.normalized),
            }
            for e in chain.hamiltonian_entries()
        ],
        "determined_multipliers": multipliers,
        "undetermined_free_functions": [f.name for f in chain.free_parameters],
        "lagrangian_chain": [
            {
                "provenance": e.provenance.describe(),
                "function": to_text(e.function),
                "normalized": to_text(e.normalized),
            }
            for e in lag
        ],
        "projectability": verdicts,
    }
    _emit(report, args.json)
    return EXIT_OK if chain.status == "terminated" else EXIT_VERIFICATION


def cmd_evolution(bundle: ModelBundle, args) -> int:
    if bundle.needs_user_primaries:
        return _needs_primaries_report(bundle, args)
    model = bundle.model
    k_direct = build_k_direct(model)
    k_iso = build_k_via_bundle_iso(model, seed=args.seed)
    k_tul = build_k_tulczyjew(model)

    def pack(K):
        return {
            "a": [to_text(x) for x in K.a],
            "b": [to_text(x) for x in K.b],
            "c": to_text(K.c),
        }

    def agrees(K) -> bool:
        return all(
            is_zero(x - y, seed=args.seed)
            for x, y in zip(
                K.a + K.b + (K.c,), k_direct.a + k_direct.b + (k_direct.c,)
            )
        )

    multipliers = solve_multipliers(
        model, bundle.hamiltonian, bundle.primaries, seed=args.seed
    )
    residuals = decompose_k(model, bundle.hamiltonian, bundle.primaries, seed=args.seed)
    decomposition_ok = all(is_zero(r, seed=args.seed) for r in residuals)
    report = {
        "model": bundle.source.name,
        "direct": pack(k_direct),
        "bundle_iso": pack(k_iso),
        "tulczyjew": pack(k_tul),
        "agreement": {
            "bundle_iso": agrees(k_iso),
            "tulczyjew": agrees(k_tul),
        },
        "multipliers": [to_text(x) for x in multipliers.lambdas],
        "decomposition_residuals_vanish": decomposition_ok,
    }
    _emit(report, args.json)
    ok = decomposition_ok and report["agreement"]["bundle_iso"] and report[
        "agreement"
    ]["tulczyjew"]
    return EXIT_OK if ok else EXIT_VERIFICATION


def cmd_simulate(bundle: ModelBundle, args) -> int:
    trajectory = simulate(bundle, seed=args.seed, max_iter=args.max_iter)
    if args.csv:
        trajectory.write_csv(args.csv)
    maxima = {
        name: max(abs(v) for v in trajectory.monitor_series(name))
        for name in trajectory.monitor_names
    }
    report = {
        "model": bundle.source.name,
        "rows": len(trajectory.times),
        "final_time": f"{trajectory.times[-1]:.17g}",
        "final_state": {
            name: f"{value:.17g}"
            for name, value in zip(trajectory.state_names, trajectory.states[-1])
        },
        "monitor_maxima": {k: f"{v:.17g}" for k, v in maxima.items()},
        "csv": args.csv or "",
    }
    _emit(report, args.json)
    return EXIT_OK


def cmd_verify(bundle: ModelBundle, args) -> int:
    results = run_checks(bundle, seed=args.seed, max_iter=args.max_iter)
    for result in results:
        line = "PASS" if result.passed else "FAIL"
        detail = f"  ({result.detail})" if result.detail else ""
        print(f"{line}  {result.name}{detail}")
    report = {
        "model": bundle.source.name,
        "checks": [
            {"name": r.name, "passed": r.passed, "detail": r.detail} for r in results
        ],
        "all_passed": all(r.passed for r in results),
    }
    if args.json:
        _emit(report, args.json)
    return EXIT_OK if report["all_passed"] else EXIT_VERIFICATION


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="contactmech",
        description="Contact-mechanics toolkit: analysis, constraint chains, "
        "evolution operator, simulation, verification.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, handler in (
        ("analyze", cmd_analyze),
        ("constraints", cmd_constraints),
        ("evolution", cmd_evolution),
        ("simulate", cmd_simulate),
        ("verify", cmd_verify),
    ):
        p = sub.add_parser(name)
        p.add_argument("file", help="model file path")
        p.add_argument("--seed", type=int, default=DEFAULT_SEED)
        p.add_argument("--json", default=None, help="write the JSON report here")
        p.add_argument("--csv", default=None, help="trajectory CSV path")
        p.add_argument("--max-iter", type=int, default=12, dest="max_iter")
        p.set_defaults(handler=handler)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        spec = load_model_file(args.file)
        bundle = build_bundle(spec, seed=args.seed)
        return args.handler(bundle, args)
    except PivotAmbiguityError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_UNDECIDED
    except StepRejectedError as err:
        print(f"error: trajectory rejected: {err}", file=sys.stderr)
        return EXIT_VERIFICATION
    except (ModelFileError, ExprSyntaxError, UnknownSymbolError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_INPUT
    except (ContactMechError, SymexprError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
