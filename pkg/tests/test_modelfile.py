"""Model-file parsing and bundle construction."""

from fractions import Fraction

import pytest

from contactmech.errors import HamiltonianMismatchError, ModelFileError
from contactmech.modelfile import (
    build_bundle,
    fixture_path,
    initial_state,
    load_model_file,
    parse_model_text,
)
from contactmech.symexpr import is_zero

PENDULUM_EXPLICIT_H = """
name: pendulum
coordinates: r theta mu
parameters: m=1 g=49/5 l=1 gamma=1/10
lagrangian: 1/2*m*(v_r^2 + r^2*v_theta^2) - m*g*(l - r*cos(theta)) + mu*(r - l) - gamma*s
hamiltonian: 1/(2*m)*(p_r^2 + p_theta^2/r^2) + m*g*(l - r*cos(theta)) - mu*(r - l) + gamma*s
"""


def test_fixture_files_parse():
    for name in ("pendulum", "cawley", "oscillator", "free_particle"):
        spec = load_model_file(fixture_path(f"{name}.model"))
        assert spec.lagrangian_text


def test_pendulum_fixture_contents():
    spec = load_model_file(fixture_path("pendulum.model"))
    assert spec.coordinates == ["r", "theta", "mu"]
    assert spec.parameters["g"] == Fraction(49, 5)
    assert spec.simulate is not None
    assert spec.simulate.step == pytest.approx(0.001)
    assert spec.simulate.horizon == pytest.approx(10.0)


def test_explicit_hamiltonian_matches_derived(pendulum):
    bundle = build_bundle(parse_model_text(PENDULUM_EXPLICIT_H))
    assert is_zero(bundle.hamiltonian - pendulum.hamiltonian)


def test_wrong_hamiltonian_rejected():
    text = PENDULUM_EXPLICIT_H.replace("+ gamma*s", "+ 2*gamma*s")
    with pytest.raises(HamiltonianMismatchError):
        build_bundle(parse_model_text(text))


def test_missing_keys_rejected():
    with pytest.raises(ModelFileError):
        parse_model_text("name: x\ncoordinates: q")
    with pytest.raises(ModelFileError):
        parse_model_text("name: x\nlagrangian: 0")


def test_bad_names_rejected():
    with pytest.raises(ModelFileError):
        parse_model_text("name: x\ncoordinates: sin\nlagrangian: 0")
    with pytest.raises(ModelFileError):
        parse_model_text(
            "name: x\ncoordinates: q\nparameters: 2bad=1\nlagrangian: v_q"
        )
    with pytest.raises(ModelFileError):
        parse_model_text(
            "name: x\ncoordinates: q\nparameters: k\nlagrangian: v_q"
        )


def test_unknown_symbol_in_lagrangian():
    with pytest.raises(ModelFileError) as err:
        build_bundle(
            parse_model_text("name: x\ncoordinates: q\nlagrangian: v_q + w")
        )
    assert "w" in str(err.value)


def test_simulate_block_validation():
    base = "name: x\ncoordinates: q\nlagrangian: 1/2*v_q^2\n\n[simulate]\n"
    with pytest.raises(ModelFileError):
        parse_model_text(base + "q: 0\nv_q: 0\ns: 0\nh: 1/100")
    with pytest.raises(ModelFileError):
        parse_model_text(base + "q: 0\nv_q: 0\ns: 0\nh: 0\nT: 1")
    spec = parse_model_text(base + "q: 0\nv_q: 0\ns: 0\nh: 1/100\nT: 1")
    assert spec.simulate.step == pytest.approx(0.01)


def test_initial_state_evaluates_parameter_expressions():
    spec = load_model_file(fixture_path("pendulum.model"))
    bundle = build_bundle(spec)
    state = initial_state(bundle)
    names = [c.name for c in bundle.chart.coordinates]
    import math

    mu_value = state[names.index("mu")]
    assert mu_value == pytest.approx(-(49 / 5) * math.cos(0.2), rel=1e-12)


def test_initial_state_rejects_unknown_and_missing_entries():
    base = "name: x\ncoordinates: q\nlagrangian: 1/2*v_q^2\n\n[simulate]\n"
    spec = parse_model_text(base + "q: 0\nv_q: 0\ns: 0\nbogus: 1\nh: 1/100\nT: 1")
    with pytest.raises(ModelFileError):
        initial_state(build_bundle(spec))
    spec = parse_model_text(base + "q: 0\ns: 0\nh: 1/100\nT: 1")
    with pytest.raises(ModelFileError):
        initial_state(build_bundle(spec))


def test_non_affine_legendre_needs_explicit_hamiltonian():
    text = "name: quartic\ncoordinates: q\nlagrangian: v_q^4/4"
    with pytest.raises(ModelFileError):
        build_bundle(parse_model_text(text))


def test_comments_and_blank_lines_ignored():
    text = """
# header comment
name: x   # trailing comment
coordinates: q

lagrangian: 1/2*v_q^2
"""
    spec = parse_model_text(text)
    assert spec.name == "x"
