"""The verification battery applied to the bundled models."""

from contactmech.verify import run_checks

REGULAR_ONLY = {
    "reeb-field-defining-equations",
    "lagrangian-field-unique-second-order",
    "energy-dissipation-rate",
}
SINGULAR_ONLY = {
    "primaries-vanish-on-image",
    "kernel-directions-annihilate-hessian",
}


def test_all_checks_pass_on_fixtures(pendulum, cawley, oscillator, free_particle):
    for bundle in (pendulum, cawley, oscillator, free_particle):
        results = run_checks(bundle)
        failed = [r.name for r in results if not r.passed]
        assert failed == [], f"{bundle.source.name}: {failed}"


def test_check_selection_tracks_regularity(pendulum, oscillator):
    singular_names = {r.name for r in run_checks(pendulum)}
    regular_names = {r.name for r in run_checks(oscillator)}
    assert SINGULAR_ONLY <= singular_names
    assert not (REGULAR_ONLY & singular_names)
    assert REGULAR_ONLY <= regular_names
    assert not (SINGULAR_ONLY & regular_names)


def test_dissipation_check_reports_status(oscillator):
    results = {r.name: r for r in run_checks(oscillator)}
    assert results["dissipation-law"].detail == "zero (canonical)"
