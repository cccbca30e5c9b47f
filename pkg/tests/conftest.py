import pytest

from contactmech.modelfile import build_bundle, fixture_path, load_model_file


def _bundle(name):
    return build_bundle(load_model_file(fixture_path(name)))


@pytest.fixture(scope="session")
def pendulum():
    return _bundle("pendulum.model")


@pytest.fixture(scope="session")
def cawley():
    return _bundle("cawley.model")


@pytest.fixture(scope="session")
def oscillator():
    return _bundle("oscillator.model")


@pytest.fixture(scope="session")
def free_particle():
    return _bundle("free_particle.model")


_ACCEPTANCE_REPORTS = {}


def pytest_runtest_logreport(report):
    if report.when == "call" and "test_acceptance" in report.nodeid:
        _ACCEPTANCE_REPORTS[report.nodeid] = report.outcome


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE_REPORTS:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for nodeid in sorted(_ACCEPTANCE_REPORTS):
        outcome = _ACCEPTANCE_REPORTS[nodeid]
        name = nodeid.split("::")[-1]
        label = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"{label}  {name}")
