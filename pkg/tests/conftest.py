import pytest

from studyatlas.fixtures import fixture_snapshot, load_fixture_inputs


def pytest_runtest_logreport(report):
    """One pass/fail line per acceptance criterion."""
    if "test_acceptance.py" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    if not name.startswith("test_"):
        return
    label = name[len("test_"):]
    if report.when == "call":
        status = "PASS" if report.passed else ("SKIP" if report.skipped else "FAIL")
    elif report.when == "setup" and report.skipped:
        status = "SKIP"
    else:
        return
    print(f"\nACCEPTANCE {label}: {status}", flush=True)


@pytest.fixture(scope="session")
def fixture_inputs():
    return load_fixture_inputs()


@pytest.fixture(scope="session")
def snapshot():
    return fixture_snapshot()
