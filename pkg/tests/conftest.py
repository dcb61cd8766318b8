import itertools

from mobitrace.model import MeasurementRecord, RadioTechnology, SampleSeries

_counter = itertools.count()


def make_record(**overrides) -> MeasurementRecord:
    """Record factory with sane defaults for tests."""
    base = dict(
        record_id=f"t{next(_counter):06d}",
        user_id="u1",
        timestamp=1_451_865_600_000,
        download_kbps=1000.0,
        upload_kbps=200.0,
        manufacturer="Acme",
        model="One",
        os_name="android",
        os_version="6.0",
        network_operator="OpA",
        subscriber_operator="OpA",
        technology=RadioTechnology.HSPA,
    )
    base.update(overrides)
    return MeasurementRecord(**base)


def make_series(values, interval_ms=500) -> SampleSeries:
    return SampleSeries(interval_ms=interval_ms, values=tuple(values))


_ACCEPTANCE_RESULTS = []


def pytest_runtest_logreport(report):
    if report.when == "call" and "test_acceptance.py" in report.nodeid:
        _ACCEPTANCE_RESULTS.append((report.nodeid.split("::")[-1], report.passed))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE_RESULTS:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for name, ok in _ACCEPTANCE_RESULTS:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}")
