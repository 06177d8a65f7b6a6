"""Shared test configuration: acceptance bookkeeping and hypothesis profile.

Tests marked `criterion(n)` roll up into one pass/fail line per
acceptance criterion at the end of the run, so the acceptance status is
readable without grepping the full pytest output.
"""

from collections import defaultdict

import pytest
from hypothesis import settings

settings.register_profile("repo", deadline=None, derandomize=True)
settings.load_profile("repo")

_CRITERIA = {
    1: "exact identity on even symmetric prefixes",
    2: "energy bound, equality cases, sawtooth identity, sine product",
    3: "metrics and Clausen agree with independent oracles",
    4: "averaged-discrepancy ratios vs committed baselines",
    5: "stability under manual injections",
    6: "empirical lower-bound constant on even prefixes",
    7: "L2 growth floor and exact reference maxima",
    8: "known first points from the origin seed",
    9: "byte-identical outputs across thread counts",
    10: "plot rendering from metrics CSVs",
}


def pytest_configure(config):
    config.addinivalue_line(
        "markers",
        "criterion(n): test belongs to numbered acceptance criterion n",
    )
    config._criterion_of = {}
    config._criterion_outcomes = defaultdict(list)


def pytest_collection_modifyitems(config, items):
    for item in items:
        marker = item.get_closest_marker("criterion")
        if marker is not None:
            config._criterion_of[item.nodeid] = int(marker.args[0])


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    n = item.config._criterion_of.get(item.nodeid)
    if n is None:
        return
    if report.when == "call" or (report.when == "setup" and not report.passed):
        if report.failed:
            verdict = "failed"
        elif report.skipped:
            verdict = "skipped"
        else:
            verdict = "passed"
        item.config._criterion_outcomes[n].append(verdict)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    outcomes = config._criterion_outcomes
    if not outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        got = outcomes.get(n)
        if not got:
            continue
        if any(v == "failed" for v in got):
            status = "FAIL"
        elif all(v == "skipped" for v in got):
            status = "SKIP"
        else:
            status = "PASS"
        ran = sum(1 for v in got if v != "skipped")
        terminalreporter.write_line(
            f"criterion {n:2d}: {status}  ({ran} checks)  {_CRITERIA[n]}"
        )
