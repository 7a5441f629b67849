"""Shared fixtures plus a per-criterion summary for the acceptance suite."""
from __future__ import annotations

import os

import pytest

from spillover_lab import figure4_table

# SPILLOVER_SMOKE=1 switches the acceptance suite to its documented 200-rep
# variant (mean-level checks only).  Default is the full 1000-replicate run.
SMOKE = os.environ.get("SPILLOVER_SMOKE") == "1"
ACCEPTANCE_REPS = 200 if SMOKE else 1000
ACCEPTANCE_SEED = 20107

_acceptance_results: list[tuple[str, str]] = []


@pytest.fixture(scope="session")
def figure4_rows():
    """One full binary-mode summary table shared by the acceptance tests."""
    rows = figure4_table(n_obs=5000, n_reps=ACCEPTANCE_REPS, master_seed=ACCEPTANCE_SEED)
    return {row.model_id: row for row in rows}


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    if report.when == "call" or (report.when == "setup" and report.failed):
        name = report.nodeid.split("::")[-1]
        _acceptance_results.append((name, report.outcome.upper()))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _acceptance_results:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    mode = "smoke (200 reps)" if SMOKE else "full (1000 reps)"
    terminalreporter.write_line(f"mode: {mode}")
    for name, outcome in _acceptance_results:
        terminalreporter.write_line(f"{outcome:>6}  {name}")
