#!/usr/bin/env python3
"""
Tests for the verification pipeline: every property suite passes for the
reference material and the quick run is deterministic.
"""

import pytest

from config.settings import Settings
import pipelines.verifier as verifier_module
from pipelines.verifier import CheckResult, Verifier

SUITES = ("tensor.", "material.", "biot.", "criteria.", "cube.")


@pytest.fixture(scope="module")
def verifier():
    return Verifier(Settings())


def test_full_verification_passes(verifier):
    report = verifier.run(1.0, seed=42, quick=False)
    assert report.passed, [check.name for check in report.failed]
    for prefix in SUITES:
        assert any(check.name.startswith(prefix) for check in report.checks)


@pytest.mark.parametrize("M", [0.7, 2.0, 10.0])
def test_quick_verification_passes_for_other_materials(verifier, M):
    report = verifier.run(M, seed=42, quick=True)
    assert report.passed, [check.name for check in report.failed]


def test_quick_verification_is_deterministic(verifier):
    first = verifier.run(1.0, seed=7, quick=True)
    second = verifier.run(1.0, seed=7, quick=True)
    assert [check.as_dict() for check in first.checks] == [check.as_dict() for check in second.checks]


def test_check_names_are_unique(verifier):
    report = verifier.run(1.0, seed=1, quick=True)
    names = [check.name for check in report.checks]
    assert len(names) == len(set(names))


def test_failed_checks_are_reported():
    check = CheckResult("cube.example", False, 3.0, 0.0, "three failures")
    assert check.as_dict() == {
        "name": "cube.example",
        "passed": False,
        "worst": 3.0,
        "threshold": 0.0,
        "detail": "three failures",
    }


def test_newton_settings_reach_the_distinct_stretch_scans(monkeypatch):
    settings = Settings()
    settings.newton_tol = 1e-11
    settings.newton_max_iter = 60
    seen = []
    original = verifier_module.distinct_stretch_scan

    def recording_scan(M, alpha, trials, seed, cluster_tol, distinct_gap, tol, max_iter):
        seen.append((tol, max_iter))
        return original(M, alpha, trials, seed, cluster_tol, distinct_gap, tol, max_iter)

    monkeypatch.setattr(verifier_module, "distinct_stretch_scan", recording_scan)
    report = Verifier(settings).run(1.0, seed=42, quick=True)
    assert report.passed, [check.name for check in report.failed]
    assert seen == [(1e-11, 60), (1e-11, 60)]
