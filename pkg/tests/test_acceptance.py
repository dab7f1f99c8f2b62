"""Acceptance suite: one PASS/FAIL line per criterion.

The lines are printed as each criterion finishes (visible with ``-s``) and
repeated in the terminal summary of every pytest run that collects this file.
"""

import pytest

from levyheat.harness.acceptance import CRITERIA, run_all

RESULTS = {}


@pytest.fixture(scope="module")
def results():
    out = {}
    for r in run_all():
        print(r.line(), flush=True)
        out[r.number] = r
    RESULTS.update(out)
    return out


@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(results, number):
    r = results[number]
    assert r.passed, r.line()


def test_every_criterion_reported(results):
    assert sorted(results) == sorted(CRITERIA) == list(range(1, 13))
