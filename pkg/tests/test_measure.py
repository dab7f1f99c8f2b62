import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from levyheat import measure as M


def test_tail_mass_closed_forms(cauchy_spec, dyadic_spec):
    assert math.isclose(M.tail_mass(cauchy_spec, 1.0), 2.0, rel_tol=1e-10)
    assert math.isclose(M.tail_mass(dyadic_spec, 1.0), 2.0, rel_tol=1e-12)
    assert M.tail_mass(cauchy_spec, 1e12) < 1e-10


def test_concentration_h_cauchy(cauchy_spec):
    for r in (0.1, 1.0, 7.0):
        assert math.isclose(M.concentration_H(cauchy_spec, r), 4.0 / r, rel_tol=1e-9)


def test_concentration_h_stablelog_against_mpmath(stablelog_spec):
    Q = lambda s: s ** -2.2 * mpmath.log(1 + 1 / s) ** -0.5
    mpmath.mp.dps = 30
    inner = mpmath.quad(lambda s: s**2 * Q(s), [0, 1])
    outer = mpmath.quad(Q, [1, mpmath.inf])
    expected = float(2 * (inner + outer))
    assert math.isclose(M.concentration_H(stablelog_spec, 1.0), expected, rel_tol=1e-8)


def test_concentration_h_decreasing_and_blows_up(cauchy_spec, stablelog_spec, dyadic_spec):
    r = np.logspace(-3, 3, 25)
    for spec in (cauchy_spec, stablelog_spec, dyadic_spec, M.tempered_poly(1, 0.5, 1, 1)):
        H = np.array([M.concentration_H(spec, ri) for ri in r])
        assert np.all(np.diff(H) < 0)
        assert M.concentration_H(spec, 1e-6) > 1e3 * M.concentration_H(spec, 1.0)


@pytest.mark.parametrize("r", [0.05, 0.5, 3.0])
def test_h_between_tail_and_tail_plus_moment(stablelog_spec, r):
    tail = M.tail_mass(stablelog_spec, r)
    mom = M.truncated_second_moment(stablelog_spec, r) / r**2
    H = M.concentration_H(stablelog_spec, r)
    assert tail <= H <= (tail + mom) * (1 + 1e-8)
    assert math.isclose(H, tail + mom, rel_tol=1e-8)


def test_drift_correction_cases(cauchy_spec):
    assert np.allclose(M.drift_correction(cauchy_spec, 0.3), 0.0)
    drifted = M.pure_stable(1.0, drift=(0.3,))
    assert M.drift_correction(drifted, 1.0)[0] == 0.3
    one_sided = M.pure_stable(1.0, spherical=M.atoms([[1.0]], [1.0]))
    assert math.isclose(M.drift_correction(one_sided, 0.5)[0], -math.log(2), rel_tol=1e-9)


@given(st.floats(0.01, 50.0))
@settings(max_examples=25, deadline=None)
def test_drift_correction_odd_under_reflection(r):
    spec = M.stable_log(1.2, 1.0, 0.5, spherical=M.atoms([[1.0], [-1.0]], [1.0, 0.4]))
    a = M.drift_correction(spec, r)
    b = M.drift_correction(spec.reflected(), r)
    assert np.allclose(a, -b, rtol=1e-9, atol=1e-12)


def test_ball_mass_closed_form(cauchy_spec):
    assert math.isclose(M.ball_mass(cauchy_spec, [2.0], 0.5), 4.0 / 15.0, rel_tol=1e-9)
    assert math.isclose(M.interval_mass(cauchy_spec, 1.0, 2.0), 0.5, rel_tol=1e-9)


def test_profile_bound_cauchy(cauchy_spec):
    rep = M.check_profile_bound(cauchy_spec, lambda s: s**-2.0, 1.0)
    assert rep.holds
    assert rep["profile_bound"].fitted_constant >= 0.5


def test_profile_bound_dyadic_single_atom(dyadic_spec):
    assert math.isclose(M.ball_mass(dyadic_spec, [0.5], 1e-9), 2.0, rel_tol=1e-12)
    rep = M.check_profile_bound(dyadic_spec, lambda s: s**-1.0, 0.0)
    assert rep.holds
    assert rep["profile_bound"].fitted_constant >= 1.0


def test_profile_bound_refinement_stable(stablelog_spec):
    e = M.check_profile_bound(stablelog_spec)["profile_bound"]
    assert abs(e.details["M1_refined"] / e.details["M1"] - 1) <= 0.05


def test_tech_assumption_and_lower_bound(stablelog_spec):
    from levyheat.symbol import SymbolEvaluator

    ev = SymbolEvaluator().fit(stablelog_spec)
    rep = M.check_tech_assumption(stablelog_spec, None, ev)
    e = rep["tech_assumption"]
    assert np.isfinite(e.fitted_constant)
    assert e.details["M2_refined"] / e.details["M2"] <= 1.5
    low = M.check_lower_measure_bound(stablelog_spec)
    assert low.holds and low.entries[0].fitted_constant > 0


def test_invalid_specs_rejected():
    with pytest.raises(ValueError):
        M.pure_stable(2.5)
    with pytest.raises(ValueError):
        M.dyadic(3.0, 1.0)
    with pytest.raises(ValueError):
        M.atoms([[2.0]], [1.0])
