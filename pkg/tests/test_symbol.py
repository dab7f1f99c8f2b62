import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from levyheat import measure as M
from levyheat import symbol as S
from levyheat.symbol import SymbolEvaluator, power_symbol


def test_cauchy_re_phi_is_pi_xi(cauchy_ev):
    for xi in (1.0, 10.0):
        assert math.isclose(float(np.ravel(cauchy_ev.re_phi(np.array([xi])))[0]), math.pi * xi, rel_tol=1e-6)


def test_symmetric_spec_has_no_imaginary_part(stablelog_ev):
    xi = np.logspace(-2, 2, 9)
    assert np.all(stablelog_ev.im_phi(xi) == 0)


def test_hermitian_symmetry():
    spec = M.stable_log(1.2, 1.0, 0.5, spherical=M.atoms([[1.0], [-1.0]], [1.0, 0.3]), drift=(0.2,))
    ev = SymbolEvaluator().fit(spec)
    xi = np.logspace(-2, 2, 11)
    a, b = ev.phi(xi), ev.phi(-xi)
    assert np.allclose(a, np.conj(b), rtol=1e-12, atol=1e-12)
    assert np.all(ev.re_phi(xi) >= 0)


def test_dyadic_re_phi_linear_band(dyadic_ev):
    xi = np.logspace(-3, 3, 61)
    q = dyadic_ev.re_phi(xi) / xi
    assert q.min() > 0 and q.max() / q.min() < 10


def test_power_symbol_psi_and_inverse():
    ev = power_symbol(1.5)
    r = np.logspace(-3, 3, 13)
    assert np.allclose(ev.psi(r), r**1.5, rtol=1e-10)
    s = np.logspace(-3, 3, 13)
    assert np.allclose(ev.psi_inverse(s), s ** (1 / 1.5), rtol=1e-6)
    assert np.allclose(ev.h(s), s ** (1 / 1.5), rtol=1e-6)


def test_psi_inverse_round_trip(stablelog_ev):
    s = np.logspace(-3, 3, 31)
    assert np.allclose(stablelog_ev.psi(stablelog_ev.psi_inverse(s)), s, rtol=1e-6)
    r = np.logspace(-3, 3, 31)
    assert np.all(stablelog_ev.psi_inverse(stablelog_ev.psi(r)) >= r * (1 - 1e-9))


def test_h_self_consistency(stablelog_ev):
    t = np.logspace(-3, 3, 25)
    assert np.allclose(t * stablelog_ev.psi(1.0 / stablelog_ev.h(t)), 1.0, atol=1e-6)


def test_psi_table_monotone(stablelog_ev):
    assert np.all(np.diff(stablelog_ev.psi_table_.psi) >= 0)


def test_psi_sandwich(cauchy_ev, stablelog_ev, dyadic_ev):
    for ev in (cauchy_ev, stablelog_ev, dyadic_ev):
        res = S.psi_sandwich(ev)
        assert res.passed
        assert 0 < res.constants["C8"] <= res.constants["max_ratio"] <= 2 * (1 + 1e-6)


def test_stablelog_h_asymptotics(stablelog_ev):
    a, k, b = 1.2, 1.0, 0.5
    t = np.logspace(0, 3, 13)
    q = stablelog_ev.h(t) / t ** (1 / (a - k * b))
    assert q.max() / q.min() < 10
    t = np.logspace(-4, -0.5, 13)
    q = stablelog_ev.h(t) / (t ** (1 / a) * np.log1p(1 / t) ** (-b / a))
    assert q.max() / q.min() < 10


def test_gaussian_fourier_moment():
    ev = power_symbol(2.0)
    for t in (0.1, 1.0, 4.0):
        assert math.isclose(ev.fourier_moment(0, t), math.sqrt(math.pi / t), rel_tol=1e-8)


@pytest.mark.parametrize("m", [0, 1, 2])
def test_fourier_moment_floor(stablelog_ev, m):
    for t in (1e-3, 1.0, 1e3):
        h = float(stablelog_ev.h(t))
        floor = M.sphere_area(1) * math.exp(-1) / (m + 1)
        assert stablelog_ev.fourier_moment(m, t) * h ** (m + 1) >= floor


def test_doubling_power_law():
    ev = power_symbol(1.5)
    res = S.check_doubling(ev, lambda s: np.asarray(s) ** 1.5)
    assert math.isclose(res.M9, 2 ** (1 / 1.5), rel_tol=1e-6)
    assert res.passed


def test_doubling_stablelog_finite(stablelog_ev):
    F = lambda s: np.asarray(s) ** 1.2 * np.log1p(np.asarray(s)) ** -0.5
    res = S.check_doubling(stablelog_ev, F)
    assert np.isfinite(res.M9) and np.isfinite(res.M10)


def test_doubling_exponential_fails():
    ev = power_symbol(1.0)
    res = S.check_doubling(ev, lambda s: np.expm1(np.asarray(s, dtype=float)))
    assert not res.passed


def test_tauber_closed_form():
    res = S.check_tauber(lambda s: s**-2.0, lambda r: 1.0, a=2.0, kappa=1.0, m=1.0)
    assert res.passed
    assert np.allclose(res.details["conclusion"], 1.0 / res.details["r"], rtol=1e-8)
    zero = S.check_tauber(lambda s: 0.0, lambda r: 1.0, a=2.0, kappa=1.0)
    assert zero.passed and np.all(zero.details["conclusion"] == 0)


def test_re_phi_corollaries_degenerate_direction_refused():
    with pytest.raises(ValueError, match="span"):
        M.pure_stable(1.0, d=2, spherical=M.atoms([[1.0, 0.0], [-1.0, 0.0]], [1.0, 1.0]))


def test_re_phi_corollaries_pure_stable(cauchy_ev, cauchy_spec):
    res = S.check_re_phi_corollaries(cauchy_ev, cauchy_spec.default_f(), 1.0)
    assert res.passed and res.constants["C9"] > 0


def test_h_ratio_power_law_and_stablelog(stablelog_ev):
    ev = power_symbol(1.5)
    t = np.logspace(-2, 2, 9)
    assert np.allclose(ev.h(0.25 * t) / ev.h(t), 0.25 ** (1 / 1.5), rtol=1e-6)
    res = S.check_h_ratio_decay(stablelog_ev)
    assert res.details["monotone"] and res.details["within_bound"]


@given(st.floats(0.3, 1.9), st.floats(1e-2, 1e2))
@settings(max_examples=20, deadline=None)
def test_power_h_scaling_property(alpha, t):
    ev = power_symbol(alpha)
    assert math.isclose(float(ev.h(t)), t ** (1 / alpha), rel_tol=1e-6)
