import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from levyheat import bounds as B
from levyheat import measure as M
from levyheat.bounds import MissingConstantError, PreconditionError
from levyheat.density import invert_density

f_cauchy = lambda s: np.asarray(s, dtype=float) ** -2.0


def test_upper_main_at_origin(cauchy_ev):
    env = B.upper_main(f_cauchy, 1.0, C1=2.5, C2=0.7)
    for t in (0.1, 1.0, 10.0):
        h = float(cauchy_ev.h(t))
        assert math.isclose(float(B.envelope_value(env, cauchy_ev, t, 0.0)), 2.5 / h, rel_tol=1e-12)


def test_stablelog_large_at_origin():
    env = B.stablelog_large(1.2, 1.0, 0.5, C24=3.0)
    assert math.isclose(float(env.value(None, 10.0, 0.0)), 3.0 * 10 ** (-1 / 0.7), rel_tol=1e-12)


def test_discrete_dyadic_literal():
    env = B.discrete_dyadic(1.0, 1.0, c=1.7)
    x = np.array([0.0, 0.05, 0.5, 3.0, 40.0])
    for t in (0.1, 1.0, 5.0):
        with np.errstate(divide="ignore"):
            want = 1.7 / t * np.minimum(1.0, t / np.abs(x))
        assert np.allclose(env.value(None, t, x), want, rtol=1e-12)


@given(st.floats(1e-2, 1e2), st.floats(0.05, 5.0), st.floats(0.0, 3.0))
@settings(max_examples=40, deadline=None)
def test_upper_main_invariants(t, c2, c1):
    from levyheat.symbol import power_symbol

    ev = power_symbol(1.0)
    env = B.upper_main(f_cauchy, 1.0, C1=c1 + 0.1, C2=c2)
    x = np.linspace(0.0, 50.0, 200)
    v = env.value(ev, t, x)
    h = float(ev.h(t))
    assert np.all(v > 0)
    assert np.all(np.diff(v) <= 1e-12 * v[:-1])
    assert np.all(v <= (c1 + 0.1) / h * (1 + 1e-12))


def test_lower_regime_order_enforced():
    with pytest.raises(ValueError):
        B.lower_far(f_cauchy, 1.0, C4=1.0, C5=2.0, C6=1.0)


def test_missing_constant():
    env = B.upper_main(f_cauchy, 1.0)
    with pytest.raises(MissingConstantError):
        env.value(None, 1.0, 0.0)


def test_short_time_domain():
    env = B.stablelog_short(1.2, 1.0, 0.5, C20=1.0)
    with pytest.raises(ValueError):
        env.shape(None, 2.0, 0.0)


def test_derivative_needs_n_above_gamma():
    with pytest.raises(PreconditionError):
        B.derivative_main(f_cauchy, 1.0, n=1)


@pytest.fixture(scope="module")
def cauchy_sweep(cauchy_ev):
    return B.density_sweep(cauchy_ev, [0.1, 1.0, 10.0], extent=100.0)


def test_fit_upper_cauchy(cauchy_ev, cauchy_sweep):
    rep = B.fit_upper_constant(B.upper_main(f_cauchy, 1.0), cauchy_sweep, ev=cauchy_ev)
    assert rep.passed
    assert np.isfinite(rep.constants["C1"]) and rep.constants["C1"] > 0
    ratio = np.asarray(rep.points["ratio"])
    assert np.all(ratio <= 1 + 1e-9)


def test_fit_lower_cauchy(cauchy_ev, cauchy_spec, cauchy_sweep):
    env = B.lower_far(f_cauchy, 1.0)
    rep = B.fit_lower_constant(env, cauchy_sweep, ev=cauchy_ev, spec=cauchy_spec)
    assert rep.passed
    assert rep.constants["C6"] > rep.constants["C5"]
    assert rep.constants["C4"] > 0


def test_near_zero_lower_bound(cauchy_ev, cauchy_sweep):
    vals = [g.values[np.argmin(np.abs(g.x))] * float(cauchy_ev.h(g.t)) for g in cauchy_sweep]
    assert min(vals) > 0 and max(vals) / min(vals) < 1.01


def test_lower_rejects_asymmetric(cauchy_sweep, cauchy_ev):
    spec = M.pure_stable(1.0, spherical=M.atoms([[1.0], [-1.0]], [1.0, 0.5]))
    with pytest.raises(PreconditionError):
        B.fit_lower_constant(B.lower_far(f_cauchy, 1.0), cauchy_sweep, ev=cauchy_ev, spec=spec)


def test_derivative_fit_order_mismatch(cauchy_ev, cauchy_sweep):
    env = B.derivative_main(f_cauchy, 1.0, n=2)
    with pytest.raises(PreconditionError):
        B.fit_derivative_constant(env, cauchy_sweep, ev=cauchy_ev)


def test_derivative_fit_cauchy(cauchy_ev):
    sweep = B.density_sweep(cauchy_ev, [0.3, 1.0, 3.0], extent=60.0, beta=(1,), alias_reference="peak")
    rep = B.fit_derivative_constant(B.derivative_main(f_cauchy, 1.0, n=2), sweep, ev=cauchy_ev)
    assert np.isfinite(rep.constants["C7"])
    g = sweep[1]
    assert abs(g.values[np.argmin(np.abs(g.x))]) <= 1e-8 * g.peak


def test_two_sided_stablelog(stablelog_ev):
    sweep = B.density_sweep(stablelog_ev, [1e-2, 1e-1, 1.0, 10.0, 100.0], extent=100.0)
    rep = B.two_sided_check(B.two_sided(1.2, 1.0, 0.5), sweep, ev=stablelog_ev)
    assert rep.passed


@pytest.mark.parametrize("env,t", [
    (B.stablelog_short(1.2, 1.0, 0.5, C20=1.0), 0.1),
    (B.stablelog_short_a2(1.0, 0.5, C21=1.0, C22=1.0), 0.1),
    (B.two_sided(1.2, 1.0, 0.5, c=1.0), 0.1),
    (B.two_sided(1.2, 1.0, 0.5, c=1.0), 10.0),
])
def test_envelopes_finite_at_origin(env, t):
    v = env.value(None, t, np.array([0.0, 1e-3, 1.0]))
    assert np.all(np.isfinite(v)) and np.all(v > 0)
    assert v[0] >= v[1] >= v[2]


def test_two_sided_short_time_origin_value():
    t, a, b = 1e-2, 1.2, 0.5
    env = B.two_sided(a, 1.0, b, c=1.0)
    want = t ** (-1 / a) * math.log1p(1 / t) ** (b / a)
    assert math.isclose(float(env.value(None, t, 0.0)), want, rel_tol=1e-12)
