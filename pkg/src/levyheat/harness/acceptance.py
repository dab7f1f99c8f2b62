"""The twelve acceptance criteria as plain functions.

Each criterion returns a :class:`CriterionResult`; ``run_all`` evaluates a
selection and is shared by the CLI (``levyheat validate --acceptance``) and
the test-suite.  Density sweeps of the StableLog spec are cached because
criteria 5, 6 and 8 use the same one.
"""

from __future__ import annotations

import functools
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .. import bounds as B
from .. import measure as M
from ..density import (derivative_fd_oracle, invert_density, reconstruct, split_semigroup,
                       convolution_power_check)
from ..symbol import (SymbolEvaluator, check_doubling, check_h_ratio_decay, log_grid, power_symbol,
                      psi_sandwich)


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    summary: str
    seconds: float = 0.0
    details: dict = field(default_factory=dict)

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] criterion {self.number:2d} {self.title}: {self.summary}"


# ---------------------------------------------------------------------------
# shared fixtures
# ---------------------------------------------------------------------------

STABLELOG = (1.2, 1.0, 0.5)


@functools.lru_cache(maxsize=None)
def builtin_spec(name: str) -> M.LevyMeasureSpec:
    if name == "pure_stable":
        return M.pure_stable(1.0)
    if name == "stable_log":
        return M.stable_log(*STABLELOG)
    if name == "dyadic":
        return M.dyadic(1.0, 1.0)
    if name == "dyadic_1_2":
        return M.dyadic(1.0, 2.0)
    raise KeyError(name)


@functools.lru_cache(maxsize=None)
def evaluator(name: str, n_radii: int = 200) -> SymbolEvaluator:
    return SymbolEvaluator(n_radii=n_radii).fit(builtin_spec(name))


THREE_SPECS = ("pure_stable", "stable_log", "dyadic")


@functools.lru_cache(maxsize=None)
def stablelog_sweep(oversample: int = 1, order: int = 0, t_lo: float = 1e-2, t_hi: float = 1e2, n: int = 9):
    ev = evaluator("stable_log")
    beta = (order,) if order else None
    return tuple(B.density_sweep(ev, log_grid(t_lo, t_hi, n), extent=100.0, oversample=oversample, beta=beta))


def _timed(fn):
    @functools.wraps(fn)
    def wrapper(*a, **kw):
        t0 = time.perf_counter()
        res = fn(*a, **kw)
        res.seconds = time.perf_counter() - t0
        return res
    return wrapper


# ---------------------------------------------------------------------------
# criteria
# ---------------------------------------------------------------------------


@_timed
def criterion_1(tol=1e-6, budget=10.0):
    t0 = time.perf_counter()
    ev = power_symbol(1.0)
    errs = {}
    for t in (0.1, 1.0, 10.0):
        g = invert_density(ev, t, extent=10 * t)
        exact = t / (math.pi * (t * t + g.x**2))
        errs[t] = float(np.max(np.abs(g.values / exact - 1)))
    wall = time.perf_counter() - t0
    worst = max(errs.values())
    ok = worst <= tol and wall < budget
    return CriterionResult(1, "Cauchy oracle", ok, f"max rel err {worst:.3g} (tol {tol:g}), {wall:.2f}s "
                           f"(budget {budget:g}s)", details={"errors": errs, "wall": wall})


@_timed
def criterion_2(band=0.20):
    out, ok = {}, True
    r = log_grid(1e-3, 1e3, 40)
    r_fine = log_grid(1e-3, 1e3, 79)
    for name in THREE_SPECS:
        base = psi_sandwich(evaluator(name), r)
        fine = psi_sandwich(evaluator(name, 400), r_fine)
        c8, c8f = base.constants["C8"], fine.constants["C8"]
        var = abs(c8f / c8 - 1)
        good = base.passed and fine.passed and c8 > 0 and var < band
        ok &= good
        out[name] = {"C8": c8, "C8_refined": c8f, "variation": var, "upper_ok": base.details["upper_ok"]}
    summ = ", ".join(f"{k} C8={v['C8']:.4g} (refined {v['variation']:.1%})" for k, v in out.items())
    return CriterionResult(2, "Psi sandwich", ok, summ, details=out)


def moment_products(name, t_grid, ms=(0, 1, 2)):
    ev = evaluator(name)
    d = ev.dimension_
    h = ev.h(t_grid)
    return {m: np.array([ev.fourier_moment(m, t) for t in t_grid]) * h ** (d + m) for m in ms}


def moment_floor(m: int, d: int = 1) -> float:
    """Closed-form lower bound ``c e^-1 / (m + d)`` with ``c`` the unit-sphere area."""
    return M.sphere_area(d) * math.exp(-1.0) / (m + d)


@_timed
def criterion_3(band=10.0):
    t = log_grid(1e-3, 1e3, 13)
    out, ok = {}, True
    for name in THREE_SPECS:
        for m, prod in moment_products(name, t).items():
            spread = float(prod.max() / prod.min())
            good = prod.min() > 0 and spread <= band and prod.min() >= moment_floor(m) * (1 - 1e-9)
            ok &= bool(good)
            out[f"{name}/m={m}"] = {"min": float(prod.min()), "spread": spread}
    worst = max(out, key=lambda k: out[k]["spread"])
    return CriterionResult(3, "Fourier moment lower bound", ok,
                           f"worst spread {out[worst]['spread']:.3g} at {worst} (band {band:g})", details=out)


def stablelog_F(s):
    a, k, b = STABLELOG
    s = np.asarray(s, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(s > 0, s**a * np.log1p(s**k) ** (-b), 0.0)


@_timed
def criterion_4(band=20.0):
    ev = evaluator("stable_log")
    dc = check_doubling(ev, stablelog_F)
    prods = moment_products("stable_log", log_grid(1e-3, 1e3, 13))
    spreads = {m: float(p.max() / p.min()) for m, p in prods.items()}
    ok = dc.passed and np.isfinite(dc.M9) and np.isfinite(dc.M10) and max(spreads.values()) <= band
    return CriterionResult(4, "Doubling symbol two-sided moments", bool(ok),
                           f"M9={dc.M9:.4g}, M10={dc.M10:.4g}, max spread {max(spreads.values()):.3g} "
                           f"(band {band:g})", details={"M9": dc.M9, "M10": dc.M10, "spreads": spreads})


@_timed
def criterion_5(band=5.0, slack=0.10):
    ev = evaluator("stable_log")
    spec = builtin_spec("stable_log")
    env = B.upper_main(spec.default_f(1), 1)
    rep = B.fit_upper_constant(env, list(stablelog_sweep()), ev=ev, refined=list(stablelog_sweep(2)),
                               band=band, heldout_slack=slack)
    c, det = rep.constants, rep.details
    return CriterionResult(5, "Upper envelope", rep.passed,
                           f"C1={c['C1']:.4g}, C2={c['C2']:.3g}, "
                           f"refinement x{det.get('refinement_factor', float('nan')):.3g}, "
                           f"held-out max ratio {det.get('heldout_max_ratio', float('nan')):.4g}",
                           details={"report": rep})


@_timed
def criterion_6(band=2.0):
    ev = evaluator("stable_log")
    spec = builtin_spec("stable_log")
    env = B.lower_far(spec.default_f(1), 1)
    rep = B.fit_lower_constant(env, list(stablelog_sweep()), [1.0, -1.0], ev=ev, spec=spec,
                               refined=list(stablelog_sweep(2)), band=band)
    c = rep.constants
    return CriterionResult(6, "Lower bounds", rep.passed,
                           f"C4={c['C4']:.4g}, C5={c['C5']:g}, C6={c['C6']:g}, per-t spread "
                           f"{rep.details['per_t_spread']:.3g} (<= {band**2:g})", details={"report": rep})


@_timed
def criterion_7(tol=1e-4, zero_floor=1e-6, band=5.0):
    ev = evaluator("stable_log")
    spec = builtin_spec("stable_log")
    fd_err = {}
    for t in log_grid(0.1, 10.0, 5):
        h = float(ev.h(t))
        g = invert_density(ev, t, oversample=4, period=400 * h)
        dg = invert_density(ev, t, grid=g.grid, beta=(1,), period=g.inversion_params["period"])
        fd = derivative_fd_oracle(g)
        sp = dg.values[2:-2]
        keep = np.abs(sp) >= zero_floor * np.abs(sp).max()
        fd_err[float(t)] = float(np.max(np.abs(fd.values[keep] / sp[keep] - 1)))
    env = B.derivative_main(spec.default_f(1), 1, n=2, order=1)
    sw = list(stablelog_sweep(1, 1, 0.1, 10.0, 5))
    sw2 = list(stablelog_sweep(2, 1, 0.1, 10.0, 5))
    rep = B.fit_derivative_constant(env, sw, ev=ev, refined=sw2, band=band)
    worst = max(fd_err.values())
    ok = worst <= tol and rep.passed and np.isfinite(rep.constants["C7"])
    return CriterionResult(7, "Derivative bounds", bool(ok),
                           f"FD max rel err {worst:.3g} (tol {tol:g}), C7={rep.constants['C7']:.4g}",
                           details={"fd_errors": fd_err, "report": rep})


@_timed
def criterion_8(band=50.0):
    ev = evaluator("stable_log")
    sub = [g for g in stablelog_sweep() if abs(math.log10(g.t) - round(math.log10(g.t))) < 1e-9]
    rep = B.two_sided_check(B.two_sided(*STABLELOG), sub, ev=ev, band=band)
    return CriterionResult(8, "Two-sided envelope", rep.passed,
                           f"spread {rep.constants['spread']:.4g}, branch jump {rep.details['branch_jump']:.4g} "
                           f"(band {band:g})", details={"report": rep})


@_timed
def criterion_9(tol=1e-4, tail_tol=1e-8):
    out, ok = {}, True
    for name in ("pure_stable", "stable_log"):
        spec, ev = builtin_spec(name), evaluator(name)
        g = invert_density(ev, 1.0)
        r = float(ev.h(1.0))
        sp = split_semigroup(ev, spec, 1.0, r, g.grid, 20)
        rec = reconstruct(sp, M.drift_correction(spec, r))
        err = float(np.max(np.abs(rec.values - g.values)))
        ok &= err <= tol and sp.tail_bound <= tail_tol
        out[name] = {"linf": err, "tail_bound": sp.tail_bound}
    summ = ", ".join(f"{k} L_inf={v['linf']:.3g} tail={v['tail_bound']:.2g}" for k, v in out.items())
    return CriterionResult(9, "Compound-Poisson oracle", bool(ok), summ, details=out)


@_timed
def criterion_10(band=20.0):
    out, ok = {}, True
    xi = log_grid(1e-3, 1e3, 61)
    t = log_grid(1e-3, 1e3, 13)
    for name, (beta, kappa) in (("dyadic", (1.0, 1.0)), ("dyadic_1_2", (1.0, 2.0))):
        ev = evaluator(name)
        a = ev.re_phi(xi) * xi ** (-beta / kappa)
        b = ev.h(t) * t ** (-kappa / beta)
        sa, sb = float(a.max() / a.min()), float(b.max() / b.min())
        ok &= sa <= band and sb <= band
        out[f"({beta:g},{kappa:g})"] = {"symbol_spread": sa, "h_spread": sb}
    summ = ", ".join(f"{k}: symbol {v['symbol_spread']:.3g}, h {v['h_spread']:.3g}" for k, v in out.items())
    return CriterionResult(10, "Dyadic scaling", bool(ok), summ + f" (band {band:g})", details=out)


@_timed
def criterion_11(cap=0.2, slack=1.1):
    out, ok = {}, True
    a = 2.0 ** -np.arange(1, 11)
    for name in THREE_SPECS:
        res = check_h_ratio_decay(evaluator(name), a, slack=slack)
        s_last = float(res.details["s"][-1])
        good = res.passed and s_last <= cap
        ok &= good
        out[name] = {"s_min": s_last, "monotone": res.details["monotone"],
                     "within_bound": res.details["within_bound"], "C8": res.constants["C8"]}
    summ = ", ".join(f"{k} s(2^-10)={v['s_min']:.3g}" for k, v in out.items())
    return CriterionResult(11, "h-ratio decay", bool(ok), summ + f" (cap {cap:g})", details=out)


@_timed
def criterion_12(band=2.0):
    spec, ev = builtin_spec("dyadic"), evaluator("dyadic")
    c = {n: convolution_power_check(spec, 1.0, n, ev=ev)["C18"] for n in (1, 2, 3)}
    spread = max(c.values()) / min(c.values())
    ok = all(np.isfinite(v) and v > 0 for v in c.values()) and spread <= band
    return CriterionResult(12, "Convolution powers", bool(ok),
                           ", ".join(f"n={n} C18={v:.4g}" for n, v in c.items()) + f", spread {spread:.3g}",
                           details={"C18": c, "spread": spread})


CRITERIA = {1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4, 5: criterion_5, 6: criterion_6,
            7: criterion_7, 8: criterion_8, 9: criterion_9, 10: criterion_10, 11: criterion_11,
            12: criterion_12}


def run_all(numbers=None) -> list[CriterionResult]:
    out = []
    for k in (sorted(CRITERIA) if numbers is None else numbers):
        try:
            out.append(CRITERIA[k]())
        except Exception as exc:  # surfaced as a failing line, never swallowed silently
            out.append(CriterionResult(k, CRITERIA[k].__name__, False, f"error: {type(exc).__name__}: {exc}"))
    return out
