"""Registry of named checks run by the harness.

A check belongs to a stage (``measure``, ``symbol``, ``density``, ``bounds``)
and takes typed options whose defaults live in the registry.  Options listed
as tolerances are multiplied by the run's ``tol_scale``.  List-valued options
are written space-separated in the config (``ms = 0 1 2``).
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .. import bounds as B
from .. import measure as M
from ..density import (GridDensity, convolution_power_check, derivative_fd_oracle, invert_density, reconstruct,
                       scan_split_parameter, small_jump_envelope_check, split_semigroup)
from ..symbol import (check_doubling, check_h_ratio_decay, log_grid, phi_pointwise_bounds, power_symbol,
                      psi_sandwich, SymbolEvaluator)

STAGES = ("measure", "symbol", "density", "bounds")


class CheckFailure(RuntimeError):
    """A numeric error raised inside a check, tagged with the check name."""

    def __init__(self, check, exc):
        self.check = check
        self.original = exc
        super().__init__(f"{check}: {type(exc).__name__}: {exc}")


@dataclass
class CheckOutcome:
    name: str
    passed: bool
    constants: dict
    summary: str
    tables: dict = field(default_factory=dict)  # stem -> (header, rows)
    reports: list = field(default_factory=list)  # ValidationReport
    densities: list = field(default_factory=list)  # GridDensity
    seconds: float = 0.0

    def line(self) -> str:
        return f"{self.name}: {'PASS' if self.passed else 'FAIL'} ({self.summary})"


@dataclass(frozen=True)
class Check:
    name: str
    func: Callable
    defaults: dict
    tolerances: tuple = ()
    doc: str = ""

    @property
    def stage(self) -> str:
        return self.name.split(".", 1)[0]

    def parse(self, opts: dict) -> dict:
        """String options -> typed values (raises ValueError on bad input)."""
        out = dict(self.defaults)
        for k, v in opts.items():
            if k not in self.defaults:
                raise ValueError(f"unknown option {k!r}; allowed: {', '.join(sorted(self.defaults)) or 'none'}")
            d = self.defaults[k]
            try:
                if isinstance(d, tuple):
                    out[k] = tuple(float(s) for s in v.split())
                elif isinstance(d, bool):
                    out[k] = v.lower() in ("1", "true", "yes", "on")
                elif isinstance(d, int):
                    out[k] = int(v)
                elif isinstance(d, float) or d is None:
                    out[k] = v if (d is None and v == "auto") else float(v)
                else:
                    out[k] = v
            except ValueError:
                raise ValueError(f"option {k}: cannot parse {v!r}") from None
        for k in self.tolerances:
            if not (isinstance(out[k], float) and math.isfinite(out[k]) and out[k] > 0):
                raise ValueError(f"tolerance {k} must be a positive number")
        return out

    def validate_options(self, opts):
        self.parse(opts)

    def resolve(self, opts: dict, tol_scale: float = 1.0) -> dict:
        out = self.parse(opts)
        for k in self.tolerances:
            out[k] = out[k] * tol_scale
        return out


REGISTRY: dict[str, Check] = {}


def register(name, tolerances=(), **defaults):
    def deco(fn):
        REGISTRY[name] = Check(name, fn, defaults, tuple(tolerances), (fn.__doc__ or "").strip())
        return fn
    return deco


# ---------------------------------------------------------------------------
# run context: spec, evaluator and a per-(t, order, oversample) density cache
# ---------------------------------------------------------------------------


class RunContext:
    def __init__(self, config, *, executor=None, tol_scale=1.0):
        self.config = config
        self.executor = executor
        self.tol_scale = float(tol_scale)
        self._spec = None
        self._ev = None
        self._densities = {}
        self.psi_fit = None

    @property
    def spec(self) -> M.LevyMeasureSpec:
        if self._spec is None:
            self._spec = self.config.build_spec()
        return self._spec

    @property
    def ev(self) -> SymbolEvaluator:
        if self._ev is None:
            self._ev = SymbolEvaluator().fit(self.spec)
        return self._ev

    def _extent(self, t):
        sw = self.config.sweep
        if sw.x_extent is not None:
            return sw.x_extent
        return sw.x_extent_h * float(self.ev.h(t))

    def _one(self, key):
        t, order, oversample = key
        sw = self.config.sweep
        beta = order if any(order) else None
        shift = B.center_shift(self.spec, self.ev, t, sw.center)
        return invert_density(self.ev, t, beta=beta, extent=self._extent(t), oversample=oversample,
                              alias_rtol=sw.alias_rtol, alias_reference=sw.alias_reference, shift=shift)

    def sweep(self, t_values=None, order=None, oversample=None) -> list[GridDensity]:
        sw = self.config.sweep
        ts = sw.t_values if t_values is None else t_values
        order = (0,) * self.spec.dimension if order is None else tuple(order)
        os_ = sw.oversample if oversample is None else oversample
        keys = [(float(t), order, int(os_)) for t in ts]
        todo = [k for k in dict.fromkeys(keys) if k not in self._densities]
        if todo:
            mapper = self.executor.map if self.executor is not None else map
            for k, g in zip(todo, mapper(self._one, todo)):
                self._densities[k] = g
        return [self._densities[k] for k in keys]

    def refined(self, t_values=None, order=None):
        return self.sweep(t_values, order, 2 * self.config.sweep.oversample)


def _times(ctx, opts):
    if opts.get("t_list"):
        return tuple(opts["t_list"])
    if opts.get("t_points"):
        return tuple(float(v) for v in log_grid(opts["t_lo"], opts["t_hi"], int(opts["t_points"])))
    return ctx.config.sweep.t_values


def _profile(spec):
    if spec.kind == M.DYADIC:
        return spec.dyadic_params
    return spec.profile


def _f_gamma(ctx, opts):
    g = opts.get("gamma")
    gamma = ctx.spec.gamma if g in (None, "auto") else float(g)
    return ctx.spec.default_f(gamma), gamma


def _report_outcome(name, rep, summary, **extra):
    return CheckOutcome(name, bool(rep.passed), dict(rep.constants), summary, reports=[rep], **extra)


# ---------------------------------------------------------------------------
# measure stage
# ---------------------------------------------------------------------------


def _assumption(name, rep):
    e = rep.entries[0]
    return CheckOutcome(name, e.holds, {"constant": e.fitted_constant},
                        f"constant={e.fitted_constant:.6g}, witness={e.witness}")


@register("measure.profile_bound", tolerances=("stability",), n_grid=40, refine=2, stability=0.05, gamma=None)
def _profile_bound(ctx, o):
    """Fitted M1 for the ball-mass profile bound, stable under grid refinement."""
    f, gamma = _f_gamma(ctx, o)
    return _assumption("measure.profile_bound",
                       M.check_profile_bound(ctx.spec, f, gamma, n_grid=o["n_grid"], refine=o["refine"],
                                             stability=o["stability"]))


@register("measure.tech_assumption", tolerances=("stability",), n_grid=40, refine=2, stability=0.5, gamma=None)
def _tech(ctx, o):
    """Fitted M2 for the integrated tail condition against Psi."""
    f, _ = _f_gamma(ctx, o)
    return _assumption("measure.tech_assumption",
                       M.check_tech_assumption(ctx.spec, f, ctx.ev, n_grid=o["n_grid"], refine=o["refine"],
                                               stability=o["stability"]))


@register("measure.lower_measure_bound", tolerances=("collapse",), n_grid=40, refine=2, collapse=0.5,
          gamma=None)
def _lower_measure(ctx, o):
    """Fitted M4 for the lower ball-mass bound on the support cone."""
    f, gamma = _f_gamma(ctx, o)
    return _assumption("measure.lower_measure_bound",
                       M.check_lower_measure_bound(ctx.spec, f, gamma, n_grid=o["n_grid"], refine=o["refine"],
                                                   collapse=o["collapse"]))


# ---------------------------------------------------------------------------
# symbol stage
# ---------------------------------------------------------------------------


@register("symbol.psi_sandwich", tolerances=("upper_tol", "band"), upper_tol=1e-6, band=0.2, n_r=40,
          r_lo=1e-3, r_hi=1e3)
def _psi_sandwich(ctx, o):
    """Psi(r) <= 2H(1/r) and fitted C8 = min Psi/H, stable under x2 radius/direction refinement."""
    r = log_grid(o["r_lo"], o["r_hi"], o["n_r"])
    base = psi_sandwich(ctx.ev, r, upper_tol=o["upper_tol"])
    fine_ev = SymbolEvaluator(n_radii=2 * ctx.ev.n_radii, n_directions=2 * ctx.ev.n_directions,
                              fill_ins=2 * ctx.ev.fill_ins).fit(ctx.spec)
    fine = psi_sandwich(fine_ev, log_grid(o["r_lo"], o["r_hi"], 2 * o["n_r"] - 1), upper_tol=o["upper_tol"])
    c8, c8f = base.constants["C8"], fine.constants["C8"]
    var = abs(c8f / c8 - 1)
    ctx.psi_fit = c8
    ok = base.passed and fine.passed and c8 > 0 and var < o["band"]
    d = base.details
    rows = np.column_stack([d["r"], d["psi"], 2 * d["H"], c8 * d["H"]])
    return CheckOutcome("symbol.psi_sandwich", bool(ok), {"C8": c8, "C8_refined": c8f, "variation": var},
                        f"C8={c8:.6g}, refined variation {var:.2%}, "
                        f"upper bound {'holds' if d['upper_ok'] else 'FAILS'}",
                        tables={"psi_table": (["r", "psi", "two_H", "C8_H"], rows)})


@register("symbol.tables", r_lo=1e-3, r_hi=1e3, t_lo=1e-3, t_hi=1e3, n=61)
def _tables(ctx, o):
    """Psi, Psi^-1 and h tables (always passes)."""
    r = log_grid(o["r_lo"], o["r_hi"], o["n"])
    t = log_grid(o["t_lo"], o["t_hi"], o["n"])
    ev = ctx.ev
    psi = ev.psi(r)
    h = ev.h(t)
    return CheckOutcome("symbol.tables", True, {"h_at_1": float(ev.h(1.0)), "psi_at_1": float(ev.psi(1.0))},
                        f"h(1)={float(ev.h(1.0)):.6g}, Psi(1)={float(ev.psi(1.0)):.6g}",
                        tables={"psi": (["r", "psi", "re_phi"], np.column_stack([r, psi, _re_phi_axis(ev, r)])),
                                "h": (["t", "h", "psi_inverse_1_over_t"], np.column_stack([t, h, 1.0 / h]))})


def _re_phi_axis(ev, r):
    d = ev.dimension_
    pts = r if d == 1 else r[:, None] * np.eye(d)[0][None, :]
    return ev.re_phi(pts)


@register("symbol.phi_pointwise")
def _phi_pointwise(ctx, o):
    """Pointwise (1 - cos 1) second-moment lower bound and 2H upper bound on Re Phi."""
    res = phi_pointwise_bounds(ctx.ev)
    return CheckOutcome("symbol.phi_pointwise", res.passed, res.constants,
                        ", ".join(f"{k}={v:.4g}" for k, v in res.constants.items()))


def moment_floor(m: int, d: int = 1) -> float:
    """Closed-form lower bound ``c e^-1 / (m + d)``, ``c`` the unit-sphere area."""
    return M.sphere_area(d) * math.exp(-1.0) / (m + d)


@register("symbol.fourier_moments", tolerances=("band",), band=10.0, ms=(0.0, 1.0, 2.0), t_lo=1e-3, t_hi=1e3,
          t_points=13)
def _moments(ctx, o):
    """I_m(t) h(t)^(d+m): bounded below by the closed-form floor, max/min across t <= band."""
    t = log_grid(o["t_lo"], o["t_hi"], o["t_points"])
    d = ctx.ev.dimension_
    h = ctx.ev.h(t)
    cols, consts, ok = [t], {}, True
    worst = 0.0
    for m in (int(v) for v in o["ms"]):
        prod = np.array([ctx.ev.fourier_moment(m, tt) for tt in t]) * h ** (d + m)
        spread = float(prod.max() / prod.min())
        floor = moment_floor(m, d)
        ok &= bool(prod.min() > 0 and spread <= o["band"] and prod.min() >= floor * (1 - 1e-9))
        consts[f"min_m{m}"] = float(prod.min())
        consts[f"spread_m{m}"] = spread
        worst = max(worst, spread)
        cols.append(prod)
    header = ["t"] + [f"I{int(m)}_h" for m in o["ms"]]
    return CheckOutcome("symbol.fourier_moments", bool(ok), consts, f"max spread {worst:.4g} (band {o['band']:g})",
                        tables={"fourier_moments": (header, np.column_stack(cols))})


def asymptotic_symbol(spec) -> Callable:
    """Closed increasing comparison function F for the built-in families."""
    p = _profile(spec)
    if spec.kind == M.DYADIC:
        e = p.beta / p.kappa
        return lambda s: np.asarray(s, dtype=float) ** e
    fam = p.family
    a = p.alpha

    def F(s):
        s = np.asarray(s, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            if fam == "pure_stable":
                return s**a
            if fam == "stable_log":
                return np.where(s > 0, s**a * np.log1p(s**p.kappa) ** (-p.beta), 0.0)
            if fam == "tempered_poly":
                return s**2 / (1 + s) ** (2 - a)
        raise ValueError(f"no closed comparison function for family {fam}")
    return F


@register("symbol.doubling", tolerances=("stability",), stability=0.05, moment_band=0.0,
          t_lo=1e-3, t_hi=1e3, t_points=13)
def _doubling(ctx, o):
    """Fitted M9, M10 for the closed comparison symbol.

    ``moment_band > 0`` also bounds max/min of I_m h^(d+m) across t (0 disables it).
    """
    dc = check_doubling(ctx.ev, asymptotic_symbol(ctx.spec), stability=o["stability"])
    ok = dc.passed
    consts = {"M9": dc.M9, "M10": dc.M10}
    summ = f"M9={dc.M9:.4g}, M10={dc.M10:.4g}"
    band = o["moment_band"] * ctx.tol_scale
    if band > 0:
        t = log_grid(o["t_lo"], o["t_hi"], o["t_points"])
        h = ctx.ev.h(t)
        d = ctx.ev.dimension_
        spreads = []
        for m in (0, 1, 2):
            prod = np.array([ctx.ev.fourier_moment(m, tt) for tt in t]) * h ** (d + m)
            spreads.append(float(prod.max() / prod.min()))
        consts["moment_spread"] = max(spreads)
        ok = ok and max(spreads) <= band
        summ += f", moment spread {max(spreads):.4g} (band {band:g})"
    return CheckOutcome("symbol.doubling", bool(ok), consts, summ)



@register("symbol.h_ratio_decay", tolerances=("cap", "slack"), cap=0.2, slack=1.1, t_lo=1e-2, t_hi=1e2,
          t_points=41)
def _h_ratio(ctx, o):
    """s(a) = max_t h(at)/h(t): nonincreasing, s(2^-10) <= cap and s(a) <= sqrt(2a/C8) * slack."""
    a = 2.0 ** -np.arange(1, 11)
    res = check_h_ratio_decay(ctx.ev, a, log_grid(o["t_lo"], o["t_hi"], o["t_points"]), C8=ctx.psi_fit,
                              slack=o["slack"])
    s = res.details["s"]
    ok = res.passed and s[-1] <= o["cap"]
    return CheckOutcome("symbol.h_ratio_decay", bool(ok), {"C8": res.constants["C8"], "s_min": float(s[-1])},
                        f"s(2^-10)={s[-1]:.4g}, monotone={res.details['monotone']}, "
                        f"within sqrt bound={res.details['within_bound']}",
                        tables={"h_ratio": (["a", "s", "bound"], np.column_stack([a, s, res.details["bound"]]))})


@register("symbol.dyadic_scaling", tolerances=("band",), band=20.0, kappas=(), xi_lo=1e-3, xi_hi=1e3,
          t_lo=1e-3, t_hi=1e3)
def _dyadic_scaling(ctx, o):
    """Re Phi |xi|^(-beta/kappa) and h(t) t^(-kappa/beta) within max/min <= band.

    ``kappas`` adds further dyadic measures with the configured beta.
    """
    if ctx.spec.kind != M.DYADIC:
        raise ValueError("symbol.dyadic_scaling needs a dyadic measure")
    p = ctx.spec.dyadic_params
    xi = log_grid(o["xi_lo"], o["xi_hi"], 61)
    t = log_grid(o["t_lo"], o["t_hi"], 13)
    consts, ok = {}, True
    for kap in (p.kappa,) + tuple(k for k in o["kappas"] if k != p.kappa):
        ev = ctx.ev if kap == p.kappa else SymbolEvaluator().fit(M.dyadic(p.beta, kap, ctx.spec.dimension))
        a = ev.re_phi(xi) * xi ** (-p.beta / kap)
        b = ev.h(t) * t ** (-kap / p.beta)
        sa, sb = float(a.max() / a.min()), float(b.max() / b.min())
        ok &= sa <= o["band"] and sb <= o["band"]
        consts[f"symbol_spread_k{kap:g}"] = sa
        consts[f"h_spread_k{kap:g}"] = sb
    return CheckOutcome("symbol.dyadic_scaling", bool(ok), consts,
                        ", ".join(f"{k}={v:.3g}" for k, v in consts.items()) + f" (band {o['band']:g})")


# ---------------------------------------------------------------------------
# density stage
# ---------------------------------------------------------------------------


@register("density.sweep", tolerances=("negative_tol",), negative_tol=1e-3)
def _sweep(ctx, o):
    """Invert the configured sweep; passes if every density is finite with min >= -tol * peak."""
    dens = []
    for beta in ctx.config.sweep.derivatives:
        dens += ctx.sweep(order=beta)
    worst = 0.0
    ok = True
    for g in dens:
        ok &= bool(np.all(np.isfinite(g.values)))
        if not any(g.derivative_order):
            worst = max(worst, float(-g.values.min() / g.peak))
    ok &= worst <= o["negative_tol"]
    return CheckOutcome("density.sweep", bool(ok), {"n_densities": len(dens), "worst_negative": worst},
                        f"{len(dens)} densities, worst negative part {worst:.3g} of peak", densities=dens)


@register("density.cauchy_oracle", tolerances=("tol", "budget"), tol=1e-6, budget=10.0, scale=None,
          t_list=(0.1, 1.0, 10.0), extent_t=10.0)
def _cauchy(ctx, o):
    """Inversion of c|xi| against t c / (pi ((t c)^2 + x^2)) on |x| <= extent_t * t.

    ``scale = auto`` reads c from the measure's symbol (which must then be linear);
    a number inverts the closed form c|xi| directly.
    """
    t0 = time.perf_counter()
    if o["scale"] in (None, "auto"):
        ev = ctx.ev
        xi = log_grid(1e-3, 1e3, 25)
        ratio = ev.re_phi(xi) / xi
        c = float(ratio[len(ratio) // 2])
        if np.max(np.abs(ratio / c - 1)) > 1e-8:
            raise ValueError("the measure's symbol is not linear in |xi|; the Cauchy oracle does not apply")
    else:
        c = float(o["scale"])
        ev = power_symbol(1.0, c)
    errs, dens = {}, []
    for t in o["t_list"]:
        g = invert_density(ev, t, extent=o["extent_t"] * t)
        s = c * t
        exact = s / (math.pi * (s * s + g.x**2))
        errs[t] = float(np.max(np.abs(g.values / exact - 1)))
        dens.append(g)
    wall = time.perf_counter() - t0
    worst = max(errs.values())
    ok = worst <= o["tol"] and wall < o["budget"]
    return CheckOutcome("density.cauchy_oracle", bool(ok), {"max_rel_error": worst, "c": c},
                        f"max rel error {worst:.3g} (tol {o['tol']:g}), {wall:.2f}s (budget {o['budget']:g}s)",
                        tables={"cauchy_errors": (["t", "max_rel_error"],
                                                  np.array([[t, e] for t, e in errs.items()]))},
                        densities=dens)


@register("density.fd_derivative", tolerances=("tol",), tol=1e-4, zero_floor=1e-6, t_lo=0.1, t_hi=10.0,
          t_points=5, oversample=4, period_h=400.0)
def _fd(ctx, o):
    """Spectral first derivative against 4th-order central differences, |dp| >= zero_floor * peak."""
    errs = []
    for t in log_grid(o["t_lo"], o["t_hi"], o["t_points"]):
        h = float(ctx.ev.h(t))
        g = invert_density(ctx.ev, t, oversample=o["oversample"], period=o["period_h"] * h)
        dg = invert_density(ctx.ev, t, grid=g.grid, beta=(1,), period=g.inversion_params["period"])
        fd = derivative_fd_oracle(g)
        sp = dg.values[2:-2]
        keep = np.abs(sp) >= o["zero_floor"] * np.abs(sp).max()
        errs.append((t, float(np.max(np.abs(fd.values[keep] / sp[keep] - 1)))))
    worst = max(e for _, e in errs)
    return CheckOutcome("density.fd_derivative", worst <= o["tol"], {"max_rel_error": worst},
                        f"max rel error {worst:.3g} (tol {o['tol']:g})",
                        tables={"fd_errors": (["t", "max_rel_error"], np.array(errs))})


@register("density.split_oracle", tolerances=("tol", "tail_tol"), tol=1e-4, tail_tol=1e-8, t=1.0, n_terms=20,
          refine=1)
def _split(ctx, o):
    """Small/large-jump reconstruction at r = h(t) against direct inversion (L_inf) and the series tail."""
    t = o["t"]
    g = invert_density(ctx.ev, t)
    r = float(ctx.ev.h(t))
    sp = split_semigroup(ctx.ev, ctx.spec, t, r, g.grid, o["n_terms"], refine=o["refine"])
    rec = reconstruct(sp, M.drift_correction(ctx.spec, r))
    err = float(np.max(np.abs(rec.values - g.values)))
    ok = err <= o["tol"] and sp.tail_bound <= o["tail_tol"]
    return CheckOutcome("density.split_oracle", bool(ok), {"linf": err, "tail_bound": sp.tail_bound},
                        f"L_inf={err:.3g} (tol {o['tol']:g}), tail_bound={sp.tail_bound:.3g}",
                        densities=[g, rec])


@register("density.small_jump_envelope", t=1.0, n_terms=20)
def _small_jump(ctx, o):
    """Fitted C15, C16 for the small-jump part at r = h(t) (C17 = 1)."""
    t = o["t"]
    r = float(ctx.ev.h(t))
    sp = split_semigroup(ctx.ev, ctx.spec, t, r, None, o["n_terms"])
    res = small_jump_envelope_check(sp, ctx.ev)
    ok = bool(np.isfinite(res["C15"]) and np.isfinite(res["C16"]) and res["C16"] > 0)
    return CheckOutcome("density.small_jump_envelope", ok, {"C15": res["C15"], "C16": res["C16"]},
                        f"C15={res['C15']:.4g}, C16={res['C16']:.4g}")


@register("density.split_scan", t_list=(0.01, 1.0, 100.0), k_max=10, rtol=0.05)
def _split_scan(ctx, o):
    """Scan a = 2^-k for the split radius h(a t); the near-zero split bound must stay below p_t(0) h(t)."""
    t_list = tuple(o["t_list"])
    res = scan_split_parameter(ctx.ev, ctx.spec, t_list, range(1, int(o["k_max"]) + 1), rtol=o["rtol"])
    exact = []
    for g in ctx.sweep(t_list):
        exact.append(float(g.values[np.argmin(np.abs(g.x))]) * float(ctx.ev.h(g.t)))
    below = all(v <= e * (1 + 1e-6) for row in res["per_t"] for v, e in zip(row, exact))
    ok = bool(below and res["q_best"] > 0)
    stable = res["a_stable"]
    rows = np.column_stack([res["a"], res["q"]])
    return CheckOutcome("density.split_scan", ok,
                        {"a_best": res["a_best"], "q_best": res["q_best"],
                         "a_stable": stable if stable is not None else float("nan")},
                        f"a_best={res['a_best']:.4g} (q={res['q_best']:.4g}), "
                        f"a_stable={'none' if stable is None else f'{stable:.4g}'} (heuristic), "
                        f"bound below p_t(0)h(t): {below}",
                        tables={"scan": (["a", "q"], rows)})


@register("density.convolution_powers", tolerances=("band",), band=2.0, r=1.0, ns=(1.0, 2.0, 3.0))
def _conv(ctx, o):
    """Fitted C18 per n over the 20 default test sets, within a factor band across n."""
    res = {int(n): convolution_power_check(ctx.spec, o["r"], int(n), ev=ctx.ev) for n in o["ns"]}
    c = {n: v["C18"] for n, v in res.items()}
    spread = max(c.values()) / min(c.values())
    ok = all(np.isfinite(v) and v > 0 for v in c.values()) and spread <= o["band"]
    consts = {f"C18_n{n}": v for n, v in c.items()}
    consts["spread"] = spread
    return CheckOutcome("density.convolution_powers", bool(ok), consts,
                        ", ".join(f"n={n}: C18={v:.4g}" for n, v in c.items()) + f", spread {spread:.3g}")


# ---------------------------------------------------------------------------
# bounds stage
# ---------------------------------------------------------------------------

_T_OPTS = dict(t_list=(), t_lo=0.0, t_hi=0.0, t_points=0)


def _stablelog_params(spec):
    p = _profile(spec)
    if spec.kind == M.DYADIC or p.family != "stable_log":
        raise ValueError("this envelope needs a stable_log measure")
    return p.alpha, p.kappa, p.beta


@register("bounds.upper_main", tolerances=("band", "heldout_slack"), band=5.0, heldout_slack=0.1, floor=1e-12,
          gamma=None, **_T_OPTS)
def _upper_main(ctx, o):
    """Max-ratio fit of C1 (C2 from the far-field slope, C3 = 1), checked under x2 refinement."""
    f, gamma = _f_gamma(ctx, o)
    ts = _times(ctx, o)
    rep = B.fit_upper_constant(B.upper_main(f, gamma, ctx.spec.dimension), ctx.sweep(ts), ev=ctx.ev,
                               refined=ctx.refined(ts), band=o["band"], floor=o["floor"],
                               heldout_slack=o["heldout_slack"])
    c = rep.constants
    return _report_outcome("bounds.upper_main", rep,
                           f"C1={c['C1']:.4g}, C2={c['C2']:.3g}, refinement x{rep.details['refinement_factor']:.3g}, "
                           f"held-out {rep.details['heldout_max_ratio']:.4g}")


@register("bounds.lower", tolerances=("band",), band=2.0, floor=1e-12, gamma=None, region="sign", **_T_OPTS)
def _lower(ctx, o):
    """Joint near/far fit of C4 with (C5, C6) scanned; per-t spread within band^2, refinement within band."""
    f, gamma = _f_gamma(ctx, o)
    ts = _times(ctx, o)
    if ctx.spec.kind == M.DYADIC or o["region"] == "atoms":
        env = B.lower_far(f, gamma, ctx.spec.dimension, region=B.atom_region(ctx.spec))
        dirs = None
    else:
        env = B.lower_far(f, gamma, ctx.spec.dimension)
        dirs = [1.0, -1.0]
    rep = B.fit_lower_constant(env, ctx.sweep(ts), dirs, ev=ctx.ev, spec=ctx.spec, refined=ctx.refined(ts),
                               band=o["band"], floor=o["floor"])
    c = rep.constants
    return _report_outcome("bounds.lower", rep, f"C4={c['C4']:.4g}, C5={c['C5']:g}, C6={c['C6']:g}, per-t spread "
                           f"{rep.details['per_t_spread']:.3g}")


@register("bounds.derivative_main", tolerances=("band", "heldout_slack"), band=5.0, heldout_slack=0.1,
          floor=1e-12, n=2.0, order=1, gamma=None, **_T_OPTS)
def _deriv(ctx, o):
    """Max-ratio fit of C7 for |d^beta p_t| with beta = (order,)."""
    f, gamma = _f_gamma(ctx, o)
    ts = _times(ctx, o)
    beta = (o["order"],)
    env = B.derivative_main(f, gamma, o["n"], o["order"], ctx.spec.dimension)
    rep = B.fit_derivative_constant(env, ctx.sweep(ts, beta), ev=ctx.ev, refined=ctx.refined(ts, beta),
                                    band=o["band"], floor=o["floor"], heldout_slack=o["heldout_slack"])
    return _report_outcome("bounds.derivative_main", rep, f"C7={rep.constants['C7']:.4g}")


@register("bounds.two_sided", tolerances=("band",), band=50.0, floor=1e-12, order=0, **_T_OPTS)
def _two_sided(ctx, o):
    """Spread of p_t / two-sided shape over the sweep, including the branch switch at t = 1."""
    a, k, b = _stablelog_params(ctx.spec)
    ts = _times(ctx, o)
    beta = (o["order"],)
    env = B.two_sided(a, k, b, ctx.spec.dimension, o["order"])
    rep = B.two_sided_check(env, ctx.sweep(ts, beta), ev=ctx.ev, band=o["band"], floor=o["floor"])
    return _report_outcome("bounds.two_sided", rep, f"spread {rep.constants['spread']:.4g}, branch jump "
                           f"{rep.details['branch_jump']:.4g} (band {o['band']:g})")


def _plain_upper(name, make_env, ctx, o, order=0):
    ts = _times(ctx, o)
    beta = (order,)
    env = make_env()
    fit = B.fit_derivative_constant if order else B.fit_upper_constant
    rep = fit(env, ctx.sweep(ts, beta), ev=ctx.ev, refined=ctx.refined(ts, beta), band=o["band"],
              floor=o["floor"], heldout_slack=o["heldout_slack"])
    mult = B.MULTIPLIER[env.kind]
    return _report_outcome(name, rep, f"{mult}={rep.constants[mult]:.4g}, refinement "
                           f"x{rep.details['refinement_factor']:.3g}, held-out {rep.details['heldout_max_ratio']:.4g}")


_UPPER_OPTS = dict(band=5.0, heldout_slack=0.1, floor=1e-12, **_T_OPTS)


@register("bounds.stablelog_short", tolerances=("band", "heldout_slack"), **_UPPER_OPTS)
def _sl_short(ctx, o):
    """Short-time stable-log envelope (t < 1)."""
    a, k, b = _stablelog_params(ctx.spec)
    if a == 2:
        return _plain_upper("bounds.stablelog_short", lambda: B.stablelog_short_a2(k, b, 1, ctx.spec.dimension),
                            ctx, o)
    return _plain_upper("bounds.stablelog_short", lambda: B.stablelog_short(a, k, b, 1, ctx.spec.dimension), ctx, o)


@register("bounds.stablelog_large", tolerances=("band", "heldout_slack"), **_UPPER_OPTS)
def _sl_large(ctx, o):
    """Large-time stable-log envelope (t > 1)."""
    a, k, b = _stablelog_params(ctx.spec)
    return _plain_upper("bounds.stablelog_large", lambda: B.stablelog_large(a, k, b, 1, ctx.spec.dimension), ctx, o)


@register("bounds.tempered_deriv", tolerances=("band", "heldout_slack"), n=2.0, order=1, **_UPPER_OPTS)
def _tempered(ctx, o):
    """Derivative envelope for the tempered family."""
    p = _profile(ctx.spec)
    if ctx.spec.kind == M.DYADIC or p.family != "tempered_poly":
        raise ValueError("bounds.tempered_deriv needs a tempered_poly measure")
    return _plain_upper("bounds.tempered_deriv",
                        lambda: B.tempered_deriv(p.alpha, p.kappa, p.beta, p.m, 1, o["n"], o["order"],
                                                 ctx.spec.dimension), ctx, o, order=o["order"])


@register("bounds.discrete_dyadic", tolerances=("band", "heldout_slack"), order=0,
          **{**_UPPER_OPTS, "floor": 1e-5})
def _dyadic_upper(ctx, o):
    """Dyadic envelope t^(-(d+k) kappa/beta) min(1, t |x|^(-beta/kappa))."""
    if ctx.spec.kind != M.DYADIC:
        raise ValueError("bounds.discrete_dyadic needs a dyadic measure")
    p = ctx.spec.dyadic_params
    return _plain_upper("bounds.discrete_dyadic",
                        lambda: B.discrete_dyadic(p.beta, p.kappa, ctx.spec.dimension, o["order"]), ctx, o,
                        order=o["order"])


def run_check(name, ctx, opts) -> CheckOutcome:
    chk = REGISTRY[name]
    o = chk.resolve(opts, ctx.tol_scale)
    t0 = time.perf_counter()
    try:
        out = chk.func(ctx, o)
    except Exception as exc:
        raise CheckFailure(name, exc) from exc
    out.seconds = time.perf_counter() - t0
    return out


def dependency_order(names):
    """Stable sort by stage; within a stage the config order is kept."""
    return sorted(names, key=lambda n: STAGES.index(REGISTRY[n].stage))
