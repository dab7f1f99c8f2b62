"""Characteristic exponent, maximal symbol and the scale function ``h``.

The :class:`SymbolEvaluator` is a scikit-learn style estimator: hyperparameters
(table sizes, direction counts) go into ``__init__`` and :meth:`SymbolEvaluator.fit`
takes a :class:`~levyheat.measure.LevyMeasureSpec` and builds the table of

    Psi(r) = sup_{|xi| <= r} Re Phi(xi)

on a log grid of radii.  ``Psi^{-1}`` and ``h(t) = 1 / Psi^{-1}(1/t)`` are read
off that table.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import special
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from . import measure as M
from ._validation import check_positive
from .quadrature import gauss_legendre_panels


class PsiRangeError(ValueError):
    """Requested value lies outside the range the Psi table can be extended to."""


class DivergenceError(ArithmeticError):
    """A Fourier moment integral does not converge."""


# dyadic atom sums: terms with |xi| 2^(-n kappa) below this use the Taylor tail
_DYADIC_SMALL = 1e-3


@dataclass
class PsiTable:
    """Immutable snapshot of the Psi table (copy-on-extend)."""

    log_r: np.ndarray
    raw: np.ndarray  # max over directions of Re Phi at each radius
    psi: np.ndarray  # running max of raw

    @property
    def r(self):
        return np.exp(self.log_r)


class SymbolEvaluator(BaseEstimator):
    """Cached evaluator of ``Phi``, ``Psi``, ``Psi^{-1}`` and ``h``.

    Parameters
    ----------
    n_radii : int
        Radii in the initial Psi table on ``[r_min, r_max]``.
    r_min, r_max : float
        Initial table range; it is extended by factors of ten on demand.
    n_directions : int
        Directions on the half sphere for the sup in Psi (d >= 2).
    fill_ins : int
        Extra directions added to the atom directions of atomic measures.
    closed_form : callable, optional
        Analytic ``Re Phi`` taking an array of ``xi`` (shape ``(...)`` for d = 1,
        ``(..., d)`` otherwise).  When given, ``fit`` needs no spec.
    closed_form_imag : callable, optional
        Analytic ``Im Phi`` to go with ``closed_form``.
    dimension : int
        Dimension for closed-form symbols.
    closed_form_radial : bool
        Whether ``closed_form`` depends on ``|xi|`` only.
    """

    def __init__(self, n_radii=200, r_min=1e-6, r_max=1e6, n_directions=64, fill_ins=16,
                 closed_form=None, closed_form_imag=None, dimension=1, closed_form_radial=True):
        self.n_radii = n_radii
        self.r_min = r_min
        self.r_max = r_max
        self.n_directions = n_directions
        self.fill_ins = fill_ins
        self.closed_form = closed_form
        self.closed_form_imag = closed_form_imag
        self.dimension = dimension
        self.closed_form_radial = closed_form_radial

    # -- fitting ------------------------------------------------------------
    def fit(self, spec=None, y=None):
        if spec is None and self.closed_form is None:
            raise ValueError("fit needs a LevyMeasureSpec unless closed_form is set")
        if spec is not None and not isinstance(spec, M.LevyMeasureSpec):
            raise TypeError(f"expected LevyMeasureSpec, got {type(spec).__name__}")
        check_positive("r_min", self.r_min)
        if not self.r_max > self.r_min:
            raise ValueError("r_max must exceed r_min")
        if int(self.n_radii) < 2:
            raise ValueError("n_radii must be >= 2")
        self.spec_ = spec
        self.dimension_ = spec.dimension if spec is not None else int(self.dimension)
        self._symmetric = bool(spec is not None and spec.is_symmetric)
        self.direction_grid_ = self._directions()
        self._lock = threading.Lock()
        self._step = math.log(self.r_max / self.r_min) / (int(self.n_radii) - 1)
        log_r = np.linspace(math.log(self.r_min), math.log(self.r_max), int(self.n_radii))
        raw = self._raw_max(np.exp(log_r))
        self.psi_table_ = PsiTable(log_r, raw, np.maximum.accumulate(raw))
        return self

    def _directions(self):
        d = self.dimension_
        if d == 1:
            return np.array([[1.0]])
        spec = self.spec_
        fill = M._fill_directions(d, int(self.fill_ins))
        if spec is not None and spec.kind == M.DYADIC:
            return np.concatenate([np.eye(d), fill])
        if spec is not None and spec.kind == M.RADIAL and spec.spherical.kind == "atoms":
            dirs = np.array([v for v, _ in spec.spherical.atom_list()])
            return np.concatenate([dirs, fill])
        if d == 2:
            th = math.pi * np.arange(int(self.n_directions)) / int(self.n_directions)
            return np.stack([np.cos(th), np.sin(th)], axis=1)
        return M._fill_directions(d, int(self.n_directions))

    @property
    def is_radial(self) -> bool:
        check_is_fitted(self, "psi_table_")
        if self.spec_ is None:
            return bool(self.closed_form_radial)
        if self.dimension_ == 1:
            return self.spec_.kind != M.AC or self.spec_.is_symmetric
        return self.spec_.kind == M.RADIAL and self.spec_.spherical.kind == "uniform"

    # -- Phi ----------------------------------------------------------------
    def _as_xi(self, xi):
        xi = np.asarray(xi, dtype=float)
        if self.dimension_ == 1:
            return xi[..., None] if (xi.ndim == 0 or xi.shape[-1:] != (1,)) else xi
        if xi.shape[-1] != self.dimension_:
            raise ValueError(f"xi must have trailing dimension {self.dimension_}")
        return xi

    def re_phi(self, xi) -> np.ndarray:
        """``Re Phi(xi)``; for d = 1 ``xi`` may be any array of scalars."""
        check_is_fitted(self, "dimension_")
        X = self._as_xi(xi)
        shape = X.shape[:-1]
        if self.spec_ is None:
            arg = X[..., 0] if self.dimension_ == 1 else X
            return np.asarray(self.closed_form(arg), dtype=float).reshape(shape)
        spec = self.spec_
        if spec.kind == M.DYADIC:
            return _dyadic_re_phi(spec, X.reshape(-1, spec.dimension)).reshape(shape)
        out = np.zeros(shape)
        for c in spec.components:
            if c.direction is None:
                out += c.weight * _uniform_cos(c.kernel, np.linalg.norm(X, axis=-1), spec.dimension)
            else:
                out += c.weight * c.kernel.cos(X @ c.direction)
        return out

    def im_phi(self, xi) -> np.ndarray:
        check_is_fitted(self, "dimension_")
        X = self._as_xi(xi)
        shape = X.shape[:-1]
        if self.spec_ is None:
            if self.closed_form_imag is None:
                return np.zeros(shape)
            arg = X[..., 0] if self.dimension_ == 1 else X
            return np.asarray(self.closed_form_imag(arg), dtype=float).reshape(shape)
        spec = self.spec_
        out = -(X @ np.array(spec.drift))
        if spec.kind == M.DYADIC or self._symmetric:
            return out
        for c in spec.components:
            if c.direction is not None:
                out = out - c.weight * c.kernel.sin(X @ c.direction)
        return out

    def phi(self, xi) -> np.ndarray:
        """Complex ``Phi(xi)``."""
        return self.re_phi(xi) + 1j * self.im_phi(xi)

    # -- Psi ----------------------------------------------------------------
    def _raw_max(self, radii):
        dirs = self.direction_grid_
        pts = radii[:, None, None] * dirs[None, :, :]
        vals = self.re_phi(pts if self.dimension_ > 1 else pts[..., 0])
        return np.max(vals.reshape(len(radii), -1), axis=1)

    def _extend(self, lo_target=None, hi_target=None):
        with self._lock:
            tab = self.psi_table_
            log_r, raw = tab.log_r, tab.raw
            st = self._step
            if lo_target is not None and lo_target < log_r[0]:
                n_new = int(math.ceil((log_r[0] - lo_target) / st - 1e-9))
                new = log_r[0] - st * np.arange(n_new, 0, -1)
                raw = np.concatenate([self._raw_max(np.exp(new)), raw])
                log_r = np.concatenate([new, log_r])
            if hi_target is not None and hi_target > log_r[-1]:
                n_new = int(math.ceil((hi_target - log_r[-1]) / st - 1e-9))
                new = log_r[-1] + st * np.arange(1, n_new + 1)
                raw = np.concatenate([raw, self._raw_max(np.exp(new))])
                log_r = np.concatenate([log_r, new])
            self.psi_table_ = PsiTable(log_r, raw, np.maximum.accumulate(raw))
            return self.psi_table_

    def _table_for_r(self, r):
        tab = self.psi_table_
        lr = np.log(r)
        if lr.min() < tab.log_r[0] - 1e-12 or lr.max() > tab.log_r[-1] + 1e-12:
            if lr.min() < math.log(1e-30) or lr.max() > math.log(1e30):
                raise PsiRangeError("radius outside [1e-30, 1e30]")
            tab = self._extend(min(lr.min(), tab.log_r[0]), max(lr.max(), tab.log_r[-1]))
        return tab

    def psi(self, r) -> np.ndarray:
        """``Psi(r)`` by log-log interpolation of the running-max table."""
        check_is_fitted(self, "psi_table_")
        r = np.asarray(r, dtype=float)
        if np.any(r <= 0):
            raise ValueError("psi needs r > 0")
        tab = self._table_for_r(r)
        with np.errstate(divide="ignore"):
            lp = np.log(tab.psi)
        out = np.exp(np.interp(np.log(r), tab.log_r, lp))
        return out

    def psi_inverse(self, s) -> np.ndarray:
        """``Psi^{-1}(s) = sup{r : Psi(r) = s}`` (rightmost point on flat segments)."""
        check_is_fitted(self, "psi_table_")
        s = np.asarray(s, dtype=float)
        if np.any(s <= 0):
            raise ValueError("psi_inverse needs s > 0")
        tab = self.psi_table_
        for _ in range(64):
            if s.min() >= tab.psi[0] and s.max() < tab.psi[-1]:
                break
            lo = tab.log_r[0] - math.log(10) if s.min() < tab.psi[0] else None
            hi = tab.log_r[-1] + math.log(10) if s.max() >= tab.psi[-1] else None
            if (lo is not None and lo < math.log(1e-30)) or (hi is not None and hi > math.log(1e30)):
                raise PsiRangeError(f"Psi^-1 argument outside the reachable table range: {s.min():.3g}..{s.max():.3g}")
            tab = self._extend(lo, hi)
        else:
            raise PsiRangeError("could not extend the Psi table far enough")
        P = tab.psi
        k = np.searchsorted(P, s, side="right") - 1
        k = np.clip(k, 0, len(P) - 2)
        exact = P[k] == s
        lp0, lp1 = np.log(P[k]), np.log(P[k + 1])
        frac = (np.log(s) - lp0) / (lp1 - lp0)
        lr = tab.log_r[k] + frac * (tab.log_r[k + 1] - tab.log_r[k])
        lr = np.where(exact, tab.log_r[k], lr)
        return np.exp(lr)

    def h(self, t) -> np.ndarray:
        """Scale function ``h(t) = 1 / Psi^{-1}(1/t)``."""
        t = np.asarray(t, dtype=float)
        if np.any(t <= 0):
            raise ValueError("h needs t > 0")
        return 1.0 / self.psi_inverse(1.0 / t)

    def psi_table_rows(self):
        check_is_fitted(self, "psi_table_")
        tab = self.psi_table_
        return np.column_stack([tab.r, tab.psi])

    # -- Fourier moments ----------------------------------------------------
    def fourier_moment(self, m: int, t: float, *, rtol=1e-10) -> float:
        """``I_m(t) = int exp(-t Re Phi(xi)) |xi|^m dxi`` over R^d."""
        check_is_fitted(self, "psi_table_")
        m = int(m)
        if m < 0:
            raise ValueError("m must be >= 0")
        t = check_positive("t", t)
        d = self.dimension_
        h = float(self.h(t))
        p = m + d
        xi_lo = (1e-14) ** (1.0 / p) / h
        if d == 1:
            dirs, wdir = np.array([[1.0], [-1.0]]), np.array([1.0, 1.0])
        elif self.is_radial:
            dirs, wdir = self.direction_grid_[:1], np.array([M.sphere_area(d)])
        elif d == 2:
            n = 2 * max(64, int(self.n_directions))
            th = 2 * math.pi * np.arange(n) / n
            dirs, wdir = np.stack([np.cos(th), np.sin(th)], 1), np.full(n, 2 * math.pi / n)
        else:
            raise NotImplementedError("non-radial Fourier moments are implemented for d <= 2")
        total = M.sphere_area(d) * xi_lo**p / p

        def panel(v0, v1):
            edges = np.arange(v0, v1 + 1e-12, 0.125)
            if edges[-1] < v1:
                edges = np.append(edges, v1)
            v, w = gauss_legendre_panels(edges, 8)
            xi = np.exp(v)
            pts = xi[:, None, None] * dirs[None, :, :]
            rp = self.re_phi(pts if d > 1 else pts[..., 0])
            integrand = (np.exp(-t * rp) @ wdir) * xi**p
            return float(np.sum(w * integrand)), integrand

        v0, v1 = math.log(xi_lo), math.log(4.0 / h)
        val, _ = panel(v0, v1)
        total += val
        for _ in range(200):
            val, integrand = panel(v1, v1 + math.log(2.0))
            total += val
            v1 += math.log(2.0)
            if integrand.max() * math.log(2.0) <= rtol * 1e-3 * total and integrand[-1] <= integrand.max():
                break
            if v1 > math.log(1e300):
                break
        else:
            raise DivergenceError(f"Fourier moment I_{m}({t}) does not converge")
        if not np.isfinite(total):
            raise DivergenceError(f"Fourier moment I_{m}({t}) is not finite")
        return total

    def fourier_tail(self, m: int, t: float, xi_cut: float) -> float:
        """``int_{|xi| > xi_cut} exp(-t Re Phi) |xi|^m`` for d = 1 (used in grid sizing)."""
        d = self.dimension_
        if d != 1:
            raise NotImplementedError
        total = 0.0
        v1 = math.log(xi_cut)
        for _ in range(400):
            edges = np.linspace(v1, v1 + math.log(2.0), 9)
            v, w = gauss_legendre_panels(edges, 8)
            xi = np.exp(v)
            integrand = 2 * np.exp(-t * self.re_phi(xi)) * xi ** (m + 1)
            piece = float(np.sum(w * integrand))
            total += piece
            v1 += math.log(2.0)
            if piece <= 1e-6 * total or total == 0.0:
                if integrand[-1] <= integrand[0]:
                    break
        return total


def _uniform_cos(kernel, rho, d):
    """``int_S R(|xi| |<theta, e>|) sigma(dtheta)`` for the uniform surface measure."""
    rho = np.asarray(rho, dtype=float)
    if d == 1:
        return 2.0 * kernel.cos(rho)
    # u = cos(angle) in [0, 1]; geometric panels towards u = 0 and Gauss-Jacobi near 1
    a = (d - 3) / 2.0
    uj, wj = special.roots_jacobi(24, a, 0.0)  # weight (1-x)^a on [-1, 1]
    uj = 0.75 + 0.25 * uj
    wj = wj * 0.25 ** (a + 1) * (1 + uj) ** a  # remaining factor (1+u)^a of (1-u^2)^a
    edges = 0.5 ** np.arange(40, 0, -1)
    ug, wg = gauss_legendre_panels(np.append(edges, 0.5), 8)
    wg = wg * (1 - ug**2) ** a
    u = np.concatenate([ug, uj])
    w = np.concatenate([wg, wj])
    vals = kernel.cos(rho.reshape(-1, 1) * u[None, :]) @ w
    c = 2.0 * M.sphere_area(d - 1)
    return (c * vals).reshape(rho.shape)


def _dyadic_re_phi(spec, X, chunk=1 << 15):
    p = spec.dyadic_params
    beta, kappa = p.beta, p.kappa
    rho2 = 2.0 ** (beta - 2 * kappa)
    rho4 = 2.0 ** (beta - 4 * kappa)
    n_big = math.ceil(45.0 / beta)  # 2^(-45) relative geometric tail on the large-atom side
    n_small = math.ceil(math.log2(1.0 / _DYADIC_SMALL) / kappa) + 1
    K = n_big + n_small + 1
    out = np.zeros(X.shape[0])
    for i in range(X.shape[1]):
        a = np.abs(X[:, i])
        for s in range(0, len(a), chunk):
            ai = a[s:s + chunk]
            res = np.zeros_like(ai)
            nz = ai > 0
            x = ai[nz]
            nc = np.floor(np.log2(x) / kappa).astype(np.int64) - n_big
            n = nc[:, None] + np.arange(K)[None, :]
            arg = x[:, None] * 2.0 ** (-n * kappa)
            terms = 2.0 ** (n * beta) * 4.0 * np.sin(0.5 * arg) ** 2
            val = terms.sum(axis=1)
            # Taylor tail for n > nc + K - 1: sum 2^(n beta) (x^2 2^(-2n kappa) - x^4 2^(-4n kappa)/12) * 2
            n1 = nc + K
            val += 2 * (x**2 * rho2**n1 / (1 - rho2) - x**4 * rho4**n1 / (12 * (1 - rho4)))
            res[nz] = val
            out[s:s + chunk] += res
    return out


def dyadic_tail_bound(spec, xi_abs):
    """Bound on the omitted large-atom terms of the dyadic series at ``|xi|``."""
    p = spec.dyadic_params
    n_big = math.ceil(45.0 / p.beta)
    nc = np.floor(np.log2(xi_abs) / p.kappa) - n_big
    return 4 * 2 * spec.dimension * 2.0 ** ((nc - 1) * p.beta) / (1 - 2.0**-p.beta)


# ---------------------------------------------------------------------------
# module-level API
# ---------------------------------------------------------------------------


def power_symbol(alpha: float, scale: float = 1.0, dimension: int = 1, **kw) -> SymbolEvaluator:
    """Evaluator for the closed-form isotropic symbol ``scale * |xi|^alpha``."""

    def re(xi):
        xi = np.asarray(xi, dtype=float)
        r = np.abs(xi) if dimension == 1 else np.linalg.norm(xi, axis=-1)
        return scale * r**alpha

    return SymbolEvaluator(closed_form=re, dimension=dimension, **kw).fit()


def phi(ev: SymbolEvaluator, xi):
    return ev.phi(xi)


def psi(ev: SymbolEvaluator, r):
    return ev.psi(r)


def psi_inverse(ev: SymbolEvaluator, s):
    return ev.psi_inverse(s)


def h_scale(ev: SymbolEvaluator, t):
    return ev.h(t)


def fourier_moment(ev: SymbolEvaluator, m: int, t: float) -> float:
    return ev.fourier_moment(m, t)


def log_grid(lo, hi, n):
    return np.logspace(math.log10(lo), math.log10(hi), n)


# ---------------------------------------------------------------------------
# checks
# ---------------------------------------------------------------------------


@dataclass
class CheckResult:
    name: str
    passed: bool
    constants: dict
    details: dict = field(default_factory=dict)

    def line(self) -> str:
        consts = ", ".join(f"{k}={v:.6g}" for k, v in self.constants.items()
                           if isinstance(v, (int, float)))
        return f"{self.name}: {'PASS' if self.passed else 'FAIL'} ({consts})"


def psi_sandwich(ev: SymbolEvaluator, r_grid=None, *, upper_tol=1e-6) -> CheckResult:
    """Compare ``Psi(r)`` with ``H(1/r)``: fitted ``C8 = min Psi/H`` and the upper bound ``2H``."""
    spec = ev.spec_
    r = log_grid(1e-3, 1e3, 40) if r_grid is None else np.asarray(r_grid, dtype=float)
    H = np.array([M.concentration_H(spec, 1.0 / ri) for ri in r])
    P = ev.psi(r)
    ratio = P / H
    upper_ok = bool(np.all(P <= 2 * H * (1 + upper_tol)))
    return CheckResult("psi_sandwich", upper_ok and ratio.min() > 0,
                       {"C8": float(ratio.min()), "max_ratio": float(ratio.max())},
                       {"r": r, "psi": P, "H": H, "upper_ok": upper_ok})


def phi_pointwise_bounds(ev: SymbolEvaluator, xi_grid=None) -> CheckResult:
    """``(1 - cos 1) int_{|y|<1/|xi|} <xi,y>^2 nu <= Re Phi(xi) <= 2 H(1/|xi|)`` (d = 1)."""
    spec = ev.spec_
    if spec.dimension != 1:
        raise NotImplementedError("pointwise bound check is implemented for d = 1")
    xi = log_grid(1e-3, 1e3, 40) if xi_grid is None else np.asarray(xi_grid, dtype=float)
    re = ev.re_phi(xi)
    lower = np.array([(1 - math.cos(1.0)) * x * x * _open_second_moment(spec, 1.0 / x) for x in xi])
    upper = np.array([2 * M.concentration_H(spec, 1.0 / x) for x in xi])
    ok = bool(np.all(re >= lower * (1 - 1e-8)) and np.all(re <= upper * (1 + 1e-8)))
    return CheckResult("phi_pointwise", ok, {"min_lower_ratio": float(np.min(re / lower)),
                                             "max_upper_ratio": float(np.max(re / upper))},
                       {"xi": xi, "re_phi": re, "lower": lower, "upper": upper})


def _open_second_moment(spec, r):
    if spec.kind == M.DYADIC:
        p = spec.dyadic_params
        rho = 2.0 ** (p.beta - 2 * p.kappa)
        n0 = math.floor(M._dyadic_level(r, p.kappa) + 1e-12) + 1  # strictly inside
        return 2 * spec.dimension * rho**n0 / (1 - rho)
    return M.truncated_second_moment(spec, r)


def _invert_monotone(F, s, lo=1e-300, hi=1e300):
    """Vectorised bisection in log space for increasing ``F``."""
    s = np.asarray(s, dtype=float)
    a = np.full(s.shape, math.log(lo))
    b = np.full(s.shape, math.log(hi))
    for _ in range(200):
        mid = 0.5 * (a + b)
        with np.errstate(over="ignore", invalid="ignore"):
            fm = F(np.exp(mid))
        go_right = fm < s
        a = np.where(go_right, mid, a)
        b = np.where(go_right, b, mid)
    return np.exp(0.5 * (a + b))


@dataclass
class DoublingCheck:
    F: Callable
    M9: float
    M10: float
    M9_extended: float
    M10_extended: float
    passed: bool
    details: dict = field(default_factory=dict)


def check_doubling(ev: SymbolEvaluator, F_candidate: Callable, *, s_range=(1e-3, 1e3), xi_range=(1e-3, 1e3),
                   n=60, extend=10.0, stability=0.05) -> DoublingCheck:
    """Fit ``M9 = sup F^{-1}(2s)/F^{-1}(s)`` and ``M10 = sup max(F/RePhi, RePhi/F)``.

    Both are recomputed on grids extended by ``extend`` on each side; the
    check passes iff all four are finite and the extension changes neither by
    more than ``stability`` (relative).
    """

    def fit(s_lo, s_hi, x_lo, x_hi):
        s = log_grid(s_lo, s_hi, n)
        inv_s = _invert_monotone(F_candidate, s)
        inv_2s = _invert_monotone(F_candidate, 2 * s)
        m9 = float(np.max(inv_2s / inv_s))
        xi = log_grid(x_lo, x_hi, n)
        d = ev.dimension_
        dirs = ev.direction_grid_ if d > 1 else np.array([[1.0]])
        pts = xi[:, None, None] * dirs[None]
        re = ev.re_phi(pts if d > 1 else pts[..., 0]).reshape(len(xi), -1)
        with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
            Fv = np.asarray(F_candidate(xi), dtype=float)[:, None]
            r1 = Fv / re
            r2 = re / Fv
        m10 = float(np.nanmax(np.maximum(r1, r2)))
        return m9, m10

    m9, m10 = fit(s_range[0], s_range[1], xi_range[0], xi_range[1])
    m9e, m10e = fit(s_range[0] / extend, s_range[1] * extend, xi_range[0] / extend, xi_range[1] * extend)
    finite = all(np.isfinite(v) for v in (m9, m10, m9e, m10e))
    stable = finite and m9e <= m9 * (1 + stability) and m10e <= m10 * (1 + stability)
    return DoublingCheck(F_candidate, m9, m10, m9e, m10e, bool(stable))


def check_tauber(f: Callable, g: Callable, a: float, kappa: float, m: float | None = None,
                 r0: float = 0.0, r_grid=None, *, rtol=1e-9) -> CheckResult:
    """Verify ``int_0^r s^a f <= m r^kappa g(r)`` and then ``int_r^inf f <= m a/(a-kappa) r^(kappa-a) g(r)``."""
    from .quadrature import radial_integral

    if not a > kappa >= 0:
        raise ValueError("need a > kappa >= 0")
    r = log_grid(1e-3, 1e3, 40) if r_grid is None else np.asarray(r_grid, dtype=float)
    r = r[r > r0]
    fs = lambda s: float(f(s))
    hyp = np.array([radial_integral(lambda s: s**a * fs(s), 0.0, ri, rtol=rtol) for ri in r])
    concl = np.array([radial_integral(fs, ri, np.inf, rtol=rtol) for ri in r])
    gr = np.array([float(g(ri)) for ri in r])
    base = r**kappa * gr
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.where(base > 0, hyp / base, np.where(hyp > 0, np.inf, 0.0))
    m_fit = float(np.max(ratios)) if len(ratios) else 0.0
    m_used = m_fit if m is None else float(m)
    hyp_ok = bool(np.all(hyp <= m_used * base * (1 + rtol * 10) + 1e-300))
    bound = m_used * a / (a - kappa) * r ** (kappa - a) * gr
    concl_ok = bool(np.all(concl <= bound * (1 + rtol * 10) + 1e-300))
    return CheckResult("tauber", hyp_ok and concl_ok, {"m": m_used, "m_fit": m_fit},
                       {"r": r, "hypothesis": hyp, "conclusion": concl, "bound": bound,
                        "hypothesis_holds": hyp_ok, "conclusion_holds": concl_ok})


def check_re_phi_corollaries(ev: SymbolEvaluator, f: Callable, kappa: float, xi_grid=None,
                             *, spread=1e3) -> CheckResult:
    """Fit ``C9 = inf RePhi / (|xi|^2 g1(1/|xi|))`` and ``C10 = sup RePhi / (|xi|^(2-kappa) g2(1/|xi|))``.

    ``g1(r) = int_0^r s^2 f`` and ``g2(r) = g1(r) / r^kappa`` (so ``M8 = 1``).
    """
    from .quadrature import radial_integral

    spec = ev.spec_
    if spec is None or spec.kind != M.RADIAL:
        raise ValueError("corollary check needs a radial_profile spec")
    if spec.spherical.kind == "atoms":
        dirs = np.array([v for v, _ in spec.spherical.atom_list()])
        if np.linalg.matrix_rank(dirs) < spec.dimension:
            raise ValueError("spherical measure is degenerate")
    xi = log_grid(1e-3, 1e3, 40) if xi_grid is None else np.asarray(xi_grid, dtype=float)
    d = ev.dimension_
    dirs = ev.direction_grid_
    pts = xi[:, None, None] * dirs[None]
    re = ev.re_phi(pts if d > 1 else pts[..., 0]).reshape(len(xi), -1)
    g1 = np.array([radial_integral(lambda s: s * s * float(f(s)), 0.0, 1.0 / x) for x in xi])
    g2 = g1 / (1.0 / xi) ** kappa
    c9 = float(np.min(re.min(axis=1) / (xi**2 * g1)))
    c10 = float(np.max(re.max(axis=1) / (xi ** (2 - kappa) * g2)))
    g2_monotone = bool(np.all(np.diff(g2[::-1]) <= 1e-9 * g2[::-1][:-1]))
    ok = c9 > 0 and np.isfinite(c10) and c10 / c9 <= spread
    return CheckResult("re_phi_corollaries", bool(ok), {"C9": c9, "C10": c10},
                       {"g2_nonincreasing": g2_monotone})


def check_h_ratio_decay(ev: SymbolEvaluator, a_list=None, t_grid=None, *, C8: float | None = None,
                        slack=1.1) -> CheckResult:
    """``s(a) = max_t h(a t)/h(t)``: nonincreasing along decreasing ``a`` and ``<= sqrt(2a/C8)``."""
    a = 2.0 ** -np.arange(1, 11) if a_list is None else np.asarray(a_list, dtype=float)
    t = log_grid(1e-2, 1e2, 41) if t_grid is None else np.asarray(t_grid, dtype=float)
    if C8 is None:
        C8 = psi_sandwich(ev).constants["C8"]
    ht = ev.h(t)
    s = np.array([float(np.max(ev.h(ai * t) / ht)) for ai in a])
    order = np.argsort(-a)  # decreasing a
    monotone = bool(np.all(np.diff(s[order]) <= 1e-12))
    bound = np.sqrt(2 * a / C8) * slack
    within = bool(np.all(s <= bound))
    return CheckResult("h_ratio_decay", monotone and within,
                       {"C8": float(C8), "s_min": float(s.min()), "s_max": float(s.max())},
                       {"a": a, "s": s, "bound": bound, "monotone": monotone, "within_bound": within})
