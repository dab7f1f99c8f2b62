"""Quadrature primitives for radial jump profiles.

Everything here works on a single nonincreasing profile ``Q`` on ``(0, inf)``.
Adaptive Gauss-Kronrod (QUADPACK through :func:`scipy.integrate.quad`) is used
on log-spaced panels; oscillatory tails go through the QAWF Fourier-integral
routine.  The two half-line transforms

    cos kernel  R(w) = int_0^inf (1 - cos(w s)) Q(s) ds
    sin kernel  I(w) = int_0^inf (sin(w s) - w s 1{s < 1}) Q(s) ds

are tabulated on a log grid in ``w`` and interpolated with cubic splines, so
that symbols can be evaluated on large Fourier grids.
"""

from __future__ import annotations

import math
import threading
import warnings
from typing import Callable, Sequence

import numpy as np
from scipy import integrate
from scipy.interpolate import CubicSpline

TWO_PI = 2.0 * math.pi

# number of cosine periods integrated directly before switching to QAWF
_DIRECT_PERIODS = 8


class QuadratureError(RuntimeError):
    """Adaptive quadrature failed to reach the requested tolerance."""

    def __init__(self, message: str, achieved: float = float("nan")):
        super().__init__(f"{message} (achieved abs. error {achieved:.3g})")
        self.achieved = achieved


def quad_checked(func, a, b, *, rtol=1e-10, atol=0.0, what="integral", **kwargs):
    """``scipy.integrate.quad`` that raises :class:`QuadratureError` on failure.

    QUADPACK warnings are only fatal when the reported error estimate exceeds
    ``max(atol, 1e3 * rtol * |value|)``; round-off warnings at machine
    precision are common for smooth integrands and are ignored.
    """
    kwargs.setdefault("limit", 400)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        res = integrate.quad(func, a, b, epsabs=atol, epsrel=rtol, full_output=1, **kwargs)
    value, err = res[0], res[1]
    if not np.isfinite(value):
        raise QuadratureError(f"{what}: non-finite value on [{a}, {b}]", err)
    flagged = len(res) > 3
    # errors near the underflow threshold carry no information
    if flagged and err > max(10 * atol, 1e3 * rtol * abs(value), 1e-290):
        raise QuadratureError(f"{what}: no convergence on [{a}, {b}]", err)
    return value, err


def _panels(a: float, b: float, scales: Sequence[float] = ()) -> list[tuple[float, float]]:
    """Split ``(a, b)`` at powers of ten and at ``scales``; ``a`` may be 0, ``b`` inf."""
    if not b > a:
        return []
    lo = a if a > 0 else None
    hi = b if np.isfinite(b) else None
    ref_lo = lo if lo is not None else (hi / 1e16 if hi is not None else 1e-16)
    ref_hi = hi if hi is not None else (lo * 1e16 if lo is not None else 1e16)
    ref_lo = min(ref_lo, 1e-16) if lo is None else ref_lo
    ref_hi = max(ref_hi, 1e16) if hi is None else ref_hi
    j0, j1 = math.floor(math.log10(ref_lo)), math.ceil(math.log10(ref_hi))
    cuts = {10.0**j for j in range(j0, j1 + 1)}
    cuts.update(float(s) for s in scales)
    cuts = sorted(c for c in cuts if a < c < b)
    edges = [a, *cuts, b]
    return list(zip(edges[:-1], edges[1:]))


def radial_integral(g: Callable[[float], float], a: float, b: float, *, rtol=1e-11,
                    scales: Sequence[float] = (), what="radial integral") -> float:
    """Integrate a (possibly singular at 0, slowly decaying) function on ``(a, b)``."""
    total = 0.0
    # outermost panels first: the running total sets an absolute floor for the
    # panels near 0, which may hold a negligible share of the integral
    for lo, hi in reversed(_panels(a, b, scales)):
        atol = 1e-3 * rtol * abs(total)
        if np.isinf(hi):
            # s = lo e^v turns algebraic decay into exponential decay
            def gv(v, lo=lo):
                s = lo * math.exp(min(v, 700.0))
                return g(s) * s if np.isfinite(s) and v < 700.0 else 0.0
            v, _ = quad_checked(gv, 0.0, np.inf, rtol=rtol, atol=atol, what=what)
        else:
            v, _ = quad_checked(g, lo, hi, rtol=rtol, atol=atol, what=what)
        total += v
    return total


def _one_minus_cos(x):
    return 2.0 * np.sin(0.5 * x) ** 2


def _sin_minus_x(x):
    """``sin(x) - x`` without cancellation for small ``|x|``."""
    if isinstance(x, float):
        if abs(x) >= 0.1:
            return math.sin(x) - x
        x2 = x * x
        return -x * x2 / 6.0 * (1.0 - x2 / 20.0 * (1.0 - x2 / 42.0 * (1.0 - x2 / 72.0)))
    x = np.asarray(x, dtype=float)
    out = np.sin(x) - x
    small = np.abs(x) < 0.1
    if np.any(small):
        xs = x[small]
        x2 = xs * xs
        out[small] = -xs * x2 / 6.0 * (1.0 - x2 / 20.0 * (1.0 - x2 / 42.0 * (1.0 - x2 / 72.0)))
    return out


class RadialKernel:
    """Half-line Fourier transforms of one radial profile, with lazy log tables.

    Parameters
    ----------
    Q : callable
        Vectorised, positive, nonincreasing profile on ``(0, inf)``.
    scales : sequence of float
        Characteristic radii of ``Q`` (used as quadrature break points).
    per_decade : int
        Table nodes per decade of ``w``.
    rtol : float
        Relative tolerance of the node quadratures.
    """

    W_FLOOR = 1e-14
    W_CEIL = 1e16

    def __init__(self, Q, *, scales=(1.0,), per_decade=40, rtol=1e-11, scalar=None):
        self.Q = Q
        self._scalar = scalar
        self.scales = tuple(scales)
        self.per_decade = int(per_decade)
        self.rtol = rtol
        self._lock = threading.Lock()
        self._cos_table = None  # (dec_lo, dec_hi, spline)
        self._sin_table = None
        self._tail_cache: dict[float, float] = {}

    def _q(self, s):
        if self._scalar is not None:
            return self._scalar(s)
        return float(self.Q(s))

    def tails(self, xs) -> np.ndarray:
        """``tail`` at many points via one quadrature per gap and a cumulative sum."""
        xs = np.asarray(xs, dtype=float)
        order = np.argsort(xs)
        srt = xs[order]
        out = np.empty_like(srt)
        acc = self.tail(float(srt[-1]))
        out[-1] = acc
        for i in range(len(srt) - 2, -1, -1):
            if srt[i] < srt[i + 1]:
                acc += radial_integral(self._q, float(srt[i]), float(srt[i + 1]), rtol=self.rtol,
                                       scales=self.scales, what="tail mass")
            out[i] = acc
        res = np.empty_like(out)
        res[order] = out
        for x, v in zip(xs.tolist(), res.tolist()):
            self._tail_cache.setdefault(x, v)
        return res

    # -- scalar evaluations -------------------------------------------------
    def tail(self, r: float) -> float:
        """``int_r^inf Q(s) ds``."""
        r = float(r)
        if r not in self._tail_cache:
            self._tail_cache[r] = radial_integral(self._q, r, np.inf, rtol=self.rtol,
                                                  scales=self.scales, what="tail mass")
        return self._tail_cache[r]

    def moment(self, k: float, a: float, b: float) -> float:
        """``int_a^b s^k Q(s) ds``."""
        if b <= a:
            return 0.0
        return radial_integral(lambda s: s**k * self._q(s), a, b, rtol=self.rtol,
                               scales=self.scales, what=f"moment s^{k}")

    def cos_scalar(self, w: float) -> float:
        """Direct quadrature of ``R(w)`` for ``w > 0``."""
        w = float(w)
        U = TWO_PI * _DIRECT_PERIODS
        g = lambda u: self._q(u / w) / w
        pts = [w * s for s in self.scales if 0 < w * s < U]
        pts += [TWO_PI * k for k in range(1, _DIRECT_PERIODS)]
        pts = sorted(set(pts))
        # substitution u = w s keeps the integrand O(1) near the origin
        near, _ = quad_checked(lambda u: _one_minus_cos(u) * g(u), 0.0, U, points=pts,
                               rtol=self.rtol, what="cos kernel (near)")
        tail = self.tail(U / w)
        osc = 0.0
        if tail > 1e-17 * abs(near):  # |osc| <= tail, so a tiny tail is negligible
            osc, _ = quad_checked(g, U, np.inf, weight="cos", wvar=1.0, limlst=200,
                                  rtol=self.rtol, atol=1e-14 * tail, what="cos kernel (QAWF)")
        return near + tail - osc

    def sin_scalar(self, w: float) -> float:
        """Direct quadrature of ``I(w)`` for ``w > 0``."""
        w = float(w)
        U = TWO_PI * _DIRECT_PERIODS
        if w <= U:
            inner = radial_integral(lambda s: float(_sin_minus_x(np.array([w * s]))[0]) * self._q(s),
                                    0.0, 1.0, rtol=self.rtol, scales=self.scales,
                                    what="sin kernel (inner)")
            g = lambda u: self._q(u / w) / w
            mid = radial_integral(lambda u: math.sin(u) * g(u), w, U, rtol=self.rtol,
                                  scales=[TWO_PI * k for k in range(1, _DIRECT_PERIODS)],
                                  what="sin kernel (mid)")
            outer = 0.0
            if self.tail(U / w) > 1e-17 * abs(inner + mid):
                outer, _ = quad_checked(g, U, np.inf, weight="sin", wvar=1.0, limlst=200,
                                        rtol=self.rtol, atol=1e-14 * max(self.tail(1.0), 1e-300),
                                        what="sin kernel (QAWF)")
            return inner + mid + outer
        s0 = U / w
        inner = radial_integral(lambda s: float(_sin_minus_x(np.array([w * s]))[0]) * self._q(s),
                                0.0, s0, rtol=self.rtol, scales=self.scales,
                                what="sin kernel (inner)")
        g = lambda u: self._q(u / w) / w
        scale = max(self.tail(s0), 1e-300)
        osc = 0.0
        if scale > 1e-17 * abs(inner):
            osc, _ = quad_checked(g, U, np.inf, weight="sin", wvar=1.0, limlst=200, rtol=self.rtol,
                                  atol=1e-14 * scale, what="sin kernel (QAWF)")
        lin = w * self.moment(1.0, s0, 1.0)
        return inner + osc - lin

    # -- tables -------------------------------------------------------------
    def _nodes(self, dec_lo, dec_hi):
        n = (dec_hi - dec_lo) * self.per_decade + 1
        return np.logspace(dec_lo, dec_hi, n)

    def _ensure(self, which: str, wmin: float, wmax: float):
        wmin = max(wmin, self.W_FLOOR)
        if wmax > self.W_CEIL:
            raise ValueError(f"frequency {wmax:.3g} beyond supported kernel range")
        need_lo = math.floor(math.log10(wmin))
        need_hi = math.ceil(math.log10(max(wmax, wmin)))
        table = self._cos_table if which == "cos" else self._sin_table
        if table is not None and table[0] <= need_lo and table[1] >= need_hi:
            return table
        with self._lock:
            table = self._cos_table if which == "cos" else self._sin_table
            if table is not None and table[0] <= need_lo and table[1] >= need_hi:
                return table
            lo = need_lo if table is None else min(table[0], need_lo)
            hi = need_hi if table is None else max(table[1], need_hi)
            lo, hi = min(lo, -2), max(hi, 2)
            w = self._nodes(lo, hi)
            old = {} if table is None else table[3]
            if which == "cos":
                fresh = [x for x in w.tolist() if x not in old]
                if fresh:
                    self.tails(TWO_PI * _DIRECT_PERIODS / np.array(fresh))
                vals = np.array([old.get(x) if x in old else self.cos_scalar(x) for x in w])
                spline = CubicSpline(np.log(w), np.log(vals))
            else:
                cos_tab = self._ensure("cos", w[0], w[-1])
                r = np.exp(cos_tab[2](np.log(w)))
                vals = np.array([old.get(x) if x in old else self.sin_scalar(x) for x in w])
                spline = CubicSpline(np.log(w), vals / (r + w))
            new = (lo, hi, spline, dict(zip(w.tolist(), vals.tolist())))
            if which == "cos":
                self._cos_table = new
            else:
                self._sin_table = new
            return new

    def cos(self, w) -> np.ndarray:
        """Vectorised ``R(|w|)`` (even in ``w``)."""
        w = np.abs(np.asarray(w, dtype=float))
        out = np.zeros_like(w)
        pos = w > 0
        if not np.any(pos):
            return out
        wp = w[pos]
        lo, hi, spline, _ = self._ensure("cos", wp.min(), wp.max())
        lw = np.log(np.maximum(wp, 10.0**lo))
        vals = np.exp(spline(lw))
        below = wp < 10.0**lo
        if np.any(below):
            # log-log linear continuation from the first node
            x0 = lo * math.log(10.0)
            slope = float(spline(x0, 1))
            vals[below] = math.exp(float(spline(x0))) * (wp[below] / 10.0**lo) ** slope
        out[pos] = vals
        return out

    def sin(self, w) -> np.ndarray:
        """Vectorised ``I(w)`` (odd in ``w``)."""
        w = np.asarray(w, dtype=float)
        a = np.abs(w)
        out = np.zeros_like(a)
        pos = a > 0
        if not np.any(pos):
            return out
        ap = a[pos]
        lo, hi, spline, _ = self._ensure("sin", ap.min(), ap.max())
        ratio = spline(np.log(np.maximum(ap, 10.0**lo)))
        below = ap < 10.0**lo
        if np.any(below):
            ratio[below] = float(spline(lo * math.log(10.0)))
        out[pos] = ratio * (self.cos(ap) + ap)
        return np.sign(w) * out


class TruncatedKernel:
    """Transforms of ``Q`` restricted to ``(0, r)``.

    ``cos(w) = int_0^r (1 - cos(w s)) Q(s) ds`` and
    ``sin(w) = int_0^r (sin(w s) - w s) Q(s) ds``.

    For ``w r < 1/2`` a Taylor series in moments of ``Q`` is used.  Otherwise
    the complement over ``(r, inf)`` is written as ``A(w) cos(w r) + B(w) sin(w r)``
    with the non-oscillating factors

        A(w) = int_0^inf cos(w u) Q(r + u) du,   B(w) = -int_0^inf sin(w u) Q(r + u) du

    tabulated on a log grid (both computed with QAWF).
    """

    TAYLOR_TERMS = 9
    SWITCH = 0.5

    def __init__(self, kernel: RadialKernel, r: float, *, per_decade=40, max_wr=300.0):
        self.kernel = kernel
        self.r = float(r)
        self.per_decade = per_decade
        k = self.TAYLOR_TERMS
        mom = [kernel.moment(j, 0.0, self.r) for j in range(2, 2 * k + 2)]
        self._even = np.array(mom[0::2])  # M_2, M_4, ...
        self._odd = np.array(mom[1::2])  # M_3, M_5, ...
        self._tail = kernel.tail(self.r)
        # signed int_r^1 s Q ds (negative when r > 1)
        if self.r <= 1:
            self._lin = kernel.moment(1.0, self.r, 1.0)
        else:
            self._lin = -kernel.moment(1.0, 1.0, self.r)
        self._max_wr = max_wr
        # derivatives of Q at r for the large-w expansions of A and B
        hs = 0.02 * self.r
        q = np.array([float(kernel.Q(self.r + k * hs)) for k in range(-3, 4)])
        self._dq = [
            (q[1] - 8 * q[2] + 8 * q[4] - q[5]) / (12 * hs),
            (-q[1] + 16 * q[2] - 30 * q[3] + 16 * q[4] - q[5]) / (12 * hs**2),
            (q[0] - 8 * q[1] + 13 * q[2] - 13 * q[4] + 8 * q[5] - q[6]) / (8 * hs**3),
        ]
        self._ab = self._build_ab()

    def _q_shift(self, u):
        return float(self.kernel.Q(self.r + u))

    def _build_ab(self):
        dec_lo = math.floor(math.log10(self.SWITCH / self.r))
        dec_hi = math.ceil(math.log10(self._max_wr / self.r))
        w = np.logspace(dec_lo, dec_hi, (dec_hi - dec_lo) * self.per_decade + 1)
        scale = max(self._tail, 1e-300)
        A = np.empty_like(w)
        B = np.empty_like(w)
        for i, wi in enumerate(w):
            A[i] = _fourier_half(self._q_shift, wi, "cos", scale)
            B[i] = -_fourier_half(self._q_shift, wi, "sin", scale)
        # scaling by w r / (1 + w r) (resp. its square) keeps both factors O(1)
        wr = w * self.r
        return (w, CubicSpline(np.log(w), A * wr**2 / (1 + wr) ** 2),
                CubicSpline(np.log(w), B * wr / (1 + wr)))

    def _factors(self, w):
        wgrid, sa, sb = self._ab
        lw = np.log(np.clip(w, wgrid[0], wgrid[-1]))
        wr = w * self.r
        A = sa(lw) * (1 + wr) ** 2 / wr**2
        B = sb(lw) * (1 + wr) / wr
        beyond = w > wgrid[-1]
        if np.any(beyond):
            # leading asymptotics of the half-line transforms
            wb = w[beyond]
            d1, d2, d3 = self._dq
            A[beyond] = -d1 / wb**2 + d3 / wb**4
            B[beyond] = -float(self.kernel.Q(self.r)) / wb + d2 / wb**3
        return A, B

    def cos(self, w) -> np.ndarray:
        w = np.abs(np.asarray(w, dtype=float))
        out = np.empty_like(w)
        small = w * self.r < self.SWITCH
        if np.any(small):
            ws = w[small]
            acc = np.zeros_like(ws)
            for j, m in enumerate(self._even):
                k = j + 1
                acc += (-1) ** (k + 1) * ws ** (2 * k) * m / math.factorial(2 * k)
            out[small] = acc
        big = ~small
        if np.any(big):
            wb = w[big]
            A, B = self._factors(wb)
            out[big] = self.kernel.cos(wb) - self._tail + A * np.cos(wb * self.r) + B * np.sin(wb * self.r)
        return out

    def sin(self, w) -> np.ndarray:
        w = np.asarray(w, dtype=float)
        a = np.abs(w)
        out = np.empty_like(a)
        small = a * self.r < self.SWITCH
        if np.any(small):
            ws = a[small]
            acc = np.zeros_like(ws)
            for j, m in enumerate(self._odd):
                k = j + 1
                acc += (-1) ** k * ws ** (2 * k + 1) * m / math.factorial(2 * k + 1)
            out[small] = acc
        big = ~small
        if np.any(big):
            wb = a[big]
            A, B = self._factors(wb)
            s_r = A * np.sin(wb * self.r) - B * np.cos(wb * self.r)
            out[big] = self.kernel.sin(wb) - s_r + wb * self._lin
        return np.sign(w) * out


def _fourier_half(f, w, kind, scale):
    """``int_0^inf f(u) cos(w u) du`` (or ``sin``) for smooth decaying ``f``."""
    U = TWO_PI * _DIRECT_PERIODS / w
    # both transforms are O(f(0) / w); that sets the absolute error scale
    scale = min(scale, abs(f(0.0)) / w)
    if not scale > 0:
        # the (nonincreasing) profile has underflowed beyond the truncation point
        return 0.0
    trig = math.cos if kind == "cos" else math.sin
    edges = np.linspace(0.0, U, _DIRECT_PERIODS + 1)
    near = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        v, _ = quad_checked(lambda u: f(u) * trig(w * u), lo, hi, rtol=1e-12,
                            atol=1e-13 * scale, what=f"half-line {kind} transform")
        near += v
    # unit frequency and an O(1) integrand keep QAWF well conditioned for any r, w
    f0 = abs(f(0.0))
    far, _ = quad_checked(lambda v: f(v / w) / f0, w * U, np.inf, weight=kind, wvar=1.0, limlst=200,
                          rtol=1e-10, atol=1e-8 * scale * w / f0, what=f"half-line {kind} transform (QAWF)")
    return near + far * f0 / w


def gauss_legendre_panels(edges: np.ndarray, order: int = 16):
    """Nodes and weights of composite Gauss-Legendre on consecutive ``edges``."""
    x, w = np.polynomial.legendre.leggauss(order)
    a, b = edges[:-1, None], edges[1:, None]
    nodes = 0.5 * (b - a) * x[None, :] + 0.5 * (b + a)
    weights = 0.5 * (b - a) * w[None, :]
    return nodes.ravel(), weights.ravel()
