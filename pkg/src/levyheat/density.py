"""Transition densities by Fourier inversion and the compound-Poisson splitting oracle.

The density is ``p_t(x) = (2 pi)^-d int exp(-t Phi(xi)) exp(-i <x, xi>) dxi``.  On a
lattice ``x_j = j dx`` with period ``P = N dx`` the discrete inversion returns the
periodised density ``sum_k p_t(x + k P)`` exactly up to the Fourier tail beyond
``xi_max = pi / dx``.  Both errors are controlled:

* ``dx`` is chosen so that ``int_{|xi| > xi_max} exp(-t Re Phi) |xi|^|beta|`` is below
  ``tail_rtol`` times the full Fourier moment;
* ``P`` is doubled until the periodised density at the antipode ``P/2`` (which
  bounds the aliasing of monotone tails) is below the requested alias tolerance.
"""

from __future__ import annotations

import csv
import math
import struct
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, stats

from . import measure as M
from ._validation import check_positive
from .quadrature import TruncatedKernel, gauss_legendre_panels
from .symbol import SymbolEvaluator

MAX_POINTS = 1 << 23
_BINARY_MAGIC = b"LHGD"
_BINARY_VERSION = 1


class CapacityError(MemoryError):
    """The requested accuracy needs more grid points than the memory budget allows."""


class GridMismatchError(ValueError):
    pass


@dataclass(frozen=True)
class Grid:
    """Uniform lattice window: ``origin + step * index`` along each of the ``d`` axes."""

    origin: tuple
    step: float
    shape: tuple

    @property
    def dimension(self) -> int:
        return len(self.shape)

    def axes(self):
        return [o + self.step * np.arange(n) for o, n in zip(self.origin, self.shape)]

    def coords(self):
        ax = self.axes()
        if self.dimension == 1:
            return ax[0]
        return np.meshgrid(*ax, indexing="ij")

    @property
    def half_width(self) -> float:
        return max(max(abs(o), abs(o + self.step * (n - 1))) for o, n in zip(self.origin, self.shape))

    @classmethod
    def symmetric(cls, half_width: float, step: float, dimension: int = 1) -> "Grid":
        J = int(math.ceil(half_width / step - 1e-9))
        return cls((-J * step,) * dimension, float(step), (2 * J + 1,) * dimension)

    def lattice_offset(self):
        """Integer index of the origin on the lattice ``step * Z``."""
        k = [o / self.step for o in self.origin]
        ki = [int(round(v)) for v in k]
        if any(abs(a - b) > 1e-6 for a, b in zip(k, ki)):
            raise GridMismatchError("grid origin is not on the lattice step * Z")
        return ki


@dataclass
class GridDensity:
    """``d^beta p_t`` sampled on a :class:`Grid`; ``values[j] = d^beta p_t(x_j + shift)``."""

    t: float
    grid: Grid
    values: np.ndarray
    derivative_order: tuple = (0,)
    inversion_params: dict = field(default_factory=dict)
    shift: tuple = (0.0,)

    @property
    def x(self):
        return self.grid.coords()

    @property
    def dimension(self):
        return self.grid.dimension

    def mass(self) -> float:
        return float(self.values.sum() * self.grid.step**self.dimension)

    @property
    def peak(self) -> float:
        return float(np.max(np.abs(self.values)))

    def clipped(self) -> np.ndarray:
        return np.clip(self.values, 0.0, None)

    def symmetry_error(self) -> float:
        """Max relative deviation from ``p(x) = p(-x)`` (grid must be symmetric)."""
        v = self.values
        flipped = v[tuple(slice(None, None, -1) for _ in range(v.ndim))]
        return float(np.max(np.abs(v - flipped)) / self.peak)

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            if self.dimension == 1:
                w.writerow(["x", "value"])
                for xi, vi in zip(self.x, self.values):
                    w.writerow([f"{xi:.17g}", f"{vi:.17g}"])
            else:
                X = self.x
                w.writerow([f"x{i + 1}" for i in range(self.dimension)] + ["value"])
                for idx in np.ndindex(self.values.shape):
                    w.writerow([f"{X[k][idx]:.17g}" for k in range(self.dimension)] + [f"{self.values[idx]:.17g}"])

    def to_binary(self, path):
        """Header (magic, version, d, t, dx, origin[d], shape[d], beta[d]) then float64 values."""
        d = self.dimension
        beta = tuple(self.derivative_order) + (0,) * (d - len(self.derivative_order))
        with open(path, "wb") as fh:
            fh.write(_BINARY_MAGIC)
            fh.write(struct.pack("<II", _BINARY_VERSION, d))
            fh.write(struct.pack("<dd", self.t, self.grid.step))
            fh.write(struct.pack(f"<{d}d", *self.grid.origin))
            fh.write(struct.pack(f"<{d}Q", *self.grid.shape))
            fh.write(struct.pack(f"<{d}I", *beta[:d]))
            fh.write(np.ascontiguousarray(self.values, dtype="<f8").tobytes(order="C"))

    @classmethod
    def from_binary(cls, path) -> "GridDensity":
        with open(path, "rb") as fh:
            if fh.read(4) != _BINARY_MAGIC:
                raise ValueError("not a grid density dump")
            version, d = struct.unpack("<II", fh.read(8))
            if version != _BINARY_VERSION:
                raise ValueError(f"unsupported dump version {version}")
            t, step = struct.unpack("<dd", fh.read(16))
            origin = struct.unpack(f"<{d}d", fh.read(8 * d))
            shape = struct.unpack(f"<{d}Q", fh.read(8 * d))
            beta = struct.unpack(f"<{d}I", fh.read(4 * d))
            vals = np.frombuffer(fh.read(), dtype="<f8").reshape(shape).copy()
        return cls(t, Grid(tuple(origin), step, tuple(int(s) for s in shape)), vals, tuple(beta))


# ---------------------------------------------------------------------------
# Fourier inversion
# ---------------------------------------------------------------------------


def _beta_tuple(beta, d):
    if beta is None:
        return (0,) * d
    beta = tuple(int(b) for b in np.atleast_1d(beta))
    if len(beta) != d or any(b < 0 for b in beta):
        raise ValueError(f"derivative multi-index must have {d} nonnegative entries")
    return beta


def choose_xi_max(ev: SymbolEvaluator, t: float, m: int = 0, *, tail_rtol=1e-10) -> float:
    """Smallest ``xi_max`` (to ~3%) whose Fourier tail is below ``tail_rtol * I_m(t)``."""
    total = ev.fourier_moment(m, t)
    h = float(ev.h(t))
    tail = lambda x: _fourier_tail(ev, m, t, x)
    lo, hi = 0.5 / h, 2.0 / h
    while tail(hi) > tail_rtol * total:
        lo, hi = hi, 2 * hi
        if hi * h > 1e12:
            raise CapacityError(f"Fourier tail criterion unreachable for t={t}")
    for _ in range(6):
        mid = math.sqrt(lo * hi)
        if tail(mid) > tail_rtol * total:
            lo = mid
        else:
            hi = mid
    return hi


def _fourier_tail(ev, m, t, xi_cut):
    d = ev.dimension_
    if d == 1:
        return ev.fourier_tail(m, t, xi_cut)
    # polar integration beyond the cut (radial symbols: one ray times sphere area)
    if ev.is_radial:
        dirs, wdir = ev.direction_grid_[:1], np.array([M.sphere_area(d)])
    else:
        n = 128
        th = 2 * math.pi * np.arange(n) / n
        dirs, wdir = np.stack([np.cos(th), np.sin(th)], 1), np.full(n, 2 * math.pi / n)
    total = 0.0
    v1 = math.log(xi_cut)
    for _ in range(400):
        edges = np.linspace(v1, v1 + math.log(2.0), 9)
        v, w = gauss_legendre_panels(edges, 8)
        xi = np.exp(v)
        re = ev.re_phi(xi[:, None, None] * dirs[None])
        piece = float(np.sum(w * (np.exp(-t * re) @ wdir) * xi ** (m + d)))
        total += piece
        v1 += math.log(2.0)
        if piece <= 1e-6 * total or total == 0.0:
            break
    return total


def _spectral_factor(ev, t, xi, beta, shift):
    """``(-i xi)^beta exp(-t Phi(xi) - i <xi, shift>)`` on an array of frequency points."""
    ph = ev.phi(xi)
    d = ev.dimension_
    X = xi if d > 1 else xi[..., None]
    val = np.exp(-t * ph)
    for k, b in enumerate(beta):
        if b:
            val = val * (-1j * X[..., k]) ** b
    if any(shift):
        val = val * np.exp(-1j * (X @ np.asarray(shift, dtype=float)))
    return val


def _invert_1d(ev, t, dx, N, beta, shift):
    dxi = 2 * math.pi / (N * dx)
    xi = dxi * np.arange(N // 2 + 1)
    spec = _spectral_factor(ev, t, xi, beta, shift)
    spec[-1] = spec[-1].real  # Nyquist term
    # p(x_j) = dxi/(2 pi) sum_k phi_k e^{-i xi_k x_j}; the sum is real by Hermitian symmetry
    return np.fft.irfft(np.conj(spec), n=N) * (N * dxi / (2 * math.pi))


def _invert_2d(ev, t, dx, N, beta, shift):
    dxi = 2 * math.pi / (N * dx)
    k1 = np.fft.fftfreq(N, d=1.0 / N) * dxi
    k2 = dxi * np.arange(N // 2 + 1)
    K1, K2 = np.meshgrid(k1, k2, indexing="ij")
    xi = np.stack([K1, K2], axis=-1)
    spec = _spectral_factor(ev, t, xi, beta, shift)
    return np.fft.irfft2(np.conj(spec), s=(N, N)) * (N * N * dxi * dxi / (2 * math.pi) ** 2)


def _window(full, offsets, shape):
    """Extract a lattice window from a periodic array (negative indices wrap)."""
    idx = [(o + np.arange(n)) % full.shape[k] for k, (o, n) in enumerate(zip(offsets, shape))]
    return full[np.ix_(*idx)]


def _antipode_level(full, frac=0.02):
    N = full.shape[0]
    w = max(1, int(frac * N))
    sl = slice(N // 2 - w, N // 2 + w + 1)
    if full.ndim == 1:
        return float(np.max(np.abs(full[sl])))
    return float(max(np.max(np.abs(full[sl, :])), np.max(np.abs(full[:, sl]))))


def invert_density(ev: SymbolEvaluator, t: float, grid: Grid | None = None, beta=None, *, extent=None,
                   xi_max=None, oversample=1.0, tail_rtol=1e-10, alias_rtol=1e-6, alias_atol=None,
                   max_points=MAX_POINTS, shift=None, period=None, alias_reference="window_min") -> GridDensity:
    """Compute ``d^beta p_t`` on a lattice window by discrete Fourier inversion.

    Parameters
    ----------
    grid : Grid, optional
        Output window.  Its step fixes ``dx``; otherwise ``dx = pi / xi_max`` and a
        symmetric window of half width ``extent`` (default ``10 h(t)``) is used.
    alias_rtol, alias_atol : float
        Aliasing target: ``alias_atol`` if given, else ``alias_rtol`` times the
        smallest |value| in the window (``alias_reference="window_min"``, densities
        only) or times the peak (``"peak"``, always used for derivatives).
    shift : sequence, optional
        Centering vector ``s``; the result holds ``d^beta p_t(x + s)``.
    """
    check_is_fitted_ev(ev)
    t = check_positive("t", t)
    d = ev.dimension_
    if d not in (1, 2):
        raise NotImplementedError("numerical inversion is implemented for d = 1, 2")
    beta = _beta_tuple(beta, d)
    shift = tuple(float(s) for s in (shift if shift is not None else (0.0,) * d))
    m = sum(beta)
    h = float(ev.h(t))
    if grid is not None:
        dx = grid.step
        auto_xi = math.pi / dx
    else:
        auto_xi = xi_max if xi_max is not None else choose_xi_max(ev, t, m, tail_rtol=tail_rtol)
        dx = math.pi / (auto_xi * oversample)
        half = extent if extent is not None else 10.0 * h
        grid = Grid.symmetric(half, dx, d)
    offsets = grid.lattice_offset()
    W = grid.half_width
    budget = max_points if d == 1 else int(math.isqrt(max_points))
    if period is not None:
        N = 1 << int(math.ceil(math.log2(period / dx)))
    else:
        N = 1 << max(8, int(math.ceil(math.log2(max(4 * W, 8 * h) / dx))))
    while True:
        if N > budget:
            raise CapacityError(f"need more than {budget} points per axis at t={t} (dx={dx:.3g})")
        full = (_invert_1d if d == 1 else _invert_2d)(ev, t, dx, N, beta, shift)
        vals = _window(full, offsets, grid.shape)
        peak = float(np.max(np.abs(full)))
        level = _antipode_level(full)
        # sum_{k != 0} p(x + kP) <= antipode level for tails decaying at least like |x|^-1.5
        alias_est = level
        if alias_atol is not None:
            target = alias_atol
        elif m == 0 and alias_reference == "window_min":
            target = alias_rtol * float(np.min(np.abs(vals)))
        else:
            target = alias_rtol * peak
        if period is not None or alias_est <= target:
            break
        N *= 2
    tail = _fourier_tail(ev, m, t, math.pi / dx) if d == 1 else float("nan")
    params = {"xi_max": math.pi / dx, "N_points": N, "period": N * dx, "alias_est": alias_est,
              "alias_target": target, "fourier_tail": tail, "h": h, "windowing": False,
              "pre_clip_min": float(np.min(vals)), "tail_rtol": tail_rtol, "auto_xi_max": auto_xi}
    return GridDensity(t, grid, vals, beta, params, shift)


def check_is_fitted_ev(ev):
    if not hasattr(ev, "psi_table_"):
        raise ValueError("SymbolEvaluator must be fitted first")


def derivative_fd_oracle(density: GridDensity, direction: int = 0, *, order: int = 4) -> GridDensity:
    """Central finite-difference derivative along ``direction`` (end points trimmed)."""
    if any(density.derivative_order):
        raise ValueError("finite differences are taken of the density itself")
    if order not in (2, 4):
        raise ValueError("order must be 2 or 4")
    v = density.values
    dx = density.grid.step
    ax = direction
    k = order // 2
    n = v.shape[ax]
    sl = lambda a, b: tuple(slice(a, b) if i == ax else slice(None) for i in range(v.ndim))
    if order == 2:
        der = (v[sl(2, n)] - v[sl(0, n - 2)]) / (2 * dx)
    else:
        der = (-v[sl(4, n)] + 8 * v[sl(3, n - 1)] - 8 * v[sl(1, n - 3)] + v[sl(0, n - 4)]) / (12 * dx)
    # the gap between the two stencils estimates the truncation error
    d2 = (v[sl(2, n)] - v[sl(0, n - 2)]) / (2 * dx)
    d2 = d2[sl(k - 1, d2.shape[ax] - (k - 1))] if k > 1 else d2
    est = float(np.max(np.abs(der - d2)) / max(np.max(np.abs(der)), 1e-300))
    origin = list(density.grid.origin)
    origin[ax] += k * dx
    shape = list(density.grid.shape)
    shape[ax] -= 2 * k
    beta = [0] * density.dimension
    beta[ax] = 1
    params = dict(density.inversion_params)
    params.update({"fd_order": order, "fd_error_estimate": est, "fd_warning": est > 1e-2})
    return GridDensity(density.t, Grid(tuple(origin), dx, tuple(shape)), der, tuple(beta), params,
                       density.shift)


# ---------------------------------------------------------------------------
# compound-Poisson splitting
# ---------------------------------------------------------------------------


@dataclass
class SplitRepresentation:
    """``P_t = ptilde_t^r * Pbar_t^r * delta_{t b_r}`` on a common lattice."""

    r: float
    t: float
    small_jump_density: GridDensity
    atom_weight: float
    histogram: np.ndarray  # masses of sum_{n>=1} on the big periodic lattice (index 0 = origin)
    series_terms_used: int
    tail_bound: float
    mass_leak: float  # mass of far jumps spread uniformly over the period (not lost)
    intensity: float  # t |nubar_r|
    window: Grid  # lattice window of the computation (finer than the output when stride > 1)
    big_small: np.ndarray = field(repr=False, default=None)
    stride: int = 1  # output nodes are every stride-th window node

    @property
    def total_mass(self) -> float:
        return float(self.atom_weight + self.histogram.sum())


_TRUNC_CACHE: dict = {}


def _truncated(kernel, r):
    key = (id(kernel), float(r))
    tk = _TRUNC_CACHE.get(key)
    if tk is None or tk.kernel is not kernel:
        tk = TruncatedKernel(kernel, r)
        _TRUNC_CACHE[key] = tk
    return tk


def small_jump_exponent(spec: M.LevyMeasureSpec, r: float, xi: np.ndarray) -> np.ndarray:
    """``-int_{|y|<r} (e^{i xi y} - 1 - i xi y) nu(dy)`` for d = 1."""
    xi = np.asarray(xi, dtype=float)
    if spec.kind == M.DYADIC:
        # symmetric atoms below r; terms decay like 2^(n (beta - 2 kappa))
        p = spec.dyadic_params
        n_min = math.ceil(M._dyadic_level(r, p.kappa) - 1e-12)
        n = np.arange(n_min, n_min + int(60 / (2 * p.kappa - p.beta)) + 40)
        rad = 2.0 ** (-n * p.kappa)
        keep = rad < r
        rad, mass = rad[keep], 2.0 ** (n[keep] * p.beta)
        out = np.zeros(xi.shape)
        for a, mm in zip(rad, mass):
            out += 2 * mm * 2 * np.sin(0.5 * xi * a) ** 2
        return out + 0j
    out = np.zeros(xi.shape, dtype=complex)
    sym = spec.is_symmetric
    for c in spec.components:
        tk = _truncated(c.kernel, r)
        w = xi * float(c.direction[0])
        out += c.weight * (tk.cos(w) if sym else tk.cos(w) - 1j * tk.sin(w))
    return out


def _large_jump_histogram(spec, r, dx, K):
    """Masses of nubar_r at lattice nodes ``j dx``, ``|j| <= K`` (nearest node), and the leak."""
    hist = np.zeros(2 * K + 1)
    if spec.kind == M.DYADIC:
        y, w = M.dyadic_atoms(spec, r, 1e300 ** 0.25)
        y = y[:, 0]
        j = np.rint(y / dx).astype(np.int64)
        inside = np.abs(j) <= K
        np.add.at(hist, j[inside] + K, w[inside])
        return hist, float(w[~inside].sum())
    leak = 0.0
    for c in spec.components:
        masses = c.weight * _cell_masses(c.kernel, r, dx, np.arange(1, K + 1))
        if float(c.direction[0]) > 0:
            hist[K + 1:] += masses
        else:
            hist[:K][::-1] += masses
        if r <= 0.5 * dx:
            # the cell around the origin also holds jumps r <= |y| < dx/2
            hist[K] += c.weight * (c.kernel.tail(r) - c.kernel.tail(0.5 * dx))
        leak += c.weight * c.kernel.tail(max((K + 0.5) * dx, r))
    return hist, leak


def _cell_masses(kernel, r, dx, j):
    """``int Q`` over ``[(j - 1/2) dx, (j + 1/2) dx] cap [r, inf)`` for positive ``j`` (GL-8)."""
    a = np.maximum((j - 0.5) * dx, r)
    b = (j + 0.5) * dx
    out = np.zeros(len(j))
    active = b > a
    if not np.any(active):
        return out
    x, wq = np.polynomial.legendre.leggauss(8)
    aa, bb = a[active], b[active]
    nodes = 0.5 * (bb - aa)[:, None] * x[None] + 0.5 * (bb + aa)[:, None]
    out[active] = 0.5 * (bb - aa) * (kernel.Q(nodes) @ wq)
    return out


def _periodic_large_jumps(spec, r, dx, N, n_wraps=2):
    """Periodisation of nubar_r on the circle of ``N`` nodes (index ``j mod N``).

    Cells up to ``(n_wraps + 1/2)`` periods are integrated and wrapped; the mass
    beyond is spread uniformly (its periodisation is flat to within ``O(1/n_wraps)``).
    Returns the histogram and the uniformly spread mass.
    """
    circ = np.zeros(N)
    P = N * dx
    if spec.kind == M.DYADIC:
        y, w = M.dyadic_atoms(spec, r, 1e30)
        y = y[:, 0]
        # linear (cloud-in-cell) assignment keeps the first moment of each atom
        u = np.mod(y, P) / dx
        j = np.floor(u).astype(np.int64)
        frac = u - j
        np.add.at(circ, j % N, w * (1 - frac))
        np.add.at(circ, (j + 1) % N, w * frac)
        spread = M.large_jump_mass(spec, r) - float(w.sum())
        circ += spread / N
        return circ, spread
    half = N // 2
    jpos = np.arange(1, (2 * n_wraps + 1) * half + 1)
    spread = 0.0
    for c in spec.components:
        masses = c.weight * _cell_masses(c.kernel, r, dx, jpos)
        idx = jpos % N if float(c.direction[0]) > 0 else (-jpos) % N
        np.add.at(circ, idx, masses)
        if r <= 0.5 * dx:
            circ[0] += c.weight * (c.kernel.tail(r) - c.kernel.tail(0.5 * dx))
        far = c.weight * c.kernel.tail(max((jpos[-1] + 0.5) * dx, r))
        circ += far / N
        spread += far
    return circ, spread


def split_semigroup(ev: SymbolEvaluator, spec: M.LevyMeasureSpec, t: float, r: float | None = None,
                    grid: Grid | None = None, N_terms: int = 20, *, margin_h=40.0,
                    alias_atol_rel=1e-7, refine: int = 1) -> SplitRepresentation:
    """Small-jump density and large-jump exponential series for d = 1.

    ``grid`` is the output window (a lattice window such as ``invert_density(...).grid``).
    Everything is computed on a periodic lattice whose period is doubled until the
    antipodal level of the reconstruction is below ``alias_atol_rel`` times its peak.
    ``refine > 1`` runs on the lattice ``step / refine`` and reports every
    ``refine``-th node; binning the large jumps to nodes costs ``O(step^2)``.
    """
    if spec.dimension != 1:
        raise NotImplementedError("the splitting oracle is implemented for d = 1")
    t = check_positive("t", t)
    if N_terms < 1:
        raise ValueError("N_terms must be >= 1")
    h = float(ev.h(t))
    r = h if r is None else check_positive("r", r)
    if grid is None:
        xi = choose_xi_max(ev, t)
        grid = Grid.symmetric(20 * h, math.pi / xi)
    refine = int(refine)
    if refine < 1:
        raise ValueError("refine must be >= 1")
    out_grid = grid
    if refine > 1:
        grid = Grid(grid.origin, grid.step / refine, tuple((n - 1) * refine + 1 for n in grid.shape))
    dx = grid.step
    offsets = grid.lattice_offset()
    W = grid.half_width
    lam = t * M.large_jump_mass(spec, r)
    atom = math.exp(-lam)
    tail_bound = float(stats.poisson.sf(N_terms, lam)) if lam > 0 else 0.0
    N = 1 << int(math.ceil(math.log2(8 * (W + margin_h * max(h, r)) / dx)))
    while True:
        if N > MAX_POINTS:
            raise CapacityError(f"splitting lattice needs {N} points")
        nu_circ, spread = _periodic_large_jumps(spec, r, dx, N)
        nu_hat = np.fft.rfft(nu_circ)
        series = np.zeros_like(nu_hat)
        term = np.ones_like(nu_hat)
        for n in range(1, N_terms + 1):
            term = term * (t * nu_hat) / n
            series += term
        pbar_rest = np.fft.irfft(series, n=N) * atom
        dxi = 2 * math.pi / (N * dx)
        xi = dxi * np.arange(N // 2 + 1)
        phat = np.exp(-t * small_jump_exponent(spec, r, xi))
        phat[-1] = phat[-1].real
        small_big = np.fft.irfft(np.conj(phat), n=N) * (N * dxi / (2 * math.pi))
        total = np.fft.irfft(np.fft.rfft(small_big) * (np.fft.rfft(pbar_rest) + atom), n=N)
        win = _window(total, offsets, grid.shape)
        if _antipode_level(total) <= alias_atol_rel * float(np.max(np.abs(win))):
            break
        N *= 2
    small_win = _window(small_big, offsets, grid.shape)
    # moving a jump by at most dx/2 changes the convolution by <= dx/2 * Lip(ptilde) per unit mass
    lip = float(np.max(np.abs(np.fft.irfft(np.conj(phat * (-1j * xi)), n=N)))) * (N * dxi / (2 * math.pi))
    params = {"xi_max": math.pi / dx, "N_points": N, "period": N * dx, "r": r,
              "bin_error_bound": 0.5 * dx * lip * (1.0 - atom)}
    sj = GridDensity(t, out_grid, small_win[::refine], (0,), params, (0.0,))
    return SplitRepresentation(r, t, sj, atom, pbar_rest, N_terms, tail_bound, t * spread, lam,
                               grid, small_big, refine)


def reconstruct(split: SplitRepresentation, b_r) -> GridDensity:
    """``p_t = ptilde * Pbar * delta_{t b_r}`` on the split's window."""
    b = float(np.atleast_1d(b_r)[0])
    small = split.big_small
    N = small.shape[0]
    if split.histogram.shape[0] != N:
        raise GridMismatchError("small-jump and large-jump lattices differ")
    dx = split.window.step
    pbar = split.histogram.copy()
    pbar[0] += split.atom_weight
    F = np.fft.rfft(small) * np.fft.rfft(pbar)
    s = split.t * b
    if s != 0.0:
        k = 2 * math.pi * np.arange(N // 2 + 1) / (N * dx)
        F = F * np.exp(-1j * k * s)
    full = np.fft.irfft(F, n=N)
    vals = _window(full, split.window.lattice_offset(), split.window.shape)[::split.stride]
    params = {"r": split.r, "tail_bound": split.tail_bound, "N_points": N}
    return GridDensity(split.t, split.small_jump_density.grid, vals, (0,), params, (0.0,))


def _small_jump_at_zero(ev, spec, t, r, n=1 << 14):
    """``ptilde^r_t(0) = (1/pi) int_0^inf Re exp(-t Phi_r(xi)) dxi`` for symmetric d = 1 specs."""
    xi_max = 4 * choose_xi_max(ev, t)
    xi = np.linspace(0.0, xi_max, n + 1)
    vals = np.exp(-t * small_jump_exponent(spec, r, xi)).real
    return float(integrate.simpson(vals, x=xi) / math.pi)


def scan_split_parameter(ev: SymbolEvaluator, spec: M.LevyMeasureSpec, t_grid, ks=range(1, 11), *,
                         rtol=0.05):
    """Heuristic choice of ``a`` for the split radius ``r = h(a t)``.

    For each ``a = 2^-k`` the split gives the near-zero lower bound
    ``p_t(t b_r) >= exp(-t |nubar_r|) ptilde_t(0)``; ``q(a)`` is the minimum over
    ``t_grid`` of that bound times ``h(t)``.  Scanning ``k`` upward, the first
    ``a`` whose ``q`` moves by less than ``rtol`` from the previous one is
    reported as ``a_stable`` (``None`` if the scan never settles), together with
    the maximiser ``a_best``.  Symmetric d = 1 specs only.
    """
    if spec.dimension != 1 or not spec.is_symmetric:
        raise NotImplementedError("the split scan is implemented for symmetric d = 1 specs")
    a_vals = [2.0 ** -int(k) for k in ks]
    q, table = [], []
    for a in a_vals:
        per_t = []
        for t in t_grid:
            r = float(ev.h(a * t))
            atom = math.exp(-t * M.large_jump_mass(spec, r))
            per_t.append(atom * _small_jump_at_zero(ev, spec, t, r) * float(ev.h(t)))
        q.append(min(per_t))
        table.append(per_t)
    a_stable = None
    for k in range(1, len(q)):
        if q[k - 1] > 0 and abs(q[k] / q[k - 1] - 1) < rtol:
            a_stable = a_vals[k]
            break
    best = int(np.argmax(q))
    return {"a": a_vals, "q": q, "per_t": table, "t": list(t_grid), "a_best": a_vals[best], "q_best": q[best],
            "a_stable": a_stable, "heuristic": True}


# ---------------------------------------------------------------------------
# convolution powers of nubar_r
# ---------------------------------------------------------------------------


def default_test_sets(spec: M.LevyMeasureSpec, r: float):
    """Twenty closed intervals away from the origin, scaled by ``r``."""
    sets = [(r * (2.0**k - 0.5), r * (2.0**k + 0.5)) for k in range(10)]
    sets += [(r * 2.0**k, r * 2.0 ** (k + 1)) for k in range(10)]
    return sets


def _dyadic_powers(spec, r, n, y_max, max_tuples):
    y, w = M.dyadic_atoms(spec, r, y_max)
    y = y[:, 0]
    if len(y) ** n > max_tuples:
        raise ValueError(f"enumeration of {len(y)}^{n} atom tuples exceeds the cap {max_tuples}")
    dist = {0.0: 1.0}
    for _ in range(n):
        new = {}
        for pos, mass in dist.items():
            for yi, wi in zip(y.tolist(), w.tolist()):
                key = pos + yi
                new[key] = new.get(key, 0.0) + mass * wi
        dist = new
    return dist


def convolution_power_check(spec: M.LevyMeasureSpec, r: float, n: int, boxes=None, *, ev=None, f=None,
                            gamma=None, y_max=None, max_tuples=5_000_000, dx=None):
    """Fit ``C18`` with ``nubar_r^{n*}(A) <= C18^n Psi(1/r)^(n-1) f(delta(A)/2) diam(A)^gamma``."""
    if spec.dimension != 1:
        raise NotImplementedError("convolution powers are implemented for d = 1")
    n = int(n)
    if n < 1 or n > 4:
        raise ValueError("n must be in 1..4")
    boxes = default_test_sets(spec, r) if boxes is None else [tuple(map(float, b)) for b in boxes]
    gamma = spec.gamma if gamma is None else gamma
    f = spec.default_f(gamma) if f is None else f
    if ev is None:
        ev = SymbolEvaluator().fit(spec)
    psi = float(ev.psi(1.0 / r))
    values = []
    if spec.kind == M.DYADIC:
        if y_max is None:
            # atoms above y_max carry mass < 1e-13 of the total
            p = spec.dyadic_params
            y_max = r * 2.0 ** (math.ceil(45.0 / p.beta) * p.kappa)
        dist = _dyadic_powers(spec, r, n, y_max, max_tuples)
        pos = np.array(list(dist.keys()))
        mass = np.array(list(dist.values()))
        for lo, hi in boxes:
            values.append(float(mass[(pos >= lo) & (pos <= hi)].sum()))
    else:
        dx = dx or r / 200.0
        K = int(math.ceil(4 * max(abs(b) for box in boxes for b in box) / dx))
        hist, _ = _large_jump_histogram(spec, r, dx, K)
        dist = hist.copy()
        for _ in range(n - 1):
            dist = np.convolve(dist, hist)
        kk = np.arange(len(dist)) - (len(dist) - 1) // 2
        xs = kk * dx
        for lo, hi in boxes:
            values.append(float(dist[(xs >= lo - dx / 2) & (xs <= hi + dx / 2)].sum()))
    ratios = []
    for (lo, hi), v in zip(boxes, values):
        delta = min(abs(lo), abs(hi)) if lo * hi > 0 else 0.0
        if delta <= 0:
            raise ValueError(f"test set [{lo}, {hi}] touches the origin")
        diam = hi - lo
        denom = psi ** (n - 1) * float(f(delta / 2)) * (diam**gamma if gamma > 0 else 1.0)
        ratios.append((v / denom) ** (1.0 / n) if v > 0 else 0.0)
    ratios = np.array(ratios)
    k = int(np.argmax(ratios))
    return {"n": n, "r": r, "C18": float(ratios[k]), "witness": boxes[k], "values": values,
            "ratios": ratios.tolist(), "psi_1_over_r": psi, "finite": bool(np.isfinite(ratios[k]))}


# ---------------------------------------------------------------------------
# small-jump envelope
# ---------------------------------------------------------------------------


def small_jump_envelope_check(split: SplitRepresentation, ev: SymbolEvaluator, t: float | None = None,
                              *, floor=1e-12, far=2.0):
    """Fit ``ptilde_t(x) <= C15 h^-d exp(-C16 (|x|/h) log(1 + |x|/h))`` with ``C17 = 1``."""
    t = split.t if t is None else t
    d = 1
    h = float(ev.h(t))
    x = split.small_jump_density.x
    p = split.small_jump_density.values
    q = p * h**d
    u = np.abs(x) / h
    keep = p > floor * p.max()
    c15_0 = float(q.max())
    sel = keep & (u >= far)
    if not np.any(sel):
        return {"C15": c15_0, "C16": float("nan"), "C17": 1.0, "points": 0, "h": h}
    slopes = (math.log(c15_0) - np.log(q[sel])) / (u[sel] * np.log1p(u[sel]))
    c16 = float(slopes.min())
    env = np.exp(-c16 * u * np.log1p(u))
    c15 = float(np.max(q[keep] / env[keep]))
    return {"C15": c15, "C16": c16, "C17": 1.0, "points": int(sel.sum()), "h": h,
            "u_max": float(u[sel].max())}
