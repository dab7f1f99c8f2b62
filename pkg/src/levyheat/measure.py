"""Declarative Levy measures and their scalar functionals.

A Levy measure is described by a :class:`LevyMeasureSpec` of one of three kinds:

* ``radial_profile``: polar form ``nu(A) = int_S int_0^inf 1_A(s theta) Q(s) ds mu(dtheta)``
  with a :class:`RadialProfileSpec` ``Q`` and a :class:`SphericalMeasureSpec` ``mu``;
* ``discrete_dyadic``: atoms of mass ``2^(n beta)`` at ``+-2^(-n kappa) e_i``;
* ``ac_density``: ``nu(dy) = g(y) dy`` for a user function ``g`` (d <= 2).

Internally radial and AC measures are flattened into *components*: a radial
profile with a weight and either a fixed direction or the uniform surface
measure.  All functionals below are sums over components.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Sequence

import numpy as np
from scipy import special

from ._validation import SpecError, check_in_range, check_positive
from .quadrature import RadialKernel, gauss_legendre_panels, radial_integral

RADIAL = "radial_profile"
DYADIC = "discrete_dyadic"
AC = "ac_density"
KIND_ALIASES = {
    "radialprofile": RADIAL, "radial_profile": RADIAL, "radial": RADIAL,
    "discretedyadic": DYADIC, "discrete_dyadic": DYADIC, "dyadic": DYADIC,
    "acdensity": AC, "ac_density": AC, "ac": AC,
}

FAMILIES = ("pure_stable", "stable_log", "tempered_poly", "custom")
_FAMILY_ALIASES = {
    "purestable": "pure_stable", "stablelog": "stable_log", "temperedpoly": "tempered_poly",
}

# grid used for the sampled profile invariants
_PROFILE_GRID = np.logspace(-8, 8, 161)


def sphere_area(d: int) -> float:
    """Surface measure of the unit sphere in R^d (2 for d = 1)."""
    return 2.0 * math.pi ** (d / 2.0) / math.gamma(d / 2.0)


# ---------------------------------------------------------------------------
# profiles
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RadialProfileSpec:
    """Radial jump intensity ``Q(s)`` on ``(0, inf)``.

    ``family`` is one of ``pure_stable`` (``s^(-1-alpha)``), ``stable_log``
    (``s^(-1-alpha) log(1+s^-kappa)^-beta``), ``tempered_poly``
    (``s^(-1-alpha) (1+s)^kappa exp(-m s^beta)``) or ``custom`` (``Q`` given).
    """

    family: str
    alpha: float | None = None
    kappa: float | None = None
    beta: float | None = None
    m: float | None = None
    Q: Callable | None = field(default=None, compare=False)
    scale_points: tuple = (1.0,)

    def __post_init__(self):
        fam = _FAMILY_ALIASES.get(self.family.lower().replace("-", "_"), self.family.lower())
        object.__setattr__(self, "family", fam)
        if fam not in FAMILIES:
            raise SpecError(f"unknown profile family {self.family!r}; expected one of {FAMILIES}")
        a, k, b, m = self.alpha, self.kappa, self.beta, self.m
        if fam == "pure_stable":
            # alpha = 2 is excluded: s^-3 is not integrable against s^2 near 0
            check_in_range("alpha", a, 0.0, 2.0, lo_open=True, hi_open=True)
        elif fam == "stable_log":
            check_in_range("alpha", a, 0.0, 2.0, lo_open=True)
            check_positive("kappa", k)
            if b is None:
                raise SpecError("stable_log needs beta")
            if not (a > k * b > a - 2):
                raise SpecError(f"stable_log needs alpha > kappa*beta > alpha-2, got kappa*beta={k * b}")
            if a == 2 and not b > 1:
                raise SpecError("stable_log with alpha = 2 needs beta > 1")
        elif fam == "tempered_poly":
            check_in_range("alpha", a, 0.0, 2.0, lo_open=True, hi_open=True)
            check_positive("m", m, strict=False)
            check_in_range("beta", b, 0.0, 1.0, lo_open=True)
            if k is None or not k <= 1 + a:
                raise SpecError("tempered_poly needs kappa <= 1 + alpha")
            if m == 0 and not k < a:
                raise SpecError("tempered_poly with m = 0 needs kappa < alpha")
        else:
            if self.Q is None or not callable(self.Q):
                raise SpecError("custom profile needs a callable Q")
        self._check_sampled_invariants()

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        a = self.alpha
        with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
            if self.family == "stable_log" and np.any(s == 0):
                return np.where(s == 0, np.inf, self(np.where(s == 0, 1.0, s)))
            if self.family == "pure_stable":
                return s ** (-1.0 - a)
            if self.family == "stable_log":
                return s ** (-1.0 - a) * np.log1p(s ** (-self.kappa)) ** (-self.beta)
            if self.family == "tempered_poly":
                return s ** (-1.0 - a) * (1.0 + s) ** self.kappa * np.exp(-self.m * s**self.beta)
            return np.asarray(self.Q(s), dtype=float)

    def _check_sampled_invariants(self):
        q = self(_PROFILE_GRID)
        pos = q[np.isfinite(q)]
        if pos.size == 0 or np.any(pos < 0) or not np.any(pos > 0):
            raise SpecError(f"profile {self.family} must be positive on (0, inf)")
        finite = np.isfinite(q) & (q > 0)
        qq = q[finite]
        if np.any(np.diff(qq) > 1e-12 * qq[:-1]):
            raise SpecError(f"profile {self.family} is not nonincreasing on the sample grid")

    @property
    def doubling_constant(self) -> float:
        """``max Q(s)/Q(2s)`` on the sample grid (``inf`` when Q(2s) underflows)."""
        s = _PROFILE_GRID
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            ratio = self(s) / self(2 * s)
        ratio = np.where(np.isnan(ratio), np.inf, ratio)
        return float(np.max(ratio))

    @property
    def is_doubling(self) -> bool:
        return bool(np.isfinite(self.doubling_constant) and self.doubling_constant < 1e6)

    def scalar(self, s: float) -> float:
        """Fast ``Q(s)`` for a Python float."""
        a = self.alpha
        try:
            if self.family == "pure_stable":
                return s ** (-1.0 - a)
            if self.family == "stable_log":
                return s ** (-1.0 - a) * math.log1p(s ** (-self.kappa)) ** (-self.beta)
            if self.family == "tempered_poly":
                return s ** (-1.0 - a) * (1.0 + s) ** self.kappa * math.exp(-self.m * s**self.beta)
        except (OverflowError, ZeroDivisionError):
            return float(self(np.array(s)))
        return float(self.Q(s))

    @cached_property
    def kernel(self) -> RadialKernel:
        return RadialKernel(self, scales=self.scale_points, scalar=self.scalar)


# ---------------------------------------------------------------------------
# spherical measures
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SphericalMeasureSpec:
    """Spherical part ``mu`` of a polar-form Levy measure.

    ``kind`` is ``uniform`` (``uniform_weight`` times surface measure),
    ``atoms`` (point masses ``weights`` at unit ``directions``) or ``mixture``.
    """

    kind: str
    dimension: int
    directions: tuple = ()
    weights: tuple = ()
    uniform_weight: float = 1.0

    def __post_init__(self):
        kind = self.kind.lower()
        object.__setattr__(self, "kind", kind)
        if kind not in ("uniform", "atoms", "mixture"):
            raise SpecError(f"unknown spherical kind {self.kind!r}")
        d = int(self.dimension)
        if d < 1:
            raise SpecError("dimension must be >= 1")
        dirs = tuple(tuple(float(c) for c in np.atleast_1d(v)) for v in self.directions)
        object.__setattr__(self, "directions", dirs)
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
        if kind in ("atoms", "mixture"):
            if len(dirs) == 0 or len(dirs) != len(self.weights):
                raise SpecError("atoms need equally many directions and weights")
            arr = np.array(dirs)
            if arr.shape[1] != d:
                raise SpecError(f"directions must have length {d}")
            if np.any(np.abs(np.linalg.norm(arr, axis=1) - 1) > 1e-12):
                raise SpecError("atom directions must be unit vectors")
            if any(w <= 0 for w in self.weights):
                raise SpecError("atom weights must be > 0")
            if kind == "atoms" and np.linalg.matrix_rank(arr) < d:
                raise SpecError("atom directions do not span R^d (degenerate spherical measure)")
        if kind in ("uniform", "mixture"):
            check_positive("uniform_weight", self.uniform_weight)

    @property
    def gamma(self) -> float:
        """Order gamma with ``mu(B(theta, rho)) <= c rho^(gamma - 1)``."""
        return float(self.dimension) if self.kind == "uniform" else 1.0

    @property
    def has_uniform(self) -> bool:
        return self.kind in ("uniform", "mixture")

    @property
    def total_mass(self) -> float:
        m = sum(self.weights) if self.kind != "uniform" else 0.0
        if self.has_uniform:
            m += self.uniform_weight * sphere_area(self.dimension)
        return m

    def atom_list(self):
        """Point masses, with the d = 1 uniform measure expanded to atoms at +-1."""
        out = [] if self.kind == "uniform" else [(np.array(v), w) for v, w in zip(self.directions, self.weights)]
        if self.has_uniform and self.dimension == 1:
            out += [(np.array([1.0]), self.uniform_weight), (np.array([-1.0]), self.uniform_weight)]
        return out


def uniform_sphere(d: int, weight: float = 1.0) -> SphericalMeasureSpec:
    return SphericalMeasureSpec("uniform", d, uniform_weight=weight)


def atoms(directions, weights) -> SphericalMeasureSpec:
    dirs = [np.atleast_1d(np.asarray(v, dtype=float)) for v in directions]
    return SphericalMeasureSpec("atoms", len(dirs[0]), tuple(map(tuple, dirs)), tuple(weights))


# ---------------------------------------------------------------------------
# components
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Component:
    """One radial piece: ``weight * Q(s) ds`` along ``direction`` (None = uniform sphere)."""

    profile: Callable
    kernel: RadialKernel
    weight: float
    direction: np.ndarray | None

    def angular_mass(self, d: int) -> float:
        return self.weight * (sphere_area(d) if self.direction is None else 1.0)


@dataclass(frozen=True)
class DyadicParams:
    beta: float
    kappa: float

    def __post_init__(self):
        check_positive("dyadic beta", self.beta)
        check_positive("dyadic kappa", self.kappa)
        if not self.beta < 2 * self.kappa:
            raise SpecError("discrete dyadic measure needs 0 < beta < 2 kappa")


@dataclass(frozen=True)
class LevyMeasureSpec:
    """Immutable description of a Levy measure ``nu`` on R^d and a drift ``b``."""

    kind: str
    dimension: int
    drift: tuple = ()
    profile: RadialProfileSpec | None = None
    spherical: SphericalMeasureSpec | None = None
    dyadic_params: DyadicParams | None = None
    ac_density: Callable | None = field(default=None, compare=False)
    ac_angles: int = 64
    label: str = ""

    def __post_init__(self):
        kind = KIND_ALIASES.get(str(self.kind).lower().replace("-", "_"))
        if kind is None:
            raise SpecError(f"unknown measure kind {self.kind!r}")
        object.__setattr__(self, "kind", kind)
        d = int(self.dimension)
        if d < 1:
            raise SpecError("dimension must be >= 1")
        object.__setattr__(self, "dimension", d)
        drift = tuple(float(v) for v in self.drift) if len(self.drift) else (0.0,) * d
        if len(drift) != d:
            raise SpecError(f"drift must have length {d}")
        object.__setattr__(self, "drift", drift)
        if kind == RADIAL:
            if self.profile is None or self.spherical is None:
                raise SpecError("radial_profile measures need profile and spherical parts")
            if self.spherical.dimension != d:
                raise SpecError("spherical measure dimension mismatch")
        elif kind == DYADIC:
            if self.dyadic_params is None:
                raise SpecError("discrete_dyadic measures need dyadic_params")
        else:
            if self.ac_density is None:
                raise SpecError("ac_density measures need a density function")
            if d > 2:
                raise SpecError("ac_density measures are supported for d <= 2 only")
        self._check_levy()

    # -- structural validation ---------------------------------------------
    def _check_levy(self):
        if self.kind == DYADIC:
            return  # 0 < beta < 2 kappa is equivalent to both conditions
        custom = self.kind == AC or self.profile.family == "custom"
        total = 0.0
        for c in self.components:
            total += c.angular_mass(self.dimension) * _levy_integral(c, check_divergence=custom)
        if not np.isfinite(total):
            raise SpecError("int (1 ^ |y|^2) nu(dy) is not finite")
        eps = 1e-8
        small = sum(c.angular_mass(self.dimension) * (c.kernel.tail(eps) - c.kernel.tail(1.0))
                    for c in self.components)
        if not small >= eps**-0.1:
            raise SpecError(f"nu looks finite: mass of eps < |y| < 1 is {small:.3g} for eps = {eps}")

    # -- components ---------------------------------------------------------
    @cached_property
    def components(self) -> list[Component]:
        d = self.dimension
        if self.kind == RADIAL:
            k = self.profile.kernel
            comps = [Component(self.profile, k, w, v) for v, w in self.spherical.atom_list()]
            if self.spherical.has_uniform and d >= 2:
                comps.append(Component(self.profile, k, self.spherical.uniform_weight, None))
            return comps
        if self.kind == AC:
            g = self.ac_density
            if d == 1:
                out = []
                for sign in (1.0, -1.0):
                    prof = _ac_ray(g, np.array([sign]), jacobian=0)
                    out.append(Component(prof, RadialKernel(prof), 1.0, np.array([sign])))
                return out
            n = int(self.ac_angles)
            out = []
            for j in range(n):
                th = 2 * math.pi * j / n
                v = np.array([math.cos(th), math.sin(th)])
                prof = _ac_ray(g, v, jacobian=1)
                out.append(Component(prof, RadialKernel(prof), 2 * math.pi / n, v))
            return out
        return []

    @property
    def is_symmetric(self) -> bool:
        """True when nu is invariant under y -> -y (checked structurally / on samples)."""
        if self.kind == DYADIC:
            return True
        if self.kind == RADIAL:
            key = lambda v: tuple(np.round(np.asarray(v, dtype=float), 12) + 0.0)
            bag = {}
            for v, w in self.spherical.atom_list():
                bag[key(v)] = bag.get(key(v), 0.0) + w
            return all(abs(bag.get(key(-np.array(v)), -1.0) - w) <= 1e-12 * w for v, w in bag.items())
        pts = np.random.default_rng(0).standard_normal((64, self.dimension))
        pts *= np.exp(np.random.default_rng(1).uniform(-5, 3, (64, 1)))
        a = np.array([self.ac_density(p) for p in pts])
        b = np.array([self.ac_density(-p) for p in pts])
        return bool(np.allclose(a, b, rtol=1e-12, atol=0))

    @property
    def is_centered(self) -> bool:
        return self.is_symmetric and not any(self.drift)

    @property
    def gamma(self) -> float:
        if self.kind == DYADIC:
            return 0.0
        if self.kind == RADIAL:
            return self.spherical.gamma
        return float(self.dimension)

    def default_f(self, gamma: float | None = None) -> Callable:
        """``f(s) = s^(1-gamma) Q(s)`` (``s^(-beta/kappa)`` for the dyadic measure)."""
        if self.kind == DYADIC:
            e = self.dyadic_params.beta / self.dyadic_params.kappa
            return lambda s: np.asarray(s, dtype=float) ** (-e)
        if self.kind == AC:
            raise SpecError("no default f for ac_density measures; pass f explicitly")
        g = self.gamma if gamma is None else gamma
        Q = self.profile
        return lambda s: np.asarray(s, dtype=float) ** (1.0 - g) * Q(s)

    def reflected(self) -> "LevyMeasureSpec":
        """The image of nu (and b) under y -> -y."""
        neg_drift = tuple(-v for v in self.drift)
        if self.kind == RADIAL:
            sph = self.spherical
            dirs = tuple(tuple(-c for c in v) for v in sph.directions)
            new_sph = SphericalMeasureSpec(sph.kind, sph.dimension, dirs, sph.weights, sph.uniform_weight)
            return LevyMeasureSpec(RADIAL, self.dimension, neg_drift, self.profile, new_sph, label=self.label)
        if self.kind == AC:
            g = self.ac_density
            return LevyMeasureSpec(AC, self.dimension, neg_drift, ac_density=lambda y: g(-np.asarray(y)),
                                   ac_angles=self.ac_angles, label=self.label)
        return LevyMeasureSpec(DYADIC, self.dimension, neg_drift, dyadic_params=self.dyadic_params,
                               label=self.label)


def _ac_ray(g, v, jacobian):
    def prof(s):
        s = np.asarray(s, dtype=float)
        flat = s.reshape(-1)
        vals = np.array([g(si * v) for si in flat], dtype=float) * flat**jacobian
        return vals.reshape(s.shape) if s.ndim else vals[0]
    return prof


def _levy_integral(c: Component, check_divergence=False) -> float:
    k = c.kernel
    try:
        inner = k.moment(2.0, 0.0, 1.0)
        total = inner + k.tail(1.0)
    except Exception as exc:  # quadrature blew up: treat as divergent
        raise SpecError(f"int (1 ^ |y|^2) nu(dy) could not be evaluated: {exc}") from exc
    if check_divergence:
        # heuristic: truncations far out must already have converged
        a = k.moment(2.0, 1e-24, 1.0) + radial_integral(lambda s: float(k.Q(s)), 1.0, 1e24)
        b = k.moment(2.0, 1e-12, 1.0) + radial_integral(lambda s: float(k.Q(s)), 1.0, 1e12)
        if not np.isfinite(a) or abs(a - b) > 0.5 * abs(b):
            return float("inf")
    return total


# ---------------------------------------------------------------------------
# constructors
# ---------------------------------------------------------------------------


def _sph(d, spherical):
    return uniform_sphere(d) if spherical is None else spherical


def pure_stable(alpha, d=1, *, spherical=None, drift=(), label=""):
    prof = RadialProfileSpec("pure_stable", alpha=alpha)
    return LevyMeasureSpec(RADIAL, d, drift, prof, _sph(d, spherical), label=label or f"pure_stable({alpha})")


def stable_log(alpha, kappa, beta, d=1, *, spherical=None, drift=(), label=""):
    prof = RadialProfileSpec("stable_log", alpha=alpha, kappa=kappa, beta=beta)
    return LevyMeasureSpec(RADIAL, d, drift, prof, _sph(d, spherical),
                           label=label or f"stable_log({alpha},{kappa},{beta})")


def tempered_poly(alpha, kappa, beta, m, d=1, *, spherical=None, drift=(), label=""):
    prof = RadialProfileSpec("tempered_poly", alpha=alpha, kappa=kappa, beta=beta, m=m)
    return LevyMeasureSpec(RADIAL, d, drift, prof, _sph(d, spherical),
                           label=label or f"tempered_poly({alpha},{kappa},{beta},{m})")


def custom_profile(Q, d=1, *, spherical=None, drift=(), scale_points=(1.0,), label="custom"):
    prof = RadialProfileSpec("custom", Q=Q, scale_points=tuple(scale_points))
    return LevyMeasureSpec(RADIAL, d, drift, prof, _sph(d, spherical), label=label)


def dyadic(beta, kappa, d=1, *, drift=(), label=""):
    return LevyMeasureSpec(DYADIC, d, drift, dyadic_params=DyadicParams(beta, kappa),
                           label=label or f"dyadic({beta},{kappa})")


def ac_measure(g, d=1, *, drift=(), angles=64, label="ac"):
    return LevyMeasureSpec(AC, d, drift, ac_density=g, ac_angles=angles, label=label)


# ---------------------------------------------------------------------------
# dyadic helpers
# ---------------------------------------------------------------------------


def _dyadic_level(r, kappa):
    """``x`` with ``2^(-x kappa) = r``."""
    return -math.log2(r) / kappa


def dyadic_atoms(spec: LevyMeasureSpec, r_min: float, r_max: float, *, closed=(True, True)):
    """Positions (n_atoms, d) and masses of the dyadic atoms with ``r_min <= |y| <= r_max``."""
    p = spec.dyadic_params
    d = spec.dimension
    n_hi = math.floor(_dyadic_level(r_min, p.kappa) + 1e-12) if r_min > 0 else None
    if n_hi is None:
        raise ValueError("dyadic atom enumeration needs r_min > 0")
    n_lo = math.ceil(_dyadic_level(r_max, p.kappa) - 1e-12) if np.isfinite(r_max) else None
    if n_lo is None:
        raise ValueError("dyadic atom enumeration needs finite r_max")
    n = np.arange(n_lo, n_hi + 1)
    rad = 2.0 ** (-n * p.kappa)
    keep = np.ones_like(rad, dtype=bool)
    keep &= (rad >= r_min) if closed[0] else (rad > r_min)
    keep &= (rad <= r_max) if closed[1] else (rad < r_max)
    n, rad = n[keep], rad[keep]
    mass = 2.0 ** (n * p.beta)
    pos, w = [], []
    for i in range(d):
        for sgn in (1.0, -1.0):
            y = np.zeros((len(n), d))
            y[:, i] = sgn * rad
            pos.append(y)
            w.append(mass)
    if not pos:
        return np.zeros((0, d)), np.zeros(0)
    return np.concatenate(pos), np.concatenate(w)


def _dyadic_geom_above(level_excl, beta):
    """``sum_{n <= N} 2^(n beta)`` where N is the largest integer < ``level_excl``."""
    N = math.ceil(level_excl - 1e-12) - 1
    return 2.0 ** (N * beta) / (1.0 - 2.0**-beta)


# ---------------------------------------------------------------------------
# scalar functionals
# ---------------------------------------------------------------------------


def tail_mass(spec: LevyMeasureSpec, r: float) -> float:
    """``nu({|y| > r})``."""
    r = check_positive("r", r)
    if spec.kind == DYADIC:
        p = spec.dyadic_params
        x = _dyadic_level(r, p.kappa)
        # atoms with 2^(-n kappa) > r  <=>  n < x
        N = math.ceil(x - 1e-12) - 1
        return 2 * spec.dimension * 2.0 ** (N * p.beta) / (1 - 2.0**-p.beta)
    return sum(c.angular_mass(spec.dimension) * c.kernel.tail(r) for c in spec.components)


def large_jump_mass(spec: LevyMeasureSpec, r: float) -> float:
    """``|nubar_r| = nu({|y| >= r})`` (differs from :func:`tail_mass` only at atoms)."""
    r = check_positive("r", r)
    if spec.kind == DYADIC:
        p = spec.dyadic_params
        N = math.floor(_dyadic_level(r, p.kappa) + 1e-12)
        return 2 * spec.dimension * 2.0 ** (N * p.beta) / (1 - 2.0**-p.beta)
    return tail_mass(spec, r)


def truncated_second_moment(spec: LevyMeasureSpec, r: float) -> float:
    """``int_{|y| <= r} |y|^2 nu(dy)``."""
    r = check_positive("r", r)
    if spec.kind == DYADIC:
        p = spec.dyadic_params
        rho = 2.0 ** (p.beta - 2 * p.kappa)
        n0 = math.ceil(_dyadic_level(r, p.kappa) - 1e-12)  # 2^(-n kappa) <= r
        return 2 * spec.dimension * rho**n0 / (1 - rho)
    return sum(c.angular_mass(spec.dimension) * c.kernel.moment(2.0, 0.0, r) for c in spec.components)


def concentration_H(spec: LevyMeasureSpec, r: float) -> float:
    """``H(r) = int min(1, |y|^2 / r^2) nu(dy)``, as one quadrature split at ``r``."""
    r = check_positive("r", r)
    if spec.kind == DYADIC:
        p = spec.dyadic_params
        x = _dyadic_level(r, p.kappa)
        n_in = math.floor(x + 1e-12)  # atoms with |y| >= r weigh 1
        rho = 2.0 ** (p.beta - 2 * p.kappa)
        far = 2.0 ** (n_in * p.beta) / (1 - 2.0**-p.beta)
        near = r**-2 * rho ** (n_in + 1) / (1 - rho)
        return 2 * spec.dimension * (far + near)
    total = 0.0
    for c in spec.components:
        Q = c.kernel.Q
        g = lambda s: float(Q(s)) if s >= r else (s / r) ** 2 * float(Q(s))
        total += c.angular_mass(spec.dimension) * radial_integral(
            g, 0.0, np.inf, scales=(r, *c.kernel.scales), what="concentration H")
    return total


def drift_correction(spec: LevyMeasureSpec, r: float) -> np.ndarray:
    """``b_r``: ``b - int_{r<|y|<1} y nu`` for ``r <= 1``, ``b + int_{1<|y|<r} y nu`` otherwise.

    Atoms on the shells ``|y| = r`` or ``|y| = 1`` are excluded (strict inequalities).
    """
    r = check_positive("r", r)
    b = np.array(spec.drift, dtype=float)
    if r == 1.0:
        return b
    lo, hi, sign = (r, 1.0, -1.0) if r < 1 else (1.0, r, 1.0)
    if spec.kind == DYADIC:
        y, w = dyadic_atoms(spec, lo, hi, closed=(False, False))
        return b + sign * (w[:, None] * y).sum(axis=0)
    out = b.copy()
    for c in spec.components:
        if c.direction is None:
            continue  # uniform sphere: zero mean
        out += sign * c.weight * c.kernel.moment(1.0, lo, hi) * c.direction
    return out


# ---------------------------------------------------------------------------
# ball masses
# ---------------------------------------------------------------------------


def _cap_fraction(d, cos_angle):
    """Surface measure of ``{theta: <theta, e> > cos_angle}`` on S^(d-1)."""
    c = np.clip(cos_angle, -1.0, 1.0)
    if d == 2:
        return 2.0 * np.arccos(c)
    phi = np.arccos(c)
    half = 0.5 * sphere_area(d) * special.betainc((d - 1) / 2.0, 0.5, np.sin(phi) ** 2)
    return np.where(c >= 0, half, sphere_area(d) - half)


def _ray_ball_mass(c: Component, x: np.ndarray, rho: float) -> float:
    """``weight * int 1{|s theta - x| < rho} Q(s) ds`` for a fixed direction."""
    p = float(np.dot(x, c.direction))
    q2 = float(np.dot(x, x)) - p * p
    if q2 >= rho * rho:
        return 0.0
    half = math.sqrt(rho * rho - q2)
    a, b = max(p - half, 0.0), p + half
    if b <= 0:
        return 0.0
    if a == 0.0:
        return float("inf")
    return c.weight * radial_integral(lambda s: float(c.kernel.Q(s)), a, b, what="ball mass")


def _uniform_ball_mass(c: Component, x: np.ndarray, rho: float, d: int) -> float:
    R = float(np.linalg.norm(x))
    if rho >= R:
        return float("inf")
    a, b = R - rho, R + rho

    def integrand(s):
        cosang = (s * s + R * R - rho * rho) / (2 * s * R)
        return float(_cap_fraction(d, cosang)) * float(c.kernel.Q(s))

    return c.weight * radial_integral(integrand, a, b, what="ball mass")


def ball_mass(spec: LevyMeasureSpec, center, radius: float) -> float:
    """``nu(B(center, radius))`` for the open ball; ``inf`` if it contains the origin."""
    x = np.atleast_1d(np.asarray(center, dtype=float))
    rho = float(radius)
    if np.linalg.norm(x) <= rho:
        return float("inf")
    if spec.kind == DYADIC:
        R = float(np.linalg.norm(x))
        y, w = dyadic_atoms(spec, R - rho, R + rho)
        inside = np.linalg.norm(y - x, axis=1) < rho
        return float(w[inside].sum())
    total = 0.0
    for c in spec.components:
        if c.direction is None:
            total += _uniform_ball_mass(c, x, rho, spec.dimension)
        else:
            total += _ray_ball_mass(c, x, rho)
    return total


def interval_mass(spec: LevyMeasureSpec, lo: float, hi: float) -> float:
    """``nu([lo, hi])`` for d = 1 and ``0 < lo <= hi`` or ``lo <= hi < 0``."""
    if spec.dimension != 1:
        raise ValueError("interval_mass is for d = 1")
    if lo <= 0 <= hi:
        return float("inf")
    if spec.kind == DYADIC:
        a, b = (lo, hi) if lo > 0 else (-hi, -lo)
        y, w = dyadic_atoms(spec, a, b)
        keep = (y[:, 0] >= lo) & (y[:, 0] <= hi)
        return float(w[keep].sum())
    total = 0.0
    for c in spec.components:
        sgn = float(c.direction[0])
        a, b = (lo * sgn, hi * sgn) if sgn > 0 else (hi * sgn, lo * sgn)
        if b <= 0:
            continue
        total += c.weight * radial_integral(lambda s: float(c.kernel.Q(s)), max(a, 0.0), b)
    return total


# ---------------------------------------------------------------------------
# assumption checkers
# ---------------------------------------------------------------------------


@dataclass
class AssumptionEntry:
    name: str
    holds: bool
    fitted_constant: float
    witness: tuple
    details: dict = field(default_factory=dict)


@dataclass
class AssumptionReport:
    entries: list

    def __getitem__(self, name):
        for e in self.entries:
            if e.name == name:
                return e
        raise KeyError(name)

    @property
    def holds(self) -> bool:
        return all(e.holds for e in self.entries)

    def summary(self) -> str:
        lines = []
        for e in self.entries:
            flag = "holds" if e.holds else "FAILS"
            lines.append(f"{e.name}: {flag}, constant={e.fitted_constant:.6g}, witness={e.witness}")
        return "\n".join(lines)


def _support_directions(spec: LevyMeasureSpec, n_fill: int = 8) -> list[np.ndarray]:
    d = spec.dimension
    if spec.kind == DYADIC:
        out = []
        for i in range(d):
            e = np.zeros(d)
            e[i] = 1.0
            out += [e, -e]
        return out
    if spec.kind == RADIAL:
        dirs = [v for v, _ in spec.spherical.atom_list()]
        if spec.spherical.has_uniform and d >= 2:
            dirs += list(_fill_directions(d, n_fill))
        return dirs
    if d == 1:
        return [np.array([1.0]), np.array([-1.0])]
    return list(_fill_directions(d, n_fill))


def _fill_directions(d, n):
    if d == 1:
        return np.array([[1.0], [-1.0]])
    if d == 2:
        th = 2 * math.pi * (np.arange(n) + 0.5) / n
        return np.stack([np.cos(th), np.sin(th)], axis=1)
    v = np.random.default_rng(12345).standard_normal((n, d))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def _grid(lo, hi, n):
    return np.logspace(math.log10(lo), math.log10(hi), n)


def _ball_candidates(spec, n, lo, hi):
    """(R, rho) pairs: the log grid, plus for atomic measures balls whose near edge sits just inside an atom."""
    pairs = [(R, rho) for R in _grid(lo, hi, n) for rho in _grid(lo, hi, n) if rho < R]
    if spec.kind == DYADIC:
        radii = np.unique(np.abs(dyadic_atoms(spec, lo, hi)[0]).max(axis=1))
        pairs += [(a * (1 - 1e-9) + rho, rho) for a in radii for rho in _grid(lo, hi, n)]
    return pairs


def _profile_bound_sup(spec, f, gamma, n, lo, hi):
    worst, wit = 0.0, None
    for theta in _support_directions(spec):
        for R, rho in _ball_candidates(spec, n, lo, hi):
            m = ball_mass(spec, R * theta, rho)
            denom = float(f(R - rho)) * (2 * rho) ** gamma
            if not denom > 0:
                if m == 0:
                    continue  # both sides underflow (tempered tails)
                ratio = float("inf")
            else:
                ratio = m / denom
            if ratio > worst:
                worst, wit = ratio, (tuple(float(v) for v in R * theta), float(rho))
    return worst, wit


def check_profile_bound(spec: LevyMeasureSpec, f: Callable | None = None, gamma: float | None = None,
                        *, n_grid=40, lo=1e-3, hi=1e3, refine=2, stability=0.05) -> AssumptionReport:
    """Fit ``M1 = sup nu(B) / (f(delta(B)) diam(B)^gamma)`` over balls ``B(x, rho)``, ``rho < |x|``."""
    gamma = spec.gamma if gamma is None else gamma
    f = spec.default_f(gamma) if f is None else f
    m1, wit = _profile_bound_sup(spec, f, gamma, n_grid, lo, hi)
    m1r, witr = _profile_bound_sup(spec, f, gamma, n_grid * refine, lo, hi)
    finite = np.isfinite(m1) and np.isfinite(m1r) and m1 > 0
    stable = finite and abs(m1r / m1 - 1) <= stability
    return AssumptionReport([AssumptionEntry(
        "profile_bound", bool(stable), float(max(m1, m1r)), witr if m1r >= m1 else wit,
        {"M1": m1, "M1_refined": m1r, "gamma": gamma, "grid": n_grid, "refine": refine})])


def _tech_lhs_grid(spec, f, s_vals, r_vals, order=48):
    """``int_{|y|>r} f(max(s,|y|) - |y|/2) nu(dy)`` for all pairs (s, r)."""
    S, R = np.meshgrid(s_vals, r_vals, indexing="ij")
    out = np.zeros_like(S)
    if spec.kind == DYADIC:
        rmin = float(np.min(r_vals))
        # atoms beyond 1e100 contribute nothing measurable
        y, w = dyadic_atoms(spec, rmin, 1e100)
        rad = np.abs(y).max(axis=1)
        for idx in np.ndindex(S.shape):
            s, r = S[idx], R[idx]
            sel = rad > r
            out[idx] = float(np.sum(w[sel] * f(np.maximum(s, rad[sel]) - rad[sel] / 2)))
        return out
    x, wq = np.polynomial.legendre.leggauss(order)
    for c in spec.components:
        A = c.angular_mass(spec.dimension)
        Q = c.kernel.Q
        for idx in np.ndindex(S.shape):
            s, r = S[idx], R[idx]
            val = 0.0
            m = max(s, r)
            if s > r:
                # u in (r, s) with u = r (s/r)^tau
                L = math.log(s / r)
                tau = 0.5 * (x + 1)
                u = r * np.exp(L * tau)
                val += 0.5 * L * np.sum(wq * f(s - u / 2) * Q(u) * u)
            # u in (m, inf) with u = m e^v, v in (0, 60) split into unit panels
            edges = np.concatenate([np.arange(0, 8, 0.5), np.arange(8, 61, 2.0)])
            v, wv = gauss_legendre_panels(edges, 16)
            u = m * np.exp(v)
            val += np.sum(wv * f(u / 2) * Q(u) * u)
            out[idx] += A * val
    return out


def check_tech_assumption(spec: LevyMeasureSpec, f: Callable | None, psi, *, n_grid=40, lo=1e-3,
                          hi=1e3, s_floor=1e-3, refine=2, stability=0.5) -> AssumptionReport:
    """Fit ``M2 = sup_{s,r} LHS(s, r) / (f(s) Psi(1/r))``; ``s`` below ``s_floor`` is excluded."""
    f = spec.default_f() if f is None else f

    def fit(n):
        s_vals = _grid(max(lo, s_floor), hi, n)
        r_vals = _grid(lo, hi, n)
        lhs = _tech_lhs_grid(spec, f, s_vals, r_vals)
        rhs = f(s_vals)[:, None] * np.asarray(psi.psi(1.0 / r_vals))[None, :]
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(rhs > 0, lhs / rhs, np.where(lhs > 0, np.inf, 0.0))
        k = np.unravel_index(np.argmax(ratio), ratio.shape)
        return float(ratio[k]), (float(s_vals[k[0]]), float(r_vals[k[1]]))

    m2, wit = fit(n_grid)
    m2r, witr = fit(n_grid * refine)
    finite = np.isfinite(m2) and np.isfinite(m2r) and m2 > 0
    stable = finite and max(m2r / m2, m2 / m2r) <= 1 + stability
    return AssumptionReport([AssumptionEntry(
        "tech_assumption", bool(stable), max(m2, m2r), witr if m2r >= m2 else wit,
        {"M2": m2, "M2_refined": m2r, "s_floor": s_floor})])


def check_lower_measure_bound(spec: LevyMeasureSpec, f: Callable | None = None, gamma: float | None = None,
                              direction_set: Sequence | None = None, *, n_grid=40, lo=1e-3, hi=1e3,
                              refine=2, collapse=0.5) -> AssumptionReport:
    """Fit ``M4 = inf nu(B(x, rho)) / (rho^gamma f(|x| + rho))`` over ``x`` in the cone of ``direction_set``."""
    gamma = spec.gamma if gamma is None else gamma
    f = spec.default_f(gamma) if f is None else f
    dirs = _support_directions(spec) if direction_set is None else [
        np.atleast_1d(np.asarray(v, dtype=float)) / np.linalg.norm(v) for v in direction_set]

    def fit(n):
        best, wit = float("inf"), None
        if spec.kind == DYADIC and direction_set is None:
            # the bound is stated on the support: centres at atoms, radii below the gap
            y, _ = dyadic_atoms(spec, lo, hi)
            rhos = _grid(lo, hi, n)
            for x in y:
                R = float(np.abs(x).max())
                gap = R * (1 - 2.0 ** -spec.dyadic_params.kappa)
                for rho in rhos[rhos < gap]:
                    ratio = ball_mass(spec, x, rho) / (rho**gamma * float(f(R + rho)))
                    if ratio < best:
                        best, wit = ratio, (tuple(float(v) for v in x), float(rho))
            return best, wit
        for theta in dirs:
            for R in _grid(lo, hi, n):
                for rho in _grid(lo, hi, n):
                    m = ball_mass(spec, R * theta, rho)
                    denom = rho**gamma * float(f(R + rho))
                    if not denom > 0:
                        continue  # the comparison function underflows; no information
                    ratio = m / denom
                    if ratio < best:
                        best, wit = ratio, (tuple(float(v) for v in R * theta), float(rho))
        return best, wit

    m4, wit = fit(n_grid)
    m4r, witr = fit(n_grid * refine)
    holds = m4 > 0 and m4r > 0 and m4r >= collapse * m4
    return AssumptionReport([AssumptionEntry(
        "lower_measure_bound", bool(holds), float(min(m4, m4r)), witr if m4r <= m4 else wit,
        {"M4": m4, "M4_refined": m4r, "gamma": gamma})])
