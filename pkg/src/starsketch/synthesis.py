"""Synthetic star-shaped outlines with known radial profiles.

A radial profile ``r(theta)`` is a positive, 2*pi-periodic function. Sampling
it at ``n`` evenly spaced angles gives a polygon that is star-shaped about the
origin. Every profile reports its Lipschitz constant in the shape convention
``|r(a) - r(b)| <= eta * |a - b| / (2*pi)``, i.e. ``eta = 2*pi * max|r'|``.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.interpolate import CubicSpline
from scipy.optimize import root

from .errors import InputError, NumericalRejection
from .geometry import TWO_PI, StandardizedOutline, StarFunction, polygon_area_centroid


@dataclass(frozen=True)
class FourierProfile:
    """``r(t) = base + sum_h cos_h*cos(h t) + sin_h*sin(h t)``, harmonics from 1."""

    base: float
    cos: tuple[float, ...] = ()
    sin: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        n = max(len(self.cos), len(self.sin))
        object.__setattr__(self, "cos", tuple(map(float, self.cos)) + (0.0,) * (n - len(self.cos)))
        object.__setattr__(self, "sin", tuple(map(float, self.sin)) + (0.0,) * (n - len(self.sin)))

    @property
    def n_harmonics(self) -> int:
        return len(self.cos)

    def __call__(self, theta: ArrayLike) -> NDArray[np.float64]:
        t = np.asarray(theta, dtype=np.float64)
        r = np.full(t.shape, float(self.base))
        for h, (a, b) in enumerate(zip(self.cos, self.sin), start=1):
            r += a * np.cos(h * t) + b * np.sin(h * t)
        return r

    def derivative(self, theta: ArrayLike) -> NDArray[np.float64]:
        t = np.asarray(theta, dtype=np.float64)
        d = np.zeros(t.shape)
        for h, (a, b) in enumerate(zip(self.cos, self.sin), start=1):
            d += h * (b * np.cos(h * t) - a * np.sin(h * t))
        return d

    @property
    def lipschitz(self) -> float:
        # |r'| <= sum_h h * |(a_h, b_h)|, an upper bound valid everywhere
        amp = np.hypot(self.cos, self.sin) * np.arange(1, self.n_harmonics + 1)
        return TWO_PI * float(amp.sum())

    def bounds(self) -> tuple[float, float]:
        spread = float(np.hypot(self.cos, self.sin).sum())
        return self.base - spread, self.base + spread

    def with_first_harmonic(self, a1: float, b1: float) -> "FourierProfile":
        cos = list(self.cos) or [0.0]
        sin = list(self.sin) or [0.0]
        cos[0] += a1
        sin[0] += b1
        return replace(self, cos=tuple(cos), sin=tuple(sin))


class SplineProfile:
    """Periodic cubic spline through ``knots`` evenly spaced over the circle.

    The result is C^2 but not C^3 (its third derivative jumps at the knots),
    which makes it the reference case for convergence-order checks.
    """

    def __init__(self, knots: ArrayLike):
        y = np.asarray(knots, dtype=np.float64).reshape(-1)
        if y.size < 3:
            raise InputError("a spline profile needs at least 3 knots")
        x = np.linspace(0.0, TWO_PI, y.size + 1)
        self.knots = y
        self._spline = CubicSpline(x, np.append(y, y[0]), bc_type="periodic")
        self._d1 = self._spline.derivative()
        lo, hi = self._extrema(self._spline, self._d1)
        if lo <= 0.0:
            raise NumericalRejection(f"spline profile reaches nonpositive radius {lo}")
        self._bounds = (lo, hi)

    @staticmethod
    def _extrema(poly, dpoly) -> tuple[float, float]:
        cand = np.concatenate([poly.x, np.atleast_1d(dpoly.roots(extrapolate=False))])
        vals = poly(cand)
        return float(vals.min()), float(vals.max())

    def __call__(self, theta: ArrayLike) -> NDArray[np.float64]:
        return self._spline(np.mod(theta, TWO_PI))

    def derivative(self, theta: ArrayLike) -> NDArray[np.float64]:
        return self._d1(np.mod(theta, TWO_PI))

    @property
    def lipschitz(self) -> float:
        # r' is piecewise quadratic; its extremes sit at knots or roots of r''
        lo, hi = self._extrema(self._d1, self._d1.derivative())
        return TWO_PI * max(abs(lo), abs(hi))

    def bounds(self) -> tuple[float, float]:
        return self._bounds


@dataclass(frozen=True)
class StarShapeParams:
    """Generator settings for random Fourier star shapes.

    Harmonic ``h`` gets a random direction and magnitude proportional to
    ``h**-decay``; magnitudes are rescaled so they sum to ``amplitude``, which
    keeps every radius inside ``[base - amplitude, base + amplitude]``.
    """

    n_harmonics: int = 6
    base: float = 0.7
    amplitude: float = 0.25
    decay: float = 1.0
    n_vertices: int = 720
    min_harmonic: int = 2

    def validate(self) -> None:
        if self.n_harmonics < 0 or self.n_vertices < 3 or self.min_harmonic < 1:
            raise InputError(f"invalid generator parameters: {self}")
        if self.amplitude < 0:
            raise InputError("amplitude must be nonnegative")
        if self.base - self.amplitude <= 0.0:
            raise NumericalRejection(
                f"base={self.base} and amplitude={self.amplitude} allow a nonpositive radius"
            )
        if self.base + self.amplitude > 1.0:
            raise NumericalRejection("base + amplitude exceeds the unit radius")


def random_profile(params: StarShapeParams, seed: int | np.random.SeedSequence) -> FourierProfile:
    """Draw a random Fourier profile (harmonics ``min_harmonic .. min_harmonic+n-1``)."""
    params.validate()
    rng = np.random.default_rng(seed)
    top = params.min_harmonic + params.n_harmonics - 1
    cos = np.zeros(max(top, 0))
    sin = np.zeros(max(top, 0))
    if params.n_harmonics and params.amplitude > 0:
        h = np.arange(params.min_harmonic, top + 1)
        mag = rng.uniform(0.2, 1.0, h.size) * h ** (-params.decay)
        phase = rng.uniform(0.0, TWO_PI, h.size)
        mag *= params.amplitude / mag.sum()
        cos[h - 1] = mag * np.cos(phase)
        sin[h - 1] = mag * np.sin(phase)
    return FourierProfile(params.base, tuple(cos), tuple(sin))


def random_spline_profile(
    n_knots: int = 12, base: float = 0.7, amplitude: float = 0.2, seed: int = 0
) -> SplineProfile:
    rng = np.random.default_rng(seed)
    return SplineProfile(base + amplitude * rng.uniform(-1.0, 1.0, n_knots))


def sample_profile(profile, m: int) -> StarFunction:
    """Profile values at the wedge centres ``2*pi*j/m + pi/m``."""
    theta = TWO_PI * np.arange(m) / m + np.pi / m
    return StarFunction(profile(theta))


def _polygon(profile, n: int) -> NDArray[np.float64]:
    theta = TWO_PI * np.arange(n) / n
    r = profile(theta)
    return np.column_stack([r * np.cos(theta), r * np.sin(theta)])


def center_profile(profile: FourierProfile, n_vertices: int) -> FourierProfile:
    """Adjust the first harmonic so the sampled polygon's area centroid is the origin."""

    def residual(ab):
        _, c = polygon_area_centroid(_polygon(profile.with_first_harmonic(*ab), n_vertices))
        return c

    if np.all(np.abs(residual((0.0, 0.0))) <= 1e-13):
        return profile
    sol = root(residual, x0=np.zeros(2), method="hybr", tol=1e-15)
    if not np.all(np.abs(residual(sol.x)) <= 1e-11):
        raise NumericalRejection("could not centre the profile; reduce its amplitude")
    return profile.with_first_harmonic(*sol.x)


def profile_outline(profile, n_vertices: int = 720, center: bool = True):
    """Polygon sampling ``profile`` at ``n_vertices`` angles ``2*pi*i/n``.

    Returns ``(outline, profile)``. With ``center=True`` a Fourier profile is
    first corrected (first harmonic only) so the polygon's area centroid is
    the origin; the corrected profile is returned. Radii must lie in (0, 1].
    """
    if center and isinstance(profile, FourierProfile):
        profile = center_profile(profile, n_vertices)
    pts = _polygon(profile, n_vertices)
    r = np.hypot(pts[:, 0], pts[:, 1])
    if np.any(r <= 0.0):
        raise NumericalRejection("profile has a nonpositive radius")
    return StandardizedOutline(pts), profile


def synthesize_star_shape(
    params: StarShapeParams | None = None, seed: int | np.random.SeedSequence = 0
) -> StandardizedOutline:
    """Random star-shaped outline, deterministic in ``seed``.

    Use :func:`synthesize_with_profile` to also get the radial profile and
    its Lipschitz constant.
    """
    return synthesize_with_profile(params, seed)[0]


def synthesize_with_profile(
    params: StarShapeParams | None = None, seed: int | np.random.SeedSequence = 0
) -> tuple[StandardizedOutline, FourierProfile]:
    params = params or StarShapeParams()
    return profile_outline(random_profile(params, seed), params.n_vertices)
