"""Planar outlines, standardization and star discretization.

Outlines are closed polygons given by their ordered boundary vertices.
Standardizing moves the area centroid to the origin and scales the largest
vertex radius to one. Star discretization turns a standardized outline into
``m`` radial values, one per angular wedge ``[2*pi*j/m, 2*pi*(j+1)/m)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import DegenerateShapeError, InputError, NotStarShapedError

TWO_PI = 2.0 * np.pi

# Default number of extra rays cast inside each wedge (besides the centre ray).
DEFAULT_RAYS_PER_WEDGE = 8

_CENTROID_ATOL = 1e-9
_RADIUS_ATOL = 1e-9
_HIT_ATOL = 1e-12


def _frozen(a: NDArray) -> NDArray:
    a.setflags(write=False)
    return a


def _as_points(points: ArrayLike) -> NDArray[np.float64]:
    pts = np.array(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise InputError(f"expected an (n, 2) array of points, got shape {pts.shape}")
    if not np.all(np.isfinite(pts)):
        raise InputError("outline contains non-finite coordinates")
    return pts


def polygon_area_centroid(points: ArrayLike) -> tuple[float, NDArray[np.float64]]:
    """Signed shoelace area and area centroid of a closed polygon."""
    p = np.asarray(points, dtype=np.float64)
    q = np.roll(p, -1, axis=0)
    cross = p[:, 0] * q[:, 1] - q[:, 0] * p[:, 1]
    area = 0.5 * cross.sum()
    if area == 0.0:
        return 0.0, np.full(2, np.nan)
    cx = ((p[:, 0] + q[:, 0]) * cross).sum() / (6.0 * area)
    cy = ((p[:, 1] + q[:, 1]) * cross).sum() / (6.0 * area)
    return float(area), np.array([cx, cy])


def _validate_polygon(pts: NDArray[np.float64]) -> None:
    if len(pts) < 3:
        raise InputError(f"an outline needs at least 3 vertices, got {len(pts)}")
    step = np.roll(pts, -1, axis=0) - pts
    same = np.flatnonzero(np.all(step == 0.0, axis=1))
    if same.size:
        i = int(same[0])
        raise DegenerateShapeError(
            f"consecutive vertices {i} and {(i + 1) % len(pts)} coincide"
        )
    area, _ = polygon_area_centroid(pts)
    scale = np.max(np.abs(pts)) ** 2
    if abs(area) <= 1e-14 * max(scale, 1e-300):
        raise DegenerateShapeError("polygon has zero area")


@dataclass(frozen=True, eq=False)
class Outline:
    """Closed polygon through ``points`` (the last vertex connects to the first)."""

    points: NDArray[np.float64]

    def __post_init__(self) -> None:
        pts = _as_points(self.points)
        _validate_polygon(pts)
        object.__setattr__(self, "points", _frozen(pts))

    def __len__(self) -> int:
        return len(self.points)

    @property
    def area(self) -> float:
        return abs(polygon_area_centroid(self.points)[0])

    @property
    def centroid(self) -> NDArray[np.float64]:
        return polygon_area_centroid(self.points)[1]


@dataclass(frozen=True, eq=False)
class StandardizedOutline:
    """Outline with its area centroid at the origin and radius at most one.

    ``centroid`` and ``scale`` record the transform that produced it: the raw
    outline is ``points * scale + centroid``. Shapes made by
    :func:`standardize` have maximum vertex radius exactly one.
    """

    points: NDArray[np.float64]
    centroid: tuple[float, float] = (0.0, 0.0)
    scale: float = 1.0

    def __post_init__(self) -> None:
        pts = _as_points(self.points)
        _validate_polygon(pts)
        _, c = polygon_area_centroid(pts)
        if not np.all(np.abs(c) <= _CENTROID_ATOL):
            raise DegenerateShapeError(
                f"area centroid {tuple(c)} is not at the origin; call standardize() first"
            )
        r = np.hypot(pts[:, 0], pts[:, 1]).max()
        if r > 1.0 + _RADIUS_ATOL:
            raise DegenerateShapeError(f"max radius {r} exceeds 1; call standardize() first")
        if not self.scale > 0:
            raise InputError(f"scale must be positive, got {self.scale}")
        object.__setattr__(self, "points", _frozen(pts))
        object.__setattr__(self, "centroid", (float(self.centroid[0]), float(self.centroid[1])))
        object.__setattr__(self, "scale", float(self.scale))

    def __len__(self) -> int:
        return len(self.points)

    @property
    def max_radius(self) -> float:
        return float(np.hypot(self.points[:, 0], self.points[:, 1]).max())

    def to_outline(self) -> Outline:
        """Undo the standardization."""
        return Outline(self.points * self.scale + np.asarray(self.centroid))


@dataclass(frozen=True, eq=False)
class StarFunction:
    """Radial extent ``values[j]`` of a star shape in wedge ``j`` (cyclic index)."""

    values: NDArray[np.float64]
    m: int = field(init=False)

    def __post_init__(self) -> None:
        v = np.array(self.values, dtype=np.float64).reshape(-1)
        if v.size == 0:
            raise InputError("a star function needs at least one value")
        if not np.all(np.isfinite(v)):
            raise InputError("star function values must be finite")
        if np.any(v <= 0.0) or np.any(v > 1.0 + _RADIUS_ATOL):
            raise NotStarShapedError("star function values must lie in (0, 1]")
        object.__setattr__(self, "values", _frozen(v))
        object.__setattr__(self, "m", int(v.size))

    def __len__(self) -> int:
        return self.m

    def __getitem__(self, i: int) -> float:
        return float(self.values[i % self.m])

    def to_dict(self) -> dict:
        return {"m": self.m, "values": self.values.tolist()}

    @classmethod
    def from_dict(cls, data: dict) -> "StarFunction":
        try:
            m, values = int(data["m"]), data["values"]
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"not a star function record: {exc}") from exc
        if len(values) != m:
            raise InputError(f"star function declares m={m} but has {len(values)} values")
        return cls(values)


def standardize(outline: Outline | ArrayLike) -> StandardizedOutline:
    """Translate the area centroid to the origin and scale the max radius to 1.

    Raises :class:`DegenerateShapeError` for zero-area polygons and
    :class:`InputError` for fewer than three vertices.
    """
    if not isinstance(outline, Outline):
        outline = Outline(outline)
    pts = outline.points
    _, c = polygon_area_centroid(pts)
    centered = pts - c
    tau = float(np.hypot(centered[:, 0], centered[:, 1]).max())
    if not tau > 0.0:
        raise DegenerateShapeError("outline has zero radius")
    return StandardizedOutline(centered / tau, centroid=(c[0], c[1]), scale=tau)


def _rotation_matrix(angle: float) -> NDArray[np.float64]:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s], [s, c]])


def rotate_outline(shape: StandardizedOutline, angle: float) -> StandardizedOutline:
    """Rotate counter-clockwise about the origin by ``angle`` radians.

    The recorded centroid is rotated too, so rotation commutes with
    :func:`standardize` on the whole record, not just the points.
    """
    if angle == 0.0:
        return shape
    rot = _rotation_matrix(angle)
    pts = shape.points @ rot.T
    c = rot @ np.asarray(shape.centroid)
    return StandardizedOutline(pts, centroid=(c[0], c[1]), scale=shape.scale)


def wedge_ray_angles(m: int, rays_per_wedge: int = DEFAULT_RAYS_PER_WEDGE) -> NDArray[np.float64]:
    """Ray angles used for each wedge, shape ``(m, rays_per_wedge + 1)``.

    Column 0 is the wedge-centre ray ``2*pi*j/m + pi/m``; the remaining
    ``rays_per_wedge`` rays sit at the midpoints of equal sub-wedges.
    """
    if m < 1:
        raise InputError(f"m must be positive, got {m}")
    if rays_per_wedge < 0:
        raise InputError(f"rays_per_wedge must be >= 0, got {rays_per_wedge}")
    offsets = [0.5]
    if rays_per_wedge:
        offsets += list((np.arange(rays_per_wedge) + 0.5) / rays_per_wedge)
    j = np.arange(m)[:, None]
    return TWO_PI * (j + np.asarray(offsets)[None, :]) / m


def origin_inside(points: ArrayLike) -> bool:
    """Whether the origin lies strictly inside the polygon (even-odd rule)."""
    p = np.asarray(points, dtype=np.float64)
    q = np.roll(p, -1, axis=0)
    e = q - p
    # origin on (or numerically on) an edge counts as outside
    t = np.clip(-(p * e).sum(axis=1) / (e * e).sum(axis=1), 0.0, 1.0)
    closest = p + t[:, None] * e
    if np.min(np.hypot(closest[:, 0], closest[:, 1])) <= _HIT_ATOL:
        return False
    straddle = (p[:, 1] > 0.0) != (q[:, 1] > 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        x_cross = p[:, 0] - p[:, 1] * e[:, 0] / e[:, 1]
    crossings = np.count_nonzero(straddle & (x_cross > 0.0))
    return crossings % 2 == 1


def ray_hits(points: ArrayLike, angles: ArrayLike) -> NDArray[np.float64]:
    """Farthest boundary intersection along each ray from the origin.

    ``angles`` must be sorted and lie in ``[0, 2*pi)``. Returns ``-inf``
    for rays that miss the polygon. Each edge only tests the rays inside the
    angular interval it subtends, so the cost is about
    ``len(points) + len(angles) * crossings_per_ray``.
    """
    a = np.asarray(points, dtype=np.float64)
    theta = np.asarray(angles, dtype=np.float64)
    n_rays = theta.size
    b = np.roll(a, -1, axis=0)
    e = b - a
    cross_ab = a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0]
    norm_ab = np.hypot(a[:, 0], a[:, 1]) * np.hypot(b[:, 0], b[:, 1])
    # edges lying on a line through the origin are covered by their neighbours' endpoints
    keep = np.abs(cross_ab) > 1e-14 * norm_ab
    a, e, b = a[keep], e[keep], b[keep]

    phi_a = np.arctan2(a[:, 1], a[:, 0])
    phi_b = np.arctan2(b[:, 1], b[:, 0])
    span = np.mod(phi_b - phi_a + np.pi, TWO_PI) - np.pi
    start = np.mod(np.where(span >= 0.0, phi_a, phi_b), TWO_PI)
    width = np.abs(span)

    ext = np.concatenate([theta - TWO_PI, theta, theta + TWO_PI])
    lo = np.searchsorted(ext, start - _HIT_ATOL, side="left")
    hi = np.searchsorted(ext, start + width + _HIT_ATOL, side="right")
    counts = hi - lo
    total = int(counts.sum())
    out = np.full(n_rays, -np.inf)
    if total == 0:
        return out

    edge_idx = np.repeat(np.arange(len(a)), counts)
    first = np.repeat(np.cumsum(counts) - counts, counts)
    ray_idx = (np.repeat(lo, counts) + np.arange(total) - first) % n_rays

    d = np.column_stack([np.cos(theta), np.sin(theta)])[ray_idx]
    ea, aa = e[edge_idx], a[edge_idx]
    denom = d[:, 0] * ea[:, 1] - d[:, 1] * ea[:, 0]
    with np.errstate(divide="ignore", invalid="ignore"):
        t = (aa[:, 0] * ea[:, 1] - aa[:, 1] * ea[:, 0]) / denom
        s = (aa[:, 0] * d[:, 1] - aa[:, 1] * d[:, 0]) / denom
    ok = (denom != 0.0) & (s >= -_HIT_ATOL) & (s <= 1.0 + _HIT_ATOL) & (t > 0.0)
    np.maximum.at(out, ray_idx[ok], t[ok])
    return out


def star_discretize(
    shape: StandardizedOutline,
    m: int,
    rays_per_wedge: int = DEFAULT_RAYS_PER_WEDGE,
) -> StarFunction:
    """Radial extent of ``shape`` in each of ``m`` wedges.

    ``values[j]`` is the largest boundary distance seen along the wedge-centre
    ray and ``rays_per_wedge`` further rays spread across wedge ``j``. With
    ``rays_per_wedge=0`` only the centre ray is used.

    Raises :class:`NotStarShapedError` if the origin is not strictly inside
    the polygon or some wedge has no boundary intersection.
    """
    if m < 3:
        raise InputError(f"star discretization needs m >= 3, got {m}")
    if not origin_inside(shape.points):
        raise NotStarShapedError("origin (area centroid) is not inside the polygon")
    angles = wedge_ray_angles(m, rays_per_wedge)
    flat = angles.ravel()
    order = np.argsort(flat, kind="stable")
    hits = np.empty_like(flat)
    hits[order] = ray_hits(shape.points, flat[order])
    hits = hits.reshape(angles.shape)
    values = hits.max(axis=1)
    missing = np.flatnonzero(~np.isfinite(values))
    if missing.size:
        raise NotStarShapedError(f"wedge {int(missing[0])} has no boundary intersection")
    over = values > 1.0
    if np.any(values[over] > 1.0 + _RADIUS_ATOL):
        raise NotStarShapedError("boundary extends beyond radius 1; shape is not standardized")
    values[over] = 1.0
    return StarFunction(values)


def step_function(f: StarFunction | Sequence[float], theta: ArrayLike) -> NDArray[np.float64]:
    """Evaluate the wedge-constant reconstruction of ``f`` at angles ``theta``."""
    v = np.asarray(getattr(f, "values", f), dtype=np.float64)
    m = v.size
    j = np.floor(np.mod(np.asarray(theta, dtype=np.float64), TWO_PI) * m / TWO_PI).astype(int)
    return v[np.clip(j, 0, m - 1)]
