"""Rotation-invariant sketches of functions on the discrete circle.

For ``f`` on ``[m]`` the sketch is the length-``m`` vector

    V(k) = (1/m) * sum_j Phi(f(j) - f(j+k)),   indices mod m.

It is unchanged by cyclic rotation of ``f``, by adding a constant, and by the
reverse-of-complement map ``f(i) -> c - f(-i)``. Functions are accepted as
anything with a ``values`` attribute or as plain sequences.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field
from typing import Iterable, Literal

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from numpy.typing import ArrayLike, NDArray

from .errors import InputError, MismatchError, OverflowRiskError

PhiKind = Literal["neg_exp", "laplace", "gaussian"]
PHI_KINDS: tuple[str, ...] = ("neg_exp", "laplace", "gaussian")

# exp() overflows float64 just above 709
_EXP_LIMIT = 700.0
# up to this size the direct sum is correctly rounded, hence independent of term order
_FSUM_MAX_M = 256
_BLOCK = 256


def _values(f) -> NDArray[np.float64]:
    v = np.asarray(getattr(f, "values", f), dtype=np.float64).reshape(-1)
    if v.size == 0:
        raise InputError("function has no values")
    return v


@dataclass(frozen=True)
class PhiSpec:
    """Elementwise map applied to differences.

    neg_exp: exp(-lam*z); laplace: exp(-lam*|z|); gaussian: exp(-lam*z**2).
    """

    kind: PhiKind = "neg_exp"
    lam: float = 1.0

    def __post_init__(self) -> None:
        if self.kind not in PHI_KINDS:
            raise InputError(f"unknown phi kind {self.kind!r}; expected one of {PHI_KINDS}")
        if not (math.isfinite(self.lam) and self.lam > 0):
            raise InputError(f"lambda must be a positive finite number, got {self.lam}")
        object.__setattr__(self, "lam", float(self.lam))

    def __call__(self, z):
        z = np.asarray(z, dtype=np.float64)
        if self.kind == "neg_exp":
            return np.exp(-self.lam * z)
        if self.kind == "laplace":
            return np.exp(-self.lam * np.abs(z))
        return np.exp(-self.lam * z * z)

    @property
    def code(self) -> int:
        return PHI_KINDS.index(self.kind)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "lambda": self.lam}

    @classmethod
    def from_dict(cls, data: dict) -> "PhiSpec":
        return cls(data.get("kind", "neg_exp"), float(data.get("lambda", data.get("lam", 1.0))))


_MAGIC = b"SKCH"
_VERSION = 1
_HEADER = struct.Struct("<4sHQHd")


@dataclass(frozen=True, eq=False)
class Sketch:
    values: NDArray[np.float64]
    phi: PhiSpec = PhiSpec()
    m: int = field(init=False)

    def __post_init__(self) -> None:
        v = np.array(self.values, dtype=np.float64).reshape(-1)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "m", int(v.size))

    def __len__(self) -> int:
        return self.m

    def to_dict(self) -> dict:
        return {"m": self.m, "phi": self.phi.to_dict(), "values": self.values.tolist()}

    @classmethod
    def from_dict(cls, data: dict) -> "Sketch":
        try:
            m, values, phi = int(data["m"]), data["values"], PhiSpec.from_dict(data["phi"])
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"not a sketch record: {exc}") from exc
        if len(values) != m:
            raise InputError(f"sketch declares m={m} but has {len(values)} values")
        return cls(values, phi)

    def to_bytes(self) -> bytes:
        """Little-endian header (magic, version, m, phi kind, lambda) then m float64."""
        head = _HEADER.pack(_MAGIC, _VERSION, self.m, self.phi.code, self.phi.lam)
        return head + self.values.astype("<f8").tobytes()

    @classmethod
    def from_bytes(cls, blob: bytes) -> "Sketch":
        if len(blob) < _HEADER.size:
            raise InputError("truncated sketch file")
        magic, version, m, code, lam = _HEADER.unpack_from(blob)
        if magic != _MAGIC:
            raise InputError("not a sketch file (bad magic)")
        if version != _VERSION:
            raise InputError(f"unsupported sketch file version {version}")
        if code >= len(PHI_KINDS):
            raise InputError(f"unknown phi code {code}")
        body = blob[_HEADER.size:]
        if len(body) != 8 * m:
            raise InputError(f"sketch file declares m={m} but holds {len(body) // 8} values")
        return cls(np.frombuffer(body, dtype="<f8").astype(np.float64), PhiSpec(PHI_KINDS[code], lam))


def _check_range(v: NDArray[np.float64], phi: PhiSpec) -> None:
    if phi.kind == "neg_exp":
        spread = phi.lam * float(v.max() - v.min())
        if spread > _EXP_LIMIT:
            raise OverflowRiskError(
                f"lambda * (max f - min f) = {spread:.3g} would overflow exp(); "
                "standardize the inputs or lower lambda"
            )


def sketch_direct(f, phi: PhiSpec = PhiSpec()) -> Sketch:
    """Evaluate the sketch straight from its definition in O(m^2)."""
    v = _values(f)
    _check_range(v, phi)
    m = v.size
    # row k of the sliding view is f(k), f(k+1), ..., f(k+m-1)
    shifted = sliding_window_view(np.concatenate([v, v[:-1]]), m)
    out = np.empty(m)
    for s in range(0, m, _BLOCK):
        terms = phi(v[None, :] - shifted[s:s + _BLOCK])
        if m <= _FSUM_MAX_M:
            out[s:s + _BLOCK] = [math.fsum(row) / m for row in terms]
        else:
            out[s:s + _BLOCK] = terms.sum(axis=1) / m
    return Sketch(out, phi)


def sketch_fft(f, phi: PhiSpec = PhiSpec()) -> Sketch:
    """Sketch as a circular convolution, O(m log m); ``neg_exp`` only.

    With p(j) = exp(-lam*f(-j)) and q(j) = exp(lam*f(j)),
    V = (p (*) q) / m, computed with length-m real transforms.
    """
    if phi.kind != "neg_exp":
        raise InputError(
            f"phi kind {phi.kind!r} has no convolution factorization; use sketch_direct"
        )
    v = _values(f)
    _check_range(v, phi)
    m = v.size
    # centring the values keeps both exponentials near 1
    c = v - 0.5 * (v.max() + v.min())
    p = np.exp(-phi.lam * c[(-np.arange(m)) % m])
    q = np.exp(phi.lam * c)
    out = np.fft.irfft(np.fft.rfft(p) * np.fft.rfft(q), n=m) / m
    # lag 0 is exactly Phi(0) = 1; round-off would otherwise blur it at large ranges
    out[0] = 1.0
    return Sketch(out, phi)


def sketch(f, phi: PhiSpec = PhiSpec()) -> Sketch:
    """FFT route for ``neg_exp``, direct summation otherwise."""
    return sketch_fft(f, phi) if phi.kind == "neg_exp" else sketch_direct(f, phi)


def lag_values(f, lags: ArrayLike, phi: PhiSpec = PhiSpec()) -> NDArray[np.float64]:
    """Exact sketch coordinates ``V(k)`` for the requested lags only, O(len(lags) * m)."""
    v = _values(f)
    _check_range(v, phi)
    m = v.size
    lags = np.asarray(lags, dtype=np.int64) % m
    j = np.arange(m)
    out = np.empty(lags.size)
    for s in range(0, lags.size, _BLOCK):
        idx = (j[None, :] + lags[s:s + _BLOCK, None]) % m
        out[s:s + _BLOCK] = phi(v[None, :] - v[idx]).mean(axis=1)
    return out


@dataclass(frozen=True, eq=False)
class RandomSketch:
    """Sketch coordinates at ``t`` sampled lags, scaled by ``1/sqrt(t)``.

    Sketches built with the same ``(m, t, seed, stratified)`` share lags, and
    the dot product of their ``vector`` estimates :func:`kernel`.
    """

    lags: NDArray[np.int64]
    values: NDArray[np.float64]
    m: int
    seed: int
    phi: PhiSpec = PhiSpec()
    stratified: bool = False

    @property
    def t(self) -> int:
        return int(self.lags.size)

    @property
    def scale(self) -> float:
        return 1.0 / math.sqrt(self.t)

    @property
    def vector(self) -> NDArray[np.float64]:
        return self.scale * self.values

    def dot(self, other: "RandomSketch") -> float:
        if not np.array_equal(self.lags, other.lags) or self.phi != other.phi:
            raise MismatchError("random sketches were drawn with different lags or phi")
        return float(self.vector @ other.vector)


def sample_lags(m: int, t: int, seed: int, stratified: bool = False) -> NDArray[np.int64]:
    """I.i.d. uniform lags, or distinct lags (every lag once when ``t == m``)."""
    if not 1 <= t <= m:
        raise InputError(f"sample count t must be in [1, {m}], got {t}")
    rng = np.random.default_rng(seed)
    if stratified:
        return np.sort(rng.permutation(m)[:t])
    return rng.integers(0, m, size=t)


def sketch_random(f, phi: PhiSpec, t: int, seed: int, stratified: bool = False) -> RandomSketch:
    v = _values(f)
    lags = sample_lags(v.size, t, seed, stratified)
    return RandomSketch(lags, lag_values(v, lags, phi), v.size, seed, phi, stratified)


def kernel(f, g, phi: PhiSpec = PhiSpec()) -> float:
    """Invariant sketch kernel ``(1/m) * sum_k V_f(k) V_g(k)``."""
    vf, vg = _values(f), _values(g)
    if vf.size != vg.size:
        raise MismatchError(f"kernel needs equal m, got {vf.size} and {vg.size}")
    a, b = sketch(vf, phi).values, sketch(vg, phi).values
    return float(a @ b) / vf.size


def gram_matrix(functions: Iterable, phi: PhiSpec = PhiSpec()) -> NDArray[np.float64]:
    rows = np.array([sketch(f, phi).values for f in functions])
    return rows @ rows.T / rows.shape[1]


def hoeffding_samples(epsilon: float, delta: float, range_width: float) -> int:
    """Smallest D with ``2 exp(-2 eps^2 D / width^2) <= delta``.

    Computes ``ceil(width^2 / (2 eps^2) * ln(2/delta))``; results within a
    relative 1e-12 of an integer are snapped to it before the ceiling.
    """
    if not epsilon > 0:
        raise InputError(f"epsilon must be positive, got {epsilon}")
    if not 0 < delta < 1:
        raise InputError(f"delta must be in (0, 1), got {delta}")
    if not range_width > 0:
        raise InputError(f"range width must be positive, got {range_width}")
    d = range_width**2 / (2.0 * epsilon**2) * math.log(2.0 / delta)
    nearest = round(d)
    if abs(d - nearest) <= 1e-12 * max(1.0, d):
        return int(nearest)
    return int(math.ceil(d))


def phi_range_bound(f, g, phi: PhiSpec = PhiSpec()) -> float:
    """Upper bound on ``max_k V_f(k) V_g(k)`` for ``neg_exp``.

    Each difference ``f(j) - f(j+k)`` lies within the oscillation
    ``max f - min f`` (at most ``2 * ||f||_inf``), so
    ``V_f <= exp(lam * osc f)`` and the bound is the product of the two.
    """
    if phi.kind != "neg_exp":
        raise InputError("phi_range_bound is defined for neg_exp only")
    vf, vg = _values(f), _values(g)
    osc = float(np.ptp(vf) + np.ptp(vg))
    return math.exp(phi.lam * osc)
