"""Functions on the discrete circle [m] and their difference structure.

These are the exact combinatorial objects behind the sketch: rotations,
constant shifts, reverse-of-complement (RoC), the lag difference multisets
``D(k) = {f(j) - f(j+k)}``, and decision procedures for lag-homometry and
for equivalence up to rotation, shift and RoC. Integer-valued functions are
compared exactly; real-valued ones with an absolute tolerance.
"""

from __future__ import annotations

import itertools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import GeneralPositionError, InputError, MismatchError
from .sketch import PhiSpec, sketch_direct

MAX_M = 2**20
MAX_EXHAUSTIVE_M = 8
MAX_RANDOM_M = 64

REAL_ATOL = 1e-9
POSITION_ATOL = 1e-12


class CircleFunction:
    """Values ``f(0) .. f(m-1)`` with cyclic indexing. Immutable."""

    __slots__ = ("values",)

    def __init__(self, values: ArrayLike):
        v = np.array(getattr(values, "values", values)).reshape(-1)
        if v.dtype.kind in "bu":
            v = v.astype(np.int64)
        elif v.dtype.kind != "i":
            v = v.astype(np.float64)
        if not 1 <= v.size <= MAX_M:
            raise InputError(f"m must be in [1, {MAX_M}], got {v.size}")
        if v.dtype.kind == "f" and not np.all(np.isfinite(v)):
            raise InputError("circle function values must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __setattr__(self, name, value):
        raise AttributeError("CircleFunction is immutable")

    @property
    def m(self) -> int:
        return int(self.values.size)

    @property
    def exact(self) -> bool:
        """Integer valued, so comparisons are exact."""
        return self.values.dtype.kind == "i"

    def __len__(self) -> int:
        return self.m

    def __call__(self, i: int):
        return self.values[i % self.m]

    def __iter__(self):
        return iter(self.values.tolist())

    def __eq__(self, other) -> bool:
        if not isinstance(other, CircleFunction):
            return NotImplemented
        return np.array_equal(self.values, other.values)

    def __hash__(self) -> int:
        return hash((self.values.dtype.kind, self.values.tobytes()))

    def __repr__(self) -> str:
        return f"CircleFunction({self.values.tolist()})"

    def allclose(self, other: "CircleFunction", atol: float = REAL_ATOL) -> bool:
        _same_m(self, other)
        if self.exact and other.exact:
            return self == other
        return bool(np.all(np.abs(self.values - other.values) <= atol))

    def to_dict(self) -> dict:
        return {"m": self.m, "values": self.values.tolist()}

    @classmethod
    def from_dict(cls, data: dict) -> "CircleFunction":
        try:
            m, values = int(data["m"]), data["values"]
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"not a circle function record: {exc}") from exc
        if len(values) != m:
            raise InputError(f"record declares m={m} but has {len(values)} values")
        return cls(values)


def _cf(f) -> CircleFunction:
    return f if isinstance(f, CircleFunction) else CircleFunction(f)


def _same_m(f: CircleFunction, g: CircleFunction) -> None:
    if f.m != g.m:
        raise MismatchError(f"functions live on different circles: m={f.m} vs m={g.m}")


def rotate(f, x: int) -> CircleFunction:
    """Right rotation: ``result(i) = f(i - x)``."""
    f = _cf(f)
    return CircleFunction(np.roll(f.values, int(x) % f.m))


def shift(f, c) -> CircleFunction:
    return CircleFunction(_cf(f).values + c)


def roc(f, c=0) -> CircleFunction:
    """Reverse of complement: ``result(i) = c - f(-i)``."""
    f = _cf(f)
    return CircleFunction(c - f.values[(-np.arange(f.m)) % f.m])


@dataclass(frozen=True, eq=False)
class DifferenceTable:
    """Row ``k`` holds the sorted multiset ``{f(j) - f(j+k) : j in [m]}``."""

    table: NDArray
    m: int = field(init=False)

    def __post_init__(self) -> None:
        self.table.setflags(write=False)
        object.__setattr__(self, "m", int(self.table.shape[0]))

    def __getitem__(self, k: int) -> NDArray:
        return self.table[k % self.m]

    def union(self) -> NDArray:
        """All differences over all lags, sorted."""
        return np.sort(self.table, axis=None)

    def key(self) -> bytes:
        """Exact identity of the table; equal keys mean lag-homometric (integers)."""
        return self.table.tobytes()


def _difference_matrix(v: NDArray) -> NDArray:
    m = v.size
    idx = (np.arange(m)[None, :] + np.arange(m)[:, None]) % m
    return v[None, :] - v[idx]


def difference_table(f) -> DifferenceTable:
    f = _cf(f)
    return DifferenceTable(np.sort(_difference_matrix(f.values), axis=1))


def lag_homometric(f, g, atol: float = REAL_ATOL) -> bool:
    """True iff ``D_f(k) == D_g(k)`` as multisets for every lag ``k``."""
    f, g = _cf(f), _cf(g)
    _same_m(f, g)
    a, b = difference_table(f).table, difference_table(g).table
    if f.exact and g.exact:
        return bool(np.array_equal(a, b))
    return bool(np.all(np.abs(a - b) <= atol))


def canonical_form(f) -> tuple[CircleFunction, int, float]:
    """Rotate and shift so the minimum value 0 sits at index 0.

    Returns ``(canon, rotation, offset)`` with
    ``f == shift(rotate(canon, rotation), offset)``. Ties for the minimum
    resolve to the smallest index.
    """
    f = _cf(f)
    j_min = int(np.argmin(f.values))
    low = f.values[j_min]
    canon = np.roll(f.values, -j_min) - low
    return CircleFunction(canon), j_min, low.item()


@dataclass(frozen=True)
class GeneralPositionReport:
    distinct_values: bool
    distinct_differences: bool
    tied_values: tuple[int, int] | None = None
    tied_differences: tuple[tuple[int, int], tuple[int, int]] | None = None

    def __bool__(self) -> bool:
        return self.distinct_values and self.distinct_differences


def _first_tie(sorted_vals: NDArray, exact: bool, atol: float) -> int | None:
    gaps = np.diff(sorted_vals)
    bad = np.flatnonzero(gaps == 0) if exact else np.flatnonzero(gaps <= atol)
    return int(bad[0]) if bad.size else None


def general_position(f, atol: float = POSITION_ATOL) -> GeneralPositionReport:
    """Check that values, and differences ``f(j) - f(j')`` for ``j != j'``, are distinct."""
    f = _cf(f)
    v, m = f.values, f.m
    order = np.argsort(v, kind="stable")
    t = _first_tie(v[order], f.exact, atol)
    tied_values = None if t is None else tuple(sorted((int(order[t]), int(order[t + 1]))))

    jj, kk = np.nonzero(~np.eye(m, dtype=bool))
    diffs = v[jj] - v[kk]
    dorder = np.argsort(diffs, kind="stable")
    t = _first_tie(diffs[dorder], f.exact, atol)
    tied_diffs = None
    if t is not None:
        a, b = dorder[t], dorder[t + 1]
        tied_diffs = ((int(jj[a]), int(kk[a])), (int(jj[b]), int(kk[b])))
    return GeneralPositionReport(tied_values is None, tied_diffs is None, tied_values, tied_diffs)


def require_general_position(f, atol: float = POSITION_ATOL) -> None:
    rep = general_position(f, atol)
    if rep.tied_values is not None:
        i, j = rep.tied_values
        raise GeneralPositionError(f"values f({i}) and f({j}) are tied")
    if rep.tied_differences is not None:
        (a, b), (c, d) = rep.tied_differences
        raise GeneralPositionError(
            f"differences f({a})-f({b}) and f({c})-f({d}) are tied"
        )


def roc_canonical_form(f, atol: float = POSITION_ATOL) -> tuple[CircleFunction, bool]:
    """Canonical form with the RoC ambiguity removed.

    After canonicalizing, the second-largest difference overall is either
    (second largest value - 0) or (max - second smallest value). In the
    latter case RoC maps it onto the former, and we canonicalize again.
    Requires general position; raises :class:`GeneralPositionError` otherwise.
    """
    f = _cf(f)
    require_general_position(f, atol)
    canon, _, _ = canonical_form(f)
    if f.m <= 2:
        return canon, False
    s = np.sort(canon.values)
    top = s[-1]
    if s[-2] > top - s[1]:
        return canon, False
    flipped, _, _ = canonical_form(roc(canon, top))
    return flipped, True


def is_roc_canonical(f, atol: float = POSITION_ATOL) -> bool:
    f = _cf(f)
    v = f.values
    if v[0] != 0 or np.argmin(v) != 0:
        return False
    if f.m <= 2:
        return True
    s = np.sort(v)
    return bool(s[-2] > s[-1] - s[1] + (0 if f.exact else -atol))


def _candidates(f: CircleFunction) -> NDArray:
    """All rotations of f and of RoC(f), as rows (2m x m)."""
    m = f.m
    idx = (np.arange(m)[None, :] - np.arange(m)[:, None]) % m
    r = roc(f, 0).values
    return np.vstack([f.values[idx], r[idx]])


def equivalent(f, g, atol: float = REAL_ATOL) -> bool:
    """True iff ``g = rotate(f, x) + c`` or ``g = rotate(roc(f), x) + c`` for some x, c."""
    f, g = _cf(f), _cf(g)
    _same_m(f, g)
    cand = _candidates(f)
    aligned = cand + (g.values[0] - cand[:, :1])
    if f.exact and g.exact:
        return bool(np.any(np.all(aligned == g.values, axis=1)))
    return bool(np.any(np.all(np.abs(aligned - g.values) <= atol, axis=1)))


def class_key(f) -> bytes:
    """Exact identity of the equivalence class of an integer-valued function."""
    f = _cf(f)
    if not f.exact:
        raise InputError("class_key needs an integer-valued function")
    cand = _candidates(f)
    cand = cand - cand[:, :1]
    best = min(map(tuple, cand.tolist()))
    return np.asarray(best, dtype=np.int64).tobytes()


# ---------------------------------------------------------------------------
# injectivity verification

Family = Literal["permutations", "random_general_position"]


@dataclass
class InjectivityReport:
    m: int
    family: str
    pairs: int = 0
    homometric_pairs: int = 0
    equivalent_pairs: int = 0
    sketch_equal_pairs: int = 0
    counterexample: dict | None = None

    @property
    def ok(self) -> bool:
        return self.counterexample is None

    def to_dict(self) -> dict:
        return {
            "m": self.m,
            "family": self.family,
            "pairs": self.pairs,
            "homometric_pairs": self.homometric_pairs,
            "equivalent_pairs": self.equivalent_pairs,
            "sketch_equal_pairs": self.sketch_equal_pairs,
            "ok": self.ok,
            "counterexample": self.counterexample,
        }


def _counterexample(f, g, **flags) -> dict:
    return {"f": list(_cf(f)), "g": list(_cf(g)), **flags}


def _verify_permutations(m: int, phi: PhiSpec, sketch_tol: float, check_sketch: bool) -> InjectivityReport:
    perms = [CircleFunction(p) for p in itertools.permutations(range(1, m + 1))]
    report = InjectivityReport(m, "permutations", pairs=len(perms) ** 2)

    h_groups: dict[bytes, list[int]] = {}
    e_groups: dict[bytes, list[int]] = {}
    for i, f in enumerate(perms):
        h_groups.setdefault(difference_table(f).key(), []).append(i)
        e_groups.setdefault(class_key(f), []).append(i)
    report.homometric_pairs = sum(len(v) ** 2 for v in h_groups.values())
    report.equivalent_pairs = sum(len(v) ** 2 for v in e_groups.values())

    # the pairwise relations agree iff the two partitions coincide
    e_of = {i: k for k, members in e_groups.items() for i in members}
    for members in h_groups.values():
        first = members[0]
        for i in members[1:]:
            if e_of[i] != e_of[first]:
                report.counterexample = _counterexample(
                    perms[first], perms[i], lag_homometric=True, equivalent=False
                )
                return report
    if len(h_groups) != len(e_groups):
        for members in e_groups.values():
            f = perms[members[0]]
            for i in members[1:]:
                if not lag_homometric(f, perms[i]):
                    report.counterexample = _counterexample(
                        f, perms[i], lag_homometric=False, equivalent=True
                    )
                    return report

    if check_sketch:
        report.sketch_equal_pairs, report.counterexample = _sketch_partition_check(
            perms, list(h_groups.values()), phi, sketch_tol
        )
    return report


def _sketch_partition_check(funcs, groups, phi, tol):
    """Every pair inside a group must have sketch distance < tol, every pair across groups >= tol."""
    sk = np.array([sketch_direct(f, phi).values for f in funcs])
    reps = []
    radius = 0.0
    for members in groups:
        block = sk[members]
        d = np.linalg.norm(block[:, None, :] - block[None, :, :], axis=-1)
        worst = np.unravel_index(np.argmax(d), d.shape)
        if d[worst] >= tol:
            i, j = members[worst[0]], members[worst[1]]
            return 0, _counterexample(funcs[i], funcs[j], lag_homometric=True, sketch_distance=float(d[worst]))
        radius = max(radius, float(d[0].max()))
        reps.append(members[0])
    rep_sk = sk[reps]
    n = len(reps)
    block = 512
    for s in range(0, n, block):
        d = np.linalg.norm(rep_sk[s:s + block, None, :] - rep_sk[None, :, :], axis=-1)
        for r in range(d.shape[0]):
            d[r, s + r] = np.inf
        # any member is within `radius` of its representative
        if d.min() - 2 * radius < tol:
            a, b = np.unravel_index(np.argmin(d), d.shape)
            i, j = reps[s + a], reps[b]
            return 0, _counterexample(funcs[i], funcs[j], lag_homometric=False, sketch_distance=float(d[a, b]))
    return sum(len(g) ** 2 for g in groups), None


def random_general_position(m: int, rng: np.random.Generator, atol: float = POSITION_ATOL) -> CircleFunction:
    while True:
        f = CircleFunction(rng.random(m))
        if general_position(f, atol):
            return f


def _random_shard(m: int, trials: int, seed, phi: PhiSpec, sketch_tol: float, check_sketch: bool) -> InjectivityReport:
    rng = np.random.default_rng(seed)
    report = InjectivityReport(m, "random_general_position")
    for _ in range(trials):
        f = random_general_position(m, rng)
        if rng.random() < 0.5:
            g = random_general_position(m, rng)
        else:
            g = f if rng.random() < 0.5 else roc(f, rng.normal() * 5)
            g = shift(rotate(g, int(rng.integers(m))), rng.normal() * 5)
        hom = lag_homometric(f, g)
        eqv = equivalent(f, g)
        flags = {"lag_homometric": hom, "equivalent": eqv}
        report.pairs += 1
        report.homometric_pairs += hom
        report.equivalent_pairs += eqv
        if check_sketch:
            dist = float(np.linalg.norm(sketch_direct(f, phi).values - sketch_direct(g, phi).values))
            close = dist < sketch_tol
            report.sketch_equal_pairs += close
            flags["sketch_distance"] = dist
            if close != hom:
                report.counterexample = _counterexample(f, g, **flags)
                return report
        if hom != eqv:
            report.counterexample = _counterexample(f, g, **flags)
            return report
        if hom and not roc_canonical_form(f)[0].allclose(roc_canonical_form(g)[0]):
            report.counterexample = _counterexample(f, g, **flags, roc_canonical_equal=False)
            return report
    return report


def verify_injectivity(
    m: int,
    family: Family = "permutations",
    trials: int = 10_000,
    seed: int = 0,
    *,
    phi: PhiSpec = PhiSpec(),
    check_sketch: bool = True,
    sketch_tol: float = 1e-9,
    workers: int = 1,
    shards: int = 8,
) -> InjectivityReport:
    """Machine-check ``lag_homometric(f, g) <=> equivalent(f, g)`` (and sketch equality).

    ``permutations`` enumerates every ordered pair of permutations of
    ``1..m`` (``m <= 8``). ``random_general_position`` draws ``trials`` pairs
    of real functions, half of them independent and half constructed members
    of the same class; trials are split into shards seeded from ``seed`` so
    results do not depend on ``workers``. A counterexample, if any, is
    returned in the report rather than raised.
    """
    if family == "permutations":
        if not 1 <= m <= MAX_EXHAUSTIVE_M:
            raise InputError(f"exhaustive permutation check supports 1 <= m <= {MAX_EXHAUSTIVE_M}")
        return _verify_permutations(m, phi, sketch_tol, check_sketch)
    if family != "random_general_position":
        raise InputError(f"unknown family {family!r}")
    if not 3 <= m <= MAX_RANDOM_M:
        raise InputError(f"randomized check supports 3 <= m <= {MAX_RANDOM_M}")
    if trials < 0:
        raise InputError("trials must be nonnegative")

    shards = max(1, min(shards, trials or 1))
    sizes = [trials // shards + (i < trials % shards) for i in range(shards)]
    seeds = np.random.SeedSequence(seed).spawn(shards)
    args = [(m, n, s, phi, sketch_tol, check_sketch) for n, s in zip(sizes, seeds)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_random_shard, *zip(*args)))
    else:
        parts = [_random_shard(*a) for a in args]

    report = InjectivityReport(m, family)
    for part in parts:
        report.pairs += part.pairs
        report.homometric_pairs += part.homometric_pairs
        report.equivalent_pairs += part.equivalent_pairs
        report.sketch_equal_pairs += part.sketch_equal_pairs
        if report.counterexample is None and part.counterexample is not None:
            report.counterexample = part.counterexample
    return report
