"""Distances, exact kNN retrieval and k-means in sketch space."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np
from numpy.typing import NDArray

from .errors import InputError, MismatchError
from .sketch import PhiSpec, Sketch


def _check_compatible(a: Sketch, b: Sketch) -> None:
    if a.m != b.m:
        raise MismatchError(f"sketch sizes differ: m={a.m} vs m={b.m}")
    if a.phi != b.phi:
        raise MismatchError(f"sketch phi differs: {a.phi} vs {b.phi}")


def sketch_distance(a: Sketch, b: Sketch) -> float:
    """Euclidean distance between sketch vectors (the shape distance)."""
    _check_compatible(a, b)
    return float(np.linalg.norm(a.values - b.values))


def _radial(f) -> NDArray[np.float64]:
    return np.asarray(getattr(f, "values", f), dtype=np.float64)


def star_distance(f1, f2) -> float:
    """Sup-norm distance ``max_j |f1(j) - f2(j)|`` between radial functions."""
    a, b = _radial(f1), _radial(f2)
    if a.size != b.size:
        raise MismatchError(f"star functions differ in m: {a.size} vs {b.size}")
    return float(np.max(np.abs(a - b)))


def r_star_distance(f1, f2) -> tuple[float, int]:
    """Star distance minimised over the m cyclic rotations of ``f2``.

    Returns ``(distance, x)`` where ``x`` is the smallest rotation attaining
    the minimum, i.e. the best match is ``np.roll(f2, x)``.
    """
    a, b = _radial(f1), _radial(f2)
    m = a.size
    if m != b.size:
        raise MismatchError(f"star functions differ in m: {m} vs {b.size}")
    best, best_x = np.inf, 0
    block = max(1, 2**22 // m)
    for s in range(0, m, block):
        xs = np.arange(s, min(m, s + block))
        idx = (np.arange(m)[None, :] - xs[:, None]) % m
        d = np.max(np.abs(a[None, :] - b[idx]), axis=1)
        i = int(np.argmin(d))
        if d[i] < best:
            best, best_x = float(d[i]), int(xs[i])
    return best, best_x


@dataclass
class SketchIndex:
    """Ids and sketch vectors sharing one ``m`` and ``phi``."""

    m: int
    phi: PhiSpec
    ids: list[str] = field(default_factory=list)
    _rows: list[NDArray[np.float64]] = field(default_factory=list, repr=False)
    _matrix: NDArray[np.float64] | None = field(default=None, repr=False)
    _pos: dict[str, int] = field(default_factory=dict, repr=False)

    @classmethod
    def from_sketches(cls, items: Iterable[tuple[str, Sketch]]) -> "SketchIndex":
        items = list(items)
        if not items:
            raise InputError("cannot infer m and phi from an empty collection")
        first = items[0][1]
        index = cls(first.m, first.phi)
        for key, sk in items:
            index.add(key, sk)
        return index

    def add(self, key: str, sk: Sketch) -> None:
        if sk.m != self.m or sk.phi != self.phi:
            raise MismatchError(
                f"sketch {key!r} has m={sk.m}, phi={sk.phi}; index has m={self.m}, phi={self.phi}"
            )
        key = str(key)
        if key in self._pos:
            raise InputError(f"duplicate id {key!r}")
        self._pos[key] = len(self.ids)
        self.ids.append(key)
        self._rows.append(np.asarray(sk.values, dtype=np.float64))
        self._matrix = None

    def __len__(self) -> int:
        return len(self.ids)

    def __contains__(self, key: str) -> bool:
        return key in self._pos

    @property
    def matrix(self) -> NDArray[np.float64]:
        if self._matrix is None:
            self._matrix = np.array(self._rows).reshape(len(self._rows), self.m)
        return self._matrix

    def __getitem__(self, key: str) -> Sketch:
        return Sketch(self.matrix[self._pos[key]], self.phi)


def knn(index: SketchIndex, query: Sketch, k: int) -> list[tuple[str, float]]:
    """Exact k nearest neighbours by brute-force scan; ties break by id."""
    if len(index) == 0:
        raise InputError("index is empty")
    if not 1 <= k <= len(index):
        raise InputError(f"k must be in [1, {len(index)}], got {k}")
    if query.m != index.m or query.phi != index.phi:
        raise MismatchError(
            f"query has m={query.m}, phi={query.phi}; index has m={index.m}, phi={index.phi}"
        )
    d = np.linalg.norm(index.matrix - query.values[None, :], axis=1)
    order = np.lexsort((np.array(index.ids), d))[:k]
    return [(index.ids[i], float(d[i])) for i in order]


@dataclass
class ClusterResult:
    assignments: dict[str, int]
    centroids: NDArray[np.float64]
    inertia: float
    iterations: int
    inertia_history: list[float] = field(default_factory=list)
    converged: bool = False

    def to_dict(self) -> dict:
        return {
            "assignments": self.assignments,
            "centroids": self.centroids.tolist(),
            "inertia": self.inertia,
            "iterations": self.iterations,
            "converged": self.converged,
        }


def _sq_dists(x: NDArray, c: NDArray) -> NDArray:
    return ((x[:, None, :] - c[None, :, :]) ** 2).sum(axis=-1)


def farthest_point_init(x: NDArray, k: int, rng: np.random.Generator) -> NDArray[np.intp]:
    """Seeded random first centre, then repeatedly the point farthest from all chosen."""
    chosen = [int(rng.integers(len(x)))]
    nearest = ((x - x[chosen[0]]) ** 2).sum(axis=1)
    for _ in range(1, k):
        nxt = int(np.argmax(nearest))
        chosen.append(nxt)
        nearest = np.minimum(nearest, ((x - x[nxt]) ** 2).sum(axis=1))
    return np.array(chosen)


def _lloyd(x: NDArray, k: int, seed: int, max_iters: int):
    rng = np.random.default_rng(seed)
    centroids = x[farthest_point_init(x, k, rng)].copy()
    labels = np.full(len(x), -1)
    history: list[float] = []
    converged = False
    it = 0
    for it in range(1, max_iters + 1):
        d = _sq_dists(x, centroids)
        new = np.argmin(d, axis=1)
        counts = np.bincount(new, minlength=k)
        for empty in np.flatnonzero(counts == 0):
            # repair: move the worst-fitting point of a multi-point cluster here
            cost = d[np.arange(len(x)), new].copy()
            cost[counts[new] <= 1] = -np.inf
            far = int(np.argmax(cost))
            counts[new[far]] -= 1
            new[far] = empty
            counts[empty] = 1
        if np.array_equal(new, labels):
            converged = True
            it -= 1
            break
        labels = new
        for c in range(k):
            centroids[c] = x[labels == c].mean(axis=0)
        history.append(float(((x - centroids[labels]) ** 2).sum()))
    return labels, centroids, history, max(it, 1), converged


def kmeans(index: SketchIndex, k: int, seed: int = 0, max_iters: int = 300) -> ClusterResult:
    """Lloyd's k-means with seeded farthest-point initialisation.

    Stops at an assignment fixpoint or after ``max_iters`` updates. The
    inertia recorded after every update never increases.
    """
    n = len(index)
    if k < 1:
        raise InputError(f"k must be >= 1, got {k}")
    if k > n:
        raise InputError(f"k={k} exceeds the number of points ({n})")
    if max_iters < 1:
        raise InputError("max_iters must be >= 1")
    labels, centroids, history, iters, converged = _lloyd(index.matrix, k, seed, max_iters)
    return ClusterResult(
        assignments={key: int(lab) for key, lab in zip(index.ids, labels)},
        centroids=centroids,
        inertia=history[-1],
        iterations=iters,
        inertia_history=history,
        converged=converged,
    )


def rotation_cluster_accuracy(result: ClusterResult | Mapping[str, int], provenance: Mapping[str, str]) -> float:
    """Fraction of rotated copies clustered with the shape they were rotated from.

    ``provenance`` maps each copy id to its original id. Originals are not
    counted. Every clustered id must be either a copy or an original.
    """
    labels = result.assignments if isinstance(result, ClusterResult) else result
    if not provenance:
        raise InputError("no rotated copies: accuracy is undefined")
    originals = set(provenance.values())
    for copy, orig in provenance.items():
        if copy not in labels:
            raise InputError(f"copy {copy!r} has no cluster assignment")
        if orig not in labels:
            raise InputError(f"original {orig!r} of copy {copy!r} has no cluster assignment")
    unknown = [key for key in labels if key not in provenance and key not in originals]
    if unknown:
        raise InputError(f"missing provenance for {len(unknown)} ids, e.g. {unknown[0]!r}")
    hits = sum(labels[c] == labels[o] for c, o in provenance.items())
    return hits / len(provenance)
