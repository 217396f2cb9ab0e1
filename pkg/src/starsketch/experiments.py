"""End-to-end experiment runners: clustering accuracy, kNN retrieval, convergence.

All randomness derives from ``ExperimentConfig.seed`` through
:class:`numpy.random.SeedSequence`; each trial gets its own child sequence,
so results are identical for any number of worker threads.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .analysis import SketchIndex, kmeans, knn, rotation_cluster_accuracy
from .errors import InputError
from .geometry import DEFAULT_RAYS_PER_WEDGE, StandardizedOutline, rotate_outline, standardize, star_discretize
from .io import load_outline
from .sketch import PhiSpec, Sketch, sketch
from .synthesis import (
    FourierProfile,
    StarShapeParams,
    random_profile,
    random_spline_profile,
    sample_profile,
    synthesize_star_shape,
)

THREADS_ENV = "STARSKETCH_THREADS"
MODES = ("cluster_accuracy", "knn_demo", "convergence")


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


@dataclass
class ExperimentConfig:
    mode: str = "cluster_accuracy"
    m_values: list[int] = field(default_factory=lambda: [16, 64, 256, 1024])
    n_originals: int = 10
    n_copies: int = 9
    seed: int = 0
    phi: PhiSpec = field(default_factory=PhiSpec)
    trials: int = 6
    input_dir: str | None = None
    shape: StarShapeParams = field(default_factory=StarShapeParams)
    snap_rotations: bool = False
    rays_per_wedge: int = DEFAULT_RAYS_PER_WEDGE
    max_iters: int = 300
    # knn_demo
    n_shapes: int = 100
    k: int = 5
    # convergence
    profile: str = "spline"
    reference_factor: int = 8
    workers: int = field(default_factory=default_workers)

    def validate(self) -> None:
        if self.mode not in MODES:
            raise InputError(f"unknown mode {self.mode!r}; expected one of {MODES}")
        if not self.m_values:
            raise InputError("m_values must not be empty")
        if any(int(m) < 8 for m in self.m_values):
            raise InputError(f"every m must be >= 8, got {self.m_values}")
        if self.trials < 1:
            raise InputError("trials must be >= 1")
        if self.mode == "cluster_accuracy":
            if self.n_copies < 1:
                raise InputError("n_copies must be >= 1: accuracy is undefined without rotated copies")
            if self.n_originals < 1:
                raise InputError("n_originals must be >= 1")
        if self.mode == "convergence" and len(self.m_values) < 3:
            raise InputError("convergence needs at least 3 m values to fit a slope")

    @classmethod
    def from_mapping(cls, data: Mapping) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise InputError(f"unknown config keys: {sorted(unknown)}")
        kw = dict(data)
        if "phi" in kw and isinstance(kw["phi"], Mapping):
            kw["phi"] = PhiSpec.from_dict(kw["phi"])
        if "shape" in kw and isinstance(kw["shape"], Mapping):
            kw["shape"] = StarShapeParams(**kw["shape"])
        if "m_values" in kw:
            kw["m_values"] = [int(m) for m in kw["m_values"]]
        return cls(**kw)

    def with_overrides(self, **overrides) -> "ExperimentConfig":
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})

    def to_dict(self) -> dict:
        d = asdict(self)
        d["phi"] = self.phi.to_dict()
        return d


def shape_sketch(shape: StandardizedOutline, m: int, phi: PhiSpec, rays_per_wedge: int = DEFAULT_RAYS_PER_WEDGE) -> Sketch:
    """Discretize a standardized outline into m wedges and sketch it."""
    return sketch(star_discretize(shape, m, rays_per_wedge), phi)


def load_shape_dir(directory: str | Path) -> list[tuple[str, StandardizedOutline]]:
    directory = Path(directory)
    if not directory.is_dir():
        raise InputError(f"{directory}: not a directory")
    paths = sorted(p for p in directory.iterdir() if p.suffix.lower() in (".csv", ".json"))
    return [(p.stem, standardize(load_outline(p))) for p in paths]


def _trial_shapes(config: ExperimentConfig, rng: np.random.Generator, n: int, pool=None):
    if pool is not None:
        if len(pool) < n:
            raise InputError(f"need {n} shapes but the input directory has {len(pool)}")
        pick = rng.choice(len(pool), size=n, replace=False)
        return [pool[i] for i in sorted(pick)]
    seeds = rng.integers(0, 2**63 - 1, size=n)
    return [(f"s{i:03d}", synthesize_star_shape(config.shape, int(s))) for i, s in enumerate(seeds)]


# ---------------------------------------------------------------------------
# clustering accuracy


@dataclass(frozen=True)
class ClusterRow:
    m: int
    trial: int
    accuracy: float


@dataclass
class ClusterSummary:
    rows: list[ClusterRow]

    def by_m(self) -> dict[int, list[float]]:
        out: dict[int, list[float]] = {}
        for r in self.rows:
            out.setdefault(r.m, []).append(r.accuracy)
        return out

    def means(self) -> dict[int, float]:
        return {m: float(np.mean(v)) for m, v in self.by_m().items()}

    def stds(self) -> dict[int, float]:
        return {m: float(np.std(v)) for m, v in self.by_m().items()}

    def table(self) -> list[tuple[int, float, float]]:
        means, stds = self.means(), self.stds()
        return [(m, means[m], stds[m]) for m in sorted(means)]


def _cluster_trial(config: ExperimentConfig, trial: int, seq: np.random.SeedSequence, pool) -> list[ClusterRow]:
    rng = np.random.default_rng(seq)
    shapes = _trial_shapes(config, rng, config.n_originals, pool)
    # fractions of a full turn; continuous angles, or snapped to the m-grid per m
    turns = rng.random((config.n_originals, config.n_copies))
    kmeans_seed = int(rng.integers(0, 2**31 - 1))
    rows = []
    for m in config.m_values:
        items: list[tuple[str, Sketch]] = []
        provenance: dict[str, str] = {}
        for (name, shape), row in zip(shapes, turns):
            items.append((name, shape_sketch(shape, m, config.phi, config.rays_per_wedge)))
            for c, u in enumerate(row):
                angle = 2 * np.pi * (math.floor(u * m) / m if config.snap_rotations else u)
                copy_id = f"{name}~r{c}"
                items.append((copy_id, shape_sketch(rotate_outline(shape, angle), m, config.phi, config.rays_per_wedge)))
                provenance[copy_id] = name
        index = SketchIndex.from_sketches(items)
        result = kmeans(index, config.n_originals, seed=kmeans_seed, max_iters=config.max_iters)
        rows.append(ClusterRow(int(m), trial, rotation_cluster_accuracy(result, provenance)))
    return rows


def _map(fn, args: Sequence[tuple], workers: int) -> list:
    if workers > 1 and len(args) > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            return list(ex.map(lambda a: fn(*a), args))
    return [fn(*a) for a in args]


def run_cluster_experiment(config: ExperimentConfig) -> ClusterSummary:
    """k-means on originals plus rotated copies; accuracy per (m, trial)."""
    config.validate()
    pool = load_shape_dir(config.input_dir) if config.input_dir else None
    seqs = np.random.SeedSequence(config.seed).spawn(config.trials)
    parts = _map(_cluster_trial, [(config, t, s, pool) for t, s in enumerate(seqs)], config.workers)
    rows = sorted((r for part in parts for r in part), key=lambda r: (r.m, r.trial))
    return ClusterSummary(rows)


# ---------------------------------------------------------------------------
# kNN retrieval


@dataclass(frozen=True)
class KnnRow:
    m: int
    trial: int
    query: str
    rank: int | None  # 1-based rank of the original among the k results
    top_id: str
    top_distance: float


def _knn_trial(config: ExperimentConfig, trial: int, seq: np.random.SeedSequence, pool) -> list[KnnRow]:
    rng = np.random.default_rng(seq)
    shapes = _trial_shapes(config, rng, config.n_shapes, pool)
    angles = 2 * np.pi * rng.random(len(shapes))
    rows = []
    for m in config.m_values:
        index = SketchIndex.from_sketches(
            (name, shape_sketch(shape, m, config.phi, config.rays_per_wedge)) for name, shape in shapes
        )
        for (name, shape), angle in zip(shapes, angles):
            q = shape_sketch(rotate_outline(shape, angle), m, config.phi, config.rays_per_wedge)
            hits = knn(index, q, min(config.k, len(index)))
            ids = [h[0] for h in hits]
            rank = ids.index(name) + 1 if name in ids else None
            rows.append(KnnRow(int(m), trial, name, rank, hits[0][0], hits[0][1]))
    return rows


def run_knn_experiment(config: ExperimentConfig) -> list[KnnRow]:
    """Query every indexed shape with a randomly rotated copy of itself."""
    config.validate()
    pool = load_shape_dir(config.input_dir) if config.input_dir else None
    seqs = np.random.SeedSequence(config.seed).spawn(config.trials)
    parts = _map(_knn_trial, [(config, t, s, pool) for t, s in enumerate(seqs)], config.workers)
    return sorted((r for part in parts for r in part), key=lambda r: (r.m, r.trial, r.query))


# ---------------------------------------------------------------------------
# convergence in m


@dataclass
class ConvergenceResult:
    m_values: list[int]
    deviations: list[float]
    order: float
    floor: float

    def rows(self) -> list[tuple[int, float]]:
        return list(zip(self.m_values, self.deviations))


def make_profile(config: ExperimentConfig):
    seed = int(np.random.SeedSequence(config.seed).generate_state(1)[0])
    if config.profile == "spline":
        return random_spline_profile(seed=seed)
    if config.profile == "fourier":
        return random_profile(config.shape, seed)
    if config.profile == "constant":
        return FourierProfile(config.shape.base)
    raise InputError(f"unknown profile {config.profile!r}; expected spline, fourier or constant")


def fit_order(m_values: Sequence[int], deviations: Sequence[float], floor: float) -> float:
    """Negated log-log slope over points above ``floor``; ``inf`` if fewer than two remain."""
    pts = [(m, d) for m, d in zip(m_values, deviations) if d > floor]
    if len(pts) < 2:
        return math.inf
    x = np.log([p[0] for p in pts])
    y = np.log([p[1] for p in pts])
    return float(-np.polyfit(x, y, 1)[0])


def convergence_study(profile, m_values: Iterable[int], phi: PhiSpec = PhiSpec(), reference_factor: int = 8) -> ConvergenceResult:
    """Sup deviation of the m-sample sketch from a fine reference at matching lags.

    Lag ``k`` at resolution ``m`` and lag ``k*M/m`` at the reference
    resolution ``M = reference_factor * max(m)`` both estimate the continuous
    sketch at angle ``2*pi*k/m``. Deviations at or below a round-off floor
    are excluded from the order fit.
    """
    ms = sorted(int(m) for m in m_values)
    if len(ms) < 3:
        raise InputError("need at least 3 m values to fit a convergence order")
    big = reference_factor * ms[-1]
    bad = [m for m in ms if big % m]
    if bad:
        raise InputError(f"m values {bad} do not divide the reference size {big}")
    ref = sketch(sample_profile(profile, big), phi).values
    floor = float(16 * np.finfo(float).eps * np.max(np.abs(ref)))
    devs = []
    for m in ms:
        v = sketch(sample_profile(profile, m), phi).values
        devs.append(float(np.max(np.abs(v - ref[np.arange(m) * (big // m)]))))
    return ConvergenceResult(ms, devs, fit_order(ms, devs, floor), floor)


def run_convergence(config: ExperimentConfig) -> ConvergenceResult:
    config.validate()
    return convergence_study(make_profile(config), config.m_values, config.phi, config.reference_factor)
