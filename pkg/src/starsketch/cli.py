"""``starsketch`` command line.

Exit codes: 0 success, 1 input error, 2 numerical rejection (degenerate or
non-star shape, overflow risk, injectivity counterexample).
"""

from __future__ import annotations

import argparse
import csv
import io as _stdio
import json
import math
import sys
from pathlib import Path
from typing import Sequence

from . import __version__
from .analysis import SketchIndex, kmeans, knn, r_star_distance, sketch_distance, star_distance
from .circfn import verify_injectivity
from .errors import InputError, NumericalRejection, StarSketchError
from .experiments import (
    THREADS_ENV,
    ExperimentConfig,
    default_workers,
    run_cluster_experiment,
    run_convergence,
    run_knn_experiment,
)
from .geometry import DEFAULT_RAYS_PER_WEDGE, StarFunction, standardize, star_discretize
from .io import (
    load_index,
    load_outline,
    load_sketch,
    load_star_function,
    read_json,
    save_index,
    save_sketch,
    sniff,
    standardized_from_dict,
    standardized_to_dict,
    write_json,
)
from .sketch import PHI_KINDS, PhiSpec, Sketch, sketch

EXIT_OK, EXIT_INPUT, EXIT_NUMERICAL = 0, 1, 2
DEFAULT_M = 128

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.replace(" ", "").split(",") if x]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def load_config(path: str | None) -> dict:
    if not path:
        return {}
    p = Path(path)
    try:
        if p.suffix.lower() == ".toml":
            with open(p, "rb") as fh:
                data = tomllib.load(fh)
        else:
            data = read_json(p)
    except OSError as exc:
        raise InputError(f"{p}: cannot read config ({exc.strerror or exc})") from exc
    except tomllib.TOMLDecodeError as exc:
        raise InputError(f"{p}: invalid TOML ({exc})") from exc
    if not isinstance(data, dict):
        raise InputError(f"{p}: config must be a table/object")
    return data


class Settings:
    """Config-file values overlaid with command-line flags (flags win)."""

    def __init__(self, args: argparse.Namespace):
        self.config = load_config(getattr(args, "config", None))
        self.args = args

    def get(self, name: str, default=None):
        value = getattr(self.args, name, None)
        if value is not None:
            return value
        return self.config.get(name, default)

    @property
    def phi(self) -> PhiSpec:
        base = self.config.get("phi", {})
        if not isinstance(base, dict):
            raise InputError("config 'phi' must be an object with 'kind' and 'lambda'")
        kind = self.args.phi if self.args.phi is not None else base.get("kind", "neg_exp")
        lam = self.args.lam if self.args.lam is not None else base.get("lambda", 1.0)
        return PhiSpec(kind, float(lam))

    @property
    def m_values(self) -> list[int] | None:
        if self.args.m is not None:
            return self.args.m
        if "m_values" in self.config:
            return [int(m) for m in self.config["m_values"]]
        if "m" in self.config:
            m = self.config["m"]
            return [int(x) for x in m] if isinstance(m, list) else [int(m)]
        return None

    @property
    def m(self) -> int:
        ms = self.m_values or [DEFAULT_M]
        if len(ms) != 1:
            raise InputError(f"this command takes a single m, got {ms}")
        return ms[0]

    @property
    def rays_per_wedge(self) -> int:
        return int(self.get("rays_per_wedge", DEFAULT_RAYS_PER_WEDGE))

    @property
    def seed(self) -> int:
        return int(self.get("seed", 0))


# ---------------------------------------------------------------------------
# shared pipeline helpers


def _load_shape(path: str):
    kind = sniff(path)
    if kind == "outline":
        return standardize(load_outline(path))
    if kind == "standardized":
        return standardized_from_dict(read_json(Path(path)))
    raise InputError(f"{path}: expected an outline, got a {kind} record")


def _to_star(path: str, st: Settings) -> StarFunction:
    if sniff(path) == "star":
        return load_star_function(path)
    return star_discretize(_load_shape(path), st.m, st.rays_per_wedge)


def _to_sketch(path: str, st: Settings) -> Sketch:
    if sniff(path) == "sketch":
        return load_sketch(path)
    return sketch(_to_star(path, st), st.phi)


def _with_path(path: str, exc: StarSketchError) -> StarSketchError:
    msg = str(exc)
    return exc if msg.startswith(str(path)) else type(exc)(f"{path}: {msg}")


def _batch(paths: Sequence[str], out_dir: str | None, suffix: str, make, save) -> int:
    """Apply ``make`` to every input, write with ``save``; skip and report failures."""
    out = Path(out_dir) if out_dir else None
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
    status = EXIT_OK
    seen: set[str] = set()
    for path in paths:
        stem = Path(path).stem
        if stem in seen:
            raise InputError(f"{path}: duplicate input name {stem!r}")
        seen.add(stem)
        try:
            obj = make(path)
        except StarSketchError as exc:
            code = EXIT_NUMERICAL if isinstance(exc, NumericalRejection) else EXIT_INPUT
            print(f"skipped {_with_path(path, exc)}", file=sys.stderr)
            status = max(status, code)
            continue
        target = (out / f"{stem}{suffix}") if out is not None else None
        save(obj, target)
    return status


def _emit_json(obj, target: Path | None) -> None:
    if target is None:
        json.dump(obj, sys.stdout, indent=1)
        sys.stdout.write("\n")
    else:
        write_json(obj, target)


def _emit_text(text: str, path: str | None) -> None:
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


def _csv_text(header: Sequence[str], rows) -> str:
    buf = _stdio.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _fmt(x: float | None) -> str:
    if x is None:
        return ""
    return repr(float(x))


# ---------------------------------------------------------------------------
# commands


def cmd_standardize(args, st: Settings) -> int:
    return _batch(args.inputs, args.output, ".json", _load_shape, lambda s, t: _emit_json(standardized_to_dict(s), t))


def cmd_discretize(args, st: Settings) -> int:
    return _batch(args.inputs, args.output, ".json", lambda p: _to_star(p, st), lambda f, t: _emit_json(f.to_dict(), t))


def cmd_sketch(args, st: Settings) -> int:
    suffix = ".json" if args.format == "json" else ".sketch"

    def save(sk: Sketch, target):
        if target is None:
            _emit_json(sk.to_dict(), None)
        else:
            save_sketch(sk, target)

    return _batch(args.inputs, args.output, suffix, lambda p: _to_sketch(p, st), save)


def cmd_dist(args, st: Settings) -> int:
    kinds = {sniff(p) for p in (args.a, args.b)}
    result: dict = {}
    if "sketch" not in kinds:
        fa, fb = _to_star(args.a, st), _to_star(args.b, st)
        d, x = r_star_distance(fa, fb)
        result.update(star_distance=star_distance(fa, fb), r_star_distance=d, best_rotation=x)
        sa, sb = sketch(fa, st.phi), sketch(fb, st.phi)
    else:
        sa, sb = _to_sketch(args.a, st), _to_sketch(args.b, st)
    result["sketch_distance"] = sketch_distance(sa, sb)
    _emit_json(result, Path(args.output) if args.output else None)
    return EXIT_OK


def cmd_index_build(args, st: Settings) -> int:
    items: list[tuple[str, Sketch]] = []
    status = _batch(args.inputs, None, "", lambda p: (Path(p).stem, _to_sketch(p, st)), lambda it, _: items.append(it))
    if not items:
        raise InputError("no sketches to index")
    index = SketchIndex.from_sketches(items)
    save_index(index, args.output)
    print(f"indexed {len(index)} sketches (m={index.m}) into {args.output}", file=sys.stderr)
    return status


def cmd_index_query(args, st: Settings) -> int:
    index = load_index(args.index)
    if sniff(args.query) != "sketch" and args.m is None and "m" not in st.config:
        # derive the query at the index resolution unless told otherwise
        st.args.m = [index.m]
    if sniff(args.query) != "sketch" and args.phi is None and args.lam is None and "phi" not in st.config:
        st.args.phi, st.args.lam = index.phi.kind, index.phi.lam
    hits = knn(index, _to_sketch(args.query, st), min(args.k, len(index)))
    if args.format == "json":
        _emit_json([{"rank": r, "id": i, "distance": d} for r, (i, d) in enumerate(hits, 1)],
                   Path(args.output) if args.output else None)
    else:
        _emit_text(_csv_text(("rank", "id", "distance"), ((r, i, _fmt(d)) for r, (i, d) in enumerate(hits, 1))), args.output)
    return EXIT_OK


def cmd_cluster(args, st: Settings) -> int:
    index = load_index(args.index)
    result = kmeans(index, args.k, seed=st.seed, max_iters=args.max_iters)
    _emit_json(result.to_dict(), Path(args.output) if args.output else None)
    return EXIT_OK


_EXPERIMENT_MODES = {"cluster": "cluster_accuracy", "knn": "knn_demo", "convergence": "convergence"}


def experiment_config(args, st: Settings) -> ExperimentConfig:
    data = {k: v for k, v in st.config.items() if k not in ("m", "lambda", "kind")}
    data["mode"] = _EXPERIMENT_MODES[args.experiment]
    config = ExperimentConfig.from_mapping(data)
    return config.with_overrides(
        m_values=st.args.m,
        seed=args.seed,
        phi=st.phi,
        trials=args.trials,
        n_originals=args.n_originals,
        n_copies=args.n_copies,
        n_shapes=args.n_shapes,
        k=args.k,
        input_dir=args.input_dir,
        snap_rotations=True if args.snap_rotations else None,
        rays_per_wedge=args.rays_per_wedge,
        profile=args.profile,
        workers=args.workers,
    )


def cmd_experiment(args, st: Settings) -> int:
    config = experiment_config(args, st)
    if args.experiment == "cluster":
        summary = run_cluster_experiment(config)
        table = _csv_text(("m", "trial", "accuracy"), ((r.m, r.trial, _fmt(r.accuracy)) for r in summary.rows))
        stats = _csv_text(("m", "mean", "std"), ((m, _fmt(a), _fmt(s)) for m, a, s in summary.table()))
    elif args.experiment == "knn":
        rows = run_knn_experiment(config)
        table = _csv_text(
            ("m", "trial", "query", "rank", "top_id", "top_distance"),
            ((r.m, r.trial, r.query, r.rank or "", r.top_id, _fmt(r.top_distance)) for r in rows),
        )
        firsts = {}
        for r in rows:
            firsts.setdefault(r.m, []).append(r.rank == 1)
        stats = _csv_text(("m", "rank1_fraction"), ((m, _fmt(sum(v) / len(v))) for m, v in sorted(firsts.items())))
    else:
        res = run_convergence(config)
        table = _csv_text(("m", "deviation"), ((m, _fmt(d)) for m, d in res.rows()))
        order = "inf" if math.isinf(res.order) else _fmt(res.order)
        stats = _csv_text(("order", "floor"), [(order, _fmt(res.floor))])
    _emit_text(table, args.output)
    if args.summary:
        Path(args.summary).write_text(stats)
    else:
        sys.stderr.write(stats)
    return EXIT_OK


def cmd_verify(args, st: Settings) -> int:
    status = EXIT_OK
    reports = []
    for m in st.m_values or [5]:
        rep = verify_injectivity(
            m, args.family, trials=args.trials, seed=st.seed, phi=st.phi, workers=args.workers
        )
        reports.append(rep.to_dict())
        if not rep.ok:
            status = EXIT_NUMERICAL
    _emit_json(reports if len(reports) > 1 else reports[0], Path(args.output) if args.output else None)
    return status


# ---------------------------------------------------------------------------
# parser


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("common options")
    g.add_argument("--config", help="JSON or TOML file with defaults; flags override it")
    g.add_argument("--seed", type=int, help="master random seed (default 0)")
    g.add_argument("--m", type=_int_list, help="number of wedges; a comma list for experiments")
    g.add_argument("--lambda", dest="lam", type=float, help="phi rate lambda (default 1)")
    g.add_argument("--phi", choices=PHI_KINDS, help="characteristic map (default neg_exp)")
    g.add_argument("--rays-per-wedge", type=int, help=f"extra rays per wedge (default {DEFAULT_RAYS_PER_WEDGE})")
    g.add_argument("-o", "--output", help="output file or directory (default stdout)")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="starsketch", description="Rotation-invariant sketches of star-shaped outlines.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_, **kw):
        return sub.add_parser(name, help=help_, parents=[common], **kw)

    p = add("standardize", "centre and scale outlines")
    p.add_argument("inputs", nargs="+")
    p.set_defaults(func=cmd_standardize)

    p = add("discretize", "outline -> radial function on m wedges")
    p.add_argument("inputs", nargs="+")
    p.set_defaults(func=cmd_discretize)

    p = add("sketch", "outline or radial function -> sketch")
    p.add_argument("inputs", nargs="+")
    p.add_argument("--format", choices=("binary", "json"), default="binary", help="file format when -o is a directory")
    p.set_defaults(func=cmd_sketch)

    p = add("dist", "distances between two inputs")
    p.add_argument("a")
    p.add_argument("b")
    p.set_defaults(func=cmd_dist)

    p = sub.add_parser("index", help="build or query a sketch index")
    isub = p.add_subparsers(dest="index_command", required=True)
    q = isub.add_parser("build", parents=[common], help="sketch inputs into an index directory")
    q.add_argument("inputs", nargs="+")
    q.set_defaults(func=cmd_index_build)
    q = isub.add_parser("query", parents=[common], help="k nearest neighbours of a query")
    q.add_argument("index")
    q.add_argument("query")
    q.add_argument("-k", type=int, default=5)
    q.add_argument("--format", choices=("csv", "json"), default="csv")
    q.set_defaults(func=cmd_index_query)

    p = add("cluster", "k-means over an index")
    p.add_argument("index")
    p.add_argument("-k", type=int, required=True)
    p.add_argument("--max-iters", type=int, default=300)
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("experiment", help="run an experiment and print a CSV table")
    esub = p.add_subparsers(dest="experiment", required=True)
    for name in _EXPERIMENT_MODES:
        q = esub.add_parser(name, parents=[common])
        q.add_argument("--trials", type=int)
        q.add_argument("--n-originals", type=int)
        q.add_argument("--n-copies", type=int)
        q.add_argument("--n-shapes", type=int)
        q.add_argument("-k", type=int)
        q.add_argument("--input-dir")
        q.add_argument("--snap-rotations", action="store_true", help="rotate by multiples of 2*pi/m only")
        q.add_argument("--profile", choices=("spline", "fourier", "constant"))
        q.add_argument("--workers", type=int, help=f"threads (default ${THREADS_ENV} or 1)")
        q.add_argument("--summary", help="write the per-m summary table here instead of stderr")
        q.set_defaults(func=cmd_experiment)

    p = sub.add_parser("verify", help="machine checks")
    vsub = p.add_subparsers(dest="verify_command", required=True)
    q = vsub.add_parser("injectivity", parents=[common], help="lag-homometry vs equivalence vs sketch equality")
    q.add_argument("--family", choices=("permutations", "random_general_position"), default="permutations")
    q.add_argument("--trials", type=int, default=10_000)
    q.add_argument("--workers", type=int, default=None)
    q.set_defaults(func=cmd_verify)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "workers", None) is None and hasattr(args, "workers"):
        args.workers = default_workers() if args.func is cmd_verify else None
    try:
        return args.func(args, Settings(args))
    except NumericalRejection as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (InputError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
