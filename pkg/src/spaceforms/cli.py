"""Command-line interface: ``spaceforms {bench,fit,spectrum}``.

Exit codes: 0 on success, 1 on bad input (config, points file, arguments),
2 when a run finished but some trials or datasets failed.

Every invocation writes a run manifest (tool version, config hash, seed,
start/end timestamps, outputs).  Timestamps live only in the manifest, so
the other outputs are reproducible byte for byte.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from . import bench
from .baseline import PgaConfig, fit_pga
from .geometry import GeometryError, Kind, SpaceForm, check_points
from .sfpca import cost, fit
from .spectrum import curve_to_csv, rank_datasets, ranking_to_csv, spectrum_curve
from .subspace import project_or_base, to_low_dim

EXIT_OK, EXIT_INPUT, EXIT_PARTIAL = 0, 1, 2

CONFIG_KEYS = {
    "experiment", "space", "curvature", "D", "K", "N", "sigma", "trials",
    "seed", "methods", "output_dir", "pga", "timing",
}
REQUIRED_KEYS = ("space", "D", "K", "N", "sigma")


class InputError(Exception):
    """Bad user input; reported on stderr with exit code 1."""


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="microseconds")


def config_hash(doc) -> str:
    canon = json.dumps(doc, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()


def _write_manifest(path: Path, doc, seed, started, outputs):
    manifest = {
        "tool": "spaceforms",
        "version": __version__,
        "config_hash": config_hash(doc),
        "seed": seed,
        "started": started,
        "finished": _now(),
        "outputs": [str(p) for p in outputs],
    }
    path.write_text(json.dumps(manifest, indent=2) + "\n")


def _num(v) -> str:
    return format(float(v), ".17g")


def _default_curvature(kind: Kind) -> float:
    return 1.0 if kind is Kind.SPHERICAL else -1.0


# -- bench -------------------------------------------------------------------


def load_config(path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"{path}: cannot read config: {exc.strerror}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}:{exc.lineno}:{exc.colno}: invalid JSON: {exc.msg}") from None
    if not isinstance(doc, dict):
        raise InputError(f"{path}: config must be a JSON object")
    unknown = sorted(set(doc) - CONFIG_KEYS)
    if unknown:
        raise InputError(f"{path}: unknown field(s) {', '.join(unknown)}")
    missing = [k for k in REQUIRED_KEYS if k not in doc]
    if missing:
        raise InputError(f"{path}: missing field(s) {', '.join(missing)}")
    return doc


def _configs_from_doc(doc, path, seed_override=None):
    try:
        kind = Kind(doc["space"])
    except ValueError:
        raise InputError(f"{path}: field 'space' must be 'spherical' or 'hyperbolic'") from None
    pga_doc = doc.get("pga", {})
    try:
        pga = PgaConfig(**pga_doc)
    except (TypeError, ValueError) as exc:
        raise InputError(f"{path}: field 'pga': {exc}") from None
    seed = doc.get("seed", 0) if seed_override is None else seed_override
    for key in ("D", "K", "N", "trials", "seed"):
        vals = doc.get(key, 1) if key != "seed" else seed
        for v in vals if isinstance(vals, list) else [vals]:
            if isinstance(v, bool) or not isinstance(v, int):
                raise InputError(f"{path}: field '{key}' must hold integers, got {v!r}")
    for v in doc["sigma"] if isinstance(doc["sigma"], list) else [doc["sigma"]]:
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise InputError(f"{path}: field 'sigma' must hold numbers, got {v!r}")
    methods = doc.get("methods", ["sfpca"])
    if not isinstance(methods, list):
        raise InputError(f"{path}: field 'methods' must be a list")
    try:
        return bench.expand_grid(
            kind=kind,
            curvature=float(doc.get("curvature", _default_curvature(kind))),
            D=doc["D"], K=doc["K"], N=doc["N"], sigma=doc["sigma"],
            trials=doc.get("trials", 1), seed=seed, methods=methods,
            experiment=str(doc.get("experiment", "")), pga=pga,
            timing=bool(doc.get("timing", True)),
        )
    except (TypeError, ValueError) as exc:
        raise InputError(f"{path}: {exc}") from None


def cmd_bench(args) -> int:
    started = _now()
    doc = load_config(args.config)
    configs = _configs_from_doc(doc, args.config, args.seed)
    out = Path(args.out or doc.get("output_dir", "."))
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise InputError(f"{out}: cannot create output directory: {exc.strerror}") from None

    reports = []
    for cfg in configs:
        reports.extend(bench.run_grid(cfg, threads=args.threads))

    csv_path, meta_path = out / "results.csv", out / "results.json"
    manifest_path = out / "manifest.json"
    meta = bench.metadata(configs, reports)
    meta["config"] = doc
    try:
        csv_path.write_text(bench.reports_to_csv(reports))
        meta_path.write_text(json.dumps(meta, indent=2) + "\n")
        _write_manifest(manifest_path, doc, configs[0].seed, started, [csv_path, meta_path])
    except OSError as exc:
        raise InputError(f"{out}: cannot write outputs: {exc.strerror}") from None

    failed = [r for r in reports if r.error]
    for r in failed:
        print(f"trial {r.trial} ({r.method}, D={r.D}, K={r.K}, N={r.N}, sigma={r.sigma}) "
              f"failed: {r.error}", file=sys.stderr)
    return EXIT_PARTIAL if failed else EXIT_OK


# -- fit ---------------------------------------------------------------------


def read_points(path, space_kind: Kind, curvature: float) -> tuple[SpaceForm, np.ndarray]:
    """Read a ``x0..xD`` CSV and validate every row for the declared space."""
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise InputError(f"{path}: cannot read points: {exc.strerror}") from None
    if not rows:
        raise InputError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    expected = [f"x{i}" for i in range(len(header))]
    if header != expected:
        raise InputError(f"{path}: header must be x0..xD, got {','.join(header)}")
    if len(header) < 2:
        raise InputError(f"{path}: need at least two coordinates")
    body = rows[1:]
    if not body:
        raise InputError(f"{path}: no points")
    data = np.empty((len(body), len(header)))
    for i, row in enumerate(body):
        if len(row) != len(header):
            raise InputError(f"{path}: row {i} has {len(row)} values, expected {len(header)}")
        try:
            data[i] = [float(v) for v in row]
        except ValueError:
            raise InputError(f"{path}: row {i} holds a non-numeric value") from None
    try:
        space = SpaceForm(space_kind, curvature, len(header) - 1)
        check_points(space, data)
    except GeometryError as exc:
        raise InputError(f"{path}: {exc}") from None
    except ValueError as exc:
        raise InputError(f"{path}: {exc}") from None
    return space, data


def _points_csv(x) -> str:
    x = np.atleast_2d(x)
    lines = [",".join(f"x{i}" for i in range(x.shape[1]))]
    lines += [",".join(_num(v) for v in row) for row in x]
    return "\n".join(lines) + "\n"


def _space_args(args):
    kind = Kind(args.space)
    c = args.curvature if args.curvature is not None else _default_curvature(kind)
    return kind, c


def cmd_fit(args) -> int:
    started = _now()
    kind, c = _space_args(args)
    space, x = read_points(args.points, kind, c)
    k = args.k
    if not 0 <= k <= space.dim:
        raise InputError(f"--k must lie in [0, {space.dim}], got {k}")
    if args.method == "sfpca":
        model = fit(space, x)
    else:
        model = fit_pga(space, x)
    sub = model.subspace(k)
    extra = {
        "k": k,
        "cost": cost(model, k, x),
        "eigenvalues_all": model.eigenvalues.tolist(),
    }
    doc = model.to_dict()
    doc["components"] = doc["components"][:k]
    doc.update(extra)
    out = Path(args.out)
    outputs = [out]
    try:
        out.write_text(json.dumps(doc, indent=2) + "\n")
        if args.project:
            Path(args.project).write_text(_points_csv(project_or_base(sub, x)))
            outputs.append(Path(args.project))
        if args.low_dim:
            Path(args.low_dim).write_text(_points_csv(to_low_dim(sub, x)))
            outputs.append(Path(args.low_dim))
        config = {"command": "fit", "points": str(args.points), "space": kind.value,
                  "curvature": c, "k": k, "method": args.method}
        _write_manifest(Path(str(out) + ".manifest.json"), config, None, started, outputs)
    except OSError as exc:
        raise InputError(f"{out}: cannot write outputs: {exc.strerror}") from None
    return EXIT_OK


# -- spectrum ----------------------------------------------------------------


def cmd_spectrum(args) -> int:
    started = _now()
    if not args.points:
        raise InputError("spectrum needs at least one points file")
    c = args.curvature if args.curvature is not None else -1.0
    sets, ids = [], []
    space = None
    for path in args.points:
        sp, x = read_points(path, Kind.HYPERBOLIC, c)
        if space is not None and sp != space:
            raise InputError(f"{path}: dimension {sp.dim} differs from {space.dim}")
        space = sp
        sets.append(x)
        ids.append(Path(path).stem)
    ranking = rank_datasets(space, sets)
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
        outputs = []
        for i, (x, name) in enumerate(zip(sets, ids)):
            if ranking.failed[i]:
                continue
            path = out / f"curve_{i:03d}_{name}.csv"
            path.write_text(curve_to_csv(spectrum_curve(fit(space, x))))
            outputs.append(path)
        rank_path = out / "ranking.csv"
        rank_path.write_text(ranking_to_csv(ids, ranking))
        outputs.append(rank_path)
        config = {"command": "spectrum", "points": [str(p) for p in args.points], "curvature": c}
        _write_manifest(out / "manifest.json", config, None, started, outputs)
    except OSError as exc:
        raise InputError(f"{out}: cannot write outputs: {exc.strerror}") from None
    for i in np.flatnonzero(ranking.failed):
        print(f"{args.points[i]}: fit failed, ranked last", file=sys.stderr)
    return EXIT_PARTIAL if ranking.failed.any() else EXIT_OK


# -- entry point ---------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_INPUT)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="spaceforms", description="PCA on spheres and hyperboloids.")
    p.add_argument("--version", action="version", version=f"spaceforms {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    b = sub.add_parser("bench", help="run a synthetic experiment grid")
    b.add_argument("--config", required=True, help="JSON experiment config")
    b.add_argument("--seed", type=int, help="override the config seed")
    b.add_argument("--out", help="output directory (overrides output_dir)")
    b.add_argument("--threads", type=int, default=1, help="parallel trials")
    b.set_defaults(func=cmd_bench)

    f = sub.add_parser("fit", help="fit a model to a points file")
    f.add_argument("points", help="CSV with header x0..xD")
    f.add_argument("--space", choices=[k.value for k in Kind], required=True)
    f.add_argument("--curvature", type=float, help="default 1 (spherical) or -1 (hyperbolic)")
    f.add_argument("--k", type=int, required=True, help="subspace dimension")
    f.add_argument("--method", choices=bench.METHODS, default="sfpca")
    f.add_argument("--out", required=True, help="model JSON path")
    f.add_argument("--project", help="write projected points to this CSV")
    f.add_argument("--low-dim", help="write K-dimensional coordinates to this CSV")
    f.set_defaults(func=cmd_fit)

    s = sub.add_parser("spectrum", help="retained-energy curves and knee ranking")
    s.add_argument("points", nargs="*", help="hyperbolic CSV files")
    s.add_argument("--curvature", type=float, help="default -1")
    s.add_argument("--out", required=True, help="output directory")
    s.set_defaults(func=cmd_spectrum)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (GeometryError, np.linalg.LinAlgError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
