"""Synthetic recovery experiments.

A trial plants a random affine subspace, draws noisy points around it, fits
each method on the same points and scores the fit by the normalized output
error ``n_o / n_i``:

* ``n_i`` is the mean distance of the raw points to the true subspace,
* ``n_o`` is the mean distance of the points projected onto the fitted
  subspace to the true subspace.

Random streams come from numpy's counter-based ``Philox`` generator keyed by
``(seed, cell, trial)``, so every trial is reproducible on its own and
results do not depend on how trials are scheduled.
"""

from __future__ import annotations

import csv
import io
import itertools
import platform
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__
from . import geometry as geo
from .baseline import PgaConfig, fit_pga
from .geometry import Kind, SpaceForm
from .sfpca import PcaModel, fit
from .subspace import AffineSubspace, project_or_base, projection_distance

__all__ = [
    "ExperimentConfig",
    "TrialReport",
    "CSV_COLUMNS",
    "METHODS",
    "trial_rng",
    "random_subspace",
    "noisy_points",
    "inject_outliers",
    "evaluate",
    "run_trial",
    "run_grid",
    "expand_grid",
    "reports_to_csv",
    "metadata",
]

METHODS = ("sfpca", "pga")
CSV_COLUMNS = (
    "experiment", "method", "D", "K", "N", "sigma", "trial",
    "n_i", "n_o", "ratio", "fit_seconds", "converged",
)
RNG_NAME = "numpy.random.Philox(SeedSequence(seed, spawn_key=(cell, trial)))"


def signal_scale(space: SpaceForm) -> float:
    """Variance of the in-subspace coefficients: pi/4 on spheres, 1 on hyperboloids."""
    return np.pi / 4 if space.spherical else 1.0


@dataclass(frozen=True)
class ExperimentConfig:
    kind: Kind
    curvature: float
    D: int
    K: int
    N: int
    sigma: float
    trials: int = 1
    seed: int = 0
    methods: tuple = ("sfpca",)
    experiment: str = ""
    cell: int = 0
    pga: PgaConfig = field(default_factory=PgaConfig)
    timing: bool = True

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        object.__setattr__(self, "methods", tuple(self.methods))
        # validates curvature sign and D
        self.space()
        if not 1 <= self.K <= self.D:
            raise ValueError(f"K must satisfy 1 <= K <= D, got K={self.K}, D={self.D}")
        if self.N < 1:
            raise ValueError(f"N must be at least 1, got {self.N}")
        if self.trials < 1:
            raise ValueError(f"trials must be at least 1, got {self.trials}")
        if not self.sigma >= 0:
            raise ValueError(f"sigma must be nonnegative, got {self.sigma}")
        if not 0 <= self.seed < 2**64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        bad = [m for m in self.methods if m not in METHODS]
        if bad or not self.methods:
            raise ValueError(f"methods must be a nonempty subset of {METHODS}, got {self.methods}")

    def space(self) -> SpaceForm:
        return SpaceForm(self.kind, self.curvature, self.D)


@dataclass(frozen=True)
class TrialReport:
    experiment: str
    method: str
    D: int
    K: int
    N: int
    sigma: float
    trial: int
    n_i: float
    n_o: float
    ratio: float
    fit_seconds: float = 0.0
    converged: bool = True
    noiseless: bool = False
    error: str | None = None


def trial_rng(seed: int, cell: int, trial: int) -> np.random.Generator:
    ss = np.random.SeedSequence(seed, spawn_key=(cell, trial))
    return np.random.Generator(np.random.Philox(ss))


def random_subspace(space: SpaceForm, k: int, rng: np.random.Generator) -> AffineSubspace:
    """Random base point and ``k`` Gram-Schmidt orthogonalized Gaussian directions.

    On the hyperboloid the base is ``|C|^{-1/2} (sqrt(1 + |s|^2), s)`` for a
    standard normal ``s``, which always lands on the upper sheet.
    """
    if not 1 <= k <= space.dim:
        raise ValueError(f"K must satisfy 1 <= K <= D, got {k}")
    n = space.dim + 1
    while True:
        w = rng.standard_normal(n)
        if space.spherical:
            if np.linalg.norm(w) < 1e-8:
                continue
            p = geo.normalize(space, w)
        else:
            s = w[1:]
            p = np.concatenate([[np.sqrt(1.0 + s @ s)], s]) / space.scale
        try:
            return AffineSubspace.from_vectors(space, p, rng.standard_normal((n, k)))
        except ValueError:
            continue


def noisy_points(sub: AffineSubspace, n: int, sigma: float, rng: np.random.Generator) -> np.ndarray:
    """``exp_p(H c + P nu)`` with ``c ~ N(0, a I_K)`` and ``nu ~ N(0, a sigma^2 I_{D+1})``.

    ``P`` projects onto the tangent space at the base and ``a`` is
    :func:`signal_scale`.  The columns of ``H`` are used at unit length.
    """
    space = sub.space
    a = signal_scale(space)
    c = rng.normal(0.0, np.sqrt(a), size=(n, sub.dim))
    v = c @ sub.basis.T / space.scale
    nu = rng.normal(0.0, np.sqrt(a) * sigma, size=(n, space.dim + 1))
    v = v + geo.tangent_project(space, sub.base, nu)
    return geo.exp_map(space, sub.base, v)


def inject_outliers(
    sub: AffineSubspace, points, fraction: float, amplitude: float, rng: np.random.Generator
) -> np.ndarray:
    """Push a random ``fraction`` of the points along one fixed normal direction.

    The direction is a random unit tangent vector at the base orthogonal to
    the subspace; the chosen points move by ``amplitude`` times the signal
    standard deviation in their base-point tangent coordinates.
    """
    space = sub.space
    x = np.array(points, dtype=float)
    n = x.shape[0]
    m = int(round(fraction * n))
    normal = AffineSubspace.from_vectors(
        space, sub.base, np.concatenate([sub.basis, rng.standard_normal((space.dim + 1, 1))], axis=1)
    ).basis[:, -1] / space.scale
    idx = rng.choice(n, size=m, replace=False)
    shift = amplitude * np.sqrt(signal_scale(space)) * normal
    x[idx] = geo.exp_map(space, sub.base, geo.log_map(space, sub.base, x[idx]) + shift)
    return x


def evaluate(true_sub: AffineSubspace, model: PcaModel, k: int, points) -> tuple[float, float, float, bool]:
    """``(n_i, n_o, ratio, noiseless)``; the ratio is 0 when ``n_i`` is 0."""
    x = np.asarray(points, dtype=float)
    n_i = float(np.mean(projection_distance(true_sub, x)))
    denoised = project_or_base(model.subspace(k), x)
    n_o = float(np.mean(projection_distance(true_sub, denoised)))
    if n_i > 0:
        return n_i, n_o, n_o / n_i, False
    return n_i, n_o, 0.0, True


def _fit(method, space, x, pga_cfg):
    if method == "sfpca":
        return fit(space, x)
    return fit_pga(space, x, pga_cfg)


def run_trial(cfg: ExperimentConfig, trial: int) -> list[TrialReport]:
    space = cfg.space()
    rng = trial_rng(cfg.seed, cfg.cell, trial)
    sub = random_subspace(space, cfg.K, rng)
    x = noisy_points(sub, cfg.N, cfg.sigma, rng)
    head = dict(experiment=cfg.experiment, D=cfg.D, K=cfg.K, N=cfg.N, sigma=cfg.sigma, trial=trial)
    out = []
    for method in cfg.methods:
        try:
            t0 = time.perf_counter()
            model = _fit(method, space, x, cfg.pga)
            seconds = time.perf_counter() - t0 if cfg.timing else 0.0
            n_i, n_o, ratio, noiseless = evaluate(sub, model, cfg.K, x)
            converged = bool(model.flags.get("converged", True))
            out.append(TrialReport(method=method, n_i=n_i, n_o=n_o, ratio=ratio,
                                   fit_seconds=seconds, converged=converged,
                                   noiseless=noiseless, **head))
        except (ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
            nan = float("nan")
            out.append(TrialReport(method=method, n_i=nan, n_o=nan, ratio=nan,
                                   converged=False, error=f"{type(exc).__name__}: {exc}",
                                   **head))
    return out


def run_grid(cfg: ExperimentConfig, threads: int = 1) -> list[TrialReport]:
    """All trials of one grid cell, in trial order."""
    if threads <= 1:
        runs = [run_trial(cfg, t) for t in range(cfg.trials)]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            runs = list(pool.map(lambda t: run_trial(cfg, t), range(cfg.trials)))
    return [r for run in runs for r in run]


def expand_grid(
    kind, curvature, D, K, N, sigma, trials=1, seed=0, methods=("sfpca",),
    experiment="", pga=None, timing=True,
) -> list[ExperimentConfig]:
    """Cartesian product of the swept parameters, one config per cell.

    Scalars are treated as one-element lists.  Cells are numbered in
    ``D, K, N, sigma`` order; the number keys the cell's random streams.
    """
    def as_list(v):
        return list(v) if isinstance(v, (list, tuple)) else [v]

    pga = pga or PgaConfig()
    cells = itertools.product(as_list(D), as_list(K), as_list(N), as_list(sigma))
    return [
        ExperimentConfig(kind=kind, curvature=curvature, D=d, K=k, N=n, sigma=s,
                         trials=trials, seed=seed, methods=tuple(methods),
                         experiment=experiment, cell=i, pga=pga, timing=timing)
        for i, (d, k, n, s) in enumerate(cells)
    ]


def _num(v) -> str:
    return format(float(v), ".17g")


def reports_to_csv(reports: list[TrialReport]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in reports:
        w.writerow([
            r.experiment, r.method, r.D, r.K, r.N, _num(r.sigma), r.trial,
            _num(r.n_i), _num(r.n_o), _num(r.ratio), _num(r.fit_seconds),
            "true" if r.converged else "false",
        ])
    return buf.getvalue()


def metadata(configs: list[ExperimentConfig], reports: list[TrialReport]) -> dict:
    """Sidecar document: config echo, generator, versions and per-trial problems."""
    first = configs[0] if configs else None
    return {
        "tool": "spaceforms",
        "version": __version__,
        "seed": first.seed if first else None,
        "rng": RNG_NAME,
        "versions": {
            "python": platform.python_version(),
            "numpy": np.__version__,
        },
        "cells": [
            {
                "cell": c.cell, "experiment": c.experiment, "kind": c.kind.value,
                "curvature": c.curvature, "D": c.D, "K": c.K, "N": c.N,
                "sigma": c.sigma, "trials": c.trials, "methods": list(c.methods),
                "pga": asdict(c.pga), "timing": c.timing,
            }
            for c in configs
        ],
        "failures": [
            {"method": r.method, "D": r.D, "K": r.K, "N": r.N, "sigma": r.sigma,
             "trial": r.trial, "error": r.error}
            for r in reports if r.error
        ],
        "noiseless_trials": sum(1 for r in reports if r.noiseless),
    }
