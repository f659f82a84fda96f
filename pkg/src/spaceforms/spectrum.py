"""Retained-energy curves of hyperbolic spectra and their knee points.

For a fitted hyperbolic model with component eigenvalues ``l_1 >= ... >= l_D``
the retained energy of the ``K``-dimensional model is
``(l_1 + ... + l_{K-1}) / (l_1 + ... + l_D)``, plotted against
``x = (K - 1) / D`` for ``K = 1 .. D + 1``.  The knee is where this curve
crosses the line ``y = 1 - x``.

A small knee means the energy sits in a few directions.  Points pushed far
along a single direction inflate one eigenvalue exponentially, so outlier
contaminated datasets have small knees; :func:`rank_datasets` therefore
lists the most outlier-suspect datasets first.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .geometry import SpaceForm
from .sfpca import PcaModel, fit_hyperbolic

__all__ = [
    "SpectrumCurve",
    "Ranking",
    "retained_energy",
    "spectrum_curve",
    "knee_point",
    "dataset_knee",
    "rank_datasets",
    "curve_to_csv",
    "ranking_to_csv",
]


@dataclass(frozen=True)
class SpectrumCurve:
    normalized_dims: np.ndarray
    retained: np.ndarray
    knee_x: float
    flat: bool = False


@dataclass(frozen=True)
class Ranking:
    """``order[r]`` is the dataset at rank ``r``; failed fits come last with NaN knees."""

    order: np.ndarray
    knees: np.ndarray
    failed: np.ndarray


def _energies(model):
    if model.space.spherical:
        raise ValueError("spectrum diagnostics need a hyperbolic model")
    return np.maximum(np.asarray(model.eigenvalues, dtype=float), 0.0)


def retained_energy(model: PcaModel, k: int) -> float:
    """Share of the component energy kept by the ``k``-dimensional model, 1 for a flat spectrum."""
    lam = _energies(model)
    if not 1 <= k <= lam.size + 1:
        raise ValueError(f"K must lie in [1, {lam.size + 1}], got {k}")
    total = lam.sum()
    if total <= 0:
        return 1.0
    return float(min(lam[: k - 1].sum() / total, 1.0))


def knee_point(dims, retained) -> float:
    """Crossing of the piecewise-linear curve with ``y = 1 - x``."""
    x = np.asarray(dims, dtype=float)
    y = np.asarray(retained, dtype=float)
    gap = y - (1.0 - x)
    hit = np.flatnonzero(gap >= 0)
    if hit.size == 0:
        return 1.0
    i = hit[0]
    if i == 0 or gap[i] == 0:
        return float(x[i])
    t = -gap[i - 1] / (gap[i] - gap[i - 1])
    return float(x[i - 1] + t * (x[i] - x[i - 1]))


def spectrum_curve(model: PcaModel) -> SpectrumCurve:
    lam = _energies(model)
    d = lam.size
    dims = np.arange(d + 1) / d
    total = lam.sum()
    if total <= 0:
        retained = np.ones(d + 1)
        return SpectrumCurve(dims, retained, knee_point(dims, retained), flat=True)
    retained = np.minimum(np.concatenate([[0.0], np.cumsum(lam)]) / total, 1.0)
    retained[-1] = 1.0
    return SpectrumCurve(dims, retained, knee_point(dims, retained))


def dataset_knee(space: SpaceForm, points) -> float:
    return spectrum_curve(fit_hyperbolic(space, points)).knee_x


def rank_datasets(space: SpaceForm, datasets) -> Ranking:
    """Stable ascending sort by knee, so concentrated spectra come first."""
    knees = []
    for x in datasets:
        try:
            knees.append(dataset_knee(space, x))
        except (ValueError, np.linalg.LinAlgError):
            knees.append(np.nan)
    knees = np.array(knees, dtype=float)
    failed = np.isnan(knees)
    key = np.where(failed, np.inf, knees)
    order = np.argsort(key, kind="stable")
    return Ranking(order, knees, failed)


def _num(v) -> str:
    return format(float(v), ".17g")


def curve_to_csv(curve: SpectrumCurve) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["x", "retained"])
    for x, y in zip(curve.normalized_dims, curve.retained):
        w.writerow([_num(x), _num(y)])
    return buf.getvalue()


def ranking_to_csv(ids, ranking: Ranking) -> str:
    """Rows in rank order: ``dataset_id, knee_x, rank`` (rank starts at 1)."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["dataset_id", "knee_x", "rank"])
    for r, i in enumerate(ranking.order, start=1):
        w.writerow([ids[i], _num(ranking.knees[i]), r])
    return buf.getvalue()
