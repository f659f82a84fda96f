"""Closed-form PCA on spheres and hyperboloids.

Both solvers work from the second moment ``C_x = E[x x^T]`` of the data.
On the sphere the base point is the leading eigenvector of ``C_x`` and the
principal directions are the following eigenvectors.  On the hyperboloid
the base point is the single negative-norm J-eigenvector of ``C_x`` and the
directions are the positive-norm J-eigenvectors by descending eigenvalue.

The fitted model keeps all ``D`` directions, so the optimal ``K``-dimensional
subspace for any ``K`` is the prefix of the first ``K`` components.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import geometry as geo
from .geometry import Kind, SpaceForm
from .lorentz import DegenerateNorm, j_eigendecompose
from .subspace import AffineSubspace, residual_energy

__all__ = [
    "SecondMoment",
    "PcaModel",
    "second_moment",
    "fit_spherical",
    "fit_hyperbolic",
    "fit",
    "cost",
    "mean",
]

RIDGE = 1e-12
TIE_TOL = 1e-11


@dataclass(frozen=True)
class SecondMoment:
    matrix: np.ndarray
    n_points: int


@dataclass(frozen=True, eq=False)
class PcaModel:
    """Base point plus ordered principal directions at it.

    ``components`` has one column per direction, scaled so that
    ``g(h, h) = |C|``; ``eigenvalues`` are the matching (J-)eigenvalues of the
    second moment, or tangent-space variances for PGA.
    """

    space: SpaceForm
    base: np.ndarray
    components: np.ndarray
    eigenvalues: np.ndarray
    base_eigenvalue: float | None = None
    method: str = "sfpca"
    n_points: int = 0
    flags: dict = field(default_factory=dict)

    @property
    def n_components(self) -> int:
        return self.components.shape[1]

    def subspace(self, k: int) -> AffineSubspace:
        if not 0 <= k <= self.n_components:
            raise ValueError(f"K must lie in [0, {self.n_components}], got {k}")
        return AffineSubspace(self.space, self.base, self.components[:, :k])

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "space": {
                "kind": self.space.kind.value,
                "curvature": self.space.curvature,
                "dim": self.space.dim,
            },
            "n_points": self.n_points,
            "base": self.base.tolist(),
            "components": self.components.T.tolist(),
            "eigenvalues": self.eigenvalues.tolist(),
            "base_eigenvalue": self.base_eigenvalue,
            "flags": {k: self.flags[k] for k in sorted(self.flags)},
        }

    def to_json(self, **extra) -> str:
        doc = self.to_dict()
        doc.update(extra)
        return json.dumps(doc, indent=2)

    @classmethod
    def from_dict(cls, doc: dict) -> "PcaModel":
        sp = doc["space"]
        space = SpaceForm(Kind(sp["kind"]), sp["curvature"], sp["dim"])
        comps = np.array(doc["components"], dtype=float).reshape(-1, space.dim + 1).T
        return cls(
            space=space,
            base=np.array(doc["base"], dtype=float),
            components=comps,
            eigenvalues=np.array(doc["eigenvalues"], dtype=float),
            base_eigenvalue=doc.get("base_eigenvalue"),
            method=doc.get("method", "sfpca"),
            n_points=doc.get("n_points", 0),
            flags=dict(doc.get("flags", {})),
        )

    @classmethod
    def from_json(cls, text: str) -> "PcaModel":
        return cls.from_dict(json.loads(text))


def _points(space, points):
    x = np.asarray(points, dtype=float)
    if x.ndim == 1:
        x = x[None, :]
    if x.ndim != 2 or x.shape[0] == 0:
        raise ValueError("need a nonempty (N, D+1) array of points")
    if x.shape[1] != space.dim + 1:
        raise ValueError(
            f"points have {x.shape[1]} coordinates but the space needs {space.dim + 1}"
        )
    return x


def second_moment(space: SpaceForm, points) -> SecondMoment:
    x = _points(space, points)
    return SecondMoment(x.T @ x / x.shape[0], x.shape[0])


def _fix_sign(v):
    big = np.abs(v) > 1e-12 * np.max(np.abs(v))
    return -v if v[np.argmax(big)] < 0 else v


def _has_ties(values):
    vals = np.sort(values)
    tol = TIE_TOL * max(np.max(np.abs(vals)), 1e-300)
    return bool(np.any(np.diff(vals) <= tol))


def fit_spherical(space: SpaceForm, points) -> PcaModel:
    if not space.spherical:
        raise ValueError("fit_spherical needs a spherical space")
    sm = second_moment(space, points)
    w, v = np.linalg.eigh(sm.matrix)
    v = np.array([_fix_sign(col) for col in v.T]).T
    order = sorted(range(len(w)), key=lambda d: (-w[d], tuple(-v[:, d])))
    w, v = w[order], v[:, order]
    c = space.curvature
    return PcaModel(
        space=space,
        base=geo.normalize(space, v[:, 0]),
        components=v[:, 1:] * np.sqrt(c),
        eigenvalues=w[1:],
        base_eigenvalue=float(w[0]),
        n_points=sm.n_points,
        flags={"degenerate": _has_ties(w), "regularized": False},
    )


def fit_hyperbolic(space: SpaceForm, points) -> PcaModel:
    if space.spherical:
        raise ValueError("fit_hyperbolic needs a hyperbolic space")
    sm = second_moment(space, points)
    regularized = False
    try:
        dec = j_eigendecompose(sm.matrix)
    except DegenerateNorm:
        ridge = RIDGE * np.trace(sm.matrix) * np.eye(space.dim + 1)
        dec = j_eigendecompose(sm.matrix + ridge)
        regularized = True
    if np.sum(dec.signs < 0) != 1:
        raise DegenerateNorm(
            f"expected one negative J-eigenvector, found {int(np.sum(dec.signs < 0))}"
        )
    s = np.sqrt(abs(space.curvature))
    return PcaModel(
        space=space,
        base=geo.normalize(space, dec.vectors[:, 0]),
        components=dec.vectors[:, 1:] * s,
        eigenvalues=dec.eigenvalues[1:],
        base_eigenvalue=float(dec.eigenvalues[0]),
        n_points=sm.n_points,
        flags={"degenerate": dec.degenerate, "regularized": regularized},
    )


def fit(space: SpaceForm, points) -> PcaModel:
    if space.spherical:
        return fit_spherical(space, points)
    return fit_hyperbolic(space, points)


def cost(model: PcaModel, k: int, points) -> float:
    """Mean residual energy of ``points`` against the ``k``-dimensional model subspace.

    When the model carries a full set of directions the normal space is
    spanned by the unused components, and the energy is summed over them
    directly; this avoids the cancellation of the span-based identity for
    points far from the base.
    """
    space = model.space
    x = _points(space, points)
    if model.n_components == space.dim:
        if not 0 <= k <= space.dim:
            raise ValueError(f"K must lie in [0, {space.dim}], got {k}")
        rest = model.components[:, k:]
        proj = (x * space.signature) @ rest
        return float(np.mean(np.sum(proj * proj, axis=1)))
    return float(np.mean(residual_energy(model.subspace(k), x)))


def mean(space: SpaceForm, points) -> np.ndarray:
    """Closed-form centroid: the base point of the fitted model.

    On the sphere only the axis is determined; the sign follows the
    first-nonzero-entry-positive convention.
    """
    return fit(space, points).base
