"""Principal geodesic analysis (PGA) baseline.

The Frechet mean is found by Riemannian gradient descent, the data are
log-mapped into the tangent space there, and ordinary PCA of the tangent
vectors gives the directions.  The result is packaged as a
:class:`~spaceforms.sfpca.PcaModel` so it can be evaluated like SFPCA.

Unlike SFPCA the subspaces are only nested by eigen-ordering at a fixed
mean; nothing guarantees the prefix subspaces are optimal for their own
dimension.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import geometry as geo
from .geometry import SpaceForm
from .sfpca import PcaModel, _points
from .subspace import AffineSubspace, complement_basis

__all__ = ["PgaConfig", "FrechetResult", "frechet_mean", "fit_pga"]


@dataclass(frozen=True)
class PgaConfig:
    max_iters: int = 1000
    step_size: float = 1.0
    grad_tol: float = 1e-9

    def __post_init__(self):
        if int(self.max_iters) != self.max_iters or self.max_iters < 1:
            raise ValueError(f"max_iters must be a positive integer, got {self.max_iters}")
        if not self.step_size > 0:
            raise ValueError(f"step_size must be positive, got {self.step_size}")
        if not self.grad_tol > 0:
            raise ValueError(f"grad_tol must be positive, got {self.grad_tol}")


@dataclass(frozen=True)
class FrechetResult:
    point: np.ndarray
    converged: bool
    iterations: int
    grad_norm: float


def _objective(space, p, x):
    d = geo.distance(space, p, x)
    return float(np.mean(d * d))


def _initial_point(space, x):
    avg = np.mean(x, axis=0)
    if space.spherical and np.linalg.norm(avg) < 1e-12 * np.max(np.linalg.norm(x, axis=1)):
        # antipodally balanced cloud, any data point is as good a start as another
        return geo.normalize(space, x[0])
    return geo.normalize(space, avg)


def frechet_mean(space: SpaceForm, points, cfg: PgaConfig | None = None) -> FrechetResult:
    """Minimize the mean squared geodesic distance.

    Iterates ``p <- exp_p(t * mean(log_p(x_n)))`` and halves ``t`` while the
    objective would increase; when the change is within rounding the step
    must reduce the gradient norm instead.  ``grad_norm`` is the norm of
    ``mean(log_p(x_n))``, i.e. minus half the Riemannian gradient.  Spherical
    data should lie in an open hemisphere; otherwise the mean need not be
    unique and the iteration may stall.
    """
    cfg = cfg or PgaConfig()
    x = _points(space, points)
    p = _initial_point(space, x)
    f = _objective(space, p, x)
    grad = np.mean(geo.log_map(space, p, x), axis=0)
    gnorm = float(geo.norm(space, grad))
    it = 0
    while it < cfg.max_iters and gnorm > cfg.grad_tol:
        it += 1
        step = cfg.step_size
        # objective differences below rounding carry no information; there
        # the step must shrink the gradient instead, or full steps can keep
        # overshooting in negative curvature
        slack = 64 * np.finfo(float).eps * f
        accepted = False
        while step >= 1e-12:
            cand = geo.exp_map(space, p, step * grad)
            f_new = _objective(space, cand, x)
            if f_new <= f + slack:
                g_new = np.mean(geo.log_map(space, cand, x), axis=0)
                gn_new = float(geo.norm(space, g_new))
                if f_new < f - slack or gn_new < gnorm:
                    accepted = True
                    break
            step *= 0.5
        if not accepted:
            break
        p, f, grad, gnorm = cand, f_new, g_new, gn_new
    return FrechetResult(p, gnorm <= cfg.grad_tol, it, gnorm)


def fit_pga(space: SpaceForm, points, cfg: PgaConfig | None = None) -> PcaModel:
    """Frechet mean plus tangent PCA, keeping all ``D`` directions."""
    x = _points(space, points)
    res = frechet_mean(space, x, cfg)
    p = res.point
    s = space.scale
    # metric-orthonormal frame of the tangent space, frame[:, k] has g = |C|
    frame = complement_basis(AffineSubspace(space, p, np.zeros((space.dim + 1, 0))))
    v = geo.log_map(space, p, x)
    coords = (v * space.signature) @ frame / s
    cov = coords.T @ coords / x.shape[0]
    w, u = np.linalg.eigh(cov)
    order = np.argsort(-w, kind="stable")
    w, u = w[order], u[:, order]
    comps = frame @ u
    big = np.abs(comps) > 1e-12 * np.max(np.abs(comps), axis=0)
    first = comps[np.argmax(big, axis=0), np.arange(comps.shape[1])]
    comps = comps * np.where(first < 0, -1.0, 1.0)
    return PcaModel(
        space=space,
        base=p,
        components=comps,
        eigenvalues=np.maximum(w, 0.0),
        base_eigenvalue=None,
        method="pga",
        n_points=x.shape[0],
        flags={
            "converged": res.converged,
            "iterations": res.iterations,
            "grad_norm": res.grad_norm,
        },
    )
