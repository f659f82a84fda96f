"""Constant-curvature manifolds in ambient coordinates.

Points of the sphere ``S^D`` (curvature ``C > 0``) are vectors of
``R^{D+1}`` with ``<x, x> = 1/C``.  Points of the hyperboloid ``H^D``
(curvature ``C < 0``) satisfy ``[x, x] = 1/C`` and ``x_0 > 0`` where
``[x, y] = -x_0 y_0 + x_1 y_1 + ... + x_D y_D``.

Every function accepts stacked inputs: the last axis holds coordinates and
leading axes broadcast.  None of them validate their inputs; call
:func:`check_points` explicitly where that matters.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Kind",
    "SpaceForm",
    "GeometryError",
    "InvalidPoint",
    "AntipodalPoint",
    "metric",
    "norm",
    "distance",
    "exp_map",
    "log_map",
    "tangent_project",
    "normalize",
    "check_points",
    "is_point",
]

EPS_NORM = 1e-6


class Kind(enum.Enum):
    SPHERICAL = "spherical"
    HYPERBOLIC = "hyperbolic"


class GeometryError(ValueError):
    pass


class InvalidPoint(GeometryError):
    """Raised when a vector violates the manifold constraint."""

    def __init__(self, message, row=None, residual=None):
        super().__init__(message)
        self.row = row
        self.residual = residual


class AntipodalPoint(GeometryError):
    """The spherical logarithm is not unique at the antipode."""


@dataclass(frozen=True)
class SpaceForm:
    """A sphere or hyperboloid of dimension ``dim`` and curvature ``curvature``.

    ``dim`` is the manifold dimension D, so points have ``D + 1``
    coordinates.  Low-dimensional images of affine subspaces (``S^1``,
    ``H^1``) are allowed, hence ``dim >= 1``.
    """

    kind: Kind
    curvature: float
    dim: int

    def __post_init__(self):
        kind = Kind(self.kind)
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "curvature", float(self.curvature))
        if kind is Kind.SPHERICAL and not self.curvature > 0:
            raise ValueError(f"spherical space needs C > 0, got {self.curvature}")
        if kind is Kind.HYPERBOLIC and not self.curvature < 0:
            raise ValueError(f"hyperbolic space needs C < 0, got {self.curvature}")
        if int(self.dim) != self.dim or self.dim < 1:
            raise ValueError(f"dimension must be a positive integer, got {self.dim}")
        object.__setattr__(self, "dim", int(self.dim))

    @classmethod
    def sphere(cls, dim, curvature=1.0):
        return cls(Kind.SPHERICAL, curvature, dim)

    @classmethod
    def hyperboloid(cls, dim, curvature=-1.0):
        return cls(Kind.HYPERBOLIC, curvature, dim)

    @property
    def spherical(self) -> bool:
        return self.kind is Kind.SPHERICAL

    @property
    def ambient_dim(self) -> int:
        return self.dim + 1

    @property
    def scale(self) -> float:
        """``sqrt(|C|)``, the factor converting distances to angles."""
        return float(np.sqrt(abs(self.curvature)))

    @property
    def signature(self) -> np.ndarray:
        """Diagonal of the bilinear form: all ones, or ``(-1, 1, ..., 1)``."""
        sig = np.ones(self.dim + 1)
        if not self.spherical:
            sig[0] = -1.0
        return sig

    def with_dim(self, dim) -> "SpaceForm":
        return SpaceForm(self.kind, self.curvature, dim)

    def origin(self) -> np.ndarray:
        """The pole ``|C|^{-1/2} e_0``."""
        x = np.zeros(self.dim + 1)
        x[0] = 1.0 / self.scale
        return x


def _check_shapes(space, *arrays):
    n = space.dim + 1
    for a in arrays:
        if a.shape[-1] != n:
            raise ValueError(
                f"dimension mismatch: expected {n} coordinates, got {a.shape[-1]}"
            )


def metric(space: SpaceForm, u, v) -> np.ndarray:
    """Dot product on the sphere, Lorentzian product on the hyperboloid."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    _check_shapes(space, u, v)
    return np.sum(u * space.signature * v, axis=-1)


def norm(space: SpaceForm, v) -> np.ndarray:
    """Riemannian norm of tangent vectors.

    Tangent vectors of the hyperboloid are spacelike; tiny negative
    self-products from rounding are clamped to zero.
    """
    sq = metric(space, v, v)
    if not space.spherical:
        sq = np.where(sq < 0, np.where(sq >= -1e-10, 0.0, sq), sq)
    return np.sqrt(np.maximum(sq, 0.0))


def distance(space: SpaceForm, x, y) -> np.ndarray:
    """Geodesic distance.

    Evaluated from the chord ``x - y`` rather than through ``acos``/``acosh``
    of the inner product, which loses half the digits near zero distance.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    _check_shapes(space, x, y)
    s = space.scale
    diff = x - y
    if space.spherical:
        chord = np.linalg.norm(diff, axis=-1)
        other = np.linalg.norm(x + y, axis=-1)
        return 2.0 * np.arctan2(chord, other) / s
    sq = np.maximum(metric(space, diff, diff), 0.0)
    return 2.0 * np.arcsinh(0.5 * s * np.sqrt(sq)) / s


def tangent_project(space: SpaceForm, p, w) -> np.ndarray:
    """Component of ``w`` orthogonal to ``p`` under the manifold's form.

    The same expression ``w - C g(w, p) p`` serves both geometries because
    ``g(p, p) = 1/C`` in each.
    """
    p = np.asarray(p, dtype=float)
    w = np.asarray(w, dtype=float)
    c = space.curvature
    return w - c * metric(space, w, p)[..., None] * p


def normalize(space: SpaceForm, x) -> np.ndarray:
    """Rescale ambient vectors onto the manifold.

    Hyperbolic inputs must be timelike; the sign is flipped so ``x_0 > 0``.
    """
    x = np.asarray(x, dtype=float)
    sq = metric(space, x, x)
    if space.spherical:
        return x / np.sqrt(space.curvature * sq)[..., None]
    if np.any(sq >= 0):
        raise InvalidPoint("cannot normalize a non-timelike vector onto H^D")
    out = x / np.sqrt(space.curvature * sq)[..., None]
    return np.where(out[..., :1] < 0, -out, out)


def _sinc(t, hyperbolic):
    small = np.abs(t) < 1e-8
    safe = np.where(small, 1.0, t)
    if hyperbolic:
        val = np.sinh(safe) / safe
        approx = 1.0 + t * t / 6.0
    else:
        val = np.sin(safe) / safe
        approx = 1.0 - t * t / 6.0
    return np.where(small, approx, val)


def exp_map(space: SpaceForm, p, v) -> np.ndarray:
    """Exponential map at ``p``; the result is renormalized onto the manifold."""
    p = np.asarray(p, dtype=float)
    v = np.asarray(v, dtype=float)
    _check_shapes(space, p, v)
    t = space.scale * norm(space, v)
    hyp = not space.spherical
    head = np.cosh(t) if hyp else np.cos(t)
    x = head[..., None] * p + _sinc(t, hyp)[..., None] * v
    if hyp:
        # far from the origin [x, x] is lost to cancellation, so rescaling by
        # it can fail; solving for the time coordinate always lands on H^D
        x = x.copy()
        x[..., 0] = np.sqrt(np.sum(x[..., 1:] ** 2, axis=-1) - 1.0 / space.curvature)
        return x
    return normalize(space, x)


def log_map(space: SpaceForm, p, x) -> np.ndarray:
    """Logarithmic map at ``p``: the initial velocity of the geodesic to ``x``.

    Raises :class:`AntipodalPoint` on the sphere when ``x = -p``.
    """
    p = np.asarray(p, dtype=float)
    x = np.asarray(x, dtype=float)
    _check_shapes(space, p, x)
    theta = space.scale * distance(space, p, x)
    u = tangent_project(space, p, x)
    if space.spherical:
        if np.any(np.pi - theta < 1e-7):
            raise AntipodalPoint("logarithm at an antipodal point is not unique")
        ratio = 1.0 / _sinc(theta, False)
    else:
        ratio = 1.0 / _sinc(theta, True)
    return ratio[..., None] * u


def check_points(space: SpaceForm, x, tol: float = EPS_NORM) -> np.ndarray:
    """Validate points and return them as a float array.

    The constraint residual is measured relative to ``1/|C|``.  Raises
    :class:`InvalidPoint` naming the first offending row.
    """
    x = np.asarray(x, dtype=float)
    _check_shapes(space, x)
    flat = x.reshape(-1, x.shape[-1])
    target = 1.0 / space.curvature
    resid = np.abs(metric(space, flat, flat) - target) * abs(space.curvature)
    bad = ~np.isfinite(resid) | (resid > tol)
    if not space.spherical:
        # magnitude of the constraint grows like x_0^2, so scale the tolerance
        scale = np.maximum(1.0, flat[:, 0] ** 2 * abs(space.curvature))
        bad = ~np.isfinite(resid) | (resid > tol * scale) | (flat[:, 0] <= 0)
    if np.any(bad):
        row = int(np.argmax(bad))
        what = "x_0 <= 0" if (not space.spherical and flat[row, 0] <= 0) else "norm"
        raise InvalidPoint(
            f"row {row} is not on the {space.kind.value} manifold "
            f"({what}; constraint residual {resid[row]:.3g})",
            row=row,
            residual=float(resid[row]),
        )
    return x


def is_point(space: SpaceForm, x, tol: float = EPS_NORM) -> bool:
    try:
        check_points(space, x, tol)
    except InvalidPoint:
        return False
    return True
