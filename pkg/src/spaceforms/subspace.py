"""Geodesic (Riemannian affine) subspaces of spheres and hyperboloids.

A subspace is stored as a base point ``p`` and ``K`` tangent vectors
``h_1..h_K`` at ``p`` that are mutually orthogonal under the manifold's form
and scaled to ``g(h_k, h_k) = |C|``.  The subspace is the intersection of the
manifold with the linear span of ``p, h_1, ..., h_K``, so projections and
distances follow from inner products with these ``K + 1`` vectors alone.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import geometry as geo
from .geometry import SpaceForm
from .lorentz import j_orthonormalize

__all__ = [
    "AffineSubspace",
    "NonUniqueProjection",
    "PointNotOnSubspace",
    "project",
    "projection_distance",
    "residual_energy",
    "to_low_dim",
    "from_low_dim",
    "as_sliced_matrix",
    "complement_basis",
]

EPS_DEG = 1e-10


class NonUniqueProjection(geo.GeometryError):
    """The point lies at distance ``pi / (2 sqrt(C))`` from every point of the subspace."""


class PointNotOnSubspace(geo.GeometryError):
    pass


@dataclass(frozen=True, eq=False)
class AffineSubspace:
    """``exp_p(span(h_1..h_K))`` with ``basis`` holding the ``h_k`` as columns."""

    space: SpaceForm
    base: np.ndarray
    basis: np.ndarray

    def __post_init__(self):
        base = np.array(self.base, dtype=float)
        n = self.space.dim + 1
        basis = np.array(self.basis, dtype=float).reshape(n, -1)
        if base.shape != (n,):
            raise ValueError(f"base must have {n} coordinates, got shape {base.shape}")
        if basis.shape[1] > self.space.dim:
            raise ValueError("a subspace of S^D or H^D has dimension at most D")
        base.setflags(write=False)
        basis.setflags(write=False)
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "basis", basis)

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    @classmethod
    def from_vectors(cls, space: SpaceForm, base, vectors=None) -> "AffineSubspace":
        """Build a subspace from an arbitrary spanning set of columns.

        Columns are projected onto the tangent space at ``base`` and
        Gram-Schmidt orthogonalized under the manifold's form.
        """
        base = np.asarray(base, dtype=float)
        n = space.dim + 1
        if vectors is None:
            vectors = np.zeros((n, 0))
        vectors = np.asarray(vectors, dtype=float).reshape(n, -1)
        target = np.sqrt(abs(space.curvature))
        basis = []
        for col in vectors.T:
            w = geo.tangent_project(space, base, col)
            for _ in range(2):
                for h in basis:
                    w = w - geo.metric(space, w, h) / abs(space.curvature) * h
                w = geo.tangent_project(space, base, w)
            size = float(geo.norm(space, w))
            if size < EPS_DEG * max(np.linalg.norm(col), 1e-300):
                raise ValueError("spanning vectors are linearly dependent")
            basis.append(w * (target / size))
        return cls(space, base, np.array(basis).T.reshape(n, len(basis)))

    def with_dim(self, k: int) -> "AffineSubspace":
        """The subspace spanned by the first ``k`` basis vectors."""
        return AffineSubspace(self.space, self.base, self.basis[:, :k])

    def check(self, tol: float = 1e-8) -> None:
        """Raise ``ValueError`` unless tangency and orthogonality hold within ``tol``."""
        geo.check_points(self.space, self.base)
        g = self.space.signature
        c = self.space.curvature
        tang = (self.basis.T * g) @ self.base * abs(c) ** 0.5
        if np.any(np.abs(tang) > tol):
            raise ValueError(f"basis is not tangent at the base (max {np.max(np.abs(tang)):.3g})")
        gram = (self.basis.T * g) @ self.basis
        err = np.abs(gram / abs(c) - np.eye(self.dim))
        if np.any(err > tol):
            raise ValueError(f"basis is not orthogonal/scaled (max error {np.max(err):.3g})")


def _split(sub: AffineSubspace, x):
    """``x = lin + r`` with ``lin`` in span(p, H) and ``r`` orthogonal to it."""
    x = np.asarray(x, dtype=float)
    space = sub.space
    c = space.curvature
    g = space.signature
    xp = (x * g) @ sub.base
    xh = (x * g) @ sub.basis
    lin = (c * xp)[..., None] * sub.base + (xh @ sub.basis.T) / abs(c)
    return lin, x - lin, xp, xh


def _normalize_lin(sub, lin):
    space = sub.space
    if space.spherical:
        size = np.linalg.norm(lin, axis=-1)
        bad = size < EPS_DEG / np.sqrt(space.curvature)
        out = lin / np.where(bad, 1.0, size * np.sqrt(space.curvature))[..., None]
        return out, bad
    return geo.normalize(space, lin), np.zeros(lin.shape[:-1], dtype=bool)


def project(sub: AffineSubspace, x) -> np.ndarray:
    """Geodesic projection onto the subspace.

    On the sphere, a point orthogonal to the whole span has no unique
    projection and :class:`NonUniqueProjection` is raised.
    """
    lin, _, _, _ = _split(sub, x)
    out, bad = _normalize_lin(sub, lin)
    if np.any(bad):
        raise NonUniqueProjection(
            "point is equidistant from the whole subspace; projection is not unique"
        )
    return out


def project_or_base(sub: AffineSubspace, x) -> np.ndarray:
    """Like :func:`project`, but returns the base point where it is not unique.

    Any point of the subspace is a valid nearest point in that case.
    """
    lin, _, _, _ = _split(sub, x)
    out, bad = _normalize_lin(sub, lin)
    return np.where(bad[..., None], sub.base, out)


def projection_distance(sub: AffineSubspace, x) -> np.ndarray:
    """Distance from ``x`` to the nearest point of the subspace."""
    lin, r, _, _ = _split(sub, x)
    space = sub.space
    s = space.scale
    if space.spherical:
        return np.arctan2(np.linalg.norm(r, axis=-1), np.linalg.norm(lin, axis=-1)) / s
    rr = np.maximum(geo.metric(space, r, r), 0.0)
    return np.arcsinh(s * np.sqrt(rr)) / s


def residual_energy(sub: AffineSubspace, x) -> np.ndarray:
    """Energy of ``x`` in the directions normal to the subspace.

    ``sin^2`` (sphere) or ``sinh^2`` (hyperboloid) of ``sqrt|C|`` times the
    projection distance.
    """
    _, r, _, _ = _split(sub, x)
    space = sub.space
    if space.spherical:
        return space.curvature * np.sum(r * r, axis=-1)
    return abs(space.curvature) * np.maximum(geo.metric(space, r, r), 0.0)


def to_low_dim(sub: AffineSubspace, x, auto_project: bool = True, tol: float = 1e-8):
    """Coordinates of ``x`` in ``S^K`` / ``H^K`` through the subspace isometry.

    With ``auto_project`` the point is first projected onto the subspace,
    otherwise points off the subspace raise :class:`PointNotOnSubspace`.
    """
    space = sub.space
    c = space.curvature
    if not auto_project:
        e = residual_energy(sub, x)
        if np.any(e > tol):
            row = int(np.argmax(np.atleast_1d(e > tol)))
            raise PointNotOnSubspace(
                f"point {row} is off the subspace (residual energy {np.max(e):.3g})"
            )
    _, _, xp, xh = _split(sub, x)
    y = np.concatenate([(c * xp)[..., None], xh], axis=-1) / np.sqrt(abs(c))
    if space.spherical:
        size = np.linalg.norm(y, axis=-1)
        if np.any(size < EPS_DEG):
            raise NonUniqueProjection("point is equidistant from the whole subspace")
        return y / (size * np.sqrt(c))[..., None]
    # C [x, p] >= 1 on the upper sheet, so y stays future-pointing
    sig = np.ones(sub.dim + 1)
    sig[0] = -1.0
    return y / np.sqrt(c * np.sum(y * sig * y, axis=-1))[..., None]


def from_low_dim(sub: AffineSubspace, y, tol: float = 1e-6) -> np.ndarray:
    """Inverse isometry: map points of ``S^K`` / ``H^K`` into the subspace."""
    y = np.asarray(y, dtype=float)
    if y.shape[-1] != sub.dim + 1:
        raise ValueError(f"expected {sub.dim + 1} coordinates, got {y.shape[-1]}")
    if sub.dim >= 1:
        geo.check_points(sub.space.with_dim(sub.dim), y, tol)
    x = y @ as_sliced_matrix(sub).T
    return geo.normalize(sub.space, x)


def as_sliced_matrix(sub: AffineSubspace) -> np.ndarray:
    """``G = [sqrt|C| p, h_1 / sqrt|C|, ..., h_K / sqrt|C|]``.

    ``G^T G = I`` on the sphere and ``G^T J_D G = J_K`` on the hyperboloid.
    """
    s = sub.space.scale
    return np.concatenate([s * sub.base[:, None], sub.basis / s], axis=1)


def complement_basis(sub: AffineSubspace) -> np.ndarray:
    """Columns spanning the normal directions ``H^perp`` inside ``T_p``.

    Scaled like the subspace basis, ``g(h', h') = |C|``.
    """
    space = sub.space
    g = space.signature
    span = np.concatenate([sub.base[:, None], sub.basis], axis=1)
    _, sv, vt = np.linalg.svd((span.T * g), full_matrices=True)
    null = vt[span.shape[1]:].T
    if null.shape[1] == 0:
        return null
    if space.spherical:
        q, _ = np.linalg.qr(null)
    else:
        q, _ = j_orthonormalize(null)
    return q * np.sqrt(abs(space.curvature))
