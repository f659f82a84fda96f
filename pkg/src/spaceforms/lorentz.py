"""Linear algebra in Lorentzian space ``R^{1,D}``.

The bilinear form is ``[x, y] = x^T J y`` with ``J = diag(-1, 1, ..., 1)``.
A J-eigenpair of ``A`` solves ``A J v = sgn([v, v]) lam v``; such vectors are
eigenvectors of the ordinary (nonsymmetric) matrix ``A J``, rescaled so that
``|[v, v]| = 1``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "ComplexSpectrum",
    "DegenerateNorm",
    "JEigenDecomposition",
    "lorentz_metric",
    "j_inner",
    "j_adjoint",
    "is_j_unitary",
    "j_orthonormalize",
    "j_eigendecompose",
    "j_reconstruct",
]

EPS_DEG = 1e-10
IMAG_TOL = 1e-8
CLUSTER_TOL = 1e-11
RESID_TOL = 1e-6


class ComplexSpectrum(np.linalg.LinAlgError):
    pass


class DegenerateNorm(np.linalg.LinAlgError):
    """An eigenvector is lightlike, so it cannot be J-normalized."""


def lorentz_metric(n: int) -> np.ndarray:
    """``J`` for vectors with ``n`` coordinates (``n = D + 1``)."""
    j = np.eye(n)
    j[0, 0] = -1.0
    return j


def _signature(n):
    sig = np.ones(n)
    sig[0] = -1.0
    return sig


def j_inner(x, y) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape[-1] != y.shape[-1]:
        raise ValueError(f"dimension mismatch: {x.shape[-1]} vs {y.shape[-1]}")
    return np.sum(x * _signature(x.shape[-1]) * y, axis=-1)


def _square(a):
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    return a


def j_adjoint(a) -> np.ndarray:
    """``J A^T J``."""
    a = _square(a)
    sig = _signature(a.shape[0])
    return sig[:, None] * a.T * sig[None, :]


def is_j_unitary(a, tol: float = 1e-8) -> bool:
    a = _square(a)
    j = lorentz_metric(a.shape[0])
    err = np.linalg.norm(a.T @ j @ a - j)
    return bool(err <= tol * np.linalg.norm(j))


def j_orthonormalize(u, eps: float = EPS_DEG):
    """J-orthonormal basis for the column span of ``u``.

    Returns ``(basis, signs)`` with ``basis.T @ J @ basis = diag(signs)``.
    The columns of ``u`` are first made Euclidean-orthonormal, so the result
    does not depend on how the span was presented up to an orthogonal mixing
    inside each block of equal sign.
    """
    u = np.asarray(u, dtype=float)
    q, _ = np.linalg.qr(u)
    sig = _signature(u.shape[0])
    gram = q.T @ (sig[:, None] * q)
    g, rot = np.linalg.eigh((gram + gram.T) / 2)
    if np.min(np.abs(g)) < eps:
        raise DegenerateNorm("span contains a lightlike direction")
    basis = (q @ rot) / np.sqrt(np.abs(g))
    return basis, np.sign(g)


def _fix_sign(v):
    """Flip so the first entry that is not negligible is positive."""
    big = np.abs(v) > 1e-12 * np.max(np.abs(v))
    return -v if v[np.argmax(big)] < 0 else v


@dataclass(frozen=True)
class JEigenDecomposition:
    """J-eigenvalues, J-normalized eigenvectors (columns) and their norm signs.

    ``degenerate`` is set when the solver found repeated eigenvalues and the
    corresponding block was re-orthonormalized.
    """

    eigenvalues: np.ndarray
    vectors: np.ndarray
    signs: np.ndarray
    degenerate: bool = False


def j_eigendecompose(a) -> JEigenDecomposition:
    """J-diagonalize a real symmetric matrix through the eigenvectors of ``A J``.

    Columns come out as the negative-norm vectors first, then positive-norm
    vectors by descending J-eigenvalue.  Eigenvalues are reported as the
    Rayleigh values ``v^T J A J v``, which for a positive semidefinite ``A``
    are nonnegative.
    """
    a = _square(a)
    n = a.shape[0]
    scale = np.linalg.norm(a, 2)
    if np.linalg.norm(a - a.T) > 1e-12 * max(scale, 1e-300):
        raise ValueError("matrix is not symmetric")
    sig = _signature(n)
    mu, w = np.linalg.eig(a * sig[None, :])

    bad = np.abs(mu.imag) > IMAG_TOL * np.maximum(1.0, np.abs(mu.real))
    if np.any(bad):
        raise ComplexSpectrum(
            f"A J has non-real eigenvalue {mu[np.argmax(bad)]}"
        )

    order = np.argsort(mu.real, kind="stable")
    mu_sorted = mu.real[order]
    tol = CLUSTER_TOL * max(np.max(np.abs(mu_sorted)), 1e-300)
    clusters = []
    start = 0
    for i in range(1, n + 1):
        if i == n or mu_sorted[i] - mu_sorted[i - 1] > tol:
            clusters.append(order[start:i])
            start = i

    vectors, signs = [], []
    degenerate = False
    for idx in clusters:
        if len(idx) == 1:
            v = w[:, idx[0]].real
            nrm = j_inner(v, v)
            if abs(nrm) < EPS_DEG * float(v @ v):
                raise DegenerateNorm(
                    f"eigenvector for eigenvalue {mu[idx[0]].real:.6g} is lightlike"
                )
            vectors.append(v / np.sqrt(abs(nrm)))
            signs.append(np.sign(nrm))
            continue
        degenerate = True
        # conjugate pairs with tiny imaginary parts span a real invariant subspace
        block = np.concatenate([w[:, idx].real, w[:, idx].imag], axis=1)
        left, sv, _ = np.linalg.svd(block, full_matrices=False)
        basis, sgn = j_orthonormalize(left[:, : len(idx)])
        vectors.extend(basis.T)
        signs.extend(sgn)

    vecs = np.array([_fix_sign(v) for v in vectors]).T
    signs = np.array(signs)
    jv = sig[:, None] * vecs
    lam = np.einsum("ij,ij->j", jv, a @ jv)

    # a defective A J (Jordan block) still yields a basis above; catch it here
    resid = np.linalg.norm(a @ jv - vecs * (signs * lam))
    if resid > RESID_TOL * max(scale, 1e-300) * max(1.0, np.linalg.norm(vecs) ** 2):
        raise DegenerateNorm(
            f"A J is not diagonalizable with J-normalizable eigenvectors (residual {resid:.3g})"
        )

    # negative vectors first, then descending eigenvalue, ties lexicographic
    keys = sorted(
        range(n),
        key=lambda d: (signs[d] > 0, -lam[d], tuple(-vecs[:, d])),
    )
    if degenerate:
        keys = _tie_break(keys, lam, vecs, signs)
    keys = np.array(keys)
    return JEigenDecomposition(
        eigenvalues=lam[keys],
        vectors=vecs[:, keys],
        signs=signs[keys],
        degenerate=degenerate,
    )


def _tie_break(keys, lam, vecs, signs):
    """Order vectors whose eigenvalues agree to clustering accuracy lexicographically."""
    out = []
    i = 0
    tol = CLUSTER_TOL * max(np.max(np.abs(lam)), 1e-300)
    while i < len(keys):
        j = i + 1
        while (
            j < len(keys)
            and signs[keys[j]] == signs[keys[i]]
            and abs(lam[keys[j]] - lam[keys[i]]) <= tol
        ):
            j += 1
        group = sorted(keys[i:j], key=lambda d: tuple(-vecs[:, d]))
        out.extend(group)
        i = j
    return out


def j_reconstruct(dec: JEigenDecomposition) -> np.ndarray:
    """``V diag(lam) V^T``."""
    v = dec.vectors
    return (v * dec.eigenvalues) @ v.T
