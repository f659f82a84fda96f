"""PCA on spheres and hyperboloids by closed-form eigendecomposition."""

__version__ = "0.1.0"

from .geometry import Kind, SpaceForm  # noqa: E402
from .subspace import AffineSubspace  # noqa: E402
from .sfpca import PcaModel, fit, fit_hyperbolic, fit_spherical  # noqa: E402
from .baseline import PgaConfig, fit_pga  # noqa: E402

__all__ = [
    "Kind",
    "SpaceForm",
    "AffineSubspace",
    "PcaModel",
    "fit",
    "fit_spherical",
    "fit_hyperbolic",
    "PgaConfig",
    "fit_pga",
]
