"""Heat diffusion, spectral smoothing and skeletonization on graphs."""

from .errors import (
    ConvergenceError,
    DisconnectedGraphError,
    DivergenceError,
    GraphHeatError,
    NumericalError,
    ValidationError,
)
from .graph import (
    Connectivity,
    Graph,
    VoxelMask,
    connected_components,
    from_edge_list,
    from_voxel_mask,
    geodesic_distances,
)
from .heat import HeatKernel, build_kernel, iterate_kernel, smooth, smoothed_covariance
from .laplacian import LaplacianMatrix, build_laplacian, dirichlet_energy, shift_regularize
from .numkernel import SparseSymMatrix, SpectralBasis, eig_dense_sym, eig_partial_sym, matvec, pinv, svd
from .spectral import (
    courant_check,
    fiedler_vector,
    fourier_coefficients,
    is_tight,
    laplacian_basis,
    sign_domains,
)

__version__ = "0.1.0"

__all__ = [
    "Connectivity",
    "ConvergenceError",
    "DisconnectedGraphError",
    "DivergenceError",
    "Graph",
    "GraphHeatError",
    "HeatKernel",
    "LaplacianMatrix",
    "NumericalError",
    "SparseSymMatrix",
    "SpectralBasis",
    "ValidationError",
    "VoxelMask",
    "build_kernel",
    "build_laplacian",
    "connected_components",
    "courant_check",
    "dirichlet_energy",
    "eig_dense_sym",
    "eig_partial_sym",
    "fiedler_vector",
    "fourier_coefficients",
    "from_edge_list",
    "from_voxel_mask",
    "geodesic_distances",
    "is_tight",
    "iterate_kernel",
    "laplacian_basis",
    "matvec",
    "pinv",
    "shift_regularize",
    "sign_domains",
    "smooth",
    "smoothed_covariance",
    "svd",
]
