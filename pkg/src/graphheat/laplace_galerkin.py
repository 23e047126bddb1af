"""Steady-state diffusion (graph Laplace equation) by least squares over an eigenbasis.

The potential is expanded as ``f = sum_{j<=k} c_j psi_j``. Sampled interior
nodes contribute rows ``sum_j c_j lambda_j psi_j(p) = 0``; nodes of the two
boundary sets contribute ``sum_j c_j psi_j(p) = +1`` or ``-1``. Rows are
stacked interior first, then the ``+1`` set, then the ``-1`` set, and the
system is solved in the least-squares sense.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csgraph

from .errors import ValidationError
from .graph import Graph, n_components
from .numkernel import SpectralBasis, pinv

MAX_INTERIOR = 5000


@dataclass(frozen=True)
class BoundarySpec:
    g_plus: tuple[int, ...]
    g_minus: tuple[int, ...]

    def __post_init__(self):
        plus = tuple(sorted({int(i) for i in self.g_plus}))
        minus = tuple(sorted({int(i) for i in self.g_minus}))
        if not plus or not minus:
            raise ValidationError("both boundary sets must be nonempty")
        if set(plus) & set(minus):
            raise ValidationError(f"boundary sets overlap at {sorted(set(plus) & set(minus))}")
        object.__setattr__(self, "g_plus", plus)
        object.__setattr__(self, "g_minus", minus)

    def validate(self, n_nodes: int) -> None:
        nodes = self.g_plus + self.g_minus
        if min(nodes) < 0 or max(nodes) >= n_nodes:
            raise ValidationError(f"boundary node outside 0..{n_nodes - 1}")
        if len(nodes) >= n_nodes:
            raise ValidationError("boundary sets must leave at least one interior node")


@dataclass(frozen=True)
class GalerkinSystem:
    matrix: np.ndarray
    rhs: np.ndarray
    basis: SpectralBasis
    interior: np.ndarray
    boundary: BoundarySpec
    metadata: dict = field(default_factory=dict)

    @property
    def k(self) -> int:
        return self.matrix.shape[1]


@dataclass(frozen=True)
class GalerkinSolution:
    values: np.ndarray
    coefficients: np.ndarray
    interior_residual: float  # max |sum_j c_j lambda_j psi_j(p)| over sampled interior rows
    boundary_error: float  # max deviation from +-1 on the boundary sets
    lstsq_residual: float


def assemble(
    basis: SpectralBasis,
    b: BoundarySpec,
    interior_sample=None,
    k: int | None = None,
    boundary_weight: float = 1.0,
    seed: int = 0,
) -> GalerkinSystem:
    """Stack interior and boundary equations for the first ``k`` eigenpairs.

    ``interior_sample=None`` takes every interior node, or a seeded uniform
    subset of ``MAX_INTERIOR`` nodes on larger graphs. ``boundary_weight``
    scales the boundary rows (and their right-hand side).
    """
    n = basis.n_nodes
    b.validate(n)
    k = basis.k if k is None else int(k)
    if not 1 <= k <= basis.k:
        raise ValidationError(f"k={k} outside 1..{basis.k} (basis size)")
    boundary = set(b.g_plus) | set(b.g_minus)
    all_interior = np.array([i for i in range(n) if i not in boundary], dtype=np.int64)
    metadata = {"interior_sampling": "given"}
    if interior_sample is None:
        if all_interior.size <= MAX_INTERIOR:
            interior = all_interior
            metadata = {"interior_sampling": "all"}
        else:
            rng = np.random.default_rng(seed)
            interior = np.sort(rng.choice(all_interior, MAX_INTERIOR, replace=False))
            metadata = {"interior_sampling": "uniform", "seed": seed, "size": MAX_INTERIOR}
    else:
        interior = np.array(sorted({int(i) for i in interior_sample}), dtype=np.int64)
        if interior.size and (interior.min() < 0 or interior.max() >= n):
            raise ValidationError("interior sample has out-of-range nodes")
        if boundary & set(interior.tolist()):
            raise ValidationError("interior sample overlaps the boundary sets")
    plus = np.array(b.g_plus, dtype=np.int64)
    minus = np.array(b.g_minus, dtype=np.int64)
    rows = interior.size + plus.size + minus.size
    if rows < k:
        raise ValidationError(f"{rows} equations cannot determine {k} coefficients")
    psi = basis.eigenvectors[:, :k]
    lam = basis.eigenvalues[:k]
    matrix = np.vstack([
        psi[interior] * lam,
        boundary_weight * psi[plus],
        boundary_weight * psi[minus],
    ])
    rhs = np.r_[np.zeros(interior.size), np.full(plus.size, boundary_weight), np.full(minus.size, -boundary_weight)]
    metadata["boundary_weight"] = boundary_weight
    return GalerkinSystem(matrix, rhs, basis.truncate(k), interior, b, metadata)


def solve(sys: GalerkinSystem) -> GalerkinSolution:
    """Least-squares coefficients via the pseudoinverse, evaluated at every node."""
    c = pinv(sys.matrix) @ sys.rhs
    f = sys.basis.eigenvectors @ c
    n_int = sys.interior.size
    interior_res = float(np.max(np.abs(sys.matrix[:n_int] @ c))) if n_int else 0.0
    plus = np.asarray(sys.boundary.g_plus)
    minus = np.asarray(sys.boundary.g_minus)
    bd_err = float(max(np.max(np.abs(f[plus] - 1)), np.max(np.abs(f[minus] + 1))))
    return GalerkinSolution(
        values=f,
        coefficients=c,
        interior_residual=interior_res,
        boundary_error=bd_err,
        lstsq_residual=float(np.linalg.norm(sys.matrix @ c - sys.rhs)),
    )


def field_gradient(g: Graph, f) -> list[tuple[int, int, float]]:
    """Edge field ``-(f_j - f_i) w_ij`` for each edge ``i < j``.

    Positive values mean the potential drops from ``i`` to ``j``; following
    the largest positive value from node to node traces a steepest path.
    """
    f = np.asarray(f, dtype=np.float64)
    if f.shape != (g.n_nodes,):
        raise ValidationError(f"signal of shape {f.shape} does not match {g.n_nodes} nodes")
    return [(i, j, -(f[j] - f[i]) * w) for i, j, w in g.edges()]


def default_boundary(g: Graph) -> BoundarySpec:
    """The two ends of a long path in the minimum spanning tree.

    A double sweep (farthest node from node 0, then farthest node from that)
    on the tree; exact for the tree diameter, a heuristic for the graph.
    """
    if g.n_nodes < 3:
        raise ValidationError("need at least 3 nodes to place two boundary nodes and an interior")
    if n_components(g) != 1:
        raise ValidationError("default boundary needs a connected graph")
    tree = csgraph.minimum_spanning_tree(g.adjacency.csr)
    d0 = csgraph.shortest_path(tree, directed=False, indices=0)
    a = int(np.argmax(d0))
    da = csgraph.shortest_path(tree, directed=False, indices=a)
    b = int(np.argmax(da))
    return BoundarySpec((a,), (b,))
