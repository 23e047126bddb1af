"""Graph Laplacian ``L = D - W`` and the Dirichlet energy.

Only the positive semidefinite sign convention is produced: off-diagonal
entries are ``-w_ij`` and the diagonal carries the weighted degree. Code
that expects ``W - D`` must negate eigenvalues itself.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import ValidationError
from .graph import Graph
from .numkernel import SparseSymMatrix


@dataclass(frozen=True)
class LaplacianMatrix:
    l: SparseSymMatrix
    convention: str = "D-W"

    @property
    def dim(self) -> int:
        return self.l.dim

    def toarray(self) -> np.ndarray:
        return self.l.toarray()


def build_laplacian(g: Graph) -> LaplacianMatrix:
    w = g.adjacency.csr
    d = np.asarray(w.sum(axis=1)).ravel()
    return LaplacianMatrix(SparseSymMatrix(sp.diags(d, format="csr") - w))


def incidence_matrix(g: Graph) -> sp.csr_matrix:
    """Weighted oriented incidence ``B`` (edges x nodes) with ``B^T B = L``.

    Row ``e`` for edge ``(i, j, w)``, ``i < j``, has ``+sqrt(w)`` at ``i`` and
    ``-sqrt(w)`` at ``j``.
    """
    edges = g.edges()
    m = len(edges)
    if m == 0:
        return sp.csr_matrix((0, g.n_nodes))
    i = np.array([e[0] for e in edges])
    j = np.array([e[1] for e in edges])
    s = np.sqrt(np.array([e[2] for e in edges]))
    rows = np.r_[np.arange(m), np.arange(m)]
    return sp.csr_matrix((np.r_[s, -s], (rows, np.r_[i, j])), shape=(m, g.n_nodes))


def dirichlet_energy(l: LaplacianMatrix, f) -> float:
    """``f^T L f``, i.e. the sum over edges of ``w_ij (f_i - f_j)^2``."""
    f = np.asarray(f, dtype=np.float64)
    if f.shape != (l.dim,):
        raise ValidationError(f"signal of shape {f.shape} does not match {l.dim} nodes")
    return float(f @ (l.l.csr @ f))


def dirichlet_energy_edges(g: Graph, f) -> float:
    """Same energy, summed edge by edge."""
    f = np.asarray(f, dtype=np.float64)
    if f.shape != (g.n_nodes,):
        raise ValidationError(f"signal of shape {f.shape} does not match {g.n_nodes} nodes")
    return float(sum(w * (f[i] - f[j]) ** 2 for i, j, w in g.edges()))


def shift_regularize(l: LaplacianMatrix, alpha: float) -> SparseSymMatrix:
    """``L + alpha I``, positive definite for any ``alpha > 0``."""
    if not alpha > 0:
        raise ValidationError(f"alpha must be positive, got {alpha}")
    return SparseSymMatrix(l.l.csr + alpha * sp.identity(l.dim, format="csr"))
