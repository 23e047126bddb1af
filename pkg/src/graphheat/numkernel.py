"""Numerical primitives: sparse symmetric storage, SVD, pseudoinverse, eigensolvers.

Everything else in the package is written against these few functions so the
linear algebra backends (LAPACK through numpy, ARPACK through scipy) sit in
one place.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import ConvergenceError, ValidationError

DENSE_THRESHOLD = 4096
SIGN_EPS = 1e-12


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


class SparseSymMatrix:
    """Immutable structurally symmetric matrix in CSR layout.

    Construct with :meth:`from_entries` (symmetric completion of a triplet
    list), :meth:`from_dense` or :meth:`from_scipy`. Explicit zeros are
    dropped and column indices are sorted, which fixes the per-row summation
    order used by :func:`matvec`.
    """

    __slots__ = ("_csr",)

    def __init__(self, csr: sp.csr_matrix):
        csr = sp.csr_matrix(csr, dtype=np.float64, copy=True)
        if csr.shape[0] != csr.shape[1]:
            raise ValidationError(f"matrix must be square, got {csr.shape}")
        if csr.shape[0] < 1:
            raise ValidationError("matrix dimension must be positive")
        csr.sum_duplicates()
        csr.eliminate_zeros()
        csr.sort_indices()
        if not np.all(np.isfinite(csr.data)):
            raise ValidationError("matrix has non-finite entries")
        if (csr != csr.T).nnz:
            raise ValidationError("matrix is not symmetric")
        for arr in (csr.data, csr.indices, csr.indptr):
            _readonly(arr)
        self._csr = csr

    @classmethod
    def from_entries(cls, dim: int, entries: Iterable[tuple[int, int, float]]) -> "SparseSymMatrix":
        """Build from ``(row, col, value)`` triplets, mirroring each off-diagonal.

        A pair may be given once or in both orientations; giving the two
        orientations with different values is an error.
        """
        if dim < 1:
            raise ValidationError("dim must be positive")
        seen: dict[tuple[int, int], float] = {}
        for i, j, v in entries:
            i, j, v = int(i), int(j), float(v)
            if not (0 <= i < dim and 0 <= j < dim):
                raise ValidationError(f"entry ({i}, {j}) out of range for dim {dim}")
            key = (min(i, j), max(i, j))
            if key in seen and seen[key] != v:
                raise ValidationError(f"asymmetric values for entry {key}")
            seen[key] = v
        rows, cols, vals = [], [], []
        for (i, j), v in seen.items():
            rows.append(i)
            cols.append(j)
            vals.append(v)
            if i != j:
                rows.append(j)
                cols.append(i)
                vals.append(v)
        csr = sp.csr_matrix((vals, (rows, cols)), shape=(dim, dim))
        return cls(csr)

    @classmethod
    def from_dense(cls, a) -> "SparseSymMatrix":
        return cls(sp.csr_matrix(np.asarray(a, dtype=np.float64)))

    @classmethod
    def from_scipy(cls, m) -> "SparseSymMatrix":
        return cls(sp.csr_matrix(m))

    @classmethod
    def identity(cls, dim: int) -> "SparseSymMatrix":
        return cls(sp.identity(dim, format="csr"))

    @classmethod
    def zeros(cls, dim: int) -> "SparseSymMatrix":
        return cls(sp.csr_matrix((dim, dim)))

    @property
    def dim(self) -> int:
        return self._csr.shape[0]

    @property
    def nnz(self) -> int:
        return self._csr.nnz

    @property
    def csr(self) -> sp.csr_matrix:
        """The underlying scipy matrix (its buffers are read-only)."""
        return self._csr

    def toarray(self) -> np.ndarray:
        return self._csr.toarray()

    def entries(self) -> list[tuple[int, int, float]]:
        """All stored entries, row-major, both triangles."""
        coo = self._csr.tocoo()
        return [(int(i), int(j), float(v)) for i, j, v in zip(coo.row, coo.col, coo.data)]

    def __add__(self, other: "SparseSymMatrix") -> "SparseSymMatrix":
        return SparseSymMatrix(self._csr + other._csr)

    def __eq__(self, other):
        if not isinstance(other, SparseSymMatrix):
            return NotImplemented
        return self.dim == other.dim and (self._csr != other._csr).nnz == 0

    def __repr__(self):
        return f"SparseSymMatrix(dim={self.dim}, nnz={self.nnz})"


@dataclass(frozen=True)
class SvdResult:
    """Thin SVD ``x = u @ diag(d) @ vt`` with ``d`` nonincreasing."""

    u: np.ndarray
    d: np.ndarray
    vt: np.ndarray


@dataclass(frozen=True)
class SpectralBasis:
    """The ``k`` smallest eigenpairs of a symmetric matrix.

    ``eigenvectors[:, j]`` pairs with ``eigenvalues[j]``. Index 0 here is the
    first (smallest) eigenpair.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.eigenvalues, dtype=np.float64)
        vecs = np.asarray(self.eigenvectors, dtype=np.float64)
        if vecs.ndim != 2 or vals.ndim != 1 or vecs.shape[1] != vals.shape[0]:
            raise ValidationError(
                f"eigenvector block {vecs.shape} does not match {vals.shape} eigenvalues"
            )
        object.__setattr__(self, "eigenvalues", _readonly(vals.copy()))
        object.__setattr__(self, "eigenvectors", _readonly(vecs.copy()))

    @property
    def n_nodes(self) -> int:
        return self.eigenvectors.shape[0]

    @property
    def k(self) -> int:
        return self.eigenvalues.shape[0]

    @property
    def complete(self) -> bool:
        return self.k == self.n_nodes

    def truncate(self, k: int) -> "SpectralBasis":
        if not 1 <= k <= self.k:
            raise ValidationError(f"cannot truncate a {self.k}-term basis to {k}")
        return SpectralBasis(self.eigenvalues[:k], self.eigenvectors[:, :k])

    def orthonormality_error(self) -> float:
        g = self.eigenvectors.T @ self.eigenvectors
        return float(np.max(np.abs(g - np.eye(self.k))))


def _as_csr(m) -> sp.csr_matrix:
    if isinstance(m, SparseSymMatrix):
        return m.csr
    if sp.issparse(m):
        return sp.csr_matrix(m)
    return sp.csr_matrix(np.asarray(m, dtype=np.float64))


def matvec(m: SparseSymMatrix, v) -> np.ndarray:
    """Sparse product ``m @ v``; rows are summed in ascending column order."""
    v = np.asarray(v, dtype=np.float64)
    if v.ndim != 1 or v.shape[0] != m.dim:
        raise ValidationError(f"vector of length {v.shape} does not match dim {m.dim}")
    return m.csr @ v


def svd(x) -> SvdResult:
    """Thin singular value decomposition.

    Raises
    ------
    ConvergenceError
        If LAPACK does not converge.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or min(x.shape) < 1:
        raise ValidationError(f"svd needs a nonempty 2D matrix, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValidationError("svd input has non-finite entries")
    try:
        u, d, vt = np.linalg.svd(x, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError(f"SVD did not converge: {exc}") from exc
    return SvdResult(u=u, d=d, vt=vt)


def pinv(x, rank_tol: float | None = None) -> np.ndarray:
    """Moore-Penrose inverse ``V diag(d^-) U^T``.

    Singular values at or below ``rank_tol * d_max`` are treated as zero and
    their reciprocal replaced by 0. The default relative tolerance is
    ``1e-12 * max(rows, cols)``.
    """
    x = np.asarray(x, dtype=np.float64)
    if rank_tol is None:
        rank_tol = 1e-12 * max(x.shape)
    if rank_tol < 0:
        raise ValidationError("rank_tol must be nonnegative")
    res = svd(x)
    dmax = res.d[0] if res.d.size else 0.0
    keep = res.d > rank_tol * dmax
    dinv = np.zeros_like(res.d)
    dinv[keep] = 1.0 / res.d[keep]
    return (res.vt.T * dinv) @ res.u.T


def numerical_rank(x, rank_tol: float | None = None) -> int:
    x = np.asarray(x, dtype=np.float64)
    if rank_tol is None:
        rank_tol = 1e-12 * max(x.shape)
    d = svd(x).d
    return int(np.sum(d > rank_tol * d[0])) if d.size and d[0] > 0 else 0


def fix_signs(vectors: np.ndarray) -> np.ndarray:
    """Flip columns so the first entry with ``|value| > 1e-12`` is nonnegative."""
    vectors = np.array(vectors, dtype=np.float64, copy=True)
    for j in range(vectors.shape[1]):
        col = vectors[:, j]
        nz = np.flatnonzero(np.abs(col) > SIGN_EPS)
        if nz.size and col[nz[0]] < 0:
            vectors[:, j] = -col
    return vectors


def eig_dense_sym(m, threshold: int = DENSE_THRESHOLD) -> SpectralBasis:
    """Full spectrum of a symmetric matrix via LAPACK ``syevd``."""
    a = _as_csr(m)
    n = a.shape[0]
    if n > threshold:
        raise ValidationError(
            f"dimension {n} exceeds the dense threshold {threshold}; use eig_partial_sym"
        )
    try:
        vals, vecs = np.linalg.eigh(a.toarray())
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError(f"dense eigensolver failed: {exc}") from exc
    return SpectralBasis(vals, fix_signs(vecs))


def _gershgorin_lower(a: sp.csr_matrix) -> float:
    diag = a.diagonal()
    radius = np.asarray(abs(a).sum(axis=1)).ravel() - np.abs(diag)
    return float(np.min(diag - radius))


def residual_norms(m, basis: SpectralBasis) -> np.ndarray:
    """Per-pair ``||A psi - lambda psi||_2``."""
    a = _as_csr(m)
    r = a @ basis.eigenvectors - basis.eigenvectors * basis.eigenvalues
    return np.linalg.norm(r, axis=0)


def eig_partial_sym(
    m,
    k: int,
    tol: float = 1e-8,
    ncv: int | None = None,
    maxiter: int | None = None,
) -> SpectralBasis:
    """The ``k`` smallest eigenpairs by implicitly restarted Lanczos (ARPACK).

    Runs in shift-invert mode about a point just below the Gershgorin bound,
    so the wanted end of the spectrum becomes the dominant one. The start
    vector is fixed, which makes repeated calls return identical output.

    Raises
    ------
    ConvergenceError
        If ARPACK stops early or any pair misses the residual target
        ``tol * max(1, max|lambda|)``; ``.residuals`` holds the per-pair norms.
    """
    a = _as_csr(m)
    n = a.shape[0]
    if not 1 <= k < n:
        raise ValidationError(f"k must satisfy 1 <= k < dim, got k={k}, dim={n}")
    scale = max(1.0, float(np.max(np.abs(a.diagonal()))) if a.nnz else 1.0)
    shift = _gershgorin_lower(a) - 1e-3 * scale
    if ncv is None:
        ncv = min(n, max(2 * k + 1, 20))
    v0 = np.cos(np.arange(1, n + 1, dtype=np.float64)) + 1.5
    try:
        vals, vecs = spla.eigsh(
            a.tocsc(), k=k, sigma=shift, which="LM", v0=v0, ncv=ncv, tol=0.0, maxiter=maxiter
        )
    except spla.ArpackNoConvergence as exc:
        raise ConvergenceError(
            f"ARPACK converged on {len(exc.eigenvalues)} of {k} eigenpairs"
        ) from exc
    order = np.argsort(vals, kind="stable")
    basis = SpectralBasis(vals[order], fix_signs(vecs[:, order]))
    res = residual_norms(a, basis)
    bound = tol * max(1.0, float(np.max(np.abs(basis.eigenvalues))))
    if np.any(res > bound):
        raise ConvergenceError(
            f"eigenpair residuals up to {res.max():.3e} exceed {bound:.3e}", residuals=res
        )
    return basis
