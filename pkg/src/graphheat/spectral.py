"""Laplacian eigenbases, graph Fourier coefficients and Fiedler-vector analysis.

Eigenpairs are numbered from 1 in the public functions that take an index
(``courant_check``), matching ``0 = lambda_1 <= lambda_2 <= ...``; the arrays
inside :class:`SpectralBasis` are ordinary 0-based numpy columns.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DisconnectedGraphError, ValidationError
from .graph import Graph, induced_components
from .laplacian import LaplacianMatrix, build_laplacian
from .numkernel import DENSE_THRESHOLD, SpectralBasis, eig_dense_sym, eig_partial_sym

__all__ = [
    "SpectralBasis",
    "FiedlerVector",
    "SignDomains",
    "laplacian_basis",
    "zero_multiplicity",
    "fourier_coefficients",
    "reconstruct",
    "fiedler_vector",
    "sign_domains",
    "is_tight",
    "default_thresholds",
    "courant_check",
]

ZERO_EIG_TOL = 1e-8
CONNECTED_TOL = 1e-10
DEGENERATE_GAP = 1e-8


def laplacian_basis(
    source: Graph | LaplacianMatrix,
    k: int | None = None,
    dense_threshold: int = DENSE_THRESHOLD,
) -> SpectralBasis:
    """Smallest ``k`` eigenpairs of a graph Laplacian (all of them if ``k`` is None).

    Matrices up to ``dense_threshold`` go through the dense solver and are
    truncated afterwards; larger ones use the Lanczos solver, which cannot
    return more than ``n - 1`` pairs.
    """
    lap = build_laplacian(source) if isinstance(source, Graph) else source
    n = lap.dim
    if k is not None and k < 1:
        raise ValidationError(f"k must be positive, got {k}")
    if n <= dense_threshold:
        basis = eig_dense_sym(lap.l, threshold=dense_threshold)
        return basis if k is None or k >= n else basis.truncate(k)
    if k is None:
        raise ValidationError(
            f"{n} nodes exceeds the dense threshold; pass the number of eigenpairs"
        )
    return eig_partial_sym(lap.l, min(k, n - 1))


def zero_multiplicity(basis: SpectralBasis, tol: float = ZERO_EIG_TOL) -> int:
    """Number of eigenvalues at most ``tol`` (connected components, if complete)."""
    return int(np.sum(basis.eigenvalues <= tol))


def _check_signal(basis: SpectralBasis, f) -> np.ndarray:
    f = np.asarray(f, dtype=np.float64)
    if f.ndim not in (1, 2) or f.shape[0] != basis.n_nodes:
        raise ValidationError(f"signal of shape {f.shape} does not match {basis.n_nodes} nodes")
    return f


def fourier_coefficients(basis: SpectralBasis, f) -> np.ndarray:
    """``psi_j^T f`` for every basis vector. ``f`` may hold signals as columns."""
    return basis.eigenvectors.T @ _check_signal(basis, f)


def reconstruct(basis: SpectralBasis, coefficients) -> np.ndarray:
    c = np.asarray(coefficients, dtype=np.float64)
    if c.shape[0] != basis.k:
        raise ValidationError(f"{c.shape[0]} coefficients for a {basis.k}-term basis")
    return basis.eigenvectors @ c


@dataclass(frozen=True)
class FiedlerVector:
    values: np.ndarray
    eigenvalue: float
    degenerate: bool  # lambda_3 - lambda_2 <= 1e-8: only the eigenspace is meaningful

    def endpoints(self) -> frozenset[int]:
        """``{argmax, argmin}``; unaffected by the sign ambiguity."""
        return frozenset((int(np.argmax(self.values)), int(np.argmin(self.values))))


def fiedler_vector(basis: SpectralBasis) -> FiedlerVector:
    """Second Laplacian eigenvector, the unit-norm minimiser of the Dirichlet energy.

    Raises
    ------
    DisconnectedGraphError
        When ``lambda_2 <= 1e-10``; the error carries the number of (near)
        zero eigenvalues found in the basis.
    """
    if basis.k < 2:
        raise ValidationError("the Fiedler vector needs at least two eigenpairs")
    lam = basis.eigenvalues
    if lam[1] <= CONNECTED_TOL:
        raise DisconnectedGraphError(max(2, zero_multiplicity(basis)))
    degenerate = basis.k >= 3 and lam[2] - lam[1] <= DEGENERATE_GAP
    return FiedlerVector(basis.eigenvectors[:, 1].copy(), float(lam[1]), bool(degenerate))


@dataclass(frozen=True)
class SignDomains:
    threshold: float
    positive_components: list[np.ndarray]
    negative_components: list[np.ndarray]
    weak: bool

    @property
    def count(self) -> int:
        return len(self.positive_components) + len(self.negative_components)


def sign_domains(f, g: Graph, s: float = 0.0, weak: bool = False) -> SignDomains:
    """Components of the subgraphs induced by ``f > s`` and ``f < s``.

    With ``weak=True`` the comparisons are ``>=`` and ``<=``. In strict mode a
    node with ``f_i == s`` belongs to neither side.
    """
    f = np.asarray(f, dtype=np.float64)
    if f.shape != (g.n_nodes,):
        raise ValidationError(f"signal of shape {f.shape} does not match {g.n_nodes} nodes")
    if weak:
        pos, neg = np.flatnonzero(f >= s), np.flatnonzero(f <= s)
    else:
        pos, neg = np.flatnonzero(f > s), np.flatnonzero(f < s)
    return SignDomains(float(s), induced_components(g, pos), induced_components(g, neg), weak)


def default_thresholds(f) -> np.ndarray:
    """Distinct values of ``f`` and the midpoints between consecutive ones."""
    v = np.unique(np.asarray(f, dtype=np.float64))
    return np.sort(np.r_[v, (v[:-1] + v[1:]) / 2])


def is_tight(f, g: Graph, thresholds=None) -> bool:
    """True if every super- and sub-level induced subgraph is connected or empty."""
    ts = default_thresholds(f) if thresholds is None else np.asarray(thresholds, dtype=np.float64)
    if ts.size == 0:
        raise ValidationError("need at least one threshold")
    for s in ts:
        dom = sign_domains(f, g, float(s))
        if len(dom.positive_components) > 1 or len(dom.negative_components) > 1:
            return False
    return True


def courant_check(basis: SpectralBasis, g: Graph, i: int, zero_tol: float = 1e-10) -> bool:
    """Does the ``i``-th eigenvector (1-based) have at most ``i`` strict sign domains?

    Entries with ``|psi| <= zero_tol * max|psi|`` count as exact zeros so that
    rounding noise on a nodal vertex does not create spurious domains.
    """
    if not 1 <= i <= basis.k:
        raise ValidationError(f"eigenvector index {i} outside 1..{basis.k}")
    psi = basis.eigenvectors[:, i - 1].copy()
    psi[np.abs(psi) <= zero_tol * np.max(np.abs(psi))] = 0.0
    return sign_domains(psi, g, 0.0).count <= i
