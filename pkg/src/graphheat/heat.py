"""Discrete heat kernel ``K_sigma = sum_j exp(-lambda_j sigma) psi_j psi_j^T`` and smoothing.

Smoothing is evaluated in spectral form, ``sum_j exp(-lambda_j sigma) f~_j psi_j``,
so the ``p x p`` kernel is only formed when :meth:`HeatKernel.matrix` is
called. With a truncated basis the same formula gives the truncated
expansion; the doubly-stochastic and contraction properties only hold for a
complete basis.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .numkernel import SpectralBasis


@dataclass(frozen=True)
class HeatKernel:
    basis: SpectralBasis
    sigma: float

    def __post_init__(self):
        sigma = float(self.sigma)
        if not (sigma >= 0 and np.isfinite(sigma)):
            raise ValidationError(f"bandwidth must be finite and nonnegative, got {self.sigma}")
        object.__setattr__(self, "sigma", sigma)

    @property
    def truncated(self) -> bool:
        return not self.basis.complete

    @property
    def n_nodes(self) -> int:
        return self.basis.n_nodes

    def weights(self) -> np.ndarray:
        """Spectral filter ``exp(-lambda_j sigma)``."""
        # clip tiny negative eigenvalues from roundoff so weights never exceed 1
        lam = np.maximum(self.basis.eigenvalues, 0.0)
        return np.exp(-lam * self.sigma)

    def matrix(self) -> np.ndarray:
        psi = self.basis.eigenvectors
        return (psi * self.weights()) @ psi.T


def build_kernel(basis: SpectralBasis, sigma: float) -> HeatKernel:
    return HeatKernel(basis, sigma)


def smooth(kernel: HeatKernel, f) -> np.ndarray:
    """Heat kernel smoothing ``K_sigma f``; ``f`` may hold several signals as columns."""
    f = np.asarray(f, dtype=np.float64)
    if f.ndim not in (1, 2) or f.shape[0] != kernel.n_nodes:
        raise ValidationError(f"signal of shape {f.shape} does not match {kernel.n_nodes} nodes")
    psi = kernel.basis.eigenvectors
    coeff = psi.T @ f
    w = kernel.weights()
    return psi @ (coeff * (w if f.ndim == 1 else w[:, None]))


def smoothed_covariance(kernel: HeatKernel, r_e) -> np.ndarray:
    """Covariance ``K R K`` of smoothed noise whose covariance is ``R``."""
    r_e = np.asarray(r_e, dtype=np.float64)
    n = kernel.n_nodes
    if r_e.shape != (n, n):
        raise ValidationError(f"covariance of shape {r_e.shape} does not match {n} nodes")
    k = kernel.matrix()
    out = k @ r_e @ k
    return (out + out.T) / 2


def iterate_kernel(kernel: HeatKernel, n: int) -> HeatKernel:
    """``K_sigma^n``, which equals ``K_{n sigma}`` for a complete basis."""
    if n < 1:
        raise ValidationError(f"power must be at least 1, got {n}")
    if kernel.truncated:
        raise ValidationError("kernel powers are only exact for a complete basis")
    return HeatKernel(kernel.basis, n * kernel.sigma)
