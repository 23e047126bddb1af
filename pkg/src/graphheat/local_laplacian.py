"""Laplacian of scattered planar data by local quadratic regression.

Around a centre point the samples are fitted with
``mu(u, v) = b0 + b1 u + b2 v + b3 u^2 + b4 u v + b5 v^2`` in coordinates
translated so the centre is the origin, and the Laplacian estimate is
``2 b3 + 2 b5``. The fit always goes through the Moore-Penrose inverse of
the design matrix, so fewer than six samples or collinear layouts give the
minimum-norm solution instead of failing.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError
from .numkernel import pinv, svd

CONDITION_WARN = 1e8


@dataclass(frozen=True)
class NeighborhoodSample:
    center: np.ndarray
    points: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.center, dtype=np.float64).reshape(2)
        p = np.asarray(self.points, dtype=np.float64).reshape(-1, 2)
        y = np.asarray(self.values, dtype=np.float64).reshape(-1)
        if p.shape[0] < 1:
            raise ValidationError("a neighbourhood needs at least one sample")
        if p.shape[0] != y.shape[0]:
            raise ValidationError(f"{p.shape[0]} points but {y.shape[0]} values")
        if not (np.all(np.isfinite(c)) and np.all(np.isfinite(p)) and np.all(np.isfinite(y))):
            raise ValidationError("neighbourhood has non-finite entries")
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "points", p)
        object.__setattr__(self, "values", y)

    @property
    def m(self) -> int:
        return self.points.shape[0]

    def local_points(self) -> np.ndarray:
        return self.points - self.center


@dataclass(frozen=True)
class QuadraticFit:
    beta: np.ndarray
    rank: int
    residual_norm: float
    condition: float
    warnings: list[str] = field(default_factory=list)

    @property
    def laplacian(self) -> float:
        return float(2 * self.beta[3] + 2 * self.beta[5])


def design_matrix(uv) -> np.ndarray:
    """Rows ``(1, u, v, u^2, u v, v^2)``."""
    uv = np.asarray(uv, dtype=np.float64).reshape(-1, 2)
    u, v = uv[:, 0], uv[:, 1]
    return np.column_stack([np.ones_like(u), u, v, u * u, u * v, v * v])


def fit_quadratic(s: NeighborhoodSample, rank_tol: float | None = None) -> QuadraticFit:
    x = design_matrix(s.local_points())
    beta = pinv(x, rank_tol) @ s.values
    d = svd(x).d
    tol = (1e-12 * max(x.shape) if rank_tol is None else rank_tol) * d[0]
    kept = d[d > tol]
    rank = int(kept.size)
    cond = float(kept[0] / kept[-1]) if rank else float("inf")
    warnings = []
    if rank < 6:
        warnings.append(f"design matrix has rank {rank} < 6; minimum-norm coefficients returned")
    if cond > CONDITION_WARN:
        warnings.append(f"design matrix is ill-conditioned (d_max/d_min = {cond:.3e})")
    resid = float(np.linalg.norm(x @ beta - s.values))
    return QuadraticFit(beta=beta, rank=rank, residual_norm=resid, condition=cond, warnings=warnings)


def estimate_laplacian(s: NeighborhoodSample) -> float:
    return fit_quadratic(s).laplacian
