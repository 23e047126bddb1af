"""Explicit finite-difference diffusion on regular grids.

Signals are plain numpy arrays (1D, 2D or n-D) with a scalar grid spacing
``h``; a stencil's weights are divided by ``h**2``. Two boundary rules are
offered: ``ZERO_PAD`` treats values outside the grid as 0, which reproduces
the tridiagonal Toeplitz Laplacian with ``-2`` on every diagonal entry, and
``REPLICATE`` copies the edge value outward, which conserves mass.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.integrate import trapezoid

from .errors import DivergenceError, ValidationError
from .numkernel import SparseSymMatrix


class Boundary(enum.Enum):
    ZERO_PAD = "zero"
    REPLICATE = "replicate"

    @classmethod
    def parse(cls, name: str) -> "Boundary":
        key = name.strip().lower()
        for b in cls:
            if key in (b.value, b.name.lower()):
                return b
        raise ValidationError(f"unknown boundary rule {name!r}")


@dataclass(frozen=True)
class Stencil:
    """Laplacian stencil as a list of ``(offset, weight)`` pairs.

    Taps are kept in lexicographic offset order, which is also the column
    order of the equivalent row-major matrix; the application sums in this
    order so the stencil and matrix paths round identically in 1D.
    """

    name: str
    taps: tuple[tuple[tuple[int, ...], float], ...]

    def __post_init__(self):
        taps = tuple(sorted((tuple(int(o) for o in off), float(w)) for off, w in self.taps))
        if len({len(off) for off, _ in taps}) != 1:
            raise ValidationError("stencil offsets must share one dimension")
        object.__setattr__(self, "taps", taps)

    @property
    def ndim(self) -> int:
        return len(self.taps[0][0])

    def neighbour_offsets(self) -> list[tuple[int, ...]]:
        return [off for off, w in self.taps if any(off) and w != 0]

    def as_array(self) -> np.ndarray:
        """Weights laid out on a ``3 x 3 x ...`` block centred at the middle."""
        out = np.zeros((3,) * self.ndim)
        for off, w in self.taps:
            out[tuple(o + 1 for o in off)] = w
        return out

    @classmethod
    def lap1d(cls) -> "Stencil":
        return cls("lap1d", (((0,), -2.0), ((-1,), 1.0), ((1,), 1.0)))

    @classmethod
    def n4(cls) -> "Stencil":
        return cls.nd(2, name="n4")

    @classmethod
    def n8(cls) -> "Stencil":
        taps = [((0, 0), -8.0 / 9.0)]
        for off in itertools.product((-1, 0, 1), repeat=2):
            if off != (0, 0):
                taps.append((off, 1.0 / 9.0))
        return cls("n8", tuple(taps))

    @classmethod
    def nd(cls, ndim: int, name: str | None = None) -> "Stencil":
        """``2 n``-neighbour hypercube stencil: ``+1`` per face neighbour, ``-2n`` centre."""
        if ndim < 1:
            raise ValidationError("stencil dimension must be at least 1")
        taps = [((0,) * ndim, -2.0 * ndim)]
        for axis in range(ndim):
            for step in (-1, 1):
                off = [0] * ndim
                off[axis] = step
                taps.append((tuple(off), 1.0))
        return cls(name or f"nd{ndim}", tuple(taps))

    @classmethod
    def parse(cls, name: str, ndim: int | None = None) -> "Stencil":
        key = name.strip().lower()
        if key in ("lap1d", "lap1d_3pt"):
            return cls.lap1d()
        if key in ("n4", "lap2d_n4"):
            return cls.n4()
        if key in ("n8", "lap2d_n8"):
            return cls.n8()
        if key in ("nd", "lapnd_2n"):
            if ndim is None:
                raise ValidationError("the nd stencil needs the signal dimension")
            return cls.nd(ndim)
        raise ValidationError(f"unknown stencil {name!r}")


def _padded(values: np.ndarray, boundary: Boundary) -> np.ndarray:
    mode = "constant" if boundary is Boundary.ZERO_PAD else "edge"
    return np.pad(values, 1, mode=mode)


def apply_stencil(values, stencil: Stencil, boundary: Boundary = Boundary.ZERO_PAD, h: float = 1.0) -> np.ndarray:
    """Discrete Laplacian of a grid signal, ``sum_k w_k f(x + offset_k) / h^2``."""
    f = np.asarray(values, dtype=np.float64)
    if f.ndim != stencil.ndim:
        raise ValidationError(
            f"stencil {stencil.name} is {stencil.ndim}D but the signal is {f.ndim}D"
        )
    g = _padded(f, boundary)
    out = np.zeros_like(f)
    for off, w in stencil.taps:
        window = tuple(slice(1 + o, 1 + o + n) for o, n in zip(off, f.shape))
        out = out + w * g[window]
    if h != 1.0:
        out = out / (h * h)
    return out


def toeplitz_laplacian_1d(n: int) -> SparseSymMatrix:
    """Tridiagonal ``[1, -2, 1]`` matrix of size ``n`` (first and last rows are ``[-2, 1]``)."""
    if n < 2:
        raise ValidationError(f"need n >= 2, got {n}")
    return SparseSymMatrix(sp.diags([np.ones(n - 1), -2.0 * np.ones(n), np.ones(n - 1)], [-1, 0, 1], format="csr"))


@dataclass(frozen=True)
class DiffusionConfig:
    dt: float = 0.01
    n_steps: int = 10000
    boundary: Boundary = Boundary.ZERO_PAD
    strict_stability: bool = False

    def __post_init__(self):
        if not (self.dt > 0 and np.isfinite(self.dt)):
            raise ValidationError(f"dt must be positive, got {self.dt}")
        if self.n_steps < 0:
            raise ValidationError(f"n_steps must be nonnegative, got {self.n_steps}")


def diffuse(values, stencil: Stencil, cfg: DiffusionConfig, h: float = 1.0, callback=None) -> np.ndarray:
    """Forward-Euler heat steps ``f <- f + dt * Lap(f)``.

    ``callback(step, f)`` is called after every step when given.

    Raises
    ------
    ValidationError
        If ``cfg.strict_stability`` is set and ``dt`` exceeds
        :func:`stability_dt_bound` of the initial signal.
    DivergenceError
        As soon as a non-finite value appears; the error names the step.
    """
    f = np.array(values, dtype=np.float64, copy=True)
    if cfg.strict_stability:
        bound = stability_dt_bound(f, stencil, h=h)
        if cfg.dt > bound:
            raise ValidationError(f"dt={cfg.dt} exceeds the maximum-principle bound {bound}")
    for step in range(1, cfg.n_steps + 1):
        with np.errstate(over="ignore", invalid="ignore"):
            f = f + cfg.dt * apply_stencil(f, stencil, cfg.boundary, h)
        if not np.all(np.isfinite(f)):
            raise DivergenceError(f"diffusion diverged at step {step}", step=step)
        if callback is not None:
            callback(step, f)
    return f


def diffuse_matrix(values, lap: SparseSymMatrix, cfg: DiffusionConfig, callback=None) -> np.ndarray:
    """Same iteration with the Laplacian given as a matrix, ``f <- f + dt * L f``."""
    f = np.array(values, dtype=np.float64, copy=True)
    if f.shape != (lap.dim,):
        raise ValidationError(f"signal of shape {f.shape} does not match dim {lap.dim}")
    a = lap.csr
    for step in range(1, cfg.n_steps + 1):
        with np.errstate(over="ignore", invalid="ignore"):
            f = f + cfg.dt * (a @ f)
        if not np.all(np.isfinite(f)):
            raise DivergenceError(f"diffusion diverged at step {step}", step=step)
        if callback is not None:
            callback(step, f)
    return f


def stability_dt_bound(values, stencil: Stencil, h: float = 1.0) -> float:
    """Largest step that keeps one explicit step inside the local min/max.

    At each interior point with nonzero Laplacian the admissible step is the
    largest neighbour gap in the direction the step moves the value,
    divided by ``|Lap f_i|``; the bound is the minimum over the grid. For a
    3-point 1D stencil this is ``max(|f_{i-1} - f_i|, |f_{i+1} - f_i|) / |Lap f_i|``.
    Returns ``inf`` when the Laplacian vanishes on every interior point.
    """
    f = np.asarray(values, dtype=np.float64)
    if any(n < 3 for n in f.shape):
        return float("inf")
    lap = apply_stencil(f, stencil, Boundary.REPLICATE, h)
    g = _padded(f, Boundary.REPLICATE)
    up = np.zeros_like(f)
    down = np.zeros_like(f)
    for off in stencil.neighbour_offsets():
        window = tuple(slice(1 + o, 1 + o + n) for o, n in zip(off, f.shape))
        diff = g[window] - f
        up = np.maximum(up, diff)
        down = np.maximum(down, -diff)
    interior = tuple(slice(1, n - 1) for n in f.shape)
    lap_i = lap[interior]
    gap_i = np.where(lap_i > 0, up[interior], down[interior])
    active = lap_i != 0
    if not np.any(active):
        return float("inf")
    return float(np.min(gap_i[active] / np.abs(lap_i[active])))


def linear_stability_dt(stencil: Stencil, h: float = 1.0) -> float:
    """Signal-independent step limit ``2 h^2 / sum |w|`` for repeated explicit steps.

    The sum of absolute weights bounds the spectral radius of the stencil
    operator, so any ``dt`` below this keeps the iteration from amplifying
    any mode. For ``lap1d`` it is the classical ``h^2 / 2``. Unlike
    :func:`stability_dt_bound`, which only guarantees the maximum principle
    for one step of one particular signal, this holds for every step.
    """
    total = sum(abs(w) for _, w in stencil.taps)
    return 2.0 * h * h / total


@dataclass(frozen=True)
class AnalyticSolution:
    values: np.ndarray
    a0: float
    a: np.ndarray
    b: np.ndarray
    truncation_rms: float  # RMS of f0 minus its own n_terms expansion at t = 0


def _fourier_quadrature(x, y, l):
    """Trapezoid rule on ``[-l, l]``; a grid without both endpoints is closed periodically."""
    if not (np.isclose(x[0], -l) and np.isclose(x[-1], l)):
        x = np.r_[x, x[0] + 2 * l]
        y = np.r_[y, y[0]]
    return x, y


def analytic_solution_1d(f0, x, t: float, n_terms: int, l: float) -> AnalyticSolution:
    """Truncated Fourier-series solution of the heat equation on ``[-l, l]``.

    ``g(x, t) = a0 / sqrt(2l) + sum_j exp(-(j pi / l)^2 t) (a_j cos + b_j sin)(j pi x / l) / sqrt(l)``
    with coefficients from composite trapezoid quadrature of the samples
    ``f0`` at ``x``.
    """
    if n_terms < 1:
        raise ValidationError("n_terms must be at least 1")
    if not l > 0:
        raise ValidationError("half-width l must be positive")
    f0 = np.asarray(f0, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    if f0.shape != x.shape or f0.ndim != 1:
        raise ValidationError("f0 and x must be 1D arrays of equal length")
    j = np.arange(1, n_terms + 1)
    xq, fq = _fourier_quadrature(x, f0, l)
    freq = np.outer(j, xq) * np.pi / l
    a0 = trapezoid(fq, xq) / np.sqrt(2 * l)
    a = trapezoid(fq * np.cos(freq), xq, axis=1) / np.sqrt(l)
    b = trapezoid(fq * np.sin(freq), xq, axis=1) / np.sqrt(l)

    def evaluate(time):
        decay = np.exp(-((j * np.pi / l) ** 2) * time)
        ang = np.outer(j, x) * np.pi / l
        series = (decay * a) @ np.cos(ang) + (decay * b) @ np.sin(ang)
        return a0 / np.sqrt(2 * l) + series / np.sqrt(l)

    resid = evaluate(0.0) - f0
    return AnalyticSolution(
        values=evaluate(float(t)),
        a0=float(a0),
        a=a,
        b=b,
        truncation_rms=float(np.sqrt(np.mean(resid**2))),
    )


def analytic_neumann_1d(f0, t: float, n_terms: int, h: float = 1.0) -> AnalyticSolution:
    """Fourier solution for a cell-centred signal with reflecting ends.

    The ``n`` samples sit at ``x = (i + 1/2) h`` on ``[0, n h]``. The signal is
    mirrored evenly to ``[-n h, n h]``, which is the continuous counterpart
    of ``REPLICATE`` boundaries, and :func:`analytic_solution_1d` is applied.
    Only the right half is returned.
    """
    f0 = np.asarray(f0, dtype=np.float64)
    n = f0.shape[0]
    l = n * h
    x_right = (np.arange(n) + 0.5) * h
    x = np.r_[-x_right[::-1], x_right]
    full = analytic_solution_1d(np.r_[f0[::-1], f0], x, t, n_terms, l)
    return AnalyticSolution(
        values=full.values[n:],
        a0=full.a0,
        a=full.a,
        b=full.b,
        truncation_rms=full.truncation_rms,
    )
