"""Skeletons of binary voxel structures by heat kernel smoothing of node coordinates.

Pipeline: voxel graph -> Laplacian eigenbasis -> smooth each coordinate axis
-> scale by ``scale_factor`` -> round to voxel indices of the enlarged grid.
Smoothing pulls every node toward the local centre of mass of its branch,
so after rounding many nodes land on the same voxel and the structure
thins. Nodes that land together are merged; the skeleton graph keeps an
edge between two merged voxels whenever any original edge joined them.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError
from .graph import Connectivity, Graph, VoxelMask, from_edge_list, from_voxel_mask
from .heat import HeatKernel, smooth
from .numkernel import DENSE_THRESHOLD, SpectralBasis
from .spectral import laplacian_basis

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SkeletonConfig:
    sigma: float = 1.0
    scale_factor: float = 1.0
    num_eig: int = 6000
    connectivity: Connectivity = Connectivity.N18_3D

    def __post_init__(self):
        if not (self.sigma >= 0 and math.isfinite(self.sigma)):
            raise ValidationError(f"sigma must be finite and nonnegative, got {self.sigma}")
        if not self.scale_factor > 0:
            raise ValidationError(f"scale_factor must be positive, got {self.scale_factor}")
        if self.num_eig < 1:
            raise ValidationError(f"num_eig must be positive, got {self.num_eig}")


@dataclass(frozen=True)
class SkeletonResult:
    mask: VoxelMask
    graph: Graph
    node_map: np.ndarray  # input node -> skeleton node
    input_graph: Graph
    smoothed: np.ndarray  # smoothed physical coordinates of the input nodes
    num_eig: int
    warnings: list[str] = field(default_factory=list)


def skeleton_basis(g: Graph, num_eig: int) -> SpectralBasis:
    """Eigenbasis for coordinate smoothing.

    Graphs within the dense threshold get ``min(num_eig, n)`` pairs, which is
    the complete basis for small structures; larger graphs go to the
    Lanczos solver, capped at ``n - 1`` pairs.
    """
    n = g.n_nodes
    if n <= DENSE_THRESHOLD:
        return laplacian_basis(g, k=min(num_eig, n))
    return laplacian_basis(g, k=min(num_eig, n - 1))


def smooth_coordinates(g: Graph, cfg: SkeletonConfig, basis: SpectralBasis | None = None) -> np.ndarray:
    """Heat kernel smoothing of every coordinate axis as a separate node signal."""
    if g.coords is None:
        raise ValidationError("graph has no node coordinates")
    if basis is None:
        basis = skeleton_basis(g, cfg.num_eig)
    return smooth(HeatKernel(basis, cfg.sigma), g.coords)


def round_half_away(x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    return np.sign(x) * np.floor(np.abs(x) + 0.5)


def voxelize(
    coords: np.ndarray,
    shape: tuple[int, int, int],
    spacing: tuple[float, float, float],
    scale_factor: float,
) -> tuple[np.ndarray, tuple[int, int, int], int]:
    """Map physical coordinates to integer indices of the grid enlarged by ``scale_factor``.

    Returns the ``(n, 3)`` indices, the enlarged shape and how many
    coordinates had to be clipped into the grid.
    """
    voxel_units = coords / np.asarray(spacing) - 0.5
    idx = round_half_away(voxel_units * scale_factor).astype(np.int64)
    big = tuple(int(math.ceil(s * scale_factor - 1e-9)) for s in shape)
    clipped = np.clip(idx, 0, np.asarray(big) - 1)
    n_clipped = int(np.sum(np.any(clipped != idx, axis=1)))
    return clipped, big, n_clipped


def merge_nodes(g: Graph, idx: np.ndarray) -> tuple[np.ndarray, np.ndarray, list[tuple[int, int]]]:
    """Collapse nodes that share a voxel and carry their edges along.

    Returns the distinct voxels in ``(z, y, x)`` scan order, the node ->
    voxel map and the deduplicated skeleton edges.
    """
    keys = idx[:, ::-1]
    voxels_zyx, node_map = np.unique(keys, axis=0, return_inverse=True)
    node_map = node_map.ravel()
    edges = set()
    for i, j, _ in g.edges():
        a, b = int(node_map[i]), int(node_map[j])
        if a != b:
            edges.add((min(a, b), max(a, b)))
    return voxels_zyx[:, ::-1].copy(), node_map, sorted(edges)


def skeletonize(mask: VoxelMask, cfg: SkeletonConfig | None = None) -> SkeletonResult:
    cfg = cfg or SkeletonConfig()
    if mask.count == 0:
        raise ValidationError("voxel mask is empty")
    g = from_voxel_mask(mask, cfg.connectivity)
    basis = skeleton_basis(g, cfg.num_eig)
    smoothed = smooth_coordinates(g, cfg, basis)
    idx, big, n_clipped = voxelize(smoothed, mask.shape, mask.spacing, cfg.scale_factor)
    warnings = []
    if not basis.complete:
        warnings.append(f"truncated kernel: {basis.k} of {g.n_nodes} eigenpairs")
    if n_clipped:
        warnings.append(f"{n_clipped} smoothed nodes fell outside the grid and were clipped")
    for w in warnings:
        log.warning(w)
    voxels, node_map, edges = merge_nodes(g, idx)
    out_spacing = tuple(s / cfg.scale_factor for s in mask.spacing)
    out_mask = VoxelMask.from_points(voxels, shape=big, spacing=out_spacing)
    coords = (voxels + 0.5) * np.asarray(out_spacing)
    skel = from_edge_list([(a, b, 1.0) for a, b in edges], len(voxels), coords=coords)
    return SkeletonResult(
        mask=out_mask,
        graph=skel,
        node_map=node_map,
        input_graph=g,
        smoothed=smoothed,
        num_eig=basis.k,
        warnings=warnings,
    )


def add_noise_fixture(g: Graph, axis: int, sd: float, seed: int) -> Graph:
    """Copy of ``g`` with Gaussian noise of standard deviation ``sd`` on one coordinate axis."""
    if g.coords is None:
        raise ValidationError("graph has no node coordinates")
    if axis not in (0, 1, 2) or axis >= g.coords.shape[1]:
        raise ValidationError(f"invalid axis {axis}")
    if sd < 0:
        raise ValidationError("sd must be nonnegative")
    coords = np.array(g.coords, copy=True)
    if sd > 0:
        rng = np.random.default_rng(seed)
        coords[:, axis] += rng.normal(0.0, sd, size=coords.shape[0])
    return g.with_coords(coords)


def tube_mask(
    length: int = 24,
    radius: float = 2.5,
    pad: int = 2,
    bumps: float = 0.0,
    seed: int = 0,
    axis: int = 0,
) -> VoxelMask:
    """Solid cylinder along ``axis``; ``bumps`` is the chance of adding each surface-adjacent voxel.

    The added voxels always touch the tube through a face, so the result
    stays a single 6-connected component.
    """
    r = int(math.ceil(radius))
    side = 2 * (r + pad) + 1
    shape = [side, side, side]
    shape[axis] = length + 2 * pad
    occ = np.zeros(shape, dtype=bool)
    c = r + pad
    grid = np.indices(shape)
    cross = [grid[a] for a in range(3) if a != axis]
    inside = ((cross[0] - c) ** 2 + (cross[1] - c) ** 2 <= radius**2) & (grid[axis] >= pad) & (grid[axis] < pad + length)
    occ[inside] = True
    if bumps > 0:
        rng = np.random.default_rng(seed)
        shell = np.zeros_like(occ)
        for ax in range(3):
            for step in (-1, 1):
                shell |= np.roll(occ, step, axis=ax)
        shell &= ~occ
        cand = np.argwhere(shell.transpose(2, 1, 0))[:, ::-1]
        pick = rng.random(len(cand)) < bumps
        occ[tuple(cand[pick].T)] = True
    return VoxelMask(occ)

