"""Graphs from edge lists and binary voxel masks, components and geodesics."""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse import csgraph

from .errors import ValidationError
from .numkernel import SparseSymMatrix


class Connectivity(enum.Enum):
    N4_2D = "n4"
    N8_2D = "n8"
    N6_3D = "n6"
    N18_3D = "n18"
    N26_3D = "n26"

    @property
    def is_2d(self) -> bool:
        return self in (Connectivity.N4_2D, Connectivity.N8_2D)

    def offsets(self) -> list[tuple[int, int, int]]:
        """Neighbour offsets ``(dx, dy, dz)``, one per unordered pair direction.

        Only offsets that are lexicographically positive in ``(dz, dy, dx)``
        are returned, so each edge is generated exactly once.
        """
        out = []
        for dz, dy, dx in itertools.product((-1, 0, 1), repeat=3):
            if (dz, dy, dx) <= (0, 0, 0):
                continue
            manhattan = abs(dx) + abs(dy) + abs(dz)
            if self.is_2d and dz != 0:
                continue
            if self in (Connectivity.N4_2D, Connectivity.N6_3D) and manhattan > 1:
                continue
            if self is Connectivity.N18_3D and manhattan > 2:
                continue
            out.append((dx, dy, dz))
        return out

    @classmethod
    def parse(cls, name: str) -> "Connectivity":
        key = name.strip().lower()
        for c in cls:
            if key in (c.value, c.name.lower()):
                return c
        raise ValidationError(f"unknown connectivity {name!r}")


@dataclass(frozen=True)
class VoxelMask:
    """Binary occupancy grid indexed ``occupancy[x, y, z]``."""

    occupancy: np.ndarray
    spacing: tuple[float, float, float] = (1.0, 1.0, 1.0)

    def __post_init__(self):
        occ = np.asarray(self.occupancy, dtype=bool)
        if occ.ndim == 2:
            occ = occ[:, :, None]
        if occ.ndim != 3 or min(occ.shape) < 1:
            raise ValidationError(f"voxel mask must be 3D and nonempty, got shape {occ.shape}")
        spacing = tuple(float(s) for s in self.spacing)
        if len(spacing) != 3 or not all(s > 0 and np.isfinite(s) for s in spacing):
            raise ValidationError(f"spacing must be three positive reals, got {self.spacing}")
        occ = occ.copy()
        occ.setflags(write=False)
        object.__setattr__(self, "occupancy", occ)
        object.__setattr__(self, "spacing", spacing)

    @classmethod
    def from_points(cls, points, shape=None, spacing=(1.0, 1.0, 1.0)) -> "VoxelMask":
        pts = np.asarray(points, dtype=np.int64).reshape(-1, 3)
        if pts.size and pts.min() < 0:
            raise ValidationError("voxel coordinates must be nonnegative")
        if shape is None:
            shape = tuple(int(v) for v in pts.max(axis=0) + 1) if pts.size else (1, 1, 1)
        occ = np.zeros(shape, dtype=bool)
        if pts.size:
            if np.any(pts >= np.asarray(shape)):
                raise ValidationError(f"voxel coordinate outside shape {shape}")
            occ[pts[:, 0], pts[:, 1], pts[:, 2]] = True
        return cls(occ, spacing)

    @property
    def shape(self) -> tuple[int, int, int]:
        return tuple(int(s) for s in self.occupancy.shape)

    @property
    def count(self) -> int:
        return int(self.occupancy.sum())

    def points(self) -> np.ndarray:
        """Occupied ``(x, y, z)`` indices in ``(z, y, x)`` lexicographic order."""
        zyx = np.argwhere(self.occupancy.transpose(2, 1, 0))
        return zyx[:, ::-1].copy()

    def __eq__(self, other):
        if not isinstance(other, VoxelMask):
            return NotImplemented
        return (
            self.shape == other.shape
            and self.spacing == other.spacing
            and bool(np.array_equal(self.occupancy, other.occupancy))
        )


@dataclass(frozen=True)
class Graph:
    """Undirected weighted graph without self-loops.

    ``coords`` is an optional ``(n_nodes, d)`` array of node positions.
    """

    adjacency: SparseSymMatrix
    coords: np.ndarray | None = field(default=None)

    def __post_init__(self):
        a = self.adjacency.csr
        if np.any(a.diagonal() != 0):
            raise ValidationError("graph adjacency has self-loops")
        if a.nnz and a.data.min() < 0:
            raise ValidationError("edge weights must be nonnegative")
        if self.coords is not None:
            c = np.array(self.coords, dtype=np.float64)
            if c.ndim == 1:
                c = c[:, None]
            if c.shape[0] != self.n_nodes:
                raise ValidationError(
                    f"coords have {c.shape[0]} rows for {self.n_nodes} nodes"
                )
            c.setflags(write=False)
            object.__setattr__(self, "coords", c)

    @property
    def n_nodes(self) -> int:
        return self.adjacency.dim

    @property
    def n_edges(self) -> int:
        return self.adjacency.nnz // 2

    def edges(self) -> list[tuple[int, int, float]]:
        """Edge triples ``(i, j, w)`` with ``i < j``, sorted."""
        return [(i, j, w) for i, j, w in self.adjacency.entries() if i < j]

    def degrees(self) -> np.ndarray:
        return np.asarray(self.adjacency.csr.sum(axis=1)).ravel()

    def with_coords(self, coords) -> "Graph":
        return Graph(self.adjacency, coords)


def from_edge_list(edges, n_nodes: int, coords=None) -> Graph:
    """Graph with ``w_ij = w_ji = w`` for every ``(i, j, w)``.

    Raises
    ------
    ValidationError
        On a self-loop, a repeated pair (in either orientation), an index
        outside ``[0, n_nodes)`` or a nonpositive weight.
    """
    if n_nodes < 1:
        raise ValidationError("n_nodes must be positive")
    seen = set()
    triplets = []
    for e in edges:
        if len(e) == 2:
            i, j, w = e[0], e[1], 1.0
        else:
            i, j, w = e
        i, j, w = int(i), int(j), float(w)
        if not (0 <= i < n_nodes and 0 <= j < n_nodes):
            raise ValidationError(f"edge ({i}, {j}) out of range for {n_nodes} nodes")
        if i == j:
            raise ValidationError(f"self-loop at node {i}")
        if not (w > 0 and np.isfinite(w)):
            raise ValidationError(f"edge ({i}, {j}) has nonpositive weight {w}")
        key = (min(i, j), max(i, j))
        if key in seen:
            raise ValidationError(f"duplicate edge {key}")
        seen.add(key)
        triplets.append((i, j, w))
    return Graph(SparseSymMatrix.from_entries(n_nodes, triplets), coords)


def from_voxel_mask(mask: VoxelMask, conn: Connectivity = Connectivity.N18_3D) -> Graph:
    """One node per occupied voxel, unit weights between neighbouring voxels.

    Nodes are numbered in ``(z, y, x)`` scan order and carry the physical
    voxel-centre coordinates ``(index + 0.5) * spacing``.
    """
    if mask.count == 0:
        raise ValidationError("voxel mask is empty")
    if conn.is_2d and mask.shape[2] != 1:
        raise ValidationError(f"{conn.name} needs a single-slice mask, got shape {mask.shape}")
    occ = mask.occupancy
    pts = mask.points()
    n = pts.shape[0]
    index = np.full(mask.shape, -1, dtype=np.int64)
    index[pts[:, 0], pts[:, 1], pts[:, 2]] = np.arange(n)

    rows, cols = [], []
    nx, ny, nz = mask.shape
    for dx, dy, dz in conn.offsets():
        src = tuple(slice(max(0, -d), s - max(0, d)) for d, s in zip((dx, dy, dz), (nx, ny, nz)))
        dst = tuple(slice(max(0, d), s - max(0, -d)) for d, s in zip((dx, dy, dz), (nx, ny, nz)))
        both = occ[src] & occ[dst]
        rows.append(index[src][both])
        cols.append(index[dst][both])
    r = np.concatenate(rows) if rows else np.empty(0, dtype=np.int64)
    c = np.concatenate(cols) if cols else np.empty(0, dtype=np.int64)
    adj = sp.csr_matrix((np.ones(2 * r.size), (np.r_[r, c], np.r_[c, r])), shape=(n, n))
    coords = (pts + 0.5) * np.asarray(mask.spacing)
    return Graph(SparseSymMatrix(adj), coords)


def component_labels(g: Graph) -> np.ndarray:
    """Component label per node; labels are numbered by smallest member."""
    _, labels = csgraph.connected_components(g.adjacency.csr, directed=False)
    # relabel by first appearance so component 0 holds node 0, etc.
    _, first = np.unique(labels, return_index=True)
    order = np.argsort(first)
    remap = np.empty_like(order)
    remap[order] = np.arange(order.size)
    return remap[labels]


def connected_components(g: Graph) -> list[np.ndarray]:
    """Node sets of the connected components, ordered by smallest member."""
    labels = component_labels(g)
    return [np.flatnonzero(labels == c) for c in range(labels.max() + 1)]


def n_components(g: Graph) -> int:
    return int(component_labels(g).max() + 1)


def induced_components(g: Graph, nodes) -> list[np.ndarray]:
    """Components of the subgraph induced by ``nodes`` (original node ids)."""
    nodes = np.asarray(sorted(int(i) for i in nodes), dtype=np.int64)
    if nodes.size == 0:
        return []
    sub = g.adjacency.csr[nodes][:, nodes]
    _, labels = csgraph.connected_components(sub, directed=False)
    _, first = np.unique(labels, return_index=True)
    return [nodes[labels == labels[f]] for f in np.sort(first)]


def geodesic_distances(g: Graph, source: int) -> np.ndarray:
    """Shortest-path lengths from ``source`` with edge weights as lengths.

    Unreachable nodes get ``inf``.
    """
    if not 0 <= source < g.n_nodes:
        raise ValidationError(f"source {source} out of range")
    return csgraph.dijkstra(g.adjacency.csr, directed=False, indices=int(source))
