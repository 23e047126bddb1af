"""Text formats for graphs, voxel masks, signals and matrices.

All writers emit UTF-8 with LF line endings and print floats with 17
significant digits, so ``read(write(x)) == x`` bit for bit.

Edge list
    One ``i j w`` triple per line, 0-based; ``#`` starts a comment. An
    optional ``# nodes N`` line fixes the node count (otherwise it is
    ``max index + 1``), which keeps trailing isolated nodes.

Voxel mask (run-length)
    ``voxmask nx ny nz dx dy dz`` on the first line, then whitespace
    separated run lengths over the voxels in ``x``-fastest, then ``y``, then
    ``z`` order. Runs alternate starting with empty voxels (the first run may
    be 0).

Voxel mask (points)
    One ``x y z`` occupied voxel index per line; the shape is the bounding
    box of the points and the spacing is 1.

Signal CSV
    Header ``node,value`` and one row per node in node order.

Matrix
    ``# coo n nnz`` header, then ``row col value`` per stored entry, row-major.
"""

from __future__ import annotations

import csv
import io
from pathlib import Path

import numpy as np

from .errors import ValidationError
from .graph import Graph, VoxelMask, from_edge_list
from .numkernel import SparseSymMatrix


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def _write(path, text: str) -> None:
    if path in ("-", None):
        import sys

        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _read(path) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc}") from exc


# -- edge lists ---------------------------------------------------------------

def parse_edge_list(text: str) -> Graph:
    edges = []
    n_nodes = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if line.startswith("#"):
            parts = line[1:].split()
            if len(parts) == 2 and parts[0] == "nodes":
                n_nodes = int(parts[1])
            continue
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) not in (2, 3):
            raise ValidationError(f"edge list line {lineno}: expected 'i j w', got {raw!r}")
        try:
            i, j = int(parts[0]), int(parts[1])
            w = float(parts[2]) if len(parts) == 3 else 1.0
        except ValueError as exc:
            raise ValidationError(f"edge list line {lineno}: {exc}") from exc
        edges.append((i, j, w))
    if n_nodes is None:
        if not edges:
            raise ValidationError("edge list is empty and has no '# nodes N' line")
        n_nodes = max(max(i, j) for i, j, _ in edges) + 1
    return from_edge_list(edges, n_nodes)


def format_edge_list(g: Graph) -> str:
    lines = [f"# nodes {g.n_nodes}"]
    lines += [f"{i} {j} {fmt(w)}" for i, j, w in g.edges()]
    return "\n".join(lines) + "\n"


def read_edge_list(path) -> Graph:
    return parse_edge_list(_read(path))


def write_edge_list(path, g: Graph) -> None:
    _write(path, format_edge_list(g))


# -- voxel masks --------------------------------------------------------------

def _scan(occ: np.ndarray) -> np.ndarray:
    return occ.transpose(2, 1, 0).ravel()


def format_voxmask(mask: VoxelMask) -> str:
    bits = _scan(mask.occupancy).astype(np.int8)
    change = np.flatnonzero(np.diff(bits)) + 1
    bounds = np.r_[0, change, bits.size]
    runs = np.diff(bounds).tolist()
    if bits.size and bits[0] == 1:
        runs = [0] + runs
    nx, ny, nz = mask.shape
    dx, dy, dz = mask.spacing
    header = f"voxmask {nx} {ny} {nz} {fmt(dx)} {fmt(dy)} {fmt(dz)}"
    return header + "\n" + " ".join(str(r) for r in runs) + "\n"


def parse_voxmask(text: str) -> VoxelMask:
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines:
        raise ValidationError("voxel mask file is empty")
    head = lines[0].split()
    if head[0] != "voxmask":
        return _parse_points(lines)
    if len(head) != 7:
        raise ValidationError("voxmask header must be 'voxmask nx ny nz dx dy dz'")
    try:
        shape = tuple(int(v) for v in head[1:4])
        spacing = tuple(float(v) for v in head[4:7])
        runs = [int(v) for ln in lines[1:] for v in ln.split()]
    except ValueError as exc:
        raise ValidationError(f"bad voxmask file: {exc}") from exc
    total = shape[0] * shape[1] * shape[2]
    if sum(runs) != total or any(r < 0 for r in runs):
        raise ValidationError(f"run lengths sum to {sum(runs)}, expected {total}")
    bits = np.repeat(np.arange(len(runs)) % 2 == 1, runs)
    occ = bits.reshape(shape[2], shape[1], shape[0]).transpose(2, 1, 0)
    return VoxelMask(occ, spacing)


def _parse_points(lines) -> VoxelMask:
    pts = []
    for ln in lines:
        parts = ln.split("#", 1)[0].replace(",", " ").split()
        if not parts:
            continue
        if len(parts) != 3:
            raise ValidationError(f"expected 'x y z' voxel index, got {ln!r}")
        try:
            pts.append([int(p) for p in parts])
        except ValueError as exc:
            raise ValidationError(f"bad voxel index line {ln!r}") from exc
    return VoxelMask.from_points(np.asarray(pts))


def read_voxmask(path) -> VoxelMask:
    return parse_voxmask(_read(path))


def write_voxmask(path, mask: VoxelMask) -> None:
    _write(path, format_voxmask(mask))


# -- node signals -------------------------------------------------------------

def format_signal(values, header: str = "value") -> str:
    values = np.asarray(values, dtype=np.float64)
    out = [f"node,{header}"]
    out += [f"{i},{fmt(v)}" for i, v in enumerate(values)]
    return "\n".join(out) + "\n"


def parse_signal(text: str, n_nodes: int | None = None) -> np.ndarray:
    reader = csv.reader(io.StringIO(text))
    rows = [r for r in reader if r and any(c.strip() for c in r)]
    if not rows:
        raise ValidationError("signal file is empty")
    if rows[0][0].strip().lower() == "node":
        rows = rows[1:]
    try:
        pairs = [(int(r[0]), float(r[1])) for r in rows]
    except (ValueError, IndexError) as exc:
        raise ValidationError(f"bad signal row: {exc}") from exc
    n = n_nodes if n_nodes is not None else len(pairs)
    out = np.full(n, np.nan)
    for i, v in pairs:
        if not 0 <= i < n:
            raise ValidationError(f"signal node {i} out of range 0..{n - 1}")
        out[i] = v
    if np.any(np.isnan(out)):
        missing = np.flatnonzero(np.isnan(out))[:5].tolist()
        raise ValidationError(f"signal has no value for nodes {missing}")
    return out


def read_signal(path, n_nodes: int | None = None) -> np.ndarray:
    return parse_signal(_read(path), n_nodes)


def write_signal(path, values, header: str = "value") -> None:
    _write(path, format_signal(values, header))


def _cell(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)):
        return str(v)
    return fmt(v)


def format_table(header: list[str], rows) -> str:
    out = [",".join(header)]
    for r in rows:
        out.append(",".join(_cell(v) for v in r))
    return "\n".join(out) + "\n"


def parse_table(text: str) -> tuple[list[str], list[list[str]]]:
    rows = [r for r in csv.reader(io.StringIO(text)) if r]
    if not rows:
        raise ValidationError("table is empty")
    return [h.strip() for h in rows[0]], rows[1:]


# -- sparse matrices ----------------------------------------------------------

def format_matrix(m: SparseSymMatrix) -> str:
    entries = m.entries()
    lines = [f"# coo {m.dim} {len(entries)}"]
    lines += [f"{i} {j} {fmt(v)}" for i, j, v in entries]
    return "\n".join(lines) + "\n"


def parse_matrix(text: str) -> SparseSymMatrix:
    dim = None
    entries = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            parts = line[1:].split()
            if len(parts) == 3 and parts[0] == "coo":
                dim = int(parts[1])
            continue
        i, j, v = line.split()
        entries.append((int(i), int(j), float(v)))
    if dim is None:
        raise ValidationError("matrix file lacks '# coo n nnz' header")
    return SparseSymMatrix.from_entries(dim, entries)
