"""Command-line interface.

Every subcommand reads the documented text formats (see :mod:`graphheat.io`),
writes data files (``-`` means stdout) and emits a JSON run manifest, to
``--manifest PATH`` when given and otherwise as one line on stderr.

Exit codes: 0 success, 2 invalid input, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import contextlib
import hashlib
import json
import os
import sys
import time

import numpy as np

from . import __version__
from . import io as gio
from .errors import DisconnectedGraphError, NumericalError, ValidationError
from .fdm import (
    Boundary,
    DiffusionConfig,
    Stencil,
    analytic_neumann_1d,
    analytic_solution_1d,
    diffuse,
    stability_dt_bound,
)
from .graph import Connectivity, from_voxel_mask, n_components
from .heat import HeatKernel, smooth
from .laplace_galerkin import BoundarySpec, assemble, default_boundary, field_gradient, solve
from .laplacian import build_laplacian
from .local_laplacian import NeighborhoodSample, fit_quadratic
from .skeleton import SkeletonConfig, skeletonize
from .spectral import fiedler_vector, laplacian_basis
from .wavelet import ScaleFunction, wavelet_at, wavelet_transform

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 2, 3
THREADS_ENV = "GRAPHHEAT_THREADS"


class Run:
    """Collects manifest fields while a subcommand executes."""

    def __init__(self, command: str, args: argparse.Namespace):
        self.command = command
        self.config = {
            k: v for k, v in sorted(vars(args).items()) if k not in ("func", "manifest")
        }
        self.inputs: dict[str, str] = {}
        self.outputs: list[str] = []
        self.warnings: list[str] = []
        self.extra: dict = {}
        self.start = time.perf_counter()

    def read(self, path: str) -> str:
        try:
            with open(path, "rb") as fh:
                raw = fh.read()
        except OSError as exc:
            raise ValidationError(f"cannot read {path}: {exc}") from exc
        self.inputs[path] = hashlib.sha256(raw).hexdigest()
        try:
            return raw.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ValidationError(f"{path} is not UTF-8") from exc

    def write(self, path: str, text: str) -> None:
        gio._write(path, text)
        self.outputs.append(path)

    def manifest(self) -> dict:
        return {
            "command": self.command,
            "version": __version__,
            "inputs": self.inputs,
            "config": self.config,
            "outputs": self.outputs,
            "warnings": self.warnings,
            **self.extra,
            "wall_time_s": round(time.perf_counter() - self.start, 6),
        }


# -- shared loaders -----------------------------------------------------------

def _load_graph(run: Run, args):
    if getattr(args, "edges", None):
        return gio.parse_edge_list(run.read(args.edges))
    if getattr(args, "voxmask", None):
        mask = gio.parse_voxmask(run.read(args.voxmask))
        return from_voxel_mask(mask, Connectivity.parse(args.conn))
    raise ValidationError("give a graph with --edges or --voxmask")


def _num_eig(value: str | None, n: int) -> int | None:
    if value is None or value == "full":
        return None
    try:
        k = int(value)
    except ValueError as exc:
        raise ValidationError(f"--num-eig must be an integer or 'full', got {value!r}") from exc
    if k < 1:
        raise ValidationError("--num-eig must be positive")
    return min(k, n)


def _basis(run: Run, g, num_eig):
    k = _num_eig(num_eig, g.n_nodes)
    basis = laplacian_basis(g, k)
    if not basis.complete:
        run.warnings.append(f"truncated kernel: {basis.k} of {g.n_nodes} eigenpairs")
    return basis


def _node_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.replace(" ", "").split(",") if v]
    except ValueError as exc:
        raise ValidationError(f"bad node list {text!r}") from exc


# -- subcommands --------------------------------------------------------------

def cmd_laplacian(run: Run, args) -> None:
    g = _load_graph(run, args)
    run.write(args.out, gio.format_matrix(build_laplacian(g).l))


def cmd_eig(run: Run, args) -> None:
    g = _load_graph(run, args)
    basis = _basis(run, g, args.num_eig)
    rows = [(j + 1, lam) for j, lam in enumerate(basis.eigenvalues)]
    run.write(args.out, gio.format_table(["index", "eigenvalue"], rows))
    if args.vectors:
        header = ["node"] + [f"psi_{j + 1}" for j in range(basis.k)]
        vrows = [[i, *basis.eigenvectors[i]] for i in range(g.n_nodes)]
        run.write(args.vectors, gio.format_table(header, vrows))


def cmd_smooth(run: Run, args) -> None:
    g = _load_graph(run, args)
    f = gio.parse_signal(run.read(args.signal), g.n_nodes)
    basis = _basis(run, g, args.num_eig)
    run.write(args.out, gio.format_signal(smooth(HeatKernel(basis, args.sigma), f)))


def cmd_fiedler(run: Run, args) -> None:
    g = _load_graph(run, args)
    if g.n_nodes < 2:
        raise ValidationError("the Fiedler vector needs at least 2 nodes")
    nc = n_components(g)
    if nc > 1:
        raise DisconnectedGraphError(nc)
    fv = fiedler_vector(laplacian_basis(g, k=min(3, g.n_nodes)))
    run.extra["eigenvalue"] = fv.eigenvalue
    if fv.degenerate:
        run.warnings.append("lambda_2 is degenerate; the vector is one element of its eigenspace")
    run.write(args.out, gio.format_signal(fv.values))


def cmd_diffuse(run: Run, args) -> None:
    f = gio.parse_signal(run.read(args.signal))
    if args.shape:
        shape = tuple(_node_list(args.shape))
        if int(np.prod(shape)) != f.size:
            raise ValidationError(f"--shape {shape} does not hold {f.size} values")
        f = f.reshape(shape)
    stencil = Stencil.parse(args.stencil, ndim=f.ndim)
    cfg = DiffusionConfig(
        dt=args.dt,
        n_steps=args.steps,
        boundary=Boundary.parse(args.boundary),
        strict_stability=args.check_stability,
    )
    bound = stability_dt_bound(f, stencil, h=args.spacing)
    run.extra["stability_dt_bound"] = bound if np.isfinite(bound) else "inf"
    if args.dt > bound:
        run.warnings.append(f"dt={args.dt} exceeds the maximum-principle bound {bound}")
    out = diffuse(f, stencil, cfg, h=args.spacing)
    run.write(args.out, gio.format_signal(out.ravel()))
    if args.oracle:
        if f.ndim != 1:
            raise ValidationError("the Fourier oracle is 1D only")
        t = args.dt * args.steps
        if args.halfwidth is None:
            sol = analytic_neumann_1d(f, t, args.terms, h=args.spacing)
        else:
            n, l = f.size, args.halfwidth
            x = -l + (np.arange(n) + 0.5) * (2 * l / n)
            sol = analytic_solution_1d(f, x, t, args.terms, l)
        run.extra["oracle_truncation_rms"] = sol.truncation_rms
        run.write(args.oracle_out, gio.format_signal(sol.values))


def cmd_local_laplacian(run: Run, args) -> None:
    header, rows = gio.parse_table(run.read(args.points))
    if [h.lower() for h in header[:3]] != ["x", "y", "value"]:
        raise ValidationError("points file needs header 'x,y,value'")
    try:
        data = np.array([[float(v) for v in r[:3]] for r in rows])
    except ValueError as exc:
        raise ValidationError(f"bad points row: {exc}") from exc
    if not 0 <= args.center < len(data):
        raise ValidationError(f"--center {args.center} outside 0..{len(data) - 1}")
    keep = np.ones(len(data), dtype=bool)
    if args.exclude_center:
        keep[args.center] = False
    sample = NeighborhoodSample(data[args.center, :2], data[keep, :2], data[keep, 2])
    fit = fit_quadratic(sample)
    run.warnings.extend(fit.warnings)
    run.extra["rank"] = fit.rank
    out = [(f"beta_{i}", b) for i, b in enumerate(fit.beta)] + [("laplacian", fit.laplacian)]
    run.write(args.out, gio.format_table(["name", "value"], out))


def cmd_laplace(run: Run, args) -> None:
    g = _load_graph(run, args)
    if args.plus or args.minus:
        if not (args.plus and args.minus):
            raise ValidationError("give both --plus and --minus, or neither")
        b = BoundarySpec(tuple(_node_list(args.plus)), tuple(_node_list(args.minus)))
    else:
        b = default_boundary(g)
        run.extra["boundary"] = {"plus": list(b.g_plus), "minus": list(b.g_minus), "rule": "mst-double-sweep"}
    basis = _basis(run, g, args.num_eig)
    sys_ = assemble(basis, b, boundary_weight=args.boundary_weight, seed=args.seed)
    run.extra["interior_sampling"] = sys_.metadata
    sol = solve(sys_)
    run.extra["boundary_error"] = sol.boundary_error
    run.extra["interior_residual"] = sol.interior_residual
    run.write(args.out, gio.format_signal(sol.values, header="potential"))
    if args.out_field:
        run.write(args.out_field, gio.format_table(["i", "j", "value"], field_gradient(g, sol.values)))


def cmd_wavelet(run: Run, args) -> None:
    g = _load_graph(run, args)
    basis = _basis(run, g, args.num_eig)
    sf = ScaleFunction(args.scale, args.t)
    if args.node is not None:
        out = wavelet_at(basis, sf, args.node)
    else:
        if not args.signal:
            raise ValidationError("give --signal, or --node for a single wavelet")
        out = wavelet_transform(basis, sf, gio.parse_signal(run.read(args.signal), g.n_nodes))
    run.write(args.out, gio.format_signal(out))


def cmd_skeletonize(run: Run, args) -> None:
    mask = gio.parse_voxmask(run.read(args.voxmask))
    cfg = SkeletonConfig(
        sigma=args.sigma,
        scale_factor=args.scale,
        num_eig=args.num_eig,
        connectivity=Connectivity.parse(args.conn),
    )
    res = skeletonize(mask, cfg)
    run.warnings.extend(res.warnings)
    run.extra.update(
        input_voxels=mask.count,
        skeleton_voxels=res.mask.count,
        num_eig_used=res.num_eig,
    )
    run.write(args.out_mask, gio.format_voxmask(res.mask))
    if args.out_graph:
        run.write(args.out_graph, gio.format_edge_list(res.graph))


# -- parser -------------------------------------------------------------------

def _graph_opts(p: argparse.ArgumentParser) -> None:
    p.add_argument("--edges", help="edge list file")
    p.add_argument("--voxmask", help="voxel mask file (alternative to --edges)")
    p.add_argument("--conn", default="n18", help="voxel connectivity: n4, n8, n6, n18, n26")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--threads", type=int, default=None, help=f"worker cap (default ${THREADS_ENV})")
    common.add_argument("--manifest", default=None, help="write the run manifest here instead of stderr")

    parser = argparse.ArgumentParser(prog="graphheat", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("laplacian", parents=[common], help="graph Laplacian in coordinate format")
    _graph_opts(p)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_laplacian)

    p = sub.add_parser("eig", parents=[common], help="Laplacian eigenpairs")
    _graph_opts(p)
    p.add_argument("--num-eig", default="full")
    p.add_argument("--out", default="-")
    p.add_argument("--vectors", default=None, help="also write eigenvectors as CSV")
    p.set_defaults(func=cmd_eig)

    p = sub.add_parser("smooth", parents=[common], help="heat kernel smoothing of a node signal")
    _graph_opts(p)
    p.add_argument("--signal", required=True)
    p.add_argument("--sigma", type=float, required=True)
    p.add_argument("--num-eig", default="full")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_smooth)

    p = sub.add_parser("fiedler", parents=[common], help="second Laplacian eigenvector")
    _graph_opts(p)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_fiedler)

    p = sub.add_parser("diffuse", parents=[common], help="explicit finite-difference diffusion")
    p.add_argument("--signal", required=True, help="node,value CSV in row-major grid order")
    p.add_argument("--shape", default=None, help="grid extents, e.g. 64,64 (default 1D)")
    p.add_argument("--stencil", default="lap1d", help="lap1d, n4, n8 or nd")
    p.add_argument("--dt", type=float, default=0.01)
    p.add_argument("--steps", type=int, default=10000)
    p.add_argument("--boundary", default="zero", help="zero or replicate")
    p.add_argument("--spacing", type=float, default=1.0)
    p.add_argument("--check-stability", action="store_true", help="refuse dt above the bound")
    p.add_argument("--oracle", choices=["fourier"], default=None)
    p.add_argument("--terms", type=int, default=500)
    p.add_argument("--halfwidth", type=float, default=None)
    p.add_argument("--oracle-out", default=None)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_diffuse)

    p = sub.add_parser("local-laplacian", parents=[common], help="Laplacian by quadratic regression")
    p.add_argument("--points", required=True, help="CSV with header x,y,value")
    p.add_argument("--center", type=int, default=0, help="0-based data row of the centre point")
    p.add_argument("--exclude-center", action="store_true", help="do not use the centre's own value")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_local_laplacian)

    p = sub.add_parser("laplace", parents=[common], help="Laplace equation with +1/-1 boundaries")
    _graph_opts(p)
    p.add_argument("--plus", default=None, help="comma-separated nodes held at +1")
    p.add_argument("--minus", default=None, help="comma-separated nodes held at -1")
    p.add_argument("--num-eig", default="full")
    p.add_argument("--boundary-weight", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0, help="seed for interior subsampling")
    p.add_argument("--out", default="-")
    p.add_argument("--out-field", default=None)
    p.set_defaults(func=cmd_laplace)

    p = sub.add_parser("wavelet", parents=[common], help="diffusion wavelet transform")
    _graph_opts(p)
    p.add_argument("--signal", default=None)
    p.add_argument("--scale", default="exp")
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--num-eig", default="full")
    p.add_argument("--node", type=int, default=None, help="emit the wavelet centred here")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_wavelet)

    p = sub.add_parser("skeletonize", parents=[common], help="skeleton of a voxel mask")
    p.add_argument("--voxmask", required=True)
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--scale", type=float, default=1.0)
    p.add_argument("--num-eig", type=int, default=6000)
    p.add_argument("--conn", default="n18")
    p.add_argument("--out-mask", required=True)
    p.add_argument("--out-graph", default=None)
    p.set_defaults(func=cmd_skeletonize)
    return parser


def _thread_limit(n: int | None):
    if n is None:
        env = os.environ.get(THREADS_ENV)
        if env:
            try:
                n = int(env)
            except ValueError as exc:
                raise ValidationError(f"{THREADS_ENV} must be an integer, got {env!r}") from exc
    if n is None:
        return contextlib.nullcontext()
    if n < 1:
        raise ValidationError("--threads must be at least 1")
    from threadpoolctl import threadpool_limits

    return threadpool_limits(limits=n)


def _emit_manifest(run: Run, path: str | None) -> None:
    text = json.dumps(run.manifest(), sort_keys=True, default=str)
    if path:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text + "\n")
    else:
        sys.stderr.write(text + "\n")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    run = Run(args.command, args)
    try:
        with _thread_limit(args.threads):
            args.func(run, args)
    except ValidationError as exc:
        return _fail(run, args.manifest, "invalid_input", exc, EXIT_INPUT)
    except NumericalError as exc:
        return _fail(run, args.manifest, "numerical_failure", exc, EXIT_NUMERIC)
    _emit_manifest(run, args.manifest)
    return EXIT_OK


def _fail(run: Run, manifest: str | None, kind: str, exc: Exception, code: int) -> int:
    error = {"error": kind, "message": str(exc)}
    sys.stderr.write(json.dumps(error) + "\n")
    run.extra.update(error, exit_code=code)
    if manifest:
        _emit_manifest(run, manifest)
    return code


if __name__ == "__main__":
    sys.exit(main())
