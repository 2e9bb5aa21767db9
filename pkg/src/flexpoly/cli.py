"""Command-line interface.

Subcommands: ``analyze``, ``bricard``, ``counterexample``, ``trace``,
``deltak``. Exit codes: 0 success, 1 invalid input, 2 numerical failure,
3 bad arguments.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

import numpy as np

from . import constructions as cons
from .errors import FlexError, InvalidParameter, ParseError
from .flexpath import TraceConfig, export_frames, trace_flex
from .io import load_mesh, mesh_to_dict, save_mesh
from .mesh import COPLANAR_TOL, metric_summary
from .rigidity import RANK_TOL, flex_space, flux

EXIT_ARGS = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ARGS, f"{self.prog}: error: {message}\n")


def _dump(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def analyze_report(mesh, tol_rank: float = RANK_TOL, tol_coplanar: float = COPLANAR_TOL) -> dict:
    """Counts, metrics, flex space and per-vertex predicates of ``mesh``."""
    s = metric_summary(mesh)
    fb = flex_space(mesh, tol_rank)
    tol = tol_coplanar * mesh.diameter
    return {
        "counts": {"vertices": mesh.n_vertices, "edges": mesh.n_edges,
                   "faces": mesh.n_faces, "euler": s.euler_characteristic},
        "total_mean_curvature": s.total_mean_curvature,
        "volume": s.volume,
        "flex_dim": fb.dim,
        "kernel_dim": fb.kernel_dim,
        "rank_tol": tol_rank,
        "singular_values": fb.singular_values.tolist(),
        "flux": [flux(mesh, f) for f in fb.basis],
        "predicates": cons.predicate_table(mesh, tol),
    }


def cmd_analyze(args) -> int:
    mesh = load_mesh(args.mesh)
    _emit(_dump(analyze_report(mesh, args.tol_rank, args.tol_coplanar)), args.out)
    return 0


def _write_mesh(mesh, args) -> None:
    if not args.out:
        return
    fmt = "obj" if args.obj else "json" if args.json else None
    save_mesh(mesh, args.out, fmt)


def cmd_bricard(args) -> int:
    seed = cons.DEFAULT_BRICARD_SEED
    if args.seed is not None:
        seed = np.asarray(args.seed, dtype=float).reshape(3, 3)
    mesh = cons.bricard_type1(seed)
    fb = flex_space(mesh, args.tol_rank)
    report = {"vertices": mesh.n_vertices, "faces": mesh.n_faces,
              "euler": mesh.euler_characteristic, "flex_dim": fb.dim,
              "total_mean_curvature": metric_summary(mesh).total_mean_curvature,
              "volume": metric_summary(mesh).volume}
    if args.out:
        _write_mesh(mesh, args)
    else:
        report["mesh"] = mesh_to_dict(mesh)
    sys.stdout.write(_dump(report))
    return 0


def counterexample_report(ce: cons.Counterexample, tol_rank: float = RANK_TOL,
                          tol_coplanar: float = COPLANAR_TOL) -> dict:
    mesh, w = ce.mesh, ce.field
    tol = tol_coplanar * mesh.diameter
    bad_glued = [r for r in cons.predicate_table(ce.glued.mesh, tol_coplanar * ce.glued.mesh.diameter)
                 if r["star_coplanar"] or r["three_edges_coplanar"]]
    return {
        "vertices": mesh.n_vertices,
        "faces": mesh.n_faces,
        "euler": mesh.euler_characteristic,
        "labels": ce.final.labels,
        "flex_dim": flex_space(mesh, tol_rank).dim,
        "flux": flux(mesh, w),
        "flux_t1": flux(ce.t1.mesh, ce.t1.field),
        "flux_t2": flux(ce.t2.mesh, ce.t2.field),
        "expected_flux": ce.expected_flux(),
        "axes": [d.tolist() for d in ce.axes],
        "predicates": cons.predicate_table(mesh, tol),
        "single_glue_failures": bad_glued,
        "field": w.tolist(),
    }


def cmd_counterexample(args) -> int:
    params = cons.CounterexampleParams()
    if args.params:
        try:
            data = json.loads(Path(args.params).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ParseError(f"{args.params}: {exc}") from None
        params = cons.CounterexampleParams.from_dict(data)
    ce = cons.build_counterexample(params)
    report = counterexample_report(ce, args.tol_rank, args.tol_coplanar)
    _write_mesh(ce.mesh, args)
    sys.stdout.write(_dump(report))
    return 0


def cmd_trace(args) -> int:
    mesh = load_mesh(args.mesh)
    config = TraceConfig(steps=args.steps, step_size=args.step_size,
                         newton_tol=args.tol_newton, rank_tol=args.tol_rank,
                         max_newton=args.max_newton, max_halvings=args.max_halvings,
                         gauge_face=args.gauge_face)
    frames, report = trace_flex(mesh, config)
    _emit(report.to_csv(), args.out)
    if args.obj_dir:
        export_frames(frames, args.obj_dir)
    return 0


def parse_l_values(values, range_text) -> list[float]:
    out = [float(x) for x in values or []]
    if range_text:
        try:
            start, step, stop = (float(x) for x in range_text.split(":"))
        except ValueError:
            raise InvalidParameter(f"range must look like start:step:stop, got {range_text!r}") from None
        if step <= 0 or stop < start:
            raise InvalidParameter(f"empty or backwards range {range_text!r}")
        count = int(np.floor((stop - start) / step + 1e-9)) + 1
        out += [round(start + k * step, 12) for k in range(count)]
    if not out:
        raise InvalidParameter("give --l values or --range")
    return sorted(out)


def deltak_rows(ls) -> list[dict]:
    rows = []
    for l in ls:
        closed = cons.delta_k_closed_form(l)
        m_mesh = metric_summary(cons.delta_k_mesh(l)).total_mean_curvature
        rows.append({"l": l, "M_mesh": m_mesh, "M_closed": closed.M, "phi": closed.phi,
                     "psi": closed.psi, "abs_diff": abs(m_mesh - closed.M),
                     "phi_printed": closed.phi_printed})
    return rows


def cmd_deltak(args) -> int:
    ls = parse_l_values(args.l, args.range)
    rows = deltak_rows(ls)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    cols = ["l", "M_mesh", "M_closed", "phi", "psi", "abs_diff", "phi_printed"]
    w.writerow(cols)
    for r in rows:
        w.writerow([f"{r[c]:.17g}" for c in cols])
    _emit(buf.getvalue(), args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="flexpoly", description="Rigidity and flexibility of closed triangulated polyhedra.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp):
        sp.add_argument("--out", help="output file (default: stdout)")
        sp.add_argument("--tol-rank", type=float, default=RANK_TOL)
        sp.add_argument("--tol-coplanar", type=float, default=COPLANAR_TOL,
                        help="coplanarity tolerance as a fraction of the mesh diameter")
        sp.add_argument("--config", help="JSON file whose keys override the flags")

    def formats(sp):
        g = sp.add_mutually_exclusive_group()
        g.add_argument("--json", action="store_true", help="write the mesh as JSON")
        g.add_argument("--obj", action="store_true", help="write the mesh as OBJ")

    sp = sub.add_parser("analyze", help="metrics, flex space and predicates of a mesh")
    sp.add_argument("mesh")
    common(sp)
    sp.set_defaults(func=cmd_analyze)

    sp = sub.add_parser("bricard", help="build a Bricard octahedron of type 1")
    sp.add_argument("--seed", type=float, nargs=9, metavar="X",
                    help="coordinates of A, B, V (nine numbers)")
    common(sp)
    formats(sp)
    sp.set_defaults(func=cmd_bricard)

    sp = sub.add_parser("counterexample", help="polyhedron with a flux-carrying infinitesimal flex")
    sp.add_argument("--params", help="JSON file with construction parameters")
    common(sp)
    formats(sp)
    sp.set_defaults(func=cmd_counterexample)

    sp = sub.add_parser("trace", help="follow a flex and sample M and V")
    sp.add_argument("mesh")
    sp.add_argument("--steps", type=int, default=200)
    sp.add_argument("--step-size", type=float, default=0.01)
    sp.add_argument("--tol-newton", type=float, default=1e-12)
    sp.add_argument("--max-newton", type=int, default=50)
    sp.add_argument("--max-halvings", type=int, default=8)
    sp.add_argument("--gauge-face", type=int, default=0)
    sp.add_argument("--obj-dir", help="write every frame as frame_NNNN.obj here")
    common(sp)
    sp.set_defaults(func=cmd_trace)

    sp = sub.add_parser("deltak", help="tabulate M(l) on the one-parameter family")
    sp.add_argument("--l", type=float, nargs="+")
    sp.add_argument("--range", help="start:step:stop, inclusive")
    common(sp)
    sp.set_defaults(func=cmd_deltak)
    return p


def _apply_config(args, parser) -> None:
    if not getattr(args, "config", None):
        return
    try:
        data = json.loads(Path(args.config).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        parser.exit(EXIT_ARGS, f"flexpoly: error: cannot read config: {exc}\n")
    if not isinstance(data, dict):
        parser.exit(EXIT_ARGS, "flexpoly: error: config must be a JSON object\n")
    for key, value in data.items():
        dest = key.replace("-", "_")
        if dest in ("func", "command", "config") or not hasattr(args, dest):
            parser.exit(EXIT_ARGS, f"flexpoly: error: unknown config key {key!r}\n")
        setattr(args, dest, value)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _apply_config(args, parser)
    try:
        return args.func(args)
    except FlexError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ARGS


if __name__ == "__main__":
    sys.exit(main())
