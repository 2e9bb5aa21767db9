"""Numerical continuation along the edge-length constraint manifold.

The unknowns are vertex positions restricted to a gauge slice that removes
rigid motions: one vertex is fixed, a second slides along the initial
direction of an edge, a third stays in the initial plane of a face. On
that slice the squared-length constraints ``|p_i - p_j|^2 = L_e^2`` define
the flex as a curve, which is followed by a tangent predictor and a
Gauss-Newton corrector.
"""

from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.linalg import null_space

from .errors import GaugeConflict, NewtonDivergence, NoFlexDirection
from .io import save_mesh
from .mesh import Mesh, MetricSummary, build_mesh, edge_lengths, metric_summary
from .rigidity import RANK_TOL, flex_space, rigidity_matrix, trivial_motion_basis

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class TraceConfig:
    steps: int = 200
    step_size: float = 0.01
    newton_tol: float = 1e-12
    max_newton: int = 50
    drift_tol: float = 1e-10
    rank_tol: float = RANK_TOL
    max_halvings: int = 8
    gauge_face: int = 0

    def __post_init__(self):
        if self.steps < 1 or self.step_size <= 0 or self.newton_tol <= 0:
            raise ValueError("need steps >= 1, step_size > 0 and newton_tol > 0")


@dataclass(frozen=True)
class TraceRow:
    step: int
    t: float
    M: float
    V: float
    max_edge_drift: float
    newton_iters: int


@dataclass
class TraceReport:
    rows: list[TraceRow]
    initial: MetricSummary
    gauge_face: int = 0
    halvings: list[int] = field(default_factory=list)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.rows], dtype=float)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["step", "t", "M", "V", "max_edge_drift", "newton_iters"])
        for r in self.rows:
            w.writerow([r.step, f"{r.t:.17g}", f"{r.M:.17g}", f"{r.V:.17g}",
                        f"{r.max_edge_drift:.17g}", r.newton_iters])
        return buf.getvalue()


class _Gauge:
    """Orthonormal coordinates on the slice through the initial configuration."""

    def __init__(self, mesh: Mesh, face: int):
        n = mesh.n_vertices
        v0, v1, v2 = (int(i) for i in mesh.faces[face])
        p = mesh.vertices
        e1 = p[v1] - p[v0]
        e1 /= np.linalg.norm(e1)
        e3 = np.cross(e1, p[v2] - p[v0])
        e3 /= np.linalg.norm(e3)
        e2 = np.cross(e3, e1)
        pins = [(v0, e1), (v0, e2), (v0, e3), (v1, e2), (v1, e3), (v2, e3)]
        C = np.zeros((6, 3 * n))
        for k, (v, e) in enumerate(pins):
            C[k, 3 * v:3 * v + 3] = e
        T = trivial_motion_basis(mesh).reshape(6, -1).T
        # the slice must be transversal to rigid motions
        sv = np.linalg.svd(C @ T, compute_uv=False)
        if sv.min() < 1e-8 * sv.max():
            raise GaugeConflict(f"gauge on face {face} does not remove all rigid motions")
        self.face = face
        self.basis = null_space(C)


def _constraints(x: np.ndarray, edges: np.ndarray, sq_lengths: np.ndarray) -> np.ndarray:
    d = x[edges[:, 0]] - x[edges[:, 1]]
    return np.einsum("ij,ij->i", d, d) - sq_lengths


def _max_drift(x, edges, lengths) -> float:
    cur = np.linalg.norm(x[edges[:, 0]] - x[edges[:, 1]], axis=1)
    return float(np.max(np.abs(cur - lengths) / lengths))


def trace_flex(mesh: Mesh, config: TraceConfig = TraceConfig()) -> tuple[list[Mesh], TraceReport]:
    """Follow a flex of ``mesh`` for ``config.steps`` accepted steps.

    Returns the frames (initial mesh first) and a report with one row per
    frame. Each predictor step has length ``step_size * diameter`` in
    R^{3n}; failed corrections halve the step up to ``max_halvings`` times.

    Raises
    ------
    NoFlexDirection
        The mesh has no nontrivial infinitesimal flex.
    NewtonDivergence
        The corrector fails even after all halvings.
    GaugeConflict
        Neither the requested gauge face nor the next one gives a valid slice.
    """
    if flex_space(mesh, config.rank_tol).dim == 0:
        raise NoFlexDirection("mesh is infinitesimally rigid; nothing to trace")
    try:
        gauge = _Gauge(mesh, config.gauge_face)
    except GaugeConflict:
        log.warning("gauge face %d rejected, repinning", config.gauge_face)
        gauge = _Gauge(mesh, (config.gauge_face + 1) % mesh.n_faces)

    edges = np.asarray(mesh.edges)
    lengths = edge_lengths(mesh)
    sq = lengths ** 2
    diam = mesh.diameter
    B = gauge.basis
    g_tol = config.newton_tol * diam ** 2
    h0 = config.step_size * diam

    x = mesh.vertices.copy()
    frames = [mesh]
    summary = metric_summary(mesh)
    rows = [TraceRow(0, 0.0, summary.total_mean_curvature, summary.volume, 0.0, 0)]
    halvings = []
    t = 0.0
    prev = None
    for step in range(1, config.steps + 1):
        tangent = _tangent(x, edges, B, config.rank_tol, prev)
        h = h0
        for attempt in range(config.max_halvings + 1):
            result = _correct(x + h * (B @ tangent).reshape(-1, 3), edges, sq, lengths, B,
                              g_tol, config)
            if result is not None:
                break
            h *= 0.5
        else:
            raise NewtonDivergence(
                f"corrector failed at step {step} after {config.max_halvings} halvings")
        x_new, iters = result
        frame = build_mesh(x_new, mesh.faces)
        disp = (x_new - x).ravel()
        t += float(np.linalg.norm(disp)) / diam
        s = metric_summary(frame)
        rows.append(TraceRow(step, t, s.total_mean_curvature, s.volume,
                             _max_drift(x_new, edges, lengths), iters))
        frames.append(frame)
        halvings.append(attempt)
        prev = tangent
        x = x_new
    return frames, TraceReport(rows, summary, gauge.face, halvings)


def _tangent(x, edges, B, rank_tol, prev):
    J = _jacobian(x, edges) @ B
    _, s, vt = np.linalg.svd(J)
    # columns beyond the row count are always in the kernel
    rank = int(np.sum(s >= rank_tol * s[0]))
    k = max(B.shape[1] - rank, 1)
    K = vt[-k:].T
    if prev is None:
        u = K[:, 0]
    else:
        u = K @ (K.T @ prev)
        if np.linalg.norm(u) < 1e-12:
            u = K[:, 0]
    u = u / np.linalg.norm(u)
    if prev is not None and np.dot(u, prev) < 0:
        u = -u
    return u


def _jacobian(x, edges):
    n = len(x)
    d = x[edges[:, 0]] - x[edges[:, 1]]
    J = np.zeros((len(edges), n, 3))
    rows = np.arange(len(edges))
    J[rows, edges[:, 0]] = 2.0 * d
    J[rows, edges[:, 1]] = -2.0 * d
    return J.reshape(len(edges), 3 * n)


def _correct(x, edges, sq, lengths, B, g_tol, config):
    for it in range(config.max_newton + 1):
        g = _constraints(x, edges, sq)
        if (np.abs(g).max() <= g_tol
                and _max_drift(x, edges, lengths) <= config.drift_tol):
            return x, it
        if it == config.max_newton or not np.all(np.isfinite(g)):
            return None
        J = _jacobian(x, edges) @ B
        du = np.linalg.lstsq(J, -g, rcond=config.rank_tol)[0]
        x = x + (B @ du).reshape(-1, 3)
    return None


def resample_invariants(trace: list[Mesh]) -> TraceReport:
    """Recompute M, V, arc length and drift from the frames alone."""
    if not trace:
        raise ValueError("empty trace")
    first = trace[0]
    lengths = edge_lengths(first)
    diam = first.diameter
    rows = []
    t = 0.0
    for k, frame in enumerate(trace):
        if k:
            t += float(np.linalg.norm(frame.vertices - trace[k - 1].vertices)) / diam
        s = metric_summary(frame)
        drift = float(np.max(np.abs(edge_lengths(frame) - lengths) / lengths))
        rows.append(TraceRow(k, t, s.total_mean_curvature, s.volume, drift, 0))
    return TraceReport(rows, metric_summary(first))


def export_frames(frames: list[Mesh], directory) -> list[Path]:
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for k, frame in enumerate(frames):
        path = out / f"frame_{k:04d}.obj"
        save_mesh(frame, path, "obj")
        paths.append(path)
    return paths


def flex_velocity_capture(frames: list[Mesh], rank_tol: float = RANK_TOL) -> np.ndarray:
    """Fraction of each frame-to-frame displacement lying in the flex kernel.

    For every consecutive pair, the difference quotient is projected onto
    the kernel of the rigidity matrix of the earlier frame (rigid motions
    included); the returned values are the norm ratios.
    """
    out = []
    for a, b in zip(frames, frames[1:]):
        d = (b.vertices - a.vertices).ravel()
        _, s, vt = np.linalg.svd(rigidity_matrix(a))
        rank = int(np.sum(s >= rank_tol * s[0]))
        K = vt[rank:].T
        out.append(np.linalg.norm(K.T @ d) / np.linalg.norm(d))
    return np.array(out)
