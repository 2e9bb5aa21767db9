"""Infinitesimal flexes of triangulated surfaces.

Vertex fields are ``(n, 3)`` arrays, one velocity per vertex, understood as
the piecewise-linear field obtained by interpolating over each face. Such a
field is an infinitesimal flex when every edge satisfies
``(p_i - p_j) . (w_i - w_j) = 0``; on a triangle this is the same as
first-order preservation of every curve length inside it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateVertexSet,
    ExtensionInconsistent,
    RankGapAmbiguous,
    UnderdeterminedExtension,
)
from .mesh import Mesh, total_mean_curvature

RANK_TOL = 1e-8
MIN_RANK_GAP = 100.0


@dataclass(frozen=True)
class FlexBasis:
    """Orthonormal basis of infinitesimal flexes modulo trivial motions.

    Attributes
    ----------
    basis : ndarray, shape (k, n, 3)
        Fields orthonormal in R^{3n} and orthogonal to the rigid motions.
    singular_values : ndarray
        Full singular spectrum of the rigidity matrix, descending.
    tol : float
        Relative threshold used for the rank decision.
    kernel_dim : int
        Dimension of the rigidity-matrix kernel, trivial motions included.
    """

    basis: np.ndarray
    singular_values: np.ndarray
    tol: float
    kernel_dim: int

    @property
    def dim(self) -> int:
        return len(self.basis)


def rigidity_matrix(mesh: Mesh) -> np.ndarray:
    """|E| x 3|V| matrix; row ``(i, j)`` has ``p_i - p_j`` in block i and ``p_j - p_i`` in block j."""
    edges = np.asarray(mesh.edges)
    n = mesh.n_vertices
    diff = mesh.vertices[edges[:, 0]] - mesh.vertices[edges[:, 1]]
    R = np.zeros((len(edges), n, 3))
    rows = np.arange(len(edges))
    R[rows, edges[:, 0]] = diff
    R[rows, edges[:, 1]] = -diff
    return R.reshape(len(edges), 3 * n)


def trivial_motion_basis(mesh: Mesh) -> np.ndarray:
    """Orthonormalized translations and infinitesimal rotations, shape (6, n, 3)."""
    p = mesh.vertices
    n = len(p)
    fields = [np.tile(e, (n, 1)) for e in np.eye(3)]
    fields += [np.cross(e, p) for e in np.eye(3)]
    T = np.stack([f.ravel() for f in fields], axis=1)
    q, r = np.linalg.qr(T)
    d = np.abs(np.diag(r))
    if d.min() <= 1e-10 * d.max():
        raise DegenerateVertexSet("vertices are collinear; rigid motions are not 6-dimensional")
    return q.T.reshape(6, n, 3)


def flex_space(mesh: Mesh, tol: float = RANK_TOL) -> FlexBasis:
    """Nontrivial infinitesimal flexes of ``mesh``.

    Singular values below ``tol * sigma_max`` count as null directions. The
    decision is refused with :class:`RankGapAmbiguous` when the smallest
    kept singular value is less than 100 times the largest dropped one.
    """
    R = rigidity_matrix(mesh)
    n3 = R.shape[1]
    _, s, vt = np.linalg.svd(R)
    cutoff = tol * s[0]
    rank = int(np.sum(s >= cutoff))
    dropped = s[rank:]
    if rank and len(dropped) and dropped.max() > 0:
        if s[rank - 1] < MIN_RANK_GAP * dropped.max():
            raise RankGapAmbiguous(
                f"rank decision unsafe: smallest kept singular value {s[rank - 1]:.3e}, "
                f"largest dropped {dropped.max():.3e}")
    kernel = vt[rank:].T
    T = trivial_motion_basis(mesh).reshape(6, n3).T
    projected = kernel - T @ (T.T @ kernel)
    if projected.shape[1]:
        u, sp, _ = np.linalg.svd(projected, full_matrices=False)
        basis = u[:, sp > 0.5].T
    else:
        basis = np.zeros((0, n3))
    basis = _fix_signs(basis)
    return FlexBasis(basis.reshape(-1, mesh.n_vertices, 3), s, tol, n3 - rank)


def _fix_signs(basis: np.ndarray) -> np.ndarray:
    # make the largest-magnitude entry positive so bases are reproducible
    out = basis.copy()
    for k, b in enumerate(out):
        if b[np.argmax(np.abs(b))] < 0:
            out[k] = -b
    return out


def flux(mesh: Mesh, w) -> float:
    """Exact flux of the face-wise linear interpolant of ``w`` through ``mesh``."""
    w = np.asarray(w, dtype=float)
    _check_field(mesh, w)
    return float(np.einsum("ij,ij->", mesh.face_normals(), w[mesh.faces].sum(axis=1)) / 6.0)


def volume_derivative(mesh: Mesh, w) -> float:
    """Derivative at t = 0 of the oriented volume of ``p + t w``."""
    w = np.asarray(w, dtype=float)
    _check_field(mesh, w)
    p = mesh.vertices[mesh.faces]
    q = w[mesh.faces]

    def det(a, b, c):
        return np.einsum("ij,ij->i", a, np.cross(b, c))

    total = (det(q[:, 0], p[:, 1], p[:, 2]) + det(p[:, 0], q[:, 1], p[:, 2])
             + det(p[:, 0], p[:, 1], q[:, 2]))
    return float(total.sum() / 6.0)


def tmc_directional_derivative(mesh: Mesh, w, h: float | None = None) -> float:
    """Central difference of total mean curvature along ``p + t w``.

    The default step is ``1e-5 * diameter / max|w_i|``.
    """
    w = np.asarray(w, dtype=float)
    _check_field(mesh, w)
    if h is None:
        h = 1e-5 * mesh.diameter / np.abs(w).max()
    plus = total_mean_curvature(mesh.displaced(w, h))
    minus = total_mean_curvature(mesh.displaced(w, -h))
    return (plus - minus) / (2.0 * h)


def constraint_residual(mesh: Mesh, w) -> np.ndarray:
    """Per-edge values of ``(p_i - p_j) . (w_i - w_j)``."""
    return rigidity_matrix(mesh) @ np.asarray(w, dtype=float).ravel()


def extend_field(mesh: Mesh, known: dict, rank_tol: float = 1e-10) -> np.ndarray:
    """Complete a partially prescribed field to an infinitesimal flex.

    ``known`` maps vertex index to a 3-vector. The remaining vertices are
    solved for in least squares; the result must satisfy every edge
    constraint to ``1e-8 * diameter * max|known|``.

    Raises
    ------
    UnderdeterminedExtension
        The unknown vertices are not pinned down uniquely.
    ExtensionInconsistent
        No completion satisfies all edge constraints.
    """
    if not known:
        raise ValueError("known must prescribe at least one vertex")
    n = mesh.n_vertices
    w = np.zeros((n, 3))
    fixed = np.zeros(n, dtype=bool)
    for i, value in known.items():
        w[int(i)] = np.asarray(value, dtype=float)
        fixed[int(i)] = True
    R = rigidity_matrix(mesh)
    mask = np.repeat(~fixed, 3)
    if mask.any():
        A = R[:, mask]
        b = -R[:, ~mask] @ w[fixed].ravel()
        s = np.linalg.svd(A, compute_uv=False)
        rank = int(np.sum(s > rank_tol * s[0])) if s.size and s[0] > 0 else 0
        if rank < A.shape[1]:
            nullity = A.shape[1] - rank
            raise UnderdeterminedExtension(
                f"extension not unique: {nullity}-dimensional family of completions", nullity)
        sol = np.linalg.lstsq(A, b, rcond=None)[0]
        w[~fixed] = sol.reshape(-1, 3)
    scale = max(np.abs(w[fixed]).max(), np.finfo(float).tiny)
    res = np.abs(R @ w.ravel()).max() if len(R) else 0.0
    if res > 1e-8 * mesh.diameter * scale:
        raise ExtensionInconsistent(
            f"edge constraints violated by {res:.3e} (limit {1e-8 * mesh.diameter * scale:.3e})")
    return w


def remove_rigid_part(mesh: Mesh, w, anchors) -> np.ndarray:
    """Subtract the rigid motion that best matches ``w`` on ``anchors``.

    Useful for reading off where an infinitesimal flex is supported: the
    result is the representative of ``w`` modulo rigid motions that is as
    small as possible on the anchor vertices.
    """
    w = np.asarray(w, dtype=float)
    T = trivial_motion_basis(mesh)
    anchors = list(anchors)
    A = T[:, anchors].reshape(6, -1).T
    c = np.linalg.lstsq(A, w[anchors].ravel(), rcond=None)[0]
    return w - np.tensordot(c, T, axes=1)


def _check_field(mesh: Mesh, w: np.ndarray) -> None:
    if w.shape != (mesh.n_vertices, 3):
        raise ValueError(f"field shape {w.shape} does not match {mesh.n_vertices} vertices")
