"""Closed oriented triangle meshes and their metric quantities.

A :class:`Mesh` is an immutable pair of vertex coordinates and oriented
triangles. Construction through :func:`build_mesh` enforces that the
surface is a closed, consistently oriented 2-manifold; self-intersections
of the embedding are allowed and never checked.

Dihedral angles use a signed-bending convention built from outward face
normals, which stays well defined on self-intersecting surfaces::

    alpha = pi - atan2((n1 x n2) . e, n1 . n2)

with ``e`` the unit edge vector directed as the edge runs in the first
incident face. Convex edges give ``alpha < pi``, flat edges ``alpha = pi``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    DegenerateFace,
    IndexOutOfRange,
    InconsistentOrientation,
    InvalidBarycentric,
    MeshValidationError,
    NonManifoldEdge,
    NotRealizable,
    UnreferencedVertex,
)

DEGENERATE_AREA_TOL = 1e-12
COPLANAR_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class Mesh:
    """Vertex coordinates plus oriented triangles.

    Use :func:`build_mesh` rather than the constructor; it validates.
    """

    vertices: np.ndarray
    faces: np.ndarray

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_faces(self) -> int:
        return len(self.faces)

    @cached_property
    def edges(self) -> list[tuple[int, int]]:
        """Undirected edges ``(i, j)`` with ``i < j``, sorted lexicographically."""
        return sorted(self.edge_faces)

    @property
    def n_edges(self) -> int:
        return len(self.edge_faces)

    @cached_property
    def edge_faces(self) -> dict[tuple[int, int], tuple[int, int]]:
        """Map from undirected edge to its two incident faces.

        The first face is the one in which the edge runs ``i -> j`` for the
        key ``(i, j)``, i.e. from the lower to the higher index.
        """
        directed = {}
        for f, (a, b, c) in enumerate(self.faces):
            for u, v in ((a, b), (b, c), (c, a)):
                directed[(int(u), int(v))] = f
        out = {}
        for (u, v), f in directed.items():
            if u < v:
                out[(u, v)] = (f, directed[(v, u)])
        return out

    @property
    def euler_characteristic(self) -> int:
        return self.n_vertices - self.n_edges + self.n_faces

    @cached_property
    def diameter(self) -> float:
        d = self.vertices[:, None, :] - self.vertices[None, :, :]
        return float(np.sqrt((d ** 2).sum(-1)).max())

    @cached_property
    def neighbors(self) -> list[list[int]]:
        nb: list[set[int]] = [set() for _ in range(self.n_vertices)]
        for i, j in self.edges:
            nb[i].add(j)
            nb[j].add(i)
        return [sorted(s) for s in nb]

    def face_normals(self) -> np.ndarray:
        """Unnormalized normals ``(p_b - p_a) x (p_c - p_a)``; length is twice the area."""
        p = self.vertices[self.faces]
        return np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0])

    def face_areas(self) -> np.ndarray:
        return 0.5 * np.linalg.norm(self.face_normals(), axis=1)

    def displaced(self, field: np.ndarray, t: float) -> "Mesh":
        """Validated mesh with vertices ``p + t * field``."""
        return build_mesh(self.vertices + t * np.asarray(field, dtype=float), self.faces)

    def reversed(self) -> "Mesh":
        return build_mesh(self.vertices, self.faces[:, ::-1])


@dataclass(frozen=True)
class EdgeRecord:
    endpoints: tuple[int, int]
    faces: tuple[int, int]
    length: float
    dihedral: float


@dataclass(frozen=True)
class MetricSummary:
    total_mean_curvature: float
    volume: float
    euler_characteristic: int


def build_mesh(vertices, faces) -> Mesh:
    """Validate and freeze a closed oriented triangle mesh.

    Raises
    ------
    IndexOutOfRange
        A face references a vertex that does not exist.
    NonManifoldEdge
        Some undirected edge is not shared by exactly two faces.
    InconsistentOrientation
        Some edge is traversed twice in the same direction.
    DegenerateFace
        A face repeats a vertex or has area below ``1e-12 * diameter**2``.
    """
    v = np.array(vertices, dtype=float)
    if v.ndim != 2 or v.shape[1] != 3 or len(v) == 0:
        raise MeshValidationError(f"vertices must be an (n, 3) array, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise MeshValidationError("vertex coordinates must be finite")
    f = np.array(faces)
    if f.size == 0 or f.ndim != 2 or f.shape[1] != 3:
        raise MeshValidationError(f"faces must be an (m, 3) array, got shape {f.shape}")
    if not np.issubdtype(f.dtype, np.integer):
        if not np.all(np.equal(np.mod(f, 1), 0)):
            raise MeshValidationError("face indices must be integers")
        f = f.astype(np.int64)
    f = f.astype(np.int64)

    n = len(v)
    bad = np.argwhere((f < 0) | (f >= n))
    if len(bad):
        k, c = bad[0]
        raise IndexOutOfRange(f"face {k} slot {c}: index {f[k, c]} not in [0, {n})")

    for k, (a, b, c) in enumerate(f):
        if a == b or b == c or a == c:
            raise DegenerateFace(f"face {k} repeats a vertex: {(int(a), int(b), int(c))}")

    counts: dict[tuple[int, int], list[int]] = {}
    for k, (a, b, c) in enumerate(f):
        for u, w in ((a, b), (b, c), (c, a)):
            counts.setdefault((int(min(u, w)), int(max(u, w))), []).append(k)
    for e, fs in sorted(counts.items()):
        if len(fs) != 2:
            raise NonManifoldEdge(f"edge {e} lies in {len(fs)} faces {fs}, expected 2")
    seen = set()
    for k, (a, b, c) in enumerate(f):
        for u, w in ((a, b), (b, c), (c, a)):
            if (u, w) in seen:
                raise InconsistentOrientation(
                    f"directed edge ({u}, {w}) appears twice (second time in face {k})")
            seen.add((int(u), int(w)))

    usage = np.bincount(f.ravel(), minlength=n)
    lonely = np.flatnonzero(usage < 3)
    if len(lonely):
        raise UnreferencedVertex(
            f"vertex {lonely[0]} is used by {usage[lonely[0]]} faces, need at least 3")

    v.setflags(write=False)
    f.setflags(write=False)
    mesh = Mesh(v, f)
    areas = mesh.face_areas()
    limit = DEGENERATE_AREA_TOL * mesh.diameter ** 2
    small = np.flatnonzero(areas < limit)
    if len(small):
        k = small[0]
        raise DegenerateFace(f"face {k} has area {areas[k]:.3e} below {limit:.3e}")
    return mesh


def _edge_key(edge) -> tuple[int, int]:
    if isinstance(edge, EdgeRecord):
        edge = edge.endpoints
    i, j = int(edge[0]), int(edge[1])
    return (i, j) if i < j else (j, i)


def dihedral_angle(mesh: Mesh, edge) -> float:
    """Interior dihedral angle at ``edge`` in radians, in ``(0, 2*pi)``.

    ``edge`` may be an :class:`EdgeRecord` or a vertex-index pair.
    """
    key = _edge_key(edge)
    try:
        f1, f2 = mesh.edge_faces[key]
    except KeyError:
        raise KeyError(f"edge {key} is not an edge of the mesh") from None
    return float(_dihedrals(mesh, [key], [(f1, f2)])[0])


def _dihedrals(mesh: Mesh, keys, pairs) -> np.ndarray:
    normals = mesh.face_normals()
    lens = np.linalg.norm(normals, axis=1)
    if np.any(lens == 0):
        raise DegenerateFace("zero-area face")
    normals = normals / lens[:, None]
    keys = np.asarray(keys)
    pairs = np.asarray(pairs)
    n1 = normals[pairs[:, 0]]
    n2 = normals[pairs[:, 1]]
    e = mesh.vertices[keys[:, 1]] - mesh.vertices[keys[:, 0]]
    e /= np.linalg.norm(e, axis=1)[:, None]
    theta = np.arctan2(np.einsum("ij,ij->i", np.cross(n1, n2), e),
                       np.einsum("ij,ij->i", n1, n2))
    return np.pi - theta


def edge_records(mesh: Mesh) -> list[EdgeRecord]:
    keys = mesh.edges
    pairs = [mesh.edge_faces[k] for k in keys]
    alpha = _dihedrals(mesh, keys, pairs)
    ks = np.asarray(keys)
    lengths = np.linalg.norm(mesh.vertices[ks[:, 0]] - mesh.vertices[ks[:, 1]], axis=1)
    return [EdgeRecord(k, p, float(length), float(a))
            for k, p, length, a in zip(keys, pairs, lengths, alpha)]


def edge_lengths(mesh: Mesh) -> np.ndarray:
    ks = np.asarray(mesh.edges)
    return np.linalg.norm(mesh.vertices[ks[:, 0]] - mesh.vertices[ks[:, 1]], axis=1)


def total_mean_curvature(mesh: Mesh) -> float:
    """Half the sum over edges of ``length * (pi - dihedral)``."""
    keys = mesh.edges
    alpha = _dihedrals(mesh, keys, [mesh.edge_faces[k] for k in keys])
    return float(0.5 * np.sum(edge_lengths(mesh) * (np.pi - alpha)))


def oriented_volume(mesh: Mesh) -> float:
    p = mesh.vertices[mesh.faces]
    return float(np.sum(np.einsum("ij,ij->i", p[:, 0], np.cross(p[:, 1], p[:, 2]))) / 6.0)


def metric_summary(mesh: Mesh) -> MetricSummary:
    return MetricSummary(total_mean_curvature(mesh), oriented_volume(mesh),
                         mesh.euler_characteristic)


def cayley_menger_volume(lengths: Sequence[float], tol: float = 1e-12) -> float:
    """Unsigned tetrahedron volume from its six edge lengths.

    Lengths are ordered ``(d01, d02, d03, d12, d13, d23)``. The 5x5
    Cayley-Menger determinant equals ``288 * V**2``. Determinants within
    ``tol`` of zero (relative to the sixth power of the longest edge) give
    zero; more negative ones raise :class:`NotRealizable`.
    """
    d = np.asarray(lengths, dtype=float)
    if d.shape != (6,):
        raise ValueError("need exactly six edge lengths")
    if np.any(d <= 0) or not np.all(np.isfinite(d)):
        raise NotRealizable(f"edge lengths must be positive and finite: {d.tolist()}")
    sq = d ** 2
    idx = {(0, 1): 0, (0, 2): 1, (0, 3): 2, (1, 2): 3, (1, 3): 4, (2, 3): 5}
    cm = np.ones((5, 5))
    cm[0, 0] = 0.0
    for i in range(4):
        cm[i + 1, i + 1] = 0.0
    for (i, j), k in idx.items():
        cm[i + 1, j + 1] = cm[j + 1, i + 1] = sq[k]
    det = float(np.linalg.det(cm))
    scale = float(sq.max()) ** 3
    if det < -tol * scale:
        raise NotRealizable(f"Cayley-Menger determinant {det:.3e} is negative")
    if det <= tol * scale:
        return 0.0
    return float(np.sqrt(det / 288.0))


def _default_tol(mesh: Mesh, tol: float | None) -> float:
    return COPLANAR_TOL * mesh.diameter if tol is None else tol


def vertex_star_coplanar(mesh: Mesh, v: int, tol: float | None = None) -> bool:
    """True if ``v`` and all its neighbours lie within ``tol`` of one plane."""
    pts = mesh.vertices[[v] + mesh.neighbors[v]]
    centered = pts - pts.mean(axis=0)
    normal = np.linalg.svd(centered)[2][-1]
    return bool(np.abs(centered @ normal).max() <= _default_tol(mesh, tol))


def three_incident_edges_coplanar(mesh: Mesh, v: int, tol: float | None = None) -> bool:
    """True if some three edges at ``v`` have a near-zero triple product."""
    dirs = mesh.vertices[mesh.neighbors[v]] - mesh.vertices[v]
    dirs = dirs / np.linalg.norm(dirs, axis=1)[:, None]
    tol = _default_tol(mesh, tol)
    for a, b, c in itertools.combinations(range(len(dirs)), 3):
        if abs(np.dot(dirs[a], np.cross(dirs[b], dirs[c]))) < tol:
            return True
    return False


def subdivide_face(mesh: Mesh, face: int, barycentric: Iterable[float]) -> Mesh:
    """Replace face ``(a, b, c)`` by three triangles around an interior point.

    The new vertex is appended last; the new faces are ``(a, b, v)``,
    ``(b, c, v)``, ``(c, a, v)``.
    """
    w = np.asarray(list(barycentric), dtype=float)
    if w.shape != (3,) or np.any(w <= 0) or abs(w.sum() - 1.0) > 1e-12:
        raise InvalidBarycentric(
            f"barycentric weights must be three positive numbers summing to 1, got {w.tolist()}")
    if not 0 <= face < mesh.n_faces:
        raise IndexError(f"face {face} out of range")
    a, b, c = (int(x) for x in mesh.faces[face])
    p = w @ mesh.vertices[[a, b, c]]
    nv = mesh.n_vertices
    faces = [tuple(f) for k, f in enumerate(mesh.faces.tolist()) if k != face]
    faces += [(a, b, nv), (b, c, nv), (c, a, nv)]
    return build_mesh(np.vstack([mesh.vertices, p]), faces)


def split_edge(mesh: Mesh, i: int, j: int, t: float) -> Mesh:
    """Insert the point ``(1 - t) p_i + t p_j`` on edge ``(i, j)``, 0 < t < 1.

    Both incident triangles are split in two; the new vertex is appended last.
    """
    if not 0.0 < t < 1.0:
        raise InvalidBarycentric(f"edge parameter must lie in (0, 1), got {t}")
    key = _edge_key((i, j))
    if key not in mesh.edge_faces:
        raise KeyError(f"edge {key} is not an edge of the mesh")
    p = (1.0 - t) * mesh.vertices[i] + t * mesh.vertices[j]
    nv = mesh.n_vertices
    touched = set(mesh.edge_faces[key])
    faces = []
    for k, f in enumerate(mesh.faces.tolist()):
        if k not in touched:
            faces.append(tuple(f))
            continue
        # rotate so the split edge is (f[0], f[1])
        for r in range(3):
            g = f[r:] + f[:r]
            if {g[0], g[1]} == set(key):
                break
        faces += [(g[0], nv, g[2]), (nv, g[1], g[2])]
    return build_mesh(np.vstack([mesh.vertices, p]), faces)
