"""Builders for the polyhedra used in the rigidity experiments.

* ``build_t1`` / ``build_t2``: a tetrahedron with one face subdivided by an
  interior vertex, then with one of the new triangles replaced by a
  pyramid. Both carry an infinitesimal flex whose flux is nonzero.
* ``bricard_type1``: line-symmetric flexible octahedron, symmetric under
  the half-turn about the z-axis.
* ``glue_bricard`` / ``build_counterexample``: replace two adjacent
  triangles of a mesh by the rest of a Bricard octahedron built on them,
  carrying the flex along.
* ``delta_k_mesh`` / ``delta_k_closed_form``: the one-parameter family with
  unit base triangle and lateral edges of length ``l``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    CoplanarApex,
    DegenerateFace,
    InvalidBarycentric,
    InvalidParameter,
    InvalidSubdivision,
    MeshValidationError,
    PredicateFailureExhausted,
)
from .mesh import (
    Mesh,
    build_mesh,
    oriented_volume,
    split_edge,
    subdivide_face,
    three_incident_edges_coplanar,
    vertex_star_coplanar,
)
from .rigidity import extend_field

SQRT3 = np.sqrt(3.0)
DELTA_K_MIN_L = 1.0 / SQRT3


@dataclass(frozen=True)
class FlexedMesh:
    """A mesh with an infinitesimal flex and named vertices."""

    mesh: Mesh
    field: np.ndarray
    labels: dict[str, int]

    def __iter__(self):
        # allows ``mesh, w = build_t1(...)``
        return iter((self.mesh, self.field))


# --- simple solids ---------------------------------------------------------

def tetrahedron_mesh(points) -> Mesh:
    """Tetrahedron on four points, faces oriented outward."""
    faces = np.array([(0, 1, 2), (0, 2, 3), (0, 3, 1), (1, 3, 2)])
    mesh = build_mesh(points, faces)
    if oriented_volume(mesh) < 0:
        mesh = mesh.reversed()
    return mesh


def regular_tetrahedron() -> Mesh:
    """Unit-edge regular tetrahedron on the base B=(0,0,0), C=(1,0,0), D=(1/2,sqrt3/2,0)."""
    return delta_k_mesh(1.0)


def cube_mesh(size: float = 1.0) -> Mesh:
    """Axis-aligned cube with one diagonal per square face, outward orientation."""
    v = np.array(list(itertools.product([0.0, 1.0], repeat=3))) * size
    quads = [(0, 1, 3, 2), (4, 6, 7, 5), (0, 4, 5, 1), (2, 3, 7, 6), (0, 2, 6, 4), (1, 5, 7, 3)]
    faces = []
    for a, b, c, d in quads:
        faces += [(a, b, c), (a, c, d)]
    mesh = build_mesh(v, faces)
    if oriented_volume(mesh) < 0:
        mesh = mesh.reversed()
    return mesh


def octahedron_faces(a, b, v, a1, b1, v1) -> list[tuple[int, int, int]]:
    """Faces of the octahedron with poles ``v``, ``v1`` and equator ``a, b, a1, b1``.

    The disk around ``v`` is ``(a,b,v), (b,a1,v), (a1,b1,v), (b1,a,v)``; the
    disk around ``v1`` is its image with reversed orientation so the two
    glue into a consistently oriented surface.
    """
    return [(a, b, v), (b, a1, v), (a1, b1, v), (b1, a, v),
            (b1, a1, v1), (a, b1, v1), (b, a, v1), (a1, b, v1)]


# --- T1, T2 -----------------------------------------------------------------

DEFAULT_TETRAHEDRON = ((0.0, 0.0, 0.0), (2.0, 0.0, 0.0), (0.6, 1.7, 0.0), (0.8, 0.5, 1.5))
DEFAULT_BARYCENTRIC = (0.35, 0.25, 0.40)
DEFAULT_APEX = (0.4, 0.7, -0.8)


def build_t1(tetrahedron=DEFAULT_TETRAHEDRON, barycentric=DEFAULT_BARYCENTRIC,
             magnitude: float = 1.0) -> FlexedMesh:
    """Tetrahedron ABCD with face ABC split at an interior point V.

    The flex is zero at A, B, C, D and ``magnitude`` times the outward unit
    normal of ABC at V. Vertex order is A, B, C, D, V.
    """
    pts = np.asarray(tetrahedron, dtype=float)
    if pts.shape != (4, 3):
        raise InvalidParameter("tetrahedron needs four 3D points")
    w = np.asarray(barycentric, dtype=float)
    if w.shape != (3,) or np.any(w <= 0) or abs(w.sum() - 1.0) > 1e-12:
        raise InvalidBarycentric(f"V must be strictly inside ABC, got weights {w.tolist()}")
    tet = tetrahedron_mesh(pts)
    (k,) = [i for i, f in enumerate(tet.faces.tolist()) if sorted(f) == [0, 1, 2]]
    face = tet.faces[k].tolist()
    # reorder weights to match the (possibly flipped) face ordering
    mesh = subdivide_face(tet, k, [w[i] for i in face])
    normal = tet.face_normals()[k]
    normal /= np.linalg.norm(normal)
    field_ = np.zeros((5, 3))
    field_[4] = magnitude * normal
    return FlexedMesh(mesh, field_, {"A": 0, "B": 1, "C": 2, "D": 3, "V": 4})


def _plane_distance(points, q) -> float:
    a, b, c = points
    n = np.cross(b - a, c - a)
    return abs(np.dot(q - a, n)) / np.linalg.norm(n)


def cap_face(mesh: Mesh, face: int, apex) -> Mesh:
    """Replace ``face`` by the lateral surface of the pyramid over it with ``apex``.

    The three new triangles traverse the old face's boundary in the same
    direction, so orientation is preserved. The apex is appended last.
    """
    x, y, z = (int(i) for i in mesh.faces[face])
    q = mesh.n_vertices
    faces = [tuple(f) for i, f in enumerate(mesh.faces.tolist()) if i != face]
    faces += [(x, y, q), (y, z, q), (z, x, q)]
    return build_mesh(np.vstack([mesh.vertices, np.asarray(apex, dtype=float)]), faces)


def build_t2(t1: FlexedMesh, apex=DEFAULT_APEX) -> FlexedMesh:
    """Replace triangle CVA of T1 by the three lateral faces of pyramid ACVB1."""
    mesh, lab = t1.mesh, t1.labels
    b1 = np.asarray(apex, dtype=float)
    abc = mesh.vertices[[lab["A"], lab["B"], lab["C"]]]
    if _plane_distance(abc, b1) <= 1e-9 * mesh.diameter:
        raise CoplanarApex("apex B1 lies in the plane ABC")
    target = {lab["A"], lab["C"], lab["V"]}
    (k,) = [i for i, f in enumerate(mesh.faces.tolist()) if set(f) == target]
    new = cap_face(mesh, k, b1)
    known = {i: t1.field[i] for i in range(mesh.n_vertices)}
    w = extend_field(new, known)
    return FlexedMesh(new, w, {**lab, "B1": mesh.n_vertices})


# --- Bricard octahedra ----------------------------------------------------

DEFAULT_BRICARD_SEED = ((1.2, 0.0, 0.3), (0.0, 1.0, -0.4), (0.3, -0.5, 1.1))


def _z_half_turn(p: np.ndarray) -> np.ndarray:
    return p * np.array([-1.0, -1.0, 1.0])


def bricard_type1(seed=DEFAULT_BRICARD_SEED) -> Mesh:
    """Bricard octahedron of type 1 from seed points A, B, V.

    The other three vertices are their images under ``(x, y, z) -> (-x, -y, z)``.
    Vertex order is A, B, V, A1, B1, V1.
    """
    a, b, v = (np.asarray(p, dtype=float) for p in seed)
    pts = np.array([a, b, v, _z_half_turn(a), _z_half_turn(b), _z_half_turn(v)])
    _check_distinct(pts, ["A", "B", "V", "A1", "B1", "V1"])
    return build_mesh(pts, octahedron_faces(0, 1, 2, 3, 4, 5))


def _check_distinct(pts, names) -> None:
    scale = max(np.ptp(pts, axis=0).max(), 1.0)
    for i, j in itertools.combinations(range(len(pts)), 2):
        if np.linalg.norm(pts[i] - pts[j]) <= 1e-12 * scale:
            raise DegenerateFace(f"vertices {names[i]} and {names[j]} coincide")


def half_turn(point, direction):
    """Rotation by pi about the line through ``point`` with ``direction``."""
    c = np.asarray(point, dtype=float)
    d = np.asarray(direction, dtype=float)
    d = d / np.linalg.norm(d)

    def apply(x):
        r = np.asarray(x, dtype=float) - c
        return c + 2.0 * np.dot(r, d) * d - r

    return apply


def axis_directions(k, m, count: int = 12, offset: float = 0.1) -> list[np.ndarray]:
    """Unit vectors orthogonal to ``m - k``, evenly spread over half a turn."""
    u = np.asarray(m, dtype=float) - np.asarray(k, dtype=float)
    u /= np.linalg.norm(u)
    helper = np.eye(3)[np.argmin(np.abs(u))]
    e1 = np.cross(u, helper)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(u, e1)
    angles = offset + np.pi * np.arange(count) / count
    return [np.cos(t) * e1 + np.sin(t) * e2 for t in angles]


def glue_bricard(piece: FlexedMesh, edge: tuple[str, str], direction,
                 names: tuple[str, str] | None = None) -> FlexedMesh:
    """Swap the two triangles at ``edge`` for the rest of a Bricard octahedron.

    Let ``edge = (a, v)`` and let ``b``, ``b1`` be the third vertices of the
    two triangles on it. The half-turn ``s`` about the axis through the
    midpoint of ``b b1`` with the given direction (orthogonal to ``b1 - b``)
    swaps ``b`` and ``b1``; the octahedron on ``a, b, v, s(a), b1, s(v)`` is
    of Bricard type 1 and contains both triangles. They are removed from both
    pieces and the remainders are glued along the quadrilateral ``a b v b1``.
    The field is extended to the two new vertices.
    """
    mesh, lab = piece.mesh, piece.labels
    a, v = lab[edge[0]], lab[edge[1]]
    f1, f2 = mesh.edge_faces[(min(a, v), max(a, v))]
    third = {}
    for f in (f1, f2):
        (o,) = set(mesh.faces[f].tolist()) - {a, v}
        third[f] = o
    # b is the third vertex of the face in which a -> b -> v appears cyclically
    def cyc(f, x, y):
        g = mesh.faces[f].tolist()
        return any(g[r] == x and g[(r + 1) % 3] == y for r in range(3))

    if cyc(f1, a, third[f1]):
        b, b1 = third[f1], third[f2]
    else:
        b, b1 = third[f2], third[f1]
    p = mesh.vertices
    d = np.asarray(direction, dtype=float)
    d = d / np.linalg.norm(d)
    chord = p[b1] - p[b]
    if abs(np.dot(d, chord)) > 1e-9 * np.linalg.norm(chord):
        raise InvalidParameter("axis direction must be orthogonal to the chord b b1")
    s = half_turn(0.5 * (p[b] + p[b1]), d)
    na, nv = mesh.n_vertices, mesh.n_vertices + 1
    new_pts = np.vstack([p, s(p[a]), s(p[v])])
    oct_faces = octahedron_faces(a, b, v, na, b1, nv)
    # (a, b, v) carries the mesh's own orientation, so the octahedron must be
    # reversed for the remainders to glue consistently
    oct_faces = [f[::-1] for f in oct_faces]
    shared = {frozenset((a, b, v)), frozenset((b1, a, v))}
    faces = [tuple(f) for i, f in enumerate(mesh.faces.tolist()) if i not in (f1, f2)]
    faces += [f for f in oct_faces if frozenset(f) not in shared]
    glued = build_mesh(new_pts, faces)
    known = {i: piece.field[i] for i in range(mesh.n_vertices)}
    w = extend_field(glued, known)
    n1, n2 = names or (f"{edge[0]}'", f"{edge[1]}'")
    return FlexedMesh(glued, w, {**lab, n1: na, n2: nv})


# --- the flux counterexample ---------------------------------------------

@dataclass(frozen=True)
class CounterexampleParams:
    tetrahedron: tuple = DEFAULT_TETRAHEDRON
    barycentric: tuple = DEFAULT_BARYCENTRIC
    apex: tuple = DEFAULT_APEX
    magnitude: float = 1.0
    axis_count: int = 12
    axis_offset: float = 0.1
    repair: bool = True
    tol_coplanar: float | None = None

    @classmethod
    def from_dict(cls, data: dict) -> "CounterexampleParams":
        known = set(cls.__dataclass_fields__)
        extra = set(data) - known
        if extra:
            raise InvalidParameter(f"unknown counterexample parameters: {sorted(extra)}")
        out = dict(data)
        for key in ("tetrahedron", "barycentric", "apex"):
            if key in out:
                out[key] = _as_tuple(out[key])
        return cls(**out)


def _as_tuple(x):
    return tuple(_as_tuple(y) for y in x) if isinstance(x, (list, tuple)) else float(x)


@dataclass(frozen=True)
class Counterexample:
    """Everything built on the way to the flux counterexample."""

    t1: FlexedMesh
    t2: FlexedMesh
    glued: FlexedMesh
    final: FlexedMesh
    axes: list = field(default_factory=list)

    @property
    def mesh(self) -> Mesh:
        return self.final.mesh

    @property
    def field(self) -> np.ndarray:
        return self.final.field

    def base_area(self) -> float:
        lab = self.t1.labels
        a, b, c = self.t1.mesh.vertices[[lab["A"], lab["B"], lab["C"]]]
        return 0.5 * float(np.linalg.norm(np.cross(b - a, c - a)))

    def expected_flux(self) -> float:
        """Area(ABC) * |w_V| / 3: only V moves, normal to the flat triangle."""
        s = float(np.linalg.norm(self.t1.field[self.t1.labels["V"]]))
        return self.base_area() * s / 3.0


def predicate_table(mesh: Mesh, tol: float | None = None) -> list[dict]:
    return [{"vertex": v,
             "star_coplanar": vertex_star_coplanar(mesh, v, tol),
             "three_edges_coplanar": three_incident_edges_coplanar(mesh, v, tol)}
            for v in range(mesh.n_vertices)]


def predicates_hold(mesh: Mesh, tol: float | None = None) -> bool:
    """True if no vertex has a planar star or three coplanar incident edges."""
    return not any(r["star_coplanar"] or r["three_edges_coplanar"]
                   for r in predicate_table(mesh, tol))


def build_counterexample(params: CounterexampleParams = CounterexampleParams()) -> Counterexample:
    """Closed polyhedron with an infinitesimal flex of nonzero flux.

    T1 -> T2 -> glue a Bricard octahedron on the triangles at AV. The glued
    polyhedron still has three coplanar edges at B (BA, BC, BV) and at C
    (CA, CB, CV); with ``repair`` a second octahedron is glued on the
    triangles at BC, which removes that edge. Axis directions are tried in a
    fixed order until no vertex has a planar star or three coplanar edges.
    """
    t1 = build_t1(params.tetrahedron, params.barycentric, params.magnitude)
    t2 = build_t2(t1, params.apex)
    p = t2.mesh.vertices
    lab = t2.labels
    first = axis_directions(p[lab["B"]], p[lab["B1"]], params.axis_count, params.axis_offset)
    # second gluing is on edge (C, B); its octahedron swaps V and D
    second = axis_directions(p[lab["V"]], p[lab["D"]], params.axis_count, params.axis_offset)
    tried = 0
    for d1 in first:
        try:
            glued = glue_bricard(t2, ("A", "V"), d1, names=("A1", "V1"))
        except MeshValidationError:
            continue
        if not params.repair:
            tried += 1
            if predicates_hold(glued.mesh, params.tol_coplanar):
                return Counterexample(t1, t2, glued, glued, [d1])
            continue
        for d2 in second:
            tried += 1
            try:
                final = glue_bricard(glued, ("C", "B"), d2, names=("C2", "B2"))
            except MeshValidationError:
                continue
            if predicates_hold(final.mesh, params.tol_coplanar):
                return Counterexample(t1, t2, glued, final, [d1, d2])
    raise PredicateFailureExhausted(
        f"none of {tried} axis choices gives a polyhedron without planar stars "
        f"or coplanar edge triples")


# --- Delta_K family -------------------------------------------------------

@dataclass(frozen=True)
class DeltaKParams:
    """Lateral length ``l`` and an optional flat-subdivision schedule.

    ``bd`` holds parameters in (0, 1) along BD (from B); ``abd`` and ``bcd``
    hold barycentric weights of points inside triangles ABD and BCD.
    """

    l: float
    bd: tuple = ()
    abd: tuple = ()
    bcd: tuple = ()


@dataclass(frozen=True)
class DeltaKClosedForm:
    M: float
    phi: float
    psi: float
    phi_printed: float  # variant with an extra factor 2 in the denominator


def _check_l(l: float) -> None:
    if not np.isfinite(l) or l <= DELTA_K_MIN_L:
        raise InvalidParameter(f"l must exceed 1/sqrt(3) = {DELTA_K_MIN_L:.6f}, got {l}")


def delta_k_mesh(params: DeltaKParams | float) -> Mesh:
    """Tetrahedron with |BC| = |CD| = |BD| = 1 and lateral edges l, optionally subdivided.

    Vertex order is A, B, C, D, then inserted points: first those on BD, then
    those inside ABD, then inside BCD. Faces ABC and ACD are never touched.
    """
    if not isinstance(params, DeltaKParams):
        params = DeltaKParams(float(params))
    l = params.l
    _check_l(l)
    A = np.array([0.5, SQRT3 / 6.0, np.sqrt(l * l - 1.0 / 3.0)])
    B = np.zeros(3)
    C = np.array([1.0, 0.0, 0.0])
    D = np.array([0.5, SQRT3 / 2.0, 0.0])
    mesh = build_mesh([A, B, C, D], [(0, 1, 2), (0, 2, 3), (0, 3, 1), (1, 3, 2)])

    ts = [float(t) for t in params.bd]
    if any(not 0.0 < t < 1.0 for t in ts) or len(set(ts)) != len(ts):
        raise InvalidSubdivision(f"points on BD need distinct parameters in (0, 1), got {ts}")
    start, t_prev = 1, 0.0
    try:
        for t in sorted(ts):
            mesh = split_edge(mesh, start, 3, (t - t_prev) / (1.0 - t_prev))
            start, t_prev = mesh.n_vertices - 1, t
    except MeshValidationError as exc:
        raise InvalidSubdivision(f"BD subdivision degenerates: {exc}") from None

    regions = [(params.abd, (0, 1, 3)), (params.bcd, (1, 2, 3))]
    for points, corners in regions:
        tri = mesh.vertices[list(corners)]
        for bary in points:
            w = np.asarray(bary, dtype=float)
            if w.shape != (3,) or np.any(w <= 0) or abs(w.sum() - 1.0) > 1e-12:
                raise InvalidSubdivision(
                    f"interior point needs positive barycentric weights summing to 1, got {w.tolist()}")
            mesh = _insert_in_region(mesh, tri, w @ tri)
    return mesh


def _insert_in_region(mesh: Mesh, tri: np.ndarray, q: np.ndarray, eps: float = 1e-9) -> Mesh:
    for k, face in enumerate(mesh.faces.tolist()):
        pts = mesh.vertices[face]
        if max(_plane_distance(tri, x) for x in pts) > 1e-12 * mesh.diameter:
            continue
        # barycentric coordinates of q in this face (least squares in its plane)
        M = np.column_stack([pts[1] - pts[0], pts[2] - pts[0]])
        uv, *_ = np.linalg.lstsq(M, q - pts[0], rcond=None)
        w = np.array([1.0 - uv.sum(), uv[0], uv[1]])
        if np.all(w > -eps) and np.linalg.norm(M @ uv - (q - pts[0])) <= eps * mesh.diameter:
            if np.any(w <= eps):
                raise InvalidSubdivision(f"point {q.tolist()} lies on an existing edge")
            try:
                return subdivide_face(mesh, k, w / w.sum())
            except MeshValidationError as exc:
                raise InvalidSubdivision(f"subdivision degenerates: {exc}") from None
    raise InvalidSubdivision(f"point {q.tolist()} is not inside the target triangle")


def delta_k_closed_form(l: float) -> DeltaKClosedForm:
    """Closed-form total mean curvature of the family at lateral length ``l``.

    ``phi`` is the dihedral at the unit base edges, ``psi`` at the lateral
    edges. ``phi`` follows the coordinate computation; ``phi_printed`` keeps
    the variant with ``2*sqrt(3)`` in the denominator, which
    disagrees with the regular tetrahedron at ``l = 1``.
    """
    _check_l(l)
    root = np.sqrt(4.0 * l * l - 1.0)
    phi = float(np.arccos(1.0 / (SQRT3 * root)))
    psi = float(np.arccos((2.0 * l * l - 1.0) / (4.0 * l * l - 1.0)))
    phi_printed = float(np.arccos(1.0 / (2.0 * SQRT3 * root)))
    M = 1.5 * (np.pi - phi) + 1.5 * l * (np.pi - psi)
    return DeltaKClosedForm(float(M), phi, psi, phi_printed)


def random_delta_k_schedule(rng: np.random.Generator, l: float, max_points: int = 3) -> DeltaKParams:
    """Random schedule of points on BD and inside ABD, BCD."""
    def bary(n):
        return tuple(tuple(float(x) for x in rng.dirichlet([2.0, 2.0, 2.0])) for _ in range(n))

    bd = tuple(sorted(float(x) for x in rng.uniform(0.1, 0.9, rng.integers(0, max_points + 1))))
    return DeltaKParams(l, bd, bary(rng.integers(0, max_points + 1)),
                        bary(rng.integers(0, max_points + 1)))
