import numpy as np
import pytest
from scipy.spatial import ConvexHull

from flexpoly.mesh import build_mesh, oriented_volume

# criterion number -> (passed, detail); filled by test_acceptance.py
ACCEPTANCE_RESULTS: dict[str, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_RESULTS, key=lambda k: [int(x) if x.isdigit() else x
                                                         for x in k.replace("-", " ").split()]):
        ok, detail = ACCEPTANCE_RESULTS[key]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  criterion {key}: {detail}")


def hull_mesh(points):
    """Closed mesh on the convex hull of ``points``, faces oriented outward."""
    pts = np.asarray(points, dtype=float)
    hull = ConvexHull(pts)
    center = pts[hull.vertices].mean(axis=0)
    faces = []
    for simplex in hull.simplices:
        a, b, c = pts[simplex]
        if np.dot(np.cross(b - a, c - a), a - center) < 0:
            simplex = simplex[[0, 2, 1]]
        faces.append(simplex)
    used = np.unique(np.concatenate(faces))
    remap = {old: new for new, old in enumerate(used)}
    faces = [[remap[i] for i in f] for f in faces]
    mesh = build_mesh(pts[used], faces)
    assert oriented_volume(mesh) > 0
    return mesh


def random_mesh(rng, n=12, dent=True):
    """Random sphere-type mesh; with ``dent`` the radii are jittered so it is usually not convex."""
    pts = rng.standard_normal((n, 3))
    pts /= np.linalg.norm(pts, axis=1)[:, None]
    mesh = hull_mesh(pts)
    if dent:
        scale = rng.uniform(0.6, 1.2, mesh.n_vertices)
        mesh = build_mesh(mesh.vertices * scale[:, None], mesh.faces)
    return mesh


def octahedron(perturb=0.0, rng=None):
    pts = np.vstack([np.eye(3), -np.eye(3)])
    if perturb:
        pts = pts + rng.uniform(-perturb, perturb, pts.shape)
    return hull_mesh(pts)


@pytest.fixture
def rng():
    return np.random.default_rng(20100706)


@pytest.fixture
def tetra_coords():
    # explicit regular tetrahedron, independent of the library's builders
    B = np.array([0.0, 0.0, 0.0])
    C = np.array([1.0, 0.0, 0.0])
    D = np.array([0.5, np.sqrt(3) / 2, 0.0])
    A = np.array([0.5, np.sqrt(3) / 6, np.sqrt(2.0 / 3.0)])
    return np.array([A, B, C, D])


@pytest.fixture
def tetra(tetra_coords):
    return build_mesh(tetra_coords, [(0, 1, 2), (0, 2, 3), (0, 3, 1), (1, 3, 2)])
