import numpy as np
import pytest

from flexpoly.constructions import (
    CounterexampleParams,
    DELTA_K_MIN_L,
    DeltaKParams,
    axis_directions,
    bricard_type1,
    build_counterexample,
    build_t1,
    build_t2,
    delta_k_closed_form,
    delta_k_mesh,
    glue_bricard,
    half_turn,
    predicate_table,
    predicates_hold,
    random_delta_k_schedule,
)
from flexpoly.errors import (
    CoplanarApex,
    DegenerateFace,
    InvalidBarycentric,
    InvalidParameter,
    InvalidSubdivision,
)
from flexpoly.mesh import dihedral_angle, edge_records, metric_summary, total_mean_curvature
from flexpoly.rigidity import constraint_residual, flex_space, flux

from test_mesh import TETRA_TMC, half_plane_angle


@pytest.fixture(scope="module")
def ce():
    return build_counterexample()


# --- T1 / T2 ---------------------------------------------------------------

def test_t1_shape_and_flux():
    t1 = build_t1()
    assert (t1.mesh.n_vertices, t1.mesh.n_faces) == (5, 6)
    assert flex_space(t1.mesh).dim == 1
    # flat triangle ABC of area 1.7, only V moves, unit normal speed
    assert flux(t1.mesh, t1.field) == pytest.approx(1.7 / 3, rel=1e-12)


def test_t1_unpacks():
    mesh, w = build_t1()
    assert w.shape == (5, 3)


def test_t1_rejects_boundary_point():
    with pytest.raises(InvalidBarycentric):
        build_t1(barycentric=(0.5, 0.5, 0.0))


def test_t2_keeps_flux_and_flex():
    t1 = build_t1()
    t2 = build_t2(t1)
    assert t2.mesh.n_vertices == 6
    assert np.abs(constraint_residual(t2.mesh, t2.field)).max() < 1e-12
    assert flux(t2.mesh, t2.field) == pytest.approx(flux(t1.mesh, t1.field), rel=1e-12)


def test_t2_coplanar_apex():
    with pytest.raises(CoplanarApex):
        build_t2(build_t1(), apex=(0.5, 0.5, 0.0))


# --- Bricard ---------------------------------------------------------------

def test_bricard_symmetry():
    mesh = bricard_type1()
    p = mesh.vertices
    assert np.allclose(p[3:], p[:3] * [-1, -1, 1])


def test_bricard_degenerate_seed():
    with pytest.raises(DegenerateFace):
        bricard_type1(((1.0, 0, 0), (0, 1.0, 0), (0, 0, 1.0)))


def test_bricard_metrics_vanish_by_symmetry():
    # the half-turn reverses the orientation of the surface, so alpha -> 2 pi - alpha
    mesh = bricard_type1()
    s = metric_summary(mesh)
    assert abs(s.total_mean_curvature) < 1e-12
    assert abs(s.volume) < 1e-14


def test_half_turn():
    s = half_turn([1.0, 0, 0], [0, 0, 1.0])
    assert np.allclose(s([2.0, 0, 5]), [0, 0, 5])
    assert np.allclose(s(s([0.3, 0.7, -0.2])), [0.3, 0.7, -0.2])


def test_axis_directions_orthogonal():
    k, m = np.zeros(3), np.array([1.0, 2.0, 0.5])
    for d in axis_directions(k, m):
        assert abs(np.dot(d, m)) < 1e-14
        assert np.linalg.norm(d) == pytest.approx(1.0)


def test_glue_rejects_non_orthogonal_axis():
    t2 = build_t2(build_t1())
    with pytest.raises(InvalidParameter):
        glue_bricard(t2, ("A", "V"), [1.0, 1.0, 1.0])


# --- counterexample ---------------------------------------------------------

def test_counterexample_structure(ce):
    mesh = ce.mesh
    assert mesh.euler_characteristic == 2
    assert (mesh.n_vertices, mesh.n_faces) == (10, 16)
    assert flex_space(mesh).dim >= 1
    assert np.abs(constraint_residual(mesh, ce.field)).max() < 1e-10


def test_counterexample_predicates(ce):
    assert predicates_hold(ce.mesh, 1e-9 * ce.mesh.diameter)


def test_counterexample_flux(ce):
    assert ce.base_area() == pytest.approx(1.7, rel=1e-14)
    assert flux(ce.mesh, ce.field) == pytest.approx(ce.expected_flux(), rel=1e-9)


def test_single_gluing_leaves_coplanar_edges(ce):
    # the first gluing alone leaves BA, BC, BV and CA, CB, CV coplanar
    table = predicate_table(ce.glued.mesh, 1e-9 * ce.glued.mesh.diameter)
    lab = ce.glued.labels
    bad = {r["vertex"] for r in table if r["three_edges_coplanar"]}
    assert bad == {lab["B"], lab["C"]}


def test_without_repair_no_axis_works():
    from flexpoly.errors import PredicateFailureExhausted
    with pytest.raises(PredicateFailureExhausted):
        build_counterexample(CounterexampleParams(repair=False))


def test_gluing_keeps_untouched_dihedrals(ce):
    # edges of T2 whose incident faces survive both gluings keep their angles
    t2 = ce.t2.mesh
    final = ce.mesh
    surviving = {frozenset(f) for f in final.faces.tolist()}
    checked = 0
    for (i, j), (f, g) in t2.edge_faces.items():
        if frozenset(t2.faces[f].tolist()) in surviving and frozenset(t2.faces[g].tolist()) in surviving:
            assert dihedral_angle(final, (i, j)) == pytest.approx(dihedral_angle(t2, (i, j)), abs=1e-12)
            checked += 1
    assert checked > 0


def test_params_from_dict():
    p = CounterexampleParams.from_dict({"apex": [0.4, 0.7, -0.9], "magnitude": 2.0})
    assert p.apex == (0.4, 0.7, -0.9)
    with pytest.raises(InvalidParameter):
        CounterexampleParams.from_dict({"bogus": 1})


def test_flux_scales_with_magnitude():
    ce2 = build_counterexample(CounterexampleParams(magnitude=2.0))
    assert flux(ce2.mesh, ce2.field) == pytest.approx(2 * 1.7 / 3, rel=1e-9)


# --- Delta_K ---------------------------------------------------------------

def test_delta_k_regular():
    mesh = delta_k_mesh(1.0)
    for rec in edge_records(mesh):
        assert rec.length == pytest.approx(1.0, abs=1e-15)
    assert total_mean_curvature(mesh) == pytest.approx(TETRA_TMC, rel=1e-14)
    assert delta_k_closed_form(1.0).M == pytest.approx(TETRA_TMC, rel=1e-14)


def test_delta_k_printed_variant_disagrees():
    cf = delta_k_closed_form(1.0)
    assert cf.phi == pytest.approx(np.arccos(1 / 3), abs=1e-15)
    assert cf.phi_printed == pytest.approx(np.arccos(1 / 6), abs=1e-15)


@pytest.mark.parametrize("l", [0.6, 0.8, 1.3, 3.0])
def test_delta_k_angles_against_half_planes(l):
    mesh = delta_k_mesh(l)
    p = mesh.vertices
    cf = delta_k_closed_form(l)
    # A=0, B=1, C=2, D=3; BC is a base edge, AB lateral
    assert half_plane_angle(p, 1, 2, 0, 3) == pytest.approx(cf.phi, abs=1e-12)
    assert half_plane_angle(p, 0, 1, 2, 3) == pytest.approx(cf.psi, abs=1e-12)


@pytest.mark.parametrize("l", [DELTA_K_MIN_L, 0.5, float("nan")])
def test_delta_k_rejects_small_l(l):
    with pytest.raises(InvalidParameter):
        delta_k_mesh(l)


def test_delta_k_bad_schedule():
    with pytest.raises(InvalidSubdivision):
        delta_k_mesh(DeltaKParams(1.0, bd=(0.5, 0.5)))
    with pytest.raises(InvalidSubdivision):
        delta_k_mesh(DeltaKParams(1.0, abd=((0.5, 0.5, 0.0),)))


def test_delta_k_schedule_counts(rng):
    params = DeltaKParams(1.2, bd=(0.3, 0.6), abd=((0.2, 0.3, 0.5),), bcd=((0.4, 0.4, 0.2),))
    mesh = delta_k_mesh(params)
    assert mesh.n_vertices == 8
    assert mesh.euler_characteristic == 2
    sched = random_delta_k_schedule(rng, 1.2)
    assert sched.l == 1.2
